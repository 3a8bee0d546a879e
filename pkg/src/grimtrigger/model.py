"""Problem instances: senders, outcomes, priors, payoff tables and allocations.

Type profiles are enumerated row-major over senders in declaration order; the
receiver payoff table in the JSON format is laid out with that convention.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

EPS_SUM = 1e-9
EPS_IC = 1e-7
EPS_TIE = 1e-9


class ModelError(ValueError):
    """Raised for malformed or inconsistent model / allocation input."""


MODEL_SCHEMA = {
    "type": "object",
    "required": ["outcomes", "senders", "receiver_payoff"],
    "properties": {
        "outcomes": {"type": "array", "minItems": 1, "items": {"type": ["string", "number"]}},
        "senders": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["types", "prior", "payoff"],
                "properties": {
                    "name": {"type": ["string", "number"]},
                    "types": {"type": "array", "minItems": 1, "items": {"type": ["string", "number"]}},
                    "prior": {"type": "array", "items": {"type": "number"}},
                    "payoff": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                },
            },
        },
        "receiver_payoff": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}

ALLOCATION_SCHEMA = {
    "type": "object",
    "required": ["rows"],
    "properties": {
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["profile", "dist"],
                "properties": {
                    "profile": {"type": "array", "items": {"type": ["string", "number"]}},
                    "dist": {"type": "array", "items": {"type": "number"}},
                },
            },
        }
    },
}


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def check_distribution(probs: np.ndarray, what: str, axis: int = -1) -> None:
    if not np.all(np.isfinite(probs)):
        raise ModelError(f"{what}: non-finite entries")
    if np.any(probs < -EPS_SUM):
        raise ModelError(f"{what}: negative probability")
    sums = probs.sum(axis=axis)
    if np.any(np.abs(sums - 1.0) > EPS_SUM):
        raise ModelError(f"{what}: probabilities sum to {np.ravel(sums)[np.argmax(np.abs(np.ravel(sums) - 1))]!r}, not 1")


@dataclass(frozen=True, eq=False)
class SenderSpec:
    name: str
    types: tuple[str, ...]
    prior: np.ndarray
    payoff: np.ndarray  # (n_outcomes, n_types)

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(str(t) for t in self.types))
        object.__setattr__(self, "prior", _frozen(self.prior))
        object.__setattr__(self, "payoff", _frozen(self.payoff))
        n = len(self.types)
        if n < 1:
            raise ModelError(f"sender {self.name!r}: needs at least one type")
        if len(set(self.types)) != n:
            raise ModelError(f"sender {self.name!r}: duplicate type labels")
        if self.prior.shape != (n,):
            raise ModelError(f"sender {self.name!r}: prior has length {self.prior.size}, expected {n}")
        check_distribution(self.prior, f"sender {self.name!r} prior")
        if np.any(self.prior <= 0):
            raise ModelError(f"sender {self.name!r}: prior is not full-support")
        if self.payoff.ndim != 2 or self.payoff.shape[1] != n:
            raise ModelError(f"sender {self.name!r}: payoff must be |R| x {n}, got {self.payoff.shape}")
        if not np.all(np.isfinite(self.payoff)):
            raise ModelError(f"sender {self.name!r}: non-finite payoff")

    @property
    def n_types(self) -> int:
        return len(self.types)

    def with_prior(self, prior) -> "SenderSpec":
        return SenderSpec(self.name, self.types, prior, self.payoff)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    senders: tuple[SenderSpec, ...]
    outcomes: tuple[str, ...]
    receiver_payoff: np.ndarray  # (n_outcomes, *type_counts)

    def __post_init__(self):
        object.__setattr__(self, "senders", tuple(self.senders))
        object.__setattr__(self, "outcomes", tuple(str(r) for r in self.outcomes))
        if not self.senders:
            raise ModelError("model needs at least one sender")
        if not self.outcomes:
            raise ModelError("model needs at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ModelError("duplicate outcome labels")
        for s in self.senders:
            if s.payoff.shape[0] != len(self.outcomes):
                raise ModelError(f"sender {s.name!r}: payoff has {s.payoff.shape[0]} rows, expected {len(self.outcomes)}")
        v = np.array(self.receiver_payoff, dtype=float)
        counts = self.type_counts
        if v.shape == (len(self.outcomes), int(np.prod(counts))):
            v = v.reshape((len(self.outcomes),) + counts)
        if v.shape != (len(self.outcomes),) + counts:
            raise ModelError(
                f"receiver_payoff must be |R| x |T| = {len(self.outcomes)} x {int(np.prod(counts))}, got {np.shape(self.receiver_payoff)}"
            )
        if not np.all(np.isfinite(v)):
            raise ModelError("non-finite receiver payoff")
        object.__setattr__(self, "receiver_payoff", _frozen(v))

    @property
    def n_senders(self) -> int:
        return len(self.senders)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    @property
    def type_counts(self) -> tuple[int, ...]:
        return tuple(s.n_types for s in self.senders)

    @property
    def n_profiles(self) -> int:
        return int(np.prod(self.type_counts))

    def profiles(self) -> list[tuple[int, ...]]:
        """All type profiles as index tuples, row-major."""
        return list(np.ndindex(*self.type_counts))

    def profile_labels(self, profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(s.types[k] for s, k in zip(self.senders, profile))

    @cached_property
    def joint_prior(self) -> np.ndarray:
        """Independent product prior, shape ``type_counts``."""
        out = np.ones(())
        for s in self.senders:
            out = np.multiply.outer(out, s.prior)
        out.setflags(write=False)
        return out

    def sender_index(self, i: int) -> int:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < self.n_senders:
            raise IndexError(f"sender index {i!r} out of range for {self.n_senders} senders")
        return int(i)

    def outcome_index(self, label) -> int:
        try:
            return self.outcomes.index(str(label))
        except ValueError:
            raise ModelError(f"unknown outcome {label!r}") from None

    def with_sender_prior(self, i: int, prior) -> "ModelSpec":
        senders = list(self.senders)
        senders[i] = senders[i].with_prior(prior)
        return ModelSpec(tuple(senders), self.outcomes, self.receiver_payoff)

    def with_receiver_payoff(self, v) -> "ModelSpec":
        return ModelSpec(self.senders, self.outcomes, v)

    def to_dict(self) -> dict:
        return {
            "outcomes": list(self.outcomes),
            "senders": [
                {"name": s.name, "types": list(s.types), "prior": s.prior.tolist(), "payoff": s.payoff.tolist()}
                for s in self.senders
            ],
            "receiver_payoff": self.receiver_payoff.reshape(self.n_outcomes, -1).tolist(),
        }


@dataclass(frozen=True, eq=False)
class Belief:
    sender_index: int
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ModelError("belief must be a non-empty vector")
        check_distribution(self.probs, "belief")

    @classmethod
    def degenerate(cls, sender_index: int, n_types: int, t: int) -> "Belief":
        e = np.zeros(n_types)
        e[t] = 1.0
        return cls(sender_index, e)

    def is_degenerate(self, tol: float = EPS_TIE) -> bool:
        return bool(self.probs.max() >= 1.0 - tol)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.probs > EPS_SUM))


@dataclass(frozen=True, eq=False)
class Allocation:
    """Map from type profiles to outcome distributions, shape ``(*type_counts, n_outcomes)``."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))
        if self.probs.ndim < 2:
            raise ModelError("allocation table must have at least one type axis and one outcome axis")
        check_distribution(self.probs, "allocation row")

    @classmethod
    def deterministic(cls, model: ModelSpec, choice) -> "Allocation":
        """``choice`` is an integer array of outcome indices with shape ``type_counts``."""
        choice = np.asarray(choice, dtype=int).reshape(model.type_counts)
        return cls(np.eye(model.n_outcomes)[choice])

    @classmethod
    def constant(cls, model: ModelSpec, r: int) -> "Allocation":
        return cls.deterministic(model, np.full(model.type_counts, r))

    def mix(self, other: "Allocation", lam: float) -> "Allocation":
        return Allocation(lam * self.probs + (1.0 - lam) * other.probs)

    def row(self, profile: Sequence[int]) -> np.ndarray:
        return self.probs[tuple(profile)]

    def is_deterministic(self, tol: float = EPS_TIE) -> bool:
        return bool(np.all(self.probs.max(axis=-1) >= 1.0 - tol))

    def to_dict(self, model: ModelSpec) -> dict:
        return {
            "rows": [
                {"profile": list(model.profile_labels(t)), "dist": self.probs[t].tolist()}
                for t in model.profiles()
            ]
        }


def validate_allocation(model: ModelSpec, p: Allocation) -> None:
    expected = model.type_counts + (model.n_outcomes,)
    if p.probs.shape != expected:
        raise ModelError(f"allocation shape {p.probs.shape} does not match model {expected}")


def parse_model(doc: dict) -> ModelSpec:
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelError(f"malformed model document: {exc.message}") from None
    senders = []
    for k, s in enumerate(doc["senders"]):
        payoff = s["payoff"]
        if len({len(row) for row in payoff}) > 1:
            raise ModelError(f"sender {k}: ragged payoff table")
        senders.append(SenderSpec(str(s.get("name", f"sender{k}")), s["types"], s["prior"], payoff))
    v = doc["receiver_payoff"]
    if len({len(row) for row in v}) > 1:
        raise ModelError("ragged receiver_payoff table")
    return ModelSpec(tuple(senders), tuple(doc["outcomes"]), np.array(v, dtype=float))


def load_model(document: str | Path | dict) -> ModelSpec:
    """Parse and validate a model from a JSON string, a path, or an already-decoded dict."""
    return parse_model(_decode(document))


def parse_allocation(model: ModelSpec, doc: dict) -> Allocation:
    try:
        jsonschema.validate(doc, ALLOCATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelError(f"malformed allocation document: {exc.message}") from None
    table = np.full(model.type_counts + (model.n_outcomes,), np.nan)
    seen = set()
    for row in doc["rows"]:
        labels = [str(x) for x in row["profile"]]
        if len(labels) != model.n_senders:
            raise ModelError(f"profile {labels} has wrong length")
        try:
            idx = tuple(s.types.index(lab) for s, lab in zip(model.senders, labels))
        except ValueError:
            raise ModelError(f"profile {labels} uses an unknown type label") from None
        if idx in seen:
            raise ModelError(f"profile {labels} listed twice")
        if len(row["dist"]) != model.n_outcomes:
            raise ModelError(f"profile {labels}: distribution has wrong length")
        seen.add(idx)
        table[idx] = row["dist"]
    if len(seen) != model.n_profiles:
        raise ModelError(f"allocation covers {len(seen)} of {model.n_profiles} profiles")
    return Allocation(table)


def load_allocation(model: ModelSpec, document: str | Path | dict) -> Allocation:
    return parse_allocation(model, _decode(document))


def _decode(document) -> dict:
    if isinstance(document, dict):
        return document
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        try:
            document = Path(document).read_text()
        except OSError as exc:
            raise ModelError(f"cannot read {document}: {exc}") from None
    try:
        return json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None


def interim_outcome_dist(model: ModelSpec, p: Allocation, i: int) -> np.ndarray:
    """Distribution over outcomes faced by each own type of sender ``i`` under truthful reporting.

    Returns shape ``(n_types_i, n_outcomes)``; other senders' types are integrated
    out with their priors. Sender ``i``'s own prior is never read.
    """
    i = model.sender_index(i)
    validate_allocation(model, p)
    n = model.n_senders
    operands: list = [p.probs, list(range(n + 1))]
    for j, s in enumerate(model.senders):
        if j != i:
            operands += [s.prior, [j]]
    return np.einsum(*operands, [i, n])


def interim_payoff(model: ModelSpec, p: Allocation, i: int) -> np.ndarray:
    """Expected payoff to each type of sender ``i`` under truthful reporting."""
    q = interim_outcome_dist(model, p, i)
    u = model.senders[i].payoff
    return np.einsum("tr,rt->t", q, u)


def receiver_value(model: ModelSpec, p: Allocation) -> float:
    validate_allocation(model, p)
    # v has outcome axis first; p has it last
    return float(np.sum(model.joint_prior[..., None] * p.probs * np.moveaxis(model.receiver_payoff, 0, -1)))
