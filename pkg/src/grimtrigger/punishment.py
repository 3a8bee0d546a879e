"""Grim-trigger punishments and pointwise evaluation of the direct grim-trigger mechanism."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import EPS_TIE, Allocation, Belief, ModelError, ModelSpec, validate_allocation


@dataclass(frozen=True)
class PunishmentSet:
    sender_index: int
    belief: Belief
    minimizers: tuple[int, ...]
    value: float

    @property
    def selected(self) -> int:
        """Lexicographically first minimizer (the reported pure punishment)."""
        return self.minimizers[0]


def _check_belief(model: ModelSpec, mu: Belief) -> int:
    i = model.sender_index(mu.sender_index)
    if mu.probs.size != model.senders[i].n_types:
        raise ModelError(f"belief has {mu.probs.size} entries, sender {i} has {model.senders[i].n_types} types")
    return i


def expected_outcome_payoffs(model: ModelSpec, mu: Belief) -> np.ndarray:
    """Sender's expected payoff from each pure outcome at belief ``mu``."""
    i = _check_belief(model, mu)
    return model.senders[i].payoff @ mu.probs


def grim_trigger(model: ModelSpec, mu: Belief) -> PunishmentSet:
    pay = expected_outcome_payoffs(model, mu)
    value = float(pay.min())
    minimizers = tuple(int(r) for r in np.flatnonzero(pay <= value + EPS_TIE))
    return PunishmentSet(mu.sender_index, mu, minimizers, value)


def punishment_value_fn(model: ModelSpec, i: int) -> Callable[[Belief], float]:
    """The concave lower envelope mu -> min_r E_mu[u_i(r, .)] for sender ``i``."""
    i = model.sender_index(i)
    u = model.senders[i].payoff

    def value(mu: Belief) -> float:
        probs = mu.probs if isinstance(mu, Belief) else np.asarray(mu, dtype=float)
        if isinstance(mu, Belief) and mu.sender_index != i:
            raise ModelError(f"belief is for sender {mu.sender_index}, not {i}")
        return float((u @ probs).min())

    return value


@dataclass(frozen=True, eq=False)
class MechanismOutput:
    dist: np.ndarray
    off_path: bool = False
    deviator: int | None = None
    punishment: PunishmentSet | None = None


def evaluate_mechanism(model: ModelSpec, p: Allocation, beliefs: Sequence[Belief]) -> MechanismOutput:
    """Outcome distribution chosen by the grim-trigger mechanism for ``p`` at a belief profile.

    Degenerate profile -> p(t). Exactly one non-degenerate belief -> point mass on that
    sender's first grim-trigger punishment. Otherwise the mechanism is unconstrained and
    a point mass on outcome 0 is returned with ``off_path`` set.
    """
    validate_allocation(model, p)
    if len(beliefs) != model.n_senders:
        raise ModelError(f"need one belief per sender ({model.n_senders}), got {len(beliefs)}")
    for k, mu in enumerate(beliefs):
        if _check_belief(model, mu) != k:
            raise ModelError(f"belief {k} is tagged for sender {mu.sender_index}")
    pooled = [k for k, mu in enumerate(beliefs) if not mu.is_degenerate()]
    if not pooled:
        t = tuple(int(np.argmax(mu.probs)) for mu in beliefs)
        return MechanismOutput(np.array(p.row(t)))
    if len(pooled) == 1:
        k = pooled[0]
        pun = grim_trigger(model, beliefs[k])
        return MechanismOutput(np.eye(model.n_outcomes)[pun.selected], deviator=k, punishment=pun)
    return MechanismOutput(np.eye(model.n_outcomes)[0], off_path=True)
