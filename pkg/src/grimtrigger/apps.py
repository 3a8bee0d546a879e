"""Generators for three applied settings: audits, grants, and auctions with externalities."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import EPS_TIE, Allocation, ModelError, ModelSpec, SenderSpec

MAX_AUDIT_FIRMS = 4


# ---------------------------------------------------------------- audits


@dataclass(frozen=True)
class FirmParams:
    c: float  # receiver's cost of fining a clean firm
    eps: float  # clean firm's gain from an unjust fine
    prior_pollute: float

    def __post_init__(self):
        if not self.c > 0 or not self.eps > 0:
            raise ModelError("audit parameters c and eps must be strictly positive")
        if not 0 < self.prior_pollute < 1:
            raise ModelError("prior probability of polluting must lie strictly between 0 and 1")


@dataclass(frozen=True)
class AuditParams:
    firms: tuple[FirmParams, ...]

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditParams":
        try:
            firms = tuple(FirmParams(float(f["c"]), float(f["eps"]), float(f["prior_pollute"])) for f in doc["firms"])
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed audit parameters: {exc}") from None
        return cls(firms)

    def to_dict(self) -> dict:
        return {"firms": [{"c": f.c, "eps": f.eps, "prior_pollute": f.prior_pollute} for f in self.firms]}


def audit_outcome_label(fined: int, n_firms: int) -> str:
    return "{" + ",".join(str(j) for j in range(n_firms) if fined >> j & 1) + "}"


def gen_audit_model(params: AuditParams) -> ModelSpec:
    """Outcomes are the sets of fined firms, encoded as bitmasks (bit j set: firm j fined)."""
    n = len(params.firms)
    if not 1 <= n <= MAX_AUDIT_FIRMS:
        raise ModelError(f"audit model supports 1 to {MAX_AUDIT_FIRMS} firms, got {n}")
    R = 2**n
    fined = np.array([[r >> j & 1 for j in range(n)] for r in range(R)], dtype=bool)  # (R, n)
    senders = []
    v = np.zeros((R,) + (2,) * n)
    for j, f in enumerate(params.firms):
        # types in order ("0" clean, "1" polluting)
        u = np.where(fined[:, j, None], [f.eps, -1.0], [0.0, 1.0])
        senders.append(SenderSpec(f"firm{j}", ("0", "1"), [1 - f.prior_pollute, f.prior_pollute], u))
        vj = np.where(fined[:, j, None], [-f.c, 1.0], [0.0, -1.0])  # (R, 2)
        shape = [R] + [1] * n
        shape[1 + j] = 2
        v = v + vj.reshape(shape)
    outcomes = tuple(audit_outcome_label(r, n) for r in range(R))
    return ModelSpec(tuple(senders), outcomes, v)


@dataclass(frozen=True)
class AuditSolution:
    fined: tuple[int, ...]
    indifferent: tuple[int, ...]  # firms exactly on the boundary; excluded from ``fined``
    outcome: int  # bitmask index of the constant outcome


def audit_closed_form(params: AuditParams) -> AuditSolution:
    fined, indifferent = [], []
    for j, f in enumerate(params.firms):
        lhs, rhs = f.c / 2, f.prior_pollute / (1 - f.prior_pollute)
        if abs(lhs - rhs) <= EPS_TIE * max(1.0, rhs):
            indifferent.append(j)
        elif lhs < rhs:
            fined.append(j)
    return AuditSolution(tuple(fined), tuple(indifferent), sum(1 << j for j in fined))


# ---------------------------------------------------------------- grants


@dataclass(frozen=True, eq=False)
class GrantParams:
    f: tuple[np.ndarray, ...]  # payoff from winning, per type
    g: tuple[np.ndarray, ...]  # payoff from losing, per type
    weights: np.ndarray
    priors: tuple[np.ndarray, ...] | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "GrantParams":
        try:
            f = tuple(np.asarray(x, dtype=float) for x in doc["f"])
            g = tuple(np.asarray(x, dtype=float) for x in doc["g"])
            lam = np.asarray(doc["lambda"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed grant parameters: {exc}") from None
        priors = tuple(np.asarray(x, dtype=float) for x in doc["priors"]) if "priors" in doc else None
        return cls(f, g, lam, priors)


def gen_grant_model(
    f: list, g: list, weights, priors: list | None = None
) -> tuple[ModelSpec, Allocation]:
    """One good, one outcome per sender; returns the model and the weighted-welfare allocation.

    Types are listed in increasing order. Ties are broken towards the lowest sender index.
    """
    n = len(f)
    if len(g) != n:
        raise ModelError("f and g must list the same senders")
    lam = np.asarray(weights, dtype=float)
    if lam.shape != (n,) or np.any(lam < 0) or abs(lam.sum() - 1) > 1e-9:
        raise ModelError("welfare weights must be nonnegative, one per sender, and sum to 1")
    senders = []
    for i in range(n):
        fi, gi = np.asarray(f[i], dtype=float), np.asarray(g[i], dtype=float)
        if fi.shape != gi.shape or fi.ndim != 1:
            raise ModelError(f"sender {i}: f and g must be vectors of the same length")
        if np.any(np.diff(fi - gi) < -EPS_TIE):
            warnings.warn(f"sender {i}: f - g is not increasing in type; implementability is not guaranteed")
        u = np.tile(gi, (n, 1))
        u[i] = fi
        prior = np.full(fi.size, 1.0 / fi.size) if priors is None else priors[i]
        senders.append(SenderSpec(f"sender{i}", tuple(str(k) for k in range(fi.size)), prior, u))
    counts = tuple(s.n_types for s in senders)
    v = np.zeros((n,) + counts)
    for i, s in enumerate(senders):
        shape = [n] + [1] * n
        shape[1 + i] = s.n_types
        v = v + lam[i] * s.payoff.reshape(shape)
    model = ModelSpec(tuple(senders), tuple(f"sender{i}" for i in range(n)), v)
    best = v.max(axis=0, keepdims=True)
    choice = np.argmax(v >= best - EPS_TIE, axis=0)
    return model, Allocation.deterministic(model, choice)


# ---------------------------------------------------------------- auctions


@dataclass(frozen=True, eq=False)
class AuctionParams:
    f: tuple[np.ndarray, ...]  # f[i][t] > 0: value of winning
    g: tuple[np.ndarray, ...]  # g[i][r, t] >= 0: harm when r wins instead of i
    cap: float | None = None
    priors: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        n = len(self.f)
        if len(self.g) != n or n == 0:
            raise ModelError("auction needs matching f and g tables for at least one sender")
        for i, (fi, gi) in enumerate(zip(self.f, self.g)):
            if fi.ndim != 1 or gi.shape != (n, fi.size):
                raise ModelError(f"sender {i}: g must have shape ({n}, {fi.size})")
            if np.any(fi <= 0):
                raise ModelError(f"sender {i}: f must be strictly positive")
            if np.any(gi < 0):
                raise ModelError(f"sender {i}: g must be nonnegative")

    @classmethod
    def from_dict(cls, doc: dict) -> "AuctionParams":
        try:
            f = tuple(np.asarray(x, dtype=float) for x in doc["f"])
            g = tuple(np.asarray(x, dtype=float) for x in doc["g"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed auction parameters: {exc}") from None
        priors = tuple(np.asarray(x, dtype=float) for x in doc["priors"]) if "priors" in doc else None
        cap = doc.get("cap")
        return cls(f, g, None if cap is None else float(cap), priors)


@dataclass(frozen=True, eq=False)
class AuctionResult:
    model: ModelSpec
    allocation: Allocation
    winner: np.ndarray  # efficient winner per profile
    outside: np.ndarray  # outside[(i, *t)]: efficient winner without i (-1 if nobody is left)
    transfers: np.ndarray  # transfers[(i, *t)]
    epir_slack: np.ndarray  # u_i(p*) - x_i - u_i(outside); zero when EPIR binds
    positive_iff_winner: bool
    cap_violations: list = field(default_factory=list)  # (sender, profile, transfer)


def _efficient_winner(u_at: np.ndarray, allowed: list[int]) -> int:
    # u_at[j, k]: payoff of sender j if k wins; welfare of k is the column sum over present senders
    welfare = u_at[np.ix_(allowed, allowed)].sum(axis=0)
    best = welfare.max()
    return allowed[int(np.flatnonzero(welfare >= best - EPS_TIE)[0])]


def gen_auction_model(params: AuctionParams) -> AuctionResult:
    n = len(params.f)
    senders = []
    for i in range(n):
        u = -params.g[i].copy()
        u[i] = params.f[i]
        size = params.f[i].size
        prior = np.full(size, 1.0 / size) if params.priors is None else params.priors[i]
        senders.append(SenderSpec(f"bidder{i}", tuple(str(k) for k in range(size)), prior, u))
    counts = tuple(s.n_types for s in senders)
    v = np.zeros((n,) + counts)
    for i, s in enumerate(senders):
        shape = [n] + [1] * n
        shape[1 + i] = s.n_types
        v = v + s.payoff.reshape(shape)
    model = ModelSpec(tuple(senders), tuple(f"bidder{i}" for i in range(n)), v)

    winner = np.zeros(counts, dtype=int)
    outside = np.full((n,) + counts, -1, dtype=int)
    transfers = np.zeros((n,) + counts)
    slack = np.zeros((n,) + counts)
    for t in np.ndindex(*counts):
        u_at = np.array([s.payoff[:, ti] for s, ti in zip(senders, t)])  # (sender, winner)
        w = _efficient_winner(u_at, list(range(n)))
        winner[t] = w
        for i in range(n):
            rest = [j for j in range(n) if j != i]
            # with nobody left the good goes unallocated and i gets nothing
            out_pay = 0.0
            if rest:
                o = _efficient_winner(u_at, rest)
                outside[(i,) + t] = o
                out_pay = u_at[i, o]
            x = u_at[i, w] - out_pay
            transfers[(i,) + t] = x
            slack[(i,) + t] = u_at[i, w] - x - out_pay

    tol = 1e-9
    is_winner = np.stack([winner == i for i in range(n)])
    positive_iff_winner = bool(np.all((transfers > tol) == is_winner))
    violations = []
    for idx in zip(*np.nonzero(transfers < -tol)):
        violations.append((int(idx[0]), tuple(int(k) for k in idx[1:]), float(transfers[idx])))
    if params.cap is not None:
        for idx in zip(*np.nonzero(transfers > params.cap + tol)):
            violations.append((int(idx[0]), tuple(int(k) for k in idx[1:]), float(transfers[idx])))
    return AuctionResult(
        model,
        Allocation.deterministic(model, winner),
        winner,
        outside,
        transfers,
        slack,
        positive_iff_winner,
        violations,
    )
