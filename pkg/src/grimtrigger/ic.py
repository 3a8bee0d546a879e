"""Implementability of an allocation under grim-trigger punishments.

A sender gains by pooling types into belief mu exactly when G_i(mu) exceeds the
expected truthful payoff at mu. Four independent ways to find the worst mu are offered.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .beliefs import TestBeliefSet, enumerate_vertices, pairwise_prefilter
from .lp import OPTIMAL, LinearProgram, NumericalError, solve_lp
from .model import EPS_IC, EPS_SUM, Allocation, Belief, ModelSpec, interim_payoff, validate_allocation
from .punishment import grim_trigger

METHODS = ("vertex", "primal-lp", "dual-lp", "grid")
GRID_K = 40
MAX_GRID_POINTS = 5_000_000


@dataclass(frozen=True, eq=False)
class DeviationReport:
    sender_index: int
    implementable: bool
    boundary: bool  # 0 < gap <= EPS_IC
    worst_belief: Belief
    deviation_gap: float
    grim_set: tuple[int, ...]
    alpha: float
    residual: np.ndarray  # weight on each degenerate belief
    method: str
    maximizers: tuple[Belief, ...] = ()

    def to_dict(self, model: ModelSpec | None = None) -> dict:
        types = model.senders[self.sender_index].types if model is not None else None
        return {
            "sender": self.sender_index,
            "implementable": self.implementable,
            "boundary": self.boundary,
            "method": self.method,
            "deviation_gap": self.deviation_gap,
            "worst_belief": self.worst_belief.probs.tolist(),
            "grim_set": [model.outcomes[r] for r in self.grim_set] if model is not None else list(self.grim_set),
            "maximizers": [b.probs.tolist() for b in self.maximizers],
            "deviation_distribution": {
                "alpha": self.alpha,
                "pooled_belief": self.worst_belief.probs.tolist(),
                "residual": (
                    dict(zip(types, self.residual.tolist())) if types is not None else self.residual.tolist()
                ),
            },
        }


@dataclass(frozen=True, eq=False)
class ImplementabilityReport:
    implementable: bool
    reports: tuple[DeviationReport, ...]

    def to_dict(self, model: ModelSpec | None = None) -> dict:
        return {"implementable": self.implementable, "senders": [r.to_dict(model) for r in self.reports]}


def deviation_gap_at(model: ModelSpec, p: Allocation, mu: Belief) -> float:
    w = interim_payoff(model, p, mu.sender_index)
    return grim_trigger(model, mu).value - float(mu.probs @ w)


def deviation_split(prior: np.ndarray, mu: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest alpha with prior - alpha * mu >= 0, and the leftover mass per type."""
    supp = mu > EPS_SUM
    alpha = min(1.0, float(np.min(prior[supp] / mu[supp])))
    residual = prior - alpha * mu
    residual[residual <= EPS_SUM] = 0.0  # rounding leftovers
    return alpha, residual


def _report(model, i, method, mu, gap, maximizers) -> DeviationReport:
    belief = Belief(i, mu)
    alpha, residual = deviation_split(model.senders[i].prior, belief.probs)
    return DeviationReport(
        sender_index=i,
        implementable=bool(gap <= EPS_IC),
        boundary=bool(0.0 < gap <= EPS_IC),
        worst_belief=belief,
        deviation_gap=float(gap),
        grim_set=grim_trigger(model, belief).minimizers,
        alpha=alpha,
        residual=residual,
        method=method,
        maximizers=tuple(maximizers) or (belief,),
    )


def _clean(mu: np.ndarray) -> np.ndarray:
    mu = np.clip(mu, 0.0, None)
    return mu / mu.sum()


def _max_over(model, p, i, method, candidates: np.ndarray) -> DeviationReport:
    u = model.senders[i].payoff
    w = interim_payoff(model, p, i)
    gaps = (candidates @ u.T).min(axis=1) - candidates @ w
    best = float(gaps.max())
    arg = int(np.argmax(gaps))
    maxi = [Belief(i, candidates[k]) for k in np.flatnonzero(gaps >= best - EPS_IC)]
    return _report(model, i, method, candidates[arg], best, maxi)


def simplex_grid(n: int, k: int) -> np.ndarray:
    """All points of the simplex in R^n whose coordinates are multiples of 1/k."""
    count = comb(k + n - 1, n - 1)
    if count > MAX_GRID_POINTS:
        raise ValueError(f"grid with {count} points is too large; lower k")
    # stars and bars: bar positions among k + n - 1 slots
    bars = np.array(list(combinations(range(k + n - 1), n - 1)), dtype=int).reshape(count, n - 1)
    edges = np.hstack([np.full((count, 1), -1), bars, np.full((count, 1), k + n - 1)])
    return (np.diff(edges, axis=1) - 1) / k


def _primal_lp(model, p, i) -> DeviationReport:
    u = model.senders[i].payoff
    w = interim_payoff(model, p, i)
    R, n = u.shape
    # variables (mu_1..mu_n, z); maximise z with z <= mu . (u_r - w) for all r
    c = np.zeros(n + 1)
    c[n] = 1.0
    A_ub = np.hstack([-(u - w[None, :]), np.ones((R, 1))])
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    lower = np.append(np.zeros(n), -np.inf)
    res = solve_lp(LinearProgram(c, A_ub, np.zeros(R), A_eq, [1.0], lower))
    if res.status != OPTIMAL:
        raise NumericalError(f"deviation LP for sender {i} reported {res.status}")
    return _report(model, i, "primal-lp", _clean(res.x[:n]), res.value, ())


def _dual_lp(model, p, i) -> DeviationReport:
    u = model.senders[i].payoff
    w = interim_payoff(model, p, i)
    R, n = u.shape
    # variables (rho_1..rho_R, s); minimise s with sum_r rho_r (u_r(t) - w_t) <= s for all t
    c = np.zeros(R + 1)
    c[R] = -1.0
    A_ub = np.hstack([(u - w[None, :]).T, -np.ones((n, 1))])
    A_eq = np.hstack([np.ones((1, R)), np.zeros((1, 1))])
    lower = np.append(np.zeros(R), -np.inf)
    res = solve_lp(LinearProgram(c, A_ub, np.zeros(n), A_eq, [1.0], lower))
    if res.status != OPTIMAL:
        raise NumericalError(f"punishment-lottery LP for sender {i} reported {res.status}")
    y = np.clip(res.duals_ub, 0.0, None)
    if y.sum() <= 0:
        raise NumericalError(f"punishment-lottery LP for sender {i} returned zero multipliers")
    return _report(model, i, "dual-lp", y / y.sum(), -res.value, ())


def check_sender_ic(
    model: ModelSpec,
    p: Allocation,
    i: int,
    method: str = "vertex",
    beliefs: TestBeliefSet | None = None,
    grid_k: int = GRID_K,
) -> DeviationReport:
    i = model.sender_index(i)
    validate_allocation(model, p)
    if method == "vertex":
        if beliefs is None:
            beliefs = enumerate_vertices(model, i)
        elif beliefs.sender_index != i:
            raise ValueError(f"test beliefs are for sender {beliefs.sender_index}, not {i}")
        candidates = np.array([b.probs for b in beliefs.all_beliefs()])
        return _max_over(model, p, i, method, candidates)
    if method == "primal-lp":
        return _primal_lp(model, p, i)
    if method == "dual-lp":
        return _dual_lp(model, p, i)
    if method == "grid":
        return _max_over(model, p, i, method, simplex_grid(model.senders[i].n_types, grid_k))
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def check_implementable(
    model: ModelSpec, p: Allocation, method: str = "vertex", parallel: bool = False
) -> ImplementabilityReport:
    validate_allocation(model, p)
    senders = range(model.n_senders)
    if parallel and model.n_senders > 1:
        with ThreadPoolExecutor() as pool:
            reports = list(pool.map(lambda i: check_sender_ic(model, p, i, method), senders))
    else:
        reports = [check_sender_ic(model, p, i, method) for i in senders]
    return ImplementabilityReport(all(r.implementable for r in reports), tuple(reports))


def experiment_implementable(model: ModelSpec, p: Allocation) -> list[bool]:
    """IC against pooling all types at once (the prior), for each sender."""
    validate_allocation(model, p)
    return [
        deviation_gap_at(model, p, Belief(i, s.prior)) <= EPS_IC for i, s in enumerate(model.senders)
    ]


def prefilter_gap(model: ModelSpec, p: Allocation, i: int) -> float:
    """Largest deviation gap over two-type indifference beliefs and degenerate beliefs."""
    i = model.sender_index(i)
    n = model.senders[i].n_types
    beliefs = pairwise_prefilter(model, i).beliefs() + [Belief.degenerate(i, n, t) for t in range(n)]
    return max(deviation_gap_at(model, p, b) for b in beliefs)

