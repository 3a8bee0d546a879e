"""Receiver-optimal implementable allocations as a linear program."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beliefs import TestBeliefSet, enumerate_vertices
from .lp import OPTIMAL, LinearProgram, LPResult, NumericalError, solve_lp
from .model import EPS_IC, EPS_TIE, Allocation, Belief, ModelSpec, receiver_value, validate_allocation
from .punishment import grim_trigger

__all__ = [
    "LinearProgram",
    "LPResult",
    "solve_lp",
    "UnconstrainedOptimum",
    "unconstrained_optimum",
    "Optimum",
    "constrained_optimum",
    "ic_constraint_row",
    "pareto_support_audit",
]


@dataclass(frozen=True, eq=False)
class UnconstrainedOptimum:
    allocation: Allocation
    value: float
    ties: dict  # profile -> all receiver-optimal outcomes there


def _receiver_table(model: ModelSpec) -> np.ndarray:
    """v rearranged to shape (*type_counts, n_outcomes)."""
    return np.moveaxis(model.receiver_payoff, 0, -1)


def unconstrained_optimum(model: ModelSpec) -> UnconstrainedOptimum:
    v = _receiver_table(model)
    best = v.max(axis=-1, keepdims=True)
    is_max = v >= best - EPS_TIE
    choice = np.argmax(is_max, axis=-1)  # first maximiser
    p = Allocation.deterministic(model, choice)
    ties = {t: tuple(int(r) for r in np.flatnonzero(is_max[t])) for t in model.profiles()}
    return UnconstrainedOptimum(p, receiver_value(model, p), ties)


def ic_constraint_row(model: ModelSpec, mu: Belief) -> np.ndarray:
    """Coefficients a with a . p = expected truthful payoff of the sender at belief ``mu``.

    Shape is (*type_counts, n_outcomes), matching ``Allocation.probs``.
    """
    i = model.sender_index(mu.sender_index)
    n = model.n_senders
    weight = np.ones(model.type_counts)
    for j, s in enumerate(model.senders):
        marg = mu.probs if j == i else s.prior
        shape = [1] * n
        shape[j] = marg.size
        weight = weight * marg.reshape(shape)
    # u_i(r, t_i) laid out along axis i and the outcome axis
    u = model.senders[i].payoff.T
    shape = [1] * n + [model.n_outcomes]
    shape[i] = u.shape[0]
    return weight[..., None] * u.reshape(shape)


@dataclass(frozen=True, eq=False)
class Optimum:
    allocation: Allocation
    value: float
    binding: tuple[tuple[int, Belief], ...]
    deterministic: bool
    unconstrained_value: float
    gap_to_first_best: float
    unconstrained: UnconstrainedOptimum | None = None
    lp_status: str = OPTIMAL

    def to_dict(self, model: ModelSpec) -> dict:
        doc = {
            "value": self.value,
            "allocation": self.allocation.to_dict(model),
            "binding": [{"sender": i, "belief": mu.probs.tolist()} for i, mu in self.binding],
            "deterministic": self.deterministic,
            "unconstrained_value": self.unconstrained_value,
            "first_best_gap": self.gap_to_first_best,
        }
        if self.unconstrained is not None:
            doc["first_best_ties"] = [
                {"profile": list(model.profile_labels(t)), "outcomes": [model.outcomes[r] for r in rs]}
                for t, rs in self.unconstrained.ties.items()
                if len(rs) > 1
            ]
        return doc


def constrained_optimum(
    model: ModelSpec,
    test_beliefs: list[TestBeliefSet] | None = None,
    parallel: bool = False,
) -> Optimum:
    if test_beliefs is None:
        if parallel and model.n_senders > 1:
            with ThreadPoolExecutor() as pool:
                test_beliefs = list(pool.map(lambda i: enumerate_vertices(model, i), range(model.n_senders)))
        else:
            test_beliefs = [enumerate_vertices(model, i) for i in range(model.n_senders)]

    shape = model.type_counts + (model.n_outcomes,)
    n_var = int(np.prod(shape))
    P, R = model.n_profiles, model.n_outcomes
    c = (model.joint_prior[..., None] * _receiver_table(model)).ravel()

    rows, rhs, tags = [], [], []
    for tb in test_beliefs:
        for mu in tb.vertices:  # degenerate beliefs never bind
            rows.append(-ic_constraint_row(model, mu).ravel())
            rhs.append(-grim_trigger(model, mu).value)
            tags.append((tb.sender_index, mu))
    A_ub = np.array(rows).reshape(len(rows), n_var)
    A_eq = np.kron(np.eye(P), np.ones((1, R)))
    res = solve_lp(LinearProgram(c, A_ub, np.array(rhs), A_eq, np.ones(P)))
    if res.status != OPTIMAL:
        raise NumericalError(f"allocation LP reported {res.status}")

    raw = res.x.reshape(shape)
    deterministic = bool(np.all(raw.max(axis=-1) >= 1.0 - EPS_TIE))
    clean = np.clip(raw, 0.0, None)
    clean /= clean.sum(axis=-1, keepdims=True)
    p = Allocation(clean)
    slack = np.array(rhs) - A_ub @ res.x if rows else np.zeros(0)
    binding = tuple(tag for tag, s in zip(tags, slack) if s <= EPS_IC)
    first = unconstrained_optimum(model)
    value = receiver_value(model, p)
    return Optimum(p, value, binding, deterministic, first.value, first.value - value, first)


def pareto_support_audit(model: ModelSpec, p: Allocation) -> list[tuple[tuple[int, ...], int, int]]:
    """Triples (profile, r, r') where supported r is strictly worse than r' for every player."""
    validate_allocation(model, p)
    v = _receiver_table(model)
    found = []
    for t in model.profiles():
        for r in np.flatnonzero(p.probs[t] > EPS_TIE):
            for r2 in range(model.n_outcomes):
                if v[t][r2] <= v[t][r]:
                    continue
                if all(s.payoff[r2, ti] > s.payoff[r, ti] for s, ti in zip(model.senders, t)):
                    found.append((t, int(r), r2))
    return found
