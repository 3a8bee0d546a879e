"""Finite belief sets on which grim-trigger incentive constraints need to be checked.

The punishment value G_i is the lower envelope of the outcome payoff lines, so the
simplex splits into polytopes K_i(r) where outcome r is a least favourite. Incentive
constraints are linear on each piece, hence checking the vertices of every piece suffices.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import EPS_SUM, EPS_TIE, Belief, ModelSpec

DEDUP_TOL = 1e-8
DET_TOL = 1e-12
_BATCH = 4096


@dataclass(frozen=True, eq=False)
class Region:
    """K_i(r) as ``{mu in simplex : A @ mu <= 0}``; row k compares r against ``competitors[k]``."""

    sender_index: int
    outcome: int
    competitors: tuple[int, ...]
    A: np.ndarray

    def contains(self, mu, tol: float = EPS_TIE) -> bool:
        probs = mu.probs if isinstance(mu, Belief) else np.asarray(mu, dtype=float)
        if np.any(probs < -EPS_SUM) or abs(probs.sum() - 1.0) > EPS_SUM:
            return False
        return bool(np.all(self.A @ probs <= tol))


def region_membership(model: ModelSpec, i: int, r: int) -> Region:
    i = model.sender_index(i)
    if not 0 <= r < model.n_outcomes:
        raise IndexError(f"outcome index {r} out of range")
    u = model.senders[i].payoff
    others = tuple(k for k in range(model.n_outcomes) if k != r)
    A = u[r][None, :] - u[list(others)] if others else np.zeros((0, u.shape[1]))
    return Region(i, r, others, A)


@dataclass(frozen=True, eq=False)
class TestBeliefSet:
    """Degenerate beliefs plus deduplicated non-degenerate vertices of the regions K_i(r).

    ``regions[k]`` lists the outcomes that are least favourite at ``vertices[k]`` and
    ``active[k]`` the active constraints of one certifying system, as labels
    ``("nonneg", t)`` or ``("tie", r, r')``.
    """

    __test__ = False  # not a pytest class

    sender_index: int
    degenerate: tuple[Belief, ...]
    vertices: tuple[Belief, ...]
    regions: tuple[tuple[int, ...], ...]
    active: tuple[tuple[tuple, ...], ...]
    degenerate_regions: tuple[tuple[int, ...], ...] = ()

    def all_beliefs(self) -> list[Belief]:
        return list(self.degenerate) + list(self.vertices)

    def __len__(self) -> int:
        return len(self.degenerate) + len(self.vertices)

    def to_dict(self, model: ModelSpec | None = None) -> dict:
        def names(rs):
            return [model.outcomes[r] for r in rs] if model is not None else list(rs)

        entries = [
            {"probs": b.probs.tolist(), "kind": "degenerate", "regions": names(rs)}
            for b, rs in zip(self.degenerate, self.degenerate_regions or [()] * len(self.degenerate))
        ]
        entries += [
            {"probs": b.probs.tolist(), "kind": "vertex", "regions": names(rs)}
            for b, rs in zip(self.vertices, self.regions)
        ]
        return {"sender": self.sender_index, "beliefs": entries}


def _least_favourites(u: np.ndarray, probs: np.ndarray) -> tuple[int, ...]:
    pay = u @ probs
    return tuple(int(r) for r in np.flatnonzero(pay <= pay.min() + EPS_TIE))


def _region_vertices(u: np.ndarray, r: int) -> list[tuple[np.ndarray, tuple]]:
    """All vertices of K(r) via active sets of size n-1 plus the normalisation row."""
    n = u.shape[1]
    others = [k for k in range(u.shape[0]) if k != r]
    rows = [-np.eye(n)[t] for t in range(n)] + [u[r] - u[k] for k in others]
    labels = [("nonneg", t) for t in range(n)] + [("tie", r, k) for k in others]
    G = np.array(rows).reshape(-1, n)
    scale = np.abs(G).max(axis=1)
    usable = scale > 0
    Gs = np.where(usable[:, None], G / np.where(usable, scale, 1.0)[:, None], 0.0)

    found = []
    subsets = combinations(range(G.shape[0]), n - 1)
    while True:
        batch = [s for _, s in zip(range(_BATCH), subsets)]
        if not batch:
            break
        idx = np.array(batch, dtype=int).reshape(len(batch), n - 1)
        M = np.empty((len(batch), n, n))
        M[:, : n - 1, :] = Gs[idx]
        M[:, n - 1, :] = 1.0
        ok = np.abs(np.linalg.det(M)) >= DET_TOL
        if not np.any(ok):
            continue
        rhs = np.zeros((int(ok.sum()), n, 1))
        rhs[:, n - 1, 0] = 1.0
        sol = np.linalg.solve(M[ok], rhs)[..., 0]
        feasible = np.all(sol @ Gs.T <= EPS_SUM, axis=1)
        for s, mu in zip(idx[ok][feasible], sol[feasible]):
            found.append((mu, tuple(labels[k] for k in s)))
    return found


def enumerate_vertices(model: ModelSpec, i: int, parallel: bool = False) -> TestBeliefSet:
    i = model.sender_index(i)
    u = model.senders[i].payoff
    n = u.shape[1]
    outcomes = range(model.n_outcomes)
    if parallel:
        with ThreadPoolExecutor() as pool:
            per_region = list(pool.map(lambda r: _region_vertices(u, r), outcomes))
    else:
        per_region = [_region_vertices(u, r) for r in outcomes]

    degenerate = [Belief.degenerate(i, n, t) for t in range(n)]
    kept: list[np.ndarray] = [b.probs for b in degenerate]
    vertices, regions, active = [], [], []
    for found in per_region:
        for mu, act in found:
            mu = np.clip(mu, 0.0, None)
            mu = mu / mu.sum()
            if any(np.abs(mu - k).sum() <= DEDUP_TOL for k in kept):
                continue
            kept.append(mu)
            vertices.append(Belief(i, mu))
            regions.append(_least_favourites(u, mu))
            active.append(act)
    return TestBeliefSet(
        i,
        tuple(degenerate),
        tuple(vertices),
        tuple(regions),
        tuple(active),
        tuple(_least_favourites(u, b.probs) for b in degenerate),
    )


@dataclass(frozen=True)
class IndifferenceEntry:
    outcomes: tuple[int, int]
    types: tuple[int, int]
    alpha: float  # weight on types[0]
    belief: Belief


@dataclass(frozen=True, eq=False)
class PairwiseIndifferenceSet:
    sender_index: int
    entries: tuple[IndifferenceEntry, ...]

    def beliefs(self) -> list[Belief]:
        return [e.belief for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def pairwise_prefilter(model: ModelSpec, i: int) -> PairwiseIndifferenceSet:
    """Two-type beliefs at which some pair of outcomes gives equal expected payoff."""
    i = model.sender_index(i)
    u = model.senders[i].payoff
    n = u.shape[1]
    entries = []
    for r, r2 in combinations(range(model.n_outcomes), 2):
        d = u[r] - u[r2]
        for t, t2 in combinations(range(n), 2):
            if not ((d[t] > EPS_TIE and d[t2] < -EPS_TIE) or (d[t] < -EPS_TIE and d[t2] > EPS_TIE)):
                continue
            alpha = -d[t2] / (d[t] - d[t2])
            probs = np.zeros(n)
            probs[t], probs[t2] = alpha, 1.0 - alpha
            entries.append(IndifferenceEntry((r, r2), (t, t2), float(alpha), Belief(i, probs)))
    return PairwiseIndifferenceSet(i, tuple(entries))
