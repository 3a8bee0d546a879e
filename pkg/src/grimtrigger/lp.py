"""Dense two-phase simplex with Bland's rule.

Small, auditable, and dependency-free beyond numpy. Problems are stated as

    maximize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= lower          (lower may be -inf for free variables)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
MAX_PIVOTS = 10**6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class NumericalError(RuntimeError):
    """The solver could not reach a verdict (pivot budget exhausted or breakdown)."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.size
        object.__setattr__(self, "c", c)
        for A_name, b_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            A, b = getattr(self, A_name), getattr(self, b_name)
            if A is None:
                A, b = np.zeros((0, n)), np.zeros(0)
            A = np.asarray(A, dtype=float).reshape(-1, n)
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if A.shape[0] != b.size:
                raise ValueError(f"{A_name} has {A.shape[0]} rows but {b_name} has {b.size} entries")
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise ValueError(f"{A_name}/{b_name} contain non-finite entries")
            object.__setattr__(self, A_name, A)
            object.__setattr__(self, b_name, b)
        lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(n)
        if np.any(np.isnan(lower)) or np.any(lower == np.inf):
            raise ValueError("lower bounds must be finite or -inf")
        if not np.all(np.isfinite(c)):
            raise ValueError("objective contains non-finite entries")
        object.__setattr__(self, "lower", lower)

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class LPResult:
    status: str
    x: np.ndarray | None
    value: float | None
    duals_ub: np.ndarray | None  # multipliers on the A_ub rows (>= 0 at optimum)
    pivots: int


def solve_lp(lp: LinearProgram, max_pivots: int = MAX_PIVOTS) -> LPResult:
    """Solve ``lp``; returns an optimal basic solution or an infeasible/unbounded status."""
    n = lp.n_vars
    # x = lower + M @ y with y >= 0; free variables are split into y+ - y-
    free = ~np.isfinite(lp.lower)
    shift = np.where(free, 0.0, lp.lower)
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(e)
        if free[j]:
            cols.append(-e)
    M = np.array(cols).T
    ny = M.shape[1]

    A_ub = lp.A_ub @ M
    b_ub = lp.b_ub - lp.A_ub @ shift
    A_eq = lp.A_eq @ M
    b_eq = lp.b_eq - lp.A_eq @ shift
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    c_y = lp.c @ M
    c_scale = float(np.max(np.abs(c_y))) if ny and np.any(c_y) else 1.0

    # equality form [A_ub I; A_eq 0] [y; s] = b, rows scaled and sign-normalised
    A = np.zeros((m, ny + m_ub))
    A[:m_ub, :ny] = A_ub
    A[:m_ub, ny:] = np.eye(m_ub)
    A[m_ub:, :ny] = A_eq
    b = np.concatenate([b_ub, b_eq])
    for k in range(m):
        s = np.max(np.abs(A[k, :ny])) if ny else 0.0
        if s > 0:
            A[k] /= s
            b[k] /= s
        if b[k] < 0:
            A[k] *= -1
            b[k] *= -1
    n_struct = ny + m_ub

    # initial basis: a slack if its coefficient is positive, otherwise an artificial
    basis = []
    art_rows = []
    for k in range(m):
        if k < m_ub and A[k, ny + k] > 0:
            basis.append(ny + k)
        else:
            basis.append(None)
            art_rows.append(k)
    n_art = len(art_rows)
    N = n_struct + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :n_struct] = A
    T[:m, N] = b
    for a, k in enumerate(art_rows):
        T[k, n_struct + a] = 1.0
        basis[k] = n_struct + a
    for k in range(m):
        _pivot(T, k, basis[k])

    pivots = 0
    if n_art:
        cost = np.zeros(N)
        cost[n_struct:] = -1.0
        _set_objective(T, basis, cost)
        status, pivots = _run(T, basis, N, pivots, max_pivots)
        if status != OPTIMAL:  # phase one is bounded by construction
            raise NumericalError("phase one reported unbounded")
        if -T[m, N] < -FEAS_TOL * max(1.0, n_art):
            return LPResult(INFEASIBLE, None, None, None, pivots)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for k in range(m):
            if basis[k] >= n_struct:
                row = T[k, :n_struct]
                cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if cand.size == 0:
                    continue
                _pivot(T, k, int(cand[0]))
                basis[k] = int(cand[0])
                pivots += 1
            keep.append(k)
        T = np.vstack([T[keep][:, list(range(n_struct)) + [N]], T[m:m + 1, list(range(n_struct)) + [N]]])
        basis = [basis[k] for k in keep]
        m = len(keep)
        N = n_struct

    cost = np.zeros(N)
    cost[:ny] = c_y / c_scale
    _set_objective(T, basis, cost)
    status, pivots = _run(T, basis, N, pivots, max_pivots)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, None, pivots)

    z = np.zeros(N)
    for k, j in enumerate(basis):
        z[j] = max(T[k, N], 0.0)
    y = z[:ny]
    x = shift + M @ y
    duals = -T[m, ny:ny + m_ub] * c_scale
    return LPResult(OPTIMAL, x, float(lp.c @ x), duals, pivots)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _set_objective(T: np.ndarray, basis: list[int], cost: np.ndarray) -> None:
    m = len(basis)
    T[m, :] = 0.0
    T[m, :cost.size] = cost
    for k, j in enumerate(basis):
        if T[m, j] != 0.0:
            T[m] -= T[m, j] * T[k]


def _run(T: np.ndarray, basis: list[int], N: int, pivots: int, max_pivots: int) -> tuple[str, int]:
    m = len(basis)
    while True:
        reduced = T[m, :N]
        enter = np.flatnonzero(reduced > FEAS_TOL)
        if enter.size == 0:
            return OPTIMAL, pivots
        j = int(enter[0])  # Bland: lowest index
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED, pivots
        ratios = np.maximum(T[rows, N], 0.0) / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + FEAS_TOL * max(1.0, abs(best))]
        r = int(min(tied, key=lambda k: basis[k]))  # Bland: lowest basic index leaves
        _pivot(T, r, j)
        basis[r] = j
        pivots += 1
        if pivots >= max_pivots:
            raise NumericalError(f"simplex did not terminate within {max_pivots} pivots")
