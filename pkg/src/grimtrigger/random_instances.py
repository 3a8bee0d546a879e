"""Random problem instances for property tests and experiment scripts."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import Allocation, ModelSpec, SenderSpec


def _counts(n_senders: int, n_types) -> list[int]:
    return [int(n_types)] * n_senders if np.isscalar(n_types) else [int(k) for k in n_types]


def random_prior(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(n)) + 0.05
    return p / p.sum()


def random_model(
    rng: np.random.Generator,
    n_senders: int = 1,
    n_types: int | Sequence[int] = 3,
    n_outcomes: int = 3,
    scale: float = 10.0,
    payoffs: Sequence[np.ndarray] | None = None,
) -> ModelSpec:
    """Uniform payoffs in [-scale, scale]; ``payoffs`` overrides the sender tables."""
    counts = _counts(n_senders, n_types)
    senders = []
    for i, k in enumerate(counts):
        u = rng.uniform(-scale, scale, size=(n_outcomes, k)) if payoffs is None else payoffs[i]
        senders.append(SenderSpec(f"s{i}", tuple(f"t{j}" for j in range(k)), random_prior(rng, k), u))
    v = rng.uniform(-scale, scale, size=(n_outcomes,) + tuple(counts))
    return ModelSpec(tuple(senders), tuple(f"r{j}" for j in range(n_outcomes)), v)


def random_allocation(rng: np.random.Generator, model: ModelSpec, deterministic: bool = False) -> Allocation:
    shape = model.type_counts
    if deterministic:
        return Allocation.deterministic(model, rng.integers(model.n_outcomes, size=shape))
    # sparse-ish rows: Dirichlet with small concentration
    return Allocation(rng.dirichlet(np.full(model.n_outcomes, 0.5), size=shape))


def two_class_payoff(rng: np.random.Generator, n_types: int, n_outcomes: int, scale: float = 10.0) -> np.ndarray:
    """Payoff table with two distinct columns; outcome 0 in one class, outcome 1 in the other."""
    hi = rng.uniform(-scale, scale, size=n_types)
    lo = rng.uniform(-scale, scale, size=n_types)
    classes = np.concatenate([[True, False], rng.random(n_outcomes - 2) < 0.5])
    return np.where(classes[:, None], hi[None, :], lo[None, :])


def hlf_payoff(rng: np.random.Generator, n_types: int, n_outcomes: int, scale: float = 10.0) -> np.ndarray:
    """Payoff table where one random outcome is the worst for every type."""
    u = rng.uniform(-scale, scale, size=(n_outcomes, n_types))
    worst = rng.integers(n_outcomes)
    u[worst] = u.min(axis=0) - rng.uniform(0.0, 1.0, size=n_types)
    return u
