"""Preference-structure certificates and the product construction.

These give fast verdicts that avoid belief enumeration when a sender's payoffs fall
into one of two classes, or when all of a sender's types share a worst outcome.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import EPS_TIE, Allocation, ModelError, ModelSpec, SenderSpec, interim_outcome_dist, validate_allocation

CERTIFIED = "certified-implementable"
CERTIFIED_NOT = "certified-not"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DecompositionCert:
    sender_index: int
    r1: int
    r2: int
    high: tuple[int, ...]  # outcomes whose payoff column equals that of r1
    low: tuple[int, ...]  # the rest, whose column equals that of r2
    valid: bool = True

    def class_map(self, model: ModelSpec) -> dict:
        return {model.outcomes[r]: ("high" if r in self.high else "low") for r in range(model.n_outcomes)}


@dataclass(frozen=True)
class OrderCert:
    sender_index: int
    type_order: tuple[int, ...]
    crossing_index: int  # position in type_order where the gap first becomes >= 0
    gaps: tuple[float, ...]  # u(r1, t) - u(r2, t), indexed by type


def find_two_decomposition(model: ModelSpec, i: int) -> DecompositionCert | None:
    """First outcome pair whose two payoff columns account for every outcome.

    Classes are type-consistent: each outcome's whole column must equal the column of r1
    or that of r2. The pair is oriented so that r1 has the larger total payoff.
    """
    i = model.sender_index(i)
    u = model.senders[i].payoff
    R = model.n_outcomes
    if R == 1:
        return DecompositionCert(i, 0, 0, (0,), (), True)
    for a, b in combinations(range(R), 2):
        like_a = np.all(np.abs(u - u[a]) <= EPS_TIE, axis=1)
        like_b = np.all(np.abs(u - u[b]) <= EPS_TIE, axis=1)
        if not np.all(like_a | like_b):
            continue
        r1, r2 = (a, b) if u[a].sum() >= u[b].sum() - EPS_TIE else (b, a)
        high = np.all(np.abs(u - u[r1]) <= EPS_TIE, axis=1)
        return DecompositionCert(
            i, r1, r2, tuple(int(r) for r in np.flatnonzero(high)), tuple(int(r) for r in np.flatnonzero(~high))
        )
    return None


def find_single_crossing_order(model: ModelSpec, i: int, cert: DecompositionCert) -> OrderCert | None:
    i = model.sender_index(i)
    if not cert.valid or cert.sender_index != i:
        return None
    u = model.senders[i].payoff
    gaps = u[cert.r1] - u[cert.r2]
    order = np.argsort(gaps, kind="stable")
    ordered = gaps[order]
    nonneg = ordered >= -EPS_TIE
    # sorted gaps cross zero at most once by construction; keep the check explicit
    if np.any(nonneg[:-1] & ~nonneg[1:]):
        return None
    crossing = int(np.argmax(nonneg)) if nonneg.any() else len(gaps)
    return OrderCert(i, tuple(int(t) for t in order), crossing, tuple(float(g) for g in gaps))


def interim_high_prob(model: ModelSpec, p: Allocation, i: int, cert: DecompositionCert) -> np.ndarray:
    """Interim probability, per own type, that the outcome lies in the high class."""
    q = interim_outcome_dist(model, p, i)
    return q[:, list(cert.high)].sum(axis=1)


def is_monotone(model: ModelSpec, p: Allocation, i: int, cert: DecompositionCert, order: OrderCert) -> bool:
    a = interim_high_prob(model, p, i, cert)[list(order.type_order)]
    return bool(np.all(np.diff(a) >= -EPS_TIE))


def _only_monotone_fails(gaps: np.ndarray, a: np.ndarray) -> bool:
    # strict classes: a type indifferent between r1 and r2 is unconstrained
    up, down = gaps > EPS_TIE, gaps < -EPS_TIE
    if not (up.any() and down.any()):
        return False
    return bool(a[up].min() < a[down].max() - EPS_TIE)


def monotone_certificate_check(model: ModelSpec, p: Allocation) -> list[str]:
    validate_allocation(model, p)
    verdicts = []
    for i in range(model.n_senders):
        cert = find_two_decomposition(model, i)
        if cert is None:
            verdicts.append(INCONCLUSIVE)
            continue
        order = find_single_crossing_order(model, i, cert)
        a = interim_high_prob(model, p, i, cert)
        if order is not None and is_monotone(model, p, i, cert, order):
            verdicts.append(CERTIFIED)
        elif order is not None and _only_monotone_fails(np.array(order.gaps), a):
            verdicts.append(CERTIFIED_NOT)
        else:
            verdicts.append(INCONCLUSIVE)
    return verdicts


def _common_minimizer(u: np.ndarray, types) -> int | None:
    cols = u[:, list(types)]
    worst = cols.min(axis=0)
    common = np.flatnonzero(np.all(cols <= worst + EPS_TIE, axis=1))
    return int(common[0]) if common.size else None


def hlf_check(model: ModelSpec, i: int) -> int | None:
    """An outcome that is a least favourite for every type of sender ``i``."""
    i = model.sender_index(i)
    u = model.senders[i].payoff
    return _common_minimizer(u, range(u.shape[1]))


@dataclass(frozen=True)
class FallGuyWitness:
    sender_index: int
    types: tuple[int, ...]


def no_fall_guys_check(model: ModelSpec, p: Allocation, i: int, exhaustive: bool = False) -> FallGuyWitness | None:
    """Find types that always get their worst outcome yet disagree on what is worst.

    Such a set makes ``p`` non-implementable. Subsets up to size 3 are searched unless
    ``exhaustive`` is set.
    """
    validate_allocation(model, p)
    i = model.sender_index(i)
    u = model.senders[i].payoff
    worst = u <= u.min(axis=0, keepdims=True) + EPS_TIE  # (R, T_i)
    rows = np.moveaxis(p.probs, i, 0)  # own type first
    rows = rows.reshape(rows.shape[0], -1, model.n_outcomes)
    supported = rows > EPS_TIE
    punished = [t for t in range(u.shape[1]) if np.all(~supported[t] | worst[:, t][None, :])]
    cap = len(punished) if exhaustive else min(3, len(punished))
    for size in range(2, cap + 1):
        for subset in combinations(punished, size):
            if _common_minimizer(u, subset) is None:
                return FallGuyWitness(i, subset)
    return None


def _place(arr: np.ndarray, axes: list[int], ndim: int) -> np.ndarray:
    """Reshape ``arr`` so its k-th axis sits at position ``axes[k]`` of an ndim-array."""
    shape = [1] * ndim
    for ax, size in zip(axes, arr.shape):
        shape[ax] = size
    return arr.reshape(shape)


def product_compose(
    models: list[ModelSpec],
    allocations: list[Allocation] | None = None,
    priors: list | None = None,
    receiver_payoff=None,
) -> tuple[ModelSpec, Allocation | None]:
    """Run several problems side by side as one: types and outcomes are tuples,
    sender payoffs add up across coordinates, and the allocation acts coordinate-wise.

    The receiver payoff defaults to the sum of the component payoffs and each sender's
    prior to the product of component priors; ``priors`` may override it with any
    distribution having the same marginals.
    """
    if not models:
        raise ModelError("nothing to compose")
    n = models[0].n_senders
    if any(m.n_senders != n for m in models):
        raise ModelError("all components must have the same number of senders")
    if allocations is not None and len(allocations) != len(models):
        raise ModelError("need one allocation per component")
    K = len(models)

    def joined(labels):
        return labels[0] if K == 1 else ",".join(str(x) for x in labels)

    outcome_grid = np.ndindex(*(m.n_outcomes for m in models))
    outcomes = tuple(joined([m.outcomes[r] for m, r in zip(models, rs)]) for rs in outcome_grid)

    senders = []
    for i in range(n):
        comps = [m.senders[i] for m in models]
        type_grid = list(np.ndindex(*(s.n_types for s in comps)))
        types = tuple(joined([s.types[t] for s, t in zip(comps, ts)]) for ts in type_grid)
        ndim = 2 * K
        u = sum(_place(s.payoff, [k, K + k], ndim) for k, s in enumerate(comps))
        u = np.broadcast_to(u, tuple(m.n_outcomes for m in models) + tuple(s.n_types for s in comps))
        prior = np.ones(())
        for s in comps:
            prior = np.multiply.outer(prior, s.prior)
        prior = prior.ravel()
        if priors is not None and priors[i] is not None:
            custom = np.asarray(priors[i], dtype=float).reshape(tuple(s.n_types for s in comps))
            for k, s in enumerate(comps):
                marg = custom.sum(axis=tuple(a for a in range(K) if a != k))
                if np.any(np.abs(marg - s.prior) > 1e-9):
                    raise ModelError(f"sender {i}: custom prior has the wrong marginal in component {k}")
            prior = custom.ravel()
        senders.append(SenderSpec(comps[0].name, types, prior, u.reshape(len(outcomes), len(types))))

    counts = tuple(s.n_types for s in senders)
    if receiver_payoff is None:
        ndim = K + n * K
        v = 0.0
        for k, m in enumerate(models):
            v = v + _place(m.receiver_payoff, [k] + [K + j * K + k for j in range(n)], ndim)
        full = tuple(m.n_outcomes for m in models) + tuple(
            models[k].senders[j].n_types for j in range(n) for k in range(K)
        )
        receiver_payoff = np.broadcast_to(v, full).reshape((len(outcomes),) + counts)
    model = ModelSpec(tuple(senders), outcomes, np.asarray(receiver_payoff, dtype=float))

    if allocations is None:
        return model, None
    ndim = n * K + K
    table = 1.0
    for k, (m, p) in enumerate(zip(models, allocations)):
        validate_allocation(m, p)
        table = table * _place(p.probs, [j * K + k for j in range(n)] + [n * K + k], ndim)
    full = tuple(models[k].senders[j].n_types for j in range(n) for k in range(K)) + tuple(
        m.n_outcomes for m in models
    )
    table = np.broadcast_to(table, full).reshape(counts + (len(outcomes),))
    return model, Allocation(table)


def structure_report(model: ModelSpec, p: Allocation | None = None) -> list[dict]:
    """Per-sender summary: decomposition, crossing order, common worst outcome, certificates."""
    verdicts = monotone_certificate_check(model, p) if p is not None else None
    report = []
    for i, s in enumerate(model.senders):
        cert = find_two_decomposition(model, i)
        order = find_single_crossing_order(model, i, cert) if cert is not None else None
        hlf = hlf_check(model, i)
        entry = {
            "sender": s.name,
            "two_decomposition": None
            if cert is None
            else {"r1": model.outcomes[cert.r1], "r2": model.outcomes[cert.r2], "classes": cert.class_map(model)},
            "single_crossing_order": None
            if order is None
            else {"types": [s.types[t] for t in order.type_order], "crossing_index": order.crossing_index},
            "hlf_outcome": None if hlf is None else model.outcomes[hlf],
        }
        if p is not None:
            entry["monotone_certificate"] = verdicts[i]
            witness = no_fall_guys_check(model, p, i)
            entry["fall_guys"] = None if witness is None else [s.types[t] for t in witness.types]
            if cert is not None and order is not None:
                entry["monotone"] = is_monotone(model, p, i, cert, order)
        report.append(entry)
    return report
