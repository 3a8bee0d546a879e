import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grimtrigger.apps import AuditParams, FirmParams, gen_audit_model
from grimtrigger.ic import check_implementable, check_sender_ic
from grimtrigger.model import EPS_TIE, Allocation, ModelSpec, SenderSpec, receiver_value
from grimtrigger.optimizer import constrained_optimum, pareto_support_audit, solve_lp, unconstrained_optimum
from grimtrigger.random_instances import random_allocation, random_model


def test_solver_reexported():
    from grimtrigger.lp import solve_lp as inner

    assert solve_lp is inner


def test_first_best_car(car):
    m, _ = car
    u = unconstrained_optimum(m)
    np.testing.assert_allclose(u.allocation.probs, [[1, 0], [0, 1]])
    assert u.value == pytest.approx(0.3)


def test_first_best_ties(rng):
    m = random_model(rng, 1, 2, 3).with_receiver_payoff(np.zeros((3, 2)))
    u = unconstrained_optimum(m)
    np.testing.assert_allclose(u.allocation.probs, [[1, 0, 0], [1, 0, 0]])
    assert all(t == (0, 1, 2) for t in u.ties.values())


def test_first_best_one_firm_audit():
    m = gen_audit_model(AuditParams((FirmParams(1.0, 0.1, 0.4),)))
    u = unconstrained_optimum(m)
    # clean firm is not fined, polluting firm is
    assert [m.outcomes[int(np.argmax(u.allocation.row((t,))))] for t in range(2)] == ["{}", "{0}"]


@pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.9])
def test_car_reaches_first_best(car, q):
    m = car[0].with_sender_prior(0, [q, 1 - q])
    opt = constrained_optimum(m)
    assert opt.value == pytest.approx(q, abs=1e-9)
    assert opt.binding == () and opt.deterministic
    np.testing.assert_allclose(opt.allocation.probs, [[1, 0], [0, 1]])


def test_one_firm_audit_constant_fine():
    m = gen_audit_model(AuditParams((FirmParams(1.0, 0.1, 0.4),)))
    opt = constrained_optimum(m)
    np.testing.assert_allclose(opt.allocation.probs, [[0, 1], [0, 1]], atol=1e-9)
    assert opt.value == pytest.approx(-0.2)


def test_optimum_json(car):
    m, _ = car
    doc = constrained_optimum(m).to_dict(m)
    assert set(doc) >= {"value", "allocation", "binding", "deterministic", "first_best_gap"}


def test_pareto_audit_flags_dominated_outcome():
    u = np.array([[0.0, 0.0], [1.0, 1.0]])
    m = ModelSpec((SenderSpec("s", ("a", "b"), [0.5, 0.5], u),), ("bad", "good"), np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert pareto_support_audit(m, Allocation.constant(m, 0)) == [((0,), 0, 1), ((1,), 0, 1)]
    assert pareto_support_audit(m, Allocation.constant(m, 1)) == []


def test_pareto_audit_single_outcome(rng):
    m = random_model(rng, 2, [2, 2], 1)
    assert pareto_support_audit(m, Allocation.constant(m, 0)) == []


seeds = st.integers(0, 2**32 - 1)


def _instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    return rng, random_model(rng, n, rng.integers(1, 4, size=n), int(rng.integers(1, 5)))


@given(seeds)
def test_optimum_certificate(seed):
    rng, m = _instance(seed)
    opt = constrained_optimum(m)
    assert check_implementable(m, opt.allocation).implementable
    assert opt.value <= opt.unconstrained_value + 1e-7
    assert pareto_support_audit(m, opt.allocation) == []
    found = 0
    for _ in range(200):
        p = random_allocation(rng, m, deterministic=bool(rng.random() < 0.5))
        if check_implementable(m, p).implementable:
            assert receiver_value(m, p) <= opt.value + 1e-6
            found += 1
            if found == 20:
                break


@given(seeds)
def test_binding_when_first_best_missed(seed):
    _, m = _instance(seed)
    opt = constrained_optimum(m)
    first = opt.unconstrained.allocation
    if np.abs(opt.allocation.probs - first.probs).max() > EPS_TIE:
        assert opt.binding
    if check_implementable(m, first).implementable:
        assert opt.value == pytest.approx(opt.unconstrained_value, abs=1e-7)


@given(seeds, st.floats(0.01, 100))
def test_scale_invariance(seed, k):
    _, m = _instance(seed)
    a = constrained_optimum(m)
    b = constrained_optimum(m.with_receiver_payoff(m.receiver_payoff.reshape(m.n_outcomes, -1) * k))
    assert np.array_equal(a.allocation.probs > 1e-9, b.allocation.probs > 1e-9)
    assert b.value == pytest.approx(k * a.value, rel=1e-7, abs=1e-9)


@given(seeds)
def test_determinism_flag_reads_raw_solution(seed):
    _, m = _instance(seed)
    opt = constrained_optimum(m)
    assert opt.deterministic == opt.allocation.is_deterministic()
    for i in range(m.n_senders):
        assert check_sender_ic(m, opt.allocation, i, "primal-lp").implementable
