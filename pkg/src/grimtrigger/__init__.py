"""Implementability and optimal design of allocations when senders choose their own experiments."""
from .beliefs import PairwiseIndifferenceSet, TestBeliefSet, enumerate_vertices, pairwise_prefilter, region_membership
from .ic import (
    DeviationReport,
    check_implementable,
    check_sender_ic,
    deviation_gap_at,
    experiment_implementable,
)
from .lp import LinearProgram, NumericalError, solve_lp
from .model import (
    EPS_IC,
    EPS_SUM,
    EPS_TIE,
    Allocation,
    Belief,
    ModelError,
    ModelSpec,
    SenderSpec,
    interim_payoff,
    load_allocation,
    load_model,
    receiver_value,
)
from .optimizer import Optimum, constrained_optimum, pareto_support_audit, unconstrained_optimum
from .punishment import PunishmentSet, evaluate_mechanism, grim_trigger, punishment_value_fn
from .structure import (
    find_single_crossing_order,
    find_two_decomposition,
    hlf_check,
    is_monotone,
    monotone_certificate_check,
    no_fall_guys_check,
    product_compose,
)

__version__ = "0.1.0"
