"""Exact solvers for principal-agent contract design with sequential,
adaptive agent actions.

The agent explores costly actions one at a time, keeping the best revealed
outcome; best responses follow reservation-value search.  The package solves
the principal's side exactly: optimal linear contracts by critical-value
sweeps, optimal general contracts (small outcome counts) by hyperplane-vertex
enumeration, the correlated binary-outcome model through coverage functions,
plus generators for the hard families and brute-force oracles that certify
the solvers on small instances.
"""

from .agent import (
    NonAdaptiveStrategy,
    OutcomeDistribution,
    StrategyEvaluation,
    agent_utility,
    best_response,
    evaluate_strategy,
    outcome_distribution,
    principal_utility,
    principal_utility_for,
    reservation_value,
    reservation_values,
    strategy_from_doc,
    strategy_to_doc,
    tiebreak_contract,
    tiebreak_epsilon,
    weitzman_strategy,
)
from .correlated import (
    BernoulliJoint,
    CorrelatedInstance,
    CoverageFunction,
    ValueJoint,
    bernoulli_to_coverage,
    brute_force_best_linear,
    coverage_eval,
    coverage_to_bernoulli,
    coverage_to_corrmax,
    corrmax_to_coverage,
    enumerate_tuple_strategies,
    hardness_reduction,
    sequence_cost,
    sequence_utilities,
)
from .general import (
    GeneralSolution,
    Hyperplane,
    HyperplaneSet,
    Vertex,
    enumerate_vertices,
    hyperplanes,
    linz,
    payment_bound,
    solve_general,
)
from .generators import (
    PartitionParams,
    SuperpolyFamily,
    equal_spread_contract,
    equal_spread_utility,
    gap_general_contract,
    gen_critpoints_instance,
    gen_gap_instance,
    gen_partition_reduction,
    gen_random_contract,
    gen_random_instance,
    gen_superpoly_instance,
    partition_params,
)
from .linear import (
    CriticalValueReport,
    PiecewiseLinearFn,
    candidate_alphas,
    reservation_pwl,
    scan_linear,
    solve_linear,
)
from .model import (
    CapacityError,
    Contract,
    INF,
    Instance,
    LinearContract,
    ValidationError,
    contract_from_doc,
    contract_to_doc,
    format_rational,
    induced_payments,
    instance_digest,
    instance_from_doc,
    instance_to_doc,
    is_finite,
    parse_rational,
    validate_instance,
)
from .oracle import (
    OracleReport,
    enumerate_nonadaptive,
    grid_search_general,
    oracle_best_linear,
    oracle_best_response,
    strategy_count,
)

__version__ = "0.1.0"
