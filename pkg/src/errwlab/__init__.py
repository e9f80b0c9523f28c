"""Edge-reinforced random walks, their random environments, and weight recovery.

The package simulates walks whose step probabilities are proportional
to current edge local times, samples the equivalent random conductance
environments (exactly on trees, by MCMC elsewhere), evaluates exact
trajectory likelihoods and closed-form transition-product moments, and
estimates the initial edge weights from trajectory collections.
"""

from .environment import (
    E0NotIncidentError,
    Environment,
    FieldError,
    MCMCConfig,
    NonPositiveWeightError,
    NotATreeError,
    edge_transition_products,
    environment_from_fields,
    gradient_log_density,
    mixing_log_density,
    mixing_normalization_quadrature,
    phi_log_density_unnormalized,
    sample_beta,
    sample_environment_longrun,
    sample_environments,
    sample_phi_mcmc,
    sample_phi_tree,
    sample_tree_gradient,
    tail_diagnostics,
    transition_matrix,
)
from .estimator import (
    DegenerateStartError,
    DimensionMismatchError,
    EstimationReport,
    EstimatorError,
    MomentEstimates,
    adjacent_edge_pairs,
    divergence_d,
    empirical_moments,
    empirical_transition,
    estimate_weights,
    exact_moment_estimates,
    recover_weights,
    sample_size_plan,
    theoretical_bounds,
)
from .graphs import (
    DisconnectedError,
    DuplicateEdgeError,
    EmptyGraphError,
    Graph,
    GraphError,
    NumericOverflowError,
    RootedTree,
    SelfLoopError,
    SingularSystemError,
    as_weights,
    bfs_distances,
    complete_graph,
    cycle_graph,
    diameter,
    effective_resistance,
    is_tree,
    max_effective_resistance,
    path_graph,
    resistance_matrix,
    shortest_path_tree,
    spanning_tree_log_sum,
    vertex_weights,
)
from .moments import (
    MomentError,
    MomentOracle,
    NotAdjacentError,
    SharedTwoVerticesError,
    covariance_gap,
    expected_sqrt_u,
    expected_u,
    expected_u_sq,
    expected_uu,
    kl_mixing,
    log_normalizer_closed,
    log_normalizer_gradient,
)
from .rng import stream
from .serialize import (
    ParseError,
    dump_environments,
    dump_graph,
    dump_trajectories,
    dump_weights,
    load_environments,
    load_graph,
    load_trajectories,
    load_weights,
)
from .special import DomainError, digamma, log_gamma, trigamma
from .walk import (
    CoverStatistics,
    MismatchedStartError,
    NonAdjacentStepError,
    Trajectory,
    TrajectoryError,
    cover_statistics,
    edge_crossings,
    enumerate_trajectories,
    local_times,
    log_likelihood,
    simulate_batch,
    simulate_trajectory,
    trajectory_log_likelihoods,
    transition_counts,
    validate_trajectory,
)

__version__ = "0.1.0"
