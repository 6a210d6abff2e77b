"""Degree-constrained dense random graphs in the graphon cut metric.

Step-graphon arithmetic and cut distances, logistic degree-model fitting,
exactly-uniform samplers for fixed degree sequences, exact small-n
enumeration oracles, relative-entropy rate functions, and numerical solvers
for the associated degree-constrained variational problems.
"""

__version__ = "0.1.0"

from .degree import (
    AssumptionReport,
    BetaVector,
    DegreeFunction,
    DegreeSequence,
    check_assumption,
    degree_measure,
    erdos_gallai,
    fitted_graphon,
    limit_graphon,
    solve_beta,
    surrogate_beta,
)
from .enumeration import (
    IdentityReport,
    LdpEstimate,
    count_graphs,
    count_with_functional,
    enumerate_graphs,
    ldp_rate_estimate,
    partition_function,
    verify_deg_partition_identity,
)
from .errors import (
    BlockCapExceeded,
    BlockCountMismatch,
    BoundaryW0,
    DegenerateCorrection,
    ExactModeTooLarge,
    GraphonLDPError,
    Infeasible,
    InvalidInput,
    MaxTriesExceeded,
    NonConvergence,
    NotGraphical,
    RepairStalled,
    TooLarge,
    UnknownFunctional,
    WorkCapExceeded,
    ZeroHits,
)
from .functionals import (
    Functional,
    make_functional,
    register_functional,
    resolve_functional,
)
from .graphon import (
    LabeledGraph,
    StepCDF,
    StepGraphon,
    SubgraphPattern,
    common_refinement,
    cut_metric_upper,
    cut_norm_distance,
    degree_distribution,
    degree_function,
    empirical_graphon,
    is_away_from_boundary,
    levy_prokhorov,
    lp_distance,
    mix,
    regrid,
    subgraph_density,
)
from .rates import (
    CountingEntropy,
    RateValue,
    counting_entropy,
    dual_value,
    entropy_he,
    optimal_dual_witness,
    rate_J,
    rate_J_D,
    relative_entropy_I,
)
from .sampling import (
    beta_log_likelihood,
    havel_hakimi_graph,
    irg_log_likelihood,
    make_rng,
    rejection_sample_stream,
    sample_irg,
    sample_uniform_rejection,
    sample_uniform_switch,
    switch_sample_stream,
)
from .variational import (
    AsymptoticCount,
    SolverOptions,
    VariationalResult,
    count_asymptotic,
    degree_defect_correction,
    limit_partition_Z,
    repair_degrees,
    solve_phi,
    solve_psi,
    step_approximation,
)
