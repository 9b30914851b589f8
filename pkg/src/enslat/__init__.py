"""enslat: disordered quantum ensembles as semi-infinite lattices.

Map an ensemble of disordered N-level systems onto a single lattice via the
orthogonal polynomials of the disorder measures, propagate the lattice
wavefunction exactly, and recover the disorder-averaged density matrix by a
partial trace over the lattice index; cross-validate against Monte Carlo,
Gauss-quadrature and closed-form oracles, or run the map in reverse
(constant-coupling lattice -> semicircle-disordered ensemble).
"""

from .errors import (
    ConfigError,
    DepthCapExceeded,
    DimensionMismatch,
    EmptySupport,
    EnslatError,
    InvalidOrder,
    KrylovBreakdown,
    LeakageExceeded,
    NormDefectExceeded,
    NotHermitian,
    NotNormalized,
    NumericalBreakdown,
    QuadratureUnderResolved,
    SystemTooLarge,
    TableTooShort,
    UnboundedSupport,
    UnsupportedFamily,
)
from .measures import (
    DisorderDistribution,
    RecurrenceTable,
    apply_cutoff,
    characteristic_function,
    gauss_rule,
    orthonormal_values,
    quantile,
    recurrence_analytic,
    recurrence_stieltjes,
    recurrence_table,
    sample,
)
from .lattice import (
    EnsembleSpec,
    LatticeBasis,
    LatticeOperator,
    LinearCoupling,
    PolynomialCoupling,
    TabulatedCoupling,
    boundary_shell,
    build_general,
    build_linear,
    load_triplets,
    save_triplets,
)
from .states import (
    LatticeState,
    expanded_initial,
    localized_initial,
    spectral_disorder_initial,
)
from .dynamics import (
    LeakageReport,
    PropagationPlan,
    auto_depth,
    evolve,
    propagate,
    propagate_dense,
)
from .reduction import (
    DensityTrajectory,
    coherence_trace,
    observable_average,
    partial_trace,
    trajectory_from_states,
)
from .oracle import (
    OracleConfig,
    analytic_qubit,
    chain_to_ensemble,
    gauss_nodes,
    mc_average,
    quad_average,
)

__version__ = "0.1.0"
