"""Bursty birth-death kinetics, discrete and continuous.

Stationary laws (exact recurrences, closed-form families, analytic
densities), master-equation evolution, event-driven simulation of the
jump chains, the discretized transition operator with its fixed point,
rate recovery from a stationary density, mode censuses, and ergodicity
margins, plus a batch CLI over all of it.
"""

from .continuous import (
    ExposureHistogram,
    GridDensity,
    KernelGrid,
    ModeReportContinuous,
    PdmpTrajectory,
    Potential,
    count_modes_continuous,
    default_grid,
    density_from_fixed_point,
    ergodicity_margin,
    ergodicity_margin_raw,
    ergodicity_scan,
    geometric_grid,
    kernel_fixed_point,
    kernel_grid,
    kernel_matrix,
    phi_from_density,
    phi_from_density_analytic,
    phi_from_density_grid,
    q_inverse,
    q_potential,
    simulate_pdmp,
    stationary_density,
    stationary_density_exponential,
    stationary_density_separable,
)
from .discrete import (
    GeneralizedHypergeometricFamily,
    HypergeometricFamily,
    JumpChainResult,
    MasterTrace,
    ModeReportDiscrete,
    NegativeBinomialFamily,
    Pmf,
    count_modes_discrete,
    evolve_master,
    master_rhs_truncated,
    mean_identity_residual,
    named_family_params,
    simulate_jump_chain,
    stationary_pmf_general,
    stationary_pmf_geometric,
)
from .errors import (
    AbsorbedState,
    BurstkinError,
    ConfigError,
    DomainError,
    GridMismatch,
    GridTooNarrow,
    ModelError,
    NoBracket,
    NoConvergence,
    NotIntegrable,
    NotNormalizable,
    NumericalBlowup,
    NumericError,
    ParseError,
    RangeError,
    StiffnessBudgetExceeded,
    TailNotConverged,
    ToleranceNotMet,
    ValidationError,
    WindowTooSmall,
)
from .models import (
    ConstantRate,
    ContinuousBurstModel,
    DiscreteBurstModel,
    ExponentialBurstKernel,
    FiniteSupportNu,
    GaussianExpNu,
    GeometricBurst,
    HillRate,
    LinearDecay,
    LinearRate,
    PowerTailNu,
    QuadraticRate,
    SeparableBurstKernel,
    TabulatedBurst,
    TabulatedBurstKernel,
    TabulatedDecay,
    TabulatedRate,
    TruncatedLinearRate,
)
from .numerics import (
    StepperConfig,
    draw_geometric,
    draw_unit_exponential,
    find_root_monotone,
    integrate_adaptive,
    l1_distance,
    make_rng,
    quad_adaptive,
    trapezoid,
    tv_distance,
)

__version__ = "0.1.0"
