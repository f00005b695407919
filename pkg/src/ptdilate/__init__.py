"""Exactly solvable Hermitian dilation of a swept two-level PT-symmetric model.

Analytic Whittaker/closed-form solutions, the two-parameter metric operator
with validity analysis, the 4x4 Hermitian embedding, and verified
co-simulation of both systems.
"""

from .dilation import (
    DilatedHamiltonian,
    H4Mode,
    TauDecomp,
    assemble_dilated,
    h4_select,
    hermiticity_defect,
    post_breakdown_tau,
    principal_sqrt,
    tau_derivative,
    tau_from_metric,
)
from .errors import (
    BreakdownError,
    ConvergenceError,
    DegenerateDenominatorError,
    DomainError,
    IntegrationError,
    InvalidMetricError,
    NearBreakdownError,
    OverflowRangeError,
    PTDilateError,
    PoleError,
    ValidationError,
)
from .evolve import (
    EvolutionConfig,
    Trajectory,
    dilation_efficiency,
    integrate_linear,
    propagate_analytic,
    simulate_dilated,
)
from .metric import (
    DilationParams,
    MetricState,
    approx_bounds_interval,
    breakdown_time,
    eigenvalues,
    equal_d_bound,
    eta_evolution_residual,
    gauge_decompose,
    metric,
    metric_asymptotics,
    refined_d1_bound,
    validity,
)
from .model import (
    HamiltonianParams,
    PhaseLabel,
    PTStructure,
    Spectrum,
    SIGMA_X,
    ep_time,
    hamiltonian,
    instantaneous_spectrum,
    intertwining_residual,
    pt_symmetry_residual,
)
from .solutions import (
    Representation,
    SolutionBasis,
    model_kappas,
    ode_residual,
    solution_basis,
    wronskian,
    x_basis_closed_half,
    x_basis_whittaker,
    y_basis,
)
from .specfun import (
    Ray,
    RayArgument,
    WhittakerIndex,
    erfi,
    hermite_poly,
    kummer_m,
    ln_gamma,
    whittaker_asymptotic,
    whittaker_w,
)

__version__ = "0.1.0"
