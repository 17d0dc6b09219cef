"""Semi-discrete solver for nonlocally regularized KdV-type equations

    u_t + alpha * ((f(u))_x + kappa u_xxx) = 0,

discretized by moving every spatial derivative onto the kernel and replacing
convolution integrals by truncated lattice sums.
"""

__version__ = "0.1.0"

from .kernels import Kernel, KernelKind, custom_kernel, make_kernel, verify_conditions
from .discrete import (
    ConvolutionWeights,
    GridFunction,
    UniformGrid,
    build_weights,
    discrete_convolve,
    discrete_convolve_fast,
    l1h_norm,
    linf_norm,
    restrict,
    second_difference,
)
from .semidiscrete import (
    BlowUpError,
    Nonlinearity,
    Problem,
    assemble,
    linear_plus_quadratic,
    parse_nonlinearity,
    rhs,
)
from .integrator import IntegrationResult, ToleranceSettings, integrate, integrate_ode
from .solutions import SolitaryWave, initial_data, solitary_params, solitary_profile
from .analysis import (
    ConvergenceReport,
    LocalizationReport,
    WaveSetup,
    convergence_study,
    decay_fit,
    linf_error,
    localization_study,
    rate_richardson,
    rate_two_grid,
    tail_sup,
)
