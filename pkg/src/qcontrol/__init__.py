"""Spectral simulation and null-control synthesis for the defocusing quintic
Schrodinger equation ``i u_t + Δu - |u|⁴u = φ h`` on a periodic box."""

__version__ = "0.1.0"

from .config import RunConfig, load_config, parse_config
from .diagnostics import DiagnosticReport, run_all, run_diagnostic
from .errors import (
    BlowupDetected,
    CGStagnation,
    ConfigError,
    ConvergenceError,
    GeometryOverflow,
    GridMismatch,
    InconsistentFixedPoint,
    ObservabilityViolation,
    OutputError,
    QControlError,
    SmallnessViolation,
    SupportViolation,
)
from .geometry import CutoffPhi, MultiplierQ, build_cutoff, build_multiplier, control_insert
from .hum import (
    HumProblem,
    HumSolution,
    gamma_apply,
    gramian_form,
    h1_observability_ratio,
    hum_solve,
    observability_constant,
)
from .nonlinear import (
    ControlResult,
    NonlinearControlProblem,
    nonlinear_null_control,
    operator_B,
    solve_coupled_pair,
)
from .propagators import (
    NormBundle,
    TimeGrid,
    Trajectory,
    forced_linear_solve,
    free_flow,
    mixed_norm,
    nls_solve,
    norm_bundle,
    picard_solve,
)
from .spectral import (
    Field,
    Grid,
    apply_multiplier,
    hs_inner,
    lambda_apply,
    lambda_inverse,
    make_grid,
    sobolev_norm,
)
