"""Radial Schrödinger-Born-Infeld solver and verification suite."""

from .errors import (
    ConstraintViolationError,
    IncompatibleFieldsError,
    InvalidExponentError,
    InvalidFieldError,
    InvalidGridError,
    OracleError,
    ParameterError,
    ProjectionError,
    SBIError,
    UndefinedRatioError,
)
from .grid import (
    RadialField,
    RadialGrid,
    h1_norm_sq,
    integrate_radial,
    kinetic_form,
    lp_norm,
    make_uniform_grid,
    radial_derivative,
    read_field_csv,
    write_field_csv,
)
from .field import (
    FieldSolution,
    bi_energy_density,
    flux_function,
    oracle_minimize_field,
    solve_field,
    write_field_solution,
)
from .functional import (
    FunctionalBreakdown,
    ModelParams,
    derivative_apply,
    evaluate,
    interpolation_ratio,
    nehari_residual,
    pohozaev_residual,
    sobolev_gradient,
    weak_residuals,
)
from .groundstate import (
    GeometryScan,
    GroundStateResult,
    LevelCurve,
    find_ground_state,
    geometry_scan,
    mountain_pass_level,
    nehari_project,
    scan_lambda,
    scan_p,
)
from .diagnostics import DiagnosticsReport, run_all

__version__ = "0.1.0"
