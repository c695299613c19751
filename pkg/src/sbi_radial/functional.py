"""The reduced action ``I_lambda(u) = F(u, phi_u)`` and its first variation.

    I_lambda(u) = 1/2 int (|grad u|^2 + u^2) + 1/2 int phi_u u^2
                  - 1/2 int (1 - sqrt(1 - |grad phi_u|^2))
                  - lambda/(p+1) int |u|^(p+1)

``lambda = 1`` is the unperturbed functional.  All discrete forms below are
the ones the ground-state solver descends on, so finite differences of
:func:`evaluate` agree with :func:`derivative_apply` to rounding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    InvalidExponentError,
    ParameterError,
    UndefinedRatioError,
)
from .field import FieldSolution, solve_field
from .grid import (
    FOUR_PI,
    RadialField,
    check_same_grid,
    integrate_radial,
    kinetic_form,
    lp_norm,
    make_uniform_grid,
    radial_derivative,
)

log = logging.getLogger(__name__)

P_MIN, P_MAX = 2.5, 5.0
DEFAULT_Q = 2.9


@dataclass(frozen=True)
class ModelParams:
    """Exponent, perturbation parameter, grid and solver tolerances."""

    p: float = 3.0
    lam: float = 1.0
    r_max: float = 30.0
    n: int = 4096
    tol_grad: float = 1e-6
    tol_nehari: float = 1e-8
    max_iter: int = 2000

    def __post_init__(self):
        for name in ("p", "lam", "r_max", "tol_grad", "tol_nehari"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if not self.p > 1.0:
            raise ParameterError(f"exponent p must exceed 1, got {self.p}")
        if not 0.5 <= self.lam <= 1.0:
            raise ParameterError(f"lambda must lie in [1/2, 1], got {self.lam}")
        if self.r_max <= 0 or self.n < 16:
            raise ParameterError("grid needs r_max > 0 and n >= 16")
        if self.tol_grad <= 0 or self.tol_nehari <= 0:
            raise ParameterError("tolerances must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if self.p_out_of_range:
            log.warning("p=%g lies outside (5/2, 5); existence is not guaranteed there", self.p)

    @property
    def p_out_of_range(self) -> bool:
        return not (P_MIN < self.p < P_MAX)

    def grid(self):
        return make_uniform_grid(self.r_max, self.n)

    def with_(self, **changes) -> "ModelParams":
        data = asdict(self)
        data.update(changes)
        return ModelParams(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


@dataclass(frozen=True)
class FunctionalBreakdown:
    kinetic: float
    mass: float
    interaction: float
    bi_energy: float
    power: float
    value: float
    p: float
    lam: float
    flux_energy: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "mass": self.mass,
            "interaction": self.interaction,
            "bi_energy": self.bi_energy,
            "power": self.power,
            "value": self.value,
            "p": self.p,
            "lambda": self.lam,
        }


def _power_density(u: np.ndarray, p: float) -> np.ndarray:
    return np.abs(u) ** (p + 1.0)


def breakdown_from(u: RadialField, sol: FieldSolution, params: ModelParams) -> FunctionalBreakdown:
    kinetic = kinetic_form(u)
    mass = integrate_radial(u.with_values(u.values**2))
    power = integrate_radial(u.with_values(_power_density(u.values, params.p)))
    value = (
        0.5 * (kinetic + mass)
        + 0.5 * sol.interaction
        - 0.5 * sol.bi_energy
        - params.lam * power / (params.p + 1.0)
    )
    return FunctionalBreakdown(
        kinetic=kinetic,
        mass=mass,
        interaction=sol.interaction,
        bi_energy=sol.bi_energy,
        power=power,
        value=value,
        p=params.p,
        lam=params.lam,
        flux_energy=sol.flux_energy,
    )


def evaluate(u: RadialField, params: ModelParams) -> FunctionalBreakdown:
    """All terms of ``I_lambda(u)`` and their sum."""
    return breakdown_from(u, solve_field(u), params)


def _euclidean_gradient(u: RadialField, phi: np.ndarray, params: ModelParams) -> np.ndarray:
    """Gradient of the discrete ``I_lambda`` with respect to the nodal values."""
    grid = u.grid
    m = grid.cell_moments
    v = u.values
    du = np.diff(v)
    g = np.zeros_like(v)
    g[:-1] -= m * du
    g[1:] += m * du
    g *= FOUR_PI / grid.h
    nl = np.abs(v) ** (params.p - 1.0) * v
    g += FOUR_PI * grid.weights * ((1.0 + phi) * v - params.lam * nl)
    return g


def derivative_apply(u: RadialField, v: RadialField, params: ModelParams, field: FieldSolution | None = None) -> float:
    """``I'_lambda(u)[v]``.

    ``phi_u`` enters only as a coefficient; the map ``u -> phi_u`` is not
    differentiated, since its variation cancels at the minimizer.
    """
    check_same_grid(u, v)
    if field is None:
        field = solve_field(u)
    return float(np.dot(_euclidean_gradient(u, field.phi.values, params), v.values))


def h1_banded(grid) -> np.ndarray:
    """``(-Laplace + 1)`` on the free nodes ``0..n-1`` in banded storage.

    Dirichlet at ``r_max``; the origin row carries the natural (Neumann)
    condition of the radial stiffness form.
    """
    n = grid.n
    m = grid.cell_moments
    h = grid.h
    ab = np.zeros((3, n))
    diag = np.zeros(n)
    diag[0] = m[0]
    diag[1:] = m[:-1] + m[1:]
    ab[1] = FOUR_PI * (diag / h + grid.weights[:n])
    ab[0, 1:] = -FOUR_PI * m[:-1] / h
    ab[2, :-1] = -FOUR_PI * m[:-1] / h
    return ab


def h1_inner(a: RadialField, b: RadialField) -> float:
    """The discrete H^1 inner product matching :func:`h1_banded`."""
    return kinetic_form(a, b) + integrate_radial(a.with_values(a.values * b.values))


def sobolev_gradient(u: RadialField, params: ModelParams, field: FieldSolution | None = None) -> RadialField:
    """Riesz representative of ``I'_lambda(u)`` in the H^1 inner product."""
    if field is None:
        field = solve_field(u)
    grid = u.grid
    rhs = _euclidean_gradient(u, field.phi.values, params)
    g = np.zeros(grid.size)
    if np.any(rhs[:-1]):
        g[:-1] = solve_banded((1, 1), h1_banded(grid), rhs[:-1])
    return u.with_values(g)


def nehari_residual(u: RadialField, params: ModelParams, breakdown: FunctionalBreakdown | None = None) -> float:
    """``I'_lambda(u)[u]`` written through the flux identity.

    ``int |grad u|^2 + int u^2 + int |phi'|^2/sqrt(1-|phi'|^2) - lambda int |u|^(p+1)``
    """
    b = breakdown if breakdown is not None else evaluate(u, params)
    return b.kinetic + b.mass + b.flux_energy - params.lam * b.power


def pohozaev_residual(u: RadialField, params: ModelParams, breakdown: FunctionalBreakdown | None = None) -> float:
    """Left minus right side of the Pohozaev identity (power term weighted by lambda)."""
    b = breakdown if breakdown is not None else evaluate(u, params)
    lhs = 0.5 * b.kinetic + 1.5 * b.mass + 2.0 * b.flux_energy - 1.5 * b.bi_energy
    return lhs - 3.0 * params.lam / (params.p + 1.0) * b.power


def pohozaev_relative(b: FunctionalBreakdown, residual: float) -> float:
    scale = 3.0 * b.lam / (b.p + 1.0) * b.power
    return abs(residual) / scale if scale > 0 else abs(residual)


def interpolation_exponents(q: float) -> tuple[float, float]:
    """``((q-1)/q, 2 (q*)')`` with ``q* = 3q/(3-q)`` and ``(q*)' = 3q/(4q-3)``."""
    if not 2.0 <= q < 3.0:
        raise InvalidExponentError(f"q must lie in [2, 3), got {q}")
    return (q - 1.0) / q, 2.0 * 3.0 * q / (4.0 * q - 3.0)


def growth_exponent(q: float) -> float:
    """``(3q - 2)/(q - 1)``: the interaction growth rate along rays."""
    if not 2.0 <= q <= 3.0:
        raise InvalidExponentError(f"q must lie in [2, 3], got {q}")
    return (3.0 * q - 2.0) / (q - 1.0)


def grad_phi_l2(sol: FieldSolution) -> float:
    """``||grad phi_u||_2`` including the Coulomb exterior."""
    grid = sol.phi.grid
    interior = integrate_radial(sol.dphi.with_values(sol.dphi.values**2))
    return math.sqrt(interior + FOUR_PI * sol.charge**2 / grid.r_max)


def interpolation_ratio(u: RadialField, q: float = DEFAULT_Q) -> float:
    """``||grad phi_u||_2^((q-1)/q) / ||u||_{2(q*)'}``.

    Diagnostic only: the bound constant is not explicit, so callers check
    that the ratio stays bounded, not its value.
    """
    expo, index = interpolation_exponents(q)
    denom = lp_norm(u, index)
    if denom == 0.0:
        raise UndefinedRatioError("interpolation ratio is undefined for u = 0")
    return grad_phi_l2(solve_field(u)) ** expo / denom


@dataclass(frozen=True)
class WeakResidual:
    schrodinger: float
    born_infeld: float


def weak_residuals(u: RadialField, params: ModelParams, tests: list[RadialField]) -> list[WeakResidual]:
    """Relative residuals of both weak equations against each test function.

    Each residual is divided by the largest individual term of its equation.
    The Schrödinger equation uses the solver's discrete forms; the
    Born-Infeld equation uses finite-difference slopes of the test function.
    """
    sol = solve_field(u)
    grid = u.grid
    v = u.values
    phi = sol.phi.values
    out = []
    for psi in tests:
        check_same_grid(u, psi)
        terms = [
            kinetic_form(u, psi),
            FOUR_PI * float(np.dot(grid.weights, v * psi.values)),
            FOUR_PI * float(np.dot(grid.weights, phi * v * psi.values)),
            -FOUR_PI * params.lam * float(np.dot(grid.weights, np.abs(v) ** (params.p - 1) * v * psi.values)),
        ]
        scale1 = max(abs(t) for t in terms)
        r1 = abs(sum(terms)) / scale1 if scale1 > 0 else 0.0

        dpsi = radial_derivative(psi).values
        lhs = FOUR_PI * float(np.dot(grid.weights, sol.f.values * dpsi))
        rhs = FOUR_PI * float(np.dot(grid.weights, v * v * psi.values))
        scale2 = max(abs(lhs), abs(rhs))
        r2 = abs(lhs - rhs) / scale2 if scale2 > 0 else 0.0
        out.append(WeakResidual(r1, r2))
    return out
