"""Radial Born-Infeld potential generated by the density ``u^2``.

For radial ``u`` the equation ``-div(grad phi / sqrt(1 - |grad phi|^2)) = u^2``
integrates once to

    phi'(r) / sqrt(1 - phi'(r)^2) = f(r) = -(1/r^2) int_0^r u(s)^2 s^2 ds,

so ``phi' = f / sqrt(1 + f^2)`` and ``|phi'| < 1`` holds automatically.

Discrete construction
---------------------
``f`` uses the grid's prefix quadrature.  ``phi`` is then recovered from
``phi'`` with the transpose of that same prefix operator, which makes the
quadrature potential the exact minimizer of the discretized energy

    E(u, phi) = int (1 - sqrt(1 - phi'^2)) - int phi u^2

over the nodal slopes and the boundary value.  Two consequences are used
downstream: the flux identity ``int phi'^2 / sqrt(1 - phi'^2) = int phi u^2``
holds to rounding, and the derivative of the reduced functional needs no
variation of ``phi``.

Beyond ``r_max`` the density is taken to vanish and the potential is the
Coulomb field ``Q/r`` with ``Q = int_0^{r_max} u^2 s^2 ds``.  Its energy,
``2 pi Q^2 / r_max`` (Born-Infeld) and ``4 pi Q^2 / r_max`` (flux term), is
added to the interior sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConstraintViolationError, OracleError
from .grid import FOUR_PI, RadialField, atomic_write_text, integrate_radial, write_field_csv

ORACLE_SLOPE_EPS = 1e-6
STALL_GTOL = 1e-5


@dataclass(frozen=True, eq=False)
class FieldSolution:
    phi: RadialField
    dphi: RadialField
    f: RadialField
    charge: float
    bi_energy: float
    interaction: float
    flux_energy: float
    sup_slope: float

    @property
    def tail(self) -> float:
        return self.charge / self.phi.grid.r_max

    @property
    def energy(self) -> float:
        """``E(u, phi_u)``; never positive for the true minimizer."""
        return self.bi_energy - self.interaction

    def scalars(self) -> dict:
        return {
            "charge": self.charge,
            "bi_energy": self.bi_energy,
            "interaction": self.interaction,
            "flux_energy": self.flux_energy,
            "sup_slope": self.sup_slope,
        }


def bi_energy_density(dphi_value):
    """Born-Infeld energy density ``1 - sqrt(1 - s^2)`` of a slope ``s``.

    Accepts a scalar or an array; every slope must satisfy ``|s| < 1``.
    """
    s = np.asarray(dphi_value, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(np.abs(s) >= 1.0):
        raise ConstraintViolationError("Born-Infeld density needs |phi'| < 1")
    s2 = s * s
    # 1 - sqrt(1 - s2) without cancellation for small slopes
    out = s2 / (1.0 + np.sqrt(1.0 - s2))
    return float(out) if out.ndim == 0 else out


def flux_function(u: RadialField) -> RadialField:
    """``f(r) = -(1/r^2) int_0^r u^2 s^2 ds``, with ``f(0) = 0``."""
    grid = u.grid
    r = grid.nodes
    P = grid.prefix_integral(u.values**2 * r**2)
    f = np.zeros_like(P)
    f[1:] = -P[1:] / r[1:] ** 2
    return u.with_values(f)


def _exterior_terms(charge: float, r_max: float) -> tuple[float, float]:
    ext_bi = 2.0 * math.pi * charge**2 / r_max
    ext_flux = 4.0 * math.pi * charge**2 / r_max
    return ext_bi, ext_flux


def solve_field(u: RadialField) -> FieldSolution:
    """Born-Infeld potential ``phi_u`` of the density ``u^2``."""
    grid = u.grid
    r = grid.nodes
    h = grid.h
    u2 = u.values**2
    f = flux_function(u).values
    charge = float(np.dot(grid.weights, u2))
    sq = np.sqrt(1.0 + f * f)
    dphi = f / sq

    # nodal weights of the prefix rule at r_max, i.e. weights / r^2
    end = np.empty_like(r)
    end[1:] = grid.weights[1:] / r[1:] ** 2
    end[0] = 0.0
    tail = charge / grid.r_max
    drop = grid.prefix_integral_adjoint(-end * dphi)
    phi = np.empty_like(r)
    phi[1:-1] = tail + drop[1:-1] / end[1:-1]
    phi[-1] = tail
    phi[0] = phi[1] - 0.5 * h * dphi[1]

    ext_bi, ext_flux = _exterior_terms(charge, grid.r_max)
    f2 = f * f
    bi_interior = FOUR_PI * float(np.dot(grid.weights, f2 / (sq * (1.0 + sq))))
    flux_interior = FOUR_PI * float(np.dot(grid.weights, f2 / sq))
    interaction = FOUR_PI * float(np.dot(grid.weights, phi * u2))
    return FieldSolution(
        phi=u.with_values(phi),
        dphi=u.with_values(dphi),
        f=u.with_values(f),
        charge=charge,
        bi_energy=bi_interior + ext_bi,
        interaction=interaction,
        flux_energy=flux_interior + ext_flux,
        sup_slope=float(np.max(np.abs(dphi))),
    )


def _oracle_energy(phi, slopes, m, h, wu2):
    return FOUR_PI * (h * np.dot(m, bi_energy_density(slopes)) - np.dot(wu2, phi))


def oracle_minimize_field(
    u: RadialField,
    max_iter: int = 50000,
    step: float = 1e-2,
    gtol: float = 1e-7,
) -> FieldSolution:
    """Minimize the discretized field energy directly over nodal values.

    Independent of :func:`solve_field`: slopes are edge differences, the
    Born-Infeld term uses the midpoint rule on each cell, and no
    closed-form flux is used.  The boundary value at ``r_max`` is fixed to
    the Coulomb tail ``Q / r_max``.  Descent directions are preconditioned by
    the linearized (``phi'' -> 0``) operator; each step is followed by
    clipping the slopes to ``|phi'| <= 1 - 1e-6`` and an Armijo test.

    Raises :class:`OracleError` when the preconditioned gradient norm has not
    dropped below ``gtol`` (relative to the interaction scale) after
    ``max_iter`` steps.
    """
    grid = u.grid
    h = grid.h
    m = (0.5 * (grid.nodes[1:] + grid.nodes[:-1])) ** 2
    u2 = u.values**2
    wu2 = grid.weights * u2
    charge = float(wu2.sum())
    tail = charge / grid.r_max
    n = grid.n
    cap = 1.0 - ORACLE_SLOPE_EPS

    # tridiagonal linearized operator on the free nodes 0..n-1
    ab = np.zeros((3, n))
    diag = np.empty(n)
    diag[0] = m[0] / h
    diag[1:] = (m[:-1] + m[1:]) / h
    ab[1] = FOUR_PI * diag
    ab[0, 1:] = -FOUR_PI * m[:-1] / h
    ab[2, :-1] = -FOUR_PI * m[:-1] / h

    phi = np.full(n + 1, tail)
    slopes = np.zeros(n)
    energy = _oracle_energy(phi, slopes, m, h, wu2)
    scale = FOUR_PI * max(charge * tail, 1e-300)
    if charge == 0.0:
        return _oracle_solution(u, phi, slopes, m, h, charge)

    s = step
    gnorm = math.inf
    for _ in range(max_iter):
        bp = slopes / np.sqrt(1.0 - slopes * slopes)
        grad = np.empty(n)
        grad[0] = -m[0] * bp[0]
        grad[1:] = m[: n - 1] * bp[: n - 1] - m[1:] * bp[1:]
        grad = FOUR_PI * grad - FOUR_PI * wu2[:n]
        d = solve_banded((1, 1), ab, -grad)
        gnorm = math.sqrt(max(-np.dot(grad, d), 0.0))
        if gnorm <= gtol * math.sqrt(scale):
            return _oracle_solution(u, phi, slopes, m, h, charge)
        slope_dd = -np.dot(grad, d)
        while True:
            trial = phi.copy()
            trial[:n] += s * d
            ts = np.clip(np.diff(trial) / h, -cap, cap)
            # re-integrate inward from the fixed boundary value
            trial[:n] = tail - h * np.cumsum(ts[::-1])[::-1]
            e_trial = _oracle_energy(trial, ts, m, h, wu2)
            if e_trial <= energy - 1e-4 * s * slope_dd or s < 1e-14:
                break
            s *= 0.5
        if s < 1e-14:
            # no resolvable decrease left: accept if we are at the rounding floor
            if gnorm <= STALL_GTOL * math.sqrt(scale):
                return _oracle_solution(u, phi, slopes, m, h, charge)
            break
        phi, slopes, energy = trial, ts, e_trial
        s = min(2.0 * s, 1.0)
    raise OracleError(
        f"field oracle did not converge (gradient norm {gnorm:.3e})",
        last_iterate=u.with_values(phi),
        grad_norm=gnorm,
    )


def _oracle_solution(u, phi, slopes, m, h, charge) -> FieldSolution:
    grid = u.grid
    dphi = np.empty(grid.size)
    dphi[0] = 0.0
    dphi[1:-1] = 0.5 * (slopes[:-1] + slopes[1:])
    dphi[-1] = slopes[-1]
    f = dphi / np.sqrt(1.0 - dphi * dphi)
    ext_bi, ext_flux = _exterior_terms(charge, grid.r_max)
    bi = FOUR_PI * h * float(np.dot(m, bi_energy_density(slopes))) + ext_bi
    flux = FOUR_PI * h * float(np.dot(m, slopes**2 / np.sqrt(1.0 - slopes**2))) + ext_flux
    interaction = integrate_radial(u.with_values(phi * u.values**2))
    return FieldSolution(
        phi=u.with_values(phi),
        dphi=u.with_values(dphi),
        f=u.with_values(f),
        charge=charge,
        bi_energy=bi,
        interaction=interaction,
        flux_energy=flux,
        sup_slope=float(np.max(np.abs(slopes))) if slopes.size else 0.0,
    )


def write_field_solution(sol: FieldSolution, out_dir, inline: bool = False, stem: str = "field") -> Path:
    """Write ``<stem>.json`` (scalars) plus ``phi``, ``dphi``, ``f`` as CSV or inline arrays."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = sol.scalars()
    for name in ("phi", "dphi", "f"):
        fld = getattr(sol, name)
        if inline:
            doc[name] = fld.values.tolist()
        else:
            path = write_field_csv(fld, out_dir / f"{stem}_{name}.csv", header=name)
            doc[name] = path.name
    if inline:
        doc["r"] = sol.phi.grid.nodes.tolist()
    return atomic_write_text(out_dir / f"{stem}.json", json.dumps(doc, indent=2, allow_nan=False))
