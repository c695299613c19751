"""Radial ground states by Nehari-constrained Sobolev-gradient descent.

The iterate is kept on the Nehari set ``{u != 0 : I'_lambda(u)[u] = 0}`` by
rescaling along its ray; between projections it moves against the H^1
gradient with Armijo backtracking.  Minimizers of ``I_lambda`` on that set
are the least-action nontrivial critical points.

Also here: lambda continuation, ray scans for the mountain-pass geometry and
a segment-path estimate of the mountain-pass level.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ProjectionError, SBIError
from .field import FieldSolution, solve_field
from .functional import (
    DEFAULT_Q,
    FunctionalBreakdown,
    ModelParams,
    breakdown_from,
    evaluate,
    growth_exponent,
    h1_inner,
    nehari_residual,
    pohozaev_relative,
    pohozaev_residual,
    sobolev_gradient,
)
from .grid import RadialField, RadialGrid, atomic_write_text, h1_norm_sq, lp_norm, write_field_csv

log = logging.getLogger(__name__)

T_START = 1e-3
T_LIMIT = 1e6


def seed_profile(name: str, grid: RadialGrid) -> RadialField:
    """Named starting profiles: ``gaussian``, ``shifted`` and ``ring``."""
    r = grid.nodes
    profiles = {
        "gaussian": lambda: np.exp(-r**2),
        "shifted": lambda: np.exp(-((r - 1.0) ** 2)),
        "ring": lambda: r**2 * np.exp(-r**2),
    }
    try:
        values = profiles[name]()
    except KeyError:
        raise ValueError(f"unknown seed profile {name!r}; choose from {sorted(profiles)}") from None
    values[-1] = 0.0
    return RadialField(grid, values)


# --------------------------------------------------------------------------
# Nehari projection


@dataclass
class NehariProjection:
    t_star: float
    projected: RadialField
    sign_changes: list[tuple[float, float]] = field(default_factory=list)
    evaluations: int = 0


def _ray_residual(u: RadialField, params: ModelParams) -> Callable[[float], float]:
    def res(t: float) -> float:
        return nehari_residual(u * t, params)

    return res


def nehari_project(u: RadialField, params: ModelParams, rtol: float = 1e-10) -> NehariProjection:
    """Scale ``u`` onto the Nehari set by bracketed bisection in ``t``.

    ``t`` is sampled at ``1e-3 * 2^k`` until the residual turns negative; the
    first such bracket is bisected, so the smallest sampled root is returned.
    Two further doublings are sampled to report any re-crossing.
    """
    if not np.any(u.values):
        raise ProjectionError("cannot project the zero function")
    res = _ray_residual(u, params)
    count = 0

    def ev(t):
        nonlocal count
        count += 1
        return res(t)

    lo, r_lo = T_START, ev(T_START)
    if r_lo <= 0.0:
        raise ProjectionError(f"Nehari residual is not positive at t={T_START}; degenerate ray")
    hi = lo
    r_hi = r_lo
    while r_hi > 0.0:
        lo, r_lo = hi, r_hi
        hi *= 2.0
        if hi > T_LIMIT:
            raise ProjectionError(
                f"no sign change of the Nehari residual up to t={T_LIMIT:g} (p={params.p})"
            )
        r_hi = ev(hi)
    changes = [(lo, hi)]
    t_prev, r_prev = hi, r_hi
    for _ in range(2):
        t_next = 2.0 * t_prev
        r_next = ev(t_next)
        if (r_next > 0) != (r_prev > 0):
            changes.append((t_prev, t_next))
        t_prev, r_prev = t_next, r_next

    a, b = lo, hi
    while b - a > rtol * b:
        mid = 0.5 * (a + b)
        if ev(mid) > 0.0:
            a = mid
        else:
            b = mid
    t_star = 0.5 * (a + b)
    return NehariProjection(t_star, u * t_star, changes, count)


def _project_near(u: RadialField, params: ModelParams, guess: float = 1.0) -> tuple[float, RadialField]:
    """Fast projection for iterates already close to the Nehari set."""
    res = _ray_residual(u, params)
    lo, hi = guess / 1.05, guess * 1.05
    r_lo, r_hi = res(lo), res(hi)
    widen = 0
    while not (r_lo > 0.0 > r_hi):
        widen += 1
        if widen > 8:
            proj = nehari_project(u, params)
            return proj.t_star, proj.projected
        if r_lo <= 0.0:
            lo /= 1.5
            r_lo = res(lo)
        if r_hi >= 0.0:
            hi *= 1.5
            r_hi = res(hi)
    t = brentq(res, lo, hi, xtol=1e-14, rtol=1e-13)
    return t, u * t


# --------------------------------------------------------------------------
# Ground state


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    u: RadialField
    field: FieldSolution
    breakdown: FunctionalBreakdown
    nehari_res: float
    pohozaev_res: float
    grad_norm: float
    iterations: int
    converged: bool
    params: ModelParams
    history: tuple = ()

    @property
    def value(self) -> float:
        return self.breakdown.value

    @property
    def nehari_relative(self) -> float:
        return abs(self.nehari_res) / self.breakdown.power

    @property
    def pohozaev_relative(self) -> float:
        return pohozaev_relative(self.breakdown, self.pohozaev_res)

    @property
    def grad_relative(self) -> float:
        return self.grad_norm / math.sqrt(h1_norm_sq(self.u))

    def scalars(self) -> dict:
        return {
            "value": self.value,
            "nehari_res": self.nehari_res,
            "nehari_relative": self.nehari_relative,
            "pohozaev_res": self.pohozaev_res,
            "pohozaev_relative": self.pohozaev_relative,
            "grad_norm": self.grad_norm,
            "grad_relative": self.grad_relative,
            "iterations": self.iterations,
            "converged": self.converged,
            "positive": bool(np.all(self.u.values[:-1] > 0) or np.all(self.u.values[:-1] < 0)),
        }

    def to_dict(self) -> dict:
        doc = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in self.scalars().items()}
        doc["breakdown"] = self.breakdown.to_dict()
        doc["field"] = self.field.scalars()
        doc["params"] = self.params.to_dict()
        return doc


def _state(u: RadialField, params: ModelParams):
    sol = solve_field(u)
    b = breakdown_from(u, sol, params)
    return sol, b


def find_ground_state(
    params: ModelParams,
    seed: RadialField | None = None,
    armijo: float = 1e-4,
    initial_step: float = 1.0,
) -> GroundStateResult:
    """Minimize ``I_lambda`` over the Nehari set starting from ``seed``.

    The seed defaults to ``exp(-r^2)`` and must live on ``params.grid()``
    (it is resampled by linear interpolation otherwise).  The value at
    ``r_max`` is forced to zero.  Returns ``converged=False`` with the last
    iterate when ``params.max_iter`` is exhausted.
    """
    grid = params.grid()
    if seed is None:
        seed = seed_profile("gaussian", grid)
    elif not seed.grid.same_as(grid):
        seed = RadialField(grid, np.interp(grid.nodes, seed.grid.nodes, seed.values, right=0.0))
    values = np.array(seed.values)
    values[-1] = 0.0
    u = RadialField(grid, values)

    u = nehari_project(u, params).projected
    sol, b = _state(u, params)
    step = initial_step
    history = [b.value]
    converged = False
    grad_norm = math.inf
    it = 0
    for it in range(params.max_iter + 1):
        g = sobolev_gradient(u, params, field=sol)
        grad_sq = h1_inner(g, g)
        grad_norm = math.sqrt(max(grad_sq, 0.0))
        u_norm = math.sqrt(b.kinetic + b.mass)
        n_res = nehari_residual(u, params, b)
        if grad_norm < params.tol_grad * u_norm and abs(n_res) < params.tol_nehari * b.power:
            converged = True
            break
        if it == params.max_iter:
            break
        s = step
        while True:
            t, trial = _project_near(u - s * g, params)
            sol_t, b_t = _state(trial, params)
            if b_t.value <= b.value - armijo * s * grad_sq:
                break
            s *= 0.5
            if s < 1e-12:
                break
        if s < 1e-12:
            # no descent possible at this resolution; stop with what we have
            log.info("line search stalled at iteration %d (grad %.3e)", it, grad_norm)
            break
        u, sol, b = trial, sol_t, b_t
        history.append(b.value)
        step = min(2.0 * s, 4.0)

    n_res = nehari_residual(u, params, b)
    return GroundStateResult(
        u=u,
        field=sol,
        breakdown=b,
        nehari_res=n_res,
        pohozaev_res=pohozaev_residual(u, params, b),
        grad_norm=grad_norm,
        iterations=it,
        converged=converged and b.value > 0.0 and np.any(u.values),
        params=params,
        history=tuple(history),
    )


# --------------------------------------------------------------------------
# lambda continuation


@dataclass
class LevelCurve:
    lambdas: np.ndarray
    levels: np.ndarray  # NaN marks a failed solve
    iterations: np.ndarray
    status: list[str]

    def violations(self, tol: float = 1e-6) -> list[int]:
        """Indices ``i`` where ``levels[i+1] > levels[i] + tol`` (missing entries skipped)."""
        ok = [i for i, v in enumerate(self.levels) if np.isfinite(v)]
        return [a for a, b in zip(ok, ok[1:]) if self.levels[b] > self.levels[a] + tol]

    @property
    def non_increasing(self) -> bool:
        return not self.violations()


def scan_lambda(
    params: ModelParams,
    lambda_grid: Sequence[float],
    seed: RadialField | None = None,
    warm_start: bool = True,
) -> LevelCurve:
    """Ground-state levels ``I_lambda(u_lambda)`` along an increasing lambda grid.

    With ``warm_start`` each solve starts from the previous solution.  A failed
    solve is recorded as NaN with its error message; the scan continues.
    """
    lambdas = np.asarray(lambda_grid, dtype=float)
    if lambdas.size < 3 or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambda grid needs at least 3 strictly increasing values")
    levels = np.full(lambdas.size, np.nan)
    iters = np.zeros(lambdas.size, dtype=int)
    status = []
    current = seed
    for i, lam in enumerate(lambdas):
        try:
            res = find_ground_state(params.with_(lam=float(lam)), seed=current)
        except SBIError as exc:
            status.append(f"failed: {exc}")
            continue
        iters[i] = res.iterations
        if res.converged:
            levels[i] = res.value
            status.append("converged")
        else:
            status.append("not converged")
        if warm_start:
            current = res.u
    return LevelCurve(lambdas, levels, iters, status)


def scan_p(params: ModelParams, p_grid: Sequence[float], seed: RadialField | None = None) -> list[tuple[float, GroundStateResult | None, str]]:
    out = []
    for p in p_grid:
        try:
            res = find_ground_state(params.with_(p=float(p)), seed=seed)
            out.append((float(p), res, "converged" if res.converged else "not converged"))
        except SBIError as exc:
            out.append((float(p), None, f"failed: {exc}"))
    return out


# --------------------------------------------------------------------------
# Geometry along rays


@dataclass
class GeometryScan:
    t: np.ndarray
    values: np.ndarray
    bound: np.ndarray
    c1: float
    c2: float
    c3: float
    exponent: float
    first_negative: float | None

    @property
    def found(self) -> bool:
        return self.first_negative is not None

    def rows(self):
        return zip(self.t, self.values, self.bound)


def geometry_scan(
    u: RadialField,
    params: ModelParams,
    t_grid: Sequence[float],
    q: float = DEFAULT_Q,
) -> GeometryScan:
    """``I_lambda(t u)`` along the ray together with the three-term upper bound.

    ``bound(t) = c1 t^2 + c2 t^e - c3 lambda t^(p+1)`` with ``e = (3q-2)/(q-1)``,
    ``c1 = ||u||^2/2``, ``c3 = ||u||_{p+1}^{p+1}/(p+1)`` and ``c2`` the smallest
    constant making the bound hold for the interaction term on this grid.
    """
    t = np.asarray(t_grid, dtype=float)
    if not np.any(u.values):
        raise ValueError("geometry scan needs u != 0")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t grid must be positive and increasing")
    e = growth_exponent(q)
    c1 = 0.5 * h1_norm_sq(u)
    c3 = lp_norm(u, params.p + 1.0) ** (params.p + 1.0) / (params.p + 1.0)
    vals = np.empty_like(t)
    half_int = np.empty_like(t)
    for i, ti in enumerate(t):
        b = evaluate(u * ti, params)
        vals[i] = b.value
        half_int[i] = 0.5 * b.interaction
    c2 = float(np.max(half_int / t**e))
    bound = c1 * t**2 + c2 * t**e - c3 * params.lam * t ** (params.p + 1.0)
    neg = np.nonzero(vals < 0)[0]
    first = float(t[neg[0]]) if neg.size else None
    return GeometryScan(t, vals, bound, c1, c2, c3, e, first)


# --------------------------------------------------------------------------
# Mountain-pass level along a segment


@dataclass
class MountainPassEstimate:
    level: float
    ground_level: float
    endpoint_scale: float
    argmax_t: float


def mountain_pass_level(
    params: ModelParams,
    path_resolution: int = 10_000,
    ground_state: GroundStateResult | None = None,
    t_grid: Sequence[float] | None = None,
) -> MountainPassEstimate:
    """Upper bound for the mountain-pass level from the path ``s -> s T u_gs``.

    ``T`` is the first ray scale with ``I_lambda(T u_gs) < 0``.  The path is
    sampled at ``path_resolution`` points and the best sample is polished by
    a bounded scalar maximization.
    """
    if ground_state is None:
        ground_state = find_ground_state(params)
    u = ground_state.u
    if t_grid is None:
        t_grid = np.geomspace(1.0, 100.0, 41)
    scan = geometry_scan(u, params, t_grid)
    if not scan.found:
        raise ProjectionError("no negative endpoint found along the ground-state ray")
    T = scan.first_negative

    def I(t):
        return evaluate(u * t, params).value

    s = np.linspace(0.0, 1.0, path_resolution)
    vals = np.array([I(si * T) for si in s])
    k = int(np.argmax(vals))
    lo = s[max(k - 1, 0)] * T
    hi = s[min(k + 1, s.size - 1)] * T
    res = minimize_scalar(lambda t: -I(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    level = max(vals[k], -res.fun)
    arg = res.x if -res.fun >= vals[k] else s[k] * T
    return MountainPassEstimate(level=float(level), ground_level=ground_state.value, endpoint_scale=T, argmax_t=float(arg))


# --------------------------------------------------------------------------
# Serialization


def _json_number(x):
    return float(x) if x is not None and math.isfinite(x) else None


def write_ground_state(result: GroundStateResult, out_dir, stem: str = "ground_state") -> Path:
    """``<stem>.json`` with every scalar plus ``<stem>_u.csv`` and ``<stem>_phi.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = result.to_dict()
    doc["status"] = "converged" if result.converged else "not converged"
    doc["u"] = write_field_csv(result.u, out_dir / f"{stem}_u.csv", header="u").name
    doc["phi"] = write_field_csv(result.field.phi, out_dir / f"{stem}_phi.csv", header="phi").name
    return atomic_write_text(out_dir / f"{stem}.json", json.dumps(doc, indent=2, allow_nan=False))


def write_level_curve(curve: LevelCurve, path) -> Path:
    """Two-column ``lambda,level`` CSV; a failed entry has an empty level."""
    lines = ["lambda,level"]
    for lam, lev in zip(curve.lambdas, curve.levels):
        lines.append(f"{lam:.17g}," + (f"{lev:.17g}" if np.isfinite(lev) else ""))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_level_curve(path) -> tuple[np.ndarray, np.ndarray]:
    lams, levels = [], []
    with Path(path).open() as fh:
        header = fh.readline().strip()
        if header != "lambda,level":
            raise ValueError(f"{path}: line 1: expected header 'lambda,level'")
        for line in fh:
            a, _, b = line.strip().partition(",")
            lams.append(float(a))
            levels.append(float(b) if b else np.nan)
    return np.array(lams), np.array(levels)


def write_geometry_scan(scan: GeometryScan, path) -> Path:
    lines = ["t,value,bound"]
    lines.extend(f"{t:.17g},{v:.17g},{b:.17g}" for t, v, b in scan.rows())
    return atomic_write_text(path, "\n".join(lines) + "\n")
