"""Uniform radial grids, quadrature and norms for radial functions on R^3.

All integrals are three-dimensional: for a radial integrand ``g`` the
routines here return ``4*pi * int_0^R g(r) r^2 dr``.

The quadrature is the composite trapezoid rule applied to ``G(r) = g(r) r^2``
with a Gregory end correction at the upper limit.  No correction is applied at
the origin: ``G`` extends evenly across ``r = 0`` for every smooth radial
function, so the odd-derivative terms of the Euler-Maclaurin expansion vanish
there.  The same rule is used for running (prefix) integrals, which makes
``int_0^r u^2 s^2 ds`` exact for piecewise-constant densities and consistent
with :func:`integrate_radial` at ``r = R``.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import IncompatibleFieldsError, InvalidExponentError, InvalidFieldError, InvalidGridError

FOUR_PI = 4.0 * math.pi
MIN_INTERVALS = 16

# Gregory end correction through the third backward difference, expressed as
# weights (in units of h) on G_j, G_{j-1}, G_{j-2}, G_{j-3}.
_GREGORY_END = np.array([-109.0, 177.0, -87.0, 19.0]) / 720.0


def _prefix_band(n: int, h: float) -> sp.csr_matrix:
    """Banded part of the prefix-integral operator.

    Row ``j`` holds the trapezoid half weight on node ``j`` and the Gregory
    correction on the nodes below it.  Negative indices are folded back onto
    the grid (even extension).  Row 0 is empty: the integral over ``[0, 0]``
    is zero.
    """
    rows, cols, vals = [], [], []
    j = np.arange(1, n + 1)
    rows.append(j)
    cols.append(j)
    vals.append(np.full(n, 0.5 * h))
    for d, a in enumerate(_GREGORY_END):
        rows.append(j)
        cols.append(np.abs(j - d))
        vals.append(np.full(n, a * h))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n + 1, n + 1),
    )


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform discretization of ``[0, r_max]``.

    ``weights[k]`` is the quadrature weight of node ``k`` for
    ``int_0^{r_max} g(r) r^2 dr``; ``weights[0] == 0``.
    """

    r_max: float
    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    _band: sp.csr_matrix = field(repr=False)

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def cell_moments(self) -> np.ndarray:
        """``(r_{k+1}^3 - r_k^3) / (3h)``: exact ``r^2`` average over each cell."""
        r = self.nodes
        return (r[1:] ** 3 - r[:-1] ** 3) / (3.0 * self.h)

    def prefix_integral(self, G: np.ndarray) -> np.ndarray:
        """Running integrals ``int_0^{r_j} G(s) ds`` for every node ``j``.

        ``G`` must vanish at the origin (it always carries an ``s^2`` factor
        here) and be even-extendable for the end correction to be accurate
        near ``r = 0``.
        """
        G = np.asarray(G, dtype=float)
        out = np.empty_like(G)
        out[0] = 0.0
        out[1:] = np.cumsum(G[:-1]) - 0.5 * G[0]
        out *= self.h
        return out + self._band @ G

    def prefix_integral_adjoint(self, y: np.ndarray) -> np.ndarray:
        """Transpose of :meth:`prefix_integral` applied to ``y``."""
        y = np.asarray(y, dtype=float)
        tail = np.zeros_like(y)
        tail[:-1] = np.cumsum(y[::-1])[::-1][1:]
        tail[0] *= 0.5
        return self.h * tail + self._band.T @ y

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (self.n == other.n and self.r_max == other.r_max)


def make_uniform_grid(r_max: float = 30.0, n: int = 4096) -> RadialGrid:
    """Uniform grid with ``n`` intervals on ``[0, r_max]``."""
    try:
        r_max = float(r_max)
    except (TypeError, ValueError) as exc:
        raise InvalidGridError(f"r_max must be a real number, got {r_max!r}") from exc
    if not math.isfinite(r_max) or r_max <= 0.0:
        raise InvalidGridError(f"r_max must be finite and positive, got {r_max}")
    if int(n) != n or n < MIN_INTERVALS:
        raise InvalidGridError(f"need an integer n >= {MIN_INTERVALS}, got {n}")
    n = int(n)
    h = r_max / n
    nodes = h * np.arange(n + 1, dtype=float)
    nodes[-1] = r_max
    band = _prefix_band(n, h)
    # weight of G_k in the prefix integral up to r_max, times r_k^2
    unit = np.zeros(n + 1)
    unit[-1] = 1.0
    end_row = np.full(n + 1, h)
    end_row[0] = 0.5 * h
    end_row[-1] = 0.0
    end_row += band.T @ unit
    weights = end_row * nodes**2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return RadialGrid(r_max=r_max, n=n, nodes=nodes, weights=weights, _band=band)


class RadialField:
    """Values of a radial function at the nodes of a :class:`RadialGrid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.size,):
            raise IncompatibleFieldsError(
                f"expected {grid.size} values for grid with n={grid.n}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("field values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialField":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.size))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values)

    def _check(self, other: "RadialField") -> None:
        if not self.grid.same_as(other.grid):
            raise IncompatibleFieldsError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, RadialField):
            self._check(other)
            return self.with_values(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialField):
            self._check(other)
            return self.with_values(self.values - other.values)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, RadialField):
            return NotImplemented
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"RadialField(n={self.grid.n}, r_max={self.grid.r_max}, sup={np.abs(self.values).max():.4g})"


def check_same_grid(*fields: RadialField) -> RadialGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if not grid.same_as(f.grid):
            raise IncompatibleFieldsError("fields live on different grids")
    return grid


def integrate_radial(g: RadialField) -> float:
    """``int_{R^3} g`` for a radial function ``g``."""
    return FOUR_PI * float(np.dot(g.grid.weights, g.values))


def radial_derivative(g: RadialField) -> RadialField:
    """Second-order finite-difference derivative ``dg/dr``.

    Central differences inside, one-sided three-point stencils at both ends.
    """
    v = g.values
    h = g.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return g.with_values(d)


def kinetic_form(u: RadialField, v: RadialField | None = None) -> float:
    """``int grad u . grad v`` for the piecewise-linear interpolants.

    Each cell uses its exact ``r^2`` moment, so this is the P1 finite-element
    stiffness form; it is the kinetic term used throughout the solver.
    """
    grid = u.grid if v is None else check_same_grid(u, v)
    du = np.diff(u.values)
    dv = du if v is None else np.diff(v.values)
    return FOUR_PI * float(np.dot(grid.cell_moments, du * dv)) / grid.h


def h1_norm_sq(u: RadialField) -> float:
    """``int |grad u|^2 + int u^2``."""
    return kinetic_form(u) + integrate_radial(u.with_values(u.values**2))


def lp_norm(u: RadialField, s: float) -> float:
    """``(int |u|^s)^(1/s)`` for ``s >= 1``."""
    if not s >= 1.0 or not math.isfinite(s):
        raise InvalidExponentError(f"Lebesgue exponent must lie in [1, inf), got {s}")
    val = integrate_radial(u.with_values(np.abs(u.values) ** s))
    return max(val, 0.0) ** (1.0 / s)


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a sibling temp file, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_field_csv(field_: RadialField, path, header: str = "value") -> Path:
    """Two-column ``r,<header>`` CSV with 17 significant digits."""
    lines = [f"r,{header}"]
    lines.extend(f"{r:.17g},{v:.17g}" for r, v in zip(field_.grid.nodes, field_.values))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_field_csv(path) -> RadialField:
    """Read a field written by :func:`write_field_csv`.

    The nodes must form a uniform grid starting at 0.  Raises ``ValueError``
    with the offending line number on malformed input.
    """
    path = Path(path)
    rs, vs = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: line 1: empty file") from None
        if len(header) != 2 or header[0].strip() != "r":
            raise ValueError(f"{path}: line 1: expected header 'r,<name>', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 columns, got {len(row)}")
            try:
                rs.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric entry {row!r}") from None
    if len(rs) < MIN_INTERVALS + 1:
        raise ValueError(f"{path}: need at least {MIN_INTERVALS + 1} rows, got {len(rs)}")
    rs = np.array(rs)
    grid = make_uniform_grid(rs[-1], len(rs) - 1)
    if rs[0] != 0.0 or not np.allclose(rs, grid.nodes, rtol=0, atol=1e-12 * grid.r_max):
        raise ValueError(f"{path}: nodes do not form a uniform grid starting at r=0")
    return RadialField(grid, vs)
