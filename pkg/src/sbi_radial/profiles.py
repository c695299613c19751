"""Test profiles: the field corpus, bump test functions and sphere samples."""

from __future__ import annotations

import math

import numpy as np

from .grid import RadialField, RadialGrid, h1_norm_sq


def gaussian(grid: RadialGrid, amplitude: float = 1.0, width: float = 1.0) -> RadialField:
    return RadialField.from_function(grid, lambda r: amplitude * np.exp(-((r / width) ** 2)))


def piecewise_charge(grid: RadialGrid) -> RadialField:
    """``u^2 = 3`` on ``r <= 1`` and ``0`` beyond, so ``f(r) = -r`` then ``-1/r^2``."""
    return RadialField.from_function(grid, lambda r: np.where(r <= 1.0, math.sqrt(3.0), 0.0))


def ring(grid: RadialGrid) -> RadialField:
    return RadialField.from_function(grid, lambda r: r**2 * np.exp(-(r**2)))


def two_bump(grid: RadialGrid) -> RadialField:
    return RadialField.from_function(
        grid, lambda r: np.exp(-4.0 * (r - 1.0) ** 2) + 0.5 * np.exp(-4.0 * (r - 3.0) ** 2)
    )


CORPUS = {
    "gaussian": gaussian,
    "piecewise": piecewise_charge,
    "ring": ring,
    "two_bump": two_bump,
}


def corpus(grid: RadialGrid, names=("gaussian", "piecewise", "ring")) -> dict[str, RadialField]:
    return {name: CORPUS[name](grid) for name in names}


def bump(grid: RadialGrid, center: float, width: float) -> RadialField:
    """Smooth compactly supported ``exp(-1/(1 - x^2))``, ``x = (r - center)/width``."""
    x = (grid.nodes - center) / width
    inside = np.abs(x) < 1.0
    vals = np.zeros(grid.size)
    vals[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return RadialField(grid, vals)


def bump_basis(grid: RadialGrid, count: int = 10, lo: float = 0.7, hi: float = 5.0, width: float = 0.6) -> list[RadialField]:
    """``count`` bumps with evenly spaced centers in ``[lo, hi]``."""
    return [bump(grid, c, width) for c in np.linspace(lo, hi, count)]


def sphere_samples(grid: RadialGrid, rho: float, count: int = 20, seed: int = 42) -> list[RadialField]:
    """Random smooth positive bumps rescaled to ``h1_norm = rho``.

    Each sample is a Gaussian-type bump ``exp(-((r - c)/w)^2)`` with random
    center in ``[0, 4]`` and width in ``[0.3, 2]``.  The random stream is a
    function of ``seed`` only.
    """
    rng = np.random.default_rng(seed)
    out = []
    r = grid.nodes
    for _ in range(count):
        c = rng.uniform(0.0, 4.0)
        w = rng.uniform(0.3, 2.0)
        vals = np.exp(-(((r - c) / w) ** 2))
        vals[-1] = 0.0
        fld = RadialField(grid, vals)
        out.append(fld * (rho / math.sqrt(h1_norm_sq(fld))))
    return out
