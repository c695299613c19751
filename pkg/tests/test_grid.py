import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sbi_radial import (
    IncompatibleFieldsError,
    InvalidExponentError,
    InvalidFieldError,
    InvalidGridError,
    RadialField,
    h1_norm_sq,
    integrate_radial,
    lp_norm,
    make_uniform_grid,
    radial_derivative,
    read_field_csv,
    write_field_csv,
)
from sbi_radial.grid import kinetic_form

G32 = (math.pi / 2) ** 1.5


def test_small_grid_spacing():
    g = make_uniform_grid(1.0, 16)
    assert g.h == 0.0625
    assert g.nodes[8] == 0.5
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.weights[0] == 0.0 and np.all(g.weights >= 0)


def test_constant_weight_sum(grid):
    assert abs(grid.weights.sum() - 9000.0) / 9000.0 < 1e-12


def test_cubic_moment():
    g = make_uniform_grid(2.0, 1024)
    u = RadialField.from_function(g, lambda r: r)
    # integrate_radial carries 4 pi
    assert abs(integrate_radial(u) / (4 * math.pi) - 4.0) / 4.0 < 1e-6


@pytest.mark.parametrize("k", [0, 1, 2])
def test_monomial_exactness(grid, k):
    u = RadialField.from_function(grid, lambda r: r**k)
    exact = 4 * math.pi * 30.0 ** (k + 3) / (k + 3)
    assert abs(integrate_radial(u) - exact) / exact < 1e-12


def test_zero_integral(grid):
    assert integrate_radial(RadialField.zeros(grid)) == 0.0


def test_gaussian_moment(grid):
    u = RadialField.from_function(grid, lambda r: np.exp(-2 * r**2))
    assert abs(integrate_radial(u) - G32) / G32 < 1e-8


def test_constant_on_ball():
    g = make_uniform_grid(3.0, 64)
    u = RadialField.from_function(g, np.ones_like)
    assert abs(integrate_radial(u) - 36 * math.pi) < 1e-12 * 36 * math.pi


def test_refinement_order():
    # a smooth integrand whose r^2-weighted form is not even at 0 or flat at R
    fn = lambda r: np.cos(r) / (1 + r)
    exact = 4 * math.pi * quad(lambda r: math.cos(r) / (1 + r) * r * r, 0, 3, epsabs=0, epsrel=1e-12)[0]
    errs = []
    for n in (64, 128, 256):
        g = make_uniform_grid(3.0, n)
        errs.append(abs(integrate_radial(RadialField.from_function(g, fn)) - exact))
    assert errs[1] < errs[0] / 3.5 and errs[2] < errs[1] / 3.5


@pytest.mark.parametrize("r_max,n", [(0.0, 64), (-1.0, 64), (math.inf, 64), (math.nan, 64), (1.0, 15), (1.0, 2.5)])
def test_invalid_grid(r_max, n):
    with pytest.raises(InvalidGridError):
        make_uniform_grid(r_max, n)


def test_field_validation(grid):
    with pytest.raises(IncompatibleFieldsError):
        RadialField(grid, np.zeros(10))
    vals = np.zeros(grid.size)
    vals[3] = np.nan
    with pytest.raises(InvalidFieldError):
        RadialField(grid, vals)
    other = make_uniform_grid(20.0, 4096)
    with pytest.raises(IncompatibleFieldsError):
        RadialField.zeros(grid) + RadialField.zeros(other)


def test_field_values_immutable(grid):
    u = RadialField.zeros(grid)
    with pytest.raises(ValueError):
        u.values[0] = 1.0


def test_derivative_constant_and_quadratic(grid):
    c = RadialField.from_function(grid, lambda r: np.full_like(r, 2.5))
    assert np.max(np.abs(radial_derivative(c).values)) < 1e-12
    q = RadialField.from_function(grid, lambda r: r**2)
    assert np.max(np.abs(radial_derivative(q).values - 2 * grid.nodes)) < 1e-10


def test_derivative_gaussian_near_one(grid):
    # central differences err by h^2/6 g'''; at n=4096 that is 1.3e-5 near r=1
    u = RadialField.from_function(grid, lambda r: np.exp(-r**2))
    k = int(np.argmin(np.abs(grid.nodes - 1.0)))
    r = grid.nodes[k]
    err = radial_derivative(u).values[k] - (-2 * r * np.exp(-r * r))
    g3 = (12 * r - 8 * r**3) * np.exp(-r * r)
    assert abs(err / (grid.h**2 / 6 * g3) - 1) < 1e-3

    fine = make_uniform_grid(30.0, 8192)
    d = radial_derivative(RadialField.from_function(fine, lambda r: np.exp(-r**2))).values
    k = int(np.argmin(np.abs(fine.nodes - 1.0)))
    r = fine.nodes[k]
    assert abs(d[k] + 2 * r * np.exp(-r * r)) < 1e-5
    assert abs(np.interp(1.0, fine.nodes, d) + 2 * math.exp(-1)) < 1e-5


def test_fundamental_theorem():
    # int_0^R 2 g g' dr = g(R)^2 - g(0)^2 = -g(0)^2 for g vanishing at R
    errs = []
    for n in (256, 512, 1024):
        g = make_uniform_grid(4.0, n)
        r = g.nodes
        u = RadialField.from_function(g, lambda r: np.cos(np.pi * r / 8) ** 2)
        d = radial_derivative(u).values
        # prefix weights at R (grid weights without the r^2 factor), origin node included
        total = np.dot(g.weights[1:] / r[1:] ** 2, 2 * u.values[1:] * d[1:]) + g.h * 0.5 * 2 * u.values[0] * d[0]
        errs.append(abs(total + 1.0))
    assert errs[0] < 1e-3
    assert errs[1] < errs[0] / 3.0 and errs[2] < errs[1] / 3.0


def test_h1_gaussian():
    # P1 stiffness error is 1.1e-6 at n=4096; the 1e-6 target needs n=8192
    g = make_uniform_grid(30.0, 8192)
    u = RadialField.from_function(g, lambda r: np.exp(-r**2))
    assert abs(h1_norm_sq(u) - 4 * G32) / (4 * G32) < 1e-6


def test_h1_gaussian_default_grid(grid):
    u = RadialField.from_function(grid, lambda r: np.exp(-r**2))
    assert abs(h1_norm_sq(u) - 4 * G32) / (4 * G32) < 2e-6
    assert h1_norm_sq(RadialField.zeros(grid)) == 0.0
    assert abs(h1_norm_sq(2 * u) - 4 * h1_norm_sq(u)) < 1e-13 * h1_norm_sq(u)


def test_lp_norms(grid):
    u = RadialField.from_function(grid, lambda r: np.exp(-r**2))
    assert lp_norm(RadialField.zeros(grid), 2) == 0.0
    assert abs(lp_norm(u, 2) - G32**0.5) < 1e-6
    oracle = quad(lambda r: 4 * math.pi * r * r * math.exp(-4 * r * r), 0, np.inf, epsabs=0, epsrel=1e-13)[0] ** 0.25
    assert abs(lp_norm(u, 4) - oracle) / oracle < 1e-8
    with pytest.raises(InvalidExponentError):
        lp_norm(u, 0.5)


def test_kinetic_bilinear(grid):
    u = RadialField.from_function(grid, lambda r: np.exp(-r**2))
    v = RadialField.from_function(grid, lambda r: np.exp(-((r - 1) ** 2)))
    assert math.isclose(kinetic_form(u + v), kinetic_form(u) + 2 * kinetic_form(u, v) + kinetic_form(v), rel_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(1e-3, 1e3), width=st.floats(0.3, 4.0))
def test_norm_homogeneity(c, width):
    g = make_uniform_grid(20.0, 256)
    u = RadialField.from_function(g, lambda r: np.exp(-((r / width) ** 2)))
    assert math.isclose(h1_norm_sq(c * u), c * c * h1_norm_sq(u), rel_tol=1e-13)


@settings(max_examples=20, deadline=None)
@given(values=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=17, max_size=60))
def test_csv_round_trip(tmp_path_factory, values):
    g = make_uniform_grid(7.3, len(values) - 1)
    u = RadialField(g, values)
    path = write_field_csv(u, tmp_path_factory.mktemp("csv") / "u.csv", header="u")
    back = read_field_csv(path)
    assert back.grid.n == g.n and back.grid.r_max == g.r_max
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(back.grid.nodes, g.nodes)


def test_csv_format(tmp_path):
    g = make_uniform_grid(1.0, 16)
    path = write_field_csv(RadialField.from_function(g, lambda r: r / 3), tmp_path / "a.csv")
    lines = path.read_bytes().split(b"\n")
    assert lines[0] == b"r,value"
    assert lines[2] == b"0.0625,0.020833333333333332"
    assert not list(tmp_path.glob(".*tmp"))


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("x,y\n0,1\n", 1),
        ("r,u\n" + "".join(f"{k / 16},0\n" for k in range(10)) + "0.7,abc\n", 12),
        ("r,u\n" + "".join(f"{k / 16},0\n" for k in range(5)) + "1,2,3\n", 7),
    ],
)
def test_csv_malformed(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError, match=f"line {line}"):
        read_field_csv(path)


def test_csv_nonuniform(tmp_path):
    path = tmp_path / "nu.csv"
    rows = [k / 16 for k in range(17)]
    rows[5] += 0.01
    path.write_text("r,u\n" + "".join(f"{r},0\n" for r in rows))
    with pytest.raises(ValueError, match="uniform"):
        read_field_csv(path)
