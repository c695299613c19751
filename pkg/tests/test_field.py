import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erf

from sbi_radial import (
    ConstraintViolationError,
    OracleError,
    RadialField,
    bi_energy_density,
    flux_function,
    make_uniform_grid,
    oracle_minimize_field,
    solve_field,
    write_field_solution,
)
from sbi_radial.functional import ModelParams, weak_residuals
from sbi_radial.profiles import bump, corpus, piecewise_charge

GAUSS_CHARGE = math.sqrt(2 * math.pi) / 16  # int_0^inf s^2 exp(-2 s^2) ds


def gaussian_charge(r):
    """int_0^r s^2 exp(-2 s^2) ds in closed form."""
    return GAUSS_CHARGE * erf(math.sqrt(2) * r) - r * np.exp(-2 * r * r) / 4


# ---------------------------------------------------------------- flux

def test_flux_zero(grid):
    assert not np.any(flux_function(RadialField.zeros(grid)).values)


def test_flux_piecewise_closed_form():
    g = make_uniform_grid(30.0, 3840)  # h = 1/128, so 0.5 and 1 are nodes
    f = flux_function(piecewise_charge(g)).values
    k = int(round(0.5 / g.h))
    assert g.nodes[k] == 0.5
    assert abs(f[k] + 0.5) < 1e-10
    # the jump at r=1 costs O(h) beyond it
    k2 = int(round(2.0 / g.h))
    assert abs(f[k2] + 0.25) < 2 * g.h


def test_flux_gaussian_far_field(grid, gaussian_u):
    f = flux_function(gaussian_u).values
    q20 = np.interp(20.0, grid.nodes, grid.nodes**2 * f)
    assert abs(q20 + GAUSS_CHARGE) < 1e-6


def test_flux_gaussian_profile(grid, gaussian_u):
    f = flux_function(gaussian_u).values
    r = grid.nodes[1:]
    # compare the running charge r^2 f itself; f divides its error by r^2
    assert np.max(np.abs(r**2 * f[1:] + gaussian_charge(r))) < 1e-10


@settings(max_examples=25, deadline=None)
@given(
    amps=st.lists(st.floats(0.0, 5.0), min_size=1, max_size=3),
    centers=st.lists(st.floats(0.0, 6.0), min_size=3, max_size=3),
)
def test_flux_sign_and_monotone_charge(amps, centers):
    g = make_uniform_grid(15.0, 256)
    r = g.nodes
    u = RadialField(g, sum(a * np.exp(-((r - c) ** 2)) for a, c in zip(amps, centers)))
    f = flux_function(u).values
    assert f[0] == 0.0 and np.all(f <= 0.0)
    assert np.all(np.diff(r**2 * f) <= 1e-12 * max(1.0, np.abs(r**2 * f).max()))


# ---------------------------------------------------------------- solve_field

def test_zero_density_field(grid):
    sol = solve_field(RadialField.zeros(grid))
    assert not np.any(sol.phi.values)
    assert sol.bi_energy == 0.0 and sol.interaction == 0.0 and sol.charge == 0.0


def test_piecewise_slope():
    g = make_uniform_grid(30.0, 3840)
    sol = solve_field(piecewise_charge(g))
    k = int(round(0.5 / g.h))
    assert abs(sol.dphi.values[k] + 0.5 / math.sqrt(1.25)) < 1e-10


def test_field_postconditions(field_corpus):
    for name, u in field_corpus.items():
        sol = solve_field(u)
        phi = sol.phi.values
        assert np.all(phi >= 0), name
        assert np.all(np.diff(phi) <= 0), name
        assert sol.sup_slope < 1.0
        assert phi[-1] == sol.charge / u.grid.r_max
        f = sol.f.values
        assert np.allclose(sol.dphi.values, f / np.sqrt(1 + f * f), rtol=0, atol=1e-15)
        assert sol.interaction - sol.bi_energy >= -1e-10
        assert abs(sol.flux_energy - sol.interaction) / sol.interaction < 1e-3


def test_flux_identity_to_rounding(field_corpus):
    # the adjoint reconstruction makes the discrete identity exact
    for u in field_corpus.values():
        sol = solve_field(u)
        assert abs(sol.flux_energy - sol.interaction) < 1e-12 * sol.interaction


def test_potential_against_closed_form(grid, gaussian_u):
    # phi(r) = int_r^inf h(Q(s)/s^2) ds with h(x) = x/sqrt(1+x^2), Q from erf
    def slope(s):
        x = gaussian_charge(s) / s**2
        return x / math.sqrt(1 + x * x)

    sol = solve_field(gaussian_u)
    for r in (0.5, 1.0, 2.0, 5.0):
        exact = quad(slope, r, 30.0, epsabs=0, epsrel=1e-12, limit=200)[0] + GAUSS_CHARGE / 30.0
        k = int(np.argmin(np.abs(grid.nodes - r)))
        got = sol.phi.values[k] + (r - grid.nodes[k]) * sol.dphi.values[k]
        assert abs(got - exact) < 1e-6


def test_bi_energy_against_closed_form(gaussian_u):
    def dens(s):
        x = gaussian_charge(s) / s**2
        return (1 - 1 / math.sqrt(1 + x * x)) * s * s

    interior = 4 * math.pi * quad(dens, 0, 30.0, epsabs=0, epsrel=1e-12, limit=200)[0]
    exterior = 2 * math.pi * GAUSS_CHARGE**2 / 30.0
    sol = solve_field(gaussian_u)
    assert abs(sol.bi_energy - (interior + exterior)) / sol.bi_energy < 1e-6


def test_monotone_in_charge(field_corpus):
    for u in field_corpus.values():
        small, big = solve_field(u), solve_field(2 * u)
        assert np.all(big.phi.values >= small.phi.values)


def test_continuity(gaussian_u):
    base = solve_field(gaussian_u).phi.values
    pert = RadialField.from_function(gaussian_u.grid, lambda r: np.exp(-((r - 1.5) ** 2)))
    diffs = [np.max(np.abs(solve_field(gaussian_u + eps * pert).phi.values - base)) for eps in (1e-1, 1e-2, 1e-3)]
    assert diffs[0] > diffs[1] > diffs[2]
    for a, b in zip(diffs, diffs[1:]):
        assert 7 < a / b < 13


def test_weak_born_infeld_order():
    prev = None
    for n in (1024, 2048, 4096):
        g = make_uniform_grid(30.0, n)
        u = RadialField.from_function(g, lambda r: np.exp(-r**2))
        res = weak_residuals(u, ModelParams(n=n), [bump(g, 1.5, 1.0)])[0].born_infeld
        if prev is not None:
            assert math.log2(prev / res) >= 1.8
        prev = res


# ---------------------------------------------------------------- density

def test_bi_density_values():
    assert bi_energy_density(0.0) == 0.0
    assert math.isclose(bi_energy_density(0.6), 0.2, rel_tol=1e-15)
    assert bi_energy_density(-0.6) == bi_energy_density(0.6)
    assert bi_energy_density(1e-9) == pytest.approx(5e-19, rel=1e-12)
    out = bi_energy_density(np.array([0.0, 0.6]))
    assert out.shape == (2,)


@pytest.mark.parametrize("s", [1.0, -1.0, 1.5, math.nan])
def test_bi_density_constraint(s):
    with pytest.raises(ConstraintViolationError):
        bi_energy_density(s)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-0.99, 0.99), b=st.floats(-0.99, 0.99), t=st.floats(0, 1))
def test_bi_density_convex_even(a, b, t):
    lhs = bi_energy_density(t * a + (1 - t) * b)
    assert lhs <= t * bi_energy_density(a) + (1 - t) * bi_energy_density(b) + 1e-15
    assert bi_energy_density(-a) == bi_energy_density(a)


# ---------------------------------------------------------------- oracle

def test_oracle_zero(grid):
    sol = oracle_minimize_field(RadialField.zeros(grid))
    assert not np.any(sol.phi.values)


def test_oracle_gaussian(grid, gaussian_u):
    oracle = oracle_minimize_field(gaussian_u)
    quad_sol = solve_field(gaussian_u)
    assert np.max(np.abs(quad_sol.phi.values - oracle.phi.values)) < 1e-4
    assert oracle.bi_energy - oracle.interaction <= 0.0


def test_oracle_piecewise_coarse(coarse_grid):
    u = piecewise_charge(coarse_grid)
    assert np.max(np.abs(solve_field(u).phi.values - oracle_minimize_field(u).phi.values)) < 1e-3


def test_oracle_corpus(field_corpus):
    for name, u in field_corpus.items():
        a, b = solve_field(u), oracle_minimize_field(u)
        assert np.max(np.abs(a.phi.values - b.phi.values)) / np.max(a.phi.values) < 1e-3, name


def test_oracle_refinement():
    errs = []
    for n in (512, 1024, 2048):
        u = corpus(make_uniform_grid(30.0, n), ("gaussian",))["gaussian"]
        errs.append(np.max(np.abs(solve_field(u).phi.values - oracle_minimize_field(u).phi.values)))
    assert errs[0] > errs[1] > errs[2]


def test_oracle_failure_carries_state(gaussian_u):
    with pytest.raises(OracleError) as exc:
        oracle_minimize_field(gaussian_u, max_iter=1, gtol=1e-30)
    assert exc.value.last_iterate is not None and exc.value.grad_norm > 0


# ---------------------------------------------------------------- output

def test_field_json(tmp_path, gaussian_u):
    import json

    sol = solve_field(gaussian_u)
    doc = json.loads(write_field_solution(sol, tmp_path).read_text())
    for key in ("charge", "bi_energy", "interaction", "sup_slope"):
        assert isinstance(doc[key], float)
    assert (tmp_path / doc["phi"]).exists()
    inline = json.loads(write_field_solution(sol, tmp_path / "inl", inline=True).read_text())
    assert len(inline["phi"]) == gaussian_u.grid.size
