import json

import numpy as np
import pytest

from sbi_radial import ModelParams, RadialField, find_ground_state, run_all
from sbi_radial.diagnostics import EQUATION_CHECKS, REGISTRY, Check
from sbi_radial.profiles import corpus

P3 = ModelParams(p=3.0)


def test_registry_complete():
    assert len(REGISTRY) == len(set(REGISTRY)) == 8
    # every solution-constraining identity of the field theory has a check
    assert set(EQUATION_CHECKS) == {"energy_ineq", "flux_identity", "pohozaev"}
    assert set(EQUATION_CHECKS) <= set(REGISTRY)


def test_report_names_match_registry(gaussian_u):
    rep = run_all(gaussian_u, P3)
    assert tuple(c.name for c in rep.checks) == REGISTRY


def test_zero_field(grid):
    rep = run_all(RadialField.zeros(grid), P3, critical=True)
    assert rep.all_passed
    assert all(c.passed for c in rep.checks)


def test_gaussian(gaussian_u):
    rep = run_all(gaussian_u, P3)
    for name in ("phi_nonneg", "slope_strict", "energy_ineq", "flux_identity"):
        assert rep[name].passed
    assert not rep["pohozaev"].gated
    # the Gaussian is not a solution, so the identity is far from holding
    assert rep["pohozaev"].lhs > 1.0
    assert rep.all_passed


def test_ground_state_all_pass():
    gs = find_ground_state(P3)
    rep = run_all(gs.u, P3, critical=True)
    assert rep.all_passed and rep["pohozaev"].gated and rep.passed == 8


def test_failures_are_data(grid):
    # a Gaussian marked critical fails the Pohozaev gate without raising
    u = corpus(grid, ("gaussian",))["gaussian"]
    rep = run_all(u, P3, critical=True)
    assert not rep["pohozaev"].passed and rep.failed == 1
    assert "FAIL" in rep.table()


def test_deterministic(gaussian_u):
    a = run_all(gaussian_u, P3).to_json()
    b = run_all(gaussian_u, P3).to_json()
    assert a == b
    c = run_all(gaussian_u, P3, seed=3).to_json()
    doc = json.loads(c)
    assert [d["name"] for d in doc] == list(REGISTRY)
    assert {"name", "passed", "lhs", "rhs", "tolerance"} <= set(doc[0])


def test_check_coerces_numpy():
    c = Check("x", np.bool_(True), np.float64(1), 2, 0)
    assert type(c.passed) is bool and type(c.lhs) is float


def test_table_lists_every_check(gaussian_u):
    text = run_all(gaussian_u, P3).table()
    for name in REGISTRY:
        assert name in text
    assert "reported" in text
