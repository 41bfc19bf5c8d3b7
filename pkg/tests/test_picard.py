"""Picard iteration: nonlinearity gate, thresholds, cones, uniqueness, residuals."""

import math

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from strausslab.cli import _radial_profiles
from strausslab.exceptions import ConfigurationError, DomainError, InequalityFailure, WrapAroundError
from strausslab.exponents import exponent_profile, smoothness_index
from strausslab.fixtures import constants
from strausslab.grids import PeriodicGrid
from strausslab.littlewood_paley import RadialProfile
from strausslab.picard import (LightCone, NonlinearitySpec, PicardSolver, apply_nonlinearity,
                               check_nonlinearity, cone_norm, localization_check, normalize_data,
                               phi_map, picard_iterate, thresholds, uniqueness_check, weak_residual)
from strausslab.propagator import CauchyData, SpaceTimeField, homogeneous_evolve, time_grid, xt_norm
from strausslab.suites import radial_grid


@pytest.fixture(scope="module")
def prof():
    return exponent_profile(8, "9/5")


@pytest.fixture(scope="module")
def unit_data(prof):
    grid = radial_grid(8)
    fr, gr = _radial_profiles(8, "gaussian")
    times = time_grid(4.0, 512)
    raw = CauchyData(RadialProfile(grid, fr(grid.r)), RadialProfile(grid, gr(grid.r)), 1.0)
    return normalize_data(raw, prof, times), times


@pytest.fixture(scope="module")
def guaranteed_run(prof, unit_data):
    data, times = unit_data
    C, C1 = constants()
    eps = 0.5 * min(thresholds(C, C1, float(prof.p)))
    data = data.scaled(eps)
    spec = NonlinearitySpec.power(prof.p)
    u, rep = picard_iterate(data, spec, prof, times, C=C, C1=C1)
    return data, spec, u, rep


# -- nonlinearity --------------------------------------------------------------

def test_power_nonlinearity_passes(prof):
    assert smoothness_index(8, "9/5") == 0
    v = check_nonlinearity(NonlinearitySpec.power(prof.p), prof)
    assert v.passed and v.order == 0
    # |u|^p vanishes at zero like h^p
    assert all(abs(a - 1.8) < 1e-6 for a in v.vanishing_exponents)
    assert v.worst_ratio <= 1.8


def test_generalized_nonlinearities(prof):
    good = NonlinearitySpec("generalized", 1.8, evaluator=lambda z: np.abs(z) ** 1.8 * np.cos(z), order=0)
    assert check_nonlinearity(good, prof).passed
    offset = NonlinearitySpec("generalized", 1.8, evaluator=lambda z: np.cos(z), order=0)
    v = check_nonlinearity(offset, prof)
    assert not v.passed and any("vanish" in m for m in v.failures)
    # rough at scale 1e-3 everywhere: far above the sharp constant p of |z|^p
    rough = NonlinearitySpec("generalized", 1.8, order=0, evaluator=lambda z: np.abs(z) ** 1.8 * (
        1 + 0.05 * np.abs(np.sin(1000.0 * np.asarray(z))) ** 0.5))
    v = check_nonlinearity(rough, prof, constant=1.8)
    assert not v.passed and any("exceeds" in m for m in v.failures)
    with pytest.raises(ConfigurationError):
        check_nonlinearity(NonlinearitySpec("generalized", 1.8, evaluator=np.abs, order=1), prof)
    tight = check_nonlinearity(good, prof, constant=0.1)
    assert not tight.passed


def test_nonlinearity_spec_validation():
    with pytest.raises(DomainError):
        NonlinearitySpec.power(1)
    with pytest.raises(DomainError):
        NonlinearitySpec("power", 0.5)
    with pytest.raises(ConfigurationError):
        NonlinearitySpec("cubic", 3.0)
    with pytest.raises(ConfigurationError):
        NonlinearitySpec("generalized", 2.0)


def test_apply_nonlinearity_spot_check():
    grid = PeriodicGrid(1, 64, 4.0)
    times = time_grid(1.0, 4)
    x, = grid.coords
    u = SpaceTimeField(grid, times, np.broadcast_to(np.sin(x), (5, 64)))
    F = apply_nonlinearity(u, NonlinearitySpec.power(2.5))
    assert np.allclose(F.values, np.abs(np.sin(x)) ** 2.5)
    assert 0 < F.meta["lipschitz_c"] <= 2.5


# -- thresholds ----------------------------------------------------------------

def test_thresholds_solve_defining_equations():
    C, C1 = constants()
    for p in (1.5, 1.8, 3.0):
        eps0, eps1 = thresholds(C, C1, p)
        assert C * (2 * eps0) ** p == pytest.approx(eps0, rel=1e-12)
        assert 2 * C1 ** 3 * (2 * eps1) ** (p - 1) == pytest.approx(0.5, rel=1e-12)
    eps0, eps1 = thresholds(C, C1, 1.8)
    assert eps0 == pytest.approx(1.80, abs=5e-3) and eps1 == pytest.approx(0.0372, abs=5e-5)
    with pytest.raises(DomainError):
        thresholds(0.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        thresholds(1.0, 1.0, 1.0)


def test_normalize_data(prof, unit_data):
    data, times = unit_data
    assert xt_norm(homogeneous_evolve(data, times), prof) == pytest.approx(1.0, rel=1e-12)
    assert data.eps == 1.0


# -- iteration -----------------------------------------------------------------

def test_guaranteed_run_converges(guaranteed_run):
    data, _, _, rep = guaranteed_run
    assert rep.mode == "guaranteed" and rep.verdict == "converged"
    assert max(rep.xt_norms) <= 2 * data.eps
    assert max(rep.contraction_factors) <= 0.6
    assert rep.weak_residual <= 1e-4
    assert rep.constant_violations == 0
    assert rep.eps0 > rep.eps1 > data.eps


def test_phi_map_records_bound(prof, guaranteed_run):
    data, spec, u, _ = guaranteed_run
    C, _ = constants()
    out = phi_map(u, data, spec, prof, C=C)
    assert out.meta["constant_violation"] is False
    assert out.meta["phi_norm"] <= out.meta["phi_bound"]
    with pytest.raises(ConfigurationError):
        phi_map(u, CauchyData(*(RadialProfile(radial_grid(6), np.zeros(radial_grid(6).r.shape)),) * 2),
                spec, prof)


def test_exploratory_mode_without_constants(prof, unit_data):
    data, _ = unit_data
    times = time_grid(4.0, 64)
    u, rep = picard_iterate(data.scaled(0.01), NonlinearitySpec.power(prof.p), prof, times)
    assert rep.mode == "exploratory" and rep.eps0 is None
    assert rep.verdict == "converged"
    zero, rep0 = picard_iterate(data.scaled(0.0), NonlinearitySpec.power(prof.p), prof, times)
    assert rep0.mode == "degenerate" and not np.any(zero.values)


def test_report_json_round_trip(guaranteed_run):
    import json
    rep = guaranteed_run[3]
    doc = json.loads(rep.to_json())
    assert doc["verdict"] == "converged" and doc["iterations"] == rep.iterations


def test_weak_residual_free_wave(unit_data):
    data, times = unit_data
    S = homogeneous_evolve(data, times)
    assert max(weak_residual(S, S.zeros_like(), data)) <= 1e-4
    # a wrong solution is detected
    assert max(weak_residual(S * 1.05, S.zeros_like(), data)) > 1e-3


# -- cones, localisation, uniqueness ------------------------------------------

def test_light_cone_mask_and_cutoff():
    grid = PeriodicGrid(1, 256, 16.0)
    times = time_grid(2.0, 4)
    cone = LightCone(4.0, 2.0)
    mask = cone.mask(grid, times)
    x, = grid.coords
    assert mask[0].sum() == np.sum(np.abs(x) < 4.0)
    assert mask[-1].sum() == np.sum(np.abs(x) < 2.0)
    chi = cone.chi(grid, times)
    assert np.all(chi[mask] == 1.0)
    assert np.all(chi[0][np.abs(x) > 5.0] == 0.0)
    with pytest.raises(DomainError):
        LightCone(0.0, 1.0)
    with pytest.raises(WrapAroundError):
        LightCone(15.5, 1.0).check_box(grid)


def test_cone_norm_requires_r_ge_r0(prof):
    import dataclasses
    from fractions import Fraction
    grid = PeriodicGrid(1, 32, 4.0)
    w = SpaceTimeField(grid, time_grid(1.0, 2), np.ones((3, 32)))
    assert cone_norm(w, LightCone(2.0, 1.0), prof) > 0
    bad = dataclasses.replace(prof, inv_r=prof.inv_r0 + Fraction(1, 10))
    with pytest.raises(InequalityFailure):
        cone_norm(w, LightCone(2.0, 1.0), bad)


def test_localization_high_resolution():
    grid = PeriodicGrid(1, 8192, 32.0)
    x, = grid.coords
    times = time_grid(2.0, 32)
    F = SpaceTimeField(grid, times, np.broadcast_to(np.exp(-x ** 2 / 4), (33, 8192)))
    out = localization_check(F, LightCone(4.0, 2.0))
    assert out["identity"] == 0.0
    assert out["max_difference"] <= 1e-6


def test_uniqueness_identical_and_rejected(prof, guaranteed_run):
    data, spec, u1, _ = guaranteed_run
    C, C1 = constants()
    u2, rep2 = picard_iterate(data, spec, prof, u1.times, C=C, C1=C1, fixed_iters=8)
    assert rep2.iterations == 8 and rep2.verdict == "converged"
    out = uniqueness_check(u1, u2, data, spec, prof, C=C)
    assert out["verdict"] == "identical" and out["max_difference"] <= 1e-6
    assert all(f <= 0.5 for f in out["subinterval_factors"])
    bad = uniqueness_check(u1, u1 * 1.01, data, spec, prof, C=C)
    assert bad["verdict"] == "rejected" and bad["residuals"][1] > 1e-4


# -- estimator facade ----------------------------------------------------------

def test_picard_solver_estimator(unit_data):
    data, _ = unit_data
    est = PicardSolver(n_steps=64, max_iters=10)
    assert est.get_params()["p"] == "9/5" and est.get_params()["C"] is None
    with pytest.raises(NotFittedError):
        est.predict()
    est.fit(data.scaled(0.01))
    u = est.predict()
    assert len(u) == 65 and est.report_.verdict == "converged"
    assert math.isfinite(est.report_.weak_residual)
