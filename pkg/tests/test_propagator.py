"""Linear wave propagator: eigenmodes, conservation, Duhamel order, norms."""

import math

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from strausslab.corpus import bump
from strausslab.exceptions import ConfigurationError, TruncationError, WrapAroundError
from strausslab.exponents import exponent_profile
from strausslab.grids import PeriodicGrid
from strausslab.littlewood_paley import DyadicField, NormSpec, besov_norm, sobolev_pair_norm
from strausslab.propagator import (CauchyData, SpaceTimeField, WavePropagator, duhamel, energy,
                                   homogeneous_evolve, linear_solution, spacetime_norm,
                                   support_radius, time_grid, xt_components, xt_norm)
from strausslab.suites import manufactured_orders


@pytest.fixture(scope="module")
def torus():
    return PeriodicGrid(2, 32, math.pi)  # integer wave vectors


def zeros(grid):
    return DyadicField(grid, np.zeros(grid.shape))


def test_plane_wave_eigenmodes(torus):
    x, y = torus.coords
    k = (3, -2)
    kn = math.hypot(*k)
    mode = np.exp(1j * (k[0] * x + k[1] * y))
    times = time_grid(4.0, 32)
    u = homogeneous_evolve(CauchyData(DyadicField(torus, mode), zeros(torus)), times, proxy=False)
    exact = np.cos(times * kn)[:, None, None] * mode
    assert np.max(np.abs(u.values - exact)) <= 1e-12
    v = homogeneous_evolve(CauchyData(zeros(torus), DyadicField(torus, mode)), times, proxy=False)
    exact = (np.sin(times * kn) / kn)[:, None, None] * mode
    assert np.max(np.abs(v.values - exact)) <= 1e-12


def test_zero_frequency_rule(torus):
    one = DyadicField(torus, np.ones(torus.shape))
    times = time_grid(2.0, 8)
    u = homogeneous_evolve(CauchyData(one * 0.5, one * 3.0), times, proxy=False)
    assert np.allclose(u.values, (0.5 + 3.0 * times)[:, None, None], atol=1e-12)


def test_energy_conservation_and_time_reversal():
    grid = PeriodicGrid(2, 128, 16.0)
    x, y = grid.coords
    f = DyadicField(grid, np.exp(-(x ** 2 + y ** 2)) * np.cos(x))
    g = DyadicField(grid, np.exp(-((x - 1) ** 2 + y ** 2)))
    times = time_grid(4.0, 64)
    u = homogeneous_evolve(CauchyData(f, g), times, proxy=False)
    E = energy(u)
    assert np.max(np.abs(E / E[0] - 1.0)) <= 1e-10
    back = homogeneous_evolve(CauchyData(f, -g), -times[::-1], proxy=False)
    assert np.max(np.abs(back.values[::-1] - u.values)) <= 1e-10


def test_finite_speed_linear():
    grid = PeriodicGrid(2, 256, 16.0)
    rho = 2.0
    f = DyadicField(grid, bump(grid.radius / rho))
    g = DyadicField(grid, 0.5 * bump(grid.radius / rho))
    times = time_grid(4.0, 8)
    u = homogeneous_evolve(CauchyData(f, g), times)
    for m, t in enumerate(times):
        # L2 mass (integral of |u|^2) beyond the cone plus two cells
        outside = grid.radius > rho + t + 2 * grid.dx
        total = grid.lp_norm(u.values[m], 2.0) ** 2
        assert grid.lp_norm(u.values[m] * outside, 2.0) ** 2 < 1e-6 * total


def test_wraparound_cap_and_leakage():
    grid = PeriodicGrid(2, 64, 8.0)
    f = DyadicField(grid, bump(grid.radius / 3.0))
    with pytest.raises(WrapAroundError):
        homogeneous_evolve(CauchyData(f, zeros(grid)), time_grid(4.0, 8))
    assert support_radius(grid, f.values) <= 3.0
    rough = DyadicField(grid, (grid.radius < 1.0).astype(float))
    with pytest.raises(TruncationError):
        homogeneous_evolve(CauchyData(rough, zeros(grid)), time_grid(1.0, 4), proxy=False,
                           max_leakage=1e-8)


def test_cauchy_data_amplitude():
    grid = PeriodicGrid(2, 64, 16.0)
    x, y = grid.coords
    f = DyadicField(grid, np.exp(-(x ** 2 + y ** 2)))
    g = DyadicField(grid, x * np.exp(-(x ** 2 + y ** 2)))
    base = sobolev_pair_norm(f, g, 1.5)
    for eps in (0.0, 0.3, 7.0):
        ef, eg = CauchyData(f, g, eps).effective
        assert abs(sobolev_pair_norm(ef, eg, 1.5) - eps * base) <= 1e-12 * max(base, 1.0)
    with pytest.raises(ConfigurationError):
        CauchyData(f, g, -1.0)


# -- Duhamel -----------------------------------------------------------------

def test_duhamel_zero_and_initial_values(torus):
    times = time_grid(2.0, 16)
    F = SpaceTimeField(torus, times, np.zeros((17,) + torus.shape))
    assert np.max(np.abs(duhamel(F).values)) == 0.0
    x, y = torus.coords
    F = SpaceTimeField(torus, times, np.broadcast_to(np.cos(x), (17,) + torus.shape))
    GF = duhamel(F)
    assert np.max(np.abs(GF.values[0])) == 0.0 and np.max(np.abs(GF.velocity[0])) == 0.0


def test_duhamel_constant_forcing_order(torus):
    x, y = torus.coords
    k = (2, 1)
    kn2 = k[0] ** 2 + k[1] ** 2
    mode = np.exp(1j * (k[0] * x + k[1] * y))
    errs = []
    for steps in (16, 32, 64):
        times = time_grid(3.0, steps)
        F = SpaceTimeField(torus, times, np.broadcast_to(mode, (steps + 1,) + torus.shape))
        exact = ((1 - np.cos(times * math.sqrt(kn2))) / kn2)[:, None, None] * mode
        errs.append(float(np.max(np.abs(duhamel(F).values - exact))))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_duhamel_velocity_order(torus):
    x, y = torus.coords
    mode = np.cos(2 * x + y)
    kn = math.sqrt(5.0)
    errs = []
    for steps in (16, 32, 64):
        times = time_grid(3.0, steps)
        F = SpaceTimeField(torus, times, np.broadcast_to(mode, (steps + 1,) + torus.shape))
        exact = (np.sin(times * kn) / kn)[:, None, None] * mode
        errs.append(float(np.max(np.abs(duhamel(F).velocity - exact))))
    assert min(math.log2(a / b) for a, b in zip(errs, errs[1:])) >= 1.9


@pytest.mark.parametrize("n", [4, 8])
def test_manufactured_solution_order(n):
    errs, orders = manufactured_orders(n=n, T=2.0, steps=(32, 64, 128))
    assert errs[-1] < 1e-3
    assert min(orders) >= 1.9


def test_non_uniform_time_grid_rejected(torus):
    with pytest.raises(ConfigurationError):
        SpaceTimeField(torus, np.array([0.0, 0.1, 0.3]), np.zeros((3,) + torus.shape))


def test_linear_solution_superposition(torus):
    x, y = torus.coords
    times = time_grid(2.0, 16)
    f = DyadicField(torus, np.cos(x + y))
    F = SpaceTimeField(torus, times, np.broadcast_to(np.sin(2 * x), (17,) + torus.shape))
    u = linear_solution(CauchyData(f, zeros(torus)), F, proxy=False)
    ref = homogeneous_evolve(CauchyData(f, zeros(torus)), times, proxy=False).values + duhamel(F).values
    assert np.max(np.abs(u.values - ref)) == 0.0


# -- space-time norms --------------------------------------------------------

@pytest.fixture(scope="module")
def wave():
    grid = PeriodicGrid(2, 128, 16.0)
    x, y = grid.coords
    f = DyadicField(grid, np.exp(-(x ** 2 + y ** 2)))
    return grid, f


def test_spacetime_norm_constant_in_time(wave):
    grid, f = wave
    times = time_grid(2.5, 10)
    u = SpaceTimeField(grid, times, np.broadcast_to(f.values, (11,) + grid.shape))
    spec = NormSpec(4.0, 0.25)
    spatial = besov_norm(f, spec)
    for q in (1.0, 2.0, 5.0):
        assert spacetime_norm(u, q, spec) == pytest.approx(2.5 ** (1 / q) * spatial, rel=1e-10)
    assert spacetime_norm(u, math.inf, spec) == pytest.approx(spatial, rel=1e-14)


def test_spacetime_norm_sup_and_refinement(wave):
    grid, f = wave
    spec = NormSpec(2.0, 0.5)
    coarse = homogeneous_evolve(CauchyData(f, zeros(grid)), time_grid(4.0, 64), proxy=False)
    fine = homogeneous_evolve(CauchyData(f, zeros(grid)), time_grid(4.0, 128), proxy=False)
    nodes = [besov_norm(coarse.at(m), spec) for m in range(len(coarse))]
    assert spacetime_norm(coarse, math.inf, spec) == max(nodes)
    a, b = spacetime_norm(coarse, 2.0, spec), spacetime_norm(fine, 2.0, spec)
    assert abs(a / b - 1.0) < 1e-3


def test_xt_norm_properties():
    prof = exponent_profile(8, "9/5")
    from strausslab.suites import radial_grid
    from strausslab.littlewood_paley import RadialProfile
    grid = radial_grid(8)
    f = RadialProfile(grid, np.exp(-grid.r ** 2))
    u = homogeneous_evolve(CauchyData(f, f * 0.0), time_grid(4.0, 32))
    assert xt_norm(u.zeros_like(), prof) == 0.0
    full = xt_norm(u, prof)
    assert xt_norm(u * 2.0, prof) == pytest.approx(2.0 * full, rel=1e-14)
    assert xt_norm(u.restrict(2.0), prof) <= full
    assert full == max(xt_components(u, prof))


def test_wave_propagator_estimator(wave):
    grid, f = wave
    est = WavePropagator(T=2.0, n_steps=16, proxy=False)
    assert est.get_params() == {"T": 2.0, "n_steps": 16, "proxy": False}
    with pytest.raises(NotFittedError):
        est.transform()
    est.fit(CauchyData(f, zeros(grid)))
    u = est.transform()
    assert len(u) == 17 and u.T == 2.0
    F = u * 0.0
    assert np.max(np.abs(est.transform(F).values - u.values)) == 0.0
    with pytest.raises(TypeError):
        est.fit(f)
