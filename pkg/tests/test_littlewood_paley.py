"""Littlewood-Paley blocks, Besov norms and the radial Hankel transform."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special
from sklearn.exceptions import NotFittedError

from strausslab.estimates import cutoff
from strausslab.exceptions import (ConfigurationError, DomainError, GridMismatchError,
                                   TruncationError)
from strausslab.exponents import exponent_profile
from strausslab.grids import PeriodicGrid, RadialGrid
from strausslab.littlewood_paley import (BanachRegimeWarning, DyadicField, DyadicSystem,
                                         LittlewoodPaley, NormSpec, RadialProfile, UndefinedRatio,
                                         bernstein_ratio, besov_norm, chain_rule_ratio,
                                         leibniz_ratio, lp_project, radial_fourier,
                                         sobolev_norm, sobolev_pair_norm)


def oracle_psi0(k):
    """Independent evaluation of the dyadic bump: phi(k/2) - phi(k) with
    phi(k) = step(2(1 - |k|)) and step(x) = e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})."""
    def step(x):
        out = np.zeros_like(x)
        out[x >= 1] = 1.0
        mid = (x > 0) & (x < 1)
        a = np.exp(-1.0 / x[mid])
        b = np.exp(-1.0 / (1.0 - x[mid]))
        out[mid] = a / (a + b)
        return out

    k = np.abs(np.asarray(k, dtype=float))
    return step(2.0 * (1.0 - k / 2.0)) - step(2.0 * (1.0 - k))


@pytest.fixture(scope="module")
def grid2():
    return PeriodicGrid(2, 128, 16.0)


def gaussian2(grid, width=1.0, shift=(0.3, -0.2)):
    x, y = grid.coords
    return DyadicField(grid, np.exp(-((x - shift[0]) ** 2 + (y - shift[1]) ** 2) / width ** 2))


# -- dyadic system -----------------------------------------------------------

def test_partition_of_unity_pointwise():
    system = DyadicSystem(-5, 5)
    k = np.geomspace(2.0 ** -5, 2.0 ** 5, 4001)
    total = sum(system.psi(j, k) for j in system.js)
    assert np.max(np.abs(total - 1.0)) <= 1e-12
    assert np.max(np.abs(system.partition(k) - 1.0)) <= 1e-12


@pytest.mark.parametrize("j", [-3, 0, 2])
def test_psi_scaling_and_support(j):
    system = DyadicSystem(-5, 5)
    k = np.linspace(0, 40, 20001)
    psi = system.psi(j, k)
    assert np.allclose(psi, oracle_psi0(k / 2.0 ** j), atol=1e-15)
    outside = (k < 2.0 ** (j - 1)) | (k > 2.0 ** (j + 1))
    assert np.all(psi[outside] == 0.0)


def test_dyadic_system_validation():
    with pytest.raises(ConfigurationError):
        DyadicSystem(3, 1)


# -- projections -------------------------------------------------------------

def test_single_mode_projection():
    grid = PeriodicGrid(2, 64, math.pi)  # integer wavenumbers
    x, y = grid.coords
    u = DyadicField(grid, np.cos(2 * x + 0 * y))  # |xi| = 2 = 2^1
    system = DyadicSystem.for_grid(grid)
    p1 = lp_project(u, 1, system)
    assert oracle_psi0(1.0) == 1.0
    assert np.max(np.abs(p1.values - u.values)) < 1e-13
    assert np.max(np.abs(lp_project(u, 4, system).values)) < 1e-13
    with pytest.raises(TruncationError):
        lp_project(u, 40, system)


def test_reconstruction_and_roundtrip(grid2):
    u = gaussian2(grid2)
    target = grid2.remove_mean(u.values)
    rec = u.reconstruct()
    assert np.max(np.abs(rec - target)) / np.max(np.abs(target)) <= 1e-10
    back = grid2.inverse(grid2.forward(u.values)).real
    assert np.max(np.abs(back - u.values)) / np.max(np.abs(u.values)) <= 1e-12


def test_block_masses_match_annulus_oracle(grid2):
    u = gaussian2(grid2, width=1.0, shift=(0.0, 0.0))
    system = DyadicSystem.for_grid(grid2)
    kx, ky = np.meshgrid(grid2.k1d, grid2.k1d, indexing="ij")
    kk = np.hypot(kx, ky)
    uh = np.fft.fftn(u.values)
    for j in system.js:
        mass_oracle = np.sum(np.abs(uh * oracle_psi0(kk / 2.0 ** j)) ** 2) * grid2.cell / grid2.N ** 2
        mass = grid2.lp_norm(u.block(j, system), 2.0) ** 2
        assert abs(mass - mass_oracle) <= 1e-8 * max(mass_oracle, 1e-300) + 1e-14


# -- Besov and Sobolev norms -------------------------------------------------

def test_homogeneity_under_dyadic_rescale_d3():
    grid = PeriodicGrid(3, 64, 12.0)
    x, y, z = grid.coords
    r2 = x ** 2 + y ** 2 + z ** 2
    u = DyadicField(grid, np.exp(-r2 / 2.0))
    u2 = DyadicField(grid, np.exp(-4.0 * r2 / 2.0))
    # oracle: direct multiplier |xi| applied with numpy
    kk = np.sqrt(sum(k ** 2 for k in grid.kvec))

    def h1(v):
        return math.sqrt(np.sum(np.abs(kk * np.fft.fftn(v)) ** 2) * grid.cell / grid.N ** 3)

    assert abs(h1(u2.values) / h1(u.values) - 2 ** -0.5) < 1e-3
    assert abs(sobolev_norm(u2, 1.0) / sobolev_norm(u, 1.0) - 2 ** -0.5) < 1e-3
    ratio = besov_norm(u2, NormSpec(2.0, 1.0)) / besov_norm(u, NormSpec(2.0, 1.0))
    assert abs(ratio - 2 ** -0.5) < 1e-3


def test_besov_single_band_is_one_term():
    # psi_1 equals one only at |xi| = 2, so the band function is a pure mode
    grid = PeriodicGrid(1, 64, math.pi)
    x = grid.coords[0]
    u = DyadicField(grid, np.cos(2.0 * x) + 0.5 * np.sin(2.0 * x))
    system = DyadicSystem.for_grid(grid)
    for p in (2.0, 4.0):
        full = besov_norm(u, NormSpec(p, 0.2), system)
        single = 2.0 ** 0.2 * grid.lp_norm(u.block(1, system), p)
        assert abs(full - single) / single <= 1e-8


def test_banach_regime_warning(grid2):
    u = gaussian2(grid2)
    with pytest.warns(BanachRegimeWarning):
        besov_norm(u, NormSpec(2.0, 1.0))  # s = n/p
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        besov_norm(u, NormSpec(2.0, 0.5))


def test_normspec_validation():
    with pytest.raises(DomainError):
        NormSpec(0.5, 0.0)
    with pytest.raises(DomainError):
        NormSpec(2.0, 0.0, fine=3.0)


def test_sobolev_pair_norm(grid2):
    x, y = grid2.coords
    f = DyadicField(grid2, x * np.exp(-(x ** 2 + y ** 2)))
    zero = DyadicField(grid2, np.zeros(grid2.shape))
    assert sobolev_pair_norm(f, zero, 1.3) == pytest.approx(sobolev_norm(f, 1.3), rel=1e-14)
    l2 = grid2.lp_norm(f.values, 2.0)
    assert abs(sobolev_pair_norm(zero, f, 1.0) - l2) <= 1e-8 * l2
    with pytest.raises(GridMismatchError):
        sobolev_pair_norm(f, DyadicField(PeriodicGrid(2, 64, 16.0), np.zeros((64, 64))), 1.0)


band_values = st.lists(st.floats(-2, 2, allow_nan=False), min_size=6, max_size=6)


def _band_field(grid, coeffs):
    x = grid.coords[0]
    env = np.exp(-(x / 4.0) ** 2)
    return DyadicField(grid, env * sum(c * np.cos((i + 1) * 0.7 * x) for i, c in enumerate(coeffs)))


@given(band_values, band_values, st.floats(-3, 3, allow_nan=False),
       st.sampled_from([2.0, 4.0]), st.sampled_from([0.0, 0.2]))
@settings(max_examples=60, deadline=None)
def test_besov_norm_axioms(a, b, lam, p, s):
    grid = PeriodicGrid(1, 128, 24.0)
    u, v = _band_field(grid, a), _band_field(grid, b)
    spec = NormSpec(p, s)
    nu, nv = besov_norm(u, spec), besov_norm(v, spec)
    assert besov_norm(u + v, spec) <= (nu + nv) * (1 + 1e-9) + 1e-12
    assert besov_norm(lam * u, spec) == pytest.approx(abs(lam) * nu, rel=1e-9, abs=1e-12)


# -- radial transform --------------------------------------------------------

@pytest.mark.parametrize("n", [4, 6, 8, 9])
def test_radial_gaussian_self_dual(n):
    grid = RadialGrid(n, R=16.0, rho_max=16.0, panels=20)
    u = RadialProfile(grid, np.exp(-grid.r ** 2 / 2.0))
    uh = radial_fourier(u)
    assert np.max(np.abs(uh.values - np.exp(-uh.r ** 2 / 2.0))) <= 1e-8
    # Plancherel and involution
    assert abs(uh.lp_norm(2.0) / u.lp_norm(2.0) - 1.0) <= 1e-6
    back = radial_fourier(uh)
    assert np.max(np.abs(back.values - u.values)) <= 1e-6


def test_radial_ball_indicator_n4():
    grid = RadialGrid(4, R=4.0, rho_max=24.0, panels=16, breaks=(1.0,))
    u = (grid.r < 1.0).astype(float)
    uh = grid.forward(u)
    for rho in (0.5, 2.0, 5.0, 11.0):
        idx = int(np.argmin(np.abs(grid.rho - rho)))
        rr = grid.rho[idx]
        quad, _ = integrate.quad(lambda r: special.jv(1, rr * r) / (rr * r) * r ** 3, 0.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13)
        assert abs(uh[idx] - quad) <= 1e-5
        assert abs(quad - special.jv(2, rr) / rr ** 2) <= 1e-10


def test_radial_truncation_error():
    grid = RadialGrid(4, R=8.0, rho_max=8.0, panels=10)
    with pytest.raises(TruncationError):
        radial_fourier(RadialProfile(grid, np.exp(-grid.r ** 2 / 50.0)))


# -- ratios ------------------------------------------------------------------

def test_bernstein_scale_covariance_and_edge_cases():
    # extra panels near the origin, where the sup of each block sits
    grid = RadialGrid(4, R=16.0, rho_max=16.0, panels=20, breaks=(0.05, 0.1, 0.2, 0.4))
    f = RadialProfile(grid, np.exp(-grid.r ** 2))
    f2 = RadialProfile(grid, np.exp(-(2.0 * grid.r) ** 2))
    for j in (0, 1):
        a = bernstein_ratio(f, j, 2.0, math.inf)
        b = bernstein_ratio(f2, j + 1, 2.0, math.inf)
        assert abs(a / b - 1.0) <= 1e-3
    assert bernstein_ratio(f, 0, 4.0, 4.0) == 1.0
    with pytest.raises(DomainError):
        bernstein_ratio(f, 0, 4.0, 2.0)
    zero = RadialProfile(grid, np.zeros(grid.shape))
    val = bernstein_ratio(zero, 0, 2.0, math.inf)
    assert isinstance(val, UndefinedRatio) and math.isnan(val)


def test_leibniz_ratio_properties(grid2):
    u = gaussian2(grid2, width=0.8)
    chi = cutoff(grid2, radius=4.0)
    spec = NormSpec(2.0, 0.5)
    r = leibniz_ratio(u, chi, spec)
    assert r <= 1.0
    assert leibniz_ratio(2.0 * u, chi, spec) == pytest.approx(r, rel=1e-12)
    with pytest.raises(DomainError):
        leibniz_ratio(u, chi, NormSpec(2.0, 1.5))


def test_chain_rule_homogeneity_and_checks():
    prof = exponent_profile(8, "9/5")
    grid = RadialGrid(8, R=16.0, rho_max=16.0, panels=20)
    u = RadialProfile(grid, np.exp(-grid.r ** 2 / 2.0))
    args = (prof.p, prof.s_gap, 1 / prof.inv_r1, 1 / prof.inv_r, 1 / prof.inv_r0)
    base = chain_rule_ratio(u, *args, profile=prof)
    assert np.isfinite(base)
    assert chain_rule_ratio(3.0 * u, *args, profile=prof) == pytest.approx(base, rel=1e-10)
    with pytest.raises(ConfigurationError):
        chain_rule_ratio(u, prof.p, prof.s_gap, 2, 4, 4)          # 1/2 != 0.8/4 + 1/4
    with pytest.raises(ConfigurationError):
        chain_rule_ratio(u, 2, "1/2", 2, 4, 4, profile=prof)      # does not match profile


def test_chain_rule_square_against_convolution_oracle():
    grid = PeriodicGrid(1, 256, 32.0)
    x = grid.coords[0]
    u = DyadicField(grid, np.exp(-(x / 4.0) ** 2) * np.cos(2.0 * x))
    ratio = chain_rule_ratio(u, 2, "1/5", 2, 4, 4)
    # oracle: spectrum of u^2 as the circular self-convolution of the spectrum
    uh = np.fft.fft(u.values)
    N = grid.N
    idx = np.arange(N)
    wh = np.array([np.sum(uh * uh[(m - idx) % N]) for m in range(N)]) / N
    w = DyadicField(grid, np.fft.ifft(wh).real)
    num = besov_norm(w, NormSpec(2.0, 0.2))
    den = besov_norm(u, NormSpec(4.0, 0.0)) * besov_norm(u, NormSpec(4.0, 0.2))
    assert abs(ratio - num / den) <= 1e-6 * (num / den)


# -- transformer facade ------------------------------------------------------

def test_littlewood_paley_transformer(grid2):
    u = gaussian2(grid2)
    lp = LittlewoodPaley()
    assert lp.get_params() == {"j_min": None, "j_max": None}
    with pytest.raises(NotFittedError):
        lp.transform(u)
    blocks = lp.fit(u).transform(u)
    assert blocks.shape == (len(lp.js_),) + grid2.shape
    assert lp.leakage(u) <= 1e-10
    narrow = LittlewoodPaley(j_min=0, j_max=1).fit(u)
    assert narrow.leakage(u) > 1e-3
    with pytest.raises(GridMismatchError):
        lp.transform(DyadicField(PeriodicGrid(2, 64, 16.0), np.zeros((64, 64))))
