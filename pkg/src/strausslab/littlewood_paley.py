"""Homogeneous Littlewood-Paley blocks and Besov norms on discrete fields.

The dyadic multipliers are built from a C-infinity bump ``phi`` equal to 1 on
|xi| <= 1/2 and 0 on |xi| >= 1;  ``psi_0(xi) = phi(xi/2) - phi(xi)`` so that
``sum_j psi_j = 1`` on every annulus ``2^{j_min} <= |xi| <= 2^{j_max}``
(partition of unity, not of its squares).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigurationError, DomainError, GridMismatchError, TruncationError
from .grids import PeriodicGrid, RadialGrid, check_same_grid

__all__ = [
    "smooth_step",
    "DyadicSystem",
    "DyadicField",
    "RadialProfile",
    "NormSpec",
    "BanachRegimeWarning",
    "UndefinedRatio",
    "lp_project",
    "besov_norm",
    "besov_norms",
    "sobolev_norm",
    "sobolev_pair_norm",
    "square_function_ratio",
    "radial_fourier",
    "bernstein_ratio",
    "leibniz_ratio",
    "chain_rule_ratio",
    "LittlewoodPaley",
]


class BanachRegimeWarning(UserWarning):
    """s >= n/p: the homogeneous Besov space is not complete there."""


class UndefinedRatio(float):
    """NaN marker returned when a ratio has a zero denominator."""

    def __new__(cls, reason=""):
        obj = super().__new__(cls, float("nan"))
        obj.reason = reason
        return obj


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    y = 1.0 - x
    b = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    return a / (a + b)


def _phi(k):
    return smooth_step(2.0 * (1.0 - np.abs(k)))


@dataclass(frozen=True)
class DyadicSystem:
    j_min: int = -5
    j_max: int = 5

    def __post_init__(self):
        if self.j_min > self.j_max:
            raise ConfigurationError("j_min must not exceed j_max")

    @property
    def js(self):
        return range(self.j_min, self.j_max + 1)

    @staticmethod
    def psi0(k):
        return _phi(np.asarray(k) / 2.0) - _phi(k)

    def psi(self, j: int, k):
        return self.psi0(np.ldexp(np.asarray(k, dtype=float), -j))

    def psi_on(self, j: int, grid):
        """psi_j sampled on ``grid.kmag``, memoised on the grid (the
        multiplier depends on j only, not on the band range)."""
        cache = grid.__dict__.setdefault("_psi_cache", {})
        if j not in cache:
            arr = self.psi(j, grid.kmag)
            arr.setflags(write=False)
            cache[j] = arr
        return cache[j]

    def partition(self, k):
        # telescoped sum of psi_j over the band range
        k = np.asarray(k, dtype=float)
        return _phi(np.ldexp(k, -self.j_max - 1)) - _phi(np.ldexp(k, -self.j_min))

    def check_j(self, j: int):
        if not self.j_min <= j <= self.j_max:
            raise TruncationError(f"block j={j} outside [{self.j_min}, {self.j_max}]")

    @classmethod
    def for_grid(cls, grid) -> "DyadicSystem":
        """Default range: j_min = -5 and j_max = log2(N/4) (periodic) or
        ceil(log2(rho_max)) (radial)."""
        if isinstance(grid, PeriodicGrid):
            return cls(-5, max(int(math.ceil(math.log2(grid.N / 4))), -4))
        return cls(-5, int(math.ceil(math.log2(grid.rho_max))))


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

class _Field:
    """Samples on a grid with a cached transform and write-once block cache."""

    def __init__(self, grid, values):
        values = np.asarray(values)
        if values.shape != tuple(grid.shape):
            raise GridMismatchError(f"values of shape {values.shape} do not match grid {grid!r}")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self._hat = None
        self._blocks = {}

    @property
    def dim(self):
        return self.grid.dim

    @property
    def hat(self):
        if self._hat is None:
            self._hat = self.grid.forward(self.values)
            self._hat.setflags(write=False)
        return self._hat

    def block(self, j: int, system: DyadicSystem):
        key = (j, system)
        if key not in self._blocks:
            system.check_j(j)
            out = self.grid.inverse(self.hat * system.psi_on(j, self.grid))
            if not np.iscomplexobj(self.values):
                out = out.real
            out.setflags(write=False)
            self._blocks[key] = out
        return self._blocks[key]

    def lp_norm(self, p):
        return float(self.grid.lp_norm(self.values, p))

    def with_values(self, values):
        return type(self)(self.grid, values)

    def __add__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, _Field):
            check_same_grid(self, other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def __pow__(self, p):
        return self.with_values(self.values ** p)


class DyadicField(_Field):
    """Field on a periodic box of half-width L with N points per axis."""

    def __init__(self, grid: PeriodicGrid, values):
        if not isinstance(grid, PeriodicGrid):
            raise TypeError("DyadicField needs a PeriodicGrid")
        super().__init__(grid, values)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func):
        return cls(grid, func(*grid.coords))

    @property
    def d(self):
        return self.grid.d

    @property
    def N(self):
        return self.grid.N

    @property
    def L(self):
        return self.grid.L

    def reconstruct(self, system: Optional[DyadicSystem] = None):
        system = system or DyadicSystem.for_grid(self.grid)
        return sum(self.block(j, system) for j in system.js)


class RadialProfile(_Field):
    """Radial function u(|x|) on R^n, stored by its profile on a RadialGrid."""

    def __init__(self, grid: RadialGrid, values):
        if not isinstance(grid, RadialGrid):
            raise TypeError("RadialProfile needs a RadialGrid")
        super().__init__(grid, values)

    @classmethod
    def from_function(cls, grid: RadialGrid, func):
        return cls(grid, func(grid.r))

    @property
    def n(self):
        return self.grid.n

    @property
    def r(self):
        return self.grid.r

    def reconstruct(self, system: Optional[DyadicSystem] = None):
        system = system or DyadicSystem.for_grid(self.grid)
        return sum(self.block(j, system) for j in system.js)


@dataclass(frozen=True)
class NormSpec:
    """Besov norm parameters; ``fine`` is the outer sequence index (2 or inf)."""

    p_int: float = 2.0
    s: float = 0.0
    fine: float = 2.0

    def __post_init__(self):
        if not (self.p_int >= 1):
            raise DomainError("p_int must be >= 1")
        if self.fine not in (2, 2.0, math.inf):
            raise DomainError("fine index must be 2 or inf")


def _fl(x):
    return float(x) if not isinstance(x, float) else x


def lp_project(u, j: int, system: Optional[DyadicSystem] = None):
    """Littlewood-Paley block P_j u, same kind as ``u``."""
    system = system or DyadicSystem.for_grid(u.grid)
    return u.with_values(u.block(j, system))


def _regime_check(dim, spec):
    p = _fl(spec.p_int)
    if p > 1 and not math.isinf(p) and _fl(spec.s) >= dim / p:
        warnings.warn(f"s={spec.s} >= n/p={dim / p}: outside the Banach regime",
                      BanachRegimeWarning, stacklevel=3)


def besov_norms(values, grid, spec: NormSpec, system: Optional[DyadicSystem] = None,
                hat=None, chunk: int = 0, return_blocks: bool = False):
    """Besov norm of each field in a batch ``values[..., *grid.shape]``.

    Returns an array over the leading batch axes.  With ``return_blocks`` the
    per-block Lebesgue norms ``||P_j u||_{L^p}`` (last axis = j) are returned
    as well.
    """
    system = system or DyadicSystem.for_grid(grid)
    values = np.asarray(values)
    batch = values.shape[: values.ndim - len(grid.shape)]
    flat = values.reshape((-1,) + tuple(grid.shape))
    if hat is not None:
        flat_hat = np.asarray(hat).reshape((-1,) + tuple(grid.spectral_shape))
    cells = int(np.prod(grid.shape))
    if chunk <= 0:
        chunk = max(1, int(4_000_000 // max(cells, 1)))
    p = _fl(spec.p_int)
    s = _fl(spec.s)
    js = list(system.js)
    psis = [system.psi_on(j, grid) for j in js]
    real = not np.iscomplexobj(values)
    block_norms = np.empty((flat.shape[0], len(js)))
    for start in range(0, flat.shape[0], chunk):
        sl = slice(start, start + chunk)
        h = flat_hat[sl] if hat is not None else grid.forward(flat[sl])
        for idx, psi in enumerate(psis):
            if not np.any(psi):
                block_norms[sl, idx] = 0.0
                continue
            if p == 2.0:
                block_norms[sl, idx] = grid.spectral_l2(h * psi)
            else:
                b = grid.inverse_real(h * psi) if real else grid.inverse(h * psi)
                block_norms[sl, idx] = grid.lp_norm(b, p)
    weights = 2.0 ** (s * np.asarray(js, dtype=float))
    weighted = block_norms * weights
    if math.isinf(_fl(spec.fine)):
        norms = weighted.max(axis=-1)
    else:
        norms = np.sqrt(np.sum(weighted ** 2, axis=-1))
    norms = norms.reshape(batch)
    if return_blocks:
        return norms, block_norms.reshape(batch + (len(js),))
    return norms


def besov_norm(u, spec: NormSpec, system: Optional[DyadicSystem] = None) -> float:
    """||u||_{B^s_{p,fine}} = || 2^{js} ||P_j u||_{L^p} ||_{l^fine(j)}."""
    _regime_check(u.dim, spec)
    return float(besov_norms(u.values, u.grid, spec, system, hat=u.hat))


def sobolev_norm(u, s: float) -> float:
    """Homogeneous Sobolev norm ||u||_{H^s} by the exact multiplier |xi|^s
    (zero mode removed)."""
    k = u.grid.kmag
    with np.errstate(divide="ignore"):
        mult = np.where(k > 0, k ** _fl(s), 0.0)
    return float(u.grid.spectral_l2(u.hat * mult))


def square_function_ratio(u, s: float = 0.0, system: Optional[DyadicSystem] = None) -> float:
    """||u||_{B^s_2} / ||u||_{H^s}; the l^2 square-function constant of psi on u."""
    den = sobolev_norm(u, s)
    if den == 0:
        return UndefinedRatio("zero Sobolev norm")
    return besov_norm(u, NormSpec(2.0, s), system) / den


def sobolev_pair_norm(f, g, s: float) -> float:
    """||(f, g)||_s = ||f||_{H^s} + ||g||_{H^{s-1}}."""
    if not f.grid.same_as(g.grid):
        raise GridMismatchError("f and g live on different grids")
    return sobolev_norm(f, s) + sobolev_norm(g, _fl(s) - 1.0)


def radial_fourier(u: RadialProfile, tol: float = 1e-12) -> RadialProfile:
    """n-dimensional Fourier transform of a radial function, returned as a
    profile on the dual grid (r <-> rho)."""
    u.grid.check_decay(u.values, tol)
    return RadialProfile(u.grid.dual(), u.hat)


def bernstein_ratio(u, j: int, p_low: float, p_high: float,
                    system: Optional[DyadicSystem] = None) -> float:
    """||P_j u||_{p_high} / (2^{j n (1/p_low - 1/p_high)} ||P_j u||_{p_low})."""
    p_low, p_high = _fl(p_low), _fl(p_high)
    if p_low > p_high:
        raise DomainError("bernstein_ratio needs p_low <= p_high")
    if p_low == p_high:
        return 1.0
    system = system or DyadicSystem.for_grid(u.grid)
    b = u.block(j, system)
    den = float(u.grid.lp_norm(b, p_low))
    if den == 0.0:
        return UndefinedRatio("P_j u vanishes")
    gap = 1.0 / p_low - (0.0 if math.isinf(p_high) else 1.0 / p_high)
    return float(u.grid.lp_norm(b, p_high)) / (2.0 ** (j * u.dim * gap) * den)


def leibniz_ratio(u, v, spec: NormSpec, system: Optional[DyadicSystem] = None) -> float:
    """||uv||_{B^s_p} / ((||v||_inf + ||v||_{B^{n/p}_{p,inf}}) ||u||_{B^s_p})."""
    check_same_grid(u, v)
    p, s = _fl(spec.p_int), _fl(spec.s)
    if not (0 < s < u.dim / p):
        raise DomainError(f"leibniz_ratio needs 0 < s < n/p, got s={s}, p={p}")
    with warnings.catch_warnings():
        # s = n/p is the intended (non-Banach) endpoint here
        warnings.simplefilter("ignore", BanachRegimeWarning)
        v_crit = besov_norm(v, NormSpec(p, u.dim / p, fine=math.inf), system)
    den = (v.lp_norm(math.inf) + v_crit) * besov_norm(u, spec, system)
    if den == 0.0:
        return UndefinedRatio("zero denominator")
    return besov_norm(u * v, spec, system) / den


def _as_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    return Fraction(x).limit_denominator(10 ** 9)


def chain_rule_ratio(u, p, s, r, m, l, profile=None,
                     system: Optional[DyadicSystem] = None) -> float:
    """||(|u|^p)||_{B^s_r} / (||u||_{B^0_m}^{p-1} ||u||_{B^s_l}).

    The index relation 1/r = (p-1)/m + 1/l is checked in exact arithmetic
    (rational inputs) before any numerics.  When ``profile`` is given, the
    requirement 0 < s_c - s_0 < p is asserted as well.
    """
    pe, se, re, me, le = map(_as_exact, (p, s, r, m, l))
    if not pe > 1:
        raise ConfigurationError("chain rule needs p > 1")
    if not 0 < se < pe:
        raise ConfigurationError(f"chain rule needs 0 < s < p, got s={se}, p={pe}")
    if not (1 < re <= 2 <= le and me >= 2):
        raise ConfigurationError("chain rule needs 1 < r <= 2 <= l, m < inf")
    if 1 / re != (pe - 1) / me + 1 / le:
        raise ConfigurationError(f"index relation 1/r = (p-1)/m + 1/l fails: "
                                 f"{1 / re} != {(pe - 1) / me + 1 / le}")
    if profile is not None:
        gap = profile.s_gap
        if not 0 < gap < profile.p:
            raise ConfigurationError("s_c - s_0 must lie in (0, p)")
        if pe != profile.p or se != gap:
            raise ConfigurationError("p and s must match the profile")
    pf, sf = float(pe), float(se)
    den = (besov_norm(u, NormSpec(float(me), 0.0), system) ** (pf - 1.0)
           * besov_norm(u, NormSpec(float(le), sf), system))
    if den == 0.0:
        return UndefinedRatio("zero denominator")
    w = u.with_values(np.abs(u.values) ** pf)
    return besov_norm(w, NormSpec(float(re), sf), system) / den


# ---------------------------------------------------------------------------
# estimator facade
# ---------------------------------------------------------------------------

class LittlewoodPaley(TransformerMixin, BaseEstimator):
    """Dyadic block decomposition as a transformer.

    ``fit`` records the grid of a sample field; ``transform`` maps a field to
    the stacked blocks ``[P_{j_min} u, ..., P_{j_max} u]``;
    ``inverse_transform`` sums the blocks back.
    """

    def __init__(self, j_min=None, j_max=None):
        self.j_min = j_min
        self.j_max = j_max

    def fit(self, X, y=None):
        grid = getattr(X, "grid", None)
        if grid is None:
            raise TypeError("LittlewoodPaley.fit expects a DyadicField or RadialProfile")
        default = DyadicSystem.for_grid(grid)
        self.system_ = DyadicSystem(default.j_min if self.j_min is None else self.j_min,
                                    default.j_max if self.j_max is None else self.j_max)
        self.grid_ = grid
        self.js_ = np.arange(self.system_.j_min, self.system_.j_max + 1)
        return self

    def _check(self, X):
        if not hasattr(self, "grid_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit before transform")
        check_same_grid(X, self.grid_)

    def transform(self, X):
        self._check(X)
        return np.stack([X.block(int(j), self.system_) for j in self.js_])

    def inverse_transform(self, blocks):
        if not hasattr(self, "grid_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit before inverse_transform")
        return np.sum(blocks, axis=0)

    def leakage(self, X) -> float:
        """Relative L2 mass of the mean-free field not captured by the bands."""
        self._check(X)
        resid = self.grid_.remove_mean(X.values) - self.inverse_transform(self.transform(X))
        base = float(self.grid_.lp_norm(self.grid_.remove_mean(X.values), 2))
        return float(self.grid_.lp_norm(resid, 2)) / base if base else 0.0
