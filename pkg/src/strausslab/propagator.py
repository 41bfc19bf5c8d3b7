"""Linear wave evolution u = S(t)(f, g) + G F by Fourier multipliers.

``S(t)(f, g) = cos(t|D|) f + sin(t|D|)/|D| g`` and
``G F(t) = int_0^t sin((t-s)|D|)/|D| F(s) ds``.  The Duhamel integral is a
composite trapezoid rule over the stored time nodes, evaluated with running
sums of ``cos(s|xi|) F^(s)`` and ``sin(s|xi|) F^(s)``; the scheme is second
order in the time step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ConfigurationError, GridMismatchError, TruncationError, WrapAroundError
from .grids import PeriodicGrid, RadialGrid, check_same_grid
from .littlewood_paley import DyadicSystem, NormSpec, besov_norms, _Field

__all__ = [
    "SpaceTimeField",
    "CauchyData",
    "time_grid",
    "homogeneous_evolve",
    "duhamel",
    "linear_solution",
    "spacetime_norm",
    "xt_norm",
    "xt_components",
    "energy",
    "support_radius",
    "WavePropagator",
]


def time_grid(T: float = 4.0, n_steps: int = 256) -> np.ndarray:
    if T <= 0 or n_steps < 1:
        raise ConfigurationError("need T > 0 and n_steps >= 1")
    return np.linspace(0.0, T, n_steps + 1)


def _trapezoid_weights(times):
    dt = times[1] - times[0] if times.size > 1 else 0.0
    w = np.full(times.size, dt)
    if times.size > 1:
        w[0] = w[-1] = 0.5 * dt
    else:
        w[0] = 0.0
    return w


def _check_uniform(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ConfigurationError("times must be a non-empty 1-D array")
    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(times[-1])):
            raise ConfigurationError("time grid must be uniform and increasing")
    return times


class SpaceTimeField:
    """Spatial fields u(t_m) on a uniform time grid with trapezoid weights.

    ``values`` has shape ``(M+1, *grid.shape)``; ``velocity`` optionally holds
    the time derivative at the same nodes.
    """

    def __init__(self, grid, times, values, velocity=None, meta=None):
        times = _check_uniform(times)
        values = np.asarray(values)
        if values.shape != (times.size,) + tuple(grid.shape):
            raise GridMismatchError(f"values shape {values.shape} does not match "
                                    f"{times.size} nodes on {grid!r}")
        if velocity is not None and np.shape(velocity) != values.shape:
            raise GridMismatchError("velocity shape differs from values")
        self.grid = grid
        self.times = times
        self.values = values
        self.velocity = None if velocity is None else np.asarray(velocity)
        self.weights = _trapezoid_weights(times)
        self.meta = dict(meta or {})

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __len__(self):
        return self.times.size

    def at(self, m: int) -> _Field:
        from .littlewood_paley import DyadicField, RadialProfile
        cls = DyadicField if isinstance(self.grid, PeriodicGrid) else RadialProfile
        return cls(self.grid, self.values[m])

    def restrict(self, t_max: float) -> "SpaceTimeField":
        """Nodes with t <= t_max (the trapezoid weights are recomputed)."""
        keep = self.times <= t_max + 1e-12 * max(1.0, t_max)
        vel = None if self.velocity is None else self.velocity[keep]
        return SpaceTimeField(self.grid, self.times[keep], self.values[keep], vel, self.meta)

    def _combine(self, other, op):
        if isinstance(other, SpaceTimeField):
            check_same_grid(self, other)
            if other.times.shape != self.times.shape or not np.allclose(other.times, self.times):
                raise GridMismatchError("time grids differ")
            vel = None
            if self.velocity is not None and other.velocity is not None:
                vel = op(self.velocity, other.velocity)
            return SpaceTimeField(self.grid, self.times, op(self.values, other.values), vel)
        vel = None if self.velocity is None else op(self.velocity, other)
        return SpaceTimeField(self.grid, self.times, op(self.values, other), vel)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return self._combine(c, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def zeros_like(self) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.times, np.zeros_like(self.values))


@dataclass
class CauchyData:
    """Initial data (eps f, eps g)."""

    f: _Field
    g: _Field
    eps: float = 1.0

    def __post_init__(self):
        if self.eps < 0:
            raise ConfigurationError("amplitude eps must be non-negative")
        check_same_grid(self.f, self.g)

    @property
    def grid(self):
        return self.f.grid

    @property
    def effective(self):
        return self.f * self.eps, self.g * self.eps

    def scaled(self, eps: float) -> "CauchyData":
        return CauchyData(self.f, self.g, eps)

    @property
    def is_zero(self) -> bool:
        return self.eps == 0 or (not np.any(self.f.values) and not np.any(self.g.values))


# data below this fraction of the peak count as outside the numerical support
SUPPORT_TOL = 1e-8


def support_radius(grid, values, rel_tol: float = SUPPORT_TOL) -> float:
    """Smallest radius outside of which |values| < rel_tol * max|values|."""
    a = np.abs(np.asarray(values))
    if a.ndim > len(grid.shape):
        a = a.reshape((-1,) + tuple(grid.shape)).max(axis=0)
    top = float(a.max())
    if top == 0.0:
        return 0.0
    mask = a >= rel_tol * top
    rad = grid.radius
    return float(np.max(rad[mask]))


def _sin_over_k(t, k):
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(k > 0, np.sin(t * k) / np.where(k > 0, k, 1.0), t)
    return out


def _spectral_leakage(grid, hats, system: Optional[DyadicSystem]):
    system = system or DyadicSystem.for_grid(grid)
    cutoff = min(2.0 ** system.j_max, 0.85 * getattr(grid, "nyquist", grid.k_max))
    k = grid.kmag
    total = float(np.sum(grid.spectral_l2(hats) ** 2))
    if total == 0.0:
        return 0.0
    out = float(np.sum(grid.spectral_l2(np.where(k > cutoff, hats, 0.0)) ** 2))
    return math.sqrt(out / total)


def _cap_check(grid, times, arrays, proxy: bool):
    if not proxy or not isinstance(grid, PeriodicGrid):
        return
    rho = max(support_radius(grid, a) for a in arrays)
    cap = grid.wraparound_time(rho)
    if times[-1] > cap:
        raise WrapAroundError(f"horizon T={times[-1]:.3g} exceeds wrap-around cap "
                              f"L - diam(supp) = {cap:.3g}")


def homogeneous_evolve(data: CauchyData, times, proxy: bool = True,
                       max_leakage: Optional[float] = None,
                       system: Optional[DyadicSystem] = None) -> SpaceTimeField:
    """S(t)(eps f, eps g) at every node, with its time derivative.

    On periodic grids with ``proxy=True`` the horizon is capped at the
    wrap-around time of the data support.  The relative spectral mass beyond
    the top band is stored in ``meta['leakage']``; ``max_leakage`` turns it
    into a TruncationError.
    """
    times = _check_uniform(times)
    grid = data.grid
    f, g = data.effective
    _cap_check(grid, times, (f.values, g.values), proxy)
    fh, gh = f.hat, g.hat
    leak = _spectral_leakage(grid, np.stack([fh, gh]), system)
    if max_leakage is not None and leak > max_leakage:
        raise TruncationError(f"data leak {leak:.2e} beyond the top band", bound=leak)
    k = grid.kmag
    real = not (np.iscomplexobj(f.values) or np.iscomplexobj(g.values))
    shape = (times.size,) + tuple(grid.shape)
    values = np.empty(shape, dtype=float if real else complex)
    velocity = np.empty_like(values)
    for m, t in enumerate(times):
        c, s = np.cos(t * k), _sin_over_k(t, k)
        uh = c * fh + s * gh
        vh = -(k * k) * s * fh + c * gh
        if real:
            values[m], velocity[m] = grid.inverse_real(uh), grid.inverse_real(vh)
        else:
            values[m], velocity[m] = grid.inverse(uh), grid.inverse(vh)
    return SpaceTimeField(grid, times, values, velocity, meta={"leakage": leak})


def duhamel(F: SpaceTimeField) -> SpaceTimeField:
    """G F at every node by the composite trapezoid rule over stored nodes."""
    times, grid = F.times, F.grid
    if times.size > 1:
        _check_uniform(times)
    k = grid.kmag
    kpos = k > 0
    ksafe = np.where(kpos, k, 1.0)
    real = not np.iscomplexobj(F.values)
    values = np.zeros(F.values.shape, dtype=float if real else complex)
    velocity = np.zeros_like(values)
    w = F.dt
    C = np.zeros(grid.spectral_shape, dtype=complex)
    S = np.zeros_like(C)
    A = np.zeros_like(C)  # zero-mode running sums
    B = np.zeros_like(C)
    Fh_prev = None
    for m, t in enumerate(times):
        Fh = grid.forward(F.values[m])
        if m > 0:
            s_i = times[m - 1]
            wi = 0.5 * w if m == 1 else w
            C += wi * np.cos(s_i * k) * Fh_prev
            S += wi * np.sin(s_i * k) * Fh_prev
            A += wi * Fh_prev
            B += wi * s_i * Fh_prev
        ct, st = np.cos(t * k), np.sin(t * k)
        gh = np.where(kpos, (st * C - ct * S) / ksafe, t * A - B)
        vh = np.where(kpos, ct * C + st * S, A)
        if m > 0:
            # the endpoint s = t drops out of the values (sin 0 = 0) but
            # carries weight w/2 in the velocity (cos 0 = 1)
            vh = vh + 0.5 * w * Fh
        Fh_prev = Fh
        if real:
            values[m], velocity[m] = grid.inverse_real(gh), grid.inverse_real(vh)
        else:
            values[m], velocity[m] = grid.inverse(gh), grid.inverse(vh)
    return SpaceTimeField(grid, times, values, velocity)


def linear_solution(data: CauchyData, F: Optional[SpaceTimeField], times=None,
                    proxy: bool = True) -> SpaceTimeField:
    """u = S(t)(eps f, eps g) + G F."""
    times = F.times if F is not None else times
    u = homogeneous_evolve(data, times, proxy=proxy)
    return u if F is None else u + duhamel(F)


def _spatial_norms(u: SpaceTimeField, spec: NormSpec, system=None, mask=None):
    vals = u.values if mask is None else u.values * mask
    return besov_norms(vals, u.grid, spec, system)


def _time_norm(node_norms, weights, q):
    q = float(q)
    if q < 1:
        raise ConfigurationError("time exponent q must be >= 1")
    if math.isinf(q):
        return float(np.max(node_norms))
    return float(np.sum(weights * node_norms ** q) ** (1.0 / q))


def spacetime_norm(u: SpaceTimeField, q: float, spec: NormSpec,
                   system: Optional[DyadicSystem] = None) -> float:
    """(sum_m w_m ||u(t_m)||^q_{B^s_r})^{1/q}; max over nodes for q = inf."""
    return _time_norm(_spatial_norms(u, spec, system), u.weights, q)


def lebesgue_spacetime_norm(u: SpaceTimeField, q: float, r: float, mask=None) -> float:
    """Plain L^q_t L^r_x norm, optionally restricted by a 0/1 (or smooth) mask."""
    vals = u.values if mask is None else u.values * mask
    return _time_norm(u.grid.lp_norm(vals, float(r)), u.weights, q)


def _inv(x):
    x = float(x)
    return math.inf if x == 0 else 1.0 / x


def xt_components(u: SpaceTimeField, profile, system=None):
    """(||u||_{L^q B^0_r}, ||u||_{L^{q0} B^{s_c-s_0}_{r0}})."""
    first = spacetime_norm(u, _inv(profile.inv_q), NormSpec(_inv(profile.inv_r), 0.0), system)
    second = spacetime_norm(u, _inv(profile.inv_q0),
                            NormSpec(_inv(profile.inv_r0), float(profile.s_gap)), system)
    return first, second


def xt_norm(u: SpaceTimeField, profile, system=None) -> float:
    """Intersection norm of X_T: the larger of its two constituents."""
    return max(xt_components(u, profile, system))


def energy(u: SpaceTimeField) -> np.ndarray:
    """(||u(t)||_{H^1}^2 + ||u_t(t)||_{L^2}^2)^{1/2} at every node."""
    if u.velocity is None:
        raise ConfigurationError("energy needs the stored time derivative")
    grid = u.grid
    k = grid.kmag
    uh = grid.forward(u.values)
    vh = grid.forward(u.velocity)
    if isinstance(grid, PeriodicGrid):
        # mean of u_t belongs to the quotiented zero mode
        vh = np.where(k > 0, vh, 0.0)
    return np.sqrt(grid.spectral_l2(k * uh) ** 2 + grid.spectral_l2(vh) ** 2)


class WavePropagator(BaseEstimator):
    """Estimator-style facade: ``fit`` stores Cauchy data, ``transform``
    returns S(t)(f, g) + G F on the configured time grid."""

    def __init__(self, T: float = 4.0, n_steps: int = 256, proxy: bool = True):
        self.T = T
        self.n_steps = n_steps
        self.proxy = proxy

    def fit(self, data: CauchyData, y=None):
        if not isinstance(data, CauchyData):
            raise TypeError("WavePropagator.fit expects CauchyData")
        self.times_ = time_grid(self.T, self.n_steps)
        self.data_ = data
        self.homogeneous_ = homogeneous_evolve(data, self.times_, proxy=self.proxy)
        return self

    def transform(self, F: Optional[SpaceTimeField] = None) -> SpaceTimeField:
        if not hasattr(self, "homogeneous_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit first")
        if F is None:
            return self.homogeneous_
        return self.homogeneous_ + duhamel(F)
