"""Picard iteration for u_tt - Lap u = F(u) with small data, and its checks.

The iteration is u_{-1} = 0, u_m = Phi(u_{m-1}) with
Phi(u) = S(t)(eps f, eps g) + G(F(u)).  Convergence is measured directly:
differences of consecutive iterates in L^{q0}_t L^{r0}_x restricted to a
backward light cone.  No compactness argument is involved.  The limit is
tested against a registered family of smooth test functions (weak
residual).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import draw_rng
from .exceptions import ConfigurationError, DomainError, InequalityFailure, WrapAroundError
from .exponents import ExponentProfile, _verdict, as_rational, smoothness_index
from .grids import PeriodicGrid
from .littlewood_paley import NormSpec, smooth_step
from .propagator import (CauchyData, SpaceTimeField, duhamel, homogeneous_evolve,
                         lebesgue_spacetime_norm, xt_norm, xt_components)

__all__ = [
    "NonlinearitySpec",
    "apply_nonlinearity",
    "check_nonlinearity",
    "NonlinearityVerdict",
    "thresholds",
    "phi_map",
    "normalize_data",
    "IterationReport",
    "picard_iterate",
    "LightCone",
    "localization_check",
    "uniqueness_check",
    "weak_residual",
    "load_test_bumps",
    "PicardSolver",
]


# ---------------------------------------------------------------------------
# nonlinearity
# ---------------------------------------------------------------------------

@dataclass
class NonlinearitySpec:
    """Power nonlinearity |u|^p, or a user function f with declared order k."""

    kind: str = "power"
    p: float = 2.0
    evaluator: Optional[Callable] = None
    order: Optional[int] = None
    holder_constant: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("power", "generalized"):
            raise ConfigurationError(f"unknown nonlinearity kind {self.kind!r}")
        if not float(self.p) > 1:
            raise DomainError(f"nonlinearity needs p > 1, got {self.p}")
        if self.kind == "generalized" and self.evaluator is None:
            raise ConfigurationError("generalized nonlinearity needs an evaluator")

    @classmethod
    def power(cls, p) -> "NonlinearitySpec":
        return cls("power", float(as_rational(p)) if not isinstance(p, float) else p)

    def __call__(self, z):
        if self.kind == "power":
            return np.abs(z) ** float(self.p)
        return self.evaluator(z)


def _lipschitz_spot_check(values, p, rng, count=512):
    flat = np.ravel(values)
    if flat.size < 2:
        return 0.0
    i = rng.integers(0, flat.size, count)
    j = rng.integers(0, flat.size, count)
    a, b = flat[i], flat[j]
    keep = a != b
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0
    num = np.abs(np.abs(a) ** p - np.abs(b) ** p)
    den = (np.abs(a) ** (p - 1) + np.abs(b) ** (p - 1)) * np.abs(a - b)
    return float(np.max(num / den))


def apply_nonlinearity(u: SpaceTimeField, spec: NonlinearitySpec) -> SpaceTimeField:
    """F(u) at every node.  For power kinds the bound
    ||a|^p - |b|^p| <= c (|a|^{p-1} + |b|^{p-1}) |a - b| is spot-checked on
    sampled value pairs; the largest sampled c is in ``meta['lipschitz_c']``
    (it never exceeds p)."""
    vals = spec(u.values)
    meta = {}
    if spec.kind == "power":
        meta["lipschitz_c"] = _lipschitz_spot_check(u.values, float(spec.p), draw_rng(0, 0))
    return SpaceTimeField(u.grid, u.times, vals, meta=meta)


@dataclass
class NonlinearityVerdict:
    passed: bool
    order: int
    worst_ratio: float
    vanishing_exponents: list
    failures: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _derivative(f, z, k, h):
    """k-th central difference of f at z with step h."""
    from math import comb
    offs = np.arange(k + 1) - k / 2.0
    coef = np.array([(-1) ** (k - i) * comb(k, i) for i in range(k + 1)], dtype=float)
    z = np.asarray(z, dtype=float)
    pts = z[..., None] + offs * h[..., None] if np.ndim(h) else z[..., None] + offs * h
    return np.sum(coef * f(pts), axis=-1) / np.asarray(h) ** k


def check_nonlinearity(spec: NonlinearitySpec, profile: ExponentProfile, samples: int = 400,
                       seed: int = 0, constant: Optional[float] = None) -> NonlinearityVerdict:
    """Numerical test of the two conditions on a general nonlinearity f.

    1. f in C^k with f^{(j)}(0) = 0 for j <= k: |f^{(j)}(h)| must decay to 0
       as h -> 0 with a positive measured power of h (both signs of h).
    2. Hoelder condition on f^{(k)} over random pairs: with C = 1 the ratio
       |f^{(k)}(z1) - f^{(k)}(z2)| / RHS is bounded, RHS being
       (|z1|^{p-k-1} + |z2|^{p-k-1}) |z1 - z2| if p >= k + 1 and
       |z1 - z2|^{p-k} otherwise.  Boundedness is judged by comparing the
       worst ratio at separations 1e-1 and 1e-3 (growth by more than 4x
       fails) and against ``constant`` when one is declared.
    """
    k = smoothness_index(profile.n, profile.p)
    if spec.kind == "generalized":
        if spec.order is None or spec.order != k:
            raise ConfigurationError(f"declared order {spec.order} differs from k = [s_c - s_0] = {k}")
    p = float(profile.p)
    f = spec
    failures = []
    exps = []
    hs = np.array([1e-1, 1e-2, 1e-3])
    for j in range(k + 1):
        for sign in (1.0, -1.0):
            z = sign * hs
            steps = hs / (4.0 * max(j, 1))
            vals = np.abs(_derivative(f, z, j, steps)) if j else np.abs(f(z))
            if vals[-1] == 0.0:
                exps.append(math.inf)
                continue
            alpha = math.log(vals[0] / vals[-1]) / math.log(hs[0] / hs[-1]) if vals[0] > 0 else 0.0
            exps.append(alpha)
            if not (alpha > 0.05 and vals[-1] < vals[0]):
                failures.append(f"f^({j}) does not vanish at 0 (measured power {alpha:.3g})")
    rng = draw_rng(seed, 1)
    worst = {}
    for sep in (1e-1, 1e-3):
        z1 = rng.uniform(-2.0, 2.0, samples)
        z1 = np.where(np.abs(z1) < 1e-2, 1e-2, z1)
        z2 = z1 + sep * rng.uniform(-1.0, 1.0, samples)
        keep = (np.sign(z1) == np.sign(z2)) & (np.abs(z2) > 1e-2)
        z1, z2 = z1[keep], z2[keep]
        step1 = np.abs(z1) / (4.0 * max(k, 1)) * 1e-1
        step2 = np.abs(z2) / (4.0 * max(k, 1)) * 1e-1
        d1 = _derivative(f, z1, k, step1) if k else f(z1)
        d2 = _derivative(f, z2, k, step2) if k else f(z2)
        diff = np.abs(d1 - d2)
        if p >= k + 1:
            rhs = (np.abs(z1) ** (p - k - 1) + np.abs(z2) ** (p - k - 1)) * np.abs(z1 - z2)
        else:
            rhs = np.abs(z1 - z2) ** (p - k)
        worst[sep] = float(np.max(diff / rhs))
    worst_ratio = max(worst.values())
    if worst[1e-3] > 4.0 * max(worst[1e-1], 1e-300):
        failures.append("Hoelder ratio grows as |z1 - z2| shrinks")
    if constant is not None and worst_ratio > constant:
        failures.append(f"Hoelder ratio {worst_ratio:.3g} exceeds declared constant {constant}")
    if not math.isfinite(worst_ratio):
        failures.append("non-finite Hoelder ratio")
    return NonlinearityVerdict(not failures, k, worst_ratio, exps, failures)


# ---------------------------------------------------------------------------
# thresholds and the map Phi
# ---------------------------------------------------------------------------

def thresholds(C: float, C1: float, p: float) -> tuple[float, float]:
    """(eps0, eps1) with C (2 eps0)^p = eps0 and 2 C1^3 (2 eps1)^{p-1} = 1/2."""
    if not (C > 0 and C1 > 0):
        raise DomainError("constants must be positive")
    p = float(p)
    if not p > 1:
        raise DomainError("p must exceed 1")
    eps0 = (2.0 ** p * C) ** (-1.0 / (p - 1.0))
    eps1 = 0.5 * (4.0 * C1 ** 3) ** (-1.0 / (p - 1.0))
    return eps0, eps1


def normalize_data(data: CauchyData, profile: ExponentProfile, times, system=None) -> CauchyData:
    """Rescale (f, g) so that ||S(t)(f, g)||_{X_T} = 1 (eps kept)."""
    unit = CauchyData(data.f, data.g, 1.0)
    norm = xt_norm(homogeneous_evolve(unit, times), profile, system)
    if norm == 0:
        return data
    return CauchyData(data.f * (1.0 / norm), data.g * (1.0 / norm), data.eps)


def phi_map(u: SpaceTimeField, data: CauchyData, spec: NonlinearitySpec, profile: ExponentProfile,
            C: Optional[float] = None, homogeneous: Optional[SpaceTimeField] = None,
            system=None) -> SpaceTimeField:
    """Phi(u) = S(t)(eps f, eps g) + G(F(u)).

    With a measured constant C the bound
    ||Phi(u)||_X <= ||S(t)(f, g)||_X + C ||u||_X^p is evaluated and the
    outcome stored in ``meta`` (``constant_violation`` True when it fails).
    """
    if not u.grid.same_as(data.grid):
        raise ConfigurationError("iterate and data live on different grids")
    S = homogeneous if homogeneous is not None else homogeneous_evolve(data, u.times)
    if not np.any(u.values):
        out = SpaceTimeField(S.grid, S.times, S.values.copy(), S.velocity, dict(S.meta))
    else:
        out = S + duhamel(apply_nonlinearity(u, spec))
        out.meta.update(S.meta)
    if C is not None:
        lhs = xt_norm(out, profile, system)
        rhs = xt_norm(S, profile, system) + C * xt_norm(u, profile, system) ** float(spec.p)
        out.meta.update(phi_norm=lhs, phi_bound=rhs, constant_violation=bool(lhs > rhs * (1 + 1e-12)))
    return out


# ---------------------------------------------------------------------------
# light cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LightCone:
    """Backward cone {|x| < R - t, 0 <= t < T} and cutoffs around it."""

    R: float
    T: float
    delta: float = 0.5

    def __post_init__(self):
        if self.R <= 0:
            raise DomainError("cone radius must be positive")

    def mask(self, grid, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        rad = grid.radius
        shape = (times.size,) + (1,) * rad.ndim
        inside = rad[None, ...] < (self.R - times).reshape(shape)
        return inside & (times < self.T + 1e-12).reshape(shape)

    def chi(self, grid, times, delta: Optional[float] = None) -> np.ndarray:
        """Smooth cutoff: 1 on the delta-neighbourhood |x| <= R - t + delta,
        0 beyond R - t + 2 delta."""
        d = self.delta if delta is None else delta
        times = np.asarray(times, dtype=float)
        rad = grid.radius
        shape = (times.size,) + (1,) * rad.ndim
        edge = (self.R - times).reshape(shape) + d
        return 1.0 - smooth_step((rad[None, ...] - edge) / d)

    def check_box(self, grid, deltas=()):
        if isinstance(grid, PeriodicGrid):
            reach = self.R + 2.0 * max((self.delta,) + tuple(deltas))
            if reach > grid.L:
                raise WrapAroundError(f"cone and cutoff reach |x| = {reach:.3g} beyond the box "
                                      f"half-width {grid.L}")


def _require_r_ge_r0(profile: ExponentProfile):
    v = _verdict("r_ge_r0_cone", profile.inv_r, profile.inv_r0)
    if not v.holds:
        raise InequalityFailure(v)


def cone_norm(w: SpaceTimeField, cone: LightCone, profile: ExponentProfile) -> float:
    """||w||_{L^{q0}_t L^{r0}_x} over the cone (exact check r >= r0 first)."""
    _require_r_ge_r0(profile)
    q0 = math.inf if profile.inv_q0 == 0 else 1.0 / float(profile.inv_q0)
    r0 = math.inf if profile.inv_r0 == 0 else 1.0 / float(profile.inv_r0)
    return lebesgue_spacetime_norm(w, q0, r0, mask=cone.mask(w.grid, w.times))


# ---------------------------------------------------------------------------
# weak residual against registered test functions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def load_test_bumps() -> tuple:
    text = resources.files("strausslab").joinpath("data/test_bumps.json").read_text()
    return tuple(json.loads(text)["bumps"])


def _bump_derivs(x):
    """b, b', b'' for b(x) = exp(1 - 1/(1 - x^2)) on |x| < 1."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    xs = np.where(inside, x, 0.0)
    h = 1.0 / (1.0 - xs ** 2)
    b = np.where(inside, np.exp(1.0 - h), 0.0)
    b1 = -2.0 * xs * h ** 2 * b
    b2 = (-2.0 * h ** 2 - 8.0 * xs ** 2 * h ** 3 + 4.0 * xs ** 2 * h ** 4) * b
    return b, b1, b2


def _bump_space(grid, shell, rho):
    """psi and Lap psi for psi = b((|x - c| - a)/rho)."""
    if isinstance(grid, PeriodicGrid):
        coords = list(grid.coords)
        coords[0] = coords[0] - shell
        s = np.sqrt(sum(c ** 2 for c in coords))
        a = 0.0
    else:
        s = grid.radius
        a = shell
    if 0 < a < rho:
        raise ConfigurationError("shell bumps must not straddle the origin")
    dim = grid.dim
    b, b1, b2 = _bump_derivs((s - a) / rho)
    d1, d2 = b1 / rho, b2 / rho ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        radial_term = np.where(s > 1e-12, (dim - 1) * d1 / np.where(s > 1e-12, s, 1.0),
                               (dim - 1) * d2)
    return b, d2 + radial_term


def _time_weights(times):
    m = times.size - 1
    dt = times[1] - times[0]
    if m >= 2 and m % 2 == 0:
        w = np.ones(m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * dt / 3.0
    w = np.full(m + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def _radial_quadrature(grid, bumps, refine=4):
    """Composite Gauss rule on [0, R] whose panel edges include the support
    edges of every test function: the integrands are only C-infinity there,
    so aligning the panels with them restores fast convergence."""
    from .grids import _composite_gauss
    edges = [x for bp in bumps for x in (bp["shell"] - bp["rho"], bp["shell"] + bp["rho"])
             if 0 < x < grid.R]
    breaks = list(np.linspace(0.0, grid.R, refine * grid.panels + 1)) + edges
    r, w = _composite_gauss(0.0, grid.R, breaks, grid.nodes_per_panel)
    return r, grid.area * r ** (grid.n - 1) * w


class _FineRadial:
    """Minimal grid stand-in used to integrate radial test functions."""

    def __init__(self, n, r, weights):
        self.dim, self.radius, self.weights = n, r, weights

    def integrate(self, u):
        return np.sum(u * self.weights, axis=-1)


def weak_residual(u: SpaceTimeField, F: SpaceTimeField, data: CauchyData, bumps=None) -> list[float]:
    """Residuals of <u, box psi> = <F, psi> + <eps g, psi(0)> - <eps f, psi_t(0)>
    for each registered test function (Simpson in time when possible),
    relative to the sum of the absolute values of the individual terms.

    On radial grids the fields are resampled through the Hankel transform
    onto a quadrature aligned with the support of each test function.
    """
    bumps = load_test_bumps() if bumps is None else bumps
    grid, times = u.grid, u.times
    T = float(times[-1])
    wt = _time_weights(times)
    f, g = data.effective
    radial = not isinstance(grid, PeriodicGrid)
    if radial:
        r, w = _radial_quadrature(grid, bumps)
        qg = _FineRadial(grid.n, r, w)
        E = grid.evaluation_matrix(r).T
        uu, ff, f0, g0 = (grid.forward(a) @ E for a in (u.values, F.values, f.values, g.values))
        uu, ff, f0, g0 = uu.real, ff.real, f0.real, g0.real
    else:
        qg = grid
        uu, ff, f0, g0 = u.values, F.values, f.values, g.values
    out = []
    for bp in bumps:
        tc, th = bp["t_center"] * T, bp["t_half"] * T
        a, a1, a2 = _bump_derivs((times - tc) / th)
        a1, a2 = a1 / th, a2 / th ** 2
        psi_x, lap_x = _bump_space(qg, bp["shell"], bp["rho"])
        tshape = (-1,) + (1,) * psi_x.ndim
        I_tt = float(np.sum(wt * qg.integrate(uu * (a2.reshape(tshape) * psi_x)).real))
        I_lap = float(np.sum(wt * qg.integrate(uu * (a.reshape(tshape) * lap_x)).real))
        I_F = float(np.sum(wt * qg.integrate(ff * (a.reshape(tshape) * psi_x)).real))
        I_b = float(np.real(qg.integrate(g0 * psi_x) * a[0] - qg.integrate(f0 * psi_x) * a1[0]))
        I_u = I_tt - I_lap
        # each term separately: for free waves I_u itself is close to zero
        scale = abs(I_tt) + abs(I_lap) + abs(I_F) + abs(I_b)
        out.append(abs(I_u - I_F - I_b) / scale if scale > 0 else 0.0)
    return out


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------

@dataclass
class IterationReport:
    xt_norms: list
    cone_differences: list
    contraction_factors: list
    eps: float
    eps0: Optional[float]
    eps1: Optional[float]
    C: Optional[float]
    C1: Optional[float]
    T: float
    cone_R: float
    mode: str
    verdict: str
    iterations: int
    weak_residual: Optional[float] = None
    residuals: list = field(default_factory=list)
    constant_violations: int = 0
    homogeneous_xt: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


GEOMETRIC_BOUND = 0.6   # contraction 1/2 with 1.2 slack
GEOMETRIC_RUN = 3


def picard_iterate(data: CauchyData, spec: NonlinearitySpec, profile: ExponentProfile, times,
                   max_iters: int = 25, C: Optional[float] = None, C1: Optional[float] = None,
                   cone_R: Optional[float] = None, floor: float = 1e-13, system=None,
                   fixed_iters: Optional[int] = None):
    """Run u_m = Phi(u_{m-1}) from u_{-1} = 0.

    Stops when three consecutive cone-difference ratios are <= 0.6, when the
    difference reaches the round-off floor (relative ``floor``), on
    norm escape (guaranteed regime only) or after ``max_iters``.
    ``fixed_iters`` forces exactly that many iterations (for uniqueness
    experiments).  Returns (limit, IterationReport).
    """
    times = np.asarray(times, dtype=float)
    T = float(times[-1])
    cone = LightCone(cone_R if cone_R is not None else T + 2.0, T)
    eps0 = eps1 = None
    if C is not None and C1 is not None:
        eps0, eps1 = thresholds(C, C1, float(spec.p))
    if data.is_zero:
        zero = SpaceTimeField(data.grid, times, np.zeros((times.size,) + tuple(data.grid.shape)))
        rep = IterationReport([0.0], [], [], data.eps, eps0, eps1, C, C1, T, cone.R,
                              "degenerate", "converged", 0, 0.0, [0.0] * 10)
        return zero, rep
    S = homogeneous_evolve(data, times)
    s_norm = xt_norm(S, profile, system)
    guaranteed = (eps0 is not None and data.eps <= min(eps0, eps1) * (1 + 1e-12)
                  and s_norm <= data.eps * (1 + 1e-9))
    mode = "guaranteed" if guaranteed else "exploratory"
    u = S
    norms = [xt_norm(u, profile, system)]
    diffs, factors = [], []
    violations = 0
    verdict = "max_iters"
    run = 0
    m = 0
    limit_iters = fixed_iters if fixed_iters is not None else max_iters
    while m < limit_iters:
        m += 1
        new = phi_map(u, data, spec, profile, C=C, homogeneous=S, system=system)
        if new.meta.get("constant_violation"):
            violations += 1
        norms.append(xt_norm(new, profile, system))
        d = cone_norm(new - u, cone, profile)
        ref = cone_norm(new, cone, profile)
        diffs.append(d)
        u = new
        if guaranteed and norms[-1] > 2.0 * data.eps * (1 + 1e-9):
            verdict = "norm_escape"
            break
        if fixed_iters is not None:
            continue
        if d <= floor * max(ref, 1e-300):
            verdict = "converged"
            break
        if len(diffs) >= 2 and diffs[-2] > floor * ref:
            factors.append(d / diffs[-2])
            run = run + 1 if factors[-1] <= GEOMETRIC_BOUND else 0
            if run >= GEOMETRIC_RUN:
                verdict = "converged"
                break
    if fixed_iters is not None:
        verdict = "converged" if diffs and diffs[-1] <= 1e-6 * max(cone_norm(u, cone, profile), 1e-300) \
            else "max_iters"
    F = apply_nonlinearity(u, spec)
    res = weak_residual(u, F, data)
    notes = ["convergence is measured on cone-restricted differences; no weak-* "
             "compactness step is performed"]
    rep = IterationReport(norms, diffs, factors, data.eps, eps0, eps1, C, C1, T, cone.R, mode,
                          verdict, m, max(res), res, violations, s_norm, notes)
    return u, rep


# ---------------------------------------------------------------------------
# localisation and uniqueness
# ---------------------------------------------------------------------------

def localization_check(F: SpaceTimeField, cone: LightCone, deltas: Sequence[float] = (0.5, 0.25),
                       include_identity: bool = True) -> dict:
    """Compare w = G F with w_chi = G(chi F) inside the cone, zero data.

    Differences are sup-norm over the cone relative to sup |w| on the whole
    space-time grid.
    """
    cone.check_box(F.grid, deltas)
    w = duhamel(F)
    mask = cone.mask(F.grid, F.times)
    scale = float(np.max(np.abs(w.values))) or 1.0
    out = {"R": cone.R, "T": cone.T, "differences": {}}
    if include_identity:
        w1 = duhamel(SpaceTimeField(F.grid, F.times, F.values * 1.0))
        out["identity"] = float(np.max(np.abs(np.where(mask, w.values - w1.values, 0.0)))) / scale
    for d in deltas:
        chi = cone.chi(F.grid, F.times, d)
        wc = duhamel(SpaceTimeField(F.grid, F.times, F.values * chi))
        out["differences"][str(d)] = float(np.max(np.abs(np.where(mask, w.values - wc.values, 0.0)))) / scale
    out["max_difference"] = max(out["differences"].values())
    return out


def _subintervals(u1, u2, profile, C, p, system=None):
    """Greedy split of the time grid into pieces on which
    C (||u1||^{p-1} + ||u2||^{p-1}) <= 1/2, norms L^q B^0_r on the piece.
    A piece always holds at least one step, so the split terminates even
    when a single step already violates the bound (recorded by the caller)."""
    from .littlewood_paley import besov_norms
    from .propagator import _time_norm, _trapezoid_weights
    q = math.inf if profile.inv_q == 0 else 1.0 / float(profile.inv_q)
    r = math.inf if profile.inv_r == 0 else 1.0 / float(profile.inv_r)
    spec = NormSpec(r, 0.0)
    n1 = besov_norms(u1.values, u1.grid, spec, system)
    n2 = besov_norms(u2.values, u2.grid, spec, system)

    def factor(a, b):
        w = _trapezoid_weights(u1.times[a:b + 1])
        return C * (_time_norm(n1[a:b + 1], w, q) ** (p - 1) + _time_norm(n2[a:b + 1], w, q) ** (p - 1))

    pieces, factors = [], []
    start, M = 0, len(u1.times) - 1
    while start < M:
        end = start + 1
        while end < M and factor(start, end + 1) <= 0.5:
            end += 1
        pieces.append((start, end))
        factors.append(factor(start, end))
        start = end
    return pieces, factors


def uniqueness_check(u1: SpaceTimeField, u2: SpaceTimeField, data: CauchyData,
                     spec: NonlinearitySpec, profile: ExponentProfile, C: float = 1.0,
                     radii: Optional[Sequence[float]] = None, residual_tol: float = 1e-4,
                     tol: float = 1e-6) -> dict:
    """Cone-restricted differences of two candidate solutions.

    Both inputs must first pass the weak-residual test; otherwise the report
    has verdict ``"rejected"``.  Differences (relative to the cone norm of
    u1) are reported for a sweep of cone radii and over subintervals on
    which the measured factor C (||u1||^{p-1} + ||u2||^{p-1}) is <= 1/2.
    """
    res1 = max(weak_residual(u1, apply_nonlinearity(u1, spec), data))
    res2 = max(weak_residual(u2, apply_nonlinearity(u2, spec), data))
    report = {"residuals": [res1, res2]}
    if res1 > residual_tol or res2 > residual_tol:
        report["verdict"] = "rejected"
        return report
    T = float(u1.times[-1])
    radii = list(radii) if radii is not None else [T + 0.5, T + 1.0, T + 2.0]
    diff = u1 - u2
    by_radius = {}
    for R in radii:
        cone = LightCone(R, T)
        ref = cone_norm(u1, cone, profile) or 1.0
        by_radius[str(R)] = cone_norm(diff, cone, profile) / ref
    pieces, factors = _subintervals(u1, u2, profile, C, float(spec.p))
    cone = LightCone(max(radii), T)
    by_piece = []
    for a, b in pieces:
        sub = slice(a, b + 1)
        d = SpaceTimeField(u1.grid, u1.times[sub], diff.values[sub])
        ref = SpaceTimeField(u1.grid, u1.times[sub], u1.values[sub])
        denom = cone_norm(ref, cone, profile) or 1.0
        by_piece.append(cone_norm(d, cone, profile) / denom)
    worst = max(list(by_radius.values()) + by_piece)
    report.update(by_radius=by_radius, subintervals=[list(p) for p in pieces],
                  subinterval_factors=factors,
                  by_subinterval=by_piece, max_difference=worst,
                  verdict="identical" if worst <= tol else "different")
    return report


class PicardSolver(BaseEstimator):
    """Estimator facade: ``fit(data)`` runs the iteration on the configured
    time grid; ``solution_`` and ``report_`` hold the results."""

    def __init__(self, n=8, p="9/5", T=4.0, n_steps=256, max_iters=25, C=None, C1=None,
                 cone_R=None):
        self.n = n
        self.p = p
        self.T = T
        self.n_steps = n_steps
        self.max_iters = max_iters
        self.C = C
        self.C1 = C1
        self.cone_R = cone_R

    def fit(self, data: CauchyData, y=None):
        from .exponents import exponent_profile
        from .propagator import time_grid
        self.profile_ = exponent_profile(self.n, self.p)
        self.times_ = time_grid(self.T, self.n_steps)
        spec = NonlinearitySpec.power(self.profile_.p)
        self.solution_, self.report_ = picard_iterate(
            data, spec, self.profile_, self.times_, self.max_iters, self.C, self.C1, self.cone_R)
        return self

    def predict(self, X=None):
        if not hasattr(self, "solution_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit first")
        return self.solution_
