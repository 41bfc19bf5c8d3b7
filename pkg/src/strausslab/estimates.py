"""Monte-Carlo ratio sampling for the linear and product estimates.

Each sampler draws random data from a named family, computes both sides of
one inequality and summarises the ratios in a :class:`RatioReport`.  Draw
``i`` uses a generator derived from ``(seed, i)``, so two samplers given the
same seed, family and scales see identical data.

Scale families are generated at dyadic scales ``j``; for admissible
configurations the time horizon is scale covariant (``T_j = T0 2^{-j}``),
which makes the exact inequality scale invariant, so any trend of the log
ratio in ``j`` signals an unbounded constant.  Counterexample hunts keep the
horizon fixed instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import band_family, draw_rng, field_from_member, make_family_draw
from .exceptions import ConfigurationError, DomainError, InequalityFailure
from .exponents import (ExponentProfile, _build_profile, _verdict, as_rational, check_foschi,
                        energy_critical_power, is_sigma_admissible)
from .fieldio import grid_to_dict
from .grids import PeriodicGrid, RadialGrid
from .littlewood_paley import (NormSpec, UndefinedRatio, bernstein_ratio, besov_norm,
                               chain_rule_ratio, leibniz_ratio, smooth_step, sobolev_pair_norm)
from .propagator import (CauchyData, SpaceTimeField, duhamel, energy, homogeneous_evolve,
                         lebesgue_spacetime_norm, spacetime_norm, time_grid)

__all__ = [
    "SLOPE_TOLERANCE",
    "SPREAD_FACTOR",
    "RatioReport",
    "summarize",
    "surrogate_profile",
    "homogeneous_strichartz_sample",
    "inhomogeneous_strichartz_sample",
    "key_linear_estimate_sample",
    "measure_c1",
    "bernstein_suite",
    "bernstein_sample",
    "leibniz_suite",
    "chain_rule_suite",
    "embedding_suite",
    "StrichartzSampler",
]

# artifact policy for the "bounded" verdict
SLOPE_TOLERANCE = 0.05
SPREAD_FACTOR = 10.0


def _inv_to_exp(inv) -> float:
    inv = float(inv)
    return math.inf if inv == 0 else 1.0 / inv


def _frac_str(x) -> str:
    return str(as_rational(x)) if not isinstance(x, float) else repr(x)


@dataclass
class RatioReport:
    estimate_id: str
    samples: int
    skipped: int
    max_ratio: float
    mean_ratio: float
    median_ratio: float
    slope: float
    verdict: str
    ratios: list = field(default_factory=list)
    scales: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return self.verdict == "bounded"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def scale_slope(scales, ratios) -> float:
    """Least-squares slope of log2(ratio) against the scale index."""
    scales = np.asarray(scales, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size < 2 or np.ptp(scales) == 0:
        return 0.0
    return float(np.polyfit(scales, np.log2(ratios), 1)[0])


def summarize(estimate_id: str, ratios, scales, skipped: int = 0, meta=None) -> RatioReport:
    ratios = [float(x) for x in ratios]
    scales = [float(s) for s in scales]
    if not ratios:
        return RatioReport(estimate_id, 0, skipped, math.nan, math.nan, math.nan, math.nan,
                           "suspect", [], [], dict(meta or {}))
    arr = np.asarray(ratios)
    slope = scale_slope(scales, arr)
    med = float(np.median(arr))
    bounded = (-SLOPE_TOLERANCE <= slope <= SLOPE_TOLERANCE) and float(arr.max()) <= SPREAD_FACTOR * med
    return RatioReport(estimate_id, len(ratios), int(skipped), float(arr.max()), float(arr.mean()),
                       med, slope, "bounded" if bounded else "suspect", ratios, scales,
                       dict(meta or {}))


def surrogate_profile(d: int, p) -> ExponentProfile:
    """Case (C2) exponents evaluated in a low dimension d (grid surrogate).

    The formulas are the same as for n >= 4; only the dimension restriction
    of the theorem is lifted, so the d = 3 grid can exercise the same
    estimates.
    """
    p = as_rational(p)
    if d < 2:
        raise DomainError("surrogates need d >= 2")
    if d > 2 and not p > energy_critical_power(d):
        raise DomainError(f"p={p} is not energy supercritical in d={d}")
    if p < 2:
        raise DomainError("surrogates use case (C2), p >= 2")
    return _build_profile(d, p)


def _grid_meta(grid, family, seed, js, T0, n_steps, **extra):
    meta = {"grid": grid_to_dict(grid), "family": family, "seed": int(seed),
            "scales": [float(j) for j in js], "T0": float(T0), "n_steps": int(n_steps)}
    meta.update(extra)
    return meta


def _scheduled(seed, i, js):
    """Scale and generator of draw i: consecutive draws share one random
    member evaluated at each scale in turn (paired design), so the scale
    regression sees discretisation effects only."""
    return js[i % len(js)], draw_rng(seed, i // len(js))


def _horizon(T0, j, covariant):
    return T0 * 2.0 ** (-j) if covariant else T0


# ---------------------------------------------------------------------------
# homogeneous Strichartz
# ---------------------------------------------------------------------------

def homogeneous_strichartz_sample(grid, inv_q, inv_r, sbar=0, samples: int = 20, seed: int = 0,
                                  family: str = "gaussian", js: Sequence[float] = (-1, 0, 1),
                                  T0: float = 2.0, n_steps: int = 32, sigma=None,
                                  covariant: Optional[bool] = None, with_g: bool = True,
                                  proxy: bool = True, family_kw=None) -> RatioReport:
    """Ratios ||S(t)(f, g)||_{L^q B^sbar_r} / ||(f, g)||_s over random draws,
    with s = sbar + n/2 - 1/q - n/r.

    Non-admissible (q, r) switch to counterexample-hunt mode: the horizon is
    fixed and the report carries ``meta['mode']``.  For (q, r) = (inf, 2) the
    multiplier energy drift and the square-function constant of each draw
    are recorded as well.
    """
    inv_q, inv_r, sbar = as_rational(inv_q), as_rational(inv_r), as_rational(sbar)
    dim = grid.dim
    sigma = Fraction(dim - 1, 2) if sigma is None else as_rational(sigma)
    admissible = is_sigma_admissible(inv_q, inv_r, sigma)
    mode = "bounded-check" if admissible else "counterexample-hunt"
    covariant = admissible if covariant is None else covariant
    s = sbar + Fraction(dim, 2) - inv_q - dim * inv_r
    q, r = _inv_to_exp(inv_q), _inv_to_exp(inv_r)
    spec = NormSpec(r, float(sbar))
    draw = make_family_draw(family)
    energy_case = inv_q == 0 and inv_r == Fraction(1, 2)
    ratios, scales, skipped = [], [], 0
    drifts, sq_ratios = [], []
    for i in range(samples):
        j, rng = _scheduled(seed, i, js)
        f, g = draw(grid, rng, j, with_g=with_g, **(family_kw or {}))
        den = sobolev_pair_norm(f, g, float(s))
        if den == 0.0:
            skipped += 1
            continue
        times = time_grid(_horizon(T0, j, covariant), n_steps)
        u = homogeneous_evolve(CauchyData(f, g), times, proxy=proxy)
        num = spacetime_norm(u, q, spec)
        if num == 0.0:
            skipped += 1
            continue
        ratios.append(num / den)
        scales.append(j)
        if energy_case:
            E = energy(u)
            drifts.append(float(np.max(np.abs(E / E[0] - 1.0))))
            # square-function constant: B^1_2 against H^1 on the data
            sq_ratios.append(besov_norm(f, NormSpec(2.0, 1.0)) / den if not with_g else math.nan)
    meta = _grid_meta(grid, family, seed, js, T0, n_steps, mode=mode,
                      inv_q=str(inv_q), inv_r=str(inv_r), sbar=str(sbar), s=str(s),
                      sigma=str(sigma), covariant=bool(covariant))
    if energy_case:
        meta["energy_drift_max"] = max(drifts) if drifts else math.nan
        meta["square_function_ratios"] = sq_ratios
    return summarize(f"homogeneous_strichartz[1/q={inv_q},1/r={inv_r},sbar={sbar}]",
                     ratios, scales, skipped, meta)


# ---------------------------------------------------------------------------
# inhomogeneous Strichartz and the key linear estimate
# ---------------------------------------------------------------------------

def _forcing_pair(profile: ExponentProfile):
    """(1/q~', 1/l2') of the forcing norm: the Foschi dual pair in case C1,
    (1/q1, 1/r1) in case C2."""
    if profile.case == "C1":
        return 1 - profile.inv_qt, 1 - profile.inv_rt_beta
    return profile.inv_q1, profile.inv_r1


def _target_pair(profile: ExponentProfile, l1: str):
    if l1 == "r":
        return profile.inv_q, profile.inv_r, Fraction(0)
    if l1 == "r0":
        return profile.inv_q0, profile.inv_r0, profile.s_gap
    raise ConfigurationError(f"l1 must be 'r' or 'r0', got {l1!r}")


def inhomogeneous_gate(profile: ExponentProfile, l1: str = "r"):
    """Exact preconditions of the inhomogeneous sampler.

    Returns (verdicts, forcing smoothness s).  Raises InequalityFailure on the
    first failing predicate, before any numerics.
    """
    sigma, n = profile.sigma, profile.n
    verdicts = []
    if profile.case == "C1":
        verdicts += check_foschi(Fraction(1, 2), profile.inv_r_alpha, profile.inv_qt,
                                 profile.inv_rt_beta, sigma)
        verdicts.append(_verdict("r_ge_r_alpha", profile.inv_r, profile.inv_r_alpha))
        verdicts.append(_verdict("r0_ge_r_alpha", profile.inv_r0, profile.inv_r_alpha))
    else:
        for name, a, b in (("admissible_q_r", profile.inv_q, profile.inv_r),
                           ("admissible_q0_r0", profile.inv_q0, profile.inv_r0),
                           ("admissible_q1p_r1p", profile.inv_q1_prime, profile.inv_r1_prime)):
            ok = is_sigma_admissible(a, b, sigma)
            verdicts.append(_verdict(name, Fraction(0 if ok else 1), Fraction(0), "eq"))
    inv_ql, inv_l1, sbar = _target_pair(profile, l1)
    inv_qf, inv_lf = _forcing_pair(profile)
    s = sbar + inv_qf + n * inv_lf - inv_ql - n * inv_l1 - 2
    verdicts.append(_verdict("bookkeeping_identity", s, profile.s_gap, "eq"))
    for v in verdicts:
        if not v.holds:
            raise InequalityFailure(v)
    return verdicts, s


def _forcing_draw(grid, rng, j, family, T, times, family_kw=None):
    """F(t, x) = sum_k a_k(t) h_k(x) with smooth random temporal profiles.

    The spatial parts come from the data family at scale j; the temporal
    frequencies scale with 2^j so the family is scale covariant."""
    draw = make_family_draw(family)
    values = np.zeros((times.size,) + tuple(grid.shape))
    for _ in range(2):
        h, _g = draw(grid, rng, j, with_g=False, **(family_kw or {}))
        omega = 2.0 ** j * rng.uniform(0.0, 2.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        amp = 4.0 ** j * rng.uniform(0.5, 1.5)
        values += amp * np.multiply.outer(np.cos(omega * times + phase), h.values)
    return SpaceTimeField(grid, times, values)


def _p0(grid, values):
    """Frequency localisation to the annulus |xi| ~ 1 (block j = 0)."""
    from .littlewood_paley import DyadicSystem
    psi = DyadicSystem(-5, 5).psi_on(0, grid)
    out = grid.inverse(grid.forward(values) * psi)
    return out.real if not np.iscomplexobj(values) else out


def inhomogeneous_strichartz_sample(profile: ExponentProfile, grid, samples: int = 20, seed: int = 0,
                                    l1: str = "r", localized: bool = False,
                                    family: str = "gaussian", js: Sequence[float] = (-1, 0, 1),
                                    T0: float = 2.0, n_steps: int = 32, proxy: bool = True,
                                    family_kw=None) -> RatioReport:
    """Ratios ||G F||_{L^q B^sbar_l1} / ||F||_{L^q~' B^s_l2'} with the
    smoothness bookkeeping checked exactly first.

    ``localized=True`` runs the frequency-localised form instead:
    ||G P0 F||_{L^q L^l} / ||P0 F||_{L^q~' L^l2'} with (q, l) = (2, r_alpha) in
    case C1 and (q, r) in case C2, on single-annulus draws at one scale.
    """
    if grid.dim != profile.n:
        raise ConfigurationError(f"grid dimension {grid.dim} != profile dimension {profile.n}")
    verdicts, s_forcing = inhomogeneous_gate(profile, l1)
    inv_ql, inv_l1, sbar = _target_pair(profile, l1)
    inv_qf, inv_lf = _forcing_pair(profile)
    if localized:
        family, js = "band", (0,)
        if profile.case == "C1":
            inv_ql, inv_l1 = Fraction(1, 2), profile.inv_r_alpha
    q_l, l_1 = _inv_to_exp(inv_ql), _inv_to_exp(inv_l1)
    q_f, l_f = _inv_to_exp(inv_qf), _inv_to_exp(inv_lf)
    ratios, scales, skipped = [], [], 0
    for i in range(samples):
        j, rng = _scheduled(seed, i, js)
        times = time_grid(_horizon(T0, j, True), n_steps)
        F = _forcing_draw(grid, rng, j, family, T0, times, family_kw)
        if localized:
            F = SpaceTimeField(grid, times, _p0(grid, F.values))
        if not np.any(F.values):
            skipped += 1
            continue
        if localized:
            den = lebesgue_spacetime_norm(F, q_f, l_f)
        else:
            den = spacetime_norm(F, q_f, NormSpec(l_f, float(s_forcing)))
        if den == 0.0:
            skipped += 1
            continue
        w = duhamel(F)
        if localized:
            num = lebesgue_spacetime_norm(w, q_l, l_1)
        else:
            num = spacetime_norm(w, q_l, NormSpec(l_1, float(sbar)))
        ratios.append(num / den)
        scales.append(j)
    meta = _grid_meta(grid, family, seed, js, T0, n_steps, n=profile.n, p=str(profile.p),
                      case=profile.case, l1=l1, localized=bool(localized),
                      forcing_smoothness=str(s_forcing),
                      gate=[v.inequality_id for v in verdicts])
    tag = "localized" if localized else f"l1={l1}"
    return summarize(f"inhomogeneous_strichartz[n={profile.n},p={profile.p},{tag}]",
                     ratios, scales, skipped, meta)


def key_linear_estimate_sample(profile: ExponentProfile, grid, samples: int = 20, seed: int = 0,
                               family: str = "gaussian", js: Sequence[float] = (-1, 0, 1),
                               T0: float = 2.0, n_steps: int = 32, with_forcing: bool = True,
                               with_g: bool = True, proxy: bool = True,
                               family_kw=None) -> RatioReport:
    """Ratios of the key linear estimate; ``max_ratio`` is the measured C.

    Draw i uses the same data (f, g) as draw i of
    homogeneous_strichartz_sample with identical seed, family and scales; the
    forcing is drawn afterwards from the same generator.
    """
    if grid.dim != profile.n:
        raise ConfigurationError(f"grid dimension {grid.dim} != profile dimension {profile.n}")
    if with_forcing:
        inhomogeneous_gate(profile, "r")
        inhomogeneous_gate(profile, "r0")
    gap = profile.s_gap
    spec_r = NormSpec(_inv_to_exp(profile.inv_r), 0.0)
    spec_r0 = NormSpec(_inv_to_exp(profile.inv_r0), float(gap))
    spec_f = NormSpec(_inv_to_exp(profile.inv_r1), float(gap))
    q, q0, q1 = (_inv_to_exp(x) for x in (profile.inv_q, profile.inv_q0, profile.inv_q1))
    draw = make_family_draw(family)
    ratios, scales, skipped = [], [], 0
    for i in range(samples):
        j, rng = _scheduled(seed, i, js)
        f, g = draw(grid, rng, j, with_g=with_g, **(family_kw or {}))
        times = time_grid(_horizon(T0, j, True), n_steps)
        den = sobolev_pair_norm(f, g, float(profile.s_c))
        u = homogeneous_evolve(CauchyData(f, g), times, proxy=proxy)
        if with_forcing:
            F = _forcing_draw(grid, rng, j, family, T0, times, family_kw)
            den += spacetime_norm(F, q1, spec_f)
            u = u + duhamel(F)
        if den == 0.0:
            skipped += 1
            continue
        num = spacetime_norm(u, q, spec_r) + spacetime_norm(u, q0, spec_r0)
        ratios.append(num / den)
        scales.append(j)
    meta = _grid_meta(grid, family, seed, js, T0, n_steps, n=profile.n, p=str(profile.p),
                      case=profile.case, with_forcing=bool(with_forcing))
    return summarize(f"key_linear_estimate[n={profile.n},p={profile.p}]",
                     ratios, scales, skipped, meta)


def pointwise_power_constant(p: float, samples: int = 2000, seed: int = 0) -> float:
    """Largest sampled ||a|^p - |b|^p| / ((|a|^{p-1} + |b|^{p-1}) |a - b|)."""
    rng = draw_rng(seed, 0)
    a = rng.normal(size=samples) * np.exp(rng.uniform(-3, 3, samples))
    b = rng.normal(size=samples) * np.exp(rng.uniform(-3, 3, samples))
    keep = a != b
    a, b = a[keep], b[keep]
    num = np.abs(np.abs(a) ** p - np.abs(b) ** p)
    den = (np.abs(a) ** (p - 1) + np.abs(b) ** (p - 1)) * np.abs(a - b)
    return float(np.max(num / den))


def measure_c1(profile: ExponentProfile, grid, samples: int = 12, seed: int = 0,
               family: str = "gaussian", js: Sequence[float] = (-1, 0, 1), T0: float = 2.0,
               n_steps: int = 32) -> dict:
    """Measured constant C1 of the cone-difference chain.

    C1 is taken as the largest of: the Lebesgue-norm Duhamel ratio
    ||G F||_{L^q0 L^r0} / ||F||_{L^q1 L^r1}; the pointwise constant of
    ||a|^p - |b|^p| <= c (|a|^{p-1} + |b|^{p-1}) |a - b|; the embedding ratio
    ||u||_{L^q L^r} / ||u||_{L^q B^0_r}; and 1 (the chain needs C1 > 1).
    """
    q0, r0 = _inv_to_exp(profile.inv_q0), _inv_to_exp(profile.inv_r0)
    q1, r1 = _inv_to_exp(profile.inv_q1), _inv_to_exp(profile.inv_r1)
    q, r = _inv_to_exp(profile.inv_q), _inv_to_exp(profile.inv_r)
    draw = make_family_draw(family)
    duh, emb, scales = [], [], []
    for i in range(samples):
        j, rng = _scheduled(seed, i, js)
        f, g = draw(grid, rng, j)
        times = time_grid(_horizon(T0, j, True), n_steps)
        F = _forcing_draw(grid, rng, j, family, T0, times)
        w = duhamel(F)
        duh.append(lebesgue_spacetime_norm(w, q0, r0) / lebesgue_spacetime_norm(F, q1, r1))
        u = homogeneous_evolve(CauchyData(f, g), times)
        emb.append(lebesgue_spacetime_norm(u, q, r) / spacetime_norm(u, q, NormSpec(r, 0.0)))
        scales.append(j)
    pointwise = pointwise_power_constant(float(profile.p), seed=seed)
    duh_rep = summarize("c1_duhamel_lebesgue", duh, scales, 0,
                        _grid_meta(grid, family, seed, js, T0, n_steps))
    emb_rep = summarize("c1_embedding", emb, scales, 0,
                        _grid_meta(grid, family, seed, js, T0, n_steps))
    c1 = max(1.0, duh_rep.max_ratio, emb_rep.max_ratio, pointwise)
    return {"C1": c1, "duhamel": duh_rep.max_ratio, "embedding": emb_rep.max_ratio,
            "pointwise": pointwise, "reports": [duh_rep, emb_rep]}


# ---------------------------------------------------------------------------
# Besov-engine ratio suites over the closed-form corpus
# ---------------------------------------------------------------------------

def _finite(x) -> bool:
    return not isinstance(x, UndefinedRatio) and math.isfinite(x)


def bernstein_suite(grid, corpus, p_low=2.0, p_high=math.inf, shifts=(-1, 0, 1)) -> RatioReport:
    """Bernstein ratios at the dominant block of u(2^m .) for each member and
    shift m (block index shifted along with the profile)."""
    from .littlewood_paley import DyadicSystem, besov_norms
    system = DyadicSystem.for_grid(grid)
    ratios, scales, skipped = [], [], 0
    for member in corpus:
        base = field_from_member(grid, member)
        _, blocks = besov_norms(base.values, grid, NormSpec(2.0, 0.0), system, return_blocks=True)
        j_ref = int(system.js[int(np.argmax(blocks))])
        for m in shifts:
            u = field_from_member(grid, member, 2.0 ** m)
            if not system.j_min <= j_ref + m <= system.j_max:
                skipped += 1
                continue
            val = bernstein_ratio(u, j_ref + m, p_low, p_high, system)
            if not _finite(val):
                skipped += 1
                continue
            ratios.append(val)
            scales.append(m)
    return summarize(f"bernstein[{p_low},{p_high}]", ratios, scales, skipped,
                     {"grid": grid_to_dict(grid), "members": len(corpus), "shifts": list(shifts)})


def bernstein_sample(grid, samples: int = 200, seed: int = 0, js: Sequence[int] = tuple(range(-3, 4)),
                     p_low=2.0, p_high=math.inf) -> RatioReport:
    """Bernstein ratios on random band-limited draws (paired design over js).

    Each draw is a band_family sample at scale j, tested at its dominant
    Littlewood-Paley block.
    """
    from .littlewood_paley import DyadicSystem, besov_norms
    system = DyadicSystem.for_grid(grid)
    ratios, scales, skipped = [], [], 0
    for i in range(samples):
        j, rng = _scheduled(seed, i, js)
        u, _ = band_family(grid, rng, j, with_g=False)
        _, blocks = besov_norms(u.values, grid, NormSpec(2.0, 0.0), system, return_blocks=True)
        jb = int(system.js[int(np.argmax(blocks))])
        val = bernstein_ratio(u, jb, p_low, p_high, system)
        if not _finite(val):
            skipped += 1
            continue
        ratios.append(val)
        scales.append(j)
    return summarize(f"bernstein_draws[{p_low},{p_high}]", ratios, scales, skipped,
                     {"grid": grid_to_dict(grid), "family": "band", "seed": int(seed),
                      "scales": [float(j) for j in js]})


def leibniz_pairs(dim: int, count: int = 50):
    """``count`` (s, p) choices with 0 < s < dim/p."""
    ps = [2.0, 3.0, 4.0, 6.0, 8.0]
    per = count // len(ps)
    out = []
    for p in ps:
        top = dim / p
        for k in range(per):
            out.append(((k + 0.5) / per * top * 0.9, p))
    return out


def cutoff(grid, radius: float = 4.0, scale: float = 1.0):
    """Smooth cutoff equal to 1 on |x| <= radius, 0 beyond 2 radius."""
    from .littlewood_paley import DyadicField, RadialProfile
    rad = scale * grid.radius
    vals = 1.0 - smooth_step(rad / radius - 1.0)
    cls = DyadicField if isinstance(grid, PeriodicGrid) else RadialProfile
    return cls(grid, vals)


def leibniz_suite(grid, corpus, pairs=None, shifts=(-1, 0, 1), radius: float = 3.0) -> RatioReport:
    """Leibniz ratios with v a smooth cutoff; draw i pairs member i mod 20,
    (s, p) choice i mod len(pairs) and shift i mod len(shifts)."""
    pairs = pairs or leibniz_pairs(grid.dim)
    ratios, scales, skipped = [], [], 0
    count = max(len(pairs), len(corpus)) * len(shifts)
    for i in range(count):
        member = corpus[i % len(corpus)]
        s, p = pairs[i % len(pairs)]
        m = shifts[i % len(shifts)]
        u = field_from_member(grid, member, 2.0 ** m)
        v = cutoff(grid, radius, 2.0 ** m)
        val = leibniz_ratio(u, v, NormSpec(p, s))
        if not _finite(val):
            skipped += 1
            continue
        ratios.append(val)
        scales.append(m)
    return summarize("leibniz", ratios, scales, skipped,
                     {"grid": grid_to_dict(grid), "members": len(corpus), "pairs": len(pairs),
                      "shifts": list(shifts), "cutoff_radius": radius})


def chain_rule_suite(grid, corpus, profile: ExponentProfile, shifts=(-1, 0, 1)) -> RatioReport:
    """Chain-rule ratios with (r, m, l) = (r1, r, r0) and s = s_c - s_0."""
    ratios, scales, skipped = [], [], 0
    args = (profile.p, profile.s_gap, 1 / profile.inv_r1, 1 / profile.inv_r, 1 / profile.inv_r0)
    for member in corpus:
        for m in shifts:
            u = field_from_member(grid, member, 2.0 ** m)
            val = chain_rule_ratio(u, *args, profile=profile)
            if not _finite(val):
                skipped += 1
                continue
            ratios.append(val)
            scales.append(m)
    return summarize(f"chain_rule[n={profile.n},p={profile.p}]", ratios, scales, skipped,
                     {"grid": grid_to_dict(grid), "members": len(corpus), "shifts": list(shifts)})


def embedding_suite(grid, corpus, ps=(2.0, 4.0, 8.0)) -> dict:
    """Corpus-wide constant C_p in ||u||_{L^p} <= C_p ||u||_{B^0_p}."""
    out = {}
    for p in ps:
        vals = []
        for member in corpus:
            u = field_from_member(grid, member)
            u = u.with_values(grid.remove_mean(u.values))
            vals.append(float(grid.lp_norm(u.values, p)) / besov_norm(u, NormSpec(p, 0.0)))
        out[str(p)] = max(vals)
    return out


class StrichartzSampler(BaseEstimator):
    """Estimator facade over the homogeneous sampler: ``fit(grid)`` runs the
    draws; ``report_`` holds the RatioReport and ``predict`` returns the
    verdict."""

    def __init__(self, inv_q="1/4", inv_r="1/4", sbar="0", samples=20, seed=0,
                 family="gaussian", js=(-1, 0, 1), T0=2.0, n_steps=32):
        self.inv_q = inv_q
        self.inv_r = inv_r
        self.sbar = sbar
        self.samples = samples
        self.seed = seed
        self.family = family
        self.js = js
        self.T0 = T0
        self.n_steps = n_steps

    def fit(self, grid, y=None):
        self.report_ = homogeneous_strichartz_sample(
            grid, self.inv_q, self.inv_r, self.sbar, samples=self.samples, seed=self.seed,
            family=self.family, js=self.js, T0=self.T0, n_steps=self.n_steps)
        self.constant_ = self.report_.max_ratio
        return self

    def predict(self, X=None):
        if not hasattr(self, "report_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit first")
        return self.report_.verdict
