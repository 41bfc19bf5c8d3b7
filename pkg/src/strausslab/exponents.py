"""Exact exponent calculator for small-data global existence of box u = |u|^p.

Every quantity here is an exact rational (``fractions.Fraction``) or an
element ``a + b*sqrt(c)`` of a real quadratic extension.  Inverse exponents
(``1/q`` rather than ``q``) are stored throughout so that ``q = inf`` is the
rational ``0``.

Floating point is never used for a decision in this module; ``float()`` only
appears in display helpers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .exceptions import DomainError, OutOfScopeError, SmoothnessGapError

Rational = Fraction
RationalLike = Union[int, str, Fraction]

__all__ = [
    "Rational",
    "as_rational",
    "AlgebraicValue",
    "CriticalPowers",
    "ExponentProfile",
    "RangeReport",
    "ChainVerdict",
    "critical_powers",
    "sobolev_critical",
    "smoothness_floor",
    "is_sigma_admissible",
    "is_sigma_acceptable",
    "check_foschi",
    "exponent_profile",
    "admissible_range",
    "verify_lemma_chain",
    "smoothness_index",
    "energy_critical_power",
    "to_json",
    "sweep_rows",
    "write_sweep_csv",
]

HALF = Fraction(1, 2)
ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Accepts ints, Fractions, and strings of the form ``"a/b"`` or a finite
    decimal such as ``"1.8"``.  Floats are rejected since they would smuggle a
    binary rounding error into exact arithmetic.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational") from exc
    if isinstance(value, AlgebraicValue) and value.is_rational:
        return value.rational_part
    raise TypeError(f"expected int, Fraction or str, got {type(value).__name__}")


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _squarefree_split(m: int) -> tuple[int, int]:
    """Return (k, c) with m = k*k*c and c square-free."""
    if m == 0:
        return 0, 0
    k, c = 1, m
    d = 2
    while d * d <= c:
        dd = d * d
        while c % dd == 0:
            c //= dd
            k *= d
        d += 1 if d == 2 else 2
    return k, c


def _sign_linear(x: Fraction, y: Fraction, c: int) -> int:
    """Sign of x + y*sqrt(c) for square-free c >= 0."""
    if c == 0 or y == 0:
        return _sign(x)
    sx, sy = _sign(x), _sign(y)
    if sx == 0:
        return sy
    if sx == sy:
        return sx
    # opposite signs: the larger magnitude wins; equality would force sqrt(c) rational
    lhs, rhs = x * x, y * y * c
    return sx if lhs > rhs else sy


@dataclass(frozen=True)
class AlgebraicValue:
    """Exact real number ``a + b*sqrt(c)``.

    The radicand is normalised to a square-free non-negative integer, so two
    values with the same radicand can be added and multiplied without leaving
    the field.  Values whose radical part vanishes collapse to ``b = c = 0``.
    """

    rational_part: Fraction
    radical_coeff: Fraction = ZERO
    radicand: Fraction = ZERO

    def __post_init__(self):
        a = as_rational(self.rational_part)
        b = as_rational(self.radical_coeff)
        c = as_rational(self.radicand)
        if c < 0:
            raise DomainError(f"negative radicand {c}")
        if b == 0 or c == 0:
            b, c_int = ZERO, 0
        else:
            # sqrt(num/den) = sqrt(num*den)/den
            k, c_int = _squarefree_split(c.numerator * c.denominator)
            b = b * Fraction(k, c.denominator)
            if c_int == 1:
                a, b, c_int = a + b, ZERO, 0
        object.__setattr__(self, "rational_part", a)
        object.__setattr__(self, "radical_coeff", b)
        object.__setattr__(self, "radicand", Fraction(c_int))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "AlgebraicValue":
        if isinstance(value, AlgebraicValue):
            return value
        return cls(as_rational(value))

    @classmethod
    def sqrt(cls, value: RationalLike) -> "AlgebraicValue":
        return cls(ZERO, ONE, as_rational(value))

    @property
    def is_rational(self) -> bool:
        return self.radical_coeff == 0

    def to_rational(self) -> Fraction:
        if not self.is_rational:
            raise DomainError(f"{self} is irrational")
        return self.rational_part

    # -- arithmetic -----------------------------------------------------------
    def _common(self, other: "AlgebraicValue") -> int:
        c1, c2 = int(self.radicand), int(other.radicand)
        if c1 and c2 and c1 != c2:
            raise DomainError("arithmetic across different radicands is not supported")
        return c1 or c2

    def __add__(self, other):
        o = AlgebraicValue.coerce(other)
        c = self._common(o)
        return AlgebraicValue(self.rational_part + o.rational_part,
                              self.radical_coeff + o.radical_coeff, c)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicValue(-self.rational_part, -self.radical_coeff, self.radicand)

    def __sub__(self, other):
        return self + (-AlgebraicValue.coerce(other))

    def __rsub__(self, other):
        return AlgebraicValue.coerce(other) - self

    def __mul__(self, other):
        o = AlgebraicValue.coerce(other)
        c = self._common(o)
        a1, b1, a2, b2 = self.rational_part, self.radical_coeff, o.rational_part, o.radical_coeff
        return AlgebraicValue(a1 * a2 + b1 * b2 * c, a1 * b2 + a2 * b1, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = AlgebraicValue.coerce(other)
        if o.is_rational:
            d = o.rational_part
            if d == 0:
                raise ZeroDivisionError("division of algebraic value by zero")
            return AlgebraicValue(self.rational_part / d, self.radical_coeff / d, self.radicand)
        # multiply by the conjugate
        conj = AlgebraicValue(o.rational_part, -o.radical_coeff, o.radicand)
        return (self * conj) / (o * conj).to_rational()

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise DomainError("only non-negative integer powers are supported")
        out = AlgebraicValue(ONE)
        for _ in range(k):
            out = out * self
        return out

    # -- exact ordering -------------------------------------------------------
    def sign(self) -> int:
        return _sign_linear(self.rational_part, self.radical_coeff, int(self.radicand))

    def _cmp(self, other) -> int:
        o = AlgebraicValue.coerce(other)
        c1, c2 = int(self.radicand), int(o.radicand)
        x = self.rational_part - o.rational_part
        if not (c1 and c2) or c1 == c2:
            return (self - o).sign()
        # x + y1*sqrt(c1) + y2*sqrt(c2), two distinct square-free radicands
        # normalisation guarantees y1, y2 != 0 here
        y1, y2 = self.radical_coeff, -o.radical_coeff
        s1, s2 = _sign(y1), _sign(y2)
        if s1 == s2:
            s_rad = s1
        else:
            # y1^2 c1 == y2^2 c2 is impossible for distinct square-free radicands
            s_rad = s1 if y1 * y1 * c1 > y2 * y2 * c2 else s2
        sx = _sign(x)
        if sx == 0 or sx == s_rad:
            return s_rad
        # compare x^2 with (y1 sqrt c1 + y2 sqrt c2)^2
        k, c12 = _squarefree_split(c1 * c2)
        diff = _sign_linear(x * x - y1 * y1 * c1 - y2 * y2 * c2, -2 * y1 * y2 * k, c12)
        return sx if diff > 0 else s_rad

    def __eq__(self, other):
        if not isinstance(other, (AlgebraicValue, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.rational_part, self.radical_coeff, self.radicand))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.rational_part) + float(self.radical_coeff) * math.sqrt(float(self.radicand))

    def __repr__(self):
        if self.is_rational:
            return f"AlgebraicValue({self.rational_part})"
        return f"AlgebraicValue({self.rational_part} + {self.radical_coeff}*sqrt({self.radicand}))"

    def __str__(self):
        if self.is_rational:
            return str(self.rational_part)
        return f"{self.rational_part} + {self.radical_coeff}*sqrt({self.radicand})"

    def to_dict(self) -> dict:
        return {"a": _rat_dict(self.rational_part),
                "b": _rat_dict(self.radical_coeff),
                "c": _rat_dict(self.radicand)}


def _rat_dict(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


# ---------------------------------------------------------------------------
# critical powers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPowers:
    n: int
    p_c: AlgebraicValue
    p_conf: Fraction
    p_H1: Optional[Fraction]  # None (= +inf) in dimension 2

    def strauss_residual(self) -> AlgebraicValue:
        """(n-1)p^2 - (n+1)p - 2 evaluated exactly at p_c."""
        p = self.p_c
        return (self.n - 1) * p * p - (self.n + 1) * p - 2


def _check_dimension(n, minimum):
    if not isinstance(n, int) or isinstance(n, bool):
        raise DomainError(f"dimension must be an integer, got {n!r}")
    if n < minimum:
        raise DomainError(f"dimension n={n} < {minimum}")


def energy_critical_power(n: int) -> Fraction:
    """p_H1 = 1 + 4/(n-2)."""
    _check_dimension(n, 3)
    return 1 + Fraction(4, n - 2)


def critical_powers(n: int) -> CriticalPowers:
    """Strauss exponent p_c, conformal power and energy-critical power."""
    _check_dimension(n, 2)
    # positive root of (n-1)p^2 - (n+1)p - 2 = 0
    disc = (n + 1) ** 2 + 8 * (n - 1)
    p_c = AlgebraicValue(Fraction(n + 1, 2 * (n - 1)), Fraction(1, 2 * (n - 1)), disc)
    p_conf = 1 + Fraction(4, n - 1)
    p_H1 = energy_critical_power(n) if n > 2 else None
    return CriticalPowers(n, p_c, p_conf, p_H1)


def sobolev_critical(n: int, p: RationalLike) -> Fraction:
    """Scale-critical regularity s_c = n/2 - 2/(p-1)."""
    p = as_rational(p)
    if p <= 1:
        raise DomainError(f"p={p} must exceed 1")
    return Fraction(n, 2) - 2 / (p - 1)


def _require_supercritical(n: int, p: Fraction) -> None:
    p_H1 = energy_critical_power(n)
    if p <= p_H1:
        raise OutOfScopeError(f"p={p} is not energy supercritical in dimension {n} "
                              f"(requires p > p_H1 = {p_H1})")


def smoothness_floor(n: int, p: RationalLike) -> Fraction:
    """s_0 = 1 - max(2-p, 0)/(n-2), defined for p > p_H1."""
    _check_dimension(n, 3)
    p = as_rational(p)
    _require_supercritical(n, p)
    return 1 - max(2 - p, ZERO) / (n - 2)


# ---------------------------------------------------------------------------
# admissibility predicates
# ---------------------------------------------------------------------------

def _check_inverse(*inv):
    for x in inv:
        if x < 0:
            raise DomainError(f"inverse exponent {x} is negative")


def is_sigma_admissible(inv_q: RationalLike, inv_r: RationalLike, sigma: RationalLike) -> bool:
    """(q, r) with q, r in [2, inf], (q, r, sigma) != (2, inf, 1) and
    1/q <= sigma (1/2 - 1/r)."""
    inv_q, inv_r, sigma = as_rational(inv_q), as_rational(inv_r), as_rational(sigma)
    _check_inverse(inv_q, inv_r)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if not (inv_q <= HALF and inv_r <= HALF):
        return False
    if inv_q == HALF and inv_r == 0 and sigma == 1:
        return False
    return inv_q <= sigma * (HALF - inv_r)


def is_sigma_acceptable(inv_q: RationalLike, inv_r: RationalLike, sigma: RationalLike) -> bool:
    """q in [1, inf), r in [2, inf] with 1/q < 2 sigma (1/2 - 1/r),
    or (q, r) = (inf, 2)."""
    inv_q, inv_r, sigma = as_rational(inv_q), as_rational(inv_r), as_rational(sigma)
    _check_inverse(inv_q, inv_r)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if inv_q == 0 and inv_r == HALF:
        return True
    if not (0 < inv_q <= 1 and inv_r <= HALF):
        return False
    return inv_q < 2 * sigma * (HALF - inv_r)


@dataclass(frozen=True)
class ChainVerdict:
    """Outcome of one exact inequality.

    ``relation`` is ``"le"``, ``"lt"``, ``"eq"`` or ``"eq_lt1"`` (an equality
    whose common value must also be below one).  ``margin`` is always
    ``rhs - lhs``.
    """

    inequality_id: str
    lhs: Union[Fraction, AlgebraicValue]
    rhs: Union[Fraction, AlgebraicValue]
    holds: bool
    margin: Union[Fraction, AlgebraicValue]
    relation: str = "le"

    def to_dict(self) -> dict:
        return {"id": self.inequality_id, "relation": self.relation,
                "lhs": _json_value(self.lhs), "rhs": _json_value(self.rhs),
                "margin": _json_value(self.margin), "holds": self.holds}


def _verdict(label, lhs, rhs, relation="le") -> ChainVerdict:
    if relation == "le":
        holds = lhs <= rhs
    elif relation == "lt":
        holds = lhs < rhs
    elif relation == "eq":
        holds = lhs == rhs
    else:
        raise ValueError(relation)
    return ChainVerdict(label, lhs, rhs, bool(holds), rhs - lhs, relation)


def check_foschi(inv_q, inv_r, inv_qt, inv_rt, sigma) -> list[ChainVerdict]:
    """The three exact conditions on two pairs for the frequency-localised
    inhomogeneous estimate."""
    inv_q, inv_r, inv_qt, inv_rt, sigma = map(as_rational, (inv_q, inv_r, inv_qt, inv_rt, sigma))
    for x in (inv_q, inv_r, inv_qt, inv_rt):
        if not 0 <= x <= 1:
            raise DomainError(f"inverse exponent {x} outside [0, 1]")
    lhs = inv_q + inv_qt
    rhs = sigma * (1 - inv_r - inv_rt)
    first = ChainVerdict("foschi_scaling", lhs, rhs, bool(lhs == rhs and lhs < 1),
                         rhs - lhs, "eq_lt1")
    return [
        first,
        _verdict("foschi_r_vs_rtilde", (sigma - 1) * inv_r, sigma * inv_rt),
        _verdict("foschi_rtilde_vs_r", (sigma - 1) * inv_rt, sigma * inv_r),
    ]


# ---------------------------------------------------------------------------
# exponent profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentProfile:
    """All exponents of the key linear estimate for one (n, p).

    Case ``"C1"`` covers p_H1 < p < 2 (only possible for n > 6); case
    ``"C2"`` covers p >= 2.  The auxiliary Foschi pairs are set in C1 only.
    """

    n: int
    p: Fraction
    sigma: Fraction
    s_c: Fraction
    s_0: Fraction
    case: str
    inv_q: Fraction
    inv_r: Fraction
    inv_q0: Fraction
    inv_r0: Fraction
    inv_q1: Fraction
    inv_r1: Fraction
    inv_qt: Optional[Fraction] = None
    inv_r_alpha: Optional[Fraction] = None
    inv_rt_beta: Optional[Fraction] = None

    @property
    def s_gap(self) -> Fraction:
        """Regularity s_c - s_0 of the second X_T component."""
        return self.s_c - self.s_0

    @property
    def inv_q1_prime(self) -> Fraction:
        return 1 - self.inv_q1

    @property
    def inv_r1_prime(self) -> Fraction:
        return 1 - self.inv_r1

    def to_dict(self) -> dict:
        out = {"n": self.n, "case": self.case}
        for name in ("p", "sigma", "s_c", "s_0", "inv_q", "inv_r", "inv_q0", "inv_r0",
                     "inv_q1", "inv_r1", "inv_qt", "inv_r_alpha", "inv_rt_beta"):
            value = getattr(self, name)
            out[name] = None if value is None else _rat_dict(value)
        out["s_gap"] = _rat_dict(self.s_gap)
        return out


def _build_profile(n: int, p: Fraction) -> ExponentProfile:
    s_c = sobolev_critical(n, p)
    sigma = Fraction(n - 1, 2)
    if p < 2:
        # p_H1 >= 2 whenever n <= 6, so n > 6 holds here automatically
        case = "C1"
        inv_q = inv_q0 = HALF
        inv_r0 = Fraction(n - 5, 2 * n) + Fraction(1, n - 2) - p / (n * (n - 2))
        inv_r = (2 / (p - 1) - HALF) / n
        s_0 = Fraction(n, 2) - inv_q0 - n * inv_r0
    else:
        case = "C2"
        inv_q = inv_q0 = 1 / p
        inv_r = (2 / (p - 1) - 1 / p) / n
        inv_r0 = HALF - (1 + 1 / p) / n
        s_0 = ONE
    inv_q1 = (p - 1) * inv_q + inv_q0
    inv_r1 = (p - 1) * inv_r + inv_r0
    aux = {}
    if case == "C1":
        beta = (n - 4 + p) / (2 * (n - 2))
        aux = dict(inv_qt=1 - inv_q1, inv_rt_beta=beta,
                   inv_r_alpha=Fraction(n - 3, n - 1) * beta)
    return ExponentProfile(n=n, p=p, sigma=sigma, s_c=s_c, s_0=s_0, case=case,
                           inv_q=inv_q, inv_r=inv_r, inv_q0=inv_q0, inv_r0=inv_r0,
                           inv_q1=inv_q1, inv_r1=inv_r1, **aux)


def exponent_profile(n: int, p: RationalLike) -> ExponentProfile:
    """Exponents of case (C1) or (C2) together with (q1, r1).

    Raises OutOfScopeError for p <= p_H1 and SmoothnessGapError when
    p <= s_c - s_0.
    """
    _check_dimension(n, 4)
    p = as_rational(p)
    _require_supercritical(n, p)
    prof = _build_profile(n, p)
    if not p > prof.s_gap:
        rng = admissible_range(n)
        raise SmoothnessGapError(
            f"p={p} violates p > s_c - s_0 = {prof.s_gap} in dimension {n}; "
            f"excluded interval [a, b] = [{rng.a}, {rng.b}]",
            n=n, p=p, interval=(rng.a, rng.b))
    return prof


# ---------------------------------------------------------------------------
# admissible range
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RangeReport:
    """Open intervals of admissible p; ``None`` as an upper end means +inf."""

    n: int
    intervals: tuple
    a: Optional[AlgebraicValue] = None
    b: Optional[AlgebraicValue] = None

    def contains(self, p: RationalLike) -> bool:
        p = as_rational(p)
        for lo, hi in self.intervals:
            if lo < p and (hi is None or p < hi):
                return True
        return False

    def to_dict(self) -> dict:
        return {"n": self.n,
                "intervals": [[_json_value(lo), None if hi is None else _json_value(hi)]
                              for lo, hi in self.intervals],
                "a": None if self.a is None else self.a.to_dict(),
                "b": None if self.b is None else self.b.to_dict()}


def admissible_range(n: int) -> RangeReport:
    """Admissible powers p > p_H1 satisfying p > s_c - s_0."""
    _check_dimension(n, 4)
    p_H1 = AlgebraicValue(energy_critical_power(n))
    rad_a = (n * n - 6 * n + 10) ** 2 - 32 * (n - 1) * (n - 2)
    rad_b = (n - 4) ** 2 - 32
    if rad_a < 0 or rad_b < 0:
        return RangeReport(n, ((p_H1, None),))
    a = AlgebraicValue(Fraction(n * n - 2 * n + 6, 4 * (n - 1)), Fraction(-1, 4 * (n - 1)), rad_a)
    b = AlgebraicValue(Fraction(n, 4), Fraction(1, 4), rad_b)
    return RangeReport(n, ((p_H1, a), (b, None)), a=a, b=b)


# ---------------------------------------------------------------------------
# inequality chain behind the key linear estimate
# ---------------------------------------------------------------------------

def _H(n: int, p: Fraction) -> Fraction:
    return (p - 2) / (n - 2) + 2 / (p - 1) - Fraction(n - 2, 2)


def verify_lemma_chain(n: int, p: RationalLike) -> list[ChainVerdict]:
    """Every named inequality and identity used by the key linear estimate."""
    _check_dimension(n, 4)
    p = as_rational(p)
    _require_supercritical(n, p)
    prof = _build_profile(n, p)
    sigma = prof.sigma
    p_H1 = energy_critical_power(n)
    out = [
        _verdict("scaling_identity", Fraction(n, 2) - prof.inv_q - n * prof.inv_r, prof.s_c, "eq"),
        _verdict("q1_identity", prof.inv_q1, (p - 1) * prof.inv_q + prof.inv_q0, "eq"),
        _verdict("r1_identity", prof.inv_r1, (p - 1) * prof.inv_r + prof.inv_r0, "eq"),
        _verdict("s0_closed_form", prof.s_0, 1 - max(2 - p, ZERO) / (n - 2), "eq"),
        _verdict("r_ge_r0", prof.inv_r, prof.inv_r0),
        _verdict("inv_r_nonnegative", ZERO, prof.inv_r),
    ]
    if prof.case == "C1":
        h_end = max(_H(n, p_H1), _H(n, Fraction(2)))
        edge = Fraction(n - 3, 2 * (n - 1))
        r0_at_1 = Fraction(2 * n - 5, 2 * n) - Fraction(n - 4, 2 * (n - 2)) - Fraction(1, n * (n - 2))
        margin_acc = prof.inv_qt - 2 * sigma * (HALF - prof.inv_rt_beta)
        out += [
            _verdict("H_endpoint_max", h_end, ZERO),
            _verdict("H_at_p", _H(n, p), ZERO),
            _verdict("r0_at_p1_bound", r0_at_1, edge),
            _verdict("n2_minus_7n_plus_8", ZERO, Fraction(n * n - 7 * n + 8)),
            _verdict("r0_decreasing_bound", prof.inv_r0, r0_at_1),
            _verdict("admissible_q_r", prof.inv_q, sigma * (HALF - prof.inv_r)),
            _verdict("admissible_q0_r0", prof.inv_q0, sigma * (HALF - prof.inv_r0)),
            _verdict("r1_prime_formula", 1 - prof.inv_r1, prof.inv_rt_beta, "eq"),
            _verdict("acceptable_2_ralpha", HALF, 2 * sigma * (HALF - prof.inv_r_alpha), "lt"),
            _verdict("acceptability_margin", margin_acc, ZERO, "lt"),
            _verdict("acceptability_margin_closed_form", margin_acc,
                     -(2 - p) / (2 * (n - 2)), "eq"),
            _verdict("r0_ge_ralpha", prof.inv_r0, prof.inv_r_alpha),
            _verdict("r0_ge_ralpha_threshold", 1 + Fraction(4, n + 1), p),
        ]
        out += check_foschi(HALF, prof.inv_r_alpha, prof.inv_qt, prof.inv_rt_beta, sigma)
        out.append(_verdict("foschi_value_closed_form", HALF + prof.inv_qt, (3 - p) / 2, "eq"))
    else:
        out += [
            _verdict("c2_first", 1 / p, sigma * (HALF - prof.inv_r0)),
            _verdict("c2_first_threshold", Fraction(n + 1, n - 1), p),
            _verdict("c2_second", sigma * (HALF - prof.inv_r0), sigma * (HALF - prof.inv_r)),
            _verdict("c2_second_threshold", Fraction(n + 2, n - 2), p),
            _verdict("q1_prime_infinite", prof.inv_q1_prime, ZERO, "eq"),
            _verdict("r1_prime_two", prof.inv_r1_prime, HALF, "eq"),
            _verdict("admissible_q_r", prof.inv_q, sigma * (HALF - prof.inv_r)),
            _verdict("admissible_q0_r0", prof.inv_q0, sigma * (HALF - prof.inv_r0)),
        ]
    return out


def smoothness_index(n: int, p: RationalLike) -> int:
    """k = floor(s_c - s_0), the differentiability demanded of a general
    nonlinearity."""
    _check_dimension(n, 4)
    p = as_rational(p)
    _require_supercritical(n, p)
    gap = sobolev_critical(n, p) - smoothness_floor(n, p)
    if not p > gap:
        rng = admissible_range(n)
        raise SmoothnessGapError(f"p={p} <= s_c - s_0 = {gap}", n=n, p=p,
                                 interval=(rng.a, rng.b))
    return math.floor(gap)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _json_value(x):
    if x is None:
        return None
    if isinstance(x, AlgebraicValue):
        return x.to_dict()
    if isinstance(x, (int, Fraction)):
        return _rat_dict(Fraction(x))
    raise TypeError(type(x))


def to_json(obj) -> dict:
    """JSON-ready dict for a profile, critical powers, range report or verdict."""
    if isinstance(obj, CriticalPowers):
        return {"n": obj.n, "p_c": obj.p_c.to_dict(), "p_conf": _rat_dict(obj.p_conf),
                "p_H1": None if obj.p_H1 is None else _rat_dict(obj.p_H1)}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, (list, tuple)):
        return [to_json(o) for o in obj]
    return _json_value(obj)


def from_json_rational(d: dict) -> Fraction:
    return Fraction(d["num"], d["den"])


def from_json_algebraic(d: dict) -> AlgebraicValue:
    return AlgebraicValue(from_json_rational(d["a"]), from_json_rational(d["b"]),
                          from_json_rational(d["c"]))


SWEEP_COLUMNS = ["n", "p_num", "p_den", "case", "s_c", "s_0", "gap_ok", "chain_ok", "failed"]


def sweep_rows(ns: Iterable[int], ps: Sequence[RationalLike]):
    """Yield one CSV row per (n, p) with the case, exponents and verdicts."""
    for n in ns:
        for p in ps:
            p = as_rational(p)
            try:
                chain = verify_lemma_chain(n, p)
            except OutOfScopeError:
                continue
            prof = _build_profile(n, p)
            failed = [v.inequality_id for v in chain if not v.holds]
            yield {"n": n, "p_num": p.numerator, "p_den": p.denominator, "case": prof.case,
                   "s_c": str(prof.s_c), "s_0": str(prof.s_0),
                   "gap_ok": int(p > prof.s_gap), "chain_ok": int(not failed),
                   "failed": ";".join(failed)}


def write_sweep_csv(rows, stream=None) -> str:
    buf = stream if stream is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue() if stream is None else ""
