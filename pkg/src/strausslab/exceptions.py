"""Exception hierarchy shared by all modules."""


class StraussLabError(Exception):
    """Base class for all errors raised by strausslab."""


class DomainError(StraussLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OutOfScopeError(DomainError):
    """The power is not energy supercritical (p <= p_H1)."""


class SmoothnessGapError(DomainError):
    """p <= s_c - s_0, i.e. the power falls in the excluded interval [a, b]."""

    def __init__(self, message, n=None, p=None, interval=None):
        super().__init__(message)
        self.n = n
        self.p = p
        self.interval = interval


class ConfigurationError(StraussLabError, ValueError):
    """Inconsistent configuration detected before any numerics run."""


class TruncationError(StraussLabError):
    """Frequency or spatial truncation exceeded its documented tolerance."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class GridMismatchError(StraussLabError, ValueError):
    """Two fields that must share a grid do not."""


class InequalityFailure(StraussLabError):
    """An exact exponent predicate failed; raised before sampling starts."""

    def __init__(self, verdict):
        super().__init__(f"exact gate failed: {verdict.inequality_id} "
                         f"(lhs={verdict.lhs}, rhs={verdict.rhs})")
        self.verdict = verdict


class CFLError(ConfigurationError):
    """Time step violates the finite-difference stability constraint."""


class WrapAroundError(ConfigurationError):
    """Requested time horizon exceeds the periodic-box wrap-around cap."""
