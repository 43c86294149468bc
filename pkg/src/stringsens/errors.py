"""Exception hierarchy shared across the package."""


class StringSensError(Exception):
    """Base class for all analysis errors raised by this package."""


class DomainError(StringSensError, ValueError):
    """Input outside an operation's mathematical domain (zero polynomial
    where a divisor is needed, roots of a constant, non-conjugate root
    data, a Laurent center that is not a pole, ...)."""


class NearPoleError(StringSensError, ArithmeticError):
    """Evaluation requested at, or within guard distance of, a pole."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class ConditioningError(StringSensError, ArithmeticError):
    """A closed-form evaluation path has lost too much precision; the
    caller should fall back to a better-conditioned method."""


class ClosedLoopPoleError(StringSensError, ArithmeticError):
    """The network sensitivity is being evaluated at (numerically) a
    closed-loop pole: a pivot or product factor vanished."""


class PremiseError(StringSensError, ValueError):
    """A precondition of an analysis (gain-interval stability, relative
    degree) does not hold, so the result is not asserted."""

    def __init__(self, message, premise=None):
        super().__init__(message)
        self.premise = premise


class ConfigError(StringSensError, ValueError):
    """Malformed configuration input (unknown key, bad value, missing
    required entry)."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
