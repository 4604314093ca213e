"""Exception hierarchy shared by all conelab modules."""


class ConeLabError(Exception):
    """Base class for every error raised by conelab."""


class DegenerateForm(ConeLabError, ValueError):
    pass


class EvenModulus(ConeLabError, ValueError):
    pass


class NotCoprime(ConeLabError, ValueError):
    pass


class PrincipalCharacter(ConeLabError, ValueError):
    pass


class ZeroDual(ConeLabError, ValueError):
    pass


class BudgetExceeded(ConeLabError, RuntimeError):
    """The requested evaluation would exceed the configured work budget."""


class NotStabilized(ConeLabError, RuntimeWarning):
    """A lifted density did not reach its stop rule before ``k_max``."""


class BadExtents(ConeLabError, ValueError):
    pass


class InvalidCondition(ConeLabError, ValueError):
    """A congruence condition violates F(gamma) = 0 mod L or primitivity."""


class InsufficientGrid(ConeLabError, ValueError):
    pass


class HypothesisViolated(ConeLabError, RuntimeWarning):
    pass


class AsymmetricWeight(ConeLabError, ValueError):
    pass


class ConfigInvalid(ConeLabError, ValueError):
    pass
