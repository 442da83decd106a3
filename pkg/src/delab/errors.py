"""Exception types raised across the library."""


class DelabError(Exception):
    """Base class for all library-specific failures."""


# parameter validation
class DimensionTooSmall(DelabError):
    pass


class AlphaOutOfRange(DelabError):
    pass


class SOutOfRange(DelabError):
    pass


# closed-form fields and transforms
class NotInExplicitRegime(DelabError):
    pass


class NonpositiveDilation(DelabError):
    pass


class NonpositiveAmplitude(DelabError):
    pass


class SingularPoint(DelabError):
    pass


class OutsideDomain(DelabError):
    pass


class TooCloseToSingularSet(DelabError):
    pass


# grids and solvers
class DomainMismatch(DelabError):
    pass


class WeightNotIntegrable(DelabError):
    pass


class NoConvergence(DelabError):
    pass


# sphere quadratures and identities
class PointNotOnSphere(DelabError):
    pass


class NonFiniteSample(DelabError):
    pass


class AxisOutOfRange(DelabError):
    pass


# minimization and probes
class ZeroDenominator(DelabError):
    pass


class NotConverged(DelabError):
    pass


class DegenerateTrace(DelabError):
    pass


class NonpositiveField(DelabError):
    pass


class NonpositiveValue(DelabError):
    pass


class NonpositiveSamples(DelabError):
    pass


class IllConditionedFit(DelabError):
    pass
