"""Exception hierarchy shared by every pipeline stage.

Each class carries an ``exit_code`` used by the command line front end:
2 for data/period failures, 3 for extraction failures, 4 for failed
verification.
"""


class KleinianError(Exception):
    exit_code = 2


# numerics
class NotPositiveDefinite(KleinianError):
    pass


class ReconstructionFailed(KleinianError):
    pass


# newforms
class NonIntegralLeadingExponent(KleinianError):
    pass


class ParseError(KleinianError):
    pass


class OrbitNotFound(ParseError):
    pass


class InvariantViolation(KleinianError):
    pass


class NetworkError(KleinianError):
    pass


class UnsupportedOrbit(KleinianError):
    pass


class InsufficientTerms(KleinianError):
    pass


# periods
class RankDeficient(KleinianError):
    pass


class NonIntegralCoordinate(KleinianError):
    pass


class NoPolarizationFound(KleinianError):
    pass


class DegenerateForm(KleinianError):
    pass


class OrientationUnfixable(KleinianError):
    pass


# theta / kleinian
class NearThetaDivisor(KleinianError):
    pass


class MissingQuasiPeriods(KleinianError):
    pass


# mockform
class PoleOnHorocycle(KleinianError):
    exit_code = 3


class InconsistentExtraction(KleinianError):
    exit_code = 3


class InsufficientPrecision(KleinianError):
    exit_code = 3


class VerificationFailed(KleinianError):
    exit_code = 4
