"""Exception hierarchy shared by every skewdh module."""


class SkewDHError(Exception):
    """Base class for all library errors."""


# field-core
class FieldError(SkewDHError, ValueError):
    pass


class NotPrime(FieldError):
    pass


class NotMonic(FieldError):
    pass


class Reducible(FieldError):
    pass


class ParamsMismatch(FieldError):
    pass


class ZeroInverse(FieldError, ZeroDivisionError):
    pass


class TooLarge(FieldError):
    pass


class BadLength(FieldError):
    pass


class CoefficientOutOfRange(FieldError):
    pass


# skew-core
class ZeroActor(SkewDHError, ValueError):
    """phi(c, b) was asked for c = 0."""


class ZeroValue(SkewDHError, ValueError):
    """psi(f, b) was asked where f(b) = 0."""


# tset
class OrbitTooSmall(SkewDHError, ValueError):
    pass


class ConstraintUnsatisfiable(SkewDHError):
    pass


class ZeroDirectionUnavoidable(SkewDHError):
    pass


class NotInOrbit(SkewDHError, ValueError):
    pass


class ContextMismatch(SkewDHError, ValueError):
    pass


# protocol
class ProtocolError(SkewDHError):
    pass


class PkNotInOrbit(ProtocolError, NotInOrbit):
    pass


class DegenerateSession(ProtocolError):
    pass


class WrongRole(ProtocolError):
    pass


class AlreadyTerminated(ProtocolError):
    pass


class MalformedFrame(ProtocolError, ValueError):
    pass


class DigestMismatch(ProtocolError):
    pass


# pke
class DegenerateEncryption(SkewDHError):
    pass


class DegenerateCiphertext(SkewDHError):
    pass


# security games
class OracleError(SkewDHError):
    pass


class TestOnExposedSession(OracleError):
    __test__ = False


class DoubleTest(OracleError):
    pass


class InjectionRefused(OracleError):
    pass


# wire / cli
class NoSuitableOrbit(SkewDHError):
    pass


class ParamFileError(SkewDHError, ValueError):
    pass


class GuardError(SkewDHError):
    pass
