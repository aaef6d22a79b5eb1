class AmalgamError(Exception):
    """Base class for all library errors."""


class UniverseMismatch(AmalgamError, ValueError):
    pass


class NotAnEmbedding(AmalgamError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Inadmissible(AmalgamError):
    """The theory is outside the cases the constructor is proven for.

    ``clause`` names the first failed admissibility clause; callers are
    expected to fall back to the oracle.
    """

    def __init__(self, clause: str, message: str = ""):
        super().__init__(message or f"theory is inadmissible: clause {clause} fails")
        self.clause = clause


class VerificationFailed(AmalgamError):
    def __init__(self, report, message: str = "amalgam failed verification"):
        super().__init__(f"{message}: {report}")
        self.report = report


class NotAPosetExtension(AmalgamError):
    pass


class NotASuperamalgam(AmalgamError):
    pass


class NotAPartialOrder(AmalgamError):
    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class NotAPoset(NotAPartialOrder):
    pass


class TheoryRequiresTransitivity(AmalgamError):
    pass


class NotIsotone(AmalgamError):
    def __init__(self, x, y):
        super().__init__(f"operator is not isotone: {x} <= {y} but images are not ordered")
        self.witness = (x, y)


class NotExtensive(AmalgamError):
    def __init__(self, x):
        super().__init__(f"operator is not extensive at {x}")
        self.witness = (x,)


class NotContractive(AmalgamError):
    def __init__(self, x):
        super().__init__(f"operator is not contractive at {x}")
        self.witness = (x,)


class TimeBudgetExceeded(AmalgamError):
    def __init__(self, nodes: int, seconds: float):
        super().__init__(f"time budget of {seconds}s exceeded after {nodes} nodes")
        self.nodes = nodes


class SizeBoundExceeded(AmalgamError, ValueError):
    pass


class UnknownFixture(AmalgamError, KeyError):
    pass


class InvalidInput(AmalgamError, ValueError):
    """A documented precondition does not hold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
