"""Exception hierarchy shared by every finitemix module."""


class FiniteMixError(Exception):
    """Base class. ``code`` is the machine-readable name printed by the CLI."""

    code = "FiniteMixError"

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class IncidentWeightOverflow(FiniteMixError):
    code = "IncidentWeightOverflow"


class DirectedImbalance(FiniteMixError):
    code = "DirectedImbalance"


class DimensionMismatch(FiniteMixError):
    code = "DimensionMismatch"


class RoughFactor(FiniteMixError):
    """n has a prime factor larger than k + 1."""

    code = "RoughFactor"


class BadK(FiniteMixError):
    code = "BadK"


class NonPowerOfTwo(FiniteMixError):
    code = "NonPowerOfTwo"


class BadGrid(FiniteMixError):
    code = "BadGrid"


class BadFamily(FiniteMixError):
    code = "BadFamily"


class DegreeCapViolation(FiniteMixError):
    """A builder produced a round where some node has more than k neighbours."""

    code = "DegreeCapViolation"


class EmptySequence(FiniteMixError):
    code = "EmptySequence"


class NoConvergence(FiniteMixError):
    """Power iteration hit ``max_iters``; ``estimate`` holds the best result so far."""

    code = "NoConvergence"

    def __init__(self, msg: str, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


class BadSpectrum(FiniteMixError):
    code = "BadSpectrum"


class FormatError(FiniteMixError):
    """Malformed sequence or problem file."""

    code = "FormatError"
