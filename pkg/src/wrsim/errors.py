"""Exception hierarchy shared by all wrsim modules."""


class WrsimError(Exception):
    """Base class for every error raised by wrsim."""


class InvalidArgument(WrsimError, ValueError):
    pass


class InsufficientData(WrsimError, ValueError):
    """Series too short for the requested averaging factor or window."""


class EmptyInput(WrsimError, ValueError):
    pass


class NoOverlap(WrsimError, ValueError):
    """The two PPS channels share no epoch."""


class AmbiguousPairing(WrsimError, ValueError):
    """Two pulses map to one epoch; pre-subtract a coarse skew first."""


class OutOfRange(WrsimError, ValueError):
    """A fixed-point asymmetry value does not fit the signed 32-bit range."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class PoleError(OutOfRange):
    """The asymmetry encoding is singular at the requested alpha."""


class EmptyProfile(WrsimError, ValueError):
    pass


class InvalidChain(WrsimError, ValueError):
    """Optical components are not in transmitter-to-receiver order."""


class InvalidSpec(WrsimError, ValueError):
    pass


class IllConditioned(WrsimError, ValueError):
    """The tau span of a curve cannot separate the requested noise types."""


class InvalidScenario(WrsimError, ValueError):
    pass


class LinkFails(WrsimError):
    """The optical budget does not close, so the link cannot lock."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(WrsimError, ValueError):
    """Malformed JSON/CSV input."""
