"""Exception hierarchy shared across the protocol suite."""


class WakuError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WakuError):
    """Invalid node configuration (bad flag, malformed value, violated
    cross-flag invariant)."""


class StartupError(WakuError):
    """Node failed to start (port bind failure, unmet protocol
    prerequisite, corrupt persisted state)."""


class ProtocolError(WakuError):
    """A peer violated a protocol contract, or a request cannot be issued
    (remote did not advertise the protocol, invalid response)."""


class RequestTimeout(ProtocolError):
    """A request/reply exchange did not complete within its deadline."""
