"""Exception hierarchy shared by every module."""


class AuthLabError(Exception):
    """Base class for all errors raised by authlab."""


class CurveError(AuthLabError):
    """Curve parameters violate a group invariant."""


class InvalidPoint(AuthLabError):
    """A point is not on the configured curve (or is forbidden here)."""


class ScalarDegenerate(AuthLabError):
    """A scalar reduced to zero modulo the group order."""


class MalformedEncoding(AuthLabError):
    """Bytes or a wire line do not follow the expected encoding."""


class BadUsername(AuthLabError):
    """Username or realm outside the [A-Za-z0-9._-]{1,64} charset."""


class ServerAuthFailed(AuthLabError):
    """The client rejected the server's challenge (h1 mismatch)."""


class UserAuthFailed(AuthLabError):
    """The server rejected the client's response (h2 mismatch)."""


class SessionMismatch(AuthLabError):
    """A response does not belong to the server session it was checked against."""


class UnknownUser(AuthLabError):
    pass


class DuplicateUser(AuthLabError):
    pass


class FormatError(AuthLabError):
    """A verifier store or dictionary file is malformed."""


class Rejected(AuthLabError):
    """The server answered with ``REJECT <code>``."""

    def __init__(self, code):
        super().__init__(code)
        self.code = code


class ConfigError(AuthLabError):
    """Inconsistent configuration, e.g. a store built for another curve."""
