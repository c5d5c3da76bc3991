"""Exception hierarchy shared by every subsystem.

Each concrete error belongs to one of four families so the CLI can map it to
an exit code without knowing the individual classes.
"""


class OblivionError(Exception):
    """Base class for all errors raised by this package."""


class CryptoError(OblivionError):
    """Backend, key, or ciphertext level failure."""


class ProtocolRejection(OblivionError):
    """A protocol participant refused a message."""


class FormatError(OblivionError):
    """Malformed input file or wire message."""


class ScenarioError(OblivionError):
    """A scenario file could not be validated or executed."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + message)


# --- crypto ---------------------------------------------------------------

class InvalidParams(CryptoError):
    pass


class InvalidBit(CryptoError):
    pass


class KeyMismatch(CryptoError):
    pass


class DepthExceeded(CryptoError):
    pass


class WidthTooLarge(CryptoError):
    pass


# --- circuits / files -----------------------------------------------------

class ParseError(FormatError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class TopologyError(FormatError):
    pass


class EncodingError(FormatError):
    pass


class ShapeError(OblivionError):
    pass


class ArityMismatch(ShapeError):
    pass


# --- server / protocol ----------------------------------------------------

class UnknownHandle(OblivionError):
    pass


class UnknownFunc(ProtocolRejection):
    pass


class DuplicateFuncId(OblivionError):
    pass


class SignatureRejected(ProtocolRejection):
    pass


class ServerSignatureInvalid(ProtocolRejection):
    pass


class NotAdministrator(ProtocolRejection):
    pass


class ReplayRejected(ProtocolRejection):
    pass


class ProtocolMismatch(ProtocolRejection):
    """Request made under a protocol the server is not running, or before its setup."""
