"""Exception hierarchy shared by the whole codec."""


class CodecError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(CodecError):
    """A caller broke a documented precondition."""


class Y4MParseError(CodecError):
    """Malformed Y4M syntax. Carries the byte offset of the first bad byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnsupportedFormatError(CodecError):
    """Input is valid Y4M but uses a layout this codec does not handle."""


class TruncatedStreamError(CodecError):
    """Input ended mid-structure. Carries expected/actual byte counts."""

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(f"{message}: expected {expected} bytes, got {actual}")
        self.expected = expected
        self.actual = actual


class CorruptGridError(CodecError):
    """A token grid violates its invariants (decoder bug or corrupt data)."""


class CorruptStreamError(CodecError):
    """A coded byte stream cannot be decoded to the promised symbol count."""


class WeightFormatError(CodecError):
    """A model weight file is malformed or inconsistent with its config."""


class ContainerFormatError(CodecError):
    """A compressed video container is malformed or has a bad version."""


class ModelHashMismatchError(CodecError):
    """Supplied weights do not match the hash recorded in the container."""
