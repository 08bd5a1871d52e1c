"""Exception types shared across the toolkit.

Every error raised by the library derives from StructsegError so callers
(CLI, service) can convert any failure into a machine-readable report.
"""


class StructsegError(Exception):
    """Base class for all library errors."""


# --- raster_io ---

class MalformedHeader(StructsegError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedDepth(StructsegError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class TruncatedPayload(StructsegError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MalformedMask(StructsegError):
    pass


class IoFailure(StructsegError):
    pass


# --- cubical / morse ---

class EmptyField(StructsegError):
    pass


class OutOfBounds(StructsegError):
    pass


class NotASaddle(StructsegError):
    pass


# --- watershed / family ---

class EmptyThetaList(StructsegError):
    pass


class TooManyBranches(StructsegError):
    pass


# --- prob / segment / metrics ---

class DegenerateSigma(StructsegError):
    pass


class DimensionMismatch(StructsegError):
    pass


class TooFewSamples(StructsegError):
    pass


class EmptyForeground(StructsegError):
    pass


class PatchTooLarge(StructsegError):
    pass


# --- synth ---

class InvalidLevels(StructsegError):
    pass


class InvalidParams(StructsegError):
    pass


# --- proofread ---

class UnknownBranch(StructsegError):
    pass


class NoOpDecision(StructsegError):
    pass
