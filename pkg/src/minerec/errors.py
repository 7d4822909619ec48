"""Error types shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP layer
and the web client can switch on codes instead of prose.
"""


class MinerecError(Exception):
    """Base class; ``code`` is the wire-format error identifier."""

    code = "InternalError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class MalformedXml(MinerecError):
    code = "MalformedXml"


class MissingActivity(MinerecError):
    code = "MissingActivity"


class MissingTimestamp(MinerecError):
    code = "MissingTimestamp"


class EmptyLog(MinerecError):
    code = "EmptyLog"


class LengthMismatch(MinerecError):
    code = "LengthMismatch"


class TooFewSamples(MinerecError):
    code = "TooFewSamples"


class NonFiniteInput(MinerecError):
    code = "NonFiniteInput"


class NotEnabled(MinerecError):
    code = "NotEnabled"


class UnsupportedAlgorithm(MinerecError):
    code = "UnsupportedAlgorithm"


class DiscoveryFailure(MinerecError):
    code = "DiscoveryFailure"


class SchemaMismatch(MinerecError):
    code = "SchemaMismatch"


class UnfittedModel(MinerecError):
    code = "UnfittedModel"


class AllZeroWeights(MinerecError):
    code = "AllZeroWeights"


class InvalidWeights(MinerecError):
    code = "InvalidWeights"


class InvalidMeasure(MinerecError):
    code = "InvalidMeasure"


class UnknownLog(MinerecError):
    code = "UnknownLog"


class UnknownRecommendation(MinerecError):
    code = "UnknownRecommendation"
