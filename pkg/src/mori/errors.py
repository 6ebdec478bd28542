"""Error taxonomy shared across the package.

Every exception carries a stable ``code`` string so batch tools (the CLI,
stream processors) can report machine-readable diagnostics without parsing
messages.
"""

from __future__ import annotations


class MoriError(Exception):
    """Base class for all package errors."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class MalformedLineError(MoriError):
    code = "MALFORMED_LINE"


class MissingFieldError(MoriError):
    code = "MISSING_FIELD"


class InvalidConfigError(MoriError):
    code = "INVALID_CONFIG"


class EmptyCorpusError(MoriError):
    code = "EMPTY_CORPUS"


class ProviderUnavailableError(MoriError):
    code = "PROVIDER_UNAVAILABLE"


class LengthMismatchError(MoriError):
    code = "LENGTH_MISMATCH"


class TokenizationMismatchError(MoriError):
    code = "TOKENIZATION_MISMATCH"


class NonfiniteLogprobError(MoriError):
    code = "NONFINITE_LOGPROB"


class NonfiniteInputError(MoriError):
    code = "NONFINITE_INPUT"


class EmptyTextError(MoriError):
    code = "EMPTY_TEXT"


class EmptySequenceError(MoriError):
    code = "EMPTY_SEQUENCE"


class EmptyMaskError(MoriError):
    code = "EMPTY_MASK"


class DimMismatchError(MoriError):
    code = "DIM_MISMATCH"


class ZeroVectorError(MoriError):
    code = "ZERO_VECTOR"


class GroupTooSmallError(MoriError):
    code = "GROUP_TOO_SMALL"


class EmptyBatchError(MoriError):
    code = "EMPTY_BATCH"


class CoverageExceedsTopicsError(MoriError):
    code = "COVERAGE_EXCEEDS_TOPICS"


class FixtureDriftError(MoriError):
    code = "FIXTURE_DRIFT"
