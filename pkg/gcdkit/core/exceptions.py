"""
Error hierarchy for gcdkit

Every error also derives from the closest builtin so callers may catch either.
"""

from typing import Any, List, Optional


class GcdKitError(Exception):
    """Base class for all gcdkit errors"""


class DimensionMismatch(GcdKitError, ValueError):
    """Operand shapes do not agree"""


class RankDeficient(GcdKitError, ValueError):
    """Parity-check matrix does not have full row rank"""


class InvalidChannel(GcdKitError, ValueError):
    """Channel parameters outside their valid range"""


class InvalidOrder(GcdKitError, ValueError):
    """Reed-Muller order outside 0..m"""


class GenerationFailed(GcdKitError, RuntimeError):
    """Random construction did not reach the required rank within the retry cap"""


class CodeParseError(GcdKitError, ValueError):
    """Malformed matrix or code file"""


class InconsistentCode(GcdKitError, ValueError):
    """Generator and parity-check matrices are not orthogonal"""


class TooLarge(GcdKitError, ValueError):
    """Exhaustive enumeration requested beyond the configured guard"""


class ListTooLarge(GcdKitError, ValueError):
    """List size exceeds the number of codewords"""


class CapacityExceeded(GcdKitError, ValueError):
    """Information plus CRC bits do not fit the code length"""


class TreeFormatError(GcdKitError, ValueError):
    """Malformed pruned-tree file"""


class SearchExhausted(GcdKitError, RuntimeError):
    """
    Fewer than L valid patterns were found within the query budget.

    The partial result is attached so callers can still score the frame.
    """

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


class ConfigError(GcdKitError, ValueError):
    """Invalid experiment configuration, with one diagnostic per failing field"""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        self.fields = fields or []
        details = "".join(f"\n  {line}" for line in self.fields)
        super().__init__(f"{message}{details}")


class ResultsWriteError(GcdKitError, OSError):
    """Results could not be written"""
