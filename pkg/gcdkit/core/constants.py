"""
Decoder kinds, stop reasons and other fixed vocabulary
"""

from enum import Enum


class ChannelKind(str, Enum):
    """Supported memoryless channels"""

    AWGN = "awgn"  # BPSK over additive white Gaussian noise
    BSC = "bsc"  # binary symmetric channel


class DecoderKind(str, Enum):
    """
    Decoders the experiment runner and CLI can drive.

    The first five operate on any binary linear code; the polar ones need a PolarCode.
    """

    GCD = "gcd"
    GENIE_GCD = "genie_gcd"  # GCD that also stops once the true partial pattern is re-encoded
    PARALLEL_GCD = "parallel_gcd"
    GND = "gnd"
    ESD = "esd"
    SCL = "scl"
    SCL_GCD = "scl_gcd"

    @property
    def is_polar(self) -> bool:
        return self in (DecoderKind.SCL, DecoderKind.SCL_GCD)


class StopReason(str, Enum):
    """Why a decode loop terminated"""

    OPTIMAL = "optimal"  # stopping certificate: next pattern cannot beat the list
    L_MAX = "l_max"  # query budget reached
    TAU_S = "tau_s"  # soft-weight radius exceeded
    TAU_P = "tau_p"  # accumulated posterior reached 1 - tau_p
    EXHAUSTED = "exhausted"  # every pattern was emitted
    GENIE = "genie"  # true partial pattern re-encoded


class LeafMode(str, Enum):
    """Role of a node in a pruned polar decoding tree"""

    INTERNAL = "internal"
    GCD_LEAF = "gcd_leaf"
    ESD_LEAF = "esd_leaf"


class CcdfKind(str, Enum):
    D = "D"  # rank of the true partial pattern
    GAMMA = "Gamma"  # soft weight of the true partial pattern


class CcdfMethod(str, Enum):
    EXACT = "exact"
    SADDLEPOINT = "saddlepoint"


class CodeKind(str, Enum):
    """Code families the experiment config can construct"""

    RM = "rm"
    HAMMING = "hamming"
    RANDOM = "random"
    POLAR = "polar"
    FILE = "file"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"


# CRC-11 used with the NR-style polar constructions: x^11 + x^10 + x^9 + x^5 + 1
CRC11_POLY = "111000100001"

# Columns of the CCDF CSV, in order
CCDF_COLUMNS = ("threshold", "probability", "trials", "snr", "kind", "method")

# Columns of the experiment summary CSV, in order
SUMMARY_COLUMNS = (
    "decoder",
    "code",
    "channel",
    "point",
    "frames",
    "frame_errors",
    "fer",
    "mean_queries",
    "p50_queries",
    "p99_queries",
    "mean_emissions",
    "mean_time_steps",
    "true_not_queried",
    "stop_reasons",
)
