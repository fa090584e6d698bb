"""
Experiment configuration and summary records
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gcdkit.core.config import settings
from gcdkit.core.constants import ChannelKind, CodeKind, DecoderKind
from gcdkit.models.decoding import TruncationConfig


class CodeSource(BaseModel):
    """
    Where the code comes from: a construction with its parameters, or a code file.

    - rm: m, r
    - hamming: m
    - random: n, k, seed
    - polar: n, k, optional crc ("0xE21" or a binary string), optional reliability_file
      and realloc (bit reallocation count)
    - file: path (one matrix for H, or G then H)
    """

    model_config = ConfigDict(extra="forbid")

    kind: CodeKind
    m: Optional[int] = Field(default=None, ge=0)
    r: Optional[int] = Field(default=None, ge=0)
    n: Optional[int] = Field(default=None, ge=1)
    k: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None
    crc: Optional[str] = None
    reliability_file: Optional[str] = None
    realloc: int = Field(default=0, ge=0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def check_parameters(self) -> "CodeSource":
        required = {
            CodeKind.RM: ("m", "r"),
            CodeKind.HAMMING: ("m",),
            CodeKind.RANDOM: ("n", "k", "seed"),
            CodeKind.POLAR: ("n", "k"),
            CodeKind.FILE: ("path",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} code needs {', '.join(missing)}")
        if self.kind != CodeKind.FILE and self.path is not None:
            raise ValueError("path is only valid for kind='file'")
        if self.kind == CodeKind.FILE and any(
            getattr(self, name) is not None for name in ("m", "r", "n", "k")
        ):
            raise ValueError("a code file cannot also carry construction parameters")
        if self.kind != CodeKind.POLAR and (self.crc or self.reliability_file or self.realloc):
            raise ValueError("crc, reliability_file and realloc apply to polar codes only")
        return self


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo experiment: a code, a channel with its operating points and a decoder.

    `points` are Eb/N0 values in dB for AWGN and crossover probabilities for BSC. Each
    point runs `frames` frames when set, otherwise until `target_errors` frame errors or
    `max_frames` frames.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    code: CodeSource
    channel: ChannelKind = ChannelKind.AWGN
    points: List[float] = Field(min_length=1)
    decoder: DecoderKind = DecoderKind.GCD
    list_size: int = Field(default=settings.DEFAULT_LIST_SIZE, ge=1)
    truncation: TruncationConfig = Field(default_factory=TruncationConfig)
    delta_bits: int = Field(default=0, ge=0, description="Prefix bits of parallel GCD")
    tree_path: Optional[str] = None  # pruned tree for scl_gcd; pruned on the fly when absent
    design_snr: Optional[float] = None  # pruning SNR, defaults to the first point
    prune_trials: int = Field(default=200, ge=1)
    frames: Optional[int] = Field(default=None, ge=1)
    target_errors: int = Field(default=settings.TARGET_ERRORS, ge=1)
    max_frames: int = Field(default=settings.MAX_FRAMES, ge=1)
    seed: int = settings.DEFAULT_SEED

    @field_validator("points")
    @classmethod
    def validate_points(cls, v: List[float]) -> List[float]:
        if len(set(v)) != len(v):
            raise ValueError("points must be distinct")
        return v

    @model_validator(mode="after")
    def check_combination(self) -> "ExperimentConfig":
        if self.channel == ChannelKind.BSC and not all(0 < p < 0.5 for p in self.points):
            raise ValueError("BSC points are crossover probabilities in (0, 1/2)")
        if self.decoder.is_polar and self.code.kind != CodeKind.POLAR:
            raise ValueError(f"decoder {self.decoder.value} needs a polar code")
        if self.tree_path is not None and self.decoder != DecoderKind.SCL_GCD:
            raise ValueError("tree_path is only used by the scl_gcd decoder")
        if self.delta_bits and self.decoder != DecoderKind.PARALLEL_GCD:
            raise ValueError("delta_bits is only used by the parallel_gcd decoder")
        return self


class SummaryRecord(BaseModel):
    """Aggregates of one (decoder, operating point) run"""

    decoder: DecoderKind
    code: str
    channel: ChannelKind
    point: float
    frames: int = 0
    frame_errors: int = 0
    fer: float = 0.0
    mean_queries: float = 0.0
    p50_queries: float = 0.0
    p99_queries: float = 0.0
    mean_emissions: float = 0.0
    mean_time_steps: Optional[float] = None  # polar decoders only
    true_not_queried: int = 0  # frames whose true partial TEP was never re-encoded
    stop_reasons: Dict[str, int] = Field(default_factory=dict)

    def as_row(self) -> dict:
        """Flat CSV row; the stop-reason histogram becomes "reason:count;..." """
        row = self.model_dump(mode="json")
        row["stop_reasons"] = ";".join(f"{k}:{v}" for k, v in sorted(self.stop_reasons.items()))
        if row["mean_time_steps"] is None:
            row["mean_time_steps"] = ""
        return row
