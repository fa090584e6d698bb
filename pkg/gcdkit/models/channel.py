"""
Channel description model
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from gcdkit.core.constants import ChannelKind
from gcdkit.core.exceptions import InvalidChannel


class ChannelSpec(BaseModel):
    """
    A memoryless binary-input channel.

    Exactly one parameter is populated: `sigma2` for AWGN, `p` for BSC. Ranges are
    checked by `check()` so that decoding entry points raise InvalidChannel.
    """

    model_config = ConfigDict(frozen=True)

    kind: ChannelKind
    sigma2: Optional[float] = Field(default=None, description="AWGN noise variance")
    p: Optional[float] = Field(default=None, description="BSC crossover probability")

    @classmethod
    def awgn(cls, sigma2: float) -> "ChannelSpec":
        return cls(kind=ChannelKind.AWGN, sigma2=sigma2)

    @classmethod
    def bsc(cls, p: float) -> "ChannelSpec":
        return cls(kind=ChannelKind.BSC, p=p)

    @classmethod
    def at_snr(cls, snr_db: float, rate: float) -> "ChannelSpec":
        """AWGN channel at Eb/N0 = snr_db for a code of the given rate"""
        return cls.awgn(sigma2_from_snr(snr_db, rate))

    def check(self) -> "ChannelSpec":
        if self.kind == ChannelKind.AWGN:
            if self.p is not None:
                raise InvalidChannel("AWGN channel must not set p")
            if self.sigma2 is None or not math.isfinite(self.sigma2) or self.sigma2 <= 0:
                raise InvalidChannel(f"AWGN needs sigma2 > 0, got {self.sigma2}")
        else:
            if self.sigma2 is not None:
                raise InvalidChannel("BSC channel must not set sigma2")
            if self.p is None or not 0 < self.p < 0.5:
                raise InvalidChannel(f"BSC needs 0 < p < 1/2, got {self.p}")
        return self

    @property
    def label(self) -> str:
        if self.kind == ChannelKind.AWGN:
            return f"awgn(sigma2={self.sigma2:.6g})"
        return f"bsc(p={self.p:.6g})"


def sigma2_from_snr(snr_db: float, rate: float) -> float:
    """Noise variance for unit-energy BPSK at Eb/N0 = snr_db: 1 / (2 R 10^(snr/10))"""
    if not 0 < rate <= 1:
        raise InvalidChannel(f"code rate must lie in (0, 1], got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0))
