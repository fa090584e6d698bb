"""
Decoder configuration and result models
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gcdkit.core.constants import StopReason


class TruncationConfig(BaseModel):
    """
    Early-termination rules for GCD. The first rule to fire stops the decode.

    With every field at its default the decoder is the optimal list decoder.
    """

    model_config = ConfigDict(frozen=True)

    l_max: Optional[int] = Field(default=None, ge=1, description="Query budget; None means 2^K")
    tau_s: Optional[float] = Field(default=None, gt=0, description="Soft-weight search radius")
    tau_p: Optional[float] = Field(
        default=None, gt=0, lt=1, description="Tolerated loss of posterior mass"
    )
    delta: float = Field(
        default=0.0,
        ge=0,
        description="Stopping-rule tolerance: stop once γ(e_P) + delta >= worst (experimental)",
    )

    @property
    def is_default(self) -> bool:
        return self.l_max is None and self.tau_s is None and self.tau_p is None and self.delta == 0


class DecodeResult(BaseModel):
    """
    Output list of a block decoder, lightest first.

    `queries` counts re-encoded (or checked) patterns; `emissions` counts generator pulls
    including the one that triggered the stop.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    codewords: List[np.ndarray] = Field(default_factory=list)
    teps: List[np.ndarray] = Field(default_factory=list)
    weights: List[float] = Field(default_factory=list)
    queries: int = 0
    emissions: int = 0
    stop_reason: StopReason = StopReason.OPTIMAL
    true_rank: Optional[int] = None  # query index at which the true partial TEP was re-encoded
    posterior_mass: float = 0.0

    @property
    def best(self) -> Optional[np.ndarray]:
        return self.codewords[0] if self.codewords else None

    def contains(self, codeword: np.ndarray) -> bool:
        """True when `codeword` is on the list (no list-decoding error)"""
        return any(np.array_equal(c, codeword) for c in self.codewords)
