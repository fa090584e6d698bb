"""
Truncation-analysis result models
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from gcdkit.core.constants import CcdfKind, CcdfMethod


class RankCount(BaseModel):
    """Exact count of partial patterns no heavier than the true one; `capped` means ">= value\""""

    value: int
    capped: bool = False


class SaddlepointEval(BaseModel):
    """Saddlepoint estimate of the rank count D(r_P)"""

    s_hat: float
    kappa: float
    kappa1: float
    kappa2: float
    d_estimate: float = Field(ge=0)
    boundary: bool = Field(
        default=False, description="No interior saddlepoint; d_estimate is exact"
    )


class CcdfCurve(BaseModel):
    """Monte Carlo estimate of P{X > threshold}"""

    kind: CcdfKind
    method: Optional[CcdfMethod] = None  # only meaningful for kind=D
    thresholds: List[float]
    probabilities: List[float]
    trials: int
    snr: Optional[float] = None
    k: int

    def rows(self) -> List[dict]:
        """One CSV row per threshold"""
        method = self.method.value if self.method else ""
        return [
            {
                "threshold": t,
                "probability": p,
                "trials": self.trials,
                "snr": "" if self.snr is None else self.snr,
                "kind": self.kind.value,
                "method": method,
            }
            for t, p in zip(self.thresholds, self.probabilities)
        ]
