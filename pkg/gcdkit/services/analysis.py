"""
Truncation-parameter analytics

D(r_P) counts the partial patterns whose soft weight does not exceed that of the true
partial pattern e_P (all-zero codeword sent, so e_P flags the negative LLRs). It
upper-bounds the rank of e_P and drives the l_max truncation loss; Γ(r_P) = γ(e_P)
drives the τs loss.

For a uniformly drawn pattern f, γ(f) - γ(e_P) = Σ W_i with W_i ∈ {0, r_i} equally
likely, hence D = 2^K · P{W <= 0}. The saddlepoint estimate uses the cumulant generating
function κ(s) = Σ log(½ + ½ e^{s r_i}).
"""

import csv
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, erfcx, expit

from gcdkit.core.config import settings
from gcdkit.core.constants import CCDF_COLUMNS, CcdfKind, CcdfMethod
from gcdkit.core.exceptions import ResultsWriteError, TooLarge
from gcdkit.models.analysis import CcdfCurve, RankCount, SaddlepointEval
from gcdkit.models.channel import ChannelSpec
from gcdkit.services.channel import receive_llrs, weight_of
from gcdkit.services.tepgen import TepGenerator
from gcdkit.utils.logger import get_structured_logger

logger = get_structured_logger(__name__)

_LN2 = math.log(2.0)


def gamma_true(r_p: np.ndarray) -> float:
    """Γ(r_P): soft weight of the hard-decision errors under the all-zero convention"""
    r_p = np.asarray(r_p, dtype=np.float64)
    return weight_of(np.abs(r_p), np.flatnonzero(r_p < 0))


def exact_D(r_p: np.ndarray, cap: Optional[int] = None) -> RankCount:
    """
    Count patterns f with γ(f) <= γ(e_P) by ordered enumeration.

    Raises:
        TooLarge: K > EXACT_D_MAX_K and no cap given
    """
    r_p = np.asarray(r_p, dtype=np.float64)
    if cap is None and r_p.size > settings.EXACT_D_MAX_K:
        raise TooLarge(f"exact counting over K={r_p.size} needs a cap")
    target = gamma_true(r_p)
    count = 0
    for tep in TepGenerator(r_p):
        if tep.weight > target:
            break
        count += 1
        if cap is not None and count >= cap:
            return RankCount(value=count, capped=True)
    return RankCount(value=count)


def _log_erfcx(x: float) -> float:
    if x > -25.0:
        return math.log(erfcx(x))
    return x * x + math.log(erfc(x))


class _Cumulants:
    def __init__(self, r: np.ndarray):
        self.r = r
        self.r2 = r * r

    def kappa(self, s: float) -> float:
        return float(np.logaddexp(0.0, s * self.r).sum() - self.r.size * _LN2)

    def kappa1(self, s: float) -> float:
        return float((self.r * expit(s * self.r)).sum())

    def kappa2(self, s: float) -> float:
        sig = expit(s * self.r)
        return float((self.r2 * sig * (1.0 - sig)).sum())


def _bracket(cum: _Cumulants, slope0: float) -> Tuple[float, float]:
    """Expand geometrically from [-1, 0) or (0, 1] until κ' changes sign"""
    step = -1.0 if slope0 > 0 else 1.0
    for _ in range(settings.SADDLEPOINT_MAX_EXPANSIONS):
        if (cum.kappa1(step) > 0) != (slope0 > 0):
            return (step, 0.0) if step < 0 else (0.0, step)
        step *= 2.0
    raise ArithmeticError("saddlepoint bracket expansion did not change sign")


def saddlepoint_D(r_p: np.ndarray) -> SaddlepointEval:
    """
    Saddlepoint estimate D ≈ 2^K · ½ · e^{κ(ŝ)} · erfcx(-ŝ √(κ''(ŝ)/2)), with κ'(ŝ) = 0.

    Without sign changes among the LLRs there is no interior saddlepoint and the count
    is returned exactly: 2^{#zeros} when no LLR is negative, 2^K when none is positive.
    """
    r = np.asarray(r_p, dtype=np.float64)
    k = r.size
    cum = _Cumulants(r)

    if not (r < 0).any() or not (r > 0).any():
        exact = 2.0 ** int((r == 0).sum()) if not (r < 0).any() else 2.0**k
        return SaddlepointEval(
            s_hat=0.0,
            kappa=0.0,
            kappa1=cum.kappa1(0.0),
            kappa2=cum.kappa2(0.0),
            d_estimate=exact,
            boundary=True,
        )

    slope0 = cum.kappa1(0.0)
    if slope0 == 0.0:
        s_hat, lo, hi = 0.0, 0.0, 0.0
    else:
        lo, hi = _bracket(cum, slope0)
        s_hat = brentq(
            cum.kappa1, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500
        )

    # Newton polish, kept only while it stays in the bracket and improves |κ'|
    tol = settings.SADDLEPOINT_ROOT_TOL * float(np.abs(r).sum())
    for _ in range(8):
        slope = cum.kappa1(s_hat)
        if abs(slope) <= tol:
            break
        candidate = s_hat - slope / cum.kappa2(s_hat)
        if not lo <= candidate <= hi or abs(cum.kappa1(candidate)) >= abs(slope):
            break
        s_hat = candidate

    kappa = cum.kappa(s_hat)
    kappa2 = cum.kappa2(s_hat)
    log_d = k * _LN2 - _LN2 + kappa + _log_erfcx(-s_hat * math.sqrt(kappa2 / 2.0))
    d_estimate = math.exp(min(log_d, k * _LN2))
    return SaddlepointEval(
        s_hat=s_hat,
        kappa=kappa,
        kappa1=cum.kappa1(s_hat),
        kappa2=kappa2,
        d_estimate=d_estimate,
    )


def ccdf(
    kind: CcdfKind,
    k: int,
    ch: ChannelSpec,
    thresholds: Sequence[float],
    trials: int,
    seed: int,
    method: CcdfMethod = CcdfMethod.SADDLEPOINT,
    snr: Optional[float] = None,
) -> CcdfCurve:
    """
    Monte Carlo CCDF of D or Γ over K positions of an all-zero transmission.

    Trial t draws its LLRs from default_rng((seed, t)), so curves are reproducible and
    curves at different SNRs share their noise realizations.
    """
    ch.check()
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = sorted(float(t) for t in thresholds)
    cap = None
    if kind == CcdfKind.D and method == CcdfMethod.EXACT:
        finite = [t for t in grid if math.isfinite(t)]
        cap = int(math.floor(max(finite, default=0.0))) + 1

    logger.info(
        "ccdf_started", kind=kind.value, k=k, channel=ch.label, trials=trials, method=method.value
    )
    zeros = np.zeros(k, dtype=np.uint8)
    values = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        r = receive_llrs(zeros, ch, np.random.default_rng((seed, t)))
        if kind == CcdfKind.GAMMA:
            values[t] = gamma_true(r)
        elif method == CcdfMethod.EXACT:
            values[t] = exact_D(r, cap=cap).value
        else:
            values[t] = saddlepoint_D(r).d_estimate
        if (t + 1) % settings.PROGRESS_EVERY == 0:
            logger.debug("ccdf_progress", done=t + 1, trials=trials)

    probabilities = [float((values > th).mean()) for th in grid]
    logger.info("ccdf_finished", kind=kind.value, median=float(np.median(values)))
    return CcdfCurve(
        kind=kind,
        method=method if kind == CcdfKind.D else None,
        thresholds=grid,
        probabilities=probabilities,
        trials=trials,
        snr=snr,
        k=k,
    )


def truncation_bound(curve: CcdfCurve, parameter: float) -> float:
    """
    P{X > parameter} read off a CCDF curve, rounding the parameter down to the grid.

    Used as the approximate FER gap bound of the l_max (kind D) and τs (kind Γ) rules.
    """
    best = 1.0
    for threshold, probability in zip(curve.thresholds, curve.probabilities):
        if threshold > parameter:
            break
        best = probability
    return best


def hamming_query_curves(p: float) -> Tuple[float, float]:
    """
    Mean queries of GND and GCD (L = 1) for Hamming [7,4] on a BSC.

    Returns:
        (p0 + 35 p1, p0 + 17 p1) with p0 = (1-p)^7 + 7p^3(1-p)^3 + p^7 and p1 = (1-p0)/7
    """
    if not 0 < p < 0.5:
        raise ValueError(f"crossover probability must lie in (0, 1/2), got {p}")
    q = 1.0 - p
    p0 = q**7 + 7 * p**3 * q**3 + p**7
    p1 = (1.0 - p0) / 7.0
    return p0 + 35 * p1, p0 + 17 * p1


def write_ccdf_csv(curves: Union[CcdfCurve, Iterable[CcdfCurve]], path: Union[str, Path]) -> None:
    if isinstance(curves, CcdfCurve):
        curves = [curves]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(CCDF_COLUMNS))
            writer.writeheader()
            for curve in curves:
                writer.writerows(curve.rows())
    except OSError as e:
        raise ResultsWriteError(f"cannot write {path}: {e}") from e
