"""
Channel models, LLR computation, hard decisions and soft weights

Soft weights are summed with math.fsum, which rounds exactly once and is therefore
independent of summation order. Every decoder computes weights through this module so
equal patterns always receive bit-identical weights.
"""

import math
from typing import Sequence

import numpy as np

from gcdkit.core.constants import ChannelKind
from gcdkit.core.exceptions import DimensionMismatch
from gcdkit.models.channel import ChannelSpec


def llr_from_observation(y, ch: ChannelSpec) -> np.ndarray:
    """
    Per-bit LLRs ln P(y|0)/P(y|1).

    AWGN with x = (-1)^c: r = 2y/sigma2. BSC: r = (-1)^y ln((1-p)/p).
    """
    ch.check()
    y = np.asarray(y)
    if ch.kind == ChannelKind.AWGN:
        return 2.0 * y.astype(np.float64) / ch.sigma2
    magnitude = math.log((1.0 - ch.p) / ch.p)
    return np.where(y.astype(np.uint8) == 0, magnitude, -magnitude)


def hard_decision(r: np.ndarray) -> np.ndarray:
    """z_i = 0 iff r_i >= 0"""
    return (np.asarray(r) < 0).astype(np.uint8)


def weight_of(reliabilities: np.ndarray, support: Sequence[int]) -> float:
    """Soft weight of the pattern with the given support, given |r|"""
    if len(support) == 0:
        return 0.0
    return math.fsum(reliabilities[list(support)])


def soft_weight(e: np.ndarray, r: np.ndarray) -> float:
    """γ(e) = Σ e_i |r_i|"""
    e = np.asarray(e)
    r = np.asarray(r)
    if e.shape != r.shape:
        raise DimensionMismatch(f"pattern length {e.shape} does not match LLR length {r.shape}")
    return weight_of(np.abs(r), np.flatnonzero(e))


def transmit(codeword: np.ndarray, ch: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    """
    Send a codeword through the channel.

    Returns the channel output: real samples for AWGN, received bits for BSC.
    """
    ch.check()
    c = np.asarray(codeword, dtype=np.uint8)
    if ch.kind == ChannelKind.AWGN:
        x = 1.0 - 2.0 * c
        return x + math.sqrt(ch.sigma2) * rng.standard_normal(c.size)
    flips = (rng.random(c.size) < ch.p).astype(np.uint8)
    return c ^ flips


def receive_llrs(codeword: np.ndarray, ch: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    """Channel output of `codeword` converted straight to LLRs"""
    return llr_from_observation(transmit(codeword, ch, rng), ch)
