"""
Block decoders: guessing codeword decoding (sequential, truncated, genie-aided and
parallel), guessing noise decoding and exhaustive search.

All decoders work in the systematic coordinates of the code, where positions
0..N-K-1 form the redundancy part I and N-K..N-1 the information set P. A partial
pattern e_P is completed to the unique valid TEP by re-encoding, e_I = s ⊕ P·e_P, and
the candidate codeword is z ⊕ e.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from gcdkit.core.config import settings
from gcdkit.core.constants import StopReason
from gcdkit.core.exceptions import (
    DimensionMismatch,
    ListTooLarge,
    SearchExhausted,
    TooLarge,
)
from gcdkit.models.decoding import DecodeResult, TruncationConfig
from gcdkit.services.candidates import CandidateList
from gcdkit.services.channel import hard_decision, weight_of
from gcdkit.services.codes import Code
from gcdkit.services.gf2 import syndrome
from gcdkit.services.tepgen import Tep, TepGenerator, TepKey

logger = logging.getLogger(__name__)

_ESD_CHUNK = 1 << 16


class GcdSearch:
    """Per-received-word state shared by the GCD variants"""

    def __init__(self, r: np.ndarray, code: Code):
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (code.n,):
            raise DimensionMismatch(f"LLR vector shape {r.shape} != ({code.n},)")
        self.code = code
        self.red = code.sys.redundancy
        self.z = hard_decision(r)
        self.r_sys = code.sys.permute(r)
        self.abs_sys = np.abs(self.r_sys)
        self.s = syndrome(code.sys.permute(self.z), code.sys.h_sys)
        self.r_p = self.r_sys[self.red :]
        self._p_rows = code.sys.p.T.copy()  # row j is column j of P

    def reencode(self, support: Sequence[int]) -> np.ndarray:
        """e_I for the partial pattern with the given support (indices into r_p)"""
        if not support:
            return self.s.copy()
        return self.s ^ np.bitwise_xor.reduce(self._p_rows[list(support)], axis=0)

    def full_weight(self, support: Sequence[int], e_i: np.ndarray) -> float:
        idx = np.flatnonzero(e_i).tolist() + [self.red + j for j in support]
        return weight_of(self.abs_sys, idx)

    def true_support(self, transmitted: Optional[np.ndarray]) -> Optional[Tuple[int, ...]]:
        """Support (indices into r_p) of the true partial TEP z ⊕ c restricted to P"""
        if transmitted is None:
            return None
        e_true = self.code.sys.permute(self.z ^ np.asarray(transmitted, dtype=np.uint8))
        return tuple(np.flatnonzero(e_true[self.red :]).tolist())

    def log_posterior_base(self) -> float:
        """log P(0 | r_P); flipping position i multiplies the posterior by e^{-|r_i|}"""
        return float(-np.logaddexp(0.0, -np.abs(self.r_p)).sum())

    def error_vector(self, support: Sequence[int], e_i: np.ndarray) -> np.ndarray:
        """The full TEP in original coordinates"""
        e_sys = np.zeros(self.code.n, dtype=np.uint8)
        e_sys[: self.red] = e_i
        e_sys[[self.red + j for j in support]] = 1
        return self.code.sys.unpermute(e_sys)

    def result(self, clist: CandidateList, **fields) -> DecodeResult:
        codewords, teps = [], []
        for support, e_i in clist.payloads():
            e = self.error_vector(support, e_i)
            teps.append(e)
            codewords.append(self.z ^ e)
        return DecodeResult(codewords=codewords, teps=teps, weights=clist.weights(), **fields)


def tep_posterior(e_p, r_p: np.ndarray) -> float:
    """
    Bitwise posterior of a partial pattern: ∏ q_i with q_i = 1/(1+e^{|r_i|}) on flipped
    positions and e^{|r_i|}/(1+e^{|r_i|}) elsewhere.
    """
    r_p = np.asarray(r_p, dtype=np.float64)
    bits = e_p.bits if isinstance(e_p, Tep) else np.asarray(e_p)
    if bits.shape != r_p.shape:
        raise DimensionMismatch(f"pattern shape {bits.shape} != LLR shape {r_p.shape}")
    a = np.abs(r_p)
    log_q = np.where(bits.astype(bool), -np.logaddexp(0.0, a), -np.logaddexp(0.0, -a))
    return float(np.exp(log_q.sum()))


def gcd_decode(
    r: np.ndarray,
    code: Code,
    L: int,
    trunc: Optional[TruncationConfig] = None,
    *,
    transmitted: Optional[np.ndarray] = None,
    genie_stop: bool = False,
) -> DecodeResult:
    """
    Guessing codeword decoding with an L-list.

    Partial TEPs are generated in ≺-order and re-encoded until the next pattern's soft
    weight (plus the tolerance delta) reaches the weight of the L-th listed TEP. Without
    truncation the output is the L lightest valid TEPs.

    Args:
        r: Channel LLRs, original coordinates
        code: The code
        L: List size
        trunc: Truncation rules; defaults to none
        transmitted: Transmitted codeword, enables `true_rank` bookkeeping
        genie_stop: Also stop as soon as the true partial TEP was re-encoded
    """
    if L < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    trunc = trunc or TruncationConfig()
    search = GcdSearch(r, code)
    gen = TepGenerator(search.r_p)
    true_support = search.true_support(transmitted)
    base = search.log_posterior_base() if trunc.tau_p is not None else 0.0

    clist = CandidateList(L)
    queries = 0
    mass = 0.0
    true_rank = None
    stop = StopReason.EXHAUSTED
    for tep in gen:
        if tep.weight + trunc.delta >= clist.worst:
            stop = StopReason.OPTIMAL
            break
        if trunc.tau_s is not None and tep.weight > trunc.tau_s:
            stop = StopReason.TAU_S
            break

        queries += 1
        e_i = search.reencode(tep.support)
        clist.offer(search.full_weight(tep.support, e_i), (tep.support, e_i))

        if true_rank is None and tep.support == true_support:
            true_rank = queries
            if genie_stop:
                stop = StopReason.GENIE
                break
        if trunc.tau_p is not None:
            mass += math.exp(base - tep.weight)
            if mass >= 1.0 - trunc.tau_p:
                stop = StopReason.TAU_P
                break
        if trunc.l_max is not None and queries >= trunc.l_max:
            stop = StopReason.L_MAX
            break

    return search.result(
        clist,
        queries=queries,
        emissions=gen.emitted,
        stop_reason=stop,
        true_rank=true_rank,
        posterior_mass=mass,
    )


def _sequential_cutoff(
    r_p: np.ndarray, trunc: TruncationConfig, base: float
) -> Tuple[Optional[TepGenerator], Optional[TepKey], StopReason]:
    """
    ≺-key of the last partial pattern sequential GCD may re-encode under l_max and tau_p.

    Returns a None key when neither rule fires before tau_s or the end of the order.
    """
    if trunc.l_max is None and trunc.tau_p is None:
        return None, None, StopReason.EXHAUSTED
    walk = TepGenerator(r_p)
    mass = 0.0
    for tep in walk:
        if trunc.tau_s is not None and tep.weight > trunc.tau_s:
            break
        if trunc.tau_p is not None:
            mass += math.exp(base - tep.weight)
            if mass >= 1.0 - trunc.tau_p:
                return walk, tep.key, StopReason.TAU_P
        if trunc.l_max is not None and walk.emitted >= trunc.l_max:
            return walk, tep.key, StopReason.L_MAX
    return walk, None, StopReason.EXHAUSTED


def parallel_gcd_decode(
    r: np.ndarray,
    code: Code,
    L: int,
    delta_bits: int,
    trunc: Optional[TruncationConfig] = None,
    *,
    transmitted: Optional[np.ndarray] = None,
) -> DecodeResult:
    """
    GCD with the δ least reliable information positions enumerated up front.

    Each of the 2^δ prefixes is a branch; one shared generator runs over the remaining
    K-δ positions and every suffix emission is juxtaposed with each open branch. A
    branch closes for good once its prefix weight plus the suffix weight reaches the
    list's worst weight. `emissions` counts suffix emissions, `queries` the
    re-encoded patterns over all branches.

    l_max and tau_p are resolved to the ≺-last pattern sequential GCD would re-encode;
    juxtaposed patterns past it are skipped, so with delta = 0 the list has the same
    weights as `gcd_decode` under the same truncation.
    """
    if L < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    trunc = trunc or TruncationConfig()
    search = GcdSearch(r, code)
    k = code.k
    if not 0 <= delta_bits <= k:
        raise ValueError(f"delta_bits must lie in 0..{k}, got {delta_bits}")

    order = np.argsort(np.abs(search.r_p), kind="stable")
    prefix_pos = order[:delta_bits]
    suffix_pos = order[delta_bits:].tolist()

    branches: List[Tuple[float, Tuple[int, ...]]] = [
        (tep.weight, tuple(int(prefix_pos[i]) for i in tep.support))
        for tep in TepGenerator(search.r_p[prefix_pos])
    ]
    is_open = [True] * len(branches)

    true_support = search.true_support(transmitted)
    base = search.log_posterior_base() if trunc.tau_p is not None else 0.0
    abs_p = np.abs(search.r_p)
    walk, cutoff, cutoff_reason = _sequential_cutoff(search.r_p, trunc, base)

    suffix_gen = TepGenerator(search.r_p[suffix_pos])
    clist = CandidateList(L)
    queries = 0
    mass = 0.0
    true_rank = None
    closed_by_radius = closed_by_cutoff = False
    stop = StopReason.EXHAUSTED

    for tep2 in suffix_gen:
        suffix_support = [suffix_pos[i] for i in tep2.support]
        for b, (w1, prefix_support) in enumerate(branches):
            if not is_open[b]:
                continue
            w = w1 + tep2.weight
            if w + trunc.delta >= clist.worst:
                is_open[b] = False
                continue
            if trunc.tau_s is not None and w > trunc.tau_s:
                is_open[b] = False
                closed_by_radius = True
                continue

            support = tuple(sorted(prefix_support + tuple(suffix_support)))
            if cutoff is not None:
                key = walk.support_key(support)
                if key > cutoff:
                    closed_by_cutoff = True
                    # suffixes arrive in weight order; only ties can still fall before
                    if key[0] > cutoff[0]:
                        is_open[b] = False
                    continue

            queries += 1
            e_i = search.reencode(support)
            clist.offer(search.full_weight(support, e_i), (support, e_i))
            if true_rank is None and support == true_support:
                true_rank = queries
            if trunc.tau_p is not None:
                mass += math.exp(base - weight_of(abs_p, support))
        if not any(is_open):
            break

    if closed_by_cutoff:
        stop = cutoff_reason
    elif closed_by_radius:
        stop = StopReason.TAU_S
    elif not any(is_open):
        stop = StopReason.OPTIMAL

    return search.result(
        clist,
        queries=queries,
        emissions=suffix_gen.emitted,
        stop_reason=stop,
        true_rank=true_rank,
        posterior_mass=mass,
    )


def gnd_decode(
    r: np.ndarray, code: Code, L: int, l_max: Optional[int] = None
) -> DecodeResult:
    """
    Guessing noise decoding: full-length TEPs in ≺-order, each checked against the
    syndrome, until L valid ones are found.

    Equal reliabilities are ordered information set first, in the same order the GCD
    generator uses, so the two decoders break ties alike.

    Raises:
        SearchExhausted: fewer than L valid TEPs within l_max checks (partial result attached)
    """
    if L < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    if code.k < 63 and L > (1 << code.k):
        raise ListTooLarge(f"L={L} exceeds the {1 << code.k} codewords")
    l_max = l_max or settings.GND_MAX_QUERIES
    search = GcdSearch(r, code)
    red = search.red
    positions = list(range(red, code.n)) + list(range(red))
    h_rows = code.sys.h_sys.T[positions]  # row j: column of H at combined position j
    gen = TepGenerator(search.r_sys[positions])

    clist = CandidateList(L)
    queries = 0
    for tep in gen:
        queries += 1
        if tep.support:
            check = np.bitwise_xor.reduce(h_rows[list(tep.support)], axis=0)
        else:
            check = np.zeros(red, dtype=np.uint8)
        if np.array_equal(check, search.s):
            sys_support = [positions[j] for j in tep.support]
            e_p_support = tuple(j - red for j in sys_support if j >= red)
            e_i = np.zeros(red, dtype=np.uint8)
            e_i[[j for j in sys_support if j < red]] = 1
            clist.offer(weight_of(search.abs_sys, sys_support), (e_p_support, e_i))
            if clist.full:
                break
        if queries >= l_max:
            break

    result = search.result(
        clist,
        queries=queries,
        emissions=gen.emitted,
        stop_reason=StopReason.OPTIMAL if clist.full else StopReason.L_MAX,
    )
    if not clist.full:
        raise SearchExhausted(f"found {len(clist)} of {L} valid TEPs in {queries} queries", result)
    return result


def esd_decode(r: np.ndarray, code: Code, L: int) -> DecodeResult:
    """
    Exhaustive search: re-encode all 2^K partial patterns and keep the L lightest.

    Raises:
        TooLarge: K exceeds ESD_MAX_K
        ListTooLarge: L > 2^K
    """
    k = code.k
    if k > settings.ESD_MAX_K:
        raise TooLarge(f"exhaustive search over K={k} exceeds ESD_MAX_K={settings.ESD_MAX_K}")
    total = 1 << k
    if L < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    if L > total:
        raise ListTooLarge(f"L={L} exceeds the {total} codewords")

    search = GcdSearch(r, code)
    red = search.red
    abs_i = search.abs_sys[:red]
    abs_p = search.abs_sys[red:]
    p_t = code.sys.p.T.astype(np.int64)
    keep = min(total, L + 16)
    shifts = np.arange(k, dtype=np.int64)

    best_idx = np.zeros(0, dtype=np.int64)
    best_w = np.zeros(0, dtype=np.float64)
    for start in range(0, total, _ESD_CHUNK):
        idx = np.arange(start, min(total, start + _ESD_CHUNK), dtype=np.int64)
        bits = (idx[:, None] >> shifts) & 1
        e_i = search.s ^ ((bits @ p_t) & 1)
        approx = bits @ abs_p + e_i @ abs_i
        cand_idx = np.concatenate([best_idx, idx])
        cand_w = np.concatenate([best_w, approx])
        if cand_idx.size > keep:
            sel = np.argpartition(cand_w, keep - 1)[:keep]
            cand_idx, cand_w = cand_idx[sel], cand_w[sel]
        best_idx, best_w = cand_idx, cand_w

    # exact weights and ≺ tie-breaking on the survivors
    ranked = []
    for i in best_idx.tolist():
        support = tuple(j for j in range(k) if (i >> j) & 1)
        e_i = search.reencode(support)
        sys_support = np.flatnonzero(e_i).tolist() + [red + j for j in support]
        original = tuple(sorted(int(code.sys.perm[j]) for j in sys_support))
        ranked.append((search.full_weight(support, e_i), len(original), original, support, e_i))
    ranked.sort(key=lambda t: t[:3])

    clist = CandidateList(L)
    for weight, _, _, support, e_i in ranked[:L]:
        clist.offer(weight, (support, e_i))
    return search.result(
        clist, queries=total, emissions=total, stop_reason=StopReason.EXHAUSTED
    )
