"""
Polar decoding trees: full SCL trees, complexity-driven pruning, persistence and the
time-step latency model.

A node decoded by SCL costs C_SCL = 2kL·log2(2L) + L·n·log2 n + L·(n/2)·log2 n (sorting,
f/g calculation and partial-sum transformation); the same node decoded by L GCD
processors costs C_GCD = L·k·log2 k + ℓ·(L·log2 ℓ + log2 L + L·k) + L·ℓ·(n-k), with ℓ the
genie-aided mean query count at the design SNR. All big-O constants are 1.
"""

import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from gcdkit.core.config import settings
from gcdkit.core.constants import LeafMode
from gcdkit.core.exceptions import TreeFormatError
from gcdkit.models.channel import ChannelSpec
from gcdkit.models.decoding import TruncationConfig
from gcdkit.models.polar import PolarTree, TreeNode
from gcdkit.services.channel import receive_llrs
from gcdkit.services.codes import Code, CrcSpec
from gcdkit.services.decoders import gcd_decode
from gcdkit.services.polar import PolarCode, arikan_matrix, construct_polar, f_update
from gcdkit.utils.logger import get_structured_logger

logger = logging.getLogger(__name__)
slog = get_structured_logger(__name__)

PathLike = Union[str, Path]


def _log2(x: float) -> float:
    return math.log2(x) if x > 1 else 0.0


def node_k(code: PolarCode, leaf_start: int, n_v: int) -> int:
    return int(code.active_mask[leaf_start : leaf_start + n_v].sum())


def node_code(code: PolarCode, leaf_start: int, n_v: int) -> Code:
    """Sub-code of node v: β = u_v·G, with the frozen leaves of the span fixed to zero"""
    mask = code.active_mask[leaf_start : leaf_start + n_v]
    g = arikan_matrix(n_v.bit_length() - 1)
    return Code.from_parity_check(
        g[:, ~mask].T.copy(), g=g[mask], name=f"node[{leaf_start}:{leaf_start + n_v}]"
    )


def scl_complexity(n: int, k: int, L: int) -> float:
    return 2 * k * L * _log2(2 * L) + L * n * _log2(n) + L * (n / 2) * _log2(n)


def gcd_complexity(n: int, k: int, L: int, l_avg: float) -> float:
    return L * k * _log2(k) + l_avg * (L * _log2(l_avg) + _log2(L) + L * k) + L * l_avg * (n - k)


def break_even_queries(n: int, k: int, L: int) -> float:
    """Smallest integer ℓ >= 1 at which GCD is no cheaper than SCL (0 if never cheaper)"""
    target = scl_complexity(n, k, L)
    if gcd_complexity(n, k, L, 1.0) >= target:
        return 0.0
    hi = 2
    while gcd_complexity(n, k, L, hi) < target:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gcd_complexity(n, k, L, mid) < target:
            lo = mid
        else:
            hi = mid
    return float(hi)


# Trees


def _leaf(
    code: PolarCode, level: int, start: int, n_v: int, mode: LeafMode, **extra
) -> TreeNode:
    return TreeNode(
        level=level, leaf_start=start, n_v=n_v, k_v=node_k(code, start, n_v), mode=mode, **extra
    )


def _internal(code: PolarCode, level: int, start: int, n_v: int, children) -> TreeNode:
    return TreeNode(
        level=level,
        leaf_start=start,
        n_v=n_v,
        k_v=node_k(code, start, n_v),
        children=children,
    )


def build_full_tree(code: PolarCode, L: int) -> PolarTree:
    """
    Binary tree down to single bits: decoding it is bit-by-bit SCL.

    Bit leaves are ESD leaves for every L, L = 1 included: a single bit has at most two
    extensions, so the k_v <= log2 L rule for exhaustive leaves only governs wider nodes.
    """

    def build(level: int, start: int, n_v: int) -> TreeNode:
        if n_v == 1:
            return _leaf(code, level, start, 1, LeafMode.ESD_LEAF)
        half = n_v // 2
        children = [build(level + 1, start, half), build(level + 1, start + half, half)]
        return _internal(code, level, start, n_v, children)

    return PolarTree(code=code, root=build(0, 0, code.n), list_size=L)


def single_leaf_tree(
    code: PolarCode, L: int, trunc: Optional[TruncationConfig] = None
) -> PolarTree:
    """The whole code as one GCD leaf"""
    root = _leaf(code, 0, 0, code.n, LeafMode.GCD_LEAF, trunc=trunc or TruncationConfig())
    return PolarTree(code=code, root=root, list_size=L)


# Genie estimation


def node_llr_sampler(code: PolarCode, ch: ChannelSpec, trials: int, seed: int) -> np.ndarray:
    """Root LLRs of `trials` all-zero transmissions, row t drawn from default_rng((seed, t))"""
    zeros = np.zeros(code.n, dtype=np.uint8)
    return np.stack(
        [receive_llrs(zeros, ch, np.random.default_rng((seed, t))) for t in range(trials)]
    )


def genie_child_llrs(alpha: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Children LLRs under a genie that knows the left partial sums are zero"""
    half = alpha.shape[-1] // 2
    a, b = alpha[..., :half], alpha[..., half:]
    return f_update(a, b), a + b


def genie_avg_queries(
    node_subcode: Code,
    ch: Optional[ChannelSpec],
    L: int,
    trials: int,
    seed: int,
    *,
    llrs: Optional[np.ndarray] = None,
    stop_above: Optional[float] = None,
) -> float:
    """
    Mean query count of genie-aided GCD, which also stops once the true TEP is queried.

    The all-zero codeword is the true one. LLRs come from `llrs` (one row per trial) or are
    drawn from `ch`. Each trial is capped at min(2^k, GENIE_MAX_QUERIES) queries. With
    `stop_above`, estimation ends as soon as the mean is known to reach that value and
    the partial mean (already >= stop_above) is returned.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, k = node_subcode.n, node_subcode.k
    if k == 0:
        return 1.0
    cap = settings.GENIE_MAX_QUERIES if k >= 62 else min(1 << k, settings.GENIE_MAX_QUERIES)
    if llrs is None:
        if ch is None:
            raise ValueError("either a channel or LLR samples are required")
        zeros = np.zeros(n, dtype=np.uint8)
        llrs = np.stack(
            [receive_llrs(zeros, ch, np.random.default_rng((seed, t))) for t in range(trials)]
        )
    trunc = TruncationConfig(l_max=cap)
    zeros = np.zeros(n, dtype=np.uint8)
    total = 0
    for t in range(trials):
        result = gcd_decode(llrs[t], node_subcode, L, trunc, transmitted=zeros, genie_stop=True)
        total += result.queries
        if stop_above is not None and total >= stop_above * trials:
            return total / trials
    return total / trials


def prune_tree(
    code: PolarCode,
    L: int,
    ch: ChannelSpec,
    trials: int,
    seed: int,
    design_snr: Optional[float] = None,
) -> PolarTree:
    """
    Pre-order pruning: a node with k <= log2 L becomes an ESD leaf; otherwise it becomes
    a GCD leaf when L GCD processors are cheaper than SCL on it, estimated with the genie
    mean query count at the channel `ch`. Remaining nodes split; single bits are ESD leaves for
    every L.

    Without a CRC the last leaf keeps a single path.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    log_l = math.log2(L)
    slog.info("prune_started", code=code.name, L=L, channel=ch.label, trials=trials)

    def visit(level: int, start: int, n_v: int, alpha: np.ndarray) -> TreeNode:
        k_v = node_k(code, start, n_v)
        if k_v <= log_l:
            return _leaf(code, level, start, n_v, LeafMode.ESD_LEAF)
        ceiling = break_even_queries(n_v, k_v, L)
        if ceiling > 0:
            l_avg = genie_avg_queries(
                node_code(code, start, n_v), None, L, trials, seed, llrs=alpha, stop_above=ceiling
            )
            if gcd_complexity(n_v, k_v, L, l_avg) < scl_complexity(n_v, k_v, L):
                logger.debug(f"node [{start}:{start + n_v}] k={k_v} -> GCD leaf, l_avg={l_avg:.2f}")
                return _leaf(code, level, start, n_v, LeafMode.GCD_LEAF, l_avg=l_avg)
        if n_v == 1:
            return _leaf(code, level, start, 1, LeafMode.ESD_LEAF)
        left, right = genie_child_llrs(alpha)
        half = n_v // 2
        return _internal(
            code,
            level,
            start,
            n_v,
            [visit(level + 1, start, half, left), visit(level + 1, start + half, half, right)],
        )

    root = visit(0, 0, code.n, node_llr_sampler(code, ch, trials, seed))
    tree = PolarTree(code=code, root=root, list_size=L, design_snr=design_snr)
    if code.crc is None:
        tree.leaves()[-1].list_size = 1
    slog.info(
        "prune_finished",
        code=code.name,
        leaves=len(tree.leaves()),
        gcd_leaves=tree.gcd_leaf_count(),
        internal=tree.internal_count(),
    )
    return tree


# Persistence: one line per leaf, "leaf_start leaf_len k mode L_i l_max"


def save_tree(tree: PolarTree, path: PathLike) -> None:
    code: PolarCode = tree.code
    lines = [
        f"# {code.name} L={tree.list_size}"
        + (f" design_snr={tree.design_snr}" if tree.design_snr is not None else ""),
        "# leaf_start leaf_len k mode L_i l_max",
    ]
    for leaf in tree.leaves():
        list_size = leaf.list_size if leaf.list_size is not None else tree.list_size
        l_max = leaf.trunc.l_max if leaf.trunc.l_max is not None else "-"
        lines.append(
            f"{leaf.leaf_start} {leaf.n_v} {leaf.k_v} {leaf.mode.value} {list_size} {l_max}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_leaf_line(line: str, lineno: int) -> Tuple[int, int, int, LeafMode, int, Optional[int]]:
    parts = line.split()
    if len(parts) != 6:
        raise TreeFormatError(f"line {lineno}: expected 6 fields, got {len(parts)}")
    try:
        start, n_v, k_v, list_size = (int(parts[i]) for i in (0, 1, 2, 4))
        mode = LeafMode(parts[3])
        l_max = None if parts[5] == "-" else int(parts[5])
    except ValueError as e:
        raise TreeFormatError(f"line {lineno}: {e}") from e
    if mode == LeafMode.INTERNAL:
        raise TreeFormatError(f"line {lineno}: leaves cannot be internal")
    return start, n_v, k_v, mode, list_size, l_max


def load_tree(path: PathLike, code: PolarCode, L: Optional[int] = None) -> PolarTree:
    """
    Rebuild a tree from its leaves. Leaves must tile 0..n-1 with aligned power-of-two spans
    and their dimensions must match the code.
    """
    leaves: Dict[Tuple[int, int], TreeNode] = {}
    max_list = 1
    design_snr = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("design_snr="):
                        design_snr = float(token.split("=", 1)[1])
                continue
            if not line:
                continue
            start, n_v, k_v, mode, list_size, l_max = _parse_leaf_line(line, lineno)
            if n_v < 1 or n_v & (n_v - 1) or start % n_v:
                raise TreeFormatError(f"line {lineno}: span [{start}:{start + n_v}] is not aligned")
            if k_v != node_k(code, start, n_v):
                raise TreeFormatError(
                    f"line {lineno}: k={k_v} but {code.name} has {node_k(code, start, n_v)} "
                    f"active positions in [{start}:{start + n_v}]"
                )
            leaves[(start, n_v)] = TreeNode(
                level=0,
                leaf_start=start,
                n_v=n_v,
                k_v=k_v,
                mode=mode,
                list_size=list_size,
                trunc=TruncationConfig(l_max=l_max),
            )
            max_list = max(max_list, list_size)

    used = set()

    def build(level: int, start: int, n_v: int) -> TreeNode:
        leaf = leaves.get((start, n_v))
        if leaf is not None:
            used.add((start, n_v))
            return leaf.model_copy(update={"level": level})
        if n_v == 1:
            raise TreeFormatError(f"position {start} is not covered by any leaf")
        half = n_v // 2
        children = [build(level + 1, start, half), build(level + 1, start + half, half)]
        return _internal(code, level, start, n_v, children)

    root = build(0, 0, code.n)
    if used != set(leaves):
        raise TreeFormatError(f"overlapping leaves: {sorted(set(leaves) - used)}")
    return PolarTree(code=code, root=root, list_size=L or max_list, design_snr=design_snr)


# Latency


def leaf_time_steps(leaf: TreeNode, L: int, l_avg: Optional[float] = None) -> float:
    """
    ESD leaves take k+1 steps (k for a single bit, nothing for a rate-0 leaf); GCD
    leaves take ℓ_avg + max(1, n/(2L)).
    """
    if leaf.mode == LeafMode.GCD_LEAF:
        mean = l_avg if l_avg is not None else leaf.l_avg
        if mean is None:
            raise ValueError(f"GCD leaf at {leaf.leaf_start} has no mean query count")
        return mean + max(1.0, leaf.n_v / (2 * L))
    if leaf.k_v == 0:
        return 0.0
    return float(leaf.k_v if leaf.n_v == 1 else leaf.k_v + 1)


def scl_time_steps(n: int, active_bits: int) -> int:
    """2n-2 steps of f/g updates plus one path sort per active bit"""
    return 2 * n - 2 + active_bits


def time_steps(
    tree_or_code: Union[PolarTree, PolarCode],
    L: int,
    l_avg_per_node: Optional[Dict[int, float]] = None,
) -> float:
    """
    Decoding latency in time steps. A code is timed as bit-by-bit SCL; a tree as two
    steps per internal node plus its leaf costs. `l_avg_per_node` maps a GCD leaf's
    leaf_start to its mean query count and overrides the value recorded at pruning.
    """
    if isinstance(tree_or_code, PolarCode):
        return scl_time_steps(tree_or_code.n, len(tree_or_code.active))
    l_avg_per_node = l_avg_per_node or {}
    total = 2.0 * tree_or_code.internal_count()
    for leaf in tree_or_code.leaves():
        total += leaf_time_steps(leaf, L, l_avg_per_node.get(leaf.leaf_start))
    return total


def latency_table(
    lengths: Iterable[int] = (128, 256, 1024),
    rates: Iterable[float] = (0.25, 0.5, 0.75),
    crc: Optional[CrcSpec] = None,
    trees: Optional[Dict[Tuple[int, int], PolarTree]] = None,
    L: int = 8,
) -> List[dict]:
    """
    SCL time steps for each (n, rate) point, plus the pruned-tree latency where a tree
    for (n, k) is supplied.
    """
    rows = []
    for n in lengths:
        for rate in rates:
            k = int(round(n * rate))
            code = construct_polar(n, k, crc=crc)
            row = {"n": n, "k": k, "rate": rate, "scl": time_steps(code, L)}
            tree = (trees or {}).get((n, k))
            if tree is not None:
                row["pruned"] = time_steps(tree, L)
            rows.append(row)
    return rows
