"""
List decoding over a polar decoding tree

Paths descend the tree with f/g updates (min-sum). At a leaf each path is extended by
sub-codewords β of the leaf's sub-code and pays the soft weight of β against the hard
decision of its leaf LLRs; the node keeps the L_i lightest extensions over all paths.

- ESD leaves score every sub-codeword of every path.
- GCD leaves run one ordered search per path into a shared candidate list. A path's
  search stops once its next partial TEP weight plus the path metric reaches the worst
  retained metric, or at the leaf's truncation limits.

With single-bit ESD leaves everywhere this is SCL decoding.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from gcdkit.core.constants import LeafMode
from gcdkit.core.exceptions import DimensionMismatch
from gcdkit.models.polar import DecodePath, LeafStats, PolarDecodeResult, PolarTree, TreeNode
from gcdkit.services.candidates import CandidateList
from gcdkit.services.codes import Code
from gcdkit.services.decoders import GcdSearch
from gcdkit.services.polar import PolarCode, beta_combine, f_update, g_update, polar_transform
from gcdkit.services.polar_tree import build_full_tree, node_code
from gcdkit.services.tepgen import TepGenerator

logger = logging.getLogger(__name__)


@dataclass
class _LeafInfo:
    code: Optional[Code]  # GCD leaves only
    codebook: Optional[np.ndarray]  # all sub-codewords, ESD leaves only


class TreeDecoder:
    """Decodes one tree for a fixed code; leaf sub-codes are built once and reused"""

    def __init__(self, tree: PolarTree, L: Optional[int] = None):
        self.tree = tree
        self.code: PolarCode = tree.code
        self.list_size = L or tree.list_size
        self._leaves: Dict[Tuple[int, int], _LeafInfo] = {}
        self.stats: List[LeafStats] = []

    def _info(self, node: TreeNode) -> _LeafInfo:
        key = (node.leaf_start, node.n_v)
        info = self._leaves.get(key)
        if info is None:
            code, codebook = None, None
            if node.mode == LeafMode.GCD_LEAF:
                code = node_code(self.code, node.leaf_start, node.n_v)
            else:
                mask = self.code.active_mask[node.leaf_start : node.leaf_start + node.n_v]
                idx = np.arange(1 << node.k_v, dtype=np.int64)
                u = np.zeros((idx.size, node.n_v), dtype=np.uint8)
                u[:, mask] = (idx[:, None] >> np.arange(node.k_v)) & 1
                codebook = polar_transform(u)
            info = self._leaves[key] = _LeafInfo(code=code, codebook=codebook)
        return info

    def _list_size(self, node: TreeNode) -> int:
        return node.list_size if node.list_size is not None else self.list_size

    def decode_node(
        self, node: TreeNode, alpha: np.ndarray, metrics: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Decode the subtree at `node` for P incoming paths.

        Args:
            alpha: (P, n_v) node LLRs
            metrics: (P,) incoming path metrics

        Returns:
            (β, parents, metrics) for the P' surviving paths; parents[j] is the incoming
            path that survivor j extends
        """
        if node.is_leaf:
            if node.mode == LeafMode.GCD_LEAF:
                return self._gcd_leaf(node, alpha, metrics)
            return self._esd_leaf(node, alpha, metrics)

        left, right = node.children
        half = node.n_v // 2
        a, b = alpha[:, :half], alpha[:, half:]
        beta_l, par_l, metrics = self.decode_node(left, f_update(a, b), metrics)
        alpha_r = g_update(a[par_l], b[par_l], beta_l)
        beta_r, par_r, metrics = self.decode_node(right, alpha_r, metrics)
        return beta_combine(beta_l[par_r], beta_r), par_l[par_r], metrics

    def _esd_leaf(
        self, node: TreeNode, alpha: np.ndarray, metrics: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        book = self._info(node).codebook
        n_paths, size = alpha.shape[0], book.shape[0]
        z = (alpha < 0).astype(np.uint8)
        cost = ((book[None, :, :] ^ z[:, None, :]) * np.abs(alpha)[:, None, :]).sum(axis=-1)
        extended = (metrics[:, None] + cost).ravel()
        keep = min(self._list_size(node), extended.size)
        order = np.argsort(extended, kind="stable")[:keep]
        self.stats.append(
            LeafStats(
                leaf_start=node.leaf_start,
                n_v=node.n_v,
                mode=node.mode,
                paths_in=n_paths,
                queries=n_paths * size,
            )
        )
        return book[order % size], order // size, extended[order]

    def _gcd_leaf(
        self, node: TreeNode, alpha: np.ndarray, metrics: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        code = self._info(node).code
        trunc = node.trunc
        n_paths = alpha.shape[0]
        capacity = self._list_size(node)
        if node.k_v < 62:
            capacity = min(capacity, n_paths << node.k_v)

        searches = [GcdSearch(alpha[p], code) for p in range(n_paths)]
        gens = [TepGenerator(s.r_p) for s in searches]
        queries = [0] * n_paths
        is_open = [True] * n_paths
        clist = CandidateList(capacity)

        # round-robin over paths, one partial TEP each per round
        while any(is_open):
            for p in range(n_paths):
                if not is_open[p]:
                    continue
                tep = next(gens[p], None)
                if tep is None or tep.weight + metrics[p] + trunc.delta >= clist.worst:
                    is_open[p] = False
                    continue
                if trunc.tau_s is not None and tep.weight > trunc.tau_s:
                    is_open[p] = False
                    continue
                queries[p] += 1
                search = searches[p]
                e_i = search.reencode(tep.support)
                cost = search.full_weight(tep.support, e_i)
                clist.offer(metrics[p] + cost, (p, tep.support, e_i))
                if trunc.l_max is not None and queries[p] >= trunc.l_max:
                    is_open[p] = False

        self.stats.append(
            LeafStats(
                leaf_start=node.leaf_start,
                n_v=node.n_v,
                mode=node.mode,
                paths_in=n_paths,
                queries=sum(queries),
            )
        )
        parents = np.array([p for p, _, _ in clist.payloads()], dtype=np.int64)
        beta = np.array(
            [
                searches[p].z ^ searches[p].error_vector(support, e_i)
                for p, support, e_i in clist.payloads()
            ],
            dtype=np.uint8,
        ).reshape(len(clist), node.n_v)
        return beta, parents, np.array(clist.weights(), dtype=np.float64)

    def decode(
        self, r: np.ndarray, metrics: Optional[np.ndarray] = None
    ) -> PolarDecodeResult:
        """
        Decode a received word. `metrics` optionally seeds several identical root paths.

        Paths are ranked CRC-passing first, then by metric.
        """
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (self.code.n,):
            raise DimensionMismatch(f"LLR vector shape {r.shape} != ({self.code.n},)")
        metrics = np.zeros(1) if metrics is None else np.asarray(metrics, dtype=np.float64)
        alpha = np.repeat(r[None, :], metrics.size, axis=0)
        self.stats = []
        beta, _, final = self.decode_node(self.tree.root, alpha, metrics)

        paths = []
        for codeword, metric in zip(beta, final):
            active = self.code.active_bits(codeword)
            paths.append(
                DecodePath(
                    codeword=codeword,
                    message=active[: self.code.k],
                    metric=float(metric),
                    crc_ok=self.code.crc_ok(codeword),
                )
            )
        paths.sort(key=lambda path: not path.crc_ok)
        return PolarDecodeResult(paths=paths, leaf_stats=list(self.stats))


def scl_gcd_decode(r: np.ndarray, tree: PolarTree, L: Optional[int] = None) -> PolarDecodeResult:
    """SCL-by-GCD over a pruned tree; L defaults to the tree's list size"""
    return TreeDecoder(tree, L).decode(r)


def scl_decode(r: np.ndarray, code: PolarCode, L: int) -> PolarDecodeResult:
    """Bit-by-bit SCL, with the best CRC-passing path first when the code has a CRC"""
    if L < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    return TreeDecoder(build_full_tree(code, L), L).decode(r)
