"""
Polar decoding tree and decoder output models
"""

from typing import Any, Iterator, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gcdkit.core.constants import LeafMode
from gcdkit.models.decoding import TruncationConfig


class TreeNode(BaseModel):
    """
    Node v of a polar decoding tree, covering the leaf indices leaf_start..leaf_start+n_v-1.

    Leaves carry the decoding mode of their sub-code; internal nodes have two children of
    half the span.
    """

    level: int = Field(ge=0)
    leaf_start: int = Field(ge=0)
    n_v: int = Field(ge=1)
    k_v: int = Field(ge=0)
    mode: LeafMode = LeafMode.INTERNAL
    list_size: Optional[int] = Field(default=None, ge=1)  # L_i; None means the decoder's L
    trunc: TruncationConfig = Field(default_factory=TruncationConfig)
    l_avg: Optional[float] = None  # genie estimate recorded at pruning time
    children: List["TreeNode"] = Field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.mode != LeafMode.INTERNAL

    @property
    def leaf_span(self) -> range:
        return range(self.leaf_start, self.leaf_start + self.n_v)

    def walk(self) -> Iterator["TreeNode"]:
        """Pre-order traversal"""
        yield self
        for child in self.children:
            yield from child.walk()


TreeNode.model_rebuild()


class PolarTree(BaseModel):
    """A (possibly pruned) decoding tree bound to its code"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    code: Any  # PolarCode
    root: TreeNode
    list_size: int = Field(ge=1)
    design_snr: Optional[float] = None

    def leaves(self) -> List[TreeNode]:
        return [node for node in self.root.walk() if node.is_leaf]

    def internal_count(self) -> int:
        return sum(1 for node in self.root.walk() if not node.is_leaf)

    def gcd_leaf_count(self) -> int:
        return sum(1 for node in self.leaves() if node.mode == LeafMode.GCD_LEAF)


class DecodePath(BaseModel):
    """One surviving path at the end of a polar list decode"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    codeword: np.ndarray
    message: np.ndarray
    metric: float  # λ: soft weight of the path's hard-decision disagreements
    crc_ok: bool = True


class LeafStats(BaseModel):
    leaf_start: int
    n_v: int
    mode: LeafMode
    paths_in: int
    queries: int  # GCD re-encodings, or candidates scored by full enumeration

    @property
    def mean_queries(self) -> float:
        return self.queries / self.paths_in if self.paths_in else 0.0


class PolarDecodeResult(BaseModel):
    """Paths ranked CRC-passing first, then by metric"""

    paths: List[DecodePath] = Field(default_factory=list)
    leaf_stats: List[LeafStats] = Field(default_factory=list)

    @property
    def codewords(self) -> List[np.ndarray]:
        return [p.codeword for p in self.paths]

    @property
    def best(self) -> Optional[np.ndarray]:
        return self.paths[0].codeword if self.paths else None

    @property
    def queries(self) -> int:
        return sum(s.queries for s in self.leaf_stats if s.mode == LeafMode.GCD_LEAF)

    def contains(self, codeword: np.ndarray) -> bool:
        return any(np.array_equal(c, codeword) for c in self.codewords)
