"""
Ordered test-error-pattern generation

Patterns are compared by the total order ≺: soft weight first, then Hamming weight,
then the support set in lexicographic order (at the first position where two patterns
differ, the one holding the 1 comes first). The order is evaluated on coordinates sorted
by ascending reliability.

Patterns are produced lazily from a flipping-pattern tree. Every pattern f with smallest
support element i has at most two children:

- f↓ = f with position 0 set (only when i > 0, or f is the root);
- f→ = f with element i moved to i+1 (only when i+1 exists and is unused).

Both children follow their parent under ≺ and every non-root pattern has exactly one
parent, so popping the ≺-minimum of a heap seeded with the all-zero pattern yields all
2^K patterns in ≺-order without duplicates.
"""

import heapq
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from gcdkit.core.exceptions import DimensionMismatch
from gcdkit.services.channel import weight_of

TepKey = Tuple[float, int, Tuple[int, ...]]


@dataclass(frozen=True, slots=True)
class Tep:
    """
    A partial test error pattern.

    `support` holds original coordinates, `sorted_support` the same positions in the
    reliability-sorted coordinates the order ≺ is defined on.
    """

    weight: float
    sorted_support: Tuple[int, ...]
    support: Tuple[int, ...]
    length: int

    @property
    def hamming_weight(self) -> int:
        return len(self.sorted_support)

    @property
    def key(self) -> TepKey:
        return (self.weight, len(self.sorted_support), self.sorted_support)

    @property
    def bits(self) -> np.ndarray:
        """The pattern as a 0/1 vector in original coordinates"""
        out = np.zeros(self.length, dtype=np.uint8)
        out[list(self.support)] = 1
        return out


def tep_less(a: Tep, b: Tep) -> bool:
    """a ≺ b"""
    return a.key < b.key


class TepGenerator:
    """
    On-demand generator of partial TEPs in ≺-order.

    Iterating yields `Tep` objects in original coordinates; StopIteration follows the
    2^K-th pattern.
    """

    def __init__(self, r_p: np.ndarray):
        magnitudes = np.abs(np.asarray(r_p, dtype=np.float64))
        if magnitudes.ndim != 1:
            raise DimensionMismatch(f"expected an LLR vector, got shape {magnitudes.shape}")
        self.k = int(magnitudes.size)
        self.perm = np.argsort(magnitudes, kind="stable")
        self.reliabilities = magnitudes[self.perm]
        self.emitted = 0
        self._perm_list: List[int] = self.perm.tolist()
        self._inverse: Optional[np.ndarray] = None
        self._frontier: List[TepKey] = [(0.0, 0, ())]

    @property
    def frontier_size(self) -> int:
        return len(self._frontier)

    @property
    def exhausted(self) -> bool:
        return not self._frontier

    def __iter__(self) -> Iterator[Tep]:
        return self

    def __next__(self) -> Tep:
        if not self._frontier:
            raise StopIteration
        key = heapq.heappop(self._frontier)
        self._push_children(key[2])
        self.emitted += 1
        return self._make(key)

    def peek_weight(self) -> Optional[float]:
        """Soft weight of the next pattern, or None when exhausted"""
        return self._frontier[0][0] if self._frontier else None

    def _push_children(self, support: Tuple[int, ...]) -> None:
        if not support:
            if self.k:
                self._push((0,))
            return
        low = support[0]
        if low > 0:
            self._push((0,) + support)
        nxt = low + 1
        if nxt < self.k and (len(support) == 1 or support[1] != nxt):
            self._push((nxt,) + support[1:])

    def _push(self, support: Tuple[int, ...]) -> None:
        weight = weight_of(self.reliabilities, support)
        heapq.heappush(self._frontier, (weight, len(support), support))

    def _make(self, key: TepKey) -> Tep:
        weight, _, sorted_support = key
        original = tuple(sorted(self._perm_list[i] for i in sorted_support))
        return Tep(weight=weight, sorted_support=sorted_support, support=original, length=self.k)

    def key_of(self, e_p: np.ndarray) -> TepKey:
        """≺-key of an arbitrary pattern given in original coordinates"""
        e_p = np.asarray(e_p)
        if e_p.shape != (self.k,):
            raise DimensionMismatch(f"pattern shape {e_p.shape} != ({self.k},)")
        return self.support_key(np.flatnonzero(e_p).tolist())

    def support_key(self, support: Sequence[int]) -> TepKey:
        """≺-key of the pattern flipping the given original positions"""
        if self._inverse is None:
            self._inverse = np.empty(self.k, dtype=np.int64)
            self._inverse[self.perm] = np.arange(self.k)
        sorted_support = tuple(sorted(int(self._inverse[i]) for i in support))
        weight = weight_of(self.reliabilities, sorted_support)
        return (weight, len(sorted_support), sorted_support)


def generator_new(r_p: np.ndarray) -> TepGenerator:
    return TepGenerator(r_p)


def generator_next(gen: TepGenerator) -> Optional[Tep]:
    """Next pattern, or None once all 2^K patterns were emitted"""
    return next(gen, None)


def pattern_rank(r_p: np.ndarray, e_p: np.ndarray, cap: Optional[int] = None) -> Optional[int]:
    """
    1-based position of `e_p` in the ≺-order over patterns of length K.

    Returns None when the pattern lies beyond `cap` emissions.
    """
    gen = TepGenerator(r_p)
    target = gen.key_of(e_p)
    for tep in gen:
        if tep.key == target:
            return gen.emitted
        if cap is not None and gen.emitted >= cap:
            return None
    return None
