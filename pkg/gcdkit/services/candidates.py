"""
Ordered fixed-capacity candidate list
"""

import bisect
import math
from itertools import count
from typing import Any, Iterator, List, NamedTuple


class Candidate(NamedTuple):
    weight: float
    seq: int  # arrival order, breaks weight ties
    payload: Any


class CandidateList:
    """
    The L best candidates seen so far, sorted by non-decreasing weight.

    `worst` is +inf until the list is full, then the weight of the L-th entry. A new
    candidate enters a full list only when strictly lighter than `worst`, evicting the
    current L-th entry, so `worst` never increases.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"list capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: List[Candidate] = []
        self._seq = count()

    @property
    def full(self) -> bool:
        return len(self._entries) >= self.capacity

    @property
    def worst(self) -> float:
        return self._entries[-1].weight if self.full else math.inf

    def offer(self, weight: float, payload: Any) -> bool:
        """Insert if the candidate improves the list; returns whether it was kept"""
        if self.full and not weight < self.worst:
            return False
        entry = Candidate(weight, next(self._seq), payload)
        bisect.insort(self._entries, entry, key=lambda c: (c.weight, c.seq))
        if len(self._entries) > self.capacity:
            self._entries.pop()
        return True

    def weights(self) -> List[float]:
        return [c.weight for c in self._entries]

    def payloads(self) -> List[Any]:
        return [c.payload for c in self._entries]

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self._entries)
