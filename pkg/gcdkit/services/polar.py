"""
Polar code construction and the successive-cancellation kernels

Codewords are c = u·G_m with G_m the m-fold Kronecker power of [[1,0],[1,1]] (no
bit reversal). G_m is its own inverse over GF(2), so u = c·G_m and the frozen part of u
gives the parity checks: H = G_m[:, frozen]ᵀ.
"""

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from gcdkit.core.exceptions import CapacityExceeded, CodeParseError, DimensionMismatch
from gcdkit.services.codes import Code, CrcSpec, crc_attach, crc_check

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def log2_length(n: int) -> int:
    m = int(n).bit_length() - 1
    if n < 1 or (1 << m) != n:
        raise ValueError(f"polar length must be a power of two, got {n}")
    return m


def arikan_matrix(m: int) -> np.ndarray:
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    g = np.ones((1, 1), dtype=np.uint8)
    for _ in range(m):
        g = np.kron(g, _KERNEL).astype(np.uint8)
    return g


def polar_transform(u: np.ndarray) -> np.ndarray:
    """u·G_m along the last axis by butterflies; applying it twice gives u back"""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    log2_length(n)
    shape = x.shape
    x = x.reshape(-1, n)
    h = 1
    while h < n:
        v = x.reshape(x.shape[0], -1, 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x.reshape(shape)


def f_update(a, b):
    """Min-sum check-node update: sgn(a)·sgn(b)·min(|a|, |b|)"""
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def g_update(a, b, c):
    """Variable-node update: (-1)^c·a + b"""
    return np.where(np.asarray(c, dtype=bool), -np.asarray(a), a) + b


def beta_combine(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Partial sums of a parent node: (β_l ⊕ β_r, β_r) along the last axis"""
    left = np.asarray(left, dtype=np.uint8)
    right = np.asarray(right, dtype=np.uint8)
    if left.shape != right.shape:
        raise DimensionMismatch(f"child shapes differ: {left.shape} vs {right.shape}")
    return np.concatenate([left ^ right, right], axis=-1)


def load_reliability_sequence(
    path: Optional[PathLike] = None, n: Optional[int] = None
) -> np.ndarray:
    """
    Read a reliability order: whitespace-separated 1-based indices, most reliable last.

    Without a path the built-in NR sequence (length 1024) is used. With `n`, the order is
    restricted to indices <= n, which for a nested sequence is the order of length n.

    Returns:
        0-based indices, least reliable first
    """
    if path is None:
        text = resources.files("gcdkit").joinpath("data/nr_polar_sequence.txt").read_text("utf-8")
        source = "built-in NR sequence"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        order = np.array([int(tok) for tok in text.split()], dtype=np.int64)
    except ValueError as e:
        raise CodeParseError(f"{source}: {e}") from e
    if order.size == 0 or not np.array_equal(np.sort(order), np.arange(1, order.size + 1)):
        raise CodeParseError(f"{source} is not a permutation of 1..{order.size}")
    if n is not None:
        if n > order.size:
            raise CodeParseError(f"{source} covers {order.size} positions, {n} requested")
        order = order[order <= n]
    return order - 1


@dataclass(frozen=True, eq=False)
class PolarCode:
    """
    Polar code of length n = 2^m.

    `active` carries the message followed by its CRC bits, placed in index order;
    `reliability` lists the 0-based positions least reliable first.
    """

    m: int
    active: Tuple[int, ...]
    frozen: Tuple[int, ...]
    reliability: Tuple[int, ...]
    crc: Optional[CrcSpec] = None

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def k(self) -> int:
        """Message length, CRC excluded"""
        return len(self.active) - self.crc_bits

    @property
    def crc_bits(self) -> int:
        return self.crc.degree if self.crc else 0

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def h(self) -> np.ndarray:
        return arikan_matrix(self.m)[:, list(self.frozen)].T.copy()

    @property
    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.active)] = True
        return mask

    @property
    def name(self) -> str:
        suffix = f"+CRC{self.crc.degree}" if self.crc else ""
        return f"Polar[{self.n},{self.k}]{suffix}"

    def encode(self, message: np.ndarray) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.shape != (self.k,):
            raise DimensionMismatch(f"message shape {message.shape} != ({self.k},)")
        word = crc_attach(message, self.crc) if self.crc else message
        u = np.zeros(self.n, dtype=np.uint8)
        u[list(self.active)] = word
        return polar_transform(u)

    def active_bits(self, codeword: np.ndarray) -> np.ndarray:
        """Message followed by CRC bits recovered from a codeword"""
        return polar_transform(codeword)[..., list(self.active)]

    def decode_message(self, codeword: np.ndarray) -> np.ndarray:
        return self.active_bits(codeword)[..., : self.k]

    def crc_ok(self, codeword: np.ndarray) -> bool:
        if self.crc is None:
            return True
        return crc_check(self.active_bits(codeword), self.crc)

    def as_code(self) -> Code:
        """The linear code spanned by the active rows (CRC not enforced)"""
        g = arikan_matrix(self.m)[list(self.active)]
        return Code.from_parity_check(self.h, g=g, name=self.name)

    def __repr__(self) -> str:
        return f"PolarCode({self.name})"


def _from_order(m: int, order: np.ndarray, n_active: int, crc: Optional[CrcSpec]) -> PolarCode:
    active = tuple(sorted(int(i) for i in order[order.size - n_active :])) if n_active else ()
    frozen = tuple(sorted(int(i) for i in order[: order.size - n_active]))
    return PolarCode(
        m=m, active=active, frozen=frozen, reliability=tuple(int(i) for i in order), crc=crc
    )


def construct_polar(
    n: int,
    k: int,
    reliability_order: Optional[Sequence[int]] = None,
    crc: Optional[CrcSpec] = None,
) -> PolarCode:
    """
    Select the k + crc.degree most reliable positions as the active set.

    Args:
        n: Code length, a power of two
        k: Message length
        reliability_order: 0-based positions, least reliable first; defaults to the
            built-in NR sequence restricted to n
        crc: Optional CRC appended to the message

    Raises:
        CapacityExceeded: k + crc.degree > n
    """
    m = log2_length(n)
    degree = crc.degree if crc else 0
    if k < 0 or k + degree > n:
        raise CapacityExceeded(f"{k} message + {degree} CRC bits do not fit in {n} positions")
    if reliability_order is None:
        order = load_reliability_sequence(n=n)
    else:
        order = np.asarray(reliability_order, dtype=np.int64)
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise CodeParseError(f"reliability order is not a permutation of 0..{n - 1}")
    code = _from_order(m, order, k + degree, crc)
    logger.debug(f"Constructed {code.name} with {len(code.frozen)} frozen positions")
    return code


def reallocate_bits(code: PolarCode, t: int) -> PolarCode:
    """Swap the t least reliable active positions with the t most reliable frozen ones"""
    if not 0 <= t <= min(len(code.active), len(code.frozen)):
        raise ValueError(
            f"t must lie in 0..{min(len(code.active), len(code.frozen))}, got {t}"
        )
    if t == 0:
        return code
    active = set(code.active)
    by_rank = list(code.reliability)
    demoted = [i for i in by_rank if i in active][:t]
    promoted = [i for i in reversed(by_rank) if i not in active][:t]
    new_active = tuple(sorted((active - set(demoted)) | set(promoted)))
    new_frozen = tuple(sorted(set(range(code.n)) - set(new_active)))
    logger.debug(f"Reallocated {code.name}: {demoted} -> frozen, {promoted} -> active")
    return PolarCode(
        m=code.m, active=new_active, frozen=new_frozen, reliability=code.reliability, crc=code.crc
    )
