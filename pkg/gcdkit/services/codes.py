"""
Code constructions, CRC arithmetic and code file I/O
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from gcdkit.core.config import settings
from gcdkit.core.constants import CRC11_POLY
from gcdkit.core.exceptions import (
    CodeParseError,
    DimensionMismatch,
    GenerationFailed,
    InconsistentCode,
    InvalidOrder,
)
from gcdkit.services.gf2 import (
    SystematicForm,
    as_bits,
    format_matrix,
    gf2_matmul,
    parse_matrix,
    rank,
    row_reduce,
    systematize,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class Code:
    """
    Binary linear block code C[n, k] described by a full-rank parity-check matrix.

    The systematic form is computed once at construction; decoders work in its
    coordinates and map results back through `sys.perm`.
    """

    n: int
    k: int
    h: np.ndarray
    sys: SystematicForm
    g: Optional[np.ndarray] = None
    name: str = ""

    @classmethod
    def from_parity_check(
        cls, h: np.ndarray, g: Optional[np.ndarray] = None, name: str = ""
    ) -> "Code":
        """Build from H; redundant rows are dropped and G, if given, is checked against H"""
        h = as_bits(h, ndim=2)
        n = h.shape[1]
        if h.shape[0]:
            reduced, pivots = row_reduce(h)
            if len(pivots) < h.shape[0]:
                logger.debug(f"dropping {h.shape[0] - len(pivots)} dependent parity rows")
                h = reduced[: len(pivots)]
        k = n - h.shape[0]
        if g is not None:
            g = as_bits(g, ndim=2)
            if g.shape[1] != n:
                raise InconsistentCode(f"G has {g.shape[1]} columns, H has {n}")
            if h.shape[0] and gf2_matmul(g, h.T).any():
                raise InconsistentCode("G·Hᵀ is not zero")
            if rank(g) != k:
                raise InconsistentCode(f"G has rank {rank(g)}, expected {k}")
        code = cls(n=n, k=k, h=h, sys=systematize(h), g=g, name=name or f"C[{n},{k}]")
        return code

    @classmethod
    def from_generator(cls, g: np.ndarray, name: str = "") -> "Code":
        """Build from G; H is taken as a basis of the dual code"""
        g = as_bits(g, ndim=2)
        reduced, pivots = row_reduce(g)
        reduced = reduced[: len(pivots)]
        dual = _dual_basis(reduced, pivots)
        return cls.from_parity_check(dual, g=reduced, name=name)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def generator(self) -> np.ndarray:
        """G if known, else the systematic generator derived from H"""
        if self.g is not None:
            return self.g
        g_sys = np.hstack([self.sys.p.T, np.eye(self.k, dtype=np.uint8)])
        return self.sys.unpermute(g_sys)

    def encode(self, u: np.ndarray) -> np.ndarray:
        """Place u on the information set and fill the redundancy: c_I = P·u"""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape[-1] != self.k:
            raise DimensionMismatch(f"message length {u.shape[-1]} != k={self.k}")
        c_sys = np.concatenate([gf2_matmul(u, self.sys.p.T), u], axis=-1)
        return self.sys.unpermute(c_sys)

    def is_codeword(self, c: np.ndarray) -> bool:
        if self.h.shape[0] == 0:
            return True
        return not gf2_matmul(np.asarray(c, dtype=np.uint8), self.h.T).any()

    def codewords(self) -> np.ndarray:
        """All 2^k codewords, row i encoding the binary expansion of i (small k only)"""
        idx = np.arange(1 << self.k, dtype=np.int64)
        msgs = ((idx[:, None] >> np.arange(self.k)) & 1).astype(np.uint8)
        return self.encode(msgs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        same_g = (self.g is None) == (other.g is None) and (
            self.g is None or np.array_equal(self.g, other.g)
        )
        same_h = np.array_equal(self.h, other.h)
        return self.n == other.n and self.k == other.k and same_h and same_g

    def __repr__(self) -> str:
        return f"Code({self.name})"


def _dual_basis(g_rref: np.ndarray, pivots) -> np.ndarray:
    """Parity-check matrix of the code spanned by a reduced generator"""
    k, n = g_rref.shape
    free = [c for c in range(n) if c not in set(pivots)]
    h = np.zeros((n - k, n), dtype=np.uint8)
    for row, c in enumerate(free):
        h[row, c] = 1
        h[row, pivots] = g_rref[:, c]
    return h


def _rm_generator(m: int, r: int) -> np.ndarray:
    points = np.arange(1 << m)
    x = ((points[None, :] >> np.arange(m)[:, None]) & 1).astype(np.uint8)
    rows = []
    for degree in range(r + 1):
        for monomial in combinations(range(m), degree):
            row = np.ones(1 << m, dtype=np.uint8)
            for var in monomial:
                row &= x[var]
            rows.append(row)
    return np.array(rows, dtype=np.uint8).reshape(len(rows), 1 << m)


def rm_code(m: int, r: int) -> Code:
    """
    Reed-Muller code RM(r, m) of length 2^m and dimension Σ_{i<=r} C(m, i).

    Generator rows are monomial evaluations in graded-lexicographic order; H generates
    RM(m-r-1, m).
    """
    if m < 0 or not 0 <= r <= m:
        raise InvalidOrder(f"need 0 <= r <= m, got r={r}, m={m}")
    g = _rm_generator(m, r)
    if r == m:
        h = np.zeros((0, 1 << m), dtype=np.uint8)
    else:
        h = _rm_generator(m, m - r - 1)
    k = sum(comb(m, i) for i in range(r + 1))
    return Code.from_parity_check(h, g=g, name=f"RM({r},{m})[{1 << m},{k}]")


def hamming_code(m: int = 3) -> Code:
    """Hamming code [2^m - 1, 2^m - 1 - m]; column j of H is the binary expansion of j+1"""
    n = (1 << m) - 1
    cols = np.arange(1, n + 1)
    h = ((cols[None, :] >> np.arange(m)[:, None]) & 1).astype(np.uint8)
    return Code.from_parity_check(h, name=f"Hamming[{n},{n - m}]")


def random_code(n: int, k: int, seed: int) -> Code:
    """Random code from an i.i.d. uniform parity-check matrix, resampled until full rank"""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    for attempt in range(settings.RANDOM_CODE_MAX_RETRIES):
        h = rng.integers(0, 2, size=(n - k, n), dtype=np.uint8)
        if rank(h) == n - k:
            if attempt:
                logger.debug(f"random_code({n},{k},{seed}) needed {attempt + 1} draws")
            return Code.from_parity_check(h, name=f"Random[{n},{k}]#{seed}")
    raise GenerationFailed(
        f"no full-rank {n - k}x{n} matrix after {settings.RANDOM_CODE_MAX_RETRIES} draws"
    )


# CRC


class CrcSpec(BaseModel):
    """CRC polynomial as coefficients, highest degree first"""

    model_config = ConfigDict(frozen=True)

    poly: Tuple[int, ...]

    @field_validator("poly")
    @classmethod
    def validate_poly(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) < 2 or set(v) - {0, 1} or v[0] != 1:
            raise ValueError("CRC polynomial needs degree >= 1 and a leading 1")
        return v

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @classmethod
    def parse(cls, text: str) -> "CrcSpec":
        """Accept a hex string ("0xE21") or a binary coefficient string ("111000100001")"""
        text = text.strip().lower()
        try:
            if text.startswith("0x"):
                bits = bin(int(text, 16))[2:]
            else:
                if not text or set(text) - {"0", "1"}:
                    raise ValueError("expected hex or binary digits")
                bits = text.lstrip("0")
            return cls(poly=tuple(int(b) for b in bits))
        except ValueError as e:
            raise CodeParseError(f"bad CRC polynomial {text!r}: {e}") from e


CRC11 = CrcSpec.parse(CRC11_POLY)


def _divide(reg: np.ndarray, steps: int, poly: np.ndarray) -> np.ndarray:
    span = poly.size
    for i in range(steps):
        if reg[i]:
            reg[i : i + span] ^= poly
    return reg


def crc_remainder(msg: np.ndarray, crc: CrcSpec) -> np.ndarray:
    """Remainder of msg·x^degree modulo the CRC polynomial"""
    msg = np.asarray(msg, dtype=np.uint8)
    reg = np.concatenate([msg, np.zeros(crc.degree, dtype=np.uint8)])
    poly = np.array(crc.poly, dtype=np.uint8)
    return _divide(reg, msg.size, poly)[msg.size :].copy()


def crc_attach(msg: np.ndarray, crc: CrcSpec) -> np.ndarray:
    msg = np.asarray(msg, dtype=np.uint8)
    return np.concatenate([msg, crc_remainder(msg, crc)])


def crc_check(word: np.ndarray, crc: CrcSpec) -> bool:
    """True when the word (message followed by CRC bits) divides evenly"""
    reg = np.array(word, dtype=np.uint8, copy=True)
    if reg.size < crc.degree:
        return False
    poly = np.array(crc.poly, dtype=np.uint8)
    return not _divide(reg, reg.size - crc.degree, poly)[-crc.degree :].any()


# File I/O: one matrix (H) or two matrices (G then H) in the matrix text format


def load_code(path: PathLike, name: str = "") -> Code:
    with open(path, encoding="utf-8") as fh:
        lines = iter(fh.readlines())
    first = parse_matrix(lines)
    rest = [line for line in lines if line.strip()]
    if rest:
        second = parse_matrix(iter(rest))
        if second.shape[1] != first.shape[1]:
            raise CodeParseError(f"G has {first.shape[1]} columns but H has {second.shape[1]}")
        g, h = first, second
    else:
        g, h = None, first
    code = Code.from_parity_check(h, g=g, name=name or Path(path).stem)
    has_g = "yes" if g is not None else "no"
    logger.info(f"Loaded {code.name}: n={code.n}, k={code.k}, generator={has_g}")
    return code


def save_code(code: Code, path: PathLike) -> None:
    text = format_matrix(code.h)
    if code.g is not None:
        text = format_matrix(code.g) + text
    Path(path).write_text(text, encoding="utf-8")
