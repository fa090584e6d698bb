"""
Binary-field linear algebra

Matrices and vectors are numpy uint8 arrays holding 0/1 entries. Functions never mutate
their inputs.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np

from gcdkit.core.exceptions import CodeParseError, DimensionMismatch, RankDeficient

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def as_bits(values, ndim: int = 1) -> np.ndarray:
    """Coerce to a uint8 array of 0/1 entries with the given number of dimensions"""
    arr = np.asarray(values)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("binary arrays may only contain 0 and 1")
    return arr.astype(np.uint8, copy=True)


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix (or vector-matrix) product over GF(2)"""
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return (a.astype(np.int64) @ b.astype(np.int64) & 1).astype(np.uint8)


def row_reduce(matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form, scanning columns left to right.

    Returns:
        The reduced matrix (zero rows last) and the pivot column of each nonzero row
    """
    m = np.array(matrix, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.flatnonzero(m[r:, c])
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        hits = np.flatnonzero(m[:, c])
        hits = hits[hits != r]
        m[hits] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return len(row_reduce(matrix)[1])


def same_row_space(a: np.ndarray, b: np.ndarray) -> bool:
    """True when both matrices span the same subspace"""
    if a.shape[1] != b.shape[1]:
        return False
    ra = rank(a)
    return ra == rank(b) and rank(np.vstack([a, b])) == ra


@dataclass(frozen=True)
class SystematicForm:
    """
    Parity-check matrix brought to [I P] by row operations and a column permutation.

    `perm[j]` is the original column placed at systematized position j. Positions
    0..N-K-1 carry the identity block, N-K..N-1 the information set.
    """

    h_sys: np.ndarray
    p: np.ndarray
    perm: np.ndarray
    inv_perm: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        object.__setattr__(self, "inv_perm", inv)

    @property
    def n(self) -> int:
        return int(self.h_sys.shape[1])

    @property
    def redundancy(self) -> int:
        return int(self.h_sys.shape[0])

    @property
    def k(self) -> int:
        return self.n - self.redundancy

    def permute(self, v: np.ndarray) -> np.ndarray:
        """Original coordinates -> systematized coordinates (last axis)"""
        return v[..., self.perm]

    def unpermute(self, v: np.ndarray) -> np.ndarray:
        """Systematized coordinates -> original coordinates (last axis)"""
        return v[..., self.inv_perm]


def systematize(h: np.ndarray) -> SystematicForm:
    """
    Bring H to [I P] with a deterministic column permutation.

    Pivot columns are found left to right; they are moved to the front in order and the
    remaining columns keep their relative order.

    Raises:
        RankDeficient: H does not have full row rank
    """
    h = np.asarray(h, dtype=np.uint8)
    if h.ndim != 2:
        raise DimensionMismatch(f"parity-check matrix must be 2-d, got shape {h.shape}")
    rows, cols = h.shape
    if rows == 0:
        perm = np.arange(cols)
        return SystematicForm(h_sys=h.copy(), p=np.zeros((0, cols), np.uint8), perm=perm)

    reduced, pivots = row_reduce(h)
    if len(pivots) < rows:
        raise RankDeficient(f"parity-check matrix has rank {len(pivots)} < {rows}")

    pivot_set = set(pivots)
    perm = np.array(pivots + [c for c in range(cols) if c not in pivot_set], dtype=np.int64)
    h_sys = reduced[:, perm]
    if pivots != list(range(rows)):
        logger.debug(f"systematize moved pivot columns {pivots} to the front")
    return SystematicForm(h_sys=h_sys, p=h_sys[:, rows:].copy(), perm=perm)


def syndrome(z: np.ndarray, h_sys: np.ndarray) -> np.ndarray:
    """s = z·Hᵀ over GF(2); works row-wise for a batch of words"""
    if z.shape[-1] != h_sys.shape[1]:
        raise DimensionMismatch(
            f"word length {z.shape[-1]} does not match matrix width {h_sys.shape[1]}"
        )
    return gf2_matmul(z, h_sys.T)


# Matrix text format: "rows cols" header, then one 0/1 string per row


def parse_matrix(lines: Iterable[str]) -> np.ndarray:
    """Parse one matrix from an iterator of text lines (blank lines skipped)"""
    it = (line.strip() for line in lines)
    it = (line for line in it if line)
    header = next(it, None)
    if header is None:
        raise CodeParseError("missing matrix header")
    try:
        rows, cols = (int(x) for x in header.split())
    except ValueError as e:
        raise CodeParseError(f"bad matrix header {header!r}") from e
    if rows < 0 or cols < 1:
        raise CodeParseError(f"bad matrix shape {rows}x{cols}")

    out = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        line = next(it, None)
        if line is None:
            raise CodeParseError(f"expected {rows} rows, got {i}")
        if len(line) != cols or set(line) - {"0", "1"}:
            raise CodeParseError(f"row {i + 1}: expected {cols} binary digits, got {line!r}")
        out[i] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
    return out


def format_matrix(matrix: np.ndarray) -> str:
    rows, cols = matrix.shape
    body = ["".join("1" if b else "0" for b in row) for row in matrix]
    return "\n".join([f"{rows} {cols}", *body]) + "\n"


def read_matrix(path: PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh)


def write_matrix(matrix: np.ndarray, path: PathLike) -> None:
    Path(path).write_text(format_matrix(matrix), encoding="utf-8")
