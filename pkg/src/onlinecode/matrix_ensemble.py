"""Random causal (k-LOT) matrices: sampling, rescaling, systematic code, blocks.

A k-LOT matrix with ``T`` columns has ``k * T`` rows grouped in ``T``
segments of ``k`` rows; row ``(i, l)`` (1-based, ``l <= k``) sits at array
row ``k * (i - 1) + (l - 1)`` and may be non-zero only in columns
``j <= i``.

Entries of the sampled matrix ``M`` are::

    M[(i, l), j] = xi[(i, l), j] / (k * tf(i) ** 4 * sqrt(i - j + 1))   (i >= j)

where the standard normals ``xi`` come from a counter-based Philox stream
keyed by the seed, with counter ``(i, l)``; ``xi[(i, l), j]`` is the
``j``-th draw of that stream.  An entry therefore depends only on
``(seed, i, l, j)`` and never on ``T``, so leading submatrices are exact
samples of the smaller ensemble and encoder and decoder can regenerate the
matrix from the seed alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .weighted_norms import tf

#: documented desk-scale limit on the number of columns
MAX_T = 1024


@dataclass(frozen=True)
class EnsembleParams:
    T: int
    k: int
    seed: int = 0
    mu: float = 1.0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True, eq=False)
class LotMatrix:
    """Dense ``k * T`` by ``T`` causal matrix (read-only ``entries``)."""

    T: int
    k: int
    entries: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.shape != (self.k * self.T, self.T):
            raise ValueError(
                f"entries have shape {a.shape}, expected {(self.k * self.T, self.T)}")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        return self.entries @ np.asarray(other)

    def row(self, i: int, l: int) -> int:
        """0-based array row of the 1-based pair ``(i, l)``."""
        if not (1 <= i <= self.T and 1 <= l <= self.k):
            raise IndexError(f"row pair {(i, l)} out of range")
        return self.k * (i - 1) + (l - 1)

    def segment(self, i: int) -> np.ndarray:
        """Rows ``(i, 1..k)`` as a ``k`` by ``T`` view."""
        return self.entries[self.k * (i - 1): self.k * i]

    def is_lot(self) -> bool:
        """True when every entry above the causal staircase is exactly zero."""
        seg = np.repeat(np.arange(1, self.T + 1), self.k)[:, None]
        col = np.arange(1, self.T + 1)[None, :]
        return bool(np.all(self.entries[seg < col] == 0.0))

    def leading(self, t: int) -> "LotMatrix":
        return leading_submatrix(self, t)


def _row_stream(seed: int, i: int, l: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=int(seed), counter=[0, 0, l, i])
    return np.random.Generator(bitgen).standard_normal(count)


def segment_rows(seed: int, k: int, i: int) -> np.ndarray:
    """Rows ``(i, 1..k)`` of ``M`` restricted to columns ``1..i`` (``k x i``)."""
    j = np.arange(1, i + 1)
    scale = 1.0 / (k * tf(i) ** 4 * np.sqrt(i - j + 1.0))
    out = np.empty((k, i))
    for l in range(1, k + 1):
        out[l - 1] = _row_stream(seed, i, l, i) * scale
    return out


def sample_M(params: EnsembleParams) -> LotMatrix:
    """Draw ``M`` from the causal Gaussian ensemble with the given seed."""
    T, k = params.T, params.k
    if T > MAX_T:
        raise ValueError(f"T={T} exceeds the desk-scale limit {MAX_T}")
    a = np.zeros((k * T, T))
    for i in range(1, T + 1):
        a[k * (i - 1): k * i, :i] = segment_rows(params.seed, k, i)
    return LotMatrix(T=T, k=k, entries=a, seed=int(params.seed))


def entry_variance(i: int, j: int, k: int) -> float:
    """Closed-form variance of ``M[(i, l), j]``."""
    if i < j:
        return 0.0
    return 1.0 / ((k * tf(i) ** 4) ** 2 * (i - j + 1))


def to_B(M: LotMatrix, mu: float) -> LotMatrix:
    """Rescale ``M`` so the weighted problem becomes an unweighted one.

    ``B[(i, l), j] = M[(i, l), j] / sqrt((T - i + 1) ** (1 - mu) * (T - j + 1) ** mu)``.
    """
    T, k = M.T, M.k
    i = np.repeat(np.arange(1, T + 1), k).astype(float)[:, None]
    j = np.arange(1, T + 1, dtype=float)[None, :]
    div = np.sqrt((T - i + 1) ** (1.0 - mu) * (T - j + 1) ** mu)
    return LotMatrix(T=T, k=k, entries=M.entries / div, seed=M.seed)


def systematic_C(M: LotMatrix) -> LotMatrix:
    """Systematic (k+1)-LOT code matrix, scaled by ``1/sqrt(2)``.

    Segment ``i`` carries the ``k`` rows of ``M`` followed by one row that
    copies the current symbol ``x_i``.
    """
    T, k = M.T, M.k
    a = np.zeros(((k + 1) * T, T))
    for i in range(1, T + 1):
        a[(k + 1) * (i - 1): (k + 1) * (i - 1) + k] = M.segment(i)
        a[(k + 1) * i - 1, i - 1] = 1.0
    return LotMatrix(T=T, k=k + 1, entries=a / math.sqrt(2.0), seed=M.seed)


def code_matrix(seed: int, k: int, T: int) -> LotMatrix:
    """The scaled systematic code matrix for ``(seed, k)`` with ``T`` columns."""
    return systematic_C(sample_M(EnsembleParams(T=T, k=k, seed=seed)))


def leading_submatrix(A: LotMatrix, t: int) -> LotMatrix:
    """Top ``k * t`` rows and leftmost ``t`` columns."""
    if not 1 <= t <= A.T:
        raise ValueError(f"t={t} outside 1..{A.T}")
    return LotMatrix(T=t, k=A.k, entries=A.entries[: A.k * t, :t], seed=A.seed)


# --- dyadic blocks -----------------------------------------------------------
# Block j covers coordinates T + 2 - 2**j .. T + 1 - 2**(j - 1) (1-based),
# counted from the most recent one.  When T + 1 is not a power of two the
# oldest block is clipped at coordinate 1.

def _block_range(T: int, j: int):
    if not 1 <= j <= tf(T):
        raise ValueError(f"block index {j} outside 1..{tf(T)}")
    lo = max(T + 2 - 2 ** j, 1)
    hi = T + 1 - 2 ** (j - 1)
    return lo - 1, hi  # 0-based half-open


def vblock(x, i: int) -> np.ndarray:
    x = np.asarray(x)
    lo, hi = _block_range(x.shape[0], i)
    return x[lo:hi]


def cblock(x, j1: int, j2: int = 1) -> np.ndarray:
    """Concatenation of ``vblock(x, i)`` for ``j2 <= i <= j1``, in time order."""
    x = np.asarray(x)
    if j2 > j1:
        raise ValueError("cblock needs j2 <= j1")
    lo, _ = _block_range(x.shape[0], j1)
    _, hi = _block_range(x.shape[0], j2)
    return x[lo:hi]


def mblock(A, j: int) -> np.ndarray:
    a = np.asarray(A)
    lo, hi = _block_range(a.shape[1], j)
    return a[:, lo:hi]


def mcblock(A, j: int) -> np.ndarray:
    """The last ``2**j - 1`` columns (clipped to all columns)."""
    a = np.asarray(A)
    T = a.shape[1]
    if not 0 <= j <= tf(T):
        raise ValueError(f"block index {j} outside 0..{tf(T)}")
    width = min(2 ** j - 1, T)
    return a[:, T - width:]


def lclock(A_or_y, j: int, k: int) -> np.ndarray:
    """The last ``k * 2**(j - 1)`` rows of a matrix or entries of a vector."""
    a = np.asarray(A_or_y)
    if j < 1:
        raise ValueError("lclock needs j >= 1")
    count = k * 2 ** (j - 1)
    if count > a.shape[0]:
        raise ValueError(f"lclock({j}) needs {count} rows, have {a.shape[0]}")
    return a[a.shape[0] - count:]


# --- text dump ---------------------------------------------------------------

def dump_csv(A: LotMatrix, path=None) -> str:
    """Write ``A`` as CSV: a ``T,k,seed`` header line, its values, then rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "k", "seed"])
    w.writerow([A.T, A.k, "" if A.seed is None else A.seed])
    for row in A.entries:
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_csv(source) -> LotMatrix:
    """Inverse of :func:`dump_csv`; ``source`` is a path or the CSV text."""
    if "\n" in str(source):
        text = str(source)
    else:
        with open(source) as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["T", "k", "seed"]:
        raise ValueError("matrix CSV must start with the header 'T,k,seed'")
    T, k = int(rows[1][0]), int(rows[1][1])
    seed = int(rows[1][2]) if rows[1][2] else None
    entries = np.array([[float(v) for v in r] for r in rows[2:]])
    return LotMatrix(T=T, k=k, entries=entries, seed=seed)
