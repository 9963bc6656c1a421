"""Linear algebra over GF(2).

Vectors and matrices are ordinary ``uint8`` numpy arrays holding 0/1 values.
Elimination packs rows into little-endian ``uint64`` words so a row operation
is a handful of word XORs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "SolveResult",
    "as_bits",
    "matmul",
    "matvec",
    "pack_rows",
    "rank",
    "solve",
    "solve_many",
    "unpack_rows",
]


def as_bits(a, ndim: int | None = None) -> np.ndarray:
    """Return ``a`` as a uint8 array of 0/1, rejecting any other entry."""
    arr = np.asarray(a)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("GF(2) entries must be 0 or 1")
    return arr.astype(np.uint8, copy=False)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product mod 2.

    Uses float32 BLAS; exact while the inner dimension stays below 2**24.
    Operands already stored as float32 0/1 arrays are used without copying.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    if a.shape[-1] >= 1 << 24:
        raise ValueError("inner dimension too large for exact float32 accumulation")
    prod = a.astype(np.float32, copy=False) @ b.astype(np.float32, copy=False)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def matvec(m, v) -> np.ndarray:
    """``M @ v`` over GF(2)."""
    m = as_bits(m, 2)
    v = as_bits(v, 1)
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"cols(M)={m.shape[1]} != len(v)={v.shape[0]}")
    return matmul(m, v)


def pack_rows(m: np.ndarray, ncols: int | None = None) -> np.ndarray:
    """Pack a 0/1 matrix into ``(rows, words)`` uint64; bit j lives in word j // 64."""
    m = np.asarray(m, dtype=np.uint8)
    rows, cols = m.shape
    width = cols if ncols is None else ncols
    words = max(1, -(-width // 64))
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :cols] = m
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(rows, words)


def unpack_rows(packed: np.ndarray, ncols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(packed.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(as_bytes.reshape(packed.shape[0], -1), axis=1, bitorder="little")
    return bits[:, :ncols]


def _gauss_jordan(packed: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Reduce packed rows to RREF over the first ``ncols`` columns (in place on a copy)."""
    p = packed.copy()
    nrows = p.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        w = c >> 6
        mask = np.uint64(1) << np.uint64(c & 63)
        cand = np.flatnonzero(p[r:, w] & mask)
        if cand.size == 0:
            continue
        piv = r + cand[0]
        if piv != r:
            p[[r, piv]] = p[[piv, r]]
        hits = (p[:, w] & mask) != 0
        hits[r] = False
        p[hits] ^= p[r]
        pivots.append(c)
        r += 1
    return p, pivots


def rank(m) -> int:
    """Dimension of the row space of ``m``."""
    m = as_bits(m, 2)
    if m.size == 0:
        return 0
    _, pivots = _gauss_jordan(pack_rows(m), m.shape[1])
    return len(pivots)


def solve_many(a, b) -> np.ndarray:
    """Solve ``A @ X = B`` for every column of ``B`` at once.

    Free variables are set to 0. Raises ``ValueError`` if any column is
    inconsistent.
    """
    a = as_bits(a, 2)
    b = as_bits(b, 2)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"rows(A)={a.shape[0]} != rows(B)={b.shape[0]}")
    nvar, nrhs = a.shape[1], b.shape[1]
    reduced, pivots = _gauss_jordan(pack_rows(np.hstack([a, b])), nvar)
    bits = unpack_rows(reduced, nvar + nrhs)
    if np.any(bits[len(pivots):, nvar:]):
        raise ValueError("inconsistent system")
    x = np.zeros((nvar, nrhs), dtype=np.uint8)
    x[pivots] = bits[: len(pivots), nvar:]
    return x


@numba.njit(cache=True)
def _parity64(v):
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    return v & np.uint64(1)


@numba.njit(cache=True)
def _bit(row, j):
    return (row[j >> 6] >> np.uint64(j & 63)) & np.uint64(1)


@numba.njit(cache=True)
def solve_packed(rows, ncols, x, is_pivot, violated):
    """Row-ordered elimination on packed augmented rows.

    Column ``ncols`` of each row is the right-hand side. Rows are taken in
    index order; a row that reduces to ``0 = 1`` is left unsatisfied, so
    among conflicting equations the later one is the one dropped. Free
    variables are 0. Fills ``x``, ``is_pivot`` and ``violated``; returns the
    number of violated rows.
    """
    nrows, nwords = rows.shape
    basis = np.zeros((max(ncols, 1), nwords), np.uint64)
    has = np.zeros(max(ncols, 1), np.bool_)
    row = np.empty(nwords, np.uint64)
    rnk = 0
    for i in range(nrows):
        is_pivot[i] = False
        if rnk == ncols:
            continue
        for w in range(nwords):
            row[w] = rows[i, w]
        for c in range(ncols):
            if _bit(row, c):
                if has[c]:
                    for w in range(nwords):
                        row[w] ^= basis[c, w]
                else:
                    for w in range(nwords):
                        basis[c, w] = row[w]
                    has[c] = True
                    is_pivot[i] = True
                    rnk += 1
                    break

    for c in range(ncols):
        x[c] = 0
    for c in range(ncols - 1, -1, -1):
        if has[c]:
            v = _bit(basis[c], ncols)
            for j in range(c + 1, ncols):
                if x[j] and _bit(basis[c], j):
                    v ^= np.uint64(1)
            x[c] = np.uint8(v)

    xw = np.zeros(nwords, np.uint64)
    for j in range(ncols):
        if x[j]:
            xw[j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    bad = 0
    for i in range(nrows):
        acc = np.uint64(0)
        for w in range(nwords):
            acc ^= rows[i, w] & xw[w]
        if _parity64(acc) != _bit(rows[i], ncols):
            violated[i] = True
            bad += 1
        else:
            violated[i] = False
    return bad


@dataclass(frozen=True)
class SolveResult:
    solution: np.ndarray
    pivot_rows: np.ndarray
    dropped_rows: np.ndarray

    @property
    def consistent(self) -> bool:
        return self.dropped_rows.size == 0


def solve(a, b) -> SolveResult:
    """Solve ``A @ x = b`` over GF(2), keeping the largest consistent prefix.

    Equations are processed in ascending row order. If the system is
    inconsistent the returned ``x`` satisfies every row except
    ``dropped_rows``, each of which conflicts with earlier rows.
    """
    a = as_bits(a, 2)
    b = as_bits(b, 1)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"rows(A)={a.shape[0]} != len(b)={b.shape[0]}")
    nrows, ncols = a.shape
    rows = pack_rows(np.hstack([a, b[:, None]]))
    x = np.zeros(ncols, np.uint8)
    is_pivot = np.zeros(nrows, np.bool_)
    violated = np.zeros(nrows, np.bool_)
    solve_packed(rows, ncols, x, is_pivot, violated)
    return SolveResult(x, np.flatnonzero(is_pivot), np.flatnonzero(violated))
