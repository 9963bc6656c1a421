"""Partitioned BCH codes with additive defect masking.

A ``[n, k, l]`` partitioned code splits the cyclic code generated by
``g_tilde`` into two cyclic codes: the message part ``<g>`` with
``g = g_tilde * q`` (dimension ``k``) and the masking part
``<(x^n + 1) / q>`` (dimension ``l = deg q``). Both lie inside ``<g_tilde>``
and meet only in zero because ``x^n + 1`` is square-free. The masking
codewords spread over the whole block, so defects anywhere can be masked;
the dual of the masking part has ``q``'s reciprocal roots, which bounds how
many arbitrary defects are always maskable. The encoder picks the masking parity ``d`` so that the codeword
agrees with the stuck-at cells; the decoder corrects up to ``t_correct``
random errors with the BCH decoder of ``g_tilde`` and recovers the message
through the message inverse matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from . import bch, gf2
from .gf2 import solve_packed

__all__ = [
    "NORMAL",
    "STUCK0",
    "STUCK1",
    "ALLOCATIONS",
    "DecodeOutcome",
    "EncodeOutcome",
    "PBCHCode",
    "circ",
    "construct",
    "construct_from_t",
    "decode",
    "decode_batch",
    "defect_error_count",
    "defects",
    "encode",
    "encode_batch",
    "allocation_code",
]

# Defect-vector cell states.
STUCK0 = 0
STUCK1 = 1
NORMAL = -1

# (l, r) allocations of the 100 redundant bits of the [1023, 923] family.
ALLOCATIONS = tuple((l, 100 - l) for l in range(0, 101, 10))


def defects(n: int, stuck1=(), stuck0=()) -> np.ndarray:
    """Build a defect vector of length ``n`` from stuck-at positions."""
    s = np.full(n, NORMAL, dtype=np.int8)
    s[list(stuck1)] = STUCK1
    s[list(stuck0)] = STUCK0
    return s


def _check_defects(s_plus, n: int) -> np.ndarray:
    s = np.asarray(s_plus, dtype=np.int8)
    if s.shape[-1] != n:
        raise ValueError(f"defect vector length {s.shape[-1]} != {n}")
    if not np.all((s == NORMAL) | (s == STUCK0) | (s == STUCK1)):
        raise ValueError("defect states must be STUCK0, STUCK1 or NORMAL")
    return s


def circ(x, s_plus) -> np.ndarray:
    """What a defective memory actually stores when ``x`` is written."""
    x = np.asarray(x, dtype=np.uint8)
    s = _check_defects(s_plus, x.shape[-1])
    if s.shape != x.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {s.shape}")
    return np.where(s == NORMAL, x, s).astype(np.uint8)


def defect_error_count(c, s_plus) -> int:
    """Number of cells where the stored value differs from the written one."""
    c = np.asarray(c, dtype=np.uint8)
    return int(np.count_nonzero(circ(c, s_plus) ^ c))


@dataclass(frozen=True, eq=False)
class PBCHCode:
    """A constructed ``[n, k, l]`` partitioned BCH code.

    Matrices follow the column convention ``c = G1 @ m ^ G0 @ d``:
    ``G1`` is ``n x k``, ``G0`` is ``n x l``, ``H_tilde`` is ``n x r`` and
    ``G1_inv`` (the message inverse) is ``n x k``.
    """

    n: int
    k: int
    l: int
    r: int
    t_correct: int
    t_message: int
    gf: bch.GaloisField = field(repr=False)
    g: int = field(repr=False)
    g_tilde: int = field(repr=False)
    G1: np.ndarray = field(repr=False)
    G0: np.ndarray = field(repr=False)
    H_tilde: np.ndarray = field(repr=False)
    G1_inv: np.ndarray = field(repr=False)
    # G0 rows packed for the masking solver, one spare bit for the target
    _g0_packed: np.ndarray = field(repr=False)
    # float32 copies for batched products
    _G1T: np.ndarray = field(repr=False)
    _G0T: np.ndarray = field(repr=False)
    _G1_inv: np.ndarray = field(repr=False)

    @property
    def G_tilde(self) -> np.ndarray:
        return np.hstack([self.G1, self.G0])

    def syndrome(self, y) -> np.ndarray:
        """``H_tilde.T @ y``: the remainder of ``y(x)`` modulo ``g_tilde``."""
        return gf2.matmul(np.asarray(y, dtype=np.uint8), self.H_tilde)


def _shift_matrix(poly: int, n: int, count: int) -> np.ndarray:
    """``n x count`` matrix whose column i is ``x**i * poly``."""
    if count == 0:
        return np.zeros((n, 0), dtype=np.uint8)
    base = bch.poly_to_bits(poly, n)
    out = np.zeros((n, count), dtype=np.uint8)
    deg = bch.poly_degree(poly)
    for i in range(count):
        out[i : i + deg + 1, i] = base[: deg + 1]
    return out


def _remainder_matrix(poly: int, n: int) -> np.ndarray:
    """``n x deg(poly)`` matrix whose row i holds ``x**i mod poly``."""
    r = bch.poly_degree(poly)
    out = np.zeros((n, r), dtype=np.uint8)
    rem = 1
    top = 1 << r
    for i in range(n):
        if r:
            out[i] = bch.poly_to_bits(rem, r)
        rem <<= 1
        if rem & top:
            rem ^= poly
    return out


def _largest_t(gf: bch.GaloisField, t: int) -> int:
    """Largest designed ``t`` whose generator equals that of ``t``."""
    g = bch.bch_generator(gf, t)
    while 2 * (t + 1) + 1 <= gf.order and bch.bch_generator(gf, t + 1) == g:
        t += 1
    return t


def _t_for_degree(gf: bch.GaloisField, degree: int) -> int:
    t = 0
    while 2 * t + 1 <= gf.order:
        d = bch.poly_degree(bch.bch_generator(gf, t))
        if d == degree:
            return t
        if d > degree:
            break
        t += 1
    raise ValueError(f"no narrow-sense BCH generator of degree {degree} for m={gf.m}")


def construct_from_t(gf: bch.GaloisField, t_correct: int, t_message: int) -> PBCHCode:
    """Build the partitioned code from the two designed correction radii.

    ``g_tilde = bch_generator(t_correct)`` fixes ``r``;
    ``g = bch_generator(t_message)`` fixes ``l + r``. The masking generator
    matrix ``G0`` holds the first ``l`` shifts of ``(x^n + 1) / q`` with
    ``q = g / g_tilde``.
    """
    if t_message < t_correct:
        raise ValueError("t_message must be >= t_correct")
    n = gf.order
    g_tilde = bch.bch_generator(gf, t_correct)
    g = bch.bch_generator(gf, t_message)
    if bch.poly_mod(g, g_tilde):
        raise AssertionError("g_tilde does not divide g")
    r = bch.poly_degree(g_tilde)
    l = bch.poly_degree(g) - r
    k = n - l - r
    if k <= 0:
        raise ValueError(f"no message bits left: n={n}, l={l}, r={r}")

    q = bch.poly_divmod(g, g_tilde)[0]
    masking_gen = bch.poly_divmod((1 << n) | 1, q)[0]
    G1 = _shift_matrix(g, n, k)
    G0 = _shift_matrix(masking_gen, n, l)
    G_tilde = np.hstack([G1, G0])
    H_tilde = _remainder_matrix(g_tilde, n)
    target = np.zeros((k + l, k), dtype=np.uint8)
    target[:k] = np.eye(k, dtype=np.uint8)
    G1_inv = gf2.solve_many(G_tilde.T, target)

    if np.any(gf2.matmul(H_tilde.T, G_tilde)):
        raise AssertionError("H_tilde^T G_tilde != 0")
    if not np.array_equal(gf2.matmul(G1_inv.T, G1), np.eye(k, dtype=np.uint8)):
        raise AssertionError("G1_inv^T G1 != I")
    if np.any(gf2.matmul(G1_inv.T, G0)):
        raise AssertionError("G1_inv^T G0 != 0")
    if gf2.rank(G_tilde.T) != k + l:
        raise AssertionError("message and masking subspaces intersect")

    for a in (G1, G0, H_tilde, G1_inv):
        a.flags.writeable = False
    return PBCHCode(
        n=n,
        k=k,
        l=l,
        r=r,
        t_correct=_largest_t(gf, t_correct),
        t_message=t_message,
        gf=gf,
        g=g,
        g_tilde=g_tilde,
        G1=G1,
        G0=G0,
        H_tilde=H_tilde,
        G1_inv=G1_inv,
        _g0_packed=gf2.pack_rows(G0, l + 1),
        _G1T=np.ascontiguousarray(G1.T, dtype=np.float32),
        _G0T=np.ascontiguousarray(G0.T, dtype=np.float32),
        _G1_inv=np.ascontiguousarray(G1_inv, dtype=np.float32),
    )


def construct(n: int, k: int, l: int, gf: bch.GaloisField) -> PBCHCode:
    """Build the ``[n, k, l]`` code; ``r = n - k - l`` and ``l + r`` must be BCH degrees."""
    if n != gf.order:
        raise ValueError(f"n={n} does not match the field length {gf.order}")
    r = n - k - l
    if k <= 0 or l < 0 or r < 0:
        raise ValueError(f"invalid parameters n={n}, k={k}, l={l}")
    return construct_from_t(gf, _t_for_degree(gf, r), _t_for_degree(gf, l + r))


@lru_cache(maxsize=None)
def allocation_code(l: int) -> PBCHCode:
    """The ``[1023, 923, l]`` code with ``r = 100 - l`` (cached)."""
    return construct(1023, 923, l, _field10())


@lru_cache(maxsize=1)
def _field10() -> bch.GaloisField:
    return bch.make_field(10)


# -- encoding ---------------------------------------------------------------

@dataclass(frozen=True)
class EncodeOutcome:
    codeword: np.ndarray
    d: np.ndarray
    unmasked_count: int


@numba.njit(cache=True)
def _mask_kernel(g0_packed, l, ptr, pos, target, d_out, unmasked):
    nwords = g0_packed.shape[1]
    x = np.zeros(max(l, 1), np.uint8)
    for b in range(ptr.shape[0] - 1):
        lo, hi = ptr[b], ptr[b + 1]
        cnt = hi - lo
        if cnt == 0:
            unmasked[b] = 0
            continue
        rows = np.empty((cnt, nwords), np.uint64)
        for i in range(cnt):
            for w in range(nwords):
                rows[i, w] = g0_packed[pos[lo + i], w]
            if target[lo + i]:
                rows[i, l >> 6] |= np.uint64(1) << np.uint64(l & 63)
        is_pivot = np.zeros(cnt, np.bool_)
        violated = np.zeros(cnt, np.bool_)
        unmasked[b] = solve_packed(rows, l, x, is_pivot, violated)
        for j in range(l):
            d_out[b, j] = x[j]


def encode_batch(code: PBCHCode, messages, s_plus) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Encode each row of ``messages`` against the matching row of ``s_plus``.

    Returns ``(codewords, d, unmasked_counts)``.
    """
    messages = np.atleast_2d(np.asarray(messages, dtype=np.uint8))
    s = np.atleast_2d(_check_defects(s_plus, code.n))
    if messages.shape[1] != code.k:
        raise ValueError(f"message length {messages.shape[1]} != k={code.k}")
    if s.shape[0] != messages.shape[0]:
        raise ValueError("one defect vector per message required")
    nb = messages.shape[0]
    c1 = gf2.matmul(messages, code._G1T)
    rows, cols = np.nonzero(s != NORMAL)
    ptr = np.zeros(nb + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=nb), out=ptr[1:])
    target = ((s[rows, cols] == STUCK1).astype(np.uint8) ^ c1[rows, cols]).astype(np.uint8)
    d = np.zeros((nb, code.l), dtype=np.uint8)
    unmasked = np.zeros(nb, dtype=np.int64)
    _mask_kernel(code._g0_packed, code.l, ptr, cols.astype(np.int64), target, d, unmasked)
    c = c1 ^ gf2.matmul(d, code._G0T) if code.l else c1
    return c, d, unmasked


def encode(code: PBCHCode, m, s_plus) -> EncodeOutcome:
    """Additive encoding: ``c = G1 m + G0 d`` with ``d`` masking as many defects as possible.

    ``d`` solves the defect-restricted system ``G0[U] d = (s ^ G1 m)[U]`` with
    equations taken in cell order; cells whose equation conflicts with earlier
    ones stay unmasked.
    """
    m = gf2.as_bits(m, 1)
    c, d, unmasked = encode_batch(code, m[None, :], np.asarray(s_plus)[None, :])
    return EncodeOutcome(c[0], d[0], int(unmasked[0]))


# -- decoding ---------------------------------------------------------------

@dataclass(frozen=True)
class DecodeOutcome:
    message: np.ndarray | None

    @property
    def failed(self) -> bool:
        return self.message is None


def decode_batch(code: PBCHCode, received) -> tuple[np.ndarray, np.ndarray]:
    """Decode each row; returns ``(messages, failed)``.

    Rows flagged in ``failed`` carry the uncorrected ``G1_inv.T @ y``.
    """
    y = np.atleast_2d(gf2.as_bits(received))
    if y.shape[1] != code.n:
        raise ValueError(f"received length {y.shape[1]} != n={code.n}")
    locs, counts = bch.bch_decode_batch(code.gf, code.t_correct, y)
    c_hat = y.copy()
    for b in np.flatnonzero(counts > 0):
        c_hat[b, locs[b, : counts[b]]] ^= 1
    return gf2.matmul(c_hat, code._G1_inv), counts < 0


def decode(code: PBCHCode, y) -> DecodeOutcome:
    """Correct random errors, then apply the message inverse matrix."""
    msgs, failed = decode_batch(code, gf2.as_bits(y, 1)[None, :])
    return DecodeOutcome(None if failed[0] else msgs[0])
