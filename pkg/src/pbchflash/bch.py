"""GF(2^m) arithmetic, binary polynomials and narrow-sense BCH codes.

Binary polynomials are Python ints: bit ``i`` is the coefficient of ``x**i``.
Field elements are ints in ``[0, 2**m)`` in the polynomial basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from . import gf2

__all__ = [
    "PRIMITIVE_POLYS",
    "DecodeResult",
    "GaloisField",
    "bch_decode",
    "bch_decode_batch",
    "bch_generator",
    "bits_to_poly",
    "cyclotomic_coset",
    "make_field",
    "minimal_polynomial",
    "poly_add",
    "poly_degree",
    "poly_divmod",
    "poly_gcd",
    "poly_lcm",
    "poly_mod",
    "poly_mul",
    "poly_to_bits",
    "syndromes",
]

# Conventional primitive polynomials; m = 10 uses x^10 + x^3 + 1.
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


# -- binary polynomials -----------------------------------------------------

def poly_degree(a: int) -> int:
    """Degree of ``a``; -1 for the zero polynomial."""
    return a.bit_length() - 1


def poly_add(a: int, b: int) -> int:
    return a ^ b


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    db = poly_degree(b)
    q = 0
    while a and poly_degree(a) >= db:
        shift = poly_degree(a) - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def poly_mod(a: int, b: int) -> int:
    return poly_divmod(a, b)[1]


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def poly_lcm(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return poly_divmod(poly_mul(a, b), poly_gcd(a, b))[0]


def poly_to_bits(a: int, length: int | None = None) -> np.ndarray:
    """Coefficient vector, lowest degree first."""
    n = max(poly_degree(a) + 1, 0) if length is None else length
    if poly_degree(a) >= n:
        raise ValueError(f"degree {poly_degree(a)} does not fit in {n} coefficients")
    return np.array([(a >> i) & 1 for i in range(n)], dtype=np.uint8)


def bits_to_poly(bits) -> int:
    out = 0
    for i in np.flatnonzero(gf2.as_bits(bits, 1)):
        out |= 1 << int(i)
    return out


# -- the field --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaloisField:
    """GF(2^m) with log/antilog tables.

    ``exp`` has length ``2 * order`` so a product of two logs never needs a
    modulo. ``log[0]`` is unused.
    """

    m: int
    primitive_poly: int
    exp: np.ndarray = field(repr=False)
    log: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        """Number of nonzero elements, also the BCH code length."""
        return (1 << self.m) - 1

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp[(int(self.log[a]) * e) % self.order])


def make_field(m: int, primitive_poly: int | None = None) -> GaloisField:
    """Build GF(2^m), checking that the polynomial really is primitive."""
    if not 2 <= m <= 16:
        raise ValueError(f"unsupported extension degree m={m}; need 2 <= m <= 16")
    poly = PRIMITIVE_POLYS[m] if primitive_poly is None else primitive_poly
    if poly_degree(poly) != m:
        raise ValueError(f"polynomial {poly:#x} is not of degree {m}")
    order = (1 << m) - 1
    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.zeros(order + 1, dtype=np.int64)
    seen = np.zeros(order + 1, dtype=bool)
    x = 1
    for i in range(order):
        if seen[x]:
            raise ValueError(f"polynomial {poly:#x} is not primitive (alpha has order {i})")
        seen[x] = True
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= poly
    if x != 1:
        raise ValueError(f"polynomial {poly:#x} is not primitive")
    exp[order:] = exp[:order]
    exp.flags.writeable = False
    log.flags.writeable = False
    return GaloisField(m, poly, exp, log)


def cyclotomic_coset(i: int, m: int) -> tuple[int, ...]:
    """Cyclotomic coset of ``i`` modulo ``2**m - 1``, sorted."""
    n = (1 << m) - 1
    i %= n
    out = {i}
    j = (2 * i) % n
    while j not in out:
        out.add(j)
        j = (2 * j) % n
    return tuple(sorted(out))


def minimal_polynomial(gf: GaloisField, i: int) -> int:
    """Minimal polynomial of ``alpha**i`` over GF(2)."""
    coeffs = [1]  # in GF(2^m), lowest degree first
    for j in cyclotomic_coset(i, gf.m):
        root = gf.alpha_pow(j)
        nxt = [0] * (len(coeffs) + 1)
        for d, c in enumerate(coeffs):
            nxt[d + 1] ^= c
            nxt[d] ^= gf.mul(c, root)
        coeffs = nxt
    if any(c > 1 for c in coeffs):
        raise AssertionError("minimal polynomial has non-binary coefficients")
    return sum(c << d for d, c in enumerate(coeffs))


def bch_generator(gf: GaloisField, t: int) -> int:
    """Generator of the narrow-sense binary BCH code with designed distance ``2t + 1``.

    This is the LCM of the minimal polynomials of ``alpha**1 .. alpha**(2t)``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if 2 * t + 1 > gf.order:
        raise ValueError(f"designed distance {2 * t + 1} exceeds code length {gf.order}")
    return _generator_cached(gf, t)


@lru_cache(maxsize=None)
def _generator_cached(gf: GaloisField, t: int) -> int:
    g = 1
    for i in range(1, 2 * t + 1):
        g = poly_lcm(g, minimal_polynomial(gf, i))
    return g


# -- decoding ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _syndrome_matrix(gf: GaloisField, t: int) -> np.ndarray:
    """0/1 matrix mapping a received word to the bits of ``S_1 .. S_2t``."""
    n, m = gf.order, gf.m
    j = np.arange(1, 2 * t + 1)
    i = np.arange(n)
    powers = gf.exp[np.outer(i, j) % n]  # (n, 2t) field elements alpha^(ij)
    bits = (powers[:, :, None] >> np.arange(m)) & 1
    return np.ascontiguousarray(bits.reshape(n, 2 * t * m), dtype=np.float32)


def syndromes(gf: GaloisField, t: int, received: np.ndarray) -> np.ndarray:
    """Power-sum syndromes ``S_j = r(alpha**j)``, ``j = 1..2t``; shape ``(..., 2t)``."""
    r = np.asarray(received, dtype=np.uint8)
    if t == 0:
        return np.zeros(r.shape[:-1] + (0,), dtype=np.int64)
    bits = gf2.matmul(r, _syndrome_matrix(gf, t)).astype(np.int64)
    bits = bits.reshape(r.shape[:-1] + (2 * t, gf.m))
    return (bits << np.arange(gf.m)).sum(axis=-1)


@numba.njit(cache=True)
def _gmul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@numba.njit(cache=True)
def _berlekamp_massey(s, t, n, exp, log, lam):
    """Error-locator polynomial from 2t syndromes; returns its length L."""
    size = 2 * t + 1
    prev = np.zeros(size, np.int64)
    tmp = np.zeros(size, np.int64)
    for i in range(size):
        lam[i] = 0
    lam[0] = 1
    prev[0] = 1
    length = 0
    shift = 1
    b = 1
    for r in range(2 * t):
        d = s[r]
        for i in range(1, length + 1):
            d ^= _gmul(lam[i], s[r - i], exp, log)
        if d == 0:
            shift += 1
            continue
        coef = exp[(log[d] - log[b] + n) % n]
        if 2 * length <= r:
            for i in range(size):
                tmp[i] = lam[i]
            for i in range(size - shift):
                lam[i + shift] ^= _gmul(coef, prev[i], exp, log)
            length = r + 1 - length
            for i in range(size):
                prev[i] = tmp[i]
            b = d
            shift = 1
        else:
            for i in range(size - shift):
                lam[i + shift] ^= _gmul(coef, prev[i], exp, log)
            shift += 1
    return length


@numba.njit(cache=True)
def _decode_kernel(synd, t, n, exp, log, locs, counts):
    """Berlekamp-Massey plus Chien search for each row of ``synd``.

    ``counts[b]`` is the number of located errors, or -1 when the locator
    degree exceeds ``t`` or its roots in the field do not match its degree.
    """
    lam = np.zeros(2 * t + 1, np.int64)
    for b in range(synd.shape[0]):
        zero = True
        for j in range(2 * t):
            if synd[b, j] != 0:
                zero = False
                break
        if zero:
            counts[b] = 0
            continue
        length = _berlekamp_massey(synd[b], t, n, exp, log, lam)
        if length > t or lam[length] == 0:
            counts[b] = -1
            continue
        found = 0
        for i in range(n):
            # evaluate lambda at alpha^(-i)
            acc = 1
            for k in range(1, length + 1):
                if lam[k] != 0:
                    acc ^= exp[(log[lam[k]] + (n - i) * k) % n]
            if acc == 0:
                if found < t:
                    locs[b, found] = i
                found += 1
        counts[b] = found if found == length else -1


@dataclass(frozen=True)
class DecodeResult:
    """Error positions found by the decoder, or ``None`` on decoding failure."""

    error_locations: np.ndarray | None

    @property
    def ok(self) -> bool:
        return self.error_locations is not None


def bch_decode_batch(gf: GaloisField, t: int, received: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decode each row of ``received``.

    Returns ``(locs, counts)``: ``locs[b, :counts[b]]`` are the error
    positions of row ``b``; ``counts[b] == -1`` marks a decoding failure.
    """
    received = np.atleast_2d(np.asarray(received, dtype=np.uint8))
    if received.shape[1] != gf.order:
        raise ValueError(f"received length {received.shape[1]} != {gf.order}")
    nb = received.shape[0]
    locs = np.zeros((nb, max(t, 1)), dtype=np.int64)
    counts = np.zeros(nb, dtype=np.int64)
    if t == 0:
        return locs[:, :0], counts
    synd = np.ascontiguousarray(syndromes(gf, t, received))
    _decode_kernel(synd, t, gf.order, gf.exp, gf.log, locs, counts)
    return locs, counts


def bch_decode(gf: GaloisField, t: int, received) -> DecodeResult:
    """Bounded-distance decoding of the narrow-sense ``t``-error BCH code."""
    received = gf2.as_bits(received, 1)
    locs, counts = bch_decode_batch(gf, t, received[None, :])
    if counts[0] < 0:
        return DecodeResult(None)
    return DecodeResult(np.sort(locs[0, : counts[0]]))
