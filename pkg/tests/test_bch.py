import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pbchflash import bch


def codeword(gf, g, rng):
    n = gf.order
    k = n - bch.poly_degree(g)
    msg = bch.bits_to_poly(rng.integers(0, 2, k, dtype=np.uint8))
    return bch.poly_to_bits(bch.poly_mul(msg, g), n)


# -- polynomials ---------------------------------------------------------------

def test_square_in_characteristic_two():
    assert bch.poly_mul(0b11, 0b11) == 0b101


def test_lcm_of_equal_polys():
    assert bch.poly_lcm(0b11, 0b11) == 0b11


def test_long_division_reconstructs():
    a, b = 0b10011, 0b111
    q, r = bch.poly_divmod(a, b)
    assert bch.poly_add(bch.poly_mul(q, b), r) == a
    assert bch.poly_degree(r) < bch.poly_degree(b)
    assert (q, r) == (0b110, 0b1)  # x^4+x+1 = (x^2+x)(x^2+x+1) + 1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        bch.poly_mod(0b101, 0)


@given(st.integers(0, 2**40), st.integers(1, 2**20))
def test_divmod_identity(a, b):
    q, r = bch.poly_divmod(a, b)
    assert bch.poly_add(bch.poly_mul(q, b), r) == a
    assert bch.poly_degree(r) < bch.poly_degree(b)


@given(st.integers(1, 2**16), st.integers(1, 2**16))
def test_lcm_divisible_by_both(a, b):
    lcm = bch.poly_lcm(a, b)
    assert bch.poly_mod(lcm, a) == 0 and bch.poly_mod(lcm, b) == 0
    assert bch.poly_mul(lcm, bch.poly_gcd(a, b)) == bch.poly_mul(a, b)


@given(st.integers(0, 2**50))
def test_bits_roundtrip(a):
    assert bch.bits_to_poly(bch.poly_to_bits(a, 64)) == a


# -- fields -------------------------------------------------------------------

def test_gf8_tables_match_hand_computation():
    gf = bch.make_field(3, 0b1011)
    # successive powers of x reduced by x^3 + x + 1
    assert gf.exp[:7].tolist() == [1, 2, 4, 3, 6, 7, 5]
    for a, b in itertools.product(range(1, 8), repeat=2):
        # schoolbook product reduced mod x^3 + x + 1
        assert gf.mul(a, b) == bch.poly_mod(bch.poly_mul(a, b), 0b1011)


def test_gf16_alpha_order():
    gf = bch.make_field(4)
    assert gf.order == 15
    assert gf.alpha_pow(15) == 1
    assert all(gf.alpha_pow(j) != 1 for j in range(1, 15))


def test_gf1024_size_and_default_poly():
    gf = bch.make_field(10)
    assert gf.order == 1023
    assert gf.primitive_poly == (1 << 10) | (1 << 3) | 1
    assert sorted(gf.exp[:1023].tolist()) == list(range(1, 1024))


@pytest.mark.parametrize("m", [1, 17])
def test_unsupported_degree(m):
    with pytest.raises(ValueError):
        bch.make_field(m)


def test_non_primitive_poly_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but alpha has order 5
    with pytest.raises(ValueError):
        bch.make_field(4, 0b11111)


@pytest.mark.parametrize("m", range(2, 17))
def test_log_antilog_roundtrip(m):
    gf = bch.make_field(m)
    x = np.arange(1, gf.order + 1)
    assert np.array_equal(gf.exp[gf.log[x]], x)


@settings(max_examples=200)
@given(st.integers(1, 1023), st.integers(1, 1023), st.integers(1, 1023))
def test_field_axioms(a, b, c):
    gf = bch.make_field(10)
    assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
    assert gf.mul(a, b ^ c) == gf.mul(a, b) ^ gf.mul(a, c)
    assert gf.mul(a, gf.inv(a)) == 1


# -- generators ----------------------------------------------------------------

def test_hamming_generator():
    assert bch.bch_generator(bch.make_field(4), 1) == 0b10011


def test_t0_generator_is_one(gf10):
    assert bch.bch_generator(gf10, 0) == 1


def test_designed_distance_too_large(gf4):
    with pytest.raises(ValueError):
        bch.bch_generator(gf4, 8)


@pytest.mark.parametrize("t", range(0, 11))
def test_m10_degrees_follow_cosets(gf10, t):
    cosets = {bch.cyclotomic_coset(i, 10) for i in range(1, 2 * t + 1)}
    g = bch.bch_generator(gf10, t)
    assert bch.poly_degree(g) == sum(len(c) for c in cosets) == 10 * t
    assert bch.poly_mod((1 << 1023) | 1, g) == 0


@pytest.mark.parametrize("t", range(1, 8))
def test_generator_roots(gf4, t):
    g = bch.bch_generator(gf4, t)
    assert bch.poly_mod((1 << 15) | 1, g) == 0
    for j in range(1, min(2 * t, 14) + 1):
        value = 0
        for i in range(bch.poly_degree(g) + 1):
            if (g >> i) & 1:
                value ^= gf4.alpha_pow(i * j)
        assert value == 0


# -- decoding ------------------------------------------------------------------

def test_clean_codeword_decodes_empty(gf10, rng):
    g = bch.bch_generator(gf10, 10)
    res = bch.bch_decode(gf10, 10, codeword(gf10, g, rng))
    assert res.ok and res.error_locations.size == 0


def test_ten_errors_recovered(gf10, rng):
    g = bch.bch_generator(gf10, 10)
    for _ in range(50):
        c = codeword(gf10, g, rng)
        err = np.sort(rng.choice(1023, 10, replace=False))
        y = c.copy()
        y[err] ^= 1
        res = bch.bch_decode(gf10, 10, y)
        assert res.ok and np.array_equal(res.error_locations, err)


def test_beyond_radius_never_reports_true_pattern(gf4, rng):
    g = bch.bch_generator(gf4, 1)
    for a, b in itertools.combinations(range(15), 2):
        c = codeword(gf4, g, rng)
        y = c.copy()
        y[[a, b]] ^= 1
        res = bch.bch_decode(gf4, 1, y)
        assert not (res.ok and set(res.error_locations) == {a, b})


@pytest.mark.parametrize("t", [1, 2, 3])
def test_exhaustive_small_field_roundtrip(gf4, t):
    g = bch.bch_generator(gf4, t)
    rng = np.random.default_rng(t)
    for w in range(t + 1):
        for err in itertools.combinations(range(15), w):
            y = codeword(gf4, g, rng)
            y[list(err)] ^= 1
            res = bch.bch_decode(gf4, t, y)
            assert res.ok and res.error_locations.tolist() == list(err)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_sampled_roundtrip_m10(t, seed):
    gf = bch.make_field(10)
    rng = np.random.default_rng(seed)
    w = int(rng.integers(0, t + 1))
    err = np.sort(rng.choice(1023, w, replace=False))
    y = codeword(gf, bch.bch_generator(gf, t), rng)
    y[err] ^= 1
    res = bch.bch_decode(gf, t, y)
    assert res.ok and np.array_equal(res.error_locations, err)


def test_batch_failures_or_valid_miscorrections(gf10, rng):
    t = 3
    g = bch.bch_generator(gf10, t)
    ys = np.array([codeword(gf10, g, rng) for _ in range(300)])
    for y in ys:
        y[rng.choice(1023, 8, replace=False)] ^= 1
    locs, counts = bch.bch_decode_batch(gf10, t, ys)
    assert np.all((counts == -1) | ((counts >= 1) & (counts <= t)))
    # a non-failure beyond the radius must land on some other codeword
    for y, loc, cnt in zip(ys, locs, counts):
        if cnt > 0:
            z = y.copy()
            z[loc[:cnt]] ^= 1
            assert bch.poly_mod(bch.bits_to_poly(z), g) == 0
    # random syndromes decode with probability about C(1023, 3) / 2**30 ~ 0.17
    assert 0.6 < np.mean(counts == -1) < 0.95


def test_length_mismatch(gf4):
    with pytest.raises(ValueError):
        bch.bch_decode(gf4, 1, np.zeros(14, dtype=np.uint8))
