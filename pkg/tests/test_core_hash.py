import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle
from pvc_commit.bits import bits_to_str
from pvc_commit.core_hash import (
    Construction,
    IndexedHashParams,
    IndexOutOfRange,
    InputTooLong,
    InvalidQ,
    OddBlock,
    ParameterError,
    PreparedInput,
    andreduce,
    block_size,
    colliding_index_fraction,
    digest_c1,
    digest_c2,
    expand_mask,
    index_count,
    indexed_hash,
    parity,
    process,
)

R0 = bytes(16)
R1 = bytes(range(16))

# frozen from tests/oracle.py (string bits + hashlib)
KAT_C2_N8_B4_I3 = "67ae0930a7e55296c7c03124bda407fb32102371bdd9bb03ded91f75f8c41c9b"
KAT_MASK_ZERO_KEY_I0_B8 = "00110100"
KAT_ORACLE = [
    (0, 22, 22, 0, "b81f7d4e385adada34f7fa6e195d02527937110dfab833e56b42949f1b58ed00"),
    (1, 22, 4, 5, "16ded1f521cbf8ab5efd174506117394500782d7f5f54ce634471b63f0dc33ad"),
    (2, 22, 4, 9, "2da599f6417cd72815304cc19f2c55c76832c8d8c39a5549370382f31caa235e"),
    (3, 22, 8, 7, "b34aa3cced91f91883597e525a89b5c485d6e68848009dbca55a19de524d476b"),
]


def _params(c, n, b):
    if c == 0:
        return IndexedHashParams.c0(n)
    if c == 1:
        return IndexedHashParams.c1(n, b)
    if c == 2:
        return IndexedHashParams.c2(n, b)
    return IndexedHashParams.c3(n, Fraction(3, 4), 10, b)


@pytest.mark.parametrize("bits,want", [("0000", 0), ("1011", 1), ("", 0)])
def test_parity(bits, want):
    assert parity(bits) == want


@pytest.mark.parametrize("bits,want", [("00", "0"), ("1101", "10"), ("1111", "11")])
def test_andreduce(bits, want):
    assert bits_to_str(andreduce(bits)) == want


def test_andreduce_rejects_odd():
    with pytest.raises(OddBlock):
        andreduce("101")


@pytest.mark.parametrize("i,block,want", [("0000", "1011", 0), ("1100", "1010", 1), ("1111", "1010", 0)])
def test_digest_c1(i, block, want):
    assert digest_c1(i, block) == want


@pytest.mark.parametrize("i,block,want", [("1011", "1011", 0), ("0000", "1100", 1), ("1100", "1010", 0)])
def test_digest_c2(i, block, want):
    assert digest_c2(i, block) == want


def test_expand_mask():
    assert np.array_equal(expand_mask(R0, 5, 8), expand_mask(R0, 5, 8))
    assert np.array_equal(expand_mask(R0, 5, 16)[:8], expand_mask(R0, 5, 8))
    assert bits_to_str(expand_mask(R0, 0, 8)) == KAT_MASK_ZERO_KEY_I0_B8
    assert oracle.mask(R0, 0, 8) == KAT_MASK_ZERO_KEY_I0_B8


def test_process_examples():
    assert bits_to_str(process(IndexedHashParams.c1(8, 4), 15, "10110001")) == "11"
    p = IndexedHashParams.c2(12, 4)
    for i in range(16):
        x = format(i, "04b") * 3
        assert not process(p, i, x).any()
    assert bits_to_str(process(IndexedHashParams.c0(4), 0, "1010")) == "1010"


def test_indexed_hash_kat():
    p = IndexedHashParams.c2(8, 4)
    got = indexed_hash(p, 3, R0, "10110001").hex()
    assert got == KAT_C2_N8_B4_I3
    assert oracle.H(2, 8, 4, 3, R0, "10110001") == KAT_C2_N8_B4_I3


@pytest.mark.parametrize("c,n,b,i,want", KAT_ORACLE)
def test_kat_all_constructions(c, n, b, i, want):
    assert indexed_hash(_params(c, n, b), i, R1, "1011001110001111010110").hex() == want


def test_indexed_hash_deterministic_and_r_sensitive():
    p = IndexedHashParams.c2(8, 4)
    assert indexed_hash(p, 1, R0, "1011") == indexed_hash(p, 1, R0, "1011")
    assert indexed_hash(p, 1, R0, "1011") != indexed_hash(p, 1, R1, "1011")


@pytest.mark.parametrize("n,want", [(2 ** 18, 512), (2 ** 22, 1024), (100, 10), (2 ** 14, 128), (7, 4)])
def test_block_size(n, want):
    assert block_size(n) == want


@pytest.mark.parametrize("q,sigma,b,want", [
    (Fraction(5, 8), 40, 1024, 34080), (Fraction(5, 8), 40, 128, 5408), (Fraction(3, 4), 10, 8, 152),
])
def test_index_count(q, sigma, b, want):
    assert index_count(q, sigma, b) == want
    assert oracle.index_count(q.numerator, q.denominator, sigma, b) == want


def test_index_count_pole():
    with pytest.raises(InvalidQ):
        index_count(Fraction(1, 2), 40, 8)


def test_param_validation():
    with pytest.raises(OddBlock):
        IndexedHashParams.c2(9, 3)
    with pytest.raises(ParameterError):
        IndexedHashParams(n=8, b=4, q=Fraction(1, 2), sigma=0, index_count=8, construction=Construction.C2)
    with pytest.raises(ParameterError):
        IndexedHashParams.c3(64, Fraction(3, 4), 10, 8).__class__(
            n=64, b=8, q=Fraction(3, 4), sigma=10, index_count=151, construction=Construction.C3)
    with pytest.raises(InvalidQ):
        IndexedHashParams.c3(64, Fraction(1, 1), 10)


def test_input_and_index_errors():
    p = IndexedHashParams.c2(8, 4)
    with pytest.raises(InputTooLong):
        process(p, 0, "1" * 9)
    with pytest.raises(IndexOutOfRange):
        process(p, 16, "1")
    with pytest.raises(ParameterError):
        indexed_hash(p, 0, bytes(15), "1")


def test_colliding_fraction_examples():
    p = IndexedHashParams.c2(4, 4)
    assert colliding_index_fraction(p, R0, "1011", R0, "1011") == 1
    assert colliding_index_fraction(p, R0, "1011", R0, "0011") == Fraction(1, 2)
    p0 = IndexedHashParams.c0(4)
    assert colliding_index_fraction(p0, R0, "1011", R0, "0011") == 0


def test_colliding_fraction_distinct_r_uses_hashes():
    p = IndexedHashParams.c2(4, 4)
    assert colliding_index_fraction(p, R0, "1011", R1, "1011") == 0


@pytest.mark.parametrize("c", [1, 2])
@pytest.mark.parametrize("b", [2, 4, 6])
def test_exact_half_single_block(c, b):
    p = _params(c, b, b)
    xs = [format(v, f"0{b}b") for v in range(1 << b)]
    digests = {x: PreparedInput(p, x).digest_many(range(1 << b))[:, 0] for x in xs}
    for x, x2 in itertools.permutations(xs, 2):
        assert int((digests[x] == digests[x2]).sum()) * 2 == 1 << b


@pytest.mark.parametrize("c", [1, 2])
def test_multi_block_at_most_half(c):
    p = _params(c, 12, 4)
    rng = np.random.default_rng(1)
    for _ in range(200):
        x, x2 = rng.integers(0, 2, (2, 12), dtype=np.uint8)
        if np.array_equal(x, x2):
            continue
        assert colliding_index_fraction(p, R0, x, R0, x2) <= Fraction(1, 2)


def test_c3_bound_sampled():
    # the exhaustive version is an acceptance criterion
    p = IndexedHashParams.c3(8, Fraction(3, 4), 10, 8)
    assert p.index_count == 152
    idx = np.arange(152)
    d = np.stack([PreparedInput(p, format(v, "08b")).digest_many(idx)[:, 0] for v in range(256)])
    rng = np.random.default_rng(2)
    for _ in range(2000):
        a, b = rng.choice(256, 2, replace=False)
        assert (d[a] == d[b]).sum() <= 114


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([1, 2, 3]), st.integers(0, 2 ** 20 - 1), st.integers(1, 20), st.integers(0, 10))
def test_fast_path_matches_oracle(c, xv, xlen, pad):
    n, b = 24, 4 if c != 3 else 8
    p = _params(c, n, b)
    x = format(xv, "020b")[:xlen]
    i = xv % p.index_count
    assert bits_to_str(process(p, i, x)) == oracle.digest_string(c, n, b, i, x)
    assert np.array_equal(process(p, i, x), process(p, i, x + "0" * min(pad, n - xlen)))


def test_digest_many_matches_digest():
    p = IndexedHashParams.c3(64, Fraction(3, 4), 10, 8)
    x = np.random.default_rng(3).integers(0, 2, 60, dtype=np.uint8)
    prep = PreparedInput(p, x)
    many = prep.digest_many(np.arange(p.index_count), chunk=17)
    for i in range(p.index_count):
        assert np.array_equal(many[i], prep.digest(i))
