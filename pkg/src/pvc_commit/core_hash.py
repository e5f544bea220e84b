"""Indexed hash functions built from a fixed collision-resistant hash.

Every construction follows the same shape: split the input into ``b``-bit
blocks, squeeze each block to a single bit with a digest function that
depends on the index, and hash ``r || i || digest-bits`` with SHA3-256.

=====  ======================================  ==============
name   block digest                            index space
=====  ======================================  ==============
C0     identity (whole input is the "digest")  1
C1     parity(block & i)                       2^b
C2     parity(andreduce(block ^ i))            2^b
C3     parity(andreduce(block ^ prng(i)))      ~(sigma+b+1)/(2(q-1/2)^2)
=====  ======================================  ==============
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .bits import BitLike, as_bits, int_to_bits, pack_words, pad_bits, word_parity

RANDOMNESS_BYTES = 16
DIGEST_BYTES = 32
FAMILY_KEY_BYTES = 16
MAX_ENUMERABLE_BLOCK = 20
MAX_BLOCK = 1024

HASH_SHA3_256 = 1
XOF_SHAKE_256 = 1

MASK_DOMAIN = b"PVC-PRNG"

RationalLike = Union[Fraction, str, int, float]


class PVCError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(PVCError, ValueError):
    pass


class InvalidQ(ParameterError):
    pass


class OddBlock(PVCError, ValueError):
    pass


class InputTooLong(PVCError, ValueError):
    pass


class IndexOutOfRange(PVCError, IndexError):
    pass


class Construction(enum.IntEnum):
    C0 = 0
    C1 = 1
    C2 = 2
    C3 = 3

    @classmethod
    def parse(cls, value: "Construction | str | int") -> "Construction":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls[value.strip().upper()]
        return cls(value)


def as_fraction(q: RationalLike) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, float):
        return Fraction(q).limit_denominator(1 << 31)
    return Fraction(q)


@dataclass(frozen=True)
class IndexedHashParams:
    """Public parameters of one indexed hash instance."""

    n: int
    b: int
    q: Fraction
    sigma: int
    index_count: int
    construction: Construction
    hash_id: int = HASH_SHA3_256
    xof_id: int = XOF_SHAKE_256
    family_key: bytes = field(default=bytes(FAMILY_KEY_BYTES))

    def __post_init__(self):
        object.__setattr__(self, "construction", Construction.parse(self.construction))
        object.__setattr__(self, "q", as_fraction(self.q))
        object.__setattr__(self, "family_key", bytes(self.family_key))
        self.validate()

    def validate(self) -> None:
        c = self.construction
        if self.n < 0:
            raise ParameterError("n must be non-negative")
        if len(self.family_key) != FAMILY_KEY_BYTES:
            raise ParameterError("family_key must be 16 bytes")
        if self.index_count < 1 or self.index_count >= 1 << 32:
            raise ParameterError("index_count must fit in 32 bits and be positive")
        if self.hash_id != HASH_SHA3_256 or self.xof_id != XOF_SHAKE_256:
            raise ParameterError("unsupported hash or xof identifier")
        if self.q.numerator >= 1 << 32 or self.q.denominator >= 1 << 32 or self.q < 0:
            raise ParameterError("q must be a non-negative 32-bit rational")
        if c is Construction.C0:
            if self.index_count != 1:
                raise ParameterError("C0 has exactly one index")
            return
        if self.b < 2 or self.b % 2:
            raise OddBlock(f"block size must be even and >= 2, got {self.b}")
        if self.n >= 2 and self.b > self.n:
            raise ParameterError(f"block size {self.b} exceeds input length {self.n}")
        if c in (Construction.C1, Construction.C2):
            if self.b > MAX_ENUMERABLE_BLOCK:
                raise ParameterError("C1/C2 need b <= 20 (index space is 2^b)")
            if self.index_count != 1 << self.b:
                raise ParameterError("C1/C2 index_count must be 2^b")
        else:
            if not Fraction(1, 2) < self.q < 1:
                raise InvalidQ("C3 needs 1/2 < q < 1")
            need = index_count(self.q, self.sigma, self.b)
            if self.index_count < need:
                raise ParameterError(
                    f"index_count {self.index_count} below the bound {need} for q={self.q}"
                )

    @property
    def n_blocks(self) -> int:
        if self.construction is Construction.C0:
            return 1
        return -(-self.n // self.b)

    @property
    def digest_bits(self) -> int:
        if self.construction is Construction.C0:
            return self.n
        return self.n_blocks

    @property
    def padded_n(self) -> int:
        if self.construction is Construction.C0:
            return self.n
        return self.n_blocks * self.b

    # convenience constructors

    @classmethod
    def c0(cls, n: int, **kw) -> "IndexedHashParams":
        return cls(n=n, b=max(n, 2), q=Fraction(0), sigma=0, index_count=1,
                   construction=Construction.C0, **kw)

    @classmethod
    def c1(cls, n: int, b: int, **kw) -> "IndexedHashParams":
        return cls(n=n, b=b, q=Fraction(1, 2), sigma=0, index_count=1 << b,
                   construction=Construction.C1, **kw)

    @classmethod
    def c2(cls, n: int, b: int, **kw) -> "IndexedHashParams":
        return cls(n=n, b=b, q=Fraction(1, 2), sigma=0, index_count=1 << b,
                   construction=Construction.C2, **kw)

    @classmethod
    def c3(cls, n: int, q: RationalLike = Fraction(5, 8), sigma: int = 40,
           b: int | None = None, **kw) -> "IndexedHashParams":
        q = as_fraction(q)
        if b is None:
            b = block_size(n)
        return cls(n=n, b=b, q=q, sigma=sigma, index_count=index_count(q, sigma, b),
                   construction=Construction.C3, **kw)


# ---------------------------------------------------------------------------
# parameter formulas


def block_size(n: int) -> int:
    """``min(ceil(sqrt(n)), 1024)`` rounded up to even."""
    if n < 1:
        raise ParameterError("n must be positive")
    root = math.isqrt(n)
    if root * root < n:
        root += 1
    b = min(root, MAX_BLOCK)
    return b + (b & 1)


def index_count(q: RationalLike, sigma: int, b: int) -> int:
    """Smallest |I| that makes construction 3 q-collision bounded
    except with probability 2^-sigma over the mask generator."""
    q = as_fraction(q)
    if q <= Fraction(1, 2):
        raise InvalidQ(f"q must exceed 1/2, got {q}")
    eps = q - Fraction(1, 2)
    return math.ceil(Fraction(sigma + b + 1) / (2 * eps * eps))


# ---------------------------------------------------------------------------
# digest primitives (reference versions, one block at a time)


def parity(bits: BitLike) -> int:
    arr = as_bits(bits)
    return int(np.bitwise_xor.reduce(arr)) if arr.size else 0


def andreduce(y: BitLike) -> np.ndarray:
    arr = as_bits(y)
    if arr.size % 2:
        raise OddBlock(f"andreduce needs an even-length input, got {arr.size}")
    return arr[0::2] & arr[1::2]


def _same_length(i: np.ndarray, block: np.ndarray) -> None:
    if i.size != block.size:
        raise ParameterError(f"index has {i.size} bits but block has {block.size}")


def digest_c1(i: BitLike, block: BitLike) -> int:
    ib, xb = as_bits(i), as_bits(block)
    _same_length(ib, xb)
    return parity(ib & xb)


def digest_c2(i: BitLike, block: BitLike) -> int:
    ib, xb = as_bits(i), as_bits(block)
    _same_length(ib, xb)
    return parity(andreduce(ib ^ xb))


def expand_mask(family_key: bytes, i: int, b: int) -> np.ndarray:
    """Stretch index ``i`` into a ``b``-bit mask with SHAKE-256."""
    if b < 2 or b % 2:
        raise OddBlock(f"mask length must be even and >= 2, got {b}")
    seed = MASK_DOMAIN + bytes(family_key) + i.to_bytes(4, "big")
    raw = hashlib.shake_256(seed).digest(-(-b // 8))
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:b]


def index_mask(params: IndexedHashParams, i: int) -> np.ndarray:
    """The ``b``-bit string a construction combines with every block."""
    if params.construction is Construction.C3:
        return expand_mask(params.family_key, i, params.b)
    return int_to_bits(i, params.b)


def _index_masks(params: IndexedHashParams, indices: np.ndarray) -> np.ndarray:
    if params.construction is Construction.C3:
        return np.stack([expand_mask(params.family_key, int(i), params.b) for i in indices])
    shifts = np.arange(params.b - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None].astype(np.int64) >> shifts) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# process and the indexed hash


def _check_index(params: IndexedHashParams, i: int) -> None:
    if not 0 <= i < params.index_count:
        raise IndexOutOfRange(f"index {i} outside [0, {params.index_count})")


def _padded_input(params: IndexedHashParams, x: BitLike) -> np.ndarray:
    xb = as_bits(x)
    if xb.size > params.n:
        raise InputTooLong(f"input has {xb.size} bits, limit is {params.n}")
    return pad_bits(xb, params.padded_n)


class PreparedInput:
    """An input laid out for repeated digesting under many indices.

    Blocks are bit-packed into uint64 words once; each index then costs a
    handful of vectorised word operations.  C2/C3 split every block into
    its even- and odd-position bits so that andreduce becomes a single
    word-wise AND.
    """

    def __init__(self, params: IndexedHashParams, x: BitLike):
        self.params = params
        self.bits = _padded_input(params, x)
        c = params.construction
        if c is Construction.C0:
            return
        blocks = self.bits.reshape(params.n_blocks, params.b)
        if c is Construction.C1:
            self.words = pack_words(blocks)
        else:
            self.even = pack_words(blocks[:, 0::2])
            self.odd = pack_words(blocks[:, 1::2])

    def digest_for_mask(self, mask: np.ndarray) -> np.ndarray:
        c = self.params.construction
        if c is Construction.C0:
            return self.bits
        if c is Construction.C1:
            return word_parity(self.words & pack_words(mask)[0])
        me, mo = pack_words(mask[0::2])[0], pack_words(mask[1::2])[0]
        return word_parity((self.even ^ me) & (self.odd ^ mo))

    def digest(self, i: int) -> np.ndarray:
        _check_index(self.params, i)
        if self.params.construction is Construction.C0:
            return self.bits
        return self.digest_for_mask(index_mask(self.params, i))

    def digest_many(self, indices, chunk: int = 4096) -> np.ndarray:
        """Digest bits for every index in ``indices``, shape (k, digest_bits)."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.params.index_count):
            raise IndexOutOfRange("index outside the index space")
        c = self.params.construction
        if c is Construction.C0:
            return np.tile(self.bits, (idx.size, 1))
        out = np.empty((idx.size, self.params.n_blocks), dtype=np.uint8)
        for lo in range(0, idx.size, chunk):
            masks = _index_masks(self.params, idx[lo:lo + chunk])
            if c is Construction.C1:
                mw = pack_words(masks)
                out[lo:lo + chunk] = word_parity(self.words[None] & mw[:, None])
            else:
                me, mo = pack_words(masks[:, 0::2]), pack_words(masks[:, 1::2])
                out[lo:lo + chunk] = word_parity(
                    (self.even[None] ^ me[:, None]) & (self.odd[None] ^ mo[:, None])
                )
        return out


def process(params: IndexedHashParams, i: int, x: BitLike) -> np.ndarray:
    """Digest bits of ``x`` under index ``i`` (one bit per block)."""
    _check_index(params, i)
    return PreparedInput(params, x).digest(i)


def hash_preimage(family_key: bytes, r: bytes, i: int, payload: bytes, bit_length: int) -> bytes:
    """Byte layout fed to SHA3-256: key || r || i || payload || bit length."""
    return (bytes(family_key) + r + i.to_bytes(4, "big") + payload
            + bit_length.to_bytes(8, "big"))


def check_randomness(r: bytes) -> bytes:
    r = bytes(r)
    if len(r) != RANDOMNESS_BYTES:
        raise ParameterError(f"randomness must be {RANDOMNESS_BYTES} bytes, got {len(r)}")
    return r


def hash_digest_bits(params: IndexedHashParams, i: int, r: bytes, digest: np.ndarray) -> bytes:
    payload = np.packbits(digest).tobytes()
    pre = hash_preimage(params.family_key, r, i, payload, int(digest.size))
    return hashlib.sha3_256(pre).digest()


def indexed_hash(params: IndexedHashParams, i: int, r: bytes, x: BitLike) -> bytes:
    """H(i, r, x): the 32-byte digest for index ``i``."""
    r = check_randomness(r)
    return hash_digest_bits(params, i, r, process(params, i, x))


def colliding_index_fraction(params: IndexedHashParams, r: bytes, x: BitLike,
                             r2: bytes, x2: BitLike) -> Fraction:
    """Exact fraction of indices on which H(i,r,x) = H(i,r2,x2).

    With ``r == r2`` the two hash preimages differ only in the digest
    payload and the layout is injective, so digest equality decides hash
    equality and the hashes are skipped.
    """
    if params.index_count > 1 << MAX_ENUMERABLE_BLOCK:
        raise ParameterError("index space too large to enumerate")
    r, r2 = check_randomness(r), check_randomness(r2)
    idx = np.arange(params.index_count)
    d1 = PreparedInput(params, x).digest_many(idx)
    d2 = PreparedInput(params, x2).digest_many(idx)
    if r == r2:
        hits = int(np.all(d1 == d2, axis=1).sum())
    else:
        hits = sum(
            hash_digest_bits(params, int(i), r, d1[k]) == hash_digest_bits(params, int(i), r2, d2[k])
            for k, i in enumerate(idx)
        )
    return Fraction(hits, params.index_count)
