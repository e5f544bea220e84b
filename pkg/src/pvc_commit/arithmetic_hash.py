"""Indexed hash over a prime field (construction 4).

Each block of ``b`` field elements is digested to one element with

    d4(i, y) = sum_{j=1}^{b/2} (i^(2j-1) + y_(2j-1)) * (i^(2j) + y_(2j))

so two distinct blocks agree on at most ``b`` indices: their difference is
a nonzero polynomial of degree <= b in ``i``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core_hash import (
    FAMILY_KEY_BYTES,
    IndexOutOfRange,
    OddBlock,
    ParameterError,
    check_randomness,
    hash_preimage,
)

MERSENNE_61 = (1 << 61) - 1
MAX_FIELD_INDEX_COUNT = 1 << 24
ELEMENT_BYTES = 8


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for s in small:
        if p % s == 0:
            return p == s
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for p < 3.3e24
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldParams:
    p: int = MERSENNE_61
    b: int = 2
    index_count: int = 1 << 16
    family_key: bytes = field(default=bytes(FAMILY_KEY_BYTES))

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ParameterError(f"{self.p} is not prime")
        if self.p >= 1 << (8 * ELEMENT_BYTES):
            raise ParameterError("field elements must fit in 8 bytes")
        if self.b < 2 or self.b % 2:
            raise OddBlock(f"block size must be even and >= 2, got {self.b}")
        if self.b >= self.p:
            raise ParameterError("the field must be larger than the block size")
        if not 1 <= self.index_count <= min(self.p, MAX_FIELD_INDEX_COUNT):
            raise ParameterError("index_count must lie in [1, min(p, 2^24)]")
        if len(self.family_key) != FAMILY_KEY_BYTES:
            raise ParameterError("family_key must be 16 bytes")


def _check_vector(fp: FieldParams, y: Sequence[int]) -> list[int]:
    out = [int(v) for v in y]
    for v in out:
        if not 0 <= v < fp.p:
            raise ParameterError(f"element {v} not reduced mod {fp.p}")
    return out


def _d4(p: int, i: int, y: Sequence[int]) -> int:
    acc = 0
    power = 1
    for j in range(0, len(y), 2):
        odd = power * i % p  # i^(2j-1)
        even = odd * i % p  # i^(2j)
        power = even
        acc += (odd + y[j]) * (even + y[j + 1])
    return acc % p


def d4(fp: FieldParams, i: int, y: Sequence[int]) -> int:
    y = _check_vector(fp, y)
    if len(y) != fp.b:
        raise ParameterError(f"block must have {fp.b} elements, got {len(y)}")
    return _d4(fp.p, i % fp.p, y)


def process_arith(fp: FieldParams, i: int, x: Sequence[int]) -> list[int]:
    x = _check_vector(fp, x)
    if len(x) % fp.b:
        x = x + [0] * (fp.b - len(x) % fp.b)
    return [_d4(fp.p, i, x[k:k + fp.b]) for k in range(0, len(x), fp.b)]


def indexed_hash_arith(fp: FieldParams, i: int, r: bytes, x: Sequence[int]) -> bytes:
    r = check_randomness(r)
    if not 0 <= i < fp.index_count:
        raise IndexOutOfRange(f"index {i} outside [0, {fp.index_count})")
    digests = process_arith(fp, i, x)
    payload = b"".join(v.to_bytes(ELEMENT_BYTES, "big") for v in digests)
    pre = hash_preimage(fp.family_key, r, i, payload, 8 * len(payload))
    return hashlib.sha3_256(pre).digest()


def colliding_index_count_arith(fp: FieldParams, y: Sequence[int], y2: Sequence[int]) -> int:
    """Number of field elements ``i`` (all of F, not just the index set)
    with d4(i, y) == d4(i, y2)."""
    y, y2 = _check_vector(fp, y), _check_vector(fp, y2)
    if len(y) != fp.b or len(y2) != fp.b:
        raise ParameterError("both blocks must have b elements")
    if fp.p < 1 << 30:
        return int(np.count_nonzero(_d4_all(fp.p, y) == _d4_all(fp.p, y2)))
    return sum(_d4(fp.p, i, y) == _d4(fp.p, i, y2) for i in range(fp.p))


def _d4_all(p: int, y: Sequence[int]) -> np.ndarray:
    # products stay below 2^62 for p < 2^30
    i = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    power = np.ones(p, dtype=np.int64)
    for j in range(0, len(y), 2):
        odd = power * i % p
        even = odd * i % p
        power = even
        acc = (acc + (odd + y[j]) * (even + y[j + 1])) % p
    return acc


def collision_polynomial(fp: FieldParams, y: Sequence[int], y2: Sequence[int]) -> list[int]:
    """Coefficients (constant term first) of d4(i, y) - d4(i, y2) as a
    polynomial in ``i``; entry k > 0 is y[s(k)] - y2[s(k)] where s swaps
    each pair of neighbouring positions."""
    p = fp.p
    coeffs = [0] * (fp.b + 1)
    for j in range(0, fp.b, 2):
        coeffs[0] += y[j] * y[j + 1] - y2[j] * y2[j + 1]
        coeffs[j + 1] += y[j + 1] - y2[j + 1]
        coeffs[j + 2] += y[j] - y2[j]
    return [c % p for c in coeffs]


def multiplications_per_block(b: int) -> int:
    """Nonlinear multiplications to digest one block given the powers of i."""
    return b // 2
