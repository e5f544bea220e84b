"""Security amplification: repeated indices and the cube error-detecting code.

Evaluating ``H`` at ``kappa`` independent indices turns a q-collision
bounded hash into a q^kappa one at kappa times the gate cost.  Encoding
the input with a code of minimum distance kappa first (``h_code``) gets
the same bound while the hashed rows stay about as long as the original
input divided by the code rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bits import BitLike, as_bits, pad_bits
from .core_hash import IndexedHashParams, ParameterError, RationalLike, as_fraction, indexed_hash


@dataclass(frozen=True)
class CubeCodeParams:
    rho: int
    d: int

    def __post_init__(self):
        if self.rho < 2 or self.d < 1:
            raise ParameterError("cube code needs rho >= 2 and d >= 1")

    @property
    def message_length(self) -> int:
        return self.rho ** self.d

    @property
    def codeword_length(self) -> int:
        return (self.rho + 1) ** self.d

    @property
    def min_distance(self) -> int:
        return 2 ** self.d


def cube_encode(cc: CubeCodeParams, m: BitLike) -> np.ndarray:
    """Extend the message cube by a parity slice along each axis.

    Cells are flattened with the first axis varying fastest, for both the
    message and the codeword.
    """
    bits = as_bits(m)
    if bits.size != cc.message_length:
        raise ParameterError(f"message must have {cc.message_length} bits, got {bits.size}")
    cube = bits.reshape((cc.rho,) * cc.d, order="F")
    for axis in range(cc.d):
        slab = np.bitwise_xor.reduce(cube, axis=axis, keepdims=True)
        cube = np.concatenate([cube, slab], axis=axis)
    return cube.ravel(order="F")


def cube_xor_cost(cc: CubeCodeParams) -> int:
    return (cc.rho - 1) * (cc.codeword_length - cc.message_length)


def h_kappa(params: IndexedHashParams, indices: Sequence[int], r: bytes, x: BitLike) -> list[bytes]:
    return [indexed_hash(params, int(i), r, x) for i in indices]


def reshape_and_encode(cc: CubeCodeParams, x: BitLike, n: int | None = None) -> list[np.ndarray]:
    """Rows of the encoded word matrix.

    ``x`` is padded to ``n`` (or its own length) rounded up to a multiple
    of the message length w and cut into w consecutive words; column t of
    the word matrix is encoded, and the l rows of the result are returned.
    """
    bits = as_bits(x)
    w = cc.message_length
    total = bits.size if n is None else n
    if bits.size > total:
        raise ParameterError("input longer than n")
    word_len = max(1, -(-total // w))
    words = pad_bits(bits, word_len * w).reshape(w, word_len)
    encoded = np.stack([cube_encode(cc, words[:, t]) for t in range(word_len)], axis=1)
    return [encoded[j].copy() for j in range(cc.codeword_length)]


def h_code(params: IndexedHashParams, cc: CubeCodeParams, indices: Sequence[int],
           r: bytes, x: BitLike) -> list[bytes]:
    if len(indices) != cc.codeword_length:
        raise ParameterError(f"need {cc.codeword_length} indices, got {len(indices)}")
    rows = reshape_and_encode(cc, x)
    return [indexed_hash(params, int(i), r, row) for i, row in zip(indices, rows)]


@dataclass(frozen=True)
class AmplificationPlan:
    cube: CubeCodeParams
    base_q: Fraction
    kappa: int


def sqrt_half_upper() -> Fraction:
    """Smallest k / 2^31 that is >= sqrt(1/2)."""
    num = math.isqrt(1 << 61)
    if num * num < 1 << 61:
        num += 1
    return Fraction(num, 1 << 31)


def amplification_plan(n: int, q_target: RationalLike) -> AmplificationPlan:
    """Cube-code dimensions for a target collision bound.

    d = 1 + ceil(log2 log2 (1/q_target)) and rho = ceil(n^(1/(3d))); the
    base hash is sized for q = sqrt(1/2) so that q^(2^d) <= q_target.
    """
    qt = as_fraction(q_target)
    if not 0 < qt < 1:
        raise ParameterError("target q must lie in (0, 1)")
    loglog = math.log2(math.log2(1 / qt)) if qt < Fraction(1, 2) else 0.0
    d = 1 + max(0, math.ceil(loglog - 1e-12))
    rho = max(2, math.ceil(n ** (1 / (3 * d)) - 1e-12))
    return AmplificationPlan(CubeCodeParams(rho, d), sqrt_half_upper(), 2 ** d)
