"""Bit-string helpers shared across the package.

Bit strings are numpy ``uint8`` arrays holding 0/1 values.  Anything
bit-like (a ``"0101"`` string, a list of ints, an array) is accepted on
input through :func:`as_bits`.
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

BitLike = Union[str, Iterable[int], np.ndarray]


def as_bits(x: BitLike) -> np.ndarray:
    if isinstance(x, np.ndarray):
        arr = x.astype(np.uint8, copy=False).ravel()
    elif isinstance(x, str):
        s = x.strip()
        if s and set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {x!r}")
        arr = np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")
        arr = arr.astype(np.uint8)
    elif isinstance(x, (bytes, bytearray)):
        raise TypeError("use bits_from_bytes() for raw byte input")
    else:
        arr = np.asarray(list(x), dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def bits_to_str(bits: np.ndarray) -> str:
    return "".join("1" if v else "0" for v in np.asarray(bits).ravel())


def bits_from_bytes(data: bytes) -> np.ndarray:
    """Unpack raw bytes MSB-first."""
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits: np.ndarray) -> bytes:
    """Pack MSB-first, zero-padding the last byte."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Big-endian ``width``-bit encoding of ``value``."""
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    return ((np.uint64(value) >> shifts) & np.uint64(1)).astype(np.uint8)


def pad_bits(bits: np.ndarray, length: int) -> np.ndarray:
    if bits.size > length:
        raise ValueError("cannot pad to a shorter length")
    if bits.size == length:
        return bits
    out = np.zeros(length, dtype=np.uint8)
    out[: bits.size] = bits
    return out


def pack_words(rows: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array row-wise into uint64 words.

    Rows are zero-padded to a multiple of 64 bits.  Only bitwise ops and
    popcounts are applied to the result, so the word byte order is
    irrelevant as long as every operand is packed by this function.
    """
    rows = np.atleast_2d(rows).astype(np.uint8, copy=False)
    packed = np.packbits(rows, axis=1)
    nbytes = packed.shape[1]
    width = -(-nbytes // 8) * 8 if nbytes else 8
    if width != nbytes:
        packed = np.pad(packed, ((0, 0), (0, width - nbytes)))
    return np.ascontiguousarray(packed).view(np.uint64)


def word_parity(words: np.ndarray, axis: int = -1) -> np.ndarray:
    """Parity of all bits along ``axis`` of a uint64 array."""
    folded = np.bitwise_xor.reduce(words, axis=axis)
    return (np.bitwise_count(folded) & 1).astype(np.uint8)
