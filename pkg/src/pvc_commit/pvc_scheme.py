"""Publicly verifiable covert commitments from an indexed hash.

``pvccommit`` signs the digests of ``x`` at every index, ``assert_open``
signs the digest at one verifier-chosen index, and ``check`` compares the
two.  A mismatch between two validly signed messages is a transferable
proof that the committer used a different input.

Wire formats (all integers big-endian)::

    commitment: "PVCC" | ver(1) | construction(1) | n(8) | b(4) | q_num(4)
                | q_den(4) | sigma(4) | index_count(4) | hash_id(1)
                | xof_id(1) | family_key(16) | digests(32 * index_count)
                | signature(64 over everything before it)

    assertion v1: "PVCA" | 1 | index(4) | digest(32) | signature(64 over the preceding bytes)
    assertion v2: "PVCA" | 2 | index(4) | digest(32) | nonce(16)
                  | signature(64 over SHA3-256(index | digest | nonce))

Version 2 is what the verifier holds after the nonce-bound variant of the
protocol, where the committer signs ``h(m | nonce)`` outside the MPC.
"""

from __future__ import annotations

import enum
import hashlib
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from .bits import BitLike
from .core_hash import (
    DIGEST_BYTES,
    IndexedHashParams,
    IndexOutOfRange,
    PreparedInput,
    PVCError,
    check_randomness,
    hash_digest_bits,
)

SIGNATURE_BYTES = 64
KEY_BYTES = 32
NONCE_BYTES = 16

COMMIT_MAGIC = b"PVCC"
ASSERT_MAGIC = b"PVCA"
FORMAT_VERSION = 1
NONCE_ASSERT_VERSION = 2

_HEADER = struct.Struct(">4sBBQIIIIIBB16s")
HEADER_BYTES = _HEADER.size


class ParseError(PVCError, ValueError):
    pass


class Verdict(str, enum.Enum):
    VALID = "valid"
    CHEATED = "cheated"
    INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# keys


@dataclass(frozen=True)
class KeyPair:
    sk: bytes
    pk: bytes


def _raw_public(key: Ed25519PrivateKey) -> bytes:
    return key.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def public_key_from_secret(sk: bytes) -> bytes:
    return _raw_public(Ed25519PrivateKey.from_private_bytes(bytes(sk)))


def keygen(seed: bytes) -> KeyPair:
    seed = bytes(seed)
    if len(seed) != KEY_BYTES:
        raise ValueError("seed must be 32 bytes")
    return KeyPair(sk=seed, pk=public_key_from_secret(seed))


def derive_secret_key(master: bytes, x: bytes, r: bytes) -> bytes:
    """Per-input signing key, so that one key never signs two inputs."""
    h = hashlib.sha3_256(b"PVC-KDF" + len(master).to_bytes(4, "big") + master + r + x)
    return h.digest()


def sign(sk: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(bytes(sk)).sign(message)


def verify(pk: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(bytes(pk)).verify(bytes(signature), message)
    except (InvalidSignature, ValueError, TypeError):
        return False
    return True


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Commitment:
    params: IndexedHashParams
    digests: tuple[bytes, ...]
    signature: bytes

    def signed_bytes(self) -> bytes:
        return encode_commitment_body(self.params, self.digests)

    def to_bytes(self) -> bytes:
        return self.signed_bytes() + self.signature


@dataclass(frozen=True)
class Assertion:
    index: int
    digest: bytes
    signature: bytes
    nonce: Optional[bytes] = None

    def signed_message(self) -> bytes:
        if self.nonce is None:
            return ASSERT_MAGIC + bytes([FORMAT_VERSION]) + self.index.to_bytes(4, "big") + self.digest
        return nonce_bound_message(self.index, self.digest, self.nonce)

    def to_bytes(self) -> bytes:
        if self.nonce is None:
            return self.signed_message() + self.signature
        return (ASSERT_MAGIC + bytes([NONCE_ASSERT_VERSION]) + self.index.to_bytes(4, "big")
                + self.digest + self.nonce + self.signature)


def nonce_bound_message(index: int, digest: bytes, nonce: bytes) -> bytes:
    """h(m | nonce) for m = (index, digest)."""
    return hashlib.sha3_256(index.to_bytes(4, "big") + digest + nonce).digest()


# ---------------------------------------------------------------------------
# serialization


def encode_commitment_body(params: IndexedHashParams, digests) -> bytes:
    q = params.q
    header = _HEADER.pack(
        COMMIT_MAGIC, FORMAT_VERSION, int(params.construction), params.n, params.b,
        q.numerator, q.denominator, params.sigma, params.index_count,
        params.hash_id, params.xof_id, params.family_key,
    )
    return header + b"".join(digests)


def serialize_commitment(c: Commitment) -> bytes:
    return c.to_bytes()


def deserialize_commitment(data: bytes) -> Commitment:
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise ParseError("truncated commitment header")
    (magic, version, construction, n, b, q_num, q_den, sigma, count,
     hash_id, xof_id, family_key) = _HEADER.unpack_from(data)
    if magic != COMMIT_MAGIC:
        raise ParseError("bad commitment magic")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported commitment version {version}")
    expected = _HEADER.size + count * DIGEST_BYTES + SIGNATURE_BYTES
    if len(data) != expected:
        raise ParseError(f"commitment should be {expected} bytes, got {len(data)}")
    if q_den == 0:
        raise ParseError("zero denominator in q")
    try:
        params = IndexedHashParams(
            n=n, b=b, q=Fraction(q_num, q_den), sigma=sigma, index_count=count,
            construction=construction, hash_id=hash_id, xof_id=xof_id, family_key=family_key,
        )
    except (PVCError, ValueError, KeyError) as exc:
        raise ParseError(f"invalid parameters: {exc}") from exc
    off = _HEADER.size
    digests = tuple(data[off + k * DIGEST_BYTES: off + (k + 1) * DIGEST_BYTES] for k in range(count))
    return Commitment(params, digests, data[-SIGNATURE_BYTES:])


def serialize_assertion(a: Assertion) -> bytes:
    return a.to_bytes()


def deserialize_assertion(data: bytes) -> Assertion:
    data = bytes(data)
    if len(data) < 5:
        raise ParseError("truncated assertion")
    if data[:4] != ASSERT_MAGIC:
        raise ParseError("bad assertion magic")
    version = data[4]
    if version == FORMAT_VERSION:
        size = 5 + 4 + DIGEST_BYTES + SIGNATURE_BYTES
    elif version == NONCE_ASSERT_VERSION:
        size = 5 + 4 + DIGEST_BYTES + NONCE_BYTES + SIGNATURE_BYTES
    else:
        raise ParseError(f"unsupported assertion version {version}")
    if len(data) != size:
        raise ParseError(f"assertion should be {size} bytes, got {len(data)}")
    index = int.from_bytes(data[5:9], "big")
    digest = data[9:9 + DIGEST_BYTES]
    nonce = data[9 + DIGEST_BYTES:9 + DIGEST_BYTES + NONCE_BYTES] if version == NONCE_ASSERT_VERSION else None
    return Assertion(index, digest, data[-SIGNATURE_BYTES:], nonce)


# ---------------------------------------------------------------------------
# the scheme


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("PVC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def commitment_digests(params: IndexedHashParams, r: bytes, x: BitLike,
                       workers: Optional[int] = None) -> list[bytes]:
    """H(i, r, x) for every index, in index order.

    The index range is cut into contiguous chunks and spread over a thread
    pool; the result does not depend on the number of workers.
    """
    r = check_randomness(r)
    prepared = PreparedInput(params, x)
    count = params.index_count

    def run(lo_hi):
        lo, hi = lo_hi
        out = []
        for i in range(lo, hi):
            out.append(hash_digest_bits(params, i, r, prepared.digest(i)))
        return out

    nworkers = min(_worker_count(workers), count)
    if nworkers == 1:
        return run((0, count))
    step = -(-count // (nworkers * 4))
    chunks = [(lo, min(lo + step, count)) for lo in range(0, count, step)]
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        return [d for part in pool.map(run, chunks) for d in part]


def pvccommit(x: BitLike, sk: bytes, r: bytes, params: IndexedHashParams,
              workers: Optional[int] = None) -> Commitment:
    digests = tuple(commitment_digests(params, r, x, workers))
    body = encode_commitment_body(params, digests)
    return Commitment(params, digests, sign(sk, body))


def assert_open(x: BitLike, sk: bytes, r: bytes, i: int, pk: bytes,
                params: IndexedHashParams) -> Optional[Assertion]:
    """Signed (i, H(i, r, x)), or None when ``pk`` does not belong to ``sk``."""
    if not 0 <= i < params.index_count:
        raise IndexOutOfRange(f"index {i} outside [0, {params.index_count})")
    if public_key_from_secret(sk) != bytes(pk):
        return None
    r = check_randomness(r)
    digest = hash_digest_bits(params, i, r, PreparedInput(params, x).digest(i))
    unsigned = Assertion(i, digest, b"")
    return Assertion(i, digest, sign(sk, unsigned.signed_message()))


CommitmentLike = Union[Commitment, bytes, bytearray]
AssertionLike = Union[Assertion, bytes, bytearray, None]


def check(c: CommitmentLike, a: AssertionLike, pk: bytes) -> Verdict:
    """valid / cheated when both signatures verify, inconclusive otherwise.

    Never raises: anything malformed is inconclusive.
    """
    try:
        if isinstance(c, (bytes, bytearray, memoryview)):
            c = deserialize_commitment(bytes(c))
        if isinstance(a, (bytes, bytearray, memoryview)):
            a = deserialize_assertion(bytes(a))
        if not isinstance(c, Commitment) or not isinstance(a, Assertion):
            return Verdict.INCONCLUSIVE
        pk = bytes(pk)
        if len(pk) != KEY_BYTES:
            return Verdict.INCONCLUSIVE
        if not 0 <= a.index < c.params.index_count or len(c.digests) != c.params.index_count:
            return Verdict.INCONCLUSIVE
        if len(a.digest) != DIGEST_BYTES:
            return Verdict.INCONCLUSIVE
        if not verify(pk, a.signed_message(), a.signature):
            return Verdict.INCONCLUSIVE
        if not verify(pk, c.signed_bytes(), c.signature):
            return Verdict.INCONCLUSIVE
    except Exception:  # total by contract
        return Verdict.INCONCLUSIVE
    return Verdict.VALID if c.digests[a.index] == a.digest else Verdict.CHEATED


def cheating_indices(c: Commitment, params: IndexedHashParams, r: bytes, x: BitLike) -> np.ndarray:
    """Indices at which an assertion about ``x`` would contradict ``c``."""
    prepared = PreparedInput(params, x)
    r = check_randomness(r)
    return np.array(
        [i for i in range(params.index_count)
         if hash_digest_bits(params, i, r, prepared.digest(i)) != c.digests[i]],
        dtype=np.int64,
    )
