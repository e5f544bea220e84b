"""MPC-friendly indexed hash functions and publicly verifiable covert commitments."""

from .core_hash import (
    Construction,
    IndexedHashParams,
    InputTooLong,
    InvalidQ,
    OddBlock,
    ParameterError,
    PVCError,
    block_size,
    colliding_index_fraction,
    index_count,
    indexed_hash,
)
from .pvc_scheme import (
    Assertion,
    Commitment,
    KeyPair,
    ParseError,
    Verdict,
    assert_open,
    check,
    deserialize_assertion,
    deserialize_commitment,
    keygen,
    pvccommit,
)

__version__ = "0.1.0"

__all__ = [
    "Assertion", "Commitment", "Construction", "IndexedHashParams", "InputTooLong", "InvalidQ",
    "KeyPair", "OddBlock", "ParameterError", "ParseError", "PVCError", "Verdict", "assert_open",
    "block_size", "check", "colliding_index_fraction", "deserialize_assertion",
    "deserialize_commitment", "index_count", "indexed_hash", "keygen", "pvccommit",
]
