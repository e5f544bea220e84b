"""Committed two-party computation with a trusted evaluator.

The PVC-secure MPC backend is replaced by a local function that computes
the parties' outputs honestly on whatever input the committer feeds it.
Cheating in the execution itself is therefore not modelled; what remains
is the commitment layer: a committer that swaps its input is caught
whenever the verifier's random index lands on a digest that changed.
"""

from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from .bits import BitLike, as_bits, bits_to_bytes
from .core_hash import IndexedHashParams, InputTooLong
from .pvc_scheme import (
    Assertion,
    Commitment,
    Verdict,
    assert_open,
    cheating_indices,
    check,
    deserialize_assertion,
    deserialize_commitment,
    keygen,
    nonce_bound_message,
    pvccommit,
    sign,
    verify,
)

Functionality = Callable[[np.ndarray, bytes], tuple[Any, Any]]


def default_functionality(x: np.ndarray, y: bytes) -> tuple[Any, Any]:
    """P1 learns nothing, P2 learns 64 bits of SHA3-256(x || y)."""
    h = hashlib.sha3_256(bits_to_bytes(x) + bytes(y)).digest()
    return None, int.from_bytes(h[:8], "big")


class StrategyKind(str, enum.Enum):
    HONEST = "honest"
    SUBSTITUTE = "substitute"
    ABORT = "abort"
    BAD_SIGNATURE = "badsig"
    REFUSE_TO_SIGN = "refuse"


@dataclass(frozen=True)
class CommitterStrategy:
    kind: StrategyKind = StrategyKind.HONEST
    substitute: Optional[np.ndarray] = None

    @classmethod
    def honest(cls) -> "CommitterStrategy":
        return cls(StrategyKind.HONEST)

    @classmethod
    def substitute_input(cls, x_prime: BitLike) -> "CommitterStrategy":
        return cls(StrategyKind.SUBSTITUTE, as_bits(x_prime))

    @classmethod
    def abort_before_output(cls) -> "CommitterStrategy":
        return cls(StrategyKind.ABORT)

    @classmethod
    def bad_signature(cls) -> "CommitterStrategy":
        return cls(StrategyKind.BAD_SIGNATURE)

    @classmethod
    def refuse_to_sign(cls) -> "CommitterStrategy":
        return cls(StrategyKind.REFUSE_TO_SIGN)

    def effective_input(self, committed_x: np.ndarray) -> np.ndarray:
        if self.kind is StrategyKind.SUBSTITUTE:
            return self.substitute
        return committed_x


@dataclass
class SessionConfig:
    params: IndexedHashParams
    g: Functionality = default_functionality
    optimized: bool = False
    rng_seed: int = 0


@dataclass(frozen=True)
class Certificate:
    commitment: Commitment
    assertion: Assertion

    def to_bytes(self) -> tuple[bytes, bytes]:
        return self.commitment.to_bytes(), self.assertion.to_bytes()


@dataclass
class SessionResult:
    p1_out: Any
    p2_out: Any
    verdict: Verdict
    index: Optional[int]
    commitment: Commitment
    assertion: Optional[Assertion]
    certificate: Optional[Certificate] = None
    transcript: list[str] = field(default_factory=list)

    def transcript_text(self) -> str:
        return "\n".join(self.transcript) + "\n"


def _session_rng(seed: int) -> random.Random:
    return random.Random(hashlib.sha3_256(b"PVC-SESSION" + seed.to_bytes(16, "big", signed=True)).digest())


def commit_phase(x: BitLike, sk: bytes, params: IndexedHashParams,
                 rng: Optional[random.Random] = None) -> tuple[Commitment, bytes]:
    """Sample r, commit to x, keep r secret."""
    if rng is None:
        import os
        r = os.urandom(16)
    else:
        r = rng.randbytes(16)
    return pvccommit(x, sk, r, params), r


def _corrupt(sig: bytes) -> bytes:
    return bytes([sig[0] ^ 0x01]) + sig[1:]


def run_session(cfg: SessionConfig, strategy: CommitterStrategy, committed_x: BitLike, r: bytes,
                c: Union[Commitment, bytes], sk: bytes, pk: bytes, y: bytes = b"") -> SessionResult:
    """One run of the committed computation followed by the verifier's check."""
    if cfg.optimized:
        return run_session_optimized(cfg, strategy, committed_x, r, c, sk, pk, y)
    rng = _session_rng(cfg.rng_seed)
    log: list[str] = []
    i = rng.randrange(cfg.params.index_count)
    log.append(f"P2 samples index i={i}")
    x_eff = strategy.effective_input(as_bits(committed_x))
    commitment = _as_commitment(c)

    if strategy.kind is StrategyKind.ABORT:
        log.append("P1 aborts the evaluation before outputs are released")
        log.append("P2 verdict=inconclusive")
        return SessionResult(None, None, Verdict.INCONCLUSIVE, i, commitment, None, transcript=log)

    o1, o2, a = _evaluate(cfg, x_eff, y, sk, r, i, pk)
    log.append("Pi -> P1: o1")
    if a is not None and strategy.kind is StrategyKind.BAD_SIGNATURE:
        a = Assertion(a.index, a.digest, _corrupt(a.signature))
    log.append(f"Pi -> P2: o2, assertion={a.to_bytes().hex() if a is not None else 'bottom'}")
    return _finish(c, commitment, a, pk, o1, o2, i, log)


def run_session_optimized(cfg: SessionConfig, strategy: CommitterStrategy, committed_x: BitLike,
                          r: bytes, c: Union[Commitment, bytes], sk: bytes, pk: bytes,
                          y: bytes = b"") -> SessionResult:
    """Nonce-bound flow: the evaluator hands P1 only h(m | nonce), which P1
    signs outside the computation; P2 receives m itself."""
    rng = _session_rng(cfg.rng_seed)
    log: list[str] = []
    i = rng.randrange(cfg.params.index_count)
    nonce = rng.randbytes(16)
    log.append(f"P2 samples index i={i} and nonce={nonce.hex()}")
    x_eff = strategy.effective_input(as_bits(committed_x))
    commitment = _as_commitment(c)

    if strategy.kind is StrategyKind.ABORT:
        log.append("P1 aborts the evaluation before outputs are released")
        log.append("P2 verdict=inconclusive")
        return SessionResult(None, None, Verdict.INCONCLUSIVE, i, commitment, None, transcript=log)

    o1, o2, a = _evaluate(cfg, x_eff, y, sk, r, i, pk)
    if a is None:
        log.append("Pi -> P2: bottom")
        return _finish(c, commitment, None, pk, o1, o2, i, log)
    tag = nonce_bound_message(a.index, a.digest, nonce)
    log.append(f"Pi -> P1: o1, h(m|nonce)={tag.hex()}")
    log.append(f"Pi -> P2: o2, m=({a.index}, {a.digest.hex()})")

    if strategy.kind is StrategyKind.REFUSE_TO_SIGN:
        log.append("P1 sends no signature")
        log.append("P2 aborts: missing signature; verdict=inconclusive")
        return SessionResult(o1, None, Verdict.INCONCLUSIVE, i, commitment, None, transcript=log)
    s = sign(sk, tag)
    if strategy.kind is StrategyKind.BAD_SIGNATURE:
        s = _corrupt(s)
    log.append(f"P1 -> P2 (out of band): signature={s.hex()}")
    if not verify(pk, tag, s):
        log.append("P2 aborts: signature invalid; verdict=inconclusive")
        return SessionResult(o1, None, Verdict.INCONCLUSIVE, i, commitment, None, transcript=log)
    held = Assertion(a.index, a.digest, s, nonce)
    return _finish(c, commitment, held, pk, o1, o2, i, log)


def _as_commitment(c: Union[Commitment, bytes]) -> Optional[Commitment]:
    if isinstance(c, Commitment):
        return c
    try:
        return deserialize_commitment(bytes(c))
    except Exception:
        return None


def _evaluate(cfg, x_eff, y, sk, r, i, pk):
    """The trusted evaluator: outputs of g plus the assertion on x_eff."""
    o1, o2 = cfg.g(x_eff, y)
    try:
        a = assert_open(x_eff, sk, r, i, pk, cfg.params)
    except InputTooLong:
        a = None
    return o1, o2, a


def _finish(c_raw, commitment, a, pk, o1, o2, i, log) -> SessionResult:
    verdict = check(commitment if commitment is not None else c_raw, a, pk)
    log.append(f"P2 verdict={verdict.value}")
    if verdict is Verdict.VALID:
        return SessionResult(o1, o2, verdict, i, commitment, a, transcript=log)
    if verdict is Verdict.CHEATED:
        cert = Certificate(commitment, a)
        log.append("P2 keeps (c, a) as proof of cheating")
        return SessionResult(o1, None, verdict, i, commitment, a, cert, log)
    return SessionResult(o1, None, verdict, i, commitment, a, transcript=log)


def blame(view: SessionResult) -> Optional[Certificate]:
    if view.verdict is Verdict.CHEATED and view.commitment is not None and view.assertion is not None:
        return Certificate(view.commitment, view.assertion)
    return None


class Judgement(str, enum.Enum):
    CHEATED = "cheated"
    NOT_CHEATED = "not_cheated"


def judgement(cert: Any, pk: bytes) -> Judgement:
    """Third-party verdict on a certificate; anything malformed clears the committer."""
    try:
        if isinstance(cert, Certificate):
            c, a = cert.commitment, cert.assertion
        else:
            c, a = cert
            if isinstance(c, (bytes, bytearray)):
                c = deserialize_commitment(bytes(c))
            if isinstance(a, (bytes, bytearray)):
                a = deserialize_assertion(bytes(a))
        verdict = check(c, a, pk)
    except Exception:
        return Judgement.NOT_CHEATED
    return Judgement.CHEATED if verdict is Verdict.CHEATED else Judgement.NOT_CHEATED


@dataclass(frozen=True)
class DetectionReport:
    trials: int
    cheated: int
    valid: int
    inconclusive: int
    empirical_p: float
    analytic_p: Fraction
    std_error: float

    def within(self, sigmas: float = 3.0) -> bool:
        if self.trials - self.inconclusive == 0:
            return self.analytic_p == 0
        return abs(self.empirical_p - float(self.analytic_p)) <= sigmas * self.std_error + 1e-12


def analytic_detection(params: IndexedHashParams, c: Commitment, r: bytes,
                       strategy: CommitterStrategy, committed_x: np.ndarray) -> Fraction:
    if strategy.kind is not StrategyKind.SUBSTITUTE:
        return Fraction(0)
    bad = cheating_indices(c, params, r, strategy.effective_input(committed_x))
    return Fraction(len(bad), params.index_count)


def detection_rate(cfg: SessionConfig, strategy: CommitterStrategy, trials: int,
                   x: BitLike, y: bytes = b"", key_seed: bytes = bytes(32)) -> DetectionReport:
    """Empirical P(cheated | not inconclusive) over seeded sessions, next to
    the exact fraction of indices at which the strategy is caught."""
    x = as_bits(x)
    keys = keygen(key_seed)
    setup = _session_rng(cfg.rng_seed ^ 0x5EED)
    c, r = commit_phase(x, keys.sk, cfg.params, setup)
    analytic = analytic_detection(cfg.params, c, r, strategy, x)
    counts = {v: 0 for v in Verdict}
    for t in range(trials):
        trial_cfg = SessionConfig(cfg.params, cfg.g, cfg.optimized, cfg.rng_seed * 1_000_003 + t + 1)
        res = run_session(trial_cfg, strategy, x, r, c, keys.sk, keys.pk, y)
        counts[res.verdict] += 1
    decided = trials - counts[Verdict.INCONCLUSIVE]
    emp = counts[Verdict.CHEATED] / decided if decided else 0.0
    p = float(analytic)
    se = math.sqrt(p * (1 - p) / decided) if decided else 0.0
    return DetectionReport(trials, counts[Verdict.CHEATED], counts[Verdict.VALID],
                           counts[Verdict.INCONCLUSIVE], emp, analytic, se)


def forcing_seed(cfg: SessionConfig, wanted: Sequence[int], limit: int = 1 << 16) -> int:
    """A session seed whose sampled index lies in ``wanted``."""
    target = set(int(v) for v in wanted)
    for seed in range(limit):
        if _session_rng(seed).randrange(cfg.params.index_count) in target:
            return seed
    raise ValueError("no seed found within the search limit")
