"""``pvc`` command line.

Exit codes: 0 success (or verdict valid), 1 usage error, 2 verdict
cheated, 3 verdict inconclusive.  Input files are raw bytes read as bits
most-significant first.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import circuit_model as cm
from .bits import bits_from_bytes, bits_to_str, pad_bits
from .collision_attack import AttackFailed, find_hash_collision, find_indexed_collision
from .core_hash import Construction, IndexedHashParams, PVCError, block_size
from .protocol_sim import CommitterStrategy, SessionConfig, detection_rate
from .pvc_scheme import (
    DIGEST_BYTES,
    HEADER_BYTES,
    SIGNATURE_BYTES,
    Verdict,
    assert_open,
    check,
    deserialize_commitment,
    keygen,
    public_key_from_secret,
    pvccommit,
)

EXIT_OK, EXIT_USAGE, EXIT_CHEATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_VERDICT_EXIT = {Verdict.VALID: EXIT_OK, Verdict.CHEATED: EXIT_CHEATED,
                 Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _hex(value: str, size: int, what: str) -> bytes:
    try:
        raw = bytes.fromhex(value)
    except ValueError:
        raise UsageError(f"{what} is not hex") from None
    if len(raw) != size:
        raise UsageError(f"{what} must be {size} bytes")
    return raw


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational {text!r}") from None


def _read_input(path: str, n: Optional[int]) -> tuple[np.ndarray, int]:
    bits = bits_from_bytes(Path(path).read_bytes())
    if n is None:
        return bits, max(1, bits.size)
    if bits.size > n:
        raise UsageError(f"input has {bits.size} bits, more than --n {n}")
    return pad_bits(bits, n), n


def _read_key(path: str) -> bytes:
    raw = Path(path).read_bytes()
    if len(raw) != 32:
        raise UsageError(f"{path}: key files hold 32 raw bytes")
    return raw


def _build_params(args, n: int) -> IndexedHashParams:
    c = Construction.parse(args.construction)
    key = _hex(args.family_key, 16, "--family-key") if args.family_key else bytes(16)
    if c is Construction.C0:
        return IndexedHashParams.c0(n, family_key=key)
    if c is Construction.C3:
        return IndexedHashParams.c3(n, _fraction(args.q), args.sigma, args.b, family_key=key)
    b = args.b if args.b is not None else 4
    ctor = IndexedHashParams.c1 if c is Construction.C1 else IndexedHashParams.c2
    return ctor(n, b, family_key=key)


def _emit(args, pairs: Sequence[tuple[str, object]], human: Sequence[str]) -> None:
    if getattr(args, "porcelain", False):
        for k, v in pairs:
            print(f"{k}={v}")
    else:
        for line in human:
            print(line)


# ---------------------------------------------------------------------------
# subcommands


def cmd_keygen(args) -> int:
    seed = _hex(args.seed, 32, "--seed") if args.seed else os.urandom(32)
    kp = keygen(seed)
    out = Path(args.out)
    Path(f"{out}.sk").write_bytes(kp.sk)
    Path(f"{out}.pk").write_bytes(kp.pk)
    print(f"wrote {out}.sk and {out}.pk")
    print(f"pk {kp.pk.hex()}")
    return EXIT_OK


def cmd_params(args) -> int:
    params = _build_params(args, args.n)
    payload = params.index_count * DIGEST_BYTES
    digest_and, digest_xor = cm.digest_gate_counts(params.construction, params.padded_n, params.b)
    total_and = cm.assert_and_count(args.n, params.b) if params.construction is not Construction.C0 else None
    pairs = [("construction", params.construction.name), ("n", args.n), ("b", params.b),
             ("index_count", params.index_count), ("payload_bytes", payload),
             ("commitment_bytes", HEADER_BYTES + payload + SIGNATURE_BYTES),
             ("digest_and", digest_and), ("digest_xor", digest_xor)]
    if total_and is not None:
        pairs.append(("assert_and", total_and))
    human = [f"construction {params.construction.name}, n = {args.n}, b = {params.b}",
             f"|I| = {params.index_count}",
             f"digest payload {payload:,} bytes",
             f"digest circuit: {digest_and} AND, {digest_xor} XOR"]
    if total_and is not None:
        human.append(f"assert circuit: {total_and:,} AND")
    _emit(args, pairs, human)
    return EXIT_OK


def cmd_commit(args) -> int:
    x, n = _read_input(args.input, args.n)
    params = _build_params(args, n)
    sk = _read_key(args.sk)
    r = _hex(args.r, 16, "--r") if args.r else os.urandom(16)
    start = time.perf_counter()
    c = pvccommit(x, sk, r, params)
    elapsed = time.perf_counter() - start
    Path(args.out).write_bytes(c.to_bytes())
    _emit(args,
          [("r", r.hex()), ("hashes", params.index_count), ("seconds", f"{elapsed:.3f}"),
           ("bytes", len(c.to_bytes()))],
          [f"r {r.hex()}  (keep secret; needed to assert)",
           f"{params.index_count} hashes in {elapsed:.2f} s",
           f"wrote {args.out} ({len(c.to_bytes()):,} bytes)"])
    return EXIT_OK


def cmd_assert(args) -> int:
    c = deserialize_commitment(Path(args.commitment).read_bytes())
    params = c.params
    x, _ = _read_input(args.input, params.n)
    sk = _read_key(args.sk)
    r = _hex(args.r, 16, "--r")
    a = assert_open(x, sk, r, args.index, public_key_from_secret(sk), params)
    Path(args.out).write_bytes(a.to_bytes())
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    def read(path):
        try:
            return Path(path).read_bytes()
        except OSError:
            return b""
    verdict = check(read(args.commitment), read(args.assertion), read(args.pk))
    print(verdict.value)
    return _VERDICT_EXIT[verdict]


def cmd_gates(args) -> int:
    c = Construction.parse(args.construction)
    b = args.b if args.b is not None else block_size(args.n)
    if args.bristol:
        circ = cm.build_digest_circuit(c, args.n, b)
        with open(args.bristol, "w") as fh:
            cm.export_bristol(circ, fh)
        and_n, xor_n = circ.and_count, circ.xor_count
    else:
        and_n, xor_n = cm.digest_gate_counts(c, -(-args.n // b) * b, b)
    pairs = [("construction", c.name), ("n", args.n), ("b", b), ("and", and_n), ("xor", xor_n)]
    human = [f"{c.name} digest, n = {args.n}, b = {b}: {and_n} AND, {xor_n} XOR"]
    if args.bristol:
        human.append(f"wrote {args.bristol}")
    if args.report:
        rep = cm.cost_report(args.n, b, c)
        pairs += [(f"report_{k}", v) for k, v in rep.as_dict().items()]
        human += [f"assert AND {rep.and_count:,} ({float(rep.per_bit_and):.3f} per bit)",
                  f"sha3 sponge AND {rep.baseline_and:,}",
                  f"improvement {float(rep.ratio):.1f}x"]
        for scheme in ("sha3_merkle", "lowmc"):
            v = cm.baseline_and_count(args.n, scheme)
            pairs.append((f"baseline_{scheme}", v))
            human.append(f"{scheme} AND {v:,}")
    _emit(args, pairs, human)
    return EXIT_OK


_STRATEGIES = {
    "honest": lambda x: CommitterStrategy.honest(),
    "substitute": None,
    "abort": lambda x: CommitterStrategy.abort_before_output(),
    "badsig": lambda x: CommitterStrategy.bad_signature(),
    "refuse": lambda x: CommitterStrategy.refuse_to_sign(),
}


def cmd_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.input:
        x, n = _read_input(args.input, args.n)
    else:
        n = args.n
        x = rng.integers(0, 2, n, dtype=np.uint8)
    params = _build_params(args, n)
    if args.strategy == "substitute":
        if args.substitute:
            x2, _ = _read_input(args.substitute, n)
        else:
            x2 = x.copy()
            x2[0] ^= 1
        strategy = CommitterStrategy.substitute_input(x2)
    else:
        strategy = _STRATEGIES[args.strategy](x)
    cfg = SessionConfig(params, optimized=args.optimized, rng_seed=args.seed)
    rep = detection_rate(cfg, strategy, args.trials, x)
    _emit(args,
          [("strategy", args.strategy), ("trials", rep.trials), ("cheated", rep.cheated),
           ("valid", rep.valid), ("inconclusive", rep.inconclusive),
           ("empirical_p", f"{rep.empirical_p:.6f}"), ("analytic_p", rep.analytic_p),
           ("std_error", f"{rep.std_error:.6f}"), ("within_3se", rep.within())],
          [f"strategy {args.strategy}, {rep.trials} sessions "
           f"({'nonce-bound' if args.optimized else 'in-circuit signing'})",
           f"valid {rep.valid}  cheated {rep.cheated}  inconclusive {rep.inconclusive}",
           f"detection: empirical {rep.empirical_p:.4f}, analytic {rep.analytic_p} "
           f"(= {float(rep.analytic_p):.4f}), 1 s.e. {rep.std_error:.4f}"])
    return EXIT_OK


def cmd_attack(args) -> int:
    circ = cm.parse_bristol(Path(args.circuit).read_text())
    try:
        if args.mode == "indexed":
            x = find_indexed_collision(circ, args.main)
        else:
            x = find_hash_collision(circ)
    except AttackFailed as exc:
        _emit(args, [("result", "above_threshold")], [f"above threshold: {exc}"])
        return EXIT_OK
    _emit(args, [("result", "collision"), ("x", bits_to_str(x))],
          [f"collision: x = {bits_to_str(x)} collides with the all-zero input"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_param_flags(p: argparse.ArgumentParser, need_n: bool) -> None:
    p.add_argument("--construction", default="c3", help="c0, c1, c2 or c3 (default c3)")
    p.add_argument("--n", type=int, required=need_n, help="input length in bits")
    p.add_argument("--b", type=int, help="block size (default: min(ceil(sqrt n), 1024), even)")
    p.add_argument("--q", default="5/8", help="collision bound for c3 (default 5/8)")
    p.add_argument("--sigma", type=int, default=40, help="statistical parameter for c3")
    p.add_argument("--family-key", help="16-byte mask key in hex (default zeros)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pvc", description="Indexed-hash PVC commitments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="create an Ed25519 key pair")
    p.add_argument("--seed", help="32-byte seed in hex (default: random)")
    p.add_argument("--out", required=True, help="path prefix; writes PREFIX.sk and PREFIX.pk")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("params", help="show derived parameters and costs")
    _add_param_flags(p, need_n=True)
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("commit", help="commit to an input file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--r", help="16-byte randomness in hex (default: random)")
    _add_param_flags(p, need_n=False)
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_commit)

    p = sub.add_parser("assert", help="open one index of a commitment")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--commitment", required=True, help="commitment file supplying the parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assert)

    p = sub.add_parser("check", help="compare an assertion with a commitment")
    p.add_argument("--commitment", required=True)
    p.add_argument("--assertion", required=True)
    p.add_argument("--pk", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gates", help="digest circuit gate counts and export")
    p.add_argument("--construction", default="c2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int)
    p.add_argument("--bristol", help="write the digest circuit in Bristol Fashion")
    p.add_argument("--report", action="store_true", help="compare with baseline commitments")
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("simulate", help="measure cheat detection in simulated sessions")
    p.add_argument("--strategy", choices=sorted(_STRATEGIES), default="honest")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimized", action="store_true", help="nonce-bound signing flow")
    p.add_argument("--in", dest="input", help="committed input (default: random from --seed)")
    p.add_argument("--substitute", help="input actually used by the committer")
    _add_param_flags(p, need_n=False)
    p.set_defaults(construction="c2", b=4, n=16)
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack", help="linear collision attack on a Bristol circuit")
    p.add_argument("--circuit", required=True)
    p.add_argument("--mode", choices=("indexed", "hash"), default="indexed")
    p.add_argument("--main", type=int, help="input group holding x in indexed mode (default: last)")
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PVCError, ValueError, OSError) as exc:
        print(f"pvc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
