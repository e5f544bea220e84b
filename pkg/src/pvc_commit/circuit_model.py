"""Boolean circuits for the block digests, plus analytic AND-gate models.

Only the digest layer is built gate by gate; the underlying hash is
accounted for analytically as a number of Keccak-f calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, TextIO, Union

import numpy as np

from .amplify import CubeCodeParams
from .bits import BitLike, as_bits
from .core_hash import Construction, OddBlock, ParameterError, PVCError

XOR, AND, INV = "XOR", "AND", "INV"

KECCAK_ANDS = 38400
SHA3_RATE = 1088
LOWMC_ANDS_PER_BIT = 14
MERKLE_ANDS_PER_BIT = 48
# r (128) + index (32) + length suffix (64)
HEADER_BITS = 128 + 32 + 64


class CircuitError(PVCError, ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    ins: tuple[int, ...]
    out: int


@dataclass
class BoolCircuit:
    """Gate list over numbered wires.

    Input wires come first, group by group, in ``inputs`` order.  Gates are
    stored in topological order and every wire is written exactly once.
    """

    inputs: list[tuple[str, int]] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    n_wires: int = 0

    def add_input(self, role: str, size: int) -> list[int]:
        if self.gates:
            raise CircuitError("inputs must be declared before gates")
        wires = list(range(self.n_wires, self.n_wires + size))
        self.inputs.append((role, size))
        self.n_wires += size
        return wires

    def _gate(self, kind: str, *ins: int) -> int:
        for w in ins:
            if not 0 <= w < self.n_wires:
                raise CircuitError(f"wire {w} used before it is written")
        out = self.n_wires
        self.n_wires += 1
        self.gates.append(Gate(kind, tuple(ins), out))
        return out

    def xor(self, a: int, b: int) -> int:
        return self._gate(XOR, a, b)

    def and_(self, a: int, b: int) -> int:
        return self._gate(AND, a, b)

    def inv(self, a: int) -> int:
        return self._gate(INV, a)

    def xor_tree(self, wires: Sequence[int]) -> int:
        """Balanced XOR fold; len(wires) - 1 gates."""
        layer = list(wires)
        if not layer:
            raise CircuitError("empty XOR fold")
        while len(layer) > 1:
            nxt = [self.xor(layer[k], layer[k + 1]) for k in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def group(self, role: str) -> list[int]:
        start = 0
        for name, size in self.inputs:
            if name == role:
                return list(range(start, start + size))
            start += size
        raise KeyError(role)

    @property
    def n_inputs(self) -> int:
        return sum(size for _, size in self.inputs)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    @property
    def and_count(self) -> int:
        return self.count(AND)

    @property
    def xor_count(self) -> int:
        return self.count(XOR)


# ---------------------------------------------------------------------------
# builders


def build_digest_circuit(construction: Union[Construction, str, int], n: int, b: int) -> BoolCircuit:
    """Gates computing process() for every block at once.

    Input groups: ``index`` (C1/C2) or ``mask`` (C3, the expanded mask is
    supplied from outside), then ``x``.  Output j is the digest of block j.
    """
    c = Construction.parse(construction)
    if c is Construction.C0:
        raise ParameterError("C0 has no digest layer")
    if b < 2 or b % 2:
        raise OddBlock(f"block size must be even and >= 2, got {b}")
    if n <= 0 or n % b:
        raise ParameterError(f"b={b} must divide n={n}; pad the input first")
    circ = BoolCircuit()
    key = circ.add_input("mask" if c is Construction.C3 else "index", b)
    x = circ.add_input("x", n)
    for j in range(n // b):
        block = x[j * b:(j + 1) * b]
        if c is Construction.C1:
            terms = [circ.and_(key[k], block[k]) for k in range(b)]
        else:
            masked = [circ.xor(block[k], key[k]) for k in range(b)]
            terms = [circ.and_(masked[k], masked[k + 1]) for k in range(0, b, 2)]
        circ.outputs.append(circ.xor_tree(terms))
    return circ


def build_cube_encoder_circuit(cc: CubeCodeParams) -> BoolCircuit:
    """XOR-only circuit for cube_encode, same cell order."""
    circ = BoolCircuit()
    msg = circ.add_input("m", cc.message_length)
    cube = np.array(msg, dtype=object).reshape((cc.rho,) * cc.d, order="F")
    for axis in range(cc.d):
        moved = np.moveaxis(cube, axis, 0)
        slab = np.empty(moved.shape[1:], dtype=object)
        for pos in np.ndindex(*slab.shape):
            acc = moved[(0,) + pos]
            for k in range(1, cc.rho):
                acc = circ.xor(acc, moved[(k,) + pos])
            slab[pos] = acc
        cube = np.concatenate([cube, np.expand_dims(slab, axis)], axis=axis)
    circ.outputs = [int(w) for w in cube.ravel(order="F")]
    return circ


# ---------------------------------------------------------------------------
# evaluation


def evaluate_circuit(circ: BoolCircuit, assignment: Union[Mapping[str, BitLike], Sequence[BitLike]]) -> np.ndarray:
    """Evaluate on one assignment; groups given by role or in order."""
    if isinstance(assignment, Mapping):
        values = [assignment[role] for role, _ in circ.inputs]
    else:
        values = list(assignment)
        if len(values) != len(circ.inputs):
            raise CircuitError(f"expected {len(circ.inputs)} input groups, got {len(values)}")
    wires = np.zeros(circ.n_wires, dtype=np.uint8)
    pos = 0
    for (role, size), v in zip(circ.inputs, values):
        bits = as_bits(v)
        if bits.size != size:
            raise CircuitError(f"group {role!r} needs {size} bits, got {bits.size}")
        wires[pos:pos + size] = bits
        pos += size
    for g in circ.gates:
        if g.kind == XOR:
            wires[g.out] = wires[g.ins[0]] ^ wires[g.ins[1]]
        elif g.kind == AND:
            wires[g.out] = wires[g.ins[0]] & wires[g.ins[1]]
        else:
            wires[g.out] = wires[g.ins[0]] ^ 1
    return wires[circ.outputs].copy()


def evaluate_batch(circ: BoolCircuit, inputs: np.ndarray) -> np.ndarray:
    """Evaluate many assignments at once.

    ``inputs`` has shape (k, n_inputs) with groups concatenated in order;
    returns shape (k, n_outputs).
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.uint8))
    if inputs.shape[1] != circ.n_inputs:
        raise CircuitError(f"expected {circ.n_inputs} input bits, got {inputs.shape[1]}")
    wires = np.zeros((circ.n_wires, inputs.shape[0]), dtype=np.uint8)
    wires[: circ.n_inputs] = inputs.T
    for g in circ.gates:
        if g.kind == XOR:
            wires[g.out] = wires[g.ins[0]] ^ wires[g.ins[1]]
        elif g.kind == AND:
            wires[g.out] = wires[g.ins[0]] & wires[g.ins[1]]
        else:
            wires[g.out] = wires[g.ins[0]] ^ 1
    return wires[circ.outputs].T.copy()


# ---------------------------------------------------------------------------
# Bristol Fashion


def _normalised(circ: BoolCircuit) -> tuple[list[Gate], list[int], int]:
    """Gate list whose outputs occupy the last wire ids, in output order."""
    gates = list(circ.gates)
    n_wires = circ.n_wires
    gate_outs = {g.out for g in gates}
    outputs: list[int] = []
    seen: set[int] = set()
    for w in circ.outputs:
        if w in gate_outs and w not in seen:
            outputs.append(w)
        else:
            # pass-through or repeated output: copy through two inverters
            mid, copy = n_wires, n_wires + 1
            n_wires += 2
            gates += [Gate(INV, (w,), mid), Gate(INV, (mid,), copy)]
            outputs.append(copy)
        seen.add(outputs[-1])
    n_in = circ.n_inputs
    out_set = set(outputs)
    remap = {w: w for w in range(n_in)}
    nxt = n_in
    for g in gates:
        if g.out not in out_set:
            remap[g.out] = nxt
            nxt += 1
    for k, w in enumerate(outputs):
        remap[w] = nxt + k
    total = nxt + len(outputs)
    new_gates = [Gate(g.kind, tuple(remap[w] for w in g.ins), remap[g.out]) for g in gates]
    return new_gates, [remap[w] for w in outputs], total


def export_bristol(circ: BoolCircuit, sink: TextIO | None = None) -> str:
    gates, outputs, total = _normalised(circ)
    lines = [
        f"{len(gates)} {total}",
        " ".join([str(len(circ.inputs))] + [str(size) for _, size in circ.inputs]),
        f"1 {len(outputs)}",
    ]
    for g in gates:
        if g.kind == INV:
            lines.append(f"1 1 {g.ins[0]} {g.out} INV")
        else:
            lines.append(f"2 1 {g.ins[0]} {g.ins[1]} {g.out} {g.kind}")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def parse_bristol(text: str, roles: Sequence[str] | None = None) -> BoolCircuit:
    """Read a Bristol Fashion circuit; outputs are the last wires."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise CircuitError("Bristol file needs at least three header lines")
    try:
        n_gates, n_wires = int(lines[0][0]), int(lines[0][1])
        n_groups = int(lines[1][0])
        sizes = [int(v) for v in lines[1][1:1 + n_groups]]
        n_out_groups = int(lines[2][0])
        out_sizes = [int(v) for v in lines[2][1:1 + n_out_groups]]
    except (IndexError, ValueError) as exc:
        raise CircuitError(f"bad Bristol header: {exc}") from exc
    if len(sizes) != n_groups or len(out_sizes) != n_out_groups:
        raise CircuitError("group count does not match the listed sizes")
    if roles is None:
        roles = [f"in{k}" for k in range(n_groups)]
    circ = BoolCircuit()
    for role, size in zip(roles, sizes):
        circ.add_input(role, size)
    body = lines[3:]
    if len(body) != n_gates:
        raise CircuitError(f"header announces {n_gates} gates, found {len(body)}")
    written = set(range(circ.n_inputs))
    for ln in body:
        try:
            nin = int(ln[0])
            ins = tuple(int(v) for v in ln[2:2 + nin])
            out = int(ln[2 + nin])
            kind = ln[3 + nin]
        except (IndexError, ValueError) as exc:
            raise CircuitError(f"bad gate line {' '.join(ln)!r}") from exc
        if kind == "NOT":
            kind = INV
        if kind not in (XOR, AND, INV) or len(ins) != (1 if kind == INV else 2):
            raise CircuitError(f"unsupported gate {' '.join(ln)!r}")
        if any(w not in written for w in ins) or out in written or not 0 <= out < n_wires:
            raise CircuitError(f"gate {' '.join(ln)!r} breaks topological order")
        written.add(out)
        circ.gates.append(Gate(kind, ins, out))
    circ.n_wires = n_wires
    n_out = sum(out_sizes)
    circ.outputs = list(range(n_wires - n_out, n_wires))
    return circ


# ---------------------------------------------------------------------------
# analytic cost models


def digest_gate_counts(construction: Union[Construction, str, int], n: int, b: int) -> tuple[int, int]:
    """(AND, XOR) of the digest layer without building it; b | n."""
    c = Construction.parse(construction)
    blocks = n // b
    if c is Construction.C1:
        return n, n - blocks
    if c in (Construction.C2, Construction.C3):
        return n // 2, n + n // 2 - blocks
    raise ParameterError("C0 has no digest layer")


def keccak_calls(payload_bits: int, rate: int = SHA3_RATE) -> int:
    return math.ceil(payload_bits / rate)


def assert_and_count(n: int, b: int, keccak_ands: int = KECCAK_ANDS, rate: int = SHA3_RATE,
                     include_output_hash: bool = False) -> int:
    """AND gates of one assert: the digest layer plus hashing the header
    and ceil(n/b) digest bits, optionally plus the h(m | nonce) call."""
    blocks = -(-n // b)
    padded = blocks * b
    total = padded // 2 + keccak_calls(HEADER_BITS + blocks, rate) * keccak_ands
    if include_output_hash:
        total += keccak_ands
    return total


def baseline_and_count(n: int, scheme: str = "sha3_sponge") -> int:
    if scheme == "sha3_sponge":
        return keccak_calls(n) * KECCAK_ANDS
    if scheme == "sha3_merkle":
        return MERKLE_ANDS_PER_BIT * n
    if scheme == "lowmc":
        return LOWMC_ANDS_PER_BIT * n
    raise ValueError(f"unknown baseline {scheme!r}")


@dataclass(frozen=True)
class CostReport:
    n: int
    b: int
    and_count: int
    xor_count: int
    per_bit_and: Fraction
    baseline_and: int
    ratio: Fraction

    def as_dict(self) -> dict:
        return {
            "n": self.n, "b": self.b, "and_count": self.and_count, "xor_count": self.xor_count,
            "per_bit_and": float(self.per_bit_and), "baseline_and": self.baseline_and,
            "ratio": float(self.ratio),
        }


def cost_report(n: int, b: int, construction: Union[Construction, str, int] = Construction.C3,
                baseline: str = "sha3_sponge", include_output_hash: bool = False) -> CostReport:
    c = Construction.parse(construction)
    padded = -(-n // b) * b
    digest_and, digest_xor = digest_gate_counts(c, padded, b)
    hashing = assert_and_count(n, b, include_output_hash=include_output_hash) - padded // 2
    ands = digest_and + hashing
    base = baseline_and_count(n, baseline)
    return CostReport(n, b, ands, digest_xor, Fraction(ands, n), base, Fraction(base, ands))


def random_assignment(circ: BoolCircuit, rng: np.random.Generator) -> list[np.ndarray]:
    return [rng.integers(0, 2, size, dtype=np.uint8) for _, size in circ.inputs]

