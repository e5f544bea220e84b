"""Collision finders for circuits with too few AND gates.

Both attacks track every wire as ``linear(x) ^ rest`` where ``linear`` is a
parity of main-input bits and ``rest`` collects everything else.  Linear
forms and GF(2) rows are Python ints used as bitsets (bit k = variable k).

* ``find_indexed_collision``: if every wire that feeds an AND gate or an
  output has ``linear(x) = 0`` then C(s, x) = C(s, 0) for every auxiliary
  input s.  That is 2d + m homogeneous constraints, fewer than n whenever
  d < ceil((n - m) / 2).
* ``find_hash_collision``: walk the AND gates in order keeping each wire
  affine on the current solution subspace; one condition per AND gate and
  one per output suffices, so d + m < n leaves a nonzero solution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circuit_model import AND, INV, XOR, BoolCircuit, evaluate_batch


class AttackFailed(Exception):
    """The constraint system had only the trivial solution."""


@dataclass
class Gf2System:
    """Rows over GF(2) in ``n`` variables with one right-hand-side bit each."""

    n: int
    rows: list[int] = field(default_factory=list)
    rhs: list[int] = field(default_factory=list)

    def add(self, row: int, value: int = 0) -> None:
        if row >> self.n:
            raise ValueError("row mentions a variable outside the system")
        self.rows.append(row)
        self.rhs.append(value & 1)

    def _rref(self) -> tuple[list[int], list[int], list[int], bool]:
        rows = list(self.rows)
        rhs = list(self.rhs)
        pivots: list[int] = []
        r = 0
        for col in range(self.n):
            bit = 1 << col
            hit = next((k for k in range(r, len(rows)) if rows[k] & bit), None)
            if hit is None:
                continue
            rows[r], rows[hit] = rows[hit], rows[r]
            rhs[r], rhs[hit] = rhs[hit], rhs[r]
            for k in range(len(rows)):
                if k != r and rows[k] & bit:
                    rows[k] ^= rows[r]
                    rhs[k] ^= rhs[r]
            pivots.append(col)
            r += 1
        consistent = all(rhs[k] == 0 for k in range(r, len(rows)))
        return rows[:r], rhs[:r], pivots, consistent

    def rank(self) -> int:
        return len(self._rref()[2])

    def nullspace(self) -> list[int]:
        """Basis of {x : rows . x = 0}; n - rank vectors."""
        rows, _, pivots, _ = self._rref()
        pivot_set = set(pivots)
        basis = []
        for free in range(self.n):
            if free in pivot_set:
                continue
            vec = 1 << free
            for row, col in zip(rows, pivots):
                if row >> free & 1:
                    vec |= 1 << col
            basis.append(vec)
        return basis

    def solve(self) -> Optional[int]:
        """One solution of rows . x = rhs (free variables zero), or None."""
        rows, rhs, pivots, consistent = self._rref()
        if not consistent:
            return None
        x = 0
        for value, col in zip(rhs, pivots):
            if value:
                x |= 1 << col
        return x

    def satisfied_by(self, x: int) -> bool:
        return all(_dot(row, x) == v for row, v in zip(self.rows, self.rhs))


def _dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


def int_to_bitarray(value: int, n: int) -> np.ndarray:
    return np.array([(value >> k) & 1 for k in range(n)], dtype=np.uint8)


@dataclass
class AffineWire:
    """Wire value as linear(x) ^ rest.

    ``rest`` is a bitset over symbols: bit 0 is the constant 1, then one
    bit per auxiliary input bit, then one per AND-gate output.
    """

    linear_part: int
    affine_rest: int


def propagate_affine(circ: BoolCircuit, main_group: int) -> tuple[list[AffineWire], int]:
    """Symbolic decomposition of every wire; returns (wires, n_main)."""
    wires: list[Optional[AffineWire]] = [None] * circ.n_wires
    pos = 0
    sym = 1
    n_main = 0
    for g_idx, (_, size) in enumerate(circ.inputs):
        for k in range(size):
            if g_idx == main_group:
                wires[pos + k] = AffineWire(1 << k, 0)
            else:
                wires[pos + k] = AffineWire(0, 1 << sym)
                sym += 1
        if g_idx == main_group:
            n_main = size
        pos += size
    for g in circ.gates:
        a = wires[g.ins[0]]
        if g.kind == XOR:
            b = wires[g.ins[1]]
            wires[g.out] = AffineWire(a.linear_part ^ b.linear_part, a.affine_rest ^ b.affine_rest)
        elif g.kind == INV:
            wires[g.out] = AffineWire(a.linear_part, a.affine_rest ^ 1)
        else:
            wires[g.out] = AffineWire(0, 1 << sym)
            sym += 1
    return wires, n_main


def _main_group_index(circ: BoolCircuit, main: str | int | None) -> int:
    if main is None:
        return len(circ.inputs) - 1
    if isinstance(main, int):
        return main
    return [role for role, _ in circ.inputs].index(main)


def _with_main(circ: BoolCircuit, main_idx: int, aux: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Assemble full input rows from aux rows (groups other than main) and x."""
    k = aux.shape[0]
    out = np.zeros((k, circ.n_inputs), dtype=np.uint8)
    pos = apos = 0
    for g_idx, (_, size) in enumerate(circ.inputs):
        if g_idx == main_idx:
            out[:, pos:pos + size] = x
        else:
            out[:, pos:pos + size] = aux[:, apos:apos + size]
            apos += size
        pos += size
    return out


def verify_indexed_collision(circ: BoolCircuit, x: np.ndarray, main: str | int | None = None,
                             samples: int = 32, exhaustive_limit: int = 12,
                             seed: int = 0) -> bool:
    """C(s, x) == C(s, 0), exhaustively over s when |s| <= exhaustive_limit,
    otherwise on ``samples`` random s."""
    main_idx = _main_group_index(circ, main)
    n_aux = circ.n_inputs - circ.inputs[main_idx][1]
    if not np.any(x):
        return False
    if n_aux <= exhaustive_limit:
        s = np.array([[(v >> k) & 1 for k in range(n_aux)] for v in range(1 << n_aux)],
                     dtype=np.uint8).reshape(1 << n_aux, n_aux)
    else:
        s = np.random.default_rng(seed).integers(0, 2, (samples, n_aux), dtype=np.uint8)
    zero = np.zeros_like(x)
    lhs = evaluate_batch(circ, _with_main(circ, main_idx, s, np.broadcast_to(x, (len(s), x.size))))
    rhs = evaluate_batch(circ, _with_main(circ, main_idx, s, np.broadcast_to(zero, (len(s), x.size))))
    return bool(np.array_equal(lhs, rhs))


def indexed_constraints(circ: BoolCircuit, main: str | int | None = None) -> Gf2System:
    main_idx = _main_group_index(circ, main)
    wires, n_main = propagate_affine(circ, main_idx)
    sys = Gf2System(n_main)
    for g in circ.gates:
        if g.kind == AND:
            for w in g.ins:
                sys.add(wires[w].linear_part)
    for w in circ.outputs:
        sys.add(wires[w].linear_part)
    return sys


def find_indexed_collision(circ: BoolCircuit, main: str | int | None = None,
                           verify: bool = True) -> np.ndarray:
    """Nonzero x with C(s, x) = C(s, 0) for all auxiliary inputs s.

    The main input defaults to the last input group.  Raises AttackFailed
    if the constraint system has full rank.
    """
    sys = indexed_constraints(circ, main)
    basis = sys.nullspace()
    if not basis:
        raise AttackFailed("constraints have full rank; no linear collision")
    x = int_to_bitarray(basis[0], sys.n)
    if verify and not verify_indexed_collision(circ, x, main):
        raise AssertionError("linear collision failed verification")
    return x


class _Span:
    """Incrementally reduced row basis for membership tests."""

    def __init__(self):
        self.basis: dict[int, int] = {}  # pivot bit -> row

    def reduce(self, row: int) -> int:
        while row:
            top = row.bit_length() - 1
            piv = self.basis.get(top)
            if piv is None:
                return row
            row ^= piv
        return 0

    def add(self, row: int) -> bool:
        row = self.reduce(row)
        if not row:
            return False
        self.basis[row.bit_length() - 1] = row
        return True

    def __len__(self) -> int:
        return len(self.basis)


def hash_collision_conditions(circ: BoolCircuit) -> tuple[Gf2System, int]:
    """Homogeneous conditions under which C(x) = C(0); returns (system, conditions used)."""
    n = circ.n_inputs
    span = _Span()
    sys = Gf2System(n)
    lin = [0] * circ.n_wires
    const = [0] * circ.n_wires
    for k in range(n):
        lin[k] = 1 << k

    def fix(w: int) -> None:
        # pin wire w to its value at x = 0
        if span.add(lin[w]):
            sys.add(lin[w])
        lin[w] = 0

    for g in circ.gates:
        a = g.ins[0]
        if g.kind == XOR:
            b = g.ins[1]
            lin[g.out] = span.reduce(lin[a] ^ lin[b])
            const[g.out] = const[a] ^ const[b]
        elif g.kind == INV:
            lin[g.out] = lin[a]
            const[g.out] = const[a] ^ 1
        else:
            b = g.ins[1]
            la, lb = span.reduce(lin[a]), span.reduce(lin[b])
            if la:
                lin[a] = la
                fix(a)
            elif lb:
                lin[b] = lb
                fix(b)
            # at most one input is still non-constant; the output is affine
            la, lb = span.reduce(lin[a]), span.reduce(lin[b])
            if la == 0 and lb == 0:
                lin[g.out], const[g.out] = 0, const[a] & const[b]
            elif la == 0:
                lin[g.out], const[g.out] = (lb, const[b]) if const[a] else (0, 0)
            else:
                lin[g.out], const[g.out] = (la, const[a]) if const[b] else (0, 0)
    used = len(sys.rows)
    for w in circ.outputs:
        lw = span.reduce(lin[w])
        if lw and span.add(lw):
            sys.add(lw)
    return sys, used


def find_hash_collision(circ: BoolCircuit, verify: bool = True) -> np.ndarray:
    """Nonzero x with C(x) = C(0) for a single-input circuit.

    All input groups are treated as one n-bit input.  Raises AttackFailed
    when the conditions pin x to zero.
    """
    sys, _ = hash_collision_conditions(circ)
    basis = sys.nullspace()
    if not basis:
        raise AttackFailed("conditions leave only x = 0")
    x = int_to_bitarray(basis[0], sys.n)
    if verify and not verify_hash_collision(circ, x):
        raise AssertionError("hash collision failed verification")
    return x


def verify_hash_collision(circ: BoolCircuit, x: np.ndarray) -> bool:
    if not np.any(x):
        return False
    out = evaluate_batch(circ, np.stack([x, np.zeros_like(x)]))
    return bool(np.array_equal(out[0], out[1]))


def gen_random_circuit(n: int, m: int, d: int, seed: int, aux: int = 0,
                       xor_density: float = 2.0) -> BoolCircuit:
    """Seeded random circuit with exactly ``d`` AND gates.

    Inputs are an optional ``s`` group of ``aux`` bits followed by ``x``
    of ``n`` bits.  Before each AND about ``xor_density`` XOR gates mix
    random earlier wires; each output XORs two or more wires, always
    including at least one main-input bit.
    """
    if d < 0 or m < 1 or n < 1:
        raise ValueError("need d >= 0, m >= 1, n >= 1")
    rng = random.Random(seed)
    circ = BoolCircuit()
    s = circ.add_input("s", aux) if aux else []
    x = circ.add_input("x", n)
    pool = list(s) + list(x)

    def mix():
        count = int(xor_density) + (rng.random() < xor_density - int(xor_density))
        for _ in range(count):
            a, b = rng.sample(pool, 2) if len(pool) > 1 else (pool[0], pool[0])
            pool.append(circ.xor(a, b))

    for _ in range(d):
        mix()
        a, b = rng.sample(pool, 2) if len(pool) > 1 else (pool[0], pool[0])
        pool.append(circ.and_(a, b))
    mix()
    for _ in range(m):
        picks = [rng.choice(x)] + rng.sample(pool, min(len(pool), rng.randint(1, 3)))
        acc = picks[0]
        for w in picks[1:]:
            acc = circ.xor(acc, w)
        circ.outputs.append(acc)
    return circ
