import io
from fractions import Fraction

import numpy as np
import pytest

from pvc_commit import circuit_model as cm
from pvc_commit.amplify import CubeCodeParams, cube_encode, cube_xor_cost
from pvc_commit.core_hash import (
    IndexedHashParams,
    ParameterError,
    PreparedInput,
    digest_c2,
    expand_mask,
    process,
)


def test_counts_examples():
    c2 = cm.build_digest_circuit("c2", 8, 4)
    assert (c2.and_count, c2.xor_count) == (4, 10)
    c1 = cm.build_digest_circuit("c1", 8, 4)
    assert (c1.and_count, c1.xor_count) == (8, 6)
    assert cm.build_digest_circuit("c2", 1024, 1024).and_count == 512


@pytest.mark.parametrize("n,b", [(b * k, b) for b in (2, 4, 8, 16) for k in (1, 2, 5)])
def test_count_formulas(n, b):
    for c, want in (("c1", (n, n - n // b)), ("c2", (n // 2, 3 * n // 2 - n // b)),
                    ("c3", (n // 2, 3 * n // 2 - n // b))):
        circ = cm.build_digest_circuit(c, n, b)
        assert (circ.and_count, circ.xor_count) == want
        assert cm.digest_gate_counts(c, n, b) == want
    assert Fraction(cm.digest_gate_counts("c2", n, b)[0], n) == Fraction(1, 2)


def test_builder_rejects():
    with pytest.raises(ParameterError):
        cm.build_digest_circuit("c0", 8, 4)
    with pytest.raises(ParameterError):
        cm.build_digest_circuit("c2", 10, 4)


def test_evaluate_examples():
    circ = cm.build_digest_circuit("c2", 4, 4)
    assert cm.evaluate_circuit(circ, {"index": "1100", "x": "1010"}).tolist() == [digest_c2("1100", "1010")]
    assert cm.evaluate_circuit(circ, ["0000", "0000"]).tolist() == [0]


def test_exhaustive_agreement_c2_n8():
    circ = cm.build_digest_circuit("c2", 8, 4)
    p = IndexedHashParams.c2(8, 4)
    xs = np.array([[(v >> (7 - k)) & 1 for k in range(8)] for v in range(256)], dtype=np.uint8)
    for i in range(16):
        idx = np.tile(np.array([(i >> (3 - k)) & 1 for k in range(4)], dtype=np.uint8), (256, 1))
        got = cm.evaluate_batch(circ, np.hstack([idx, xs]))
        want = np.stack([PreparedInput(p, x).digest(i) for x in xs])
        assert np.array_equal(got, want)


@pytest.mark.parametrize("n", [8, 64, 256])
@pytest.mark.parametrize("c", ["c1", "c2", "c3"])
def test_circuit_equals_process(c, n):
    b = 8
    rng = np.random.default_rng(n)
    if c == "c3":
        p = IndexedHashParams.c3(n, Fraction(3, 4), 10, b)
    else:
        p = getattr(IndexedHashParams, c)(n, b)
    circ = cm.build_digest_circuit(c, n, b)
    rows = []
    want = []
    for _ in range(1000):
        i = int(rng.integers(p.index_count))
        x = rng.integers(0, 2, n, dtype=np.uint8)
        key = expand_mask(p.family_key, i, b) if c == "c3" else np.array(
            [(i >> (b - 1 - k)) & 1 for k in range(b)], dtype=np.uint8)
        rows.append(np.concatenate([key, x]))
        want.append(process(p, i, x))
    assert np.array_equal(cm.evaluate_batch(circ, np.array(rows)), np.array(want))


def test_bristol_single_and():
    circ = cm.BoolCircuit()
    a = circ.add_input("a", 1)
    b = circ.add_input("b", 1)
    circ.outputs.append(circ.and_(a[0], b[0]))
    text = cm.export_bristol(circ)
    lines = text.strip().splitlines()
    assert len(lines) == 4
    assert lines[-1].endswith("AND")
    assert lines == ["1 3", "2 1 1", "1 1", "2 1 0 1 2 AND"]


def test_bristol_c2_and_lines():
    text = cm.export_bristol(cm.build_digest_circuit("c2", 8, 4))
    assert sum(ln.endswith("AND") for ln in text.splitlines()) == 4


@pytest.mark.parametrize("build", [
    lambda: cm.build_digest_circuit("c2", 16, 4),
    lambda: cm.build_digest_circuit("c1", 12, 6),
    lambda: cm.build_cube_encoder_circuit(CubeCodeParams(2, 1)),
])
def test_bristol_round_trip(build):
    circ = build()
    buf = io.StringIO()
    cm.export_bristol(circ, buf)
    back = cm.parse_bristol(buf.getvalue())
    rng = np.random.default_rng(7)
    inputs = rng.integers(0, 2, (100, circ.n_inputs), dtype=np.uint8)
    assert np.array_equal(cm.evaluate_batch(circ, inputs), cm.evaluate_batch(back, inputs))


def test_parse_rejects_garbage():
    with pytest.raises(cm.CircuitError):
        cm.parse_bristol("1 3\n2 1 1\n")
    with pytest.raises(cm.CircuitError):
        cm.parse_bristol("1 3\n2 1 1\n1 1\n2 1 0 5 2 AND\n")
    with pytest.raises(cm.CircuitError):
        cm.parse_bristol("1 3\n2 1 1\n1 1\n2 1 0 1 2 OR\n")


def test_cube_encoder_circuit():
    cc = CubeCodeParams(2, 2)
    circ = cm.build_cube_encoder_circuit(cc)
    assert (circ.xor_count, circ.and_count) == (5, 0)
    for v in range(16):
        m = np.array([(v >> k) & 1 for k in range(4)], dtype=np.uint8)
        assert np.array_equal(cm.evaluate_circuit(circ, [m]), cube_encode(cc, m))


@pytest.mark.parametrize("rho", [2, 3, 4])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_cube_encoder_cost(rho, d):
    cc = CubeCodeParams(rho, d)
    assert cm.build_cube_encoder_circuit(cc).xor_count == cube_xor_cost(cc) == (rho - 1) * ((rho + 1) ** d - rho ** d)


@pytest.mark.parametrize("n,b,published", [(2 ** 22, 1024, 2.29e6), (2 ** 30, 1024, 5.39e8), (2 ** 14, 128, 5.17e4)])
def test_assert_and_count_near_table(n, b, published):
    assert abs(cm.assert_and_count(n, b) - published) / published <= 0.15


@pytest.mark.parametrize("n,scheme,published,tol", [
    (2 ** 30, "sha3_sponge", 3.79e10, 0.02), (2 ** 22, "sha3_sponge", 1.48e8, 0.02),
    (2 ** 30, "lowmc", 1.49e10, 0.05),
])
def test_baselines(n, scheme, published, tol):
    assert abs(cm.baseline_and_count(n, scheme) - published) / published <= tol


def test_ratio_and_report():
    assert cm.baseline_and_count(2 ** 30) / cm.assert_and_count(2 ** 30, 1024) >= 60
    rep = cm.cost_report(2 ** 22, 1024)
    assert rep.and_count == cm.assert_and_count(2 ** 22, 1024)
    assert set(rep.as_dict()) >= {"and_count", "baseline_and", "ratio"}
    with pytest.raises(ValueError):
        cm.baseline_and_count(8, "md5")
