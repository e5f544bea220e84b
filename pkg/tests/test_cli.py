import subprocess
import sys

import pytest

from pvc_commit import circuit_model as cm
from pvc_commit.cli import main
from pvc_commit.collision_attack import gen_random_circuit
from pvc_commit.core_hash import PreparedInput
from pvc_commit.bits import bits_from_bytes
from pvc_commit.pvc_scheme import deserialize_commitment

SEED = "11" * 32
R = "000102030405060708090a0b0c0d0e0f"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def porcelain(out):
    return dict(line.split("=", 1) for line in out.splitlines())


def test_params_table_values(capsys):
    code, out = run(capsys, "params", "--n", 4194304, "--q", "5/8", "--sigma", 40, "--porcelain")
    kv = porcelain(out)
    assert code == 0
    assert kv["index_count"] == "34080" and kv["payload_bytes"] == "1090560" and kv["b"] == "1024"
    code, out = run(capsys, "params", "--n", 16384, "--porcelain")
    assert porcelain(out)["index_count"] == "5408"


def test_params_bad_q(capsys):
    assert main(["params", "--n", "16", "--q", "1/2"]) == 1


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["params"])
    assert exc.value.code == 1


@pytest.fixture
def workspace(tmp_path, capsys):
    assert main(["keygen", "--seed", SEED, "--out", str(tmp_path / "k")]) == 0
    (tmp_path / "x.bin").write_bytes(bytes(range(32)))
    code = main(["commit", "--in", str(tmp_path / "x.bin"), "--sk", str(tmp_path / "k.sk"),
                 "--out", str(tmp_path / "c.pvcc"), "--r", R, "--construction", "c2", "--b", "8"])
    assert code == 0
    capsys.readouterr()
    return tmp_path


def _assert(ws, src, index, out):
    return main(["assert", "--in", str(ws / src), "--sk", str(ws / "k.sk"), "--r", R,
                 "--index", str(index), "--commitment", str(ws / "c.pvcc"), "--out", str(ws / out)])


def _check(ws, commitment, assertion):
    return main(["check", "--commitment", str(ws / commitment), "--assertion", str(ws / assertion),
                 "--pk", str(ws / "k.pk")])


def test_honest_round_trip(workspace, capsys):
    assert _assert(workspace, "x.bin", 7, "a.pvca") == 0
    capsys.readouterr()
    assert _check(workspace, "c.pvcc", "a.pvca") == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_tampered_input_cheated(workspace, capsys):
    tampered = bytearray(range(32))
    tampered[0] ^= 0x80
    (workspace / "y.bin").write_bytes(bytes(tampered))
    c = deserialize_commitment((workspace / "c.pvcc").read_bytes())
    d1 = PreparedInput(c.params, bits_from_bytes(bytes(range(32)))).digest_many(range(256))
    d2 = PreparedInput(c.params, bits_from_bytes(bytes(tampered))).digest_many(range(256))
    index = next(i for i in range(256) if (d1[i] != d2[i]).any())
    assert _assert(workspace, "y.bin", index, "a.pvca") == 0
    capsys.readouterr()
    assert _check(workspace, "c.pvcc", "a.pvca") == 2
    assert capsys.readouterr().out.strip() == "cheated"


def test_truncated_inconclusive(workspace, capsys):
    assert _assert(workspace, "x.bin", 1, "a.pvca") == 0
    (workspace / "t.pvcc").write_bytes((workspace / "c.pvcc").read_bytes()[:100])
    capsys.readouterr()
    assert _check(workspace, "t.pvcc", "a.pvca") == 3
    assert capsys.readouterr().out.strip() == "inconclusive"
    assert _check(workspace, "missing.pvcc", "a.pvca") == 3


def test_commit_is_reproducible(workspace, capsys):
    first = (workspace / "c.pvcc").read_bytes()
    main(["commit", "--in", str(workspace / "x.bin"), "--sk", str(workspace / "k.sk"),
          "--out", str(workspace / "c2.pvcc"), "--r", R, "--construction", "c2", "--b", "8"])
    assert (workspace / "c2.pvcc").read_bytes() == first


def test_commit_input_too_long(workspace, capsys):
    code = main(["commit", "--in", str(workspace / "x.bin"), "--sk", str(workspace / "k.sk"),
                 "--out", str(workspace / "z.pvcc"), "--n", "8"])
    assert code == 1


def test_gates(tmp_path, capsys):
    out_file = tmp_path / "c2.txt"
    code, out = run(capsys, "gates", "--construction", "c2", "--n", 8, "--b", 4,
                    "--bristol", out_file, "--porcelain")
    kv = porcelain(out)
    assert code == 0 and kv["and"] == "4" and kv["xor"] == "10"
    assert sum(ln.endswith("AND") for ln in out_file.read_text().splitlines()) == 4
    code, out = run(capsys, "gates", "--n", 2 ** 30, "--report", "--porcelain")
    assert float(porcelain(out)["report_ratio"]) >= 60


def test_simulate(capsys):
    code, out = run(capsys, "simulate", "--strategy", "substitute", "--trials", 400, "--seed", 1,
                    "--porcelain")
    kv = porcelain(out)
    assert code == 0 and kv["within_3se"] == "True"
    code, out = run(capsys, "simulate", "--strategy", "abort", "--trials", 50, "--porcelain")
    assert porcelain(out)["cheated"] == "0"


def test_attack(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text(cm.export_bristol(gen_random_circuit(24, 8, 15, 3)))
    code, out = run(capsys, "attack", "--circuit", path, "--mode", "hash", "--porcelain")
    assert code == 0 and porcelain(out)["result"] == "collision"
    ident = cm.BoolCircuit()
    ident.outputs = [ident.inv(w) for w in ident.add_input("x", 4)]
    path.write_text(cm.export_bristol(ident))
    code, out = run(capsys, "attack", "--circuit", path, "--mode", "indexed", "--porcelain")
    assert porcelain(out)["result"] == "above_threshold"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pvc_commit.cli", "params", "--n", "16384", "--porcelain"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "index_count=5408" in proc.stdout
