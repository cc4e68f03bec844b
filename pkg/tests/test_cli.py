import json
import math
import subprocess
import sys

import numpy as np
import pytest

from bethe_permanent.cli import main
from bethe_permanent.kernel import serialize_point_sets
from bethe_permanent.matrix import parse_matrix, serialize_matrix


@pytest.fixture
def write(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        path.write_bytes(data if isinstance(data, bytes) else data.encode())
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_approx_singleton(capsys, write):
    code, out, _ = run(capsys, "approx", "--input", write("m.txt", "1\n5\n"))
    assert code == 0
    res = json.loads(out)
    assert res["log_estimate"] == pytest.approx(math.log(5))
    assert res["converged"] is True


def test_approx_emit_beliefs(capsys, write):
    m = np.random.default_rng(0).uniform(0, 50, (5, 5))
    code, out, _ = run(capsys, "approx", "--input", write("m.txt", serialize_matrix(m)),
                       "--emit-beliefs")
    res = json.loads(out)
    b = np.array(res["beliefs"])
    assert code == 0 and b.shape == (5, 5)
    np.testing.assert_allclose(b.sum(axis=0), 1, atol=1e-6)
    assert res["f_bethe"] == pytest.approx(-res["log_estimate"])
    assert len(res["residual_trace"]) == res["iterations"]
    assert "bp_ms" in res and "estimate" in res


def test_approx_formats(capsys, write):
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    outs = []
    for fmt in ("dense-text", "csv", "json"):
        code, out, _ = run(capsys, "approx", "--input", write(f"m.{fmt}", serialize_matrix(m, fmt)),
                           "--format", fmt, "--no-timing")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_exact_ryser(capsys, write):
    code, out, _ = run(capsys, "exact", "--method", "ryser", "--input",
                       write("m.txt", "2\n1 2\n3 4\n"))
    assert code == 0 and json.loads(out)["estimate"] == pytest.approx(10)
    code, out, _ = run(capsys, "exact", "--method", "brute", "--input",
                       write("m.txt", "2\n1 2\n3 4\n"))
    assert json.loads(out)["estimate"] == pytest.approx(10)


def test_exact_zero_permanent(capsys, write):
    code, out, _ = run(capsys, "exact", "--input", write("m.txt", "2\n0 0\n1 1\n"))
    res = json.loads(out)
    assert code == 0 and res["estimate"] == 0.0 and res["log_estimate"] is None


def test_baselines(capsys, write):
    path = write("m.txt", "2\n1 2\n3 4\n")
    _, out, _ = run(capsys, "baseline", "--method", "det", "--input", path)
    res = json.loads(out)
    assert res["estimate"] == pytest.approx(-2) and res["sign"] == -1
    _, out, _ = run(capsys, "baseline", "--method", "diag", "--input", path)
    assert json.loads(out)["estimate"] == pytest.approx(8)


def test_sample(capsys, write):
    path = write("m.txt", "1\n3\n")
    code, out, _ = run(capsys, "sample", "--input", path, "--samples", "10", "--no-timing")
    res = json.loads(out)
    assert code == 0 and res["samples"] == 10 and res["estimate"] == pytest.approx(3)
    code, out, _ = run(capsys, "sample", "--input", path, "--budget-ms", "1")
    assert code == 0 and json.loads(out)["samples"] >= 256


def test_bench_accuracy(capsys, tmp_path):
    csv_path = tmp_path / "rows.csv"
    code, out, err = run(capsys, "bench-accuracy", "--n", "8", "--count", "200", "--seed", "1",
                         "--csv", str(csv_path), "--jobs", "1")
    assert code == 0
    res = json.loads(out)
    assert res["n"] == 8 and res["count"] == 200
    assert set(res["kendall"]) == {"bethe", "sampling", "det", "diag"}
    assert all(0 <= v <= 1 for v in res["kendall"].values())
    assert len(csv_path.read_text().splitlines()) == 201
    assert "bethe" in err


def test_bench_accuracy_byte_identical(capsys):
    argv = ["bench-accuracy", "--n", "5", "--count", "20", "--seed", "3",
            "--samples", "500", "--no-timing", "--jobs", "1"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_bench_runtime(capsys, tmp_path):
    code, out, _ = run(capsys, "bench-runtime", "--n-min", "5", "--n-max", "10", "--step", "5",
                       "--trials", "2", "--no-timing", "--csv", str(tmp_path / "rt.csv"))
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["n"] for r in rows] == [5, 10]
    assert all("mean_seconds" not in r for r in rows)
    assert (tmp_path / "rt.csv").exists()


def test_kernel_command(capsys, write):
    rng = np.random.default_rng(0)
    sets = [rng.uniform(0, 1, (4, 3)) for _ in range(3)]
    code, out, _ = run(capsys, "kernel", "--input", write("s.json", serialize_point_sets(sets)),
                       "--sigma", "0.5", "--emit-gram")
    res = json.loads(out)
    assert code == 0 and res["m"] == 3 and np.array(res["gram"]).shape == (3, 3)
    assert isinstance(res["psd"], bool)


def test_gen(capsys):
    code, out, _ = run(capsys, "gen", "--n", "4", "--seed", "2")
    m = parse_matrix(out)
    assert code == 0 and m.shape == (4, 4) and m.max() <= 50
    _, again, _ = run(capsys, "gen", "--n", "4", "--seed", "2")
    assert again == out
    _, js, _ = run(capsys, "gen", "--n", "3", "--format", "json")
    assert json.loads(js)["n"] == 3


@pytest.mark.parametrize("argv, code", [
    (["approx"], 1),
    (["frobnicate"], 1),
    (["approx", "--input", "x", "--bogus"], 1),
    (["approx", "--input", "/nonexistent/m.txt"], 2),
    (["exact", "--method", "gauss", "--input", "x"], 1),
    ([], 1),
])
def test_usage_and_input_errors(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_domain_errors_exit_2(capsys, write):
    assert run(capsys, "approx", "--input", write("neg.txt", "2\n1 -1\n1 1\n"))[0] == 2
    assert run(capsys, "approx", "--input", write("bad.txt", "2\n1 2\n3\n"))[0] == 2
    assert run(capsys, "exact", "--method", "brute",
               "--input", write("big.txt", serialize_matrix(np.ones((13, 13)))))[0] == 2
    assert run(capsys, "approx", "--reject-zeros",
               "--input", write("z.txt", "2\n1 0\n1 1\n"))[0] == 2
    assert run(capsys, "approx", "--epsilon", "2", "--input", write("m.txt", "1\n1\n"))[0] == 2


def test_numeric_error_exit_3(capsys, write, monkeypatch):
    from bethe_permanent import cli
    from bethe_permanent.errors import NumericError

    def boom(*args, **kwargs):
        raise NumericError("forced")

    monkeypatch.setattr(cli, "run_bp", boom)
    assert run(capsys, "approx", "--input", write("m.txt", "2\n1 2\n3 4\n"))[0] == 3


def test_module_entry_point(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("1\n2\n")
    proc = subprocess.run([sys.executable, "-m", "bethe_permanent", "approx", "--input", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["log_estimate"] == pytest.approx(math.log(2))
