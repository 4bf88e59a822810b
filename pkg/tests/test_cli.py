import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from ladderops.cli import RunConfig, UsageError, main, run, validate
from ladderops.report import dumps, fmt_float


def _run_cli(args, **env):
    full_env = dict(os.environ, **env)
    return subprocess.run(
        [sys.executable, "-m", "ladderops", *args], capture_output=True, text=True, env=full_env
    )


def test_verify_json(tmp_path):
    out = tmp_path / "verify.json"
    status = main(["verify", "--lmax", "8", "--tol", "1e-10", "--format", "json", "--out", str(out)])
    assert status == 0
    data = json.loads(out.read_text())
    assert data["pass"] is True
    ids = [c["id"] for c in data["checks"]]
    assert ids == ["eq7", "eq9-N", "eq9-R", "eq9-Q", "eq10", "eq11", "eq12", "eq15",
                   "eq17", "eq18", "eq21", "eq19-20-match"]
    assert all(c["pass"] for c in data["checks"])
    assert [c["id"] for c in data["exploratory"]] == [
        "eq31-spectral-first-post", "eq31-spectral-first-pre",
        "eq31-spectral-last-post", "eq31-spectral-last-pre",
    ]


def test_verify_gating_failure_sets_status_1(tmp_path):
    out = tmp_path / "verify.json"
    status = main(["verify", "--lmax", "4", "--tol", "0", "--out", str(out)])
    assert status == 1
    assert json.loads(out.read_text())["pass"] is False


def test_verify_csv(capsys):
    assert main(["verify", "--lmax", "4", "--format", "csv"]) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))
    assert rows[0][:3] == ["id", "kind", "margin"]
    assert len(rows) == 17
    assert text.rstrip().endswith("# pass=true")


def test_dump_operator_rz(capsys):
    assert main(["dump-operator", "--op", "R.z", "--lmax", "2"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    first = rows[0]
    assert (first["row_l"], first["row_m"], first["col_l"], first["col_m"]) == ("1", "0", "0", "0")
    assert float(first["re"]) == pytest.approx(0.5773503, abs=1e-7)
    assert float(first["im"]) == 0
    keys = [(int(r["col_l"]), int(r["col_m"]), int(r["row_l"]), int(r["row_m"])) for r in rows]
    col_order = [(l * l + l + m, rl * rl + rl + rm) for l, m, rl, rm in keys]
    assert col_order == sorted(col_order)


@pytest.mark.parametrize("selector", [
    "L.z", "L.plus", "L.squared", "N.minus", "NxL.z", "R.plus", "Q.minus",
    "R.z@analytic", "Q.z@l=2", "Z.z@spectral-first", "Z.plus@spectral-last",
])
def test_dump_operator_selectors(selector, capsys):
    assert main(["dump-operator", "--op", selector, "--lmax", "3", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["operator"] == selector
    assert all(math.hypot(e["re"], e["im"]) > 1e-14 for e in data["entries"])


def test_kernel_qz(capsys):
    assert main(["kernel", "--op", "Q.z", "--m", "0", "--lmax", "4"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["dimension"] == 1
    vec = data["vectors"][0]
    nonzero = [q for q in vec if math.hypot(q[2], q[3]) > 1e-12]
    assert nonzero == [[0, 0, 1.0, 0.0]]


def test_kernel_csv(capsys):
    assert main(["kernel", "--op", "Q.plus", "--m", "1", "--lmax", "4", "--format", "csv"]) == 0
    text = capsys.readouterr().out
    assert "# dimension=2" in text and "# matches_prediction=true" in text


def test_generate_json_and_csv(capsys):
    assert main(["generate", "--lmax", "4"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["count"] == 16
    assert data["summary"]["min_fidelity"] >= 1 - 1e-9
    assert all(f["zero_ket_at_step"] == 1 for f in data["findings"]["literal_q_plus_recipe"])
    assert main(["generate", "--lmax", "3", "--format", "csv"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("l,m,fidelity,recipe\n")
    assert "# summary count=9" in text


@pytest.mark.parametrize("argv", [
    ["verify", "--lmax", "3"],
    ["kernel", "--m", "4", "--lmax", "4"],
    ["kernel", "--lmax", "4"],
    ["dump-operator", "--lmax", "2"],
    ["dump-operator", "--op", "X.y", "--lmax", "2"],
    ["dump-operator", "--op", "Z.z@sideways", "--lmax", "2"],
    ["generate", "--lmax", "1"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    proc = _run_cli(["verify", "--format", "xml"])
    assert proc.returncode == 2


def test_validate_config():
    validate(RunConfig("verify", 4))
    with pytest.raises(UsageError):
        validate(RunConfig("verify", 3))
    with pytest.raises(UsageError):
        validate(RunConfig("kernel", 4, m=-4))


def test_run_returns_text_and_status():
    text, status = run(RunConfig("dump-operator", 1, operator_selector="L.plus", output_format="csv"))
    assert status == 0 and text.startswith("row_l,")


def test_seventeen_significant_digits():
    assert fmt_float(1 / 3) == "0.33333333333333331"
    assert float(fmt_float(math.pi)) == math.pi
    text = dumps({"x": 0.1, "y": [1, 2.5], "ok": True, "none": None, "nan": float("nan")})
    assert '"x": 0.10000000000000001' in text
    assert json.loads(text) == {"x": 0.1, "y": [1, 2.5], "ok": True, "none": None, "nan": None}


def test_verify_byte_identical_across_runs_and_threads():
    outputs = []
    for threads in ("1", "4", "1"):
        proc = _run_cli(
            ["verify", "--lmax", "8"],
            OMP_NUM_THREADS=threads, OPENBLAS_NUM_THREADS=threads, MKL_NUM_THREADS=threads,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1] == outputs[2]
