import json
import subprocess
import sys

import pytest

from twistlab import centralizer_from_json, couple_from_json, space_from_json
from twistlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_example(capsys):
    code, out, _ = run(capsys, "norm", "--space", "lp2.json", "--vec", "[3,4]")
    assert code == 0 and out.strip() == "5"


def test_norm_inline_and_sparse(capsys):
    code, out, _ = run(capsys, "norm", "--space", '{"kind": "lp", "p": 1}', "--vec", '{"2": 3, "7": -4}')
    assert code == 0 and float(out) == 7
    code, out, _ = run(capsys, "norm", "--space", "lp2.json", "--vec", "[[3, 4]]")
    assert code == 0 and float(out) == pytest.approx(5)


def test_verify_core_example(capsys):
    code, out, _ = run(capsys, "verify-core", "--couple", "linf_l1_half.json",
                       "--family", "canonical_n", "--n", "16")
    lines = out.strip().splitlines()
    assert code == 0 and lines[-1] == "PASS"
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["value"]) == 0 and float(row["bound"]) == 24


def test_indicator_example(capsys):
    code, out, _ = run(capsys, "indicator", "--space", "tsirelson.json", "--class", "schreier",
                       "--n", "8", "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"][0]["value"] >= 4


def test_factorize_prints_convention(capsys):
    code, out, _ = run(capsys, "factorize", "--couple", "linf_l1_half.json", "--vec", "[1, 1]",
                       "--format", "json")
    obj = json.loads(out)
    assert code == 0 and "log(a1/a0)" in obj["convention"] and obj["certified"]


def test_sweep_is_deterministic_across_threads(capsys, monkeypatch, tmp_path):
    args = ["verify-core", "--couple", "l4_l43_half.json", "--family", "random", "--n", "6",
            "--budget", "6", "--seed", "3", "--format", "json"]
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("TWISTLAB_THREADS", threads)
        target = tmp_path / f"out{threads}.json"
        assert main(args + ["--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    rows = json.loads(outs[0])["rows"]
    assert [r["seed"] for r in rows] == sorted(r["seed"] for r in rows)


def test_gap_sweep(capsys):
    scaled = json.dumps({"kind": "scaled", "mu": 2,
                         "inner": {"kind": "kalton_peck", "space": {"kind": "lp", "p": 2}}})
    code, out, _ = run(capsys, "gap", "--centralizer", "kp_l2.json", "--centralizer", scaled,
                       "--n", "4", "--n-max", "16")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "n,value" and [l.split(",")[0] for l in lines[1:]] == ["4", "8", "16"]


@pytest.mark.parametrize("cmd", ["verify-logconvex", "verify-kernel", "tower"])
def test_verification_sweeps_pass(capsys, cmd):
    code, out, _ = run(capsys, cmd, "--couple", "linf_l1_half.json", "--n", "3", "--budget", "3")
    assert code == 0 and out.strip().endswith("PASS")


def test_rho_and_centralizer(capsys):
    code, out, _ = run(capsys, "rho", "--centralizer", "kp_l2.json", "--budget", "10")
    assert code == 0 and float(out) > 0
    code, out, _ = run(capsys, "centralizer", "--centralizer", "kp_l2.json", "--vec", "[1, 1, 1, 1]")
    assert code == 0 and json.loads(out)["1"] == pytest.approx(0.6931471805599453)


def test_violation_exits_2(capsys, monkeypatch):
    # the certified inequalities hold, so a violated margin has to be injected
    from twistlab import indicators
    from twistlab.indicators import CoreResult

    monkeypatch.setattr(indicators, "core_estimate_residual",
                        lambda c, fam, tol: CoreResult(5.0, 1.0, -4.0, False, False))
    code, out, _ = run(capsys, "verify-core", "--couple", "linf_l1_half.json", "--n", "4")
    assert code == 2 and out.strip().endswith("FAIL")


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["norm", "--space", "{bad", "--vec", "[1]"],
    ["norm", "--space", "lp2.json"],
    ["norm", "--space", "missing.json", "--vec", "[1]"],
    ["gap", "--centralizer", "kp_l2.json"],
    ["norm", "--space", "lp2.json", "--vec", "[1, "],
])
def test_input_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["lp2.json", "tsirelson.json"])
def test_bundled_space_round_trip(name):
    from twistlab.cli import _load
    sp = space_from_json(_load(name))
    assert space_from_json(json.loads(sp.dumps())) == sp


def test_bundled_couples_and_centralizers():
    from twistlab.cli import _load
    for name in ("linf_l1_half.json", "l4_l43_half.json", "orlicz_twist_half.json",
                 "linf_tsirelson_half.json"):
        c = couple_from_json(_load(name))
        assert couple_from_json(json.dumps(c.to_json())) == c
    spec = centralizer_from_json(_load("kp_l2.json"))
    assert centralizer_from_json(spec.dumps()) == spec


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "twistlab.cli", "norm", "--space", "lp2.json",
                          "--vec", "[3,4]"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip() == "5"
