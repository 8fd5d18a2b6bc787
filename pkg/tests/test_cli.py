import csv
import io
import json
from fractions import Fraction

import pytest

from otplab import adversary
from otplab.cli import main, parse_range

from test_adversary import keep_fool


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("1..4") == [1, 2, 3, 4]
    assert parse_range("1,3") == [1, 3]
    assert parse_range("2,4..5") == [2, 4, 5]
    for bad in ("", "a..b", "1..x"):
        with pytest.raises(Exception):
            parse_range(bad)


def test_adversary_json(capsys):
    code, out, _ = run(capsys, "adversary", "--d", "2", "--reg", "random:7", "--assert-bound")
    assert code == 0
    obj = json.loads(out)
    assert obj["draws"] == 384 and Fraction(obj["mean"]) >= Fraction(1, 4)
    assert obj["config"]["reg"] == "random:7"


def test_adversary_is_deterministic(capsys):
    argv = ["adversary", "--d", "2", "--reg", "hash:3", "--mode", "monte-carlo", "--trials", "300", "--seed", "9"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    _, third, _ = run(capsys, *argv, "--workers", "2")
    assert third == first


def test_adversary_csv(capsys):
    code, out, _ = run(capsys, "adversary", "--d", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and rows[0]["draws"] == "8"


def test_constant_needs_completion(capsys):
    code, _, err = run(capsys, "adversary", "--d", "2", "--reg", "constant:0")
    assert code == 2 and "--complete" in err
    code, out, _ = run(capsys, "adversary", "--d", "2", "--reg", "constant:0", "--complete", "--assert-bound")
    assert code == 0 and Fraction(json.loads(out)["mean"]) >= Fraction(1, 4)


@pytest.mark.parametrize("argv", [
    ["adversary", "--d", "5"],
    ["adversary", "--d", "0"],
    ["adversary", "--d", "2", "--reg", "nope:1"],
    ["adversary", "--d", "2", "--reg", "missing.json"],
    ["adversary", "--d", "2", "--mode", "monte-carlo", "--trials", "0"],
    ["verify", "--d", "7"],
    ["verify", "--d", "2", "--families", "5"],
    ["dsdim", "--d", "3"],
    ["learner", "--d", "2"],
    ["learner", "--d", "3", "--exhaustive"],
    ["secret", "share", "--k", "1", "--t", "2", "--n", "3", "--q", "6"],
    ["secret", "reconstruct", "--t", "2", "--q", "7", "1:5"],
    ["export-reg", "--d", "1", "--reg", "random:0"],
])
def test_configuration_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["adversary"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_monte_carlo_allows_large_d(capsys):
    code, out, _ = run(capsys, "adversary", "--d", "5", "--mode", "monte-carlo", "--trials", "50")
    assert code == 0 and json.loads(out)["draws"] == 50


def test_sweep_csv_and_plot(capsys, tmp_path):
    png = tmp_path / "sweep.png"
    out_csv = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--d", "1..2", "--reg", "random:0,prefer-tag1:0",
                       "--assert-bound", "--out", str(out_csv), "--plot", str(png))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["d"], r["regularizer"]) for r in rows] == [
        ("1", "random:0"), ("1", "prefer-tag1:0"), ("2", "random:0"), ("2", "prefer-tag1:0")]
    assert all(Fraction(r["mean"]) >= Fraction(1, 4) for r in rows)
    assert out_csv.read_text() == out
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_verify_ok(capsys):
    code, out, _ = run(capsys, "verify", "--d", "2")
    obj = json.loads(out)
    assert code == 0 and obj["ok"] and obj["ladder_failures"] == []
    assert [r["family"] for r in obj["uniformity"]] == [1, 2, 3, 4]


def test_verify_catches_tampered_builder(capsys, monkeypatch):
    monkeypatch.setattr(adversary, "build_instances", keep_fool)
    code, out, _ = run(capsys, "verify", "--d", "2", "--families", "2")
    assert code == 1 and not json.loads(out)["ok"]


def test_dsdim(capsys):
    code, out, _ = run(capsys, "dsdim", "--d", "2", "--points", "0..3", "--kmax", "3", "--assert-bound")
    assert code == 0 and json.loads(out)["k"] == 1
    code, out, _ = run(capsys, "dsdim", "--d", "4", "--kmax", "3", "--assert-bound")
    assert code == 0 and json.loads(out)["k"] <= 2


def test_learner_reports_worst_case(capsys):
    code, out, _ = run(capsys, "learner", "--d", "4", "--exhaustive")
    obj = json.loads(out)
    assert code == 0 and obj["max_scaled_error"] == 2 and obj["violations"] > 0
    assert len(obj["first_violation"]["points"]) == 2
    code, _, _ = run(capsys, "learner", "--d", "4", "--exhaustive", "--assert-bound")
    assert code == 1


def test_secret_commands(capsys):
    code, out, _ = run(capsys, "secret", "share", "--k", "4", "--t", "2", "--n", "4", "--q", "7", "--seed", "1")
    tokens = out.split()
    assert code == 0 and len(tokens) == 4
    code, out, _ = run(capsys, "secret", "reconstruct", "--t", "2", "--q", "7", *tokens[1:3])
    assert out.strip() == "4"
    assert run(capsys, "secret", "reconstruct", "--t", "2", "--q", "7", "1:5", "2:0")[1].strip() == "3"
    code, out, _ = run(capsys, "secret", "verify", "--t", "2", "--n", "3", "--q", "5")
    assert code == 0 and json.loads(out)["holds"]
    code, out, _ = run(capsys, "secret", "otp-share", "--secret", "0110", "--seed", "3")
    s1, s2 = out.split()
    assert run(capsys, "secret", "otp-reconstruct", s1, s2)[1].strip() == "0110"


def test_export_and_file_regularizer(capsys, tmp_path):
    path = tmp_path / "reg.json"
    assert run(capsys, "export-reg", "--d", "1", "--reg", "hash:2", "--out", str(path))[0] == 0
    assert json.loads(path.read_text())["d"] == 2
    _, from_file, _ = run(capsys, "adversary", "--d", "1", "--reg", str(path))
    _, builtin, _ = run(capsys, "adversary", "--d", "1", "--reg", "hash:2")
    a, b = json.loads(from_file), json.loads(builtin)
    assert a["mean"] == b["mean"] and a["family_means"] == b["family_means"]

    path.write_text("{")
    assert run(capsys, "adversary", "--d", "1", "--reg", str(path))[0] == 2


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("OTPLAB_OUTPUT_DIR", str(tmp_path / "out"))
    code, out, _ = run(capsys, "adversary", "--d", "1")
    assert code == 0
    assert (tmp_path / "out" / "adversary-d1.json").read_text() == out
