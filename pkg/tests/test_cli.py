import json

import pytest

from fdstc.cli import EXIT_BUDGET, EXIT_HYPOTHESIS, EXIT_IO, EXIT_OK, run
from fdstc.stcode import load_code


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_reports_the_nonsquare_witness(capsys, tmp_path):
    code, out, _ = _run(capsys, "construct", "--preset", "example2", "--out", str(tmp_path / "c"))
    assert code == EXIT_OK
    assert "k 24" in out and "a has order 2" in out
    assert load_code(tmp_path / "c").k == 24


def test_construct_warns_on_unmet_hypotheses(capsys):
    code, out, _ = _run(capsys, "construct", "--preset", "example5")
    assert code == EXIT_OK and "WARNING hypotheses of Theorem 2 not met" in out


def test_construct_alamouti(capsys):
    _, out, _ = _run(capsys, "construct", "--preset", "alamouti")
    assert "k 4" in out


@pytest.mark.parametrize("name,expected", [
    ("example1", "exponent 10 of 16"),
    ("example3-code2", "exponent 6 of 24, 4 groups"),
    ("example5", "exponent 30 of 32 (Gram-Schmidt only)"),
])
def test_analyze_prints_the_exponent(capsys, name, expected):
    code, out, _ = _run(capsys, "analyze", "--preset", name)
    assert code == EXIT_OK and out.splitlines()[0].startswith(expected)


def test_file_round_trip_keeps_the_exponent(capsys, tmp_path):
    path = str(tmp_path / "ex1.code")
    _run(capsys, "construct", "--preset", "example1", "--out", path)
    _, from_file, _ = _run(capsys, "analyze", path)
    _, in_memory, _ = _run(capsys, "analyze", "--preset", "example1")
    assert from_file.splitlines()[0] == in_memory.splitlines()[0]


def test_hypothesis_violation_exit_code(capsys, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("source:\n  construction: {kind: mimo, p: 7, a: -3, gamma: 3, theta: -7}\n")
    code, _, err = _run(capsys, "construct", "--config", str(cfg))
    assert code == EXIT_HYPOTHESIS and "gamma < 0" in err


def test_budget_exit_code(capsys, tmp_path):
    cfg = tmp_path / "m.yaml"
    cfg.write_text("budget: 50\nstrict: true\n")
    code, _, _ = _run(capsys, "mindet", "--preset", "example2", "--config", str(cfg))
    assert code == EXIT_BUDGET


def test_unknown_config_key_is_rejected(capsys, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("budgett: 3\n")
    code, _, err = _run(capsys, "analyze", "--preset", "alamouti", "--config", str(cfg))
    assert code == EXIT_IO and "budgett" in err


def test_missing_code_file(capsys, tmp_path):
    code, _, _ = _run(capsys, "analyze", str(tmp_path / "nope"))
    assert code == EXIT_IO


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        run(["frobnicate"])
    assert info.value.code == EXIT_IO


def test_mindet_and_decode_test(capsys):
    code, out, _ = _run(capsys, "mindet", "--preset", "alamouti")
    assert code == EXIT_OK and "delta_min 16 (exact" in out
    code, out, _ = _run(capsys, "decode-test", "--preset", "alamouti")
    assert code == EXIT_OK and "mismatches 0" in out


def test_simulation_output_and_manifest_are_reproducible(capsys, tmp_path):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("trials: 100\nsnr_grid: [0, 10]\nscenario: {kind: relay, n_d: 2}\n")
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        assert run(["simulate", "--preset", "alamouti", "--config", str(cfg), "--seed", "3",
                    "--out", str(path)]) == EXIT_OK
        outs.append((path.read_bytes(), (tmp_path / f"run{i}.csv.manifest.json").read_bytes()))
    assert outs[0] == outs[1]
    man = json.loads(outs[0][1])
    assert man["seed"] == 3 and len(man["config_sha256"]) == 64
    assert outs[0][0].decode().startswith("snr_db,bler,ci_lo,ci_hi,trials,avg_decode_nodes\n")


def test_report_command(capsys):
    code, out, _ = _run(capsys, "report", "--preset", "example3-code1")
    assert code == EXIT_OK and "exponent 12 of 24, 2 groups" in out
