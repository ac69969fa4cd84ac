"""Command-line surface: dispatch, exit codes, report formats."""

import json

import pytest

from dpsqkd.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_csv_row(capsys):
    code, out, _ = run(["simulate", "--alpha2", "0.2", "--bins", "100000",
                        "--seed", "7"], capsys)
    assert code == 0
    header, row = out.strip().split("\n")
    cols = dict(zip(header.split(","), row.split(",")))
    assert cols["schema_version"] == "1"
    assert abs(float(cols["siftedRate"]) - 0.18127) < 0.011
    assert cols["qber"] == "0.0"


def test_simulate_bins_zero(capsys):
    code, out, _ = run(["simulate", "--bins", "0"], capsys)
    assert code == 0
    assert out.strip().split("\n")[1].split(",")[1] == "0"


def test_simulate_byte_identical_reruns(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    argv = ["simulate", "--alpha2", "0.2", "--bins", "20000", "--seed", "5",
            "--eve-fraction", "0.3", "--dark-click-prob", "0.001"]
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_repeat_distinct_seeds(capsys):
    code, out, _ = run(["simulate", "--bins", "5000", "--seed", "3",
                        "--repeat", "3"], capsys)
    assert code == 0
    rows = out.strip().split("\n")[1:]
    assert len(rows) == 3
    seeds = [r.split(",")[7] for r in rows]
    assert seeds == ["3", "4", "5"]
    assert len(set(rows)) == 3


def test_simulate_config_file_and_override(tmp_path, capsys):
    cfgfile = tmp_path / "s.cfg"
    cfgfile.write_text("N = 1000\nalphaSquared = 0.2\nseed = 9\n")
    code, out, _ = run(["simulate", "--config", str(cfgfile),
                        "--alpha2", "0.5"], capsys)
    assert code == 0
    row = out.strip().split("\n")[1].split(",")
    assert row[1] == "1000" and row[2] == "0.5" and row[7] == "9"


def test_simulate_malformed_config_names_field(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("N = 100\nwibble = 1\n")
    code, _, err = run(["simulate", "--config", str(cfgfile)], capsys)
    assert code == 2
    assert "wibble" in err


def test_simulate_requires_bins(capsys):
    code, _, err = run(["simulate"], capsys)
    assert code == 2
    assert "N" in err


def test_simulate_env_seed(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DPSQKD_SEED", "31")
    code, out, _ = run(["simulate", "--bins", "100"], capsys)
    assert code == 0
    assert out.strip().split("\n")[1].split(",")[7] == "31"


def test_simulate_text_format(capsys):
    code, out, _ = run(["simulate", "--bins", "1000", "--seed", "2",
                        "--format", "text"], capsys)
    assert code == 0
    assert "siftedRate" in out


def test_verify_povm_cutoff_too_small(capsys):
    code, _, err = run(["verify-povm", "--cutoff", "1"], capsys)
    assert code == 2
    assert "cutoff too small" in err


def test_verify_povm_full_run_json(capsys):
    code, out, _ = run(["verify-povm", "--json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["e2e3_comm_norm"] >= payload["nonzero_floor"]
    assert payload["g_comm_max"] <= payload["g_zero_tol"]


def test_eb_compare_exit_codes(capsys):
    code, out, _ = run(["eb-compare", "--key-bins", "3", "--alpha2", "0.2"],
                       capsys)
    assert code == 0
    assert "analyticDistance" in out
    code2, _, _ = run(["eb-compare", "--eb-delay-defect", "0.4"], capsys)
    assert code2 == 1


def test_eb_compare_trials_column(capsys):
    code, out, _ = run(["eb-compare", "--trials", "5000", "--seed", "1"],
                       capsys)
    assert code == 0
    assert "empiricalDistance" in out and "sigma" in out


def test_witness_demo_default(capsys):
    code, out, _ = run(["witness-demo"], capsys)
    assert code == 0
    assert "witness found" in out
    assert "none at this resolution" in out   # the commuting family part


def test_witness_demo_separable_target(capsys):
    code, out, _ = run(["witness-demo", "--target", "separable"], capsys)
    assert code == 0
    assert out.count("none at this resolution") == 2


def test_witness_demo_coarse(capsys):
    code, out, _ = run(["witness-demo", "--resolution", "coarse"], capsys)
    assert code == 0
