import json
import os
import subprocess
import sys

import pytest

from fisherinfo.cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, main
from fisherinfo.config import parse_config_text
from fisherinfo.report import (
    CSV_HEADER,
    REPORT_JSON,
    SUMMARY_TXT,
    SWEEP_DIR,
    csv_name,
    emit_report,
    load_report,
    read_sweep_csv,
    report_json,
)
from fisherinfo.results import CheckResult
from fisherinfo.suite import run_suite

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

SWEEP_CONFIG = """\
catalog:
  - {name: g, kind: gaussian, mean: 0, variance: 1}
  - {name: m, kind: gmm, components: [[0.5, -1, 1], [0.5, 1, 1]]}
grid: {n_points: 513}
checks: [fii, debruijn, bayes-proof, gap-probe]
weights: [[1, 1]]
"""


def run_cli(*args, cwd=None):
    proc = subprocess.run(
        [sys.executable, "-m", "fisherinfo.cli", *args], capture_output=True, text=True, cwd=cwd
    )
    return proc.returncode, proc.stdout, proc.stderr


def masked(path):
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    d.pop("timing")
    return json.dumps(d, sort_keys=True)


def tree(directory):
    out = {}
    for root, _, files in os.walk(directory):
        for f in files:
            p = os.path.join(root, f)
            rel = os.path.relpath(p, directory)
            out[rel] = masked(p) if f == REPORT_JSON else open(p, "rb").read()
    return out


@pytest.fixture(scope="module")
def sweep_report():
    return run_suite(parse_config_text(SWEEP_CONFIG))


# -- report files -----------------------------------------------------------------------


def test_check_json_schema(sweep_report):
    d = json.loads(report_json(sweep_report))
    assert set(d) == {"artifact", "version", "verdict", "counts", "config", "checks", "timing"}
    fii = next(e for e in d["checks"] if e["check"] == "fii")
    assert {"name", "lhs", "rhs", "gap", "tolerance", "verdict", "diagnostics"} <= set(fii["result"])
    assert {"step", "n_points"} <= set(fii["result"]["diagnostics"])


def test_json_round_trip(sweep_report, tmp_path):
    emit_report(sweep_report, tmp_path)
    again = load_report(tmp_path / REPORT_JSON)
    assert again.to_dict() == json.loads(report_json(sweep_report))
    assert again.config == sweep_report.config


def test_sweep_csv(sweep_report, tmp_path):
    paths = emit_report(sweep_report, tmp_path)
    assert paths["sweeps"]
    for e in sweep_report.entries:
        if e.id.startswith("debruijn/") and not e.id.endswith("fisher-routes"):
            path = tmp_path / SWEEP_DIR / csv_name(e.id)
            with open(path, encoding="utf-8") as fh:
                assert fh.readline() == "param,lhs,rhs,gap,verdict\n"
            rows = read_sweep_csv(path)
            assert len(rows) == len(sweep_report.config.t_values)
            assert tuple(rows[0]) == CSV_HEADER


def test_summary_lists_every_entry(sweep_report, tmp_path):
    emit_report(sweep_report, tmp_path)
    text = (tmp_path / SUMMARY_TXT).read_text()
    assert text.startswith("fisherinfo ")
    for e in sweep_report.entries:
        assert e.id in text


def test_report_verdict_and_counts(sweep_report):
    assert sweep_report.verdict == "pass"
    assert sweep_report.counts()["pass"] == len(sweep_report.entries)


def test_degenerate_results_serialize():
    r = CheckResult.degenerate("x", 1e-5, "DegenerateDensity: too coarse")
    assert CheckResult.from_dict(r.to_dict()) == r
    assert r.to_dict()["lhs"] is None


def test_csv_names_are_file_safe():
    assert csv_name("debruijn/a+b/w=gaussian") == "debruijn__a+b__w=gaussian.csv"
    assert "/" not in csv_name("x/y z:1")


def test_emit_report_to_unwritable_place(sweep_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit_report(sweep_report, blocker / "sub")


# -- CLI exit codes -----------------------------------------------------------------


def test_cli_minimal_config_passes(tmp_path):
    code, out, _ = run_cli("suite", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"), "--out", str(tmp_path))
    assert code == EXIT_PASS
    assert "overall PASS" in out
    assert (tmp_path / REPORT_JSON).exists() and (tmp_path / SUMMARY_TXT).exists()


def test_cli_coarse_grid_fails_but_reports(tmp_path):
    code, _, _ = run_cli("suite", "--config", os.path.join(CONFIG_DIR, "coarse.yaml"), "--out", str(tmp_path), "--quiet")
    assert code == EXIT_FAIL
    d = json.loads((tmp_path / REPORT_JSON).read_text())
    assert d["verdict"] == "fail"
    assert d["counts"]["degenerate"] > 0


def test_cli_tolerance_scale_must_be_positive(tmp_path):
    code, _, _ = run_cli("check", "fii", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"),
                         "--tolerance-scale", "0", "--out", str(tmp_path), "--quiet")
    assert code == EXIT_ERROR


def test_cli_tolerance_scale_is_recorded(tmp_path):
    assert main(["check", "fii", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"),
                 "--tolerance-scale", "2", "--out", str(tmp_path), "--quiet"]) == EXIT_PASS
    d = json.loads((tmp_path / REPORT_JSON).read_text())
    assert d["config"]["tolerances"]["fisher"] == pytest.approx(2e-5)
    assert d["checks"][0]["result"]["tolerance"] == pytest.approx(2e-5)


@pytest.mark.parametrize(
    "text",
    [
        "catalog:\n  - {name: a, kind: gaussian, variance: -1}\nchecks: [fii]\n",
        "checks: [fii\n",
        "grid: {n_points: 20}\n",
    ],
)
def test_cli_bad_config_exits_2(tmp_path, text):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(text)
    code, _, err = run_cli("suite", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert code == EXIT_ERROR
    assert "configuration error" in err
    assert not (tmp_path / "out").exists()


def test_cli_missing_config_exits_2(tmp_path):
    assert main(["suite", "--config", str(tmp_path / "nope.yaml"), "--quiet"]) == EXIT_ERROR


def test_cli_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run_cli("check", "fii", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"),
                           "--out", str(blocker / "sub"))
    assert code == EXIT_ERROR
    assert "I/O error" in err


def test_cli_monte_carlo_needs_seed(tmp_path):
    code = main(["check", "var-additivity", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"),
                 "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_ERROR


def test_cli_rejects_oversized_seed(tmp_path):
    assert main(["check", "fii", "--seed", str(2**64), "--out", str(tmp_path), "--quiet"]) == EXIT_ERROR


def test_cli_report_subcommand(tmp_path):
    first = tmp_path / "first"
    assert main(["suite", "--config", os.path.join(CONFIG_DIR, "minimal.yaml"), "--out", str(first), "--quiet"]) == 0
    second = tmp_path / "second"
    assert main(["report", str(first / REPORT_JSON), "--out", str(second), "--quiet"]) == 0
    assert (first / REPORT_JSON).read_bytes() == (second / REPORT_JSON).read_bytes()
    assert (first / SUMMARY_TXT).read_bytes() == (second / SUMMARY_TXT).read_bytes()


def test_cli_report_rejects_garbage(tmp_path):
    bad = tmp_path / "report.json"
    bad.write_text('{"hello": 1}')
    assert main(["report", str(bad), "--quiet"]) == EXIT_ERROR


def test_cli_help_lists_subcommands():
    code, out, _ = run_cli("--help")
    assert code == 0
    for word in ("suite", "check", "report", "exit codes"):
        assert word in out


# -- determinism --------------------------------------------------------------------


def test_cli_is_deterministic_across_runs_and_threads(tmp_path):
    cfg = tmp_path / "sweeps.yaml"
    cfg.write_text(SWEEP_CONFIG)
    outs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
        out = tmp_path / name
        code, _, _ = run_cli("suite", "--config", str(cfg), "--out", str(out), "--threads", threads, "--quiet")
        assert code == EXIT_PASS
        outs.append(tree(out))
    assert outs[0] == outs[1] == outs[2]


def test_config_echo_reproduces_run(tmp_path, sweep_report):
    # the echoed config, fed back as a config file, yields the same report
    emit_report(sweep_report, tmp_path / "first")
    echo = json.loads((tmp_path / "first" / REPORT_JSON).read_text())["config"]
    cfg = tmp_path / "echo.yaml"
    cfg.write_text(json.dumps(echo))
    assert main(["suite", "--config", str(cfg), "--out", str(tmp_path / "second"), "--quiet"]) == EXIT_PASS
    assert masked(tmp_path / "first" / REPORT_JSON) == masked(tmp_path / "second" / REPORT_JSON)
