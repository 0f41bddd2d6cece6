from __future__ import annotations

import json

import numpy as np
import pytest

from bandcodes.degree import binomial, rsd
from bandcodes.experiments import (
    CI_NOTE,
    complexity_check,
    degree_evolution,
    degree_preservation,
    e2e_tradeoff,
    main,
    parse_rounds,
    read_csv,
    window_for,
)
from bandcodes.errors import ParameterError
from bandcodes.sim import SimConfig


@pytest.fixture(autouse=True)
def fixed_build(monkeypatch):
    monkeypatch.setenv("BANDCODES_BUILD_ID", "test-build")


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


SMALL_RUNS = [
    ["degree-evolution", "--n", "20", "--rounds", "0,1,inf", "--samples", "2000"],
    ["e2e-tradeoff", "--n", "30", "--w-ratios", "0.5,1.0", "--trials", "5"],
    ["mesh-tradeoff", "--n", "20", "--w-ratios", "0.5,1.0", "--reference-n", "20,10", "--peers", "4",
     "--generations", "2", "--trials", "1"],
    ["complexity-check", "--n", "20", "--w-ratios", "0.5,1.0", "--trials", "3", "--peers", "4", "--generations", "2"],
    ["degree-preservation", "--n", "20", "--w-ratios", "0.5", "--peers", "4", "--generations", "2"],
    ["ci-study", "--bs-rates", "4,0.5", "--tb-values", "2", "--peers", "4", "--generations", "3", "--trials", "1"],
]


@pytest.mark.parametrize("argv", SMALL_RUNS, ids=[a[0] for a in SMALL_RUNS])
def test_every_command_is_self_describing_and_reproducible(capsys, argv):
    code, first = _run(capsys, *argv, "--seed", "5")
    assert code == 0
    header, rows = read_csv(first)
    assert header["experiment"] == argv[0] and header["seed"] == 5 and header["build"] == "test-build"
    assert "config" in header and "rng" in header
    assert rows and all(r["experiment"] == argv[0] and r["build"] == "test-build" for r in rows)
    _, second = _run(capsys, *argv, "--seed", "5")
    assert first == second


def test_jobs_do_not_change_results(capsys):
    argv = ["e2e-tradeoff", "--n", "30", "--w-ratios", "0.3,0.6,1.0", "--trials", "4"]
    _, serial = _run(capsys, *argv)
    _, parallel = _run(capsys, *argv, "--jobs", "2")
    assert serial == parallel


def test_out_summary_and_config(tmp_path, capsys):
    cfg = tmp_path / "session.cfg"
    cfg.write_text("symbol_size = 625\n")
    out, summary = tmp_path / "e2e.csv", tmp_path / "e2e.json"
    code, printed = _run(capsys, "e2e-tradeoff", "--n", "20", "--w-ratios", "1.0", "--trials", "3",
                         "--config", str(cfg), "--out", str(out), "--summary", str(summary))
    assert code == 0 and printed == ""
    header, rows = read_csv(out.read_text())
    assert header["config"]["symbol_size"] == 625
    assert json.loads(summary.read_text())["experiment"] == "e2e-tradeoff"
    # 20 symbols of 625 bytes are 0.1 Mbit
    assert float(rows[0]["xor_per_mbit"]) == pytest.approx(10 * float(rows[0]["xor_mean"]))


@pytest.mark.parametrize(
    "argv,kind",
    [
        (["e2e-tradeoff", "--w-ratios", "1.5", "--trials", "3"], "ParameterError"),
        (["e2e-tradeoff", "--trials", "0"], "ParameterError"),
        (["degree-evolution", "--samples", "10"], "ParameterError"),
        (["complexity-check", "--n", "x"], "UsageError"),
        (["frobnicate"], "UsageError"),
    ],
)
def test_validation_errors_are_machine_readable(capsys, argv, kind):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code != 0
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == kind and err["message"]


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"warp": 9}')
    with pytest.raises(SystemExit) as exc:
        main(["e2e-tradeoff", "--config", str(cfg)])
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ParameterError"


def test_parse_rounds_and_windows():
    assert parse_rounds("0, 2,inf") == [0, 2, "inf"]
    with pytest.raises(ParameterError):
        parse_rounds("-1")
    assert window_for(100, 0.25) == 25 and window_for(7, 0.01) == 1
    with pytest.raises(ParameterError):
        window_for(10, 0.0)


def test_degree_evolution_columns():
    data = degree_evolution(100, "rsd", [0, 2, 4, "inf"], 20_000, seed=1)
    rows = data.records()
    zero = np.array([r["analytic_p"] for r in rows if r["j"] == 0])
    assert np.array_equal(zero, rsd(100).pmf)
    limit = np.array([r["analytic_p"] for r in rows if r["j"] == "inf"])
    assert np.array_equal(limit, binomial(100).pmf)
    assert all(v < 0.05 for v in data.meta["tv_analytic_empirical"].values())


def test_e2e_trend():
    data = e2e_tradeoff([100], [0.2, 0.3, 0.4, 0.5], trials=200, seed=2)
    eps, ci = data.column("overhead_mean"), data.column("overhead_ci95")
    xors = data.column("xor_mean")
    for k in range(len(eps) - 1):
        assert eps[k + 1] <= eps[k] + ci[k] + ci[k + 1]
        assert xors[k + 1] >= xors[k]


def test_complexity_predicted_columns():
    data = complexity_check([50, 100], [0.37, 1.0], trials=2, seed=0, mode="direct", reference_sources=())
    totals = {(r["N"], r["W"]): r["cd_total"] for r in data.records()}
    assert totals[(50, 50)] == 1224.75
    assert totals[(100, 37)] == 2414.0
    assert totals[(100, 100)] == 4949.75


def test_degree_preservation_direct_and_empty():
    data = degree_preservation(100, [0.4], direct=True, samples=100_000, seed=3)
    assert data.meta["tv"]["40"] < 0.01
    empty = degree_preservation(20, [0.5], peers=3, generations=2, base=SimConfig(source_bandwidth=0.0))
    assert data.meta["packets"]["40"] == 100_000
    assert empty.meta["packets"]["10"] == 0
    assert all(r["count"] == 0 for r in empty.records())


def test_ci_study_note(capsys):
    _, out = _run(capsys, *SMALL_RUNS[-1])
    header, rows = read_csv(out)
    assert header["note"] == CI_NOTE
    assert float(rows[0]["mean_ci"]) >= float(rows[1]["mean_ci"])
