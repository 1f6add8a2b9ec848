import json
import subprocess
import sys

import pytest

from gsr.cli import ConfigError, build_config, main, read_config, verify_text

# [PAPER] published recovered relations, typed as infix text
PRINTED = {
    "Nguyen-8": "0.83654*ln(y) = -0.032175*ln(x*x*x*x) + 0.54697*ln(x)",
    "Nguyen-10": "0.44721*y = 0.89442*sin(x1)*cos(x2)",
    "Nguyen-11": "0.70711*ln(y) = 0.70711*x2*ln(x1)",
    "SymSet-9": "0.83205*ln(y) = -0.5547*ln(x1 + x2 + x1)",
}


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_run_emits_record(capsys, tmp_path):
    rc = main(["run", "--benchmark", "Nguyen-1", "--seed", "7", "--budget-seconds", "120",
               "--out", str(tmp_path)])
    rec = _json(capsys)
    assert rc == 0 and rec["benchmark"] == "Nguyen-1" and rec["seed"] == 7
    assert rec["exact"] is True and rec["converged"] is True
    assert (tmp_path / "expressions" / "Nguyen-1_seed7.txt").read_text().strip() == rec["expression"]
    trace = (tmp_path / "traces" / "Nguyen-1_seed7.jsonl").read_text().splitlines()
    assert len(trace) == rec["generations"]
    assert set(json.loads(trace[0])) == {"k", "best", "threshold", "stage_x", "stage_y"}


def test_run_sgsr_flagged(capsys):
    rc = main(["run", "--benchmark", "SymSet-2", "--sgsr", "--max-generations", "3"])
    rec = _json(capsys)
    assert rc == 0 and rec["sgsr"] is True and rec["generations"] <= 3
    assert all(p == ["identity"] for p in rec["extra"].get("psi_transforms", [["identity"]]))


def test_run_deterministic_without_runtime(capsys):
    args = ["run", "--benchmark", "Nguyen-5", "--seed", "3", "--max-generations", "20"]
    main(args)
    a = _json(capsys)
    main(args)
    b = _json(capsys)
    a.pop("runtime_s"), b.pop("runtime_s")
    assert a == b


def test_errors_exit_nonzero(capsys):
    assert main(["run", "--benchmark", "Nguyen-99"]) == 2
    assert "unknown benchmark" in capsys.readouterr().err
    assert main(["suite", "--benchmark", "Nguyen-1", "--runs", "0"]) == 2
    assert main(["verify", "--benchmark", "Nguyen-1", "--expression", "y = = x"]) == 2
    assert main(["verify", "--benchmark", "Nguyen-1", "--expression", "0.5*y = 0"]) == 2
    assert main(["verify", "missing-file.txt", "--benchmark", "Nguyen-1"]) == 2
    with pytest.raises(SystemExit):
        main(["suite", "--runs", "2"])


def test_suite_rows_and_files(capsys, tmp_path):
    rc = main(["suite", "--benchmark", "Nguyen-1", "--benchmark", "Nguyen-5", "--runs", "2",
               "--max-generations", "5", "--out", str(tmp_path)])
    out = capsys.readouterr().out.strip().splitlines()
    assert rc == 0
    assert out[0] == "benchmark,recovery_rate,mean_rmse,median_rmse,mean_runtime_s"
    assert [line.split(",")[0] for line in out[1:]] == ["Nguyen-1", "Nguyen-5"]
    assert (tmp_path / "summary.csv").read_text().strip().splitlines() == out
    runs = (tmp_path / "runs.jsonl").read_text().splitlines()
    assert sorted((json.loads(r)["benchmark"], json.loads(r)["seed"]) for r in runs) == [
        ("Nguyen-1", 0), ("Nguyen-1", 1), ("Nguyen-5", 0), ("Nguyen-5", 1)]


def test_suite_ablation_columns(capsys, tmp_path):
    rc = main(["suite", "--benchmark", "SymSet-2", "--runs", "1", "--ablation",
               "--max-generations", "3", "--out", str(tmp_path)])
    header = capsys.readouterr().out.splitlines()[0].split(",")
    assert rc == 0 and "sgsr_mean_rmse" in header and "sgsr_recovery_rate" in header
    recs = [json.loads(r) for r in (tmp_path / "runs.jsonl").read_text().splitlines()]
    assert sorted(r["sgsr"] for r in recs) == [False, True]


@pytest.mark.parametrize("name", list(PRINTED))
def test_verify_printed_relations(name, capsys, tmp_path):
    f = tmp_path / "rel.txt"
    f.write_text(PRINTED[name] + "\n")
    assert main(["verify", str(f), "--benchmark", name]) == 0
    out = _json(capsys)
    assert out["exact"] and out["printed_norm_deviation"] <= 1e-5
    assert out["refit_norm_deviation"] <= 1e-12


def test_verify_not_exact_exit_one(capsys):
    rc = main(["verify", "--benchmark", "Livermore-7", "--expression",
               "y = x + 0.16666666666666666*x^3 + 0.008333333333333333*x^5"])
    assert rc == 1 and _json(capsys)["exact"] is False


def test_verify_text_direct():
    out = verify_text("y = 2*sin(x1)*cos(x2)", "Nguyen-10")
    assert out["exact"] and out["printed_norm_deviation"] == pytest.approx(5 ** 0.5 - 1)


def test_config_file_and_overrides(tmp_path):
    f = tmp_path / "gsr.cfg"
    f.write_text("# comment\nn_pop = 40\nlambda = 0.05  # admm weight\nsgsr_mode = true\n")
    cfg = build_config(read_config(f), seed=9)
    assert cfg.n_pop == 40 and cfg.admm.lam == 0.05 and cfg.sgsr_mode and cfg.seed == 9
    assert build_config({"n_pop": "40"}, n_pop=50).n_pop == 50
    for bad in ({"n_pop": "many"}, {"colour": "red"}, {"n_survivors": "40"}, {"rho": "-1"}):
        with pytest.raises(ConfigError):
            build_config(bad)
    f.write_text("no equals sign\n")
    with pytest.raises(ConfigError):
        read_config(f)


def test_benchmarks_listing(capsys):
    assert main(["benchmarks", "--suite", "jin"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 6
    assert main(["benchmarks", "--json"]) == 0
    assert len(_json(capsys)) == 67


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "gsr", "benchmarks", "--suite", "neat"],
                       capture_output=True, text=True, timeout=120)
    assert p.returncode == 0 and "Neat-6" in p.stdout
