"""Command-line front end: single runs, suites, ablations and verification."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .admm import AdmmConfig
from .benchmarks import SUITES, UnknownBenchmark, get_benchmark, list_benchmarks, registry_json, sample_dataset
from .expression import ParseError, parse_relation
from .gp import GpConfig, run
from .recovery import (
    DegenerateModel,
    RecoveredModel,
    RunRecord,
    aggregate,
    equivalence_check,
    prediction_rmse,
    summary_csv,
)


class ConfigError(ValueError):
    pass


_ADMM_KEYS = {"lam": "lam", "lambda": "lam", "rho": "rho", "tol": "tol",
              "admm_tol": "tol", "max_iters": "max_iters"}
_GP_FIELDS = {f.name: f for f in dataclasses.fields(GpConfig) if f.name != "admm"}


def _coerce(key: str, value: str, like):
    try:
        if isinstance(like, bool):
            if value.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return value.lower() in ("1", "true", "yes")
        if isinstance(like, int) or like is None:
            return int(value)
        return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def build_config(pairs: dict[str, str], **overrides) -> GpConfig:
    """GpConfig from text pairs, then keyword overrides (already typed)."""
    gp_kw, admm_kw = {}, {}
    defaults, admm_defaults = GpConfig(), AdmmConfig()
    for k, v in pairs.items():
        if k in _ADMM_KEYS:
            key = _ADMM_KEYS[k]
            admm_kw[key] = _coerce(k, v, getattr(admm_defaults, key))
        elif k in _GP_FIELDS:
            gp_kw[k] = _coerce(k, v, getattr(defaults, k))
        else:
            raise ConfigError(f"unknown config key {k!r}")
    gp_kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return GpConfig(admm=AdmmConfig(**admm_kw), **gp_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def execute(name: str, cfg: GpConfig) -> tuple[RunRecord, list[dict]]:
    """One GP run plus its evaluation; returns the record and the trace."""
    bench = get_benchmark(name)
    res = run(bench, cfg)
    rec = RunRecord(bench.name, cfg.seed, False, float("nan"), float("nan"), res.elapsed,
                    res.generations, "", res.best_fitness, res.converged, cfg.sgsr_mode,
                    stop_reason=res.stop_reason)
    if res.fit is None:
        rec.extra["error"] = "no finite-fitness individual"
        return rec, res.trace
    try:
        model = RecoveredModel.from_dataset(res.best.phis, res.best.psis, res.fit.w,
                                            res.table_x, res.table_y, res.dataset, bench.name)
    except DegenerateModel as exc:
        rec.extra["error"] = str(exc)
        return rec, res.trace
    report = equivalence_check(model, bench)
    test = sample_dataset(bench, "test", cfg.seed)
    beta = model.coefficients()[model.n_phi:]
    rec.exact = report.exact
    rec.max_rel_error = report.max_rel_error
    rec.train_rmse = prediction_rmse(model, res.dataset)
    rec.test_rmse = prediction_rmse(model, test)
    rec.expression = model.expression()
    rec.extra.update({
        "refit_expression": model.expression(refit=True),
        "psi_transforms": [[model.table_y.transforms[c].value for c in m.codes]
                           for m, b in zip(model.psis, beta) if b != 0],
        "admm_iters": res.fit.iters,
        "admm_converged": res.fit.converged,
    })
    return rec, res.trace


def _execute_job(job):
    return execute(*job)


def _write_run(out: Path, rec: RunRecord, trace: list[dict]) -> None:
    tag = f"{rec.benchmark}_seed{rec.seed}" + ("_sgsr" if rec.sgsr else "")
    (out / "expressions").mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "expressions" / f"{tag}.txt").write_text(rec.expression + "\n")
    (out / "traces" / f"{tag}.jsonl").write_text(
        "".join(json.dumps(t, sort_keys=True) + "\n" for t in trace))
    with open(out / "runs.jsonl", "a") as fh:
        fh.write(rec.to_json() + "\n")


def _config_from_args(args, seed: int, sgsr: bool) -> GpConfig:
    pairs = read_config(args.config) if args.config else {}
    return build_config(pairs, seed=seed, sgsr_mode=sgsr or None,
                        max_generations=args.max_generations,
                        wall_clock_budget=args.budget_seconds)


def cmd_run(args) -> int:
    get_benchmark(args.benchmark)
    cfg = _config_from_args(args, args.seed, args.sgsr)
    rec, trace = execute(args.benchmark, cfg)
    if args.out:
        _write_run(Path(args.out), rec, trace)
    print(rec.to_json())
    return 0


def cmd_suite(args) -> int:
    if args.runs < 1:
        raise ConfigError("--runs must be at least 1")
    names = args.benchmark or list_benchmarks(args.suite)
    for n in names:
        get_benchmark(n)
    seeds = [args.seed + i for i in range(args.runs)]
    modes = [False, True] if args.ablation else [bool(args.sgsr)]
    jobs = [(n, _config_from_args(args, s, m)) for n in names for m in modes for s in seeds]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "runs.jsonl").write_text("")
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_execute_job, jobs))
    else:
        results = []
        for job in jobs:
            results.append(execute(*job))
            rec = results[-1][0]
            print(f"{rec.benchmark} seed={rec.seed} sgsr={rec.sgsr} exact={rec.exact} "
                  f"test_rmse={rec.test_rmse:.3g} t={rec.runtime_s:.1f}s", file=sys.stderr)
    for rec, trace in results:
        _write_run(out, rec, trace)
    rows, extra = [], ()
    for n in names:
        recs = [r for r, _ in results if r.benchmark == n]
        main = aggregate([r for r in recs if r.sgsr == modes[0]], n)
        row = dataclasses.asdict(main)
        if args.ablation:
            sg = aggregate([r for r in recs if r.sgsr], n)
            row.update({"sgsr_recovery_rate": sg.recovery_rate, "sgsr_mean_rmse": sg.mean_rmse,
                        "sgsr_median_rmse": sg.median_rmse,
                        "sgsr_mean_runtime_s": sg.mean_runtime_s})
            extra = ("sgsr_recovery_rate", "sgsr_mean_rmse", "sgsr_median_rmse",
                     "sgsr_mean_runtime_s")
        rows.append(row)
    text = summary_csv(rows, extra)
    (out / "summary.csv").write_text(text)
    print(text, end="")
    return 0


def verify_text(text: str, name: str, seed: int = 0) -> dict:
    """Equivalence report for a relation written as text, refit on the training set."""
    bench = get_benchmark(name)
    rel = parse_relation(text.strip(), bench.d)
    tx, ty = rel.tables()
    ds = sample_dataset(bench, "train", seed)
    model = RecoveredModel.from_dataset(rel.phis, rel.psis, rel.w, tx, ty, ds, bench.name)
    report = equivalence_check(model, bench)
    printed = rel.w
    refit = model.coefficients()
    return {
        "benchmark": bench.name,
        "expression": text.strip(),
        **report.to_dict(),
        "printed_norm_deviation": float(abs(np.linalg.norm(printed) - 1.0)),
        "refit_norm_deviation": float(abs(np.linalg.norm(refit) - 1.0)),
        "refit_coefficients": [float(c) for c in refit],
        "refit_expression": model.expression(refit=True),
    }


def cmd_verify(args) -> int:
    text = args.expression if args.expression else Path(args.file).read_text()
    out = verify_text(text, args.benchmark, args.seed)
    print(json.dumps(out, indent=2))
    return 0 if out["exact"] else 1


def cmd_benchmarks(args) -> int:
    if args.json:
        print(registry_json())
    else:
        for n in list_benchmarks(args.suite):
            b = get_benchmark(n)
            print(f"{n:14s} d={b.d}  {b.train.label():18s} {b.expression}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsr", description="Generalized symbolic regression")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value file with GP/ADMM settings")
        sp.add_argument("--max-generations", type=int)
        sp.add_argument("--budget-seconds", type=float, help="wall-clock budget per run")
        sp.add_argument("--out", help="output directory")

    r = sub.add_parser("run", help="one run on one benchmark")
    r.add_argument("--benchmark", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--sgsr", action="store_true", help="fix g(y) = y (s-GSR ablation)")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("suite", help="several seeded runs per benchmark")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--suite", choices=SUITES + ("all",))
    g.add_argument("--benchmark", action="append")
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--seed", type=int, default=0, help="first seed; runs use seed..seed+runs-1")
    m = s.add_mutually_exclusive_group()
    m.add_argument("--sgsr", action="store_true")
    m.add_argument("--ablation", action="store_true", help="run GSR and s-GSR on matched seeds")
    s.add_argument("--workers", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_suite, out=None)

    v = sub.add_parser("verify", help="check a relation against a benchmark's ground truth")
    v.add_argument("file", nargs="?", help="file holding one relation, e.g. '0.5*y = x1'")
    v.add_argument("--expression", help="relation text instead of a file")
    v.add_argument("--benchmark", required=True)
    v.add_argument("--seed", type=int, default=0, help="training-set seed used for the refit")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("benchmarks", help="list or export the benchmark registry")
    b.add_argument("--suite", choices=SUITES + ("all",))
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_benchmarks)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd == "suite" and not args.out:
        args.out = "gsr_out"
    if args.cmd == "verify" and not (args.file or args.expression):
        parser.error("verify needs a file or --expression")
    try:
        return args.func(args)
    except (ConfigError, UnknownBenchmark, ParseError, DegenerateModel, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"gsr: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
