"""Command-line entry point: ``golsi train | localize | report``.

Exit codes: 0 success (diverged runs included, flagged in their CSV),
2 usage/config error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import shutil
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from golsi import analyze, problems
from golsi.data import DataError
from golsi.gols import GolsConfig
from golsi.model import NumericError
from golsi.sampler import Mode, SamplerMode
from golsi.train import RunConfig, eval_stats, read_records, run, write_records

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


TRAIN_DEFAULTS = dict(
    name=None,
    preset="bcwd-logr",
    mode="dynamic",
    batch=100,
    opt="gols-i",
    alpha=1.0,
    budget=3000,
    repeats=10,
    seed=0,
    cadence=1,
    error_subsample=None,
    eta=2.0,
    c2=0.9,
    alpha_min=1e-8,
    alpha_max_cap=1e7,
    reuse_prev_gradient=True,
    out="runs",
    jobs=1,
)

LOCALIZE_DEFAULTS = dict(
    name=None,
    preset="iris",
    grid=100,
    spacing=0.002,
    start=0.0,
    repeats=100,
    batch_sizes=[10, 25, 50, 75, 100, 150],
    seed=0,
    init_seed=1,
    warmup=0,
    window=5,
    out="runs",
)


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _resolve(args, defaults: dict) -> dict:
    """Defaults, then the config file, then explicitly passed flags."""
    cfg = dict(defaults)
    if args.config:
        for key, value in _load_config_file(args.config).items():
            key = key.replace("-", "_")
            if key not in defaults:
                raise UsageError(f"unknown config field {key!r}")
            cfg[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _require(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise UsageError(f"{field}: {msg}")


def repeat_seeds(base_seed: int, repeats: int) -> List[tuple]:
    children = np.random.SeedSequence(base_seed).spawn(repeats)
    return [tuple(int(v) for v in c.generate_state(2, np.uint32)) for c in children]


def _train_config(cfg: dict, r: int, seeds: tuple) -> RunConfig:
    mode = Mode(cfg["mode"])
    return RunConfig(
        sampler=SamplerMode(mode, int(cfg["batch"])),
        optimizer=cfg["opt"],
        gols=GolsConfig(float(cfg["eta"]), float(cfg["c2"]), float(cfg["alpha_min"]),
                        float(cfg["alpha_max_cap"]), bool(cfg["reuse_prev_gradient"])),
        fixed_alpha=float(cfg["alpha"]),
        max_func_evals=int(cfg["budget"]),
        metric_cadence=int(cfg["cadence"]),
        init_seed=seeds[0],
        sampler_seed=seeds[1],
        error_subsample=cfg["error_subsample"],
        run_id=f"{cfg['name']}-{r:03d}",
    )


def _validate_train(cfg: dict) -> None:
    _require(cfg["preset"] in problems.PROBLEMS, "preset",
             f"unknown preset {cfg['preset']!r}; choose from {sorted(problems.PROBLEMS)}")
    _require(cfg["mode"] in [m.value for m in Mode], "mode", "must be full, static or dynamic")
    _require(cfg["opt"] in ("gols-i", "fixed"), "opt", "must be gols-i or fixed")
    _require(int(cfg["repeats"]) >= 1, "repeats", "must be >= 1")
    _require(int(cfg["budget"]) >= 1, "budget", "must be >= 1")
    _require(int(cfg["batch"]) >= 1, "batch", "must be >= 1")
    _require(int(cfg["cadence"]) >= 1, "cadence", "must be >= 1")
    _require(int(cfg["jobs"]) >= 1, "jobs", "must be >= 1")
    _require(float(cfg["eta"]) > 1, "eta", "must exceed 1")
    _require(float(cfg["c2"]) > 0, "c2", "must be positive")
    _require(0 < float(cfg["alpha_min"]) < float(cfg["alpha_max_cap"]), "alpha_min",
             "need 0 < alpha_min < alpha_max_cap")
    _require(float(cfg["alpha"]) >= 0, "alpha", "must be non-negative")


def _train_worker(job):
    preset, cfg, r, seeds, path = job
    problem = problems.load(preset)
    if cfg["mode"] != "full" and int(cfg["batch"]) > problem.train.M:
        raise UsageError(f"batch: {cfg['batch']} exceeds {problem.train.M} training rows")
    records = run(_train_config(cfg, r, seeds), problem)
    write_records(path, records)
    return path, records[-1].term if records else ""


def _echo_manifest(out: Path, kind: str, cfg: dict, extra: dict, config_path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"kind": kind, "config": cfg, **extra}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if config_path:
        shutil.copyfile(config_path, out / ("manifest.input" + Path(config_path).suffix))


def cmd_train(args) -> int:
    cfg = _resolve(args, TRAIN_DEFAULTS)
    _validate_train(cfg)
    if cfg["name"] is None:
        cfg["name"] = f"{cfg['preset']}-{cfg['opt']}-b{cfg['batch']}"
    out = Path(cfg["out"]) / cfg["name"]
    seeds = repeat_seeds(int(cfg["seed"]), int(cfg["repeats"]))
    _echo_manifest(out, "train", cfg, {"seeds": [list(s) for s in seeds]}, args.config)
    jobs = [(cfg["preset"], cfg, r, s, str(out / f"run_{r:03d}.csv")) for r, s in enumerate(seeds)]
    if int(cfg["jobs"]) > 1:
        with concurrent.futures.ProcessPoolExecutor(int(cfg["jobs"])) as pool:
            results = list(pool.map(_train_worker, jobs))
    else:
        results = [_train_worker(j) for j in jobs]
    for path, term in results:
        flag = " (diverged)" if term == "Diverged" else ""
        print(f"wrote {path}{flag}")
    return EXIT_OK


def cmd_localize(args) -> int:
    cfg = _resolve(args, LOCALIZE_DEFAULTS)
    _require(cfg["preset"] in problems.PROBLEMS, "preset", f"unknown preset {cfg['preset']!r}")
    _require(int(cfg["grid"]) >= 3, "grid", "must be >= 3 (minimum detection needs 3 points)")
    _require(float(cfg["spacing"]) > 0, "spacing", "must be positive")
    _require(int(cfg["repeats"]) >= 1, "repeats", "must be >= 1")
    sizes = cfg["batch_sizes"]
    if isinstance(sizes, str):
        sizes = [int(s) for s in sizes.split(",") if s]
    _require(len(sizes) > 0 and min(sizes) >= 1, "batch_sizes", "need positive batch sizes")
    cfg["batch_sizes"] = list(sizes)
    if cfg["name"] is None:
        cfg["name"] = f"{cfg['preset']}-localize"
    problem = problems.load(cfg["preset"])
    spec = analyze.ScanSpec(
        grid_points=int(cfg["grid"]), spacing=float(cfg["spacing"]), start=float(cfg["start"]),
        repeats=int(cfg["repeats"]), batch_sizes=tuple(sizes),
        warmup_iters=int(cfg["warmup"]), init_seed=int(cfg["init_seed"]),
        seed=int(cfg["seed"]), window=int(cfg["window"]),
    )
    out = Path(cfg["out"]) / cfg["name"]
    _echo_manifest(out, "localize", cfg, {"spec": dataclasses.asdict(spec)}, args.config)
    result = analyze.localization_study(problem, spec)
    analyze.write_histograms(out / "histograms.csv", result)
    analyze.write_summary(out / "summary.csv", result)
    print(f"optimum cell: {result.optimum_cell}")
    for row in result.summary_rows():
        print(f"|B|={row['batch_size']:>4}  minima std {row['minima_std']:.2f}  "
              f"snngpp std {row['snngpp_std']:.2f}  ratio {row['std_ratio']:.3f}")
    print(f"wrote {out / 'histograms.csv'} and {out / 'summary.csv'}")
    return EXIT_OK


def report_rows(directory) -> List[dict]:
    """Aggregate run CSVs per experiment directory."""
    root = Path(directory)
    files = sorted(root.rglob("run_*.csv"))
    if not files:
        raise DataError(f"no run CSVs under {directory}")
    groups = {}
    for f in files:
        groups.setdefault(f.parent, []).append(f)
    rows = []
    for exp, paths in sorted(groups.items()):
        stats = [eval_stats(read_records(p)) for p in paths]
        iters = sum(s.iterations for s in stats)
        rows.append(dict(
            experiment=str(exp.relative_to(root)) if exp != root else exp.name,
            runs=len(stats),
            min_fe=min(s.min_fe for s in stats),
            max_fe=max(s.max_fe for s in stats),
            mean_fe=sum(s.mean_fe * s.iterations for s in stats) / iters,
            first_fe=max(s.first_fe for s in stats),
            max_fe_after_first=max(s.max_fe_after_first for s in stats),
            final_loss=float(np.nanmean([s.final_loss for s in stats])),
            final_train_err=float(np.nanmean([s.final_train_err for s in stats])),
            final_test_err=float(np.nanmean([s.final_test_err for s in stats])),
            diverged=sum(s.diverged for s in stats),
        ))
    return rows


def cmd_report(args) -> int:
    rows = report_rows(args.dir)
    header = (f"{'experiment':<34}{'runs':>5}{'min Fe/It':>10}{'max Fe/It':>10}"
              f"{'(after 1st)':>12}{'mean Fe/It':>11}{'loss':>11}{'train err':>11}"
              f"{'test err':>10}{'div':>5}")
    print(header)
    for r in rows:
        print(f"{r['experiment']:<34}{r['runs']:>5}{r['min_fe']:>10}{r['max_fe']:>10}"
              f"{r['max_fe_after_first']:>12}{r['mean_fe']:>11.2f}{r['final_loss']:>11.3e}"
              f"{r['final_train_err']:>11.4f}{r['final_test_err']:>10.4f}{r['diverged']:>5}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from golsi import oracles
    from golsi.data import Dataset
    from golsi.model import PRESETS, Architecture, evaluate, init_params

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for name, arch in PRESETS.items():
        d = Dataset(rng.standard_normal((4, arch.input_dim)),
                    np.eye(arch.output_dim)[rng.integers(0, arch.output_dim, 4)], "synthetic")
        x = init_params(arch, args.seed)
        bp = evaluate(arch, x, d, np.arange(4)).gradient
        coords = rng.choice(arch.n_params, size=min(arch.n_params, 64), replace=False)
        fd = oracles.fd_model_gradient(arch, x, d, np.arange(4), 1e-6, coords)
        err = oracles.relative_error(fd[coords], bp[coords])
        worst = max(worst, err)
        print(f"{name:<8} p={arch.n_params:<8} fd rel err {err:.2e}")
    iris = problems.iris()
    small = Architecture((4, 8, 3))
    x = init_params(small, args.seed)
    full = evaluate(small, x, iris.train, np.arange(iris.train.M))
    loss, grad = oracles.exhaustive_expectation(small, x, iris.train)
    gap = max(abs(loss - full.loss), float(np.max(np.abs(grad - full.gradient))))
    print(f"singleton-average vs full batch gap {gap:.2e}")
    return EXIT_OK if worst < 1e-6 and gap < 1e-12 else EXIT_NUMERIC


def _bool_flag(p, name, help_):
    p.add_argument(f"--{name}", dest=name.replace("-", "_"), action=argparse.BooleanOptionalAction,
                   default=None, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="golsi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train with GOLS-I or a fixed step")
    t.add_argument("--config", help="JSON or TOML file with the fields below")
    t.add_argument("--name")
    t.add_argument("--preset", help=f"one of {sorted(problems.PROBLEMS)}")
    t.add_argument("--mode", choices=[m.value for m in Mode])
    t.add_argument("--batch", type=int)
    t.add_argument("--opt", choices=["gols-i", "fixed"])
    t.add_argument("--alpha", type=float, help="step size for --opt fixed")
    t.add_argument("--budget", type=int, help="function evaluations per run")
    t.add_argument("--repeats", type=int)
    t.add_argument("--seed", type=int, help="base seed; per-repeat seeds are spawned from it")
    t.add_argument("--cadence", type=int, help="metrics every k function evaluations")
    t.add_argument("--error-subsample", type=int)
    t.add_argument("--eta", type=float)
    t.add_argument("--c2", type=float)
    t.add_argument("--alpha-min", type=float)
    t.add_argument("--alpha-max-cap", type=float)
    _bool_flag(t, "reuse-prev-gradient", "reuse the last line-search gradient (default on)")
    t.add_argument("--out")
    t.add_argument("--jobs", type=int)
    t.set_defaults(func=cmd_train)

    loc = sub.add_parser("localize", help="minima vs SNN-GPP localization study")
    loc.add_argument("--config")
    loc.add_argument("--name")
    loc.add_argument("--preset")
    loc.add_argument("--grid", type=int)
    loc.add_argument("--spacing", type=float)
    loc.add_argument("--start", type=float)
    loc.add_argument("--repeats", type=int)
    loc.add_argument("--batch-sizes", help="comma separated, e.g. 10,50,150")
    loc.add_argument("--seed", type=int)
    loc.add_argument("--init-seed", type=int)
    loc.add_argument("--warmup", type=int)
    loc.add_argument("--window", type=int)
    loc.add_argument("--out")
    loc.set_defaults(func=cmd_localize)

    rep = sub.add_parser("report", help="Fe./It. and final-metric summary of run CSVs")
    rep.add_argument("dir")
    rep.set_defaults(func=cmd_report)

    ver = sub.add_parser("verify")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
