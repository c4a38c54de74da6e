"""Command-line experiment harness.

Subcommands
-----------
datagen   materialize a dataset: linear-system text file for the
          least-squares generators, a JSON manifest otherwise
run       execute a JSON-configured grid of (method, alpha, repeat) runs,
          one trace CSV per cell plus a summary CSV
bounds    build a row-split operator family, sweep the splitting error
          over a time grid, emit CSV and SVG
plot      render trace CSVs as a log-y convergence chart (SVG)

Global flags: --seed (overrides config seeds), --out (output file or
directory), --threads (worker cap for grid cells).  All randomness flows
from seeds; re-running a config reproduces every output byte except the
wall_seconds column.  Divergence of a run is a recorded outcome, not a
failure exit.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .data import DatasetSpec, make_problem, save_linear_system, split_holdout
from .errors import EmptyTrace, SplitOptError
from .ode import IntegratorConfig
from .optimizers import RunConfig, StoppingRule, Trace, run
from .plotting import PALETTE, Series, render_line_chart

TRACE_HEADER = (
    "method",
    "alpha",
    "batch",
    "seed",
    "epoch",
    "iteration",
    "wall_seconds",
    "loss",
    "metric",
    "diverged",
)

SUMMARY_HEADER = (
    "method",
    "alpha",
    "seed",
    "stopped",
    "diverged",
    "epochs",
    "iterations",
    "wall_seconds",
    "final_loss",
    "final_metric",
)


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec
    methods: list
    alphas: list
    batch_size: int
    max_epochs: int = 100
    stop: StoppingRule | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    repeat: int = 30
    seed: int = 0
    seed_stride: int = 1
    shuffle_each_epoch: bool = True
    init_scale: float = 0.01
    holdout: DatasetSpec | None = None
    holdout_size: int = 0


def _get(d, key, kind, path, default=...):
    if key not in d:
        if default is ...:
            raise ValueError(f"{path}.{key}: required field missing")
        return default
    val = d[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if kind is not None and not isinstance(val, kind):
        raise ValueError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _parse_dataset(d, path) -> DatasetSpec:
    if not isinstance(d, dict):
        raise ValueError(f"{path}: expected an object")
    kind = _get(d, "kind", str, path)
    allowed = {
        "kind", "n", "p", "k", "noise_sigma", "seed", "separation",
        "image_side", "rays", "path", "images_path", "labels_path", "class_filter",
    }
    for key in d:
        if key not in allowed:
            raise ValueError(f"{path}.{key}: unknown field")
    try:
        return DatasetSpec(
            kind=kind,
            n=_get(d, "n", int, path, 1000),
            p=_get(d, "p", int, path, 50),
            k=_get(d, "k", int, path, 2),
            noise_sigma=_get(d, "noise_sigma", float, path, 0.0),
            seed=_get(d, "seed", int, path, 0),
            separation=_get(d, "separation", float, path, 4.0),
            image_side=_get(d, "image_side", int, path, 10),
            rays=_get(d, "rays", int, path, 200),
            path=_get(d, "path", str, path, None),
            images_path=_get(d, "images_path", str, path, None),
            labels_path=_get(d, "labels_path", str, path, None),
            class_filter=tuple(_get(d, "class_filter", list, path, None) or ()) or None,
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def parse_experiment_config(d: dict) -> ExperimentConfig:
    """Validate a JSON config dict; errors carry the offending field path."""
    if not isinstance(d, dict):
        raise ValueError("config: expected a JSON object")
    dataset = _parse_dataset(_get(d, "dataset", dict, "config"), "config.dataset")
    methods = _get(d, "methods", list, "config", ["sgd", "splitting"])
    alphas = [float(a) for a in _get(d, "alphas", list, "config")]
    stop = None
    if d.get("stop") is not None:
        s = _get(d, "stop", dict, "config")
        try:
            stop = StoppingRule(
                kind=_get(s, "kind", str, "config.stop"),
                threshold=_get(s, "threshold", float, "config.stop"),
                eval_every=_get(s, "eval_every", int, "config.stop", 0),
            )
        except ValueError as exc:
            raise ValueError(f"config.stop: {exc}") from None
    integ = IntegratorConfig()
    if d.get("integrator") is not None:
        i = _get(d, "integrator", dict, "config")
        try:
            integ = IntegratorConfig(
                rtol=_get(i, "rtol", float, "config.integrator", 1e-6),
                atol=_get(i, "atol", float, "config.integrator", 1e-9),
                h_init=_get(i, "h_init", float, "config.integrator", 0.0),
                h_max=_get(i, "h_max", float, "config.integrator", float("inf")),
                max_steps=_get(i, "max_steps", int, "config.integrator", 10_000),
            )
        except ValueError as exc:
            raise ValueError(f"config.integrator: {exc}") from None
    holdout = None
    if d.get("holdout") is not None:
        holdout = _parse_dataset(_get(d, "holdout", dict, "config"), "config.holdout")
    cfg = ExperimentConfig(
        dataset=dataset,
        methods=[str(m) for m in methods],
        alphas=alphas,
        batch_size=_get(d, "batch_size", int, "config"),
        max_epochs=_get(d, "max_epochs", int, "config", 100),
        stop=stop,
        integrator=integ,
        repeat=_get(d, "repeat", int, "config", 30),
        seed=_get(d, "seed", int, "config", 0),
        seed_stride=_get(d, "seed_stride", int, "config", 1),
        shuffle_each_epoch=_get(d, "shuffle_each_epoch", bool, "config", True),
        init_scale=_get(d, "init_scale", float, "config", 0.01),
        holdout=holdout,
        holdout_size=_get(d, "holdout_size", int, "config", 0),
    )
    if cfg.repeat < 1:
        raise ValueError("config.repeat: must be at least 1")
    if cfg.repeat > 1 and cfg.seed_stride == 0:
        raise ValueError("config.seed_stride: must be nonzero when repeat > 1")
    if not cfg.alphas:
        raise ValueError("config.alphas: must be nonempty")
    for m in cfg.methods:
        if m not in ("sgd", "splitting", "kaczmarz"):
            raise ValueError(f"config.methods: unknown method {m!r}")
    return cfg


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for rec in trace.records:
            writer.writerow(
                [
                    trace.method,
                    repr(trace.alpha),
                    trace.batch_size,
                    trace.seed,
                    rec.epoch,
                    rec.iteration,
                    repr(rec.wall_seconds),
                    repr(rec.loss),
                    repr(rec.metric),
                    int(rec.diverged),
                ]
            )


def cmd_datagen(args) -> int:
    out = args.out
    if out is None:
        raise ValueError("datagen needs --out")
    spec = DatasetSpec(
        kind=args.kind,
        n=args.n,
        p=args.p,
        k=args.k,
        noise_sigma=args.noise_sigma,
        seed=args.seed if args.seed is not None else 0,
        separation=args.separation,
        image_side=args.image_side,
        rays=args.rays,
        images_path=args.images_path,
        labels_path=args.labels_path,
        class_filter=tuple(args.class_filter) if args.class_filter else None,
    )
    if spec.kind in ("random-lls", "tomo-like"):
        save_linear_system(make_problem(spec), out)
    else:
        manifest = {
            "kind": spec.kind,
            "n": spec.n,
            "p": spec.p,
            "k": spec.k,
            "separation": spec.separation,
            "seed": spec.seed,
            "images_path": spec.images_path,
            "labels_path": spec.labels_path,
            "class_filter": list(spec.class_filter) if spec.class_filter else None,
        }
        Path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_run(args) -> int:
    with open(args.config) as f:
        cfg = parse_experiment_config(json.load(f))
    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = Path(args.out or "runs")
    out_dir.mkdir(parents=True, exist_ok=True)

    pb = make_problem(cfg.dataset)
    holdout = None
    if cfg.holdout is not None:
        holdout = make_problem(cfg.holdout)
    elif cfg.holdout_size > 0:
        pb, holdout = split_holdout(pb, cfg.holdout_size, cfg.seed)

    jobs = []
    for method in cfg.methods:
        for alpha in cfg.alphas:
            for rep in range(cfg.repeat):
                init_seed = cfg.seed + rep * cfg.seed_stride
                run_cfg = RunConfig(
                    method=method,
                    alpha=alpha,
                    batch_size=cfg.batch_size,
                    seed=cfg.seed,
                    max_epochs=cfg.max_epochs,
                    stop=cfg.stop,
                    integrator=cfg.integrator,
                    shuffle_each_epoch=cfg.shuffle_each_epoch,
                    init_scale=cfg.init_scale,
                    init_seed=init_seed,
                )
                jobs.append(run_cfg)

    threads = max(1, args.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(lambda c: run(pb, holdout, c), jobs))
    else:
        traces = [run(pb, holdout, c) for c in jobs]

    summary_rows = []
    for trace in traces:
        name = f"trace_{trace.method}_a{trace.alpha:g}_s{trace.seed}.csv"
        write_trace_csv(trace, out_dir / name)
        last = trace.records[-1]
        summary_rows.append(
            [
                trace.method,
                repr(trace.alpha),
                trace.seed,
                int(trace.stopped),
                int(trace.diverged),
                last.epoch,
                last.iteration,
                repr(last.wall_seconds),
                repr(last.loss),
                repr(last.metric),
            ]
        )
    with open(out_dir / "summary.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(summary_rows)
    print(f"wrote {len(traces)} trace files and summary.csv to {out_dir}")
    return 0


def cmd_bounds(args) -> int:
    out_dir = Path(args.out or "bounds_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    x = bounds_mod.random_full_rank(args.n, seed)
    ops = bounds_mod.build_split(x, args.blocks)
    t_grid = np.linspace(0.0, args.t_max, args.points)
    rows = bounds_mod.error_sweep(ops, t_grid)
    base = out_dir / f"sweep_n{args.n}_k{args.blocks}"
    bounds_mod.write_sweep_csv(rows, base.with_suffix(".csv"))
    chart = render_line_chart(
        [
            Series("splitting error", rows[:, 0].tolist(), rows[:, 1].tolist()),
            Series("asymptotic limit", rows[:, 0].tolist(), rows[:, 2].tolist()),
        ],
        x_label="t",
        y_label="spectral-norm error",
        title=f"Splitting error, n={args.n}, blocks={args.blocks}",
    )
    base.with_suffix(".svg").write_text(chart)
    print(f"wrote {base.with_suffix('.csv')} and {base.with_suffix('.svg')}")
    return 0


def _read_traces(paths):
    groups = {}
    total = 0
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_HEADER:
                raise EmptyTrace(f"{path}: not a trace CSV (bad header)")
            for row in reader:
                total += 1
                key = (row["method"], float(row["alpha"]))
                groups.setdefault(key, {}).setdefault(row["seed"], []).append(row)
    if total == 0:
        raise EmptyTrace("no trace records in the given files")
    return groups


def cmd_plot(args) -> int:
    if args.out is None:
        raise ValueError("plot needs --out")
    groups = _read_traces(args.traces)
    series = []
    palette_idx = 0
    for (method, alpha), runs_by_seed in sorted(groups.items()):
        color = PALETTE[palette_idx % len(PALETTE)]
        palette_idx += 1
        first = True
        for seed in sorted(runs_by_seed):
            rows = [r for r in runs_by_seed[seed] if r["diverged"] == "0"]
            xs = [float(r[args.x_axis]) for r in rows]
            ys = [float(r[args.y]) for r in rows]
            label = f"{method} alpha={alpha:g}" if first else ""
            series.append(Series(label, xs, ys, color=color))
            first = False
    chart = render_line_chart(
        series,
        x_label=args.x_axis.replace("_", " "),
        y_label=args.y,
    )
    Path(args.out).write_text(chart)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitopt",
        description="Minibatch optimization by per-batch ODE flows: "
        "data generation, benchmark runs, error-limit sweeps, plots.",
    )
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument("--out", type=str, default=None, help="output file or directory")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for run grids")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="generate or describe a dataset")
    p.add_argument("--kind", required=True, choices=(
        "random-lls", "tomo-like", "idx-images", "gaussian-blobs"))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", type=int, default=50)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--image-side", type=int, default=10)
    p.add_argument("--rays", type=int, default=200)
    p.add_argument("--images-path", type=str, default=None)
    p.add_argument("--labels-path", type=str, default=None)
    p.add_argument("--class-filter", type=int, nargs="*", default=None)
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("run", help="execute a JSON-configured experiment grid")
    p.add_argument("--config", required=True, help="path to the JSON config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bounds", help="splitting-error sweep and limit")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--points", type=int, default=51)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("plot", help="render trace CSVs as an SVG chart")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    p.add_argument("--x-axis", choices=("iteration", "wall_seconds"), default="iteration")
    p.add_argument("--y", choices=("loss", "metric"), default="loss")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SplitOptError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
