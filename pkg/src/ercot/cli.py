"""Command-line interface: ``ercot generate|run|score|bench``."""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import kernels
from .baselines import run_kmeans_cot
from .bench import run_bench
from .data import TemporalDataset, read_dataset_csv, write_dataset_csv
from .engine import EngineConfig, RunResult, run
from .generators import DATASET_NAMES, GaussianClusterSpec, gen_moving_gaussians, make_dataset
from .results import rescore, run_stem, write_aggregates, write_partitions_csv, write_run_json

ALGORITHMS = ("ercot", "static", "penalty", "kmeanscot")


class UsageError(Exception):
    """A contract violation reported as a one-line message with a nonzero exit."""


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def read_key_values(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def load_dataset(spec: str, seed: int) -> TemporalDataset:
    if spec.lower() in DATASET_NAMES:
        return make_dataset(spec, seed)
    path = Path(spec)
    if path.is_file():
        return read_dataset_csv(path)
    raise UsageError(f"dataset {spec!r} is neither a known name ({', '.join(DATASET_NAMES)}) nor a CSV file")


def dataset_from_spec_file(path: str | Path, seed: int) -> TemporalDataset:
    """Moving-Gaussian dataset from a key=value file.

    Keys: ``means`` (``;``-separated vectors, components separated by ``,``),
    ``scale``, ``count``, ``horizon``, ``moving``, ``step`` and optional ``name``.
    """
    kv = read_key_values(path)
    try:
        means = [tuple(float(x) for x in m.split(",")) for m in kv["means"].split(";") if m.strip()]
        scale = float(kv.get("scale", 0.8))
        count = int(kv.get("count", 50))
        specs = [GaussianClusterSpec(m, scale, count) for m in means]
        step = [float(x) for x in kv["step"].split(",")]
        return gen_moving_gaussians(
            specs, int(kv.get("horizon", 10)), int(kv.get("moving", 0)), step, seed, kv.get("name", Path(path).stem)
        )
    except KeyError as exc:
        raise UsageError(f"{path}: missing key {exc.args[0]}") from None


# --- generate ----------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    if args.spec:
        data = dataset_from_spec_file(args.spec, args.seed)
    elif args.name:
        if args.name.lower() not in DATASET_NAMES:
            raise UsageError(f"unknown dataset {args.name!r}; choose from {', '.join(DATASET_NAMES)}")
        data = make_dataset(args.name, args.seed)
    else:
        raise UsageError("give a dataset name or --spec FILE")
    write_dataset_csv(data, args.out if args.out else sys.stdout)
    return 0


# --- run ---------------------------------------------------------------------


def engine_config(args: argparse.Namespace, seed: int) -> EngineConfig:
    return EngineConfig(
        pop=args.pop,
        c_max=args.cmax,
        budget=args.budget,
        reinit_p=args.reinit_p,
        cx_rate=args.cx_rate,
        mut_rate=args.mut_rate,
        mut_eta=args.mut_eta,
        seed=seed,
        cv_folds=args.cv_folds,
    )


def run_one(algorithm: str, data: TemporalDataset, cfg: EngineConfig, k: int, alpha: float) -> RunResult:
    if algorithm == "kmeanscot":
        return run_kmeans_cot(data, k, alpha, cfg)
    return run(data, cfg, algorithm)


def _run_job(job: tuple) -> RunResult:
    return run_one(*job)


def run_config(args: argparse.Namespace) -> dict:
    """Settings recorded in every run file (no output paths, so reruns elsewhere compare equal)."""
    cfg = asdict(engine_config(args, args.seed))
    del cfg["seed"]
    out = {"dataset": args.dataset, "data_seed": args.data_seed, "algorithm": args.algorithm, **cfg}
    if args.algorithm == "kmeanscot":
        out.update(k=args.k, alpha=args.alpha)
    return out


def cmd_run(args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    data = load_dataset(args.dataset, args.data_seed)
    jobs = [(args.algorithm, data, engine_config(args, args.seed + i), args.k, args.alpha) for i in range(args.runs)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = run_config(args)
    for i, res in enumerate(results):
        write_run_json(res, config, out / f"{run_stem(i)}.json")
        write_partitions_csv(res.partitions, res.times, out / f"{run_stem(i)}_partitions.csv")
    write_aggregates(results, out)

    scored = [r.scores for r in results if r.scores is not None]
    if scored:
        mri = sum(s.mRI for s in scored) / len(scored)
        mnmi = sum(s.mNMI for s in scored) / len(scored)
        print(f"{args.algorithm} on {data.name}: {len(results)} run(s), mRI {mri:.4f}, mNMI {mnmi:.4f} -> {out}")
    else:
        print(f"{args.algorithm} on {data.name}: {len(results)} run(s), unlabeled data, not scored -> {out}")
    return 0


# --- score -------------------------------------------------------------------


def cmd_score(args: argparse.Namespace) -> int:
    data = load_dataset(args.dataset, args.data_seed)
    if not all(s.has_labels for s in data):
        raise UsageError(f"dataset {data.name!r} has no ground-truth labels to score against")
    scores = rescore(args.partitions, data)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("t", "RI", "NMI"))
    for t, r, m in scores.per_time:
        w.writerow((t, repr(r), repr(m)))
    w.writerow(("mean", repr(scores.mRI), repr(scores.mNMI)))
    return 0


# --- bench -------------------------------------------------------------------


def cmd_bench(args: argparse.Namespace) -> int:
    backend = None if args.backend == "auto" else args.backend
    if backend == "cython" and not kernels.compiled_available():
        raise UsageError("compiled kernels are not built; use --backend python")
    cfg = EngineConfig(pop=args.pop, c_max=args.cmax, budget=max(args.budgets), seed=args.seed, cv_folds=args.cv_folds)
    for b in args.budgets:
        if b < 2 * args.pop:
            raise UsageError(f"budget {b} is below 2 * population ({2 * args.pop})")
    rows = run_bench(args.sizes, args.budgets, cfg, args.repeats, backend)
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("size", "budget", "backend", "seconds", "repeats"))
        for r in rows:
            w.writerow((r.size, r.budget, r.backend, repr(r.seconds), r.repeats))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


# --- parser ------------------------------------------------------------------


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    d = EngineConfig()
    p.add_argument("--pop", type=int, default=d.pop, help="population size")
    p.add_argument("--cmax", type=int, default=d.c_max, help="maximum number of clusters")
    p.add_argument("--cv-folds", type=int, default=d.cv_folds, help="cap on cross-validation folds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ercot", description="Evolutionary robust clustering over time.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a benchmark dataset as CSV")
    g.add_argument("name", nargs="?", help=f"one of {', '.join(DATASET_NAMES)}")
    g.add_argument("--spec", help="key=value moving-Gaussian description instead of a name")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="cluster a dataset over time, possibly many runs")
    r.add_argument("--config", help="key=value file; explicit flags take precedence")
    r.add_argument("--dataset", default="syn1", help="benchmark name or dataset CSV")
    r.add_argument("--data-seed", type=int, default=0, help="seed for generated benchmarks")
    r.add_argument("--algorithm", choices=ALGORITHMS, default="ercot")
    r.add_argument("--seed", type=int, default=0, help="seed of run 0; run i uses seed + i")
    r.add_argument("--runs", type=int, default=1)
    _add_engine_flags(r)
    d = EngineConfig()
    r.add_argument("--budget", type=int, default=d.budget, help="fitness evaluations per time step")
    r.add_argument("--reinit-p", type=float, default=d.reinit_p, help="inherited fraction of the population")
    r.add_argument("--cx-rate", type=float, default=d.cx_rate)
    r.add_argument("--mut-rate", type=float, default=d.mut_rate)
    r.add_argument("--mut-eta", type=float, default=d.mut_eta)
    r.add_argument("--k", type=int, default=4, help="number of clusters (kmeanscot)")
    r.add_argument("--alpha", type=float, default=0.5, help="smoothness weight (kmeanscot)")
    r.add_argument("--jobs", type=int, default=1, help="runs executed in parallel")
    r.add_argument("--out", default="results", help="output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("score", help="RI/NMI of a partitions CSV against dataset labels")
    s.add_argument("partitions")
    s.add_argument("--dataset", required=True)
    s.add_argument("--data-seed", type=int, default=0)
    s.set_defaults(func=cmd_score)

    b = sub.add_parser("bench", help="time one ERCOT step across sample counts and budgets")
    b.add_argument("--sizes", type=_int_list, default=[500, 1000, 2000, 4000])
    b.add_argument("--budgets", type=_int_list, default=[1000])
    b.add_argument("--repeats", type=int, default=5, help="timings per cell; the median is reported")
    b.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")
    b.add_argument("--seed", type=int, default=0)
    _add_engine_flags(b)
    b.add_argument("--out", help="output CSV (default: stdout)")
    b.set_defaults(func=cmd_bench)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str], args: argparse.Namespace) -> argparse.Namespace:
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in read_key_values(args.config).items():
        action = actions.get(key)
        if action is None or key in ("config", "help", "func"):
            raise UsageError(f"{args.config}: unknown setting {key!r}")
        try:
            value = action.type(raw) if action.type else raw
        except (TypeError, ValueError):
            raise UsageError(f"{args.config}: bad value for {key}: {raw!r}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{args.config}: {key} must be one of {', '.join(map(str, action.choices))}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args = _apply_config_file(parser, argv, args)
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        print(f"ercot {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
