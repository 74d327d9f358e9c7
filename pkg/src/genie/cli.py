"""Command-line front end.

Subcommands
-----------
cluster     cluster one dataset, optionally cut and score it
benchmark   median FM-index over permuted copies for a grid of settings
callcount   count dissimilarity calls on synthetic Gaussian blobs
fetch       download benchmark files into the data directory
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path


from . import __version__
from .errors import ConfigurationError, GenieError
from .evaluation import fm_index, gaussian_blobs, median_fm_protocol, summary_stats
from .io import (BENCHMARKS, DEFAULT_BASE_URL, data_dir, fetch, load_benchmark,
                 load_labels, load_points, load_strings, write_labels)
from .linkage import ALGORITHMS, AlgorithmConfig, cut, hclust
from .metrics import METRICS, STRING, CallCounter, DatasetView, MetricSpace
from .mst import build_mst, default_threads

CSV_HEADER = ("dataset", "algorithm", "threshold", "metric", "k",
              "median_fm", "calls")
RUNS_HEADER = ("dataset", "algorithm", "threshold", "metric", "k",
               "run", "seed", "fm", "calls")
DEFAULT_THRESHOLDS = (0.2, 0.3, 0.4, 0.5, 0.6)


def _csv_list(kind):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        return [kind(t) for t in items]
    return parse


def _threshold(text):
    g = float(text)
    if not 0 < g <= 1:
        raise argparse.ArgumentTypeError(f"threshold must be in (0, 1], got {text}")
    return g


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_common(p):
    p.add_argument("--metric", choices=sorted(METRICS), default=None,
                   help="dissimilarity (default: euclidean, or the dataset's own)")
    p.add_argument("--backend", choices=("prim", "vptree"), default="prim",
                   help="MST builder (default: prim)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: $GENIE_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genie", description="Genie hierarchical clustering.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster one dataset")
    p.add_argument("--input", required=True,
                   help="points (or strings for hamming/levenshtein), may be gzipped")
    p.add_argument("--labels", help="reference labels; with --k prints the FM-index")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="genie")
    p.add_argument("--g", type=_threshold, default=0.3, help="Gini threshold")
    p.add_argument("--k", type=_positive_int, help="cut into k clusters")
    p.add_argument("--out", help="write the merge history here ('-' for stdout)")
    p.add_argument("--labels-out", help="write the cut labels here")
    p.add_argument("--csv", help="append a result row to this CSV file")
    _add_common(p)

    p = sub.add_parser("benchmark", help="median FM-index over a grid")
    p.add_argument("--datasets", type=_csv_list(str), default=["iris"],
                   help="comma-separated benchmark names (empty for none)")
    p.add_argument("--algorithm", type=_csv_list(str),
                   default=list(ALGORITHMS), help="comma-separated algorithms")
    p.add_argument("--g", type=_csv_list(_threshold),
                   default=list(DEFAULT_THRESHOLDS),
                   help="comma-separated Gini thresholds for genie")
    p.add_argument("--runs", type=_positive_int, default=10)
    p.add_argument("--data-dir", help="benchmark directory (default: $GENIE_DATA_DIR)")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.add_argument("--runs-csv", help="also write one row per run here")
    p.add_argument("--summary", action="store_true",
                   help="print min/quartiles/max/mean/sd per algorithm to stderr")
    _add_common(p)

    p = sub.add_parser("callcount", help="dissimilarity calls on Gaussian blobs")
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--clusters", type=_positive_int, default=10)
    _add_common(p)

    p = sub.add_parser("fetch", help="download benchmark data")
    p.add_argument("names", nargs="*", help="datasets (default: all known)")
    p.add_argument("--base-url", default=DEFAULT_BASE_URL)
    p.add_argument("--data-dir")
    p.add_argument("--overwrite", action="store_true")
    return parser


def _threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def _fmt(x) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------


def cmd_cluster(args) -> int:
    metric = args.metric or "euclidean"
    if METRICS[metric].kinds == (STRING,):
        view = load_strings(args.input)
    else:
        view = load_points(args.input)
    config = AlgorithmConfig(args.algorithm, args.g, args.backend,
                             _threads(args), args.seed)
    space = MetricSpace(view, metric, CallCounter())
    t0 = time.perf_counter()
    history = hclust(space, config)
    seconds = time.perf_counter() - t0

    if args.out:
        if args.out == "-":
            sys.stdout.write(history.to_text())
        else:
            history.write(args.out)

    fm = None
    if args.k is not None:
        if args.k > view.n:
            raise ConfigurationError(f"k={args.k} exceeds n={view.n}")
        labels = cut(history, args.k)
        if args.labels_out:
            write_labels(labels, args.labels_out)
        if args.labels:
            reference = load_labels(args.labels)
            if len(reference) != view.n:
                raise GenieError(f"{len(reference)} labels for {view.n} objects")
            fm = fm_index(reference, labels)
            print(f"fm={_fmt(fm)}")
    print(f"n={view.n} calls={space.calls} backend={_backend_label(config)} "
          f"seconds={seconds:.3f}")

    if args.csv:
        path = Path(args.csv)
        fresh = not path.exists() or path.stat().st_size == 0
        with open(path, "a", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if fresh:
                w.writerow(CSV_HEADER)
            w.writerow([Path(args.input).name, config.algorithm,
                        _threshold_cell(config), metric,
                        "" if args.k is None else args.k,
                        "" if fm is None else _fmt(fm), space.calls])
    return 0


def _backend_label(config) -> str:
    return config.backend if config.algorithm in ("genie", "single") else "matrix"


def _threshold_cell(config) -> str:
    return _fmt(config.g) if config.algorithm == "genie" else ""


def _grid(algorithms, thresholds):
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {alg!r}")
        if alg == "genie":
            for g in thresholds:
                yield alg, g
        else:
            yield alg, 1.0


def cmd_benchmark(args) -> int:
    threads = _threads(args)
    grid = list(_grid(args.algorithm, args.g))
    out = _open_out(args.csv)
    runs_out = _open_out(args.runs_csv) if args.runs_csv else None
    collected = {}
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        rw = None
        if runs_out is not None:
            rw = csv.writer(runs_out, lineterminator="\n")
            rw.writerow(RUNS_HEADER)
        for name in args.datasets:
            try:
                case = load_benchmark(name, args.data_dir)
            except FileNotFoundError as exc:
                print(f"warning: {exc}", file=sys.stderr)
                info = BENCHMARKS.get(name)
                metric = args.metric or (info.metric if info else "euclidean")
                for alg, g in grid:
                    cfg = AlgorithmConfig(alg, g)
                    w.writerow([name, alg, _threshold_cell(cfg), metric, "",
                                "SKIPPED", ""])
                continue
            metric = args.metric or case.metric
            for alg, g in grid:
                cfg = AlgorithmConfig(alg, g, args.backend, threads, args.seed)
                res = median_fm_protocol(case.data, metric, cfg, case.reference,
                                         case.k, runs=args.runs, seed=args.seed)
                w.writerow([name, alg, _threshold_cell(cfg), metric, case.k,
                            _fmt(res.median_fm), res.median_calls])
                out.flush()
                collected.setdefault(cfg.label, []).append(res.median_fm)
                if rw is not None:
                    for r, (s, fm, c) in enumerate(zip(res.seeds, res.scores,
                                                       res.calls)):
                        rw.writerow([name, alg, _threshold_cell(cfg), metric,
                                     case.k, r, s, _fmt(fm), c])
    finally:
        if out is not sys.stdout:
            out.close()
        if runs_out is not None and runs_out is not sys.stdout:
            runs_out.close()

    if args.summary:
        keys = ("min", "q1", "median", "q3", "max", "mean", "sd")
        print("algorithm," + ",".join(keys), file=sys.stderr)
        for label, values in collected.items():
            st = summary_stats(values)
            print(label + "," + ",".join(f"{st[k]:.4f}" for k in keys),
                  file=sys.stderr)
    return 0


def cmd_callcount(args) -> int:
    metric = args.metric or "euclidean"
    X, _ = gaussian_blobs(args.n, args.d, args.clusters, args.sigma, args.seed)
    space = MetricSpace(DatasetView.from_array(X), metric, CallCounter())
    t0 = time.perf_counter()
    build_mst(space, args.backend, threads=_threads(args), seed=args.seed)
    seconds = time.perf_counter() - t0
    total = (args.n * args.n - args.n) // 2
    pct = 100.0 * space.calls / total if total else 100.0
    print(f"n={args.n} d={args.d} sigma={args.sigma:g} backend={args.backend} "
          f"calls={space.calls} ratio={pct:.1f}% seconds={seconds:.3f}")
    return 0


def cmd_fetch(args) -> int:
    names = args.names or sorted(n for n in BENCHMARKS if n not in ("iris", "iris5"))
    directory = Path(args.data_dir) if args.data_dir else data_dir()
    status = fetch(names, directory, args.base_url, args.overwrite)
    failed = 0
    for name, err in status.items():
        if err is None:
            print(f"{name}: ok")
        else:
            failed += 1
            print(f"{name}: failed ({err})", file=sys.stderr)
    print(f"{len(status) - failed}/{len(status)} datasets in {directory}")
    return 1 if failed else 0


COMMANDS = {
    "cluster": cmd_cluster,
    "benchmark": cmd_benchmark,
    "callcount": cmd_callcount,
    "fetch": cmd_fetch,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        parser.print_usage(sys.stderr)
        print(f"genie: error: {exc}", file=sys.stderr)
        return 2
    except (GenieError, OSError, ValueError) as exc:
        print(f"genie: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
