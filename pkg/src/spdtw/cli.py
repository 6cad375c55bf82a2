"""Command-line entry point ``spdtw``.

Exit codes: 0 success, 1 usage error, 2 data or parameter error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import elastic_dense as ed
from . import elastic_sparse as es
from .errors import OverThresholdError, SpdtwError
from .evaluation import KINDS, MeasureSpec, evaluate, grid_search_loo, speedup
from .evaluation.selection import C_GRID, default_grid
from .path_sparsifier import (
    accumulate_paths,
    learn_path_matrix,
    normalize_grid,
    read_spm,
    sparsify,
    write_spm,
)
from .series import is_znormalized, load_ucr, resolve_dataset, znormalize_dataset

REPORT_HEADER = ["dataset", "measure", "classifier", "error_rate", "visited_total", "speedup_pct", "params"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, dataset=True):
    if dataset:
        p.add_argument("dataset", nargs="?", help="dataset name under $ELASTIC_SPARSE_DATA")
        p.add_argument("--train", type=Path, help="UCR-format training file")
        p.add_argument("--test", type=Path, help="UCR-format test file")
        p.add_argument("--znorm", choices=("check", "apply", "off"), default="check")
    p.add_argument("--cost", choices=("sq", "abs"), default="sq")
    p.add_argument("--theta", default=None, help="count threshold, or 'auto' for learn")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--band-pct", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--spm", type=Path, default=None, help="path matrix file")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spdtw", description="Sparse-path DTW and elastic kernel experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("learn", help="learn a sparse path matrix from a training set")
    _common(p)

    p = sub.add_parser("eval", help="classify a test set and write a report row")
    _common(p)
    p.add_argument("measure_pos", nargs="?", metavar="measure")
    p.add_argument("classifier_pos", nargs="?", metavar="classifier")
    p.add_argument("--measure", choices=KINDS)
    p.add_argument("--classifier", choices=("1nn", "svm"))

    p = sub.add_parser("bench-cells", help="visited grid cells per comparison")
    _common(p)
    p.add_argument("--measure", choices=KINDS, action="append")

    p = sub.add_parser("heatmap", help="write an occupancy grid or path matrix as PGM and CSV")
    _common(p)
    p.add_argument("--mode", choices=("counts", "normalized", "thresholded"), default="counts")

    p = sub.add_parser("grid-curve", help="leave-one-out error along one parameter")
    _common(p)
    p.add_argument("--measure", choices=KINDS, default="sp_dtw")
    p.add_argument("--param", default="theta")
    p.add_argument("--range", dest="values", default=None, help="'lo:hi' (inclusive) or comma list")
    return parser


def _load(args, need_test=False):
    if args.train is not None:
        train = load_ucr(args.train)
        test = load_ucr(args.test) if args.test is not None else None
    elif args.dataset:
        tr, te = resolve_dataset(args.dataset)
        train = load_ucr(tr, name=args.dataset)
        test = load_ucr(te, name=args.dataset) if te.is_file() else None
    else:
        raise _Usage("give a dataset name or --train")
    if need_test and test is None:
        raise _Usage("a test set is required (--test or dataset name)")
    if args.znorm == "apply":
        train = znormalize_dataset(train)
        test = znormalize_dataset(test) if test is not None else None
    elif args.znorm == "check":
        for ds in (train, test):
            if ds is not None and not all(is_znormalized(ts) for ts in ds):
                print(f"warning: {ds.name or 'input'} is not z-normalized", file=sys.stderr)
    return train, test


class _Usage(Exception):
    pass


def _theta(args, default=0):
    if args.theta is None:
        return default
    if args.theta == "auto":
        return "auto"
    try:
        return int(args.theta)
    except ValueError:
        raise _Usage(f"--theta must be an integer or 'auto', got {args.theta!r}") from None


def _spec(args, kind: str, train) -> tuple:
    """Measure spec plus the tuning grid implied by the flags left unset."""
    grid = default_grid(kind, train)
    kw = {"cost": args.cost}
    if args.spm is not None:
        kw["spm"] = read_spm(args.spm)
        grid.pop("theta", None)
        grid.pop("gamma", None)
    theta = _theta(args, None)
    for name, value in (("theta", None if theta == "auto" else theta), ("gamma", args.gamma),
                        ("nu", args.nu), ("band_pct", args.band_pct)):
        if value is not None:
            kw[name] = value
            grid.pop(name, None)
    if kind in ("krdtw", "krdtw_sc", "sp_krdtw"):
        grid["c"] = [args.c] if args.c is not None else list(C_GRID)
    # placeholders so the template validates; the grid overrides them
    for name, values in grid.items():
        if name != "c":
            kw.setdefault(name, values[0])
    return MeasureSpec(kind, **kw), grid


def _out_path(args, default_name: str) -> Path:
    if args.out is None:
        return Path(default_name)
    if args.out.is_dir():
        return args.out / default_name
    return args.out


def cmd_learn(args) -> int:
    train, _ = _load(args)
    theta = _theta(args)
    gamma = 0.0 if args.gamma is None else args.gamma
    counts = accumulate_paths(train, args.cost)
    if theta == "auto":
        grid = default_grid("sp_dtw", train)
        if args.gamma is not None:
            grid["gamma"] = [gamma]
        sel = grid_search_loo(train, MeasureSpec("sp_dtw", cost=args.cost, theta=0, gamma=0.0), grid)
        theta, gamma = sel.params["theta"], sel.params["gamma"]
    m = sparsify(counts, normalize_grid(counts), theta, gamma, source=train.name)
    path = _out_path(args, f"{train.name or 'train'}.spm")
    write_spm(m, path)
    print(f"{path}: {len(m)} cells, theta={theta}, gamma={gamma}, speed-up {speedup(len(m), m.T):.1f}%")
    return EXIT_OK


def _write_report(rows, out):
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        w.writerows(rows)
        return
    new = not out.exists() or out.stat().st_size == 0
    with open(out, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(REPORT_HEADER)
        w.writerows(rows)


def cmd_eval(args) -> int:
    pos = [v for v in (args.dataset, args.measure_pos, args.classifier_pos) if v is not None]
    if args.train is not None:
        args.dataset = None
    elif pos:
        args.dataset = pos.pop(0)
    kind = args.measure or (pos.pop(0) if pos else None)
    classifier = args.classifier or (pos.pop(0) if pos else "1nn")
    if pos:
        raise _Usage(f"unexpected arguments: {' '.join(pos)}")
    if kind not in KINDS:
        raise _Usage(f"measure must be one of {', '.join(KINDS)}, got {kind!r}")
    if classifier not in ("1nn", "svm"):
        raise _Usage(f"classifier must be 1nn or svm, got {classifier!r}")
    train, test = _load(args, need_test=True)
    spec, grid = _spec(args, kind, train)
    if classifier == "1nn":
        grid.pop("c", None)
    report = evaluate(train, test, spec, classifier, grid=grid, seed=args.seed)
    _write_report([report.csv_row()], args.out)
    return EXIT_OK


def _one_pair_visited(spec: MeasureSpec, train) -> int:
    x, y = train.X[0], train.X[min(1, train.n - 1)]
    kind = spec.kind
    if kind in ("ed", "minkowski", "corr", "daco"):
        return train.length
    if kind == "dtw":
        return ed.dtw(x, y, spec.cost).visited
    if kind == "dtw_sc":
        return ed.dtw_sc(x, y, spec.cost, spec.band_pct).visited
    if kind == "krdtw":
        return ed.krdtw(x, y, spec.nu).visited
    if kind == "krdtw_sc":
        return ed.krdtw_sc(x, y, spec.nu, spec.band_pct).visited
    if kind == "sp_dtw":
        return es.sp_dtw(x, y, spec.spm, spec.cost).visited
    return es.sp_krdtw(x, y, spec.spm, spec.nu).visited


def cmd_bench_cells(args) -> int:
    train, _ = _load(args)
    kinds = args.measure or ["dtw", "dtw_sc", "sp_dtw"]
    T = train.length
    rows = []
    spm = read_spm(args.spm) if args.spm is not None else None
    for kind in kinds:
        kw = dict(cost=args.cost, nu=args.nu or 1.0, band_pct=10 if args.band_pct is None else args.band_pct)
        if kind in ("sp_dtw", "sp_krdtw"):
            kw["spm"] = spm if spm is not None else learn_path_matrix(
                train, _theta(args), args.gamma or 0.0, args.cost
            )
        spec = MeasureSpec(kind, k=1, **kw)
        visited = _one_pair_visited(spec, train)
        rows.append([train.name, kind, visited, f"{speedup(visited, T):.1f}"])
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["dataset", "measure", "visited", "speedup_pct"])
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def write_pgm(values: np.ndarray, path) -> None:
    """Plain-text graymap with intensity ``round(255 * v / max)``."""
    v = np.asarray(values, dtype=np.float64)
    vmax = v.max()
    img = np.zeros(v.shape, dtype=np.int64) if vmax <= 0 else np.rint(255.0 * v / vmax).astype(np.int64)
    with open(path, "w") as fh:
        fh.write(f"P2\n{v.shape[1]} {v.shape[0]}\n255\n")
        for row in img:
            fh.write(" ".join(map(str, row)) + "\n")


def heatmap_values(args) -> tuple:
    """Grid to render and a base name for the output files."""
    if args.spm is not None:
        m = read_spm(args.spm)
        return m.to_dense(), args.spm.stem
    train, _ = _load(args)
    counts = accumulate_paths(train, args.cost)
    if args.mode == "counts":
        return counts.astype(np.float64), f"{train.name}_counts"
    p = normalize_grid(counts)
    if args.mode == "normalized":
        return p, f"{train.name}_normalized"
    return np.where(counts > _theta(args), p, 0.0), f"{train.name}_theta{_theta(args)}"


def cmd_heatmap(args) -> int:
    values, base = heatmap_values(args)
    pgm = _out_path(args, f"{base}.pgm")
    write_pgm(values, pgm)
    np.savetxt(pgm.with_suffix(".csv"), values, delimiter=",", fmt="%.17g")
    print(pgm)
    return EXIT_OK


def _parse_values(text: str, param: str) -> list:
    cast = int if param in ("theta", "band_pct", "k") else float
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [cast(v) for v in text.split(",") if v.strip()]


def cmd_gridcurve(args) -> int:
    train, _ = _load(args)
    param = args.param.replace("-", "_")
    spec, grid = _spec(args, args.measure, train)
    grid.pop("c", None)
    values = _parse_values(args.values, param) if args.values else grid.get(param)
    if values is None:
        raise _Usage(f"{args.measure} has no parameter {param!r}; give --range")
    # other parameters stay at the template values
    sel = grid_search_loo(train, spec, {param: values})
    rows = [[pt[param], f"{err:.6f}", int(pt == sel.params)] for pt, err in sel.curve]
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([param, "loo_error", "is_min"])
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


COMMANDS = {
    "learn": cmd_learn,
    "eval": cmd_eval,
    "bench-cells": cmd_bench_cells,
    "heatmap": cmd_heatmap,
    "grid-curve": cmd_gridcurve,
}


def main(argv=None) -> int:
    """Run the command line and return its exit status."""
    try:
        return _main(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def _main(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None:
        import numba

        if args.workers < 1:
            parser.error("--workers must be positive")
        numba.set_num_threads(min(args.workers, numba.config.NUMBA_NUM_THREADS))
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        parser.error(str(exc))
    except OverThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SpdtwError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # anything else means a broken internal assumption
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
