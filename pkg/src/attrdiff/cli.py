"""Command-line interface.

Exit codes: 0 on success, 2 for validation problems (bad flags, malformed
input files, impossible requests), 1 for I/O and runtime failures. The
default seed is 0 and can be overridden globally with the
``ATTRDIFF_SEED`` environment variable or per-command with ``--seed``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .adif import load_labels, load_matrix, save_matrix
from .baselines import fid_greedy_select, kcenter_select, lof_select
from .diff import (
    DimensionDiff,
    compare,
    endpoint_direction,
    histogram,
    select_endpoint,
    select_window,
)
from .errors import AttrDiffError, ValidationError
from .evaluate import (
    DEFAULT_METHODS,
    SynthConfig,
    run_benchmark,
)
from .matrix import AttributeMatrix, LabelVector, pooled_stats
from .pca import DEFAULT_THRESHOLD, fit_pca, save_pca, transform
from .report import (
    write_benchmark,
    write_diff_report,
    write_histogram,
    write_selection,
)

__all__ = ["main"]


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ATTRDIFF_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(
            f"ATTRDIFF_SEED must be an integer, got {env!r}"
        ) from None


def _load_pair(args: argparse.Namespace) -> tuple[AttributeMatrix, AttributeMatrix]:
    return (
        load_matrix(args.real, args.format),
        load_matrix(args.dev, args.format),
    )


def _print_written(paths: Sequence[Path]) -> None:
    for path in paths:
        print(f"wrote {path}")


def _add_pair_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("real", help="reference dataset (.adif or .csv)")
    parser.add_argument("dev", help="dataset under inspection (.adif or .csv)")
    parser.add_argument(
        "--format",
        choices=("auto", "adif", "csv"),
        default="auto",
        help="input format for both matrices (default: by file suffix)",
    )


def _cmd_diff(args: argparse.Namespace) -> int:
    real, dev = _load_pair(args)
    seed = _resolve_seed(args.seed)
    report = compare(
        real,
        dev,
        normalize=not args.no_normalize,
        order=args.order,
        k=args.k,
        bins=args.bins,
        select_k=args.select_k,
        select_source=args.select_source,
        pca_threshold=args.pca,
        seed=seed,
        threads=args.threads,
    )
    written = write_diff_report(report, args.out, args.real, args.dev)
    for rank, d in enumerate(report.ranked[: report.k]):
        print(
            f"rank {rank}: dim {d.dim} score={d.score:.6g} "
            f"raw={d.raw_distance:.6g} sigma={d.sigma:.6g}"
        )
    _print_written(written)
    return 0


def _cmd_select(args: argparse.Namespace) -> int:
    real, dev = _load_pair(args)
    seed = _resolve_seed(args.seed)
    source = real if args.source == "real" else dev
    if args.window is not None:
        sel = select_window(
            source,
            args.dim,
            center=args.window[0],
            half_width=args.window[1],
            k=args.k,
            seed=seed,
            source=args.source,
        )
    else:
        direction = args.endpoint
        if direction == "auto":
            stats = pooled_stats(real, dev)
            probe = DimensionDiff(
                dim=args.dim,
                raw_distance=0.0,
                normalized_distance=0.0,
                score=0.0,
                sigma=float(stats.pooled_std[args.dim]),
                mean_real=float(stats.mean_x[args.dim]),
                mean_dev=float(stats.mean_y[args.dim]),
            )
            direction = endpoint_direction(probe)
        sel = select_endpoint(source, args.dim, direction, args.k, args.source)
    written = write_selection(sel, args.out, seed=seed)
    flag = " (short)" if sel.short_count else ""
    print(
        f"selected {sel.indices.size}/{sel.requested} from {sel.source} "
        f"dim {sel.dim} mode={sel.mode}{flag}"
    )
    _print_written(written)
    return 0


def _cmd_hist(args: argparse.Namespace) -> int:
    real, dev = _load_pair(args)
    hist = histogram(real, dev, args.dim, args.bins)
    written = write_histogram(hist, args.out, seed=_resolve_seed(args.seed))
    _print_written(written)
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    real, dev = _load_pair(args)
    seed = _resolve_seed(args.seed)
    if args.sample is not None:
        if args.sample < 1:
            raise ValidationError(f"--sample must be >= 1, got {args.sample}")
        rng = np.random.default_rng((seed, 0xBA5E))
        keep_real = np.sort(
            rng.choice(
                real.n_samples, min(args.sample, real.n_samples), replace=False
            )
        )
        keep_dev = np.sort(
            rng.choice(dev.n_samples, min(args.sample, dev.n_samples), replace=False)
        )
        real = real.take_rows(keep_real)
        dev = dev.take_rows(keep_dev)
    if args.method == "lof":
        sel = lof_select(real, dev, args.k, k_neighbors=args.lof_k)
    elif args.method == "kcenter":
        sel = kcenter_select(real, dev, args.k)
    else:
        sel = fid_greedy_select(real, dev, args.k)
    written = write_selection(sel, args.out, seed=seed)
    print(f"selected {sel.indices.size} samples via {sel.mode}")
    _print_written(written)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    methods = tuple(m for m in args.methods.split(",") if m)
    kwargs = dict(
        trials=args.trials,
        base_seed=seed,
        n_select=args.n_select,
        n_per_dataset=args.n_per_dataset,
        lof_neighbors=args.lof_k,
    )
    if args.synthetic:
        config = SynthConfig(
            d=args.d,
            n=args.n,
            planted_dims=tuple(args.planted),
            delta=args.delta,
            scale_law=args.scale_law,
            scale_min=args.scale_min,
            scale_max=args.scale_max,
            rotate_dims=args.rotate,
            seed=seed,
        )
        result = run_benchmark(methods, config=config, **kwargs)
    else:
        pool = load_matrix(args.matrix, args.format)
        raw, ids = load_labels(args.labels)
        if ids is not None:
            if pool.sample_ids is None:
                raise ValidationError(
                    "label file has ids but the matrix has none"
                )
            by_id = dict(zip(ids, raw))
            missing = [s for s in pool.sample_ids if s not in by_id]
            if missing:
                raise ValidationError(
                    f"labels missing for {len(missing)} matrix rows "
                    f"(first: {missing[0]!r})"
                )
            raw = np.array([by_id[s] for s in pool.sample_ids])
        elif raw.size != pool.n_samples:
            raise ValidationError(
                f"{raw.size} labels for {pool.n_samples} matrix rows"
            )
        labels = LabelVector(raw, Path(args.labels).stem)
        result = run_benchmark(methods, pool=pool, labels=labels, **kwargs)
    written = write_benchmark(result, args.out)
    means = result.mean_scores()
    for name in result.methods:
        mean = means[name]
        shown = f"{mean:.4f}" if np.isfinite(mean) else "n/a"
        print(f"{name}: {shown}")
    if result.skipped:
        print(f"skipped {len(result.skipped)} cells (insufficient labels)")
    _print_written(written)
    return 0


def _cmd_pca(args: argparse.Namespace) -> int:
    real, dev = _load_pair(args)
    model = fit_pca(real, dev, args.threshold)
    save_pca(model, args.model)
    print(
        f"kept {model.n_components}/{model.n_input_dims} components "
        f"(cumulative ratio {model.explained_ratios.sum():.6f})"
    )
    print(f"wrote {args.model}")
    if args.transformed_out:
        out = Path(args.transformed_out)
        out.mkdir(parents=True, exist_ok=True)
        for name, m in (("real", real), ("dev", dev)):
            path = out / f"{name}_pca.adif"
            save_matrix(transform(model, m), path)
            print(f"wrote {path}")
    return 0


def _cmd_convert(args: argparse.Namespace) -> int:
    matrix = load_matrix(args.input, args.in_format)
    save_matrix(matrix, args.output, args.out_format, args.precision)
    print(f"wrote {args.output} ({matrix.n_samples}x{matrix.n_dims})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrdiff",
        description="Find and report attribute dimensions whose "
        "distributions differ between two embedding datasets.",
    )
    parser.add_argument(
        "--version", action="version", version=f"attrdiff {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", help="rank dimensions and write a full report")
    _add_pair_arguments(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=int, default=3, help="detailed dimensions (default 3)")
    p.add_argument("--bins", type=int, default=60, help="histogram bins (default 60)")
    p.add_argument(
        "--order", type=float, default=2, help="Wasserstein order (default 2)"
    )
    p.add_argument(
        "--select-k", type=int, default=10,
        help="exemplars per detailed dimension (default 10)",
    )
    p.add_argument(
        "--select-source", choices=("real", "dev"), default="real",
        help="dataset exemplars are drawn from (default real)",
    )
    p.add_argument(
        "--no-normalize", action="store_true",
        help="rank by raw instead of scale-normalized distance",
    )
    p.add_argument(
        "--pca", type=float, nargs="?", const=DEFAULT_THRESHOLD, default=None,
        metavar="THRESHOLD",
        help="diff in a pooled PCA basis (optional explained-variance "
        f"threshold, default {DEFAULT_THRESHOLD})",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--threads", type=int, default=1,
        help="worker threads for the distance sweep (never changes results)",
    )
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("select", help="pick exemplar samples in one dimension")
    _add_pair_arguments(p)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--endpoint", choices=("auto", "min", "max"), default="auto",
        help="take the k most extreme values (default: end nearer the "
        "real-dataset mean)",
    )
    group.add_argument(
        "--window", type=float, nargs=2, metavar=("CENTER", "HALF_WIDTH"),
        help="sample k values from a closed interval instead",
    )
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--source", choices=("real", "dev"), default="real")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("hist", help="histogram one dimension of both datasets")
    _add_pair_arguments(p)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_hist)

    p = sub.add_parser("baseline", help="run a baseline selection strategy")
    _add_pair_arguments(p)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--method", choices=("lof", "kcenter", "fid_greedy"), required=True
    )
    p.add_argument("--k", type=int, default=10)
    p.add_argument(
        "--lof-k", type=int, default=20, help="LOF neighbourhood size (default 20)"
    )
    p.add_argument(
        "--sample", type=int, default=None,
        help="subsample both datasets to this many rows first (seeded)",
    )
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("eval", help="run the label-mix benchmark grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument(
        "--synthetic", action="store_true", help="generate synthetic pools"
    )
    src.add_argument("--matrix", help="labelled pool matrix (.adif or .csv)")
    p.add_argument("--labels", help="label file for --matrix")
    p.add_argument(
        "--format", choices=("auto", "adif", "csv"), default="auto"
    )
    p.add_argument("--out", required=True)
    p.add_argument(
        "--methods", default=",".join(DEFAULT_METHODS),
        help=f"comma-separated (default {','.join(DEFAULT_METHODS)})",
    )
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n-select", type=int, default=10)
    p.add_argument("--n-per-dataset", type=int, default=None)
    p.add_argument("--lof-k", type=int, default=20)
    p.add_argument("--d", type=int, default=64, help="synthetic: dimensions")
    p.add_argument("--n", type=int, default=500, help="synthetic: per-dataset rows")
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--planted", type=int, nargs="+", default=[0])
    p.add_argument(
        "--scale-law", choices=("uniform", "log_uniform"), default="uniform"
    )
    p.add_argument("--scale-min", type=float, default=1.0)
    p.add_argument("--scale-max", type=float, default=1.0)
    p.add_argument("--rotate", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("pca", help="fit and store a pooled PCA basis")
    _add_pair_arguments(p)
    p.add_argument("--model", required=True, help="output model path (.adpc)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument(
        "--transformed-out", default=None,
        help="also write both matrices projected into the basis",
    )
    p.set_defaults(func=_cmd_pca)

    p = sub.add_parser("convert", help="convert a matrix between formats")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument(
        "--in-format", choices=("auto", "adif", "csv"), default="auto"
    )
    p.add_argument(
        "--out-format", choices=("auto", "adif", "csv"), default="auto"
    )
    p.add_argument("--precision", choices=("f32", "f64"), default="f64")
    p.set_defaults(func=_cmd_convert)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and args.matrix and not args.labels:
        parser.error("--matrix requires --labels")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except AttrDiffError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
