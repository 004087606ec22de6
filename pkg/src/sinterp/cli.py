"""Command-line interface: single-image segmentation and dataset benchmarks.

Exit codes: 0 success, 1 I/O or data errors, 2 argument/config errors.
Machine-readable output goes to stdout as key=value lines (segment) or CSV
(benchmark); diagnostics go to stderr.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, resolve_threads
from .fileio import (
    ImageDecodeError,
    LabelMapError,
    load_image,
    load_label_map,
    render_overlay,
    save_label_map,
)
from .losses import synthetic_split_corpus, train_toy_scorer
from .metrics import asa, boundary_tolerance, br_bp, co
from .pipeline import parse_superpixel_spec, segment_sin, segment_slic
from .scoring import ColorAffinityParams
from .slic import SlicParams

IMAGE_SUFFIXES = (".ppm", ".png")
GT_SUFFIXES = (".pgm", ".csv", ".sinl")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sinterp",
        description="Superpixel segmentation by iterative label-map interpolation.")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image")
    seg.add_argument("--input", required=True, help="input image (PPM P6 or PNG)")
    seg.add_argument("--superpixels", help="target count N or explicit grid RxC")
    seg.add_argument("--method", choices=["sin", "slic"], default=None)
    seg.add_argument("--scorer", choices=["color", "gt", "trained"], default=None)
    seg.add_argument("--gt", help="ground-truth label map (required by --scorer gt)")
    seg.add_argument("--out", required=True,
                     help="output label map (.csv for CSV, else binary)")
    seg.add_argument("--overlay", help="optional PNG visualization path")
    seg.add_argument("--overlay-mode", choices=["boundary", "mean"],
                     default="boundary")
    seg.add_argument("--config", help="key=value config file")
    seg.add_argument("--seed-step", type=int, default=None)
    seg.add_argument("--tau", type=float, default=None)
    seg.add_argument("--color-space", choices=["rgb", "lab"], default=None)
    seg.add_argument("--compactness", type=float, default=None,
                     help="SLIC color/space trade-off")

    bench = sub.add_parser("benchmark", help="evaluate over an image+GT directory")
    bench.add_argument("--dataset", required=True,
                       help="directory of images with same-stem GT label maps")
    bench.add_argument("--counts", required=True,
                       help="comma-separated superpixel counts, e.g. 200,400")
    bench.add_argument("--methods", default="sin,slic",
                       help="comma-separated from {sin, slic}")
    bench.add_argument("--scorers", default="color",
                       help="comma-separated from {color, gt, trained}; applies to sin")
    bench.add_argument("--out", help="CSV output path (default: stdout)")
    bench.add_argument("--config", help="key=value config file")
    bench.add_argument("--seed-step", type=int, default=None)
    bench.add_argument("--tau", type=float, default=None)
    bench.add_argument("--color-space", choices=["rgb", "lab"], default=None)
    bench.add_argument("--threads", type=int, default=None)
    return parser


def _merged_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for attr, key in (("method", "method"), ("scorer", "scorer"),
                      ("seed_step", "seed_step"), ("tau", "tau"),
                      ("color_space", "color_space"), ("threads", "threads")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    spec = getattr(args, "superpixels", None)
    if spec is not None:
        overrides["target_superpixels"] = parse_superpixel_spec(spec)
    if overrides:
        merged = {f: getattr(config, f) for f in (
            "method", "scorer", "seed_step", "tau", "color_space",
            "target_superpixels", "weights_h", "weights_v", "threads")}
        merged.update(overrides)
        config = RunConfig(**merged)
    return config


def _trained_scorer_params():
    """Deterministic desk-scale training run for --scorer trained."""
    return train_toy_scorer(synthetic_split_corpus(6, seed=7), epochs=50,
                            learning_rate=1e-2)


def _segment_once(image, config: RunConfig, gt=None, compactness=None):
    superpixels = config.target_superpixels
    if config.method == "slic":
        params = SlicParams() if compactness is None else SlicParams(compactness=compactness)
        return segment_slic(image, superpixels, params=params)
    affinity = ColorAffinityParams(config.tau, config.color_space)
    if config.scorer == "gt":
        if gt is None:
            raise ConfigError("--scorer gt requires --gt <label map>")
        return segment_sin(image, superpixels, seed_step=config.seed_step, gt=gt)
    if config.scorer == "trained":
        from .pipeline import make_scorer
        scorer = make_scorer("trained", trained_params=_trained_scorer_params())
        return segment_sin(image, superpixels, seed_step=config.seed_step,
                           scorer=scorer)
    return segment_sin(image, superpixels, seed_step=config.seed_step,
                       affinity_params=affinity)


def cmd_segment(args) -> int:
    try:
        config = _merged_config(args)
        if config.target_superpixels is None:
            print("error: --superpixels (or target_superpixels in config) is required",
                  file=sys.stderr)
            return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        image = load_image(args.input)
        gt = None
        if config.scorer == "gt":
            if not args.gt:
                print("error: --scorer gt requires --gt <label map>", file=sys.stderr)
                return 2
            gt = load_label_map(args.gt)
        result = _segment_once(image, config, gt=gt, compactness=args.compactness)
        form = "csv" if str(args.out).endswith(".csv") else "binary"
        save_label_map(result.labels, args.out, form)
        if args.overlay:
            render_overlay(image, result.labels, args.overlay, mode=args.overlay_mode)
    except (ImageDecodeError, LabelMapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"n_superpixels={result.n_superpixels}")
    print(f"runtime_ms={result.runtime_ms:.3f}")
    return 0


def _discover_dataset(root: Path):
    images = sorted(p for p in root.iterdir()
                    if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file())
    paired, skipped = [], []
    for path in images:
        for suffix in GT_SUFFIXES:
            gt_path = path.with_suffix(suffix)
            if gt_path.exists():
                paired.append((path, gt_path))
                break
        else:
            skipped.append(path)
    return paired, skipped


def _format_row(image_name, method, n_superpixels, scores):
    cells = [image_name, method, f"{n_superpixels:.6g}"]
    cells += [f"{value:.6g}" for value in scores]
    return ",".join(cells)


def cmd_benchmark(args) -> int:
    try:
        config = _merged_config(args)
        counts = [int(c) for c in args.counts.split(",") if c.strip()]
        if not counts or any(c < 1 for c in counts):
            raise ConfigError(f"bad counts {args.counts!r}")
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        scorers = [s.strip() for s in args.scorers.split(",") if s.strip()]
        if any(m not in ("sin", "slic") for m in methods) or not methods:
            raise ConfigError(f"bad methods {args.methods!r}")
        if any(s not in ("color", "gt", "trained") for s in scorers) or not scorers:
            raise ConfigError(f"bad scorers {args.scorers!r}")
        threads = resolve_threads(config.threads)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    root = Path(args.dataset)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return 1
    paired, skipped = _discover_dataset(root)
    for path in skipped:
        print(f"warning: no ground truth for {path.name}, skipped", file=sys.stderr)
    if skipped:
        print(f"warning: skipped {len(skipped)} image(s)", file=sys.stderr)
    if not paired:
        print("error: no usable image/ground-truth pairs", file=sys.stderr)
        return 1

    method_labels = []
    for method in methods:
        if method == "sin":
            method_labels += [f"sin-{s}" for s in scorers]
        else:
            method_labels.append("slic")

    trained_params = None
    if any(label == "sin-trained" for label in method_labels):
        trained_params = _trained_scorer_params()

    def run_one(task):
        image_path, gt_path, label, count = task
        image = load_image(image_path)
        gt = load_label_map(gt_path)
        if gt.shape != image.shape[:2]:
            raise LabelMapError(f"{gt_path.name}: ground truth {gt.shape} does not "
                                f"match image {image.shape[:2]}")
        if label == "slic":
            result = segment_slic(image, count)
        elif label == "sin-gt":
            result = segment_sin(image, count, seed_step=config.seed_step, gt=gt)
        elif label == "sin-trained":
            from .pipeline import make_scorer
            result = segment_sin(image, count, seed_step=config.seed_step,
                                 scorer=make_scorer("trained",
                                                    trained_params=trained_params))
        else:
            result = segment_sin(
                image, count, seed_step=config.seed_step,
                affinity_params=ColorAffinityParams(config.tau, config.color_space))
        tol = boundary_tolerance(*gt.shape)
        br, bp = br_bp(result.labels, gt, tol)
        scores = (asa(result.labels, gt), br, bp, co(result.labels),
                  result.runtime_ms)
        return (image_path.stem, label, count, result.n_superpixels, scores)

    tasks = [(img, gt, label, count)
             for label in method_labels for count in counts for img, gt in paired]
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, tasks))
    except (ImageDecodeError, LabelMapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    outcomes.sort(key=lambda row: (row[1], row[2], row[0]))
    lines = ["image,method,n_superpixels,asa,br,bp,co,runtime_ms"]
    for label in sorted(method_labels):
        for count in counts:
            group = [o for o in outcomes if o[1] == label and o[2] == count]
            for stem, _, _, n_sp, scores in group:
                lines.append(_format_row(stem, label, n_sp, scores))
            mean_n = float(np.mean([o[3] for o in group]))
            mean_scores = tuple(np.mean([o[4][i] for o in group])
                                for i in range(5))
            lines.append(_format_row("mean", label, mean_n, mean_scores))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="ascii") as handle:
                handle.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if args.command == "segment":
        return cmd_segment(args)
    return cmd_benchmark(args)


if __name__ == "__main__":
    sys.exit(main())
