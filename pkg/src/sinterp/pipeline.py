"""End-to-end segmentation: size handling, scorer selection, label mapping
back to the original resolution."""

import re
import time
from dataclasses import dataclass

import numpy as np

from .grid import build_schedule, init_map, nearest_valid_size, require_image, resize_image
from .interpolation import _resize_nearest, expand, label_upsample_nearest
from .losses import ToyScorerParams, TrainedScorer
from .scoring import ColorAffinityParams, ColorAffinityScorer, GroundTruthScorer
from .slic import SlicParams, enforce_connectivity_post, slic_segment


@dataclass(frozen=True)
class SegmentationResult:
    """A finished segmentation plus the geometry it ran at."""

    labels: np.ndarray
    internal_labels: np.ndarray
    internal_size: tuple
    n_superpixels: int
    runtime_ms: float


def parse_superpixel_spec(spec: str):
    """Either a plain count ("225") or an explicit grid ("30x20") -> int or
    (rows, cols)."""
    text = spec.strip().lower()
    grid = re.fullmatch(r"(\d+)x(\d+)", text)
    if grid:
        rows, cols = int(grid.group(1)), int(grid.group(2))
        if rows < 1 or cols < 1:
            raise ValueError(f"superpixel grid must be positive, got {spec!r}")
        return rows, cols
    if re.fullmatch(r"\d+", text):
        count = int(text)
        if count < 1:
            raise ValueError(f"superpixel count must be >= 1, got {spec!r}")
        return count
    raise ValueError(f"cannot parse superpixel spec {spec!r}; use N or RxC")


def seed_grid_for_count(height: int, width: int, count: int):
    """Seed-grid shape approximating ``count`` superpixels at the image's
    aspect ratio."""
    rows = max(1, round((count * height / width) ** 0.5))
    cols = max(1, round(count / rows))
    return rows, cols


def make_scorer(kind: str, *, affinity_params: ColorAffinityParams | None = None,
                gt_internal: np.ndarray | None = None,
                trained_params: ToyScorerParams | None = None):
    """Instantiate one of the named scorers for the expansion engine."""
    if kind == "color":
        return ColorAffinityScorer(affinity_params or ColorAffinityParams())
    if kind == "gt":
        if gt_internal is None:
            raise ValueError("gt scorer requires a ground-truth segmentation")
        return GroundTruthScorer(gt_internal)
    if kind == "trained":
        if trained_params is None:
            raise ValueError("trained scorer requires learned parameters")
        return TrainedScorer(trained_params)
    raise ValueError(f"unknown scorer {kind!r}; use color, gt, or trained")


def segment_sin(image, superpixels, *, seed_step: int = 16, scorer=None,
                gt: np.ndarray | None = None,
                affinity_params: ColorAffinityParams | None = None) -> SegmentationResult:
    """Segment by label-map expansion.

    ``superpixels`` is a count or a (rows, cols) grid. The image is resized
    to the nearest grid-compatible size, expanded there, and the labels are
    mapped back to the original resolution. When ``gt`` is given and no
    explicit scorer is passed, the ground-truth-guided scorer is used.
    """
    image = require_image(image)
    start = time.perf_counter()
    h, w = image.shape[:2]
    if isinstance(superpixels, tuple):
        rows, cols = superpixels
    else:
        rows, cols = seed_grid_for_count(h, w, superpixels)
    internal = nearest_valid_size(h, w, seed_step, target_superpixels=(rows, cols))
    schedule = build_schedule(internal[0], internal[1], seed_step)
    working = resize_image(image, internal[0], internal[1])
    if scorer is None:
        if gt is not None:
            gt = np.asarray(gt)
            if gt.shape != (h, w):
                raise ValueError(f"ground truth {gt.shape} does not match image {(h, w)}")
            scorer = GroundTruthScorer(_resize_nearest(gt, internal[0], internal[1]))
        else:
            scorer = ColorAffinityScorer(affinity_params or ColorAffinityParams())
    internal_labels = expand(init_map(*schedule.dims[0]), scorer, working, schedule)
    if internal[0] <= h and internal[1] <= w:
        labels = label_upsample_nearest(internal_labels, h, w)
    else:
        # The target grid can exceed the original size; map back permissively.
        labels = _resize_nearest(internal_labels, h, w)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return SegmentationResult(labels, internal_labels, internal,
                              len(np.unique(labels)), runtime_ms)


def segment_slic(image, superpixels, *, params: SlicParams | None = None) -> SegmentationResult:
    """Segment with the SLIC baseline plus connectivity post-processing."""
    image = require_image(image)
    start = time.perf_counter()
    count = superpixels[0] * superpixels[1] if isinstance(superpixels, tuple) else superpixels
    if params is None:
        params = SlicParams(n_superpixels=count)
    elif params.n_superpixels != count:
        params = SlicParams(count, params.compactness, params.iterations,
                            params.min_size_fraction)
    raw = slic_segment(image, params)
    min_size = max(1, int(params.min_size_fraction * image.shape[0] * image.shape[1]
                          / params.n_superpixels))
    labels = enforce_connectivity_post(raw, min_size)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return SegmentationResult(labels, labels, labels.shape,
                              len(np.unique(labels)), runtime_ms)
