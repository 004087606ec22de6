"""Label-map expansion by horizontal/vertical interpolation, plus connectivity checks.

One expansion level doubles the map (n -> 2n - 1 per axis) in two passes:
a horizontal pass that widens rows, then a vertical pass that fills the new
rows. Every inserted element copies the label of one of its two flanking
neighbors, chosen by a pair of association scores, so each label's region
grows only by pixels adjacent to it — regions stay 4-connected by
construction.
"""

from dataclasses import dataclass

import numpy as np

from .grid import LABEL_DTYPE, ExpansionSchedule


def neighbor_pairs_h(labels: np.ndarray) -> np.ndarray:
    """Flanking label pairs (left, right) for every horizontal insertion site.

    Shape (h, w - 1, 2) for a (h, w) map.
    """
    return np.stack([labels[:, :-1], labels[:, 1:]], axis=-1)


def neighbor_pairs_v(labels: np.ndarray) -> np.ndarray:
    """Flanking label pairs (top, bottom) for every vertical insertion site.

    Shape (h - 1, w, 2) for a (h, w) map.
    """
    return np.stack([labels[:-1, :], labels[1:, :]], axis=-1)


def _check_scores(scores: np.ndarray, expected_shape: tuple) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != expected_shape:
        raise ValueError(f"score grid shape {scores.shape}, expected {expected_shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("score grid contains non-finite values")
    return scores


def interpolate_h(labels: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Widen a (h, w) map to (h, 2w - 1).

    Existing labels land on even columns; each odd column takes the left or
    right neighbor's label by score argmax (ties go left).
    """
    h, w = labels.shape
    scores = _check_scores(scores, (h, w - 1, 2))
    out = np.empty((h, 2 * w - 1), dtype=labels.dtype)
    out[:, ::2] = labels
    take_right = scores[..., 1] > scores[..., 0]
    out[:, 1::2] = np.where(take_right, labels[:, 1:], labels[:, :-1])
    return out


def interpolate_v(labels: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Heighten a (h, w) map to (2h - 1, w).

    Existing labels land on even rows; each odd row takes the top or bottom
    neighbor's label by score argmax (ties go top).
    """
    h, w = labels.shape
    scores = _check_scores(scores, (h - 1, w, 2))
    out = np.empty((2 * h - 1, w), dtype=labels.dtype)
    out[::2, :] = labels
    take_bottom = scores[..., 1] > scores[..., 0]
    out[1::2, :] = np.where(take_bottom, labels[1:, :], labels[:-1, :])
    return out


def expand(seed_map, scorer, image, schedule, collect_levels=False):
    """Run the full expansion from the seed map to a dense pixel labeling.

    ``scorer(image, schedule, level, axis)`` must return the score grid for
    that step ((h, w-1, 2) for axis "h" applied to a (h, w) map, (h-1, w, 2)
    for axis "v" applied to the widened map); it sees only the image and the
    geometry, never the evolving labels. Returns the final (H, W) label map,
    or the list of all per-level maps (seed first) when ``collect_levels``
    is set.
    """
    if seed_map.shape != schedule.dims[0]:
        raise ValueError(
            f"seed map shape {seed_map.shape} does not match schedule {schedule.dims[0]}"
        )
    current = np.asarray(seed_map, dtype=LABEL_DTYPE)
    levels = [current]
    for level in range(1, schedule.levels + 1):
        widened = interpolate_h(current, scorer(image, schedule, level, "h"))
        current = interpolate_v(widened, scorer(image, schedule, level, "v"))
        if current.shape != schedule.dims[level]:
            raise AssertionError(
                f"level {level} produced {current.shape}, expected {schedule.dims[level]}"
            )
        levels.append(current)
    return levels if collect_levels else current


@dataclass(frozen=True)
class ConnectivityReport:
    """Outcome of a 4-connectivity audit of a label map."""

    connected: bool
    n_labels: int
    n_components: int
    offending_labels: tuple


def connected_components(labels: np.ndarray) -> np.ndarray:
    """4-connected component map of a label image; components numbered 0..n-1 row-major.

    Runs union-find over maximal same-label row runs instead of single
    pixels, so the hot loop length is proportional to the number of runs.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {labels.shape}")
    h, w = labels.shape

    # Split each row into maximal runs of one label.
    run_row = []
    run_start = []
    run_end = []  # exclusive
    run_label = []
    row_first_run = np.empty(h + 1, dtype=np.intp)
    for i in range(h):
        row_first_run[i] = len(run_row)
        row = labels[i]
        breaks = np.flatnonzero(row[1:] != row[:-1]) + 1
        starts = np.concatenate(([0], breaks))
        ends = np.concatenate((breaks, [w]))
        run_row.extend([i] * len(starts))
        run_start.extend(starts.tolist())
        run_end.extend(ends.tolist())
        run_label.extend(row[starts].tolist())
    row_first_run[h] = len(run_row)

    n_runs = len(run_row)
    parent = list(range(n_runs))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    # Merge vertically adjacent runs of equal label (two-pointer sweep per row pair).
    for i in range(1, h):
        a = row_first_run[i - 1]
        b = row_first_run[i]
        a_stop = row_first_run[i]
        b_stop = row_first_run[i + 1]
        while a < a_stop and b < b_stop:
            if run_label[a] == run_label[b] and run_start[a] < run_end[b] and run_start[b] < run_end[a]:
                union(a, b)
            if run_end[a] <= run_end[b]:
                a += 1
            else:
                b += 1

    roots = [find(r) for r in range(n_runs)]
    root_to_component = {}
    component_of_run = np.empty(n_runs, dtype=LABEL_DTYPE)
    for r, root in enumerate(roots):
        if root not in root_to_component:
            root_to_component[root] = len(root_to_component)
        component_of_run[r] = root_to_component[root]

    out = np.empty((h, w), dtype=LABEL_DTYPE)
    for r in range(n_runs):
        out[run_row[r], run_start[r]:run_end[r]] = component_of_run[r]
    return out


def check_connectivity(labels: np.ndarray) -> ConnectivityReport:
    """Audit whether every label forms a single 4-connected region."""
    comps = connected_components(labels)
    label_values = np.unique(labels)
    n_components = int(comps.max()) + 1 if comps.size else 0
    if n_components == len(label_values):
        return ConnectivityReport(True, len(label_values), n_components, ())
    flat_labels = labels.ravel()
    flat_comps = comps.ravel()
    first_seen = {}
    offending = set()
    for lab, comp in zip(flat_labels.tolist(), flat_comps.tolist()):
        prev = first_seen.setdefault(lab, comp)
        if prev != comp:
            offending.add(lab)
    return ConnectivityReport(False, len(label_values), n_components,
                              tuple(sorted(offending)))


def label_upsample_nearest(labels: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Nearest-neighbor upsample of a label map; each axis must not shrink.

    Pure pixel replication (every output pixel copies exactly one input
    pixel), so 4-connectivity of regions is preserved.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {labels.shape}")
    h, w = labels.shape
    if out_height < h or out_width < w:
        raise ValueError(
            f"target {out_height}x{out_width} is smaller than source {h}x{w}; "
            "upsample only"
        )
    return _resize_nearest(labels, out_height, out_width)


def _resize_nearest(labels: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    h, w = labels.shape
    rows = np.minimum((np.arange(out_height) + 0.5) * (h / out_height), h - 1).astype(np.intp)
    cols = np.minimum((np.arange(out_width) + 0.5) * (w / out_width), w - 1).astype(np.intp)
    return labels[rows][:, cols].copy()
