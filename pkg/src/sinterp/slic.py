"""SLIC baseline: windowed k-means over joint Lab-color/position features,
with the usual connectivity post-processing.

The contrast case for the interpolation engine: raw k-means assignment can
strand pixels from their cluster (orphans), so connectivity must be repaired
afterwards rather than holding by construction.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import LABEL_DTYPE, require_image
from .interpolation import connected_components
from .scoring import rgb_to_lab


@dataclass(frozen=True)
class SlicParams:
    """Cluster count, color/space trade-off, and iteration budget."""

    n_superpixels: int = 200
    compactness: float = 10.0
    iterations: int = 10
    min_size_fraction: float = 0.25

    def __post_init__(self):
        if self.n_superpixels < 1:
            raise ValueError(f"n_superpixels must be >= 1, got {self.n_superpixels}")
        if not self.compactness > 0:
            raise ValueError(f"compactness must be positive, got {self.compactness}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.min_size_fraction < 1.0:
            raise ValueError(
                f"min_size_fraction must be in (0, 1), got {self.min_size_fraction}"
            )


def _seed_grid(height, width, n_superpixels):
    """Rows/cols of the seeding grid for a target cluster count."""
    interval = math.sqrt(height * width / n_superpixels)
    n_rows = max(1, round(height / interval))
    n_cols = max(1, round(width / interval))
    return n_rows, n_cols, interval


def slic_segment(image: np.ndarray, params: SlicParams,
                 objective_out: list | None = None) -> np.ndarray:
    """Raw SLIC clustering; labels may be disconnected (see
    enforce_connectivity_post).

    Distances are squared: d = |delta_lab|^2 + (m / S') * |delta_xy|^2, so
    each mean update provably never increases the objective. When
    ``objective_out`` is a list, the objective after every iteration is
    appended to it.
    """
    image = require_image(image)
    h, w = image.shape[:2]
    if params.n_superpixels > h * w:
        raise ValueError(f"{params.n_superpixels} superpixels for {h * w} pixels")

    lab = rgb_to_lab(image)
    n_rows, n_cols, interval = _seed_grid(h, w, params.n_superpixels)
    k = n_rows * n_cols
    weight = params.compactness / interval

    # Initial assignment: the rectangular grid partition around the seeds.
    row_bin = np.minimum(np.arange(h) * n_rows // h, n_rows - 1)
    col_bin = np.minimum(np.arange(w) * n_cols // w, n_cols - 1)
    labels = (row_bin[:, None] * n_cols + col_bin[None, :]).astype(LABEL_DTYPE)

    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    feats = np.concatenate([lab, ys[..., None], xs[..., None]], axis=2)
    flat = feats.reshape(-1, 5)

    def cluster_means(assignment):
        counts = np.bincount(assignment.ravel(), minlength=k).astype(np.float64)
        sums = np.zeros((k, 5))
        for c in range(5):
            sums[:, c] = np.bincount(assignment.ravel(), weights=flat[:, c], minlength=k)
        safe = np.maximum(counts, 1.0)
        return sums / safe[:, None], counts

    def distances_to_own_center(assignment, centers):
        own = centers[assignment]
        d_color = ((lab - own[..., :3]) ** 2).sum(axis=2)
        d_space = (ys - own[..., 3]) ** 2 + (xs - own[..., 4]) ** 2
        return d_color + weight * d_space

    centers, _ = cluster_means(labels)
    reach = int(math.ceil(interval))
    for _iteration in range(params.iterations):
        # Seeding best-so-far with the current assignment guarantees the
        # windowed pass never worsens any pixel's distance.
        best = distances_to_own_center(labels, centers)
        for idx in range(k):
            cy, cx = centers[idx, 3], centers[idx, 4]
            r0 = max(0, int(cy) - reach)
            r1 = min(h, int(cy) + reach + 1)
            c0 = max(0, int(cx) - reach)
            c1 = min(w, int(cx) + reach + 1)
            if r0 >= r1 or c0 >= c1:
                continue
            d_color = ((lab[r0:r1, c0:c1] - centers[idx, :3]) ** 2).sum(axis=2)
            d_space = ((ys[r0:r1, c0:c1] - cy) ** 2 + (xs[r0:r1, c0:c1] - cx) ** 2)
            d = d_color + weight * d_space
            window = best[r0:r1, c0:c1]
            better = d < window
            window[better] = d[better]
            labels[r0:r1, c0:c1][better] = idx
        new_centers, counts = cluster_means(labels)
        centers = np.where(counts[:, None] > 0, new_centers, centers)
        if objective_out is not None:
            objective_out.append(float(distances_to_own_center(labels, centers).sum()))
    return labels


def _component_adjacency(comps, n):
    adjacency = [set() for _ in range(n)]
    for a, b in ((comps[:, :-1], comps[:, 1:]), (comps[:-1, :], comps[1:, :])):
        differ = a != b
        pairs = np.unique(np.stack([a[differ], b[differ]], axis=1), axis=0)
        for x, y in pairs:
            adjacency[x].add(int(y))
            adjacency[y].add(int(x))
    return adjacency


def enforce_connectivity_post(labels: np.ndarray, min_size: int) -> np.ndarray:
    """Split labels into 4-connected components and absorb components smaller
    than ``min_size`` into an adjacent one.

    Components are visited in raster order of first appearance; a small
    component joins the earliest-seen neighboring component, later small
    survivors are swept into an adjacent region at the end. Output labels are
    consecutive from 0 in raster order.
    """
    comps = connected_components(labels)
    n = int(comps.max()) + 1
    sizes = np.bincount(comps.ravel(), minlength=n)
    adjacency = _component_adjacency(comps, n)

    final = np.full(n, -1, dtype=np.int64)
    next_label = 0
    for c in range(n):
        earlier = [d for d in adjacency[c] if d < c]
        if sizes[c] < min_size and earlier:
            final[c] = final[min(earlier)]
        else:
            final[c] = next_label
            next_label += 1
    out = final[comps]

    # Sweep any surviving undersized labels (e.g. a small first component).
    while True:
        label_sizes = np.bincount(out.ravel())
        offenders = np.flatnonzero((label_sizes > 0) & (label_sizes < min_size))
        if len(offenders) == 0 or len(np.flatnonzero(label_sizes > 0)) <= 1:
            break
        offender = int(offenders[0])
        neighbor_labels = set()
        for a, b in ((out[:, :-1], out[:, 1:]), (out[:-1, :], out[1:, :])):
            differ = a != b
            neighbor_labels.update(b[differ & (a == offender)].tolist())
            neighbor_labels.update(a[differ & (b == offender)].tolist())
        out[out == offender] = min(neighbor_labels)

    # Relabel consecutively, in raster order of first occurrence.
    _, first_idx, inverse = np.unique(out.ravel(), return_index=True, return_inverse=True)
    rank = np.empty(len(first_idx), dtype=LABEL_DTYPE)
    rank[np.argsort(first_idx)] = np.arange(len(first_idx), dtype=LABEL_DTYPE)
    return rank[inverse].reshape(labels.shape)
