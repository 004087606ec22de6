"""Segmentation quality metrics: achievable accuracy, boundary recall and
precision with a diagonal-based pixel tolerance, and compactness."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    """One segmentation's scores against a ground truth."""

    asa: float
    br: float
    bp: float
    co: float
    n_superpixels: int
    runtime_ms: float = 0.0

    def __post_init__(self):
        for name in ("asa", "br", "bp", "co"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


def _check_same_dims(labels, gt):
    labels = np.asarray(labels)
    gt = np.asarray(gt)
    if labels.ndim != 2 or labels.shape != gt.shape:
        raise ValueError(f"label map {labels.shape} and ground truth {gt.shape} must "
                         "be 2-D with equal shape")
    return labels, gt


def asa(labels: np.ndarray, gt: np.ndarray) -> float:
    """Achievable segmentation accuracy: the fraction of pixels kept when
    every superpixel is assigned to its best-overlapping ground-truth segment."""
    labels, gt = _check_same_dims(labels, gt)
    _, label_idx = np.unique(labels, return_inverse=True)
    _, gt_idx = np.unique(gt, return_inverse=True)
    n_labels = int(label_idx.max()) + 1
    n_segments = int(gt_idx.max()) + 1
    overlap = np.zeros((n_labels, n_segments), dtype=np.int64)
    np.add.at(overlap, (label_idx.ravel(), gt_idx.ravel()), 1)
    return float(overlap.max(axis=1).sum() / labels.size)


def boundary_map(labels: np.ndarray) -> np.ndarray:
    """Pixels with at least one 4-neighbor of a different label.

    The image border itself does not count as boundary.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {labels.shape}")
    boundary = np.zeros(labels.shape, dtype=bool)
    horizontal = labels[:, 1:] != labels[:, :-1]
    boundary[:, 1:] |= horizontal
    boundary[:, :-1] |= horizontal
    vertical = labels[1:, :] != labels[:-1, :]
    boundary[1:, :] |= vertical
    boundary[:-1, :] |= vertical
    return boundary


def boundary_tolerance(height: int, width: int) -> int:
    """Matching radius: 0.0025 of the image diagonal, rounded half-up."""
    return int(math.floor(0.0025 * math.hypot(height, width) + 0.5))


def _dilate_chebyshev(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation by a (2r+1) square window."""
    out = mask.copy()
    h, w = mask.shape
    for _ in range(radius):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        grown[1:, 1:] |= out[:-1, :-1]
        grown[1:, :-1] |= out[:-1, 1:]
        grown[:-1, 1:] |= out[1:, :-1]
        grown[:-1, :-1] |= out[1:, 1:]
        out = grown
    return out


def br_bp(labels: np.ndarray, gt: np.ndarray, tol: int):
    """Boundary recall and precision at Chebyshev tolerance ``tol``.

    Vacuous denominators score 1: BR when the ground truth has no boundary,
    BP when the label map has none.
    """
    labels, gt = _check_same_dims(labels, gt)
    if tol < 0:
        raise ValueError(f"tolerance must be >= 0, got {tol}")
    m_boundary = boundary_map(labels)
    t_boundary = boundary_map(gt)
    m_near = _dilate_chebyshev(m_boundary, tol)
    t_near = _dilate_chebyshev(t_boundary, tol)
    br = float((t_boundary & m_near).sum() / t_boundary.sum()) if t_boundary.any() else 1.0
    bp = float((m_boundary & t_near).sum() / m_boundary.sum()) if m_boundary.any() else 1.0
    return br, bp


def co(labels: np.ndarray) -> float:
    """Area-weighted isoperimetric compactness.

    Perimeter counts exposed unit edges, including edges on the image border;
    each superpixel's quotient 4*pi*A/P^2 is clamped at 1.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {labels.shape}")
    _, idx = np.unique(labels, return_inverse=True)
    idx = idx.reshape(labels.shape)
    n = int(idx.max()) + 1
    areas = np.bincount(idx.ravel(), minlength=n).astype(np.float64)

    perimeters = np.zeros(n, dtype=np.float64)
    # Border edges: top and bottom of every column, left and right of every
    # row (corner pixels expose two).
    perimeters += np.bincount(idx[0, :], minlength=n)
    perimeters += np.bincount(idx[-1, :], minlength=n)
    perimeters += np.bincount(idx[:, 0], minlength=n)
    perimeters += np.bincount(idx[:, -1], minlength=n)
    # Interior edges: each label-changing adjacency exposes one edge per side.
    h_diff = idx[:, 1:] != idx[:, :-1]
    perimeters += np.bincount(idx[:, :-1][h_diff].ravel(), minlength=n)
    perimeters += np.bincount(idx[:, 1:][h_diff].ravel(), minlength=n)
    v_diff = idx[1:, :] != idx[:-1, :]
    perimeters += np.bincount(idx[:-1, :][v_diff].ravel(), minlength=n)
    perimeters += np.bincount(idx[1:, :][v_diff].ravel(), minlength=n)

    quotient = np.minimum(1.0, 4.0 * math.pi * areas / perimeters ** 2)
    return float(((areas / labels.size) * quotient).sum())
