"""Association-score providers.

A scorer is any callable `(image, schedule, level, axis) -> scores` whose
output grid matches the step's insertion sites ((h, w-1, 2) horizontal,
(h-1, w, 2) vertical, in pre-step map coordinates) and holds probability
pairs: non-negative, summing to 1. Scorers see only the image and the
geometry, never the evolving label map.
"""

from dataclasses import dataclass

import numpy as np

from .grid import ExpansionSchedule, insertion_coords, require_image
from .losses import derive_targets, softmax_pairs

_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def validate_scores(scores: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    """Check the probability-pair contract: shape (..., 2), a_k >= 0, sums = 1."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim < 1 or scores.shape[-1] != 2:
        raise ValueError(f"scores must end in a pair axis, got shape {scores.shape}")
    if scores.size and scores.min() < 0:
        raise ValueError("scores contain negative values")
    if scores.size and np.abs(scores.sum(axis=-1) - 1.0).max() > atol:
        raise ValueError("score pairs do not sum to 1")
    return scores


def rgb_to_lab(image: np.ndarray) -> np.ndarray:
    """sRGB in [0, 1] to CIELAB under D65. Single-channel input is treated as gray."""
    image = require_image(image)
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    linear = np.where(image <= 0.04045, image / 12.92,
                      ((image + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T / _D65_WHITE
    delta = 6.0 / 29.0
    f = np.where(xyz > delta ** 3, np.cbrt(xyz), xyz / (3 * delta ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


@dataclass(frozen=True)
class ColorAffinityParams:
    """Temperature and color space for the handcrafted affinity scorer."""

    temperature: float = 0.05
    color_space: str = "rgb"

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.color_space not in ("rgb", "lab"):
            raise ValueError(f"color_space must be 'rgb' or 'lab', got {self.color_space!r}")


def _affinity_features(image: np.ndarray, color_space: str) -> np.ndarray:
    """Color features on a unit-ish scale so one temperature fits both spaces."""
    if color_space == "rgb":
        return require_image(image)
    lab = rgb_to_lab(image)
    return np.stack([lab[..., 0] / 100.0,
                     (lab[..., 1] + 128.0) / 256.0,
                     (lab[..., 2] + 128.0) / 256.0], axis=-1)


def color_affinity_scores(image, schedule: ExpansionSchedule, level: int, axis: str,
                          params: ColorAffinityParams = ColorAffinityParams()) -> np.ndarray:
    """Scores from color similarity: softmax over negative squared color
    distances (inserted pixel vs. each flanking neighbor) at temperature tau."""
    feat = _affinity_features(image, params.color_space)
    return _affinity_from_features(feat, schedule, level, axis, params.temperature)


def _affinity_from_features(feat, schedule, level, axis, temperature):
    ins, a, b = insertion_coords(schedule, level, axis)
    center = feat[ins]
    d0 = ((center - feat[a]) ** 2).sum(axis=-1)
    d1 = ((center - feat[b]) ** 2).sum(axis=-1)
    return softmax_pairs(-d0 / temperature, -d1 / temperature)


class ColorAffinityScorer:
    """Scorer interface around color_affinity_scores; caches the feature image."""

    def __init__(self, params: ColorAffinityParams = ColorAffinityParams()):
        self.params = params
        self._cache_key = None
        self._cache_feat = None

    def __call__(self, image, schedule, level, axis):
        key = id(image)
        if key != self._cache_key:
            self._cache_feat = _affinity_features(image, self.params.color_space)
            self._cache_key = key
        return _affinity_from_features(self._cache_feat, schedule, level, axis,
                                       self.params.temperature)


def onehot_scores(targets: np.ndarray) -> np.ndarray:
    """Degenerate score pairs from step targets: 0 -> (1,0), 1 -> (0,1),
    IGNORE -> (0.5, 0.5)."""
    targets = np.asarray(targets)
    scores = np.empty(targets.shape + (2,), dtype=np.float64)
    scores[..., 0] = np.select([targets == 0, targets == 1], [1.0, 0.0], default=0.5)
    scores[..., 1] = 1.0 - scores[..., 0]
    return scores


def gt_guided_scores(gt, schedule: ExpansionSchedule, level: int, axis: str) -> np.ndarray:
    """Oracle scores that point every insertion site at its ground-truth neighbor."""
    return onehot_scores(derive_targets(gt, schedule, level, axis))


class GroundTruthScorer:
    """Scorer interface around gt_guided_scores; the image argument is ignored."""

    def __init__(self, gt: np.ndarray):
        self.gt = np.asarray(gt)

    def __call__(self, image, schedule, level, axis):
        return gt_guided_scores(self.gt, schedule, level, axis)
