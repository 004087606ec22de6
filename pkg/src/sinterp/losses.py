"""Training machinery: step targets, masked cross-entropy, weighted total loss,
analytic gradients, and a toy trainable scorer.

Targets live in {0, 1, IGNORE}: the index of the neighbor whose label the
inserted element should copy, or IGNORE when no single correct index exists
(both neighbors agree, or the true label matches neither). IGNORE elements
never contribute to losses or gradients.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import ExpansionSchedule, insertion_coords, require_image

logger = logging.getLogger(__name__)

IGNORE = -1
EPS = 1e-12


def derive_targets(gt, schedule: ExpansionSchedule, level: int, axis: str) -> np.ndarray:
    """Per-insertion-site targets for one interpolation step, read off a dense
    ground-truth segmentation.

    For each site: 0 if the true label matches only the first neighbor, 1 if
    only the second, IGNORE if the neighbors agree or the true label matches
    neither.
    """
    gt = np.asarray(gt)
    if gt.shape != schedule.dims[-1]:
        raise ValueError(
            f"ground truth shape {gt.shape} does not match image dims {schedule.dims[-1]}"
        )
    ins, a, b = insertion_coords(schedule, level, axis)
    t = gt[ins]
    t0 = gt[a]
    t1 = gt[b]
    targets = np.full(t.shape, IGNORE, dtype=np.int8)
    targets[(t == t0) & (t != t1)] = 0
    targets[(t == t1) & (t != t0)] = 1
    return targets


def ce_loss_masked(targets: np.ndarray, scores: np.ndarray):
    """Mean cross-entropy over non-IGNORE sites.

    Returns (loss, count). An empty mask gives (0.0, 0). Zero probabilities
    on counted targets are clamped at 1e-12 and logged.
    """
    targets = np.asarray(targets)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != targets.shape + (2,):
        raise ValueError(f"scores shape {scores.shape} does not match targets {targets.shape}")
    mask = targets != IGNORE
    count = int(mask.sum())
    if count == 0:
        return 0.0, 0
    picked = np.where(targets == 1, scores[..., 1], scores[..., 0])[mask]
    n_clamped = int((picked < EPS).sum())
    if n_clamped:
        logger.warning("clamped %d zero-probability targets in cross-entropy", n_clamped)
    return float(-np.log(np.maximum(picked, EPS)).mean()), count


@dataclass(frozen=True)
class LossWeights:
    """Per-level weights for the horizontal and vertical step losses."""

    w_h: tuple
    w_v: tuple

    def __post_init__(self):
        object.__setattr__(self, "w_h", tuple(float(w) for w in self.w_h))
        object.__setattr__(self, "w_v", tuple(float(w) for w in self.w_v))
        if len(self.w_h) != len(self.w_v):
            raise ValueError("w_h and w_v must have equal length")
        if any(w <= 0 for w in self.w_h + self.w_v):
            raise ValueError("loss weights must be positive")

    @classmethod
    def default(cls, levels: int = 4) -> "LossWeights":
        """Halving ladders starting at 20 (horizontal) and 8 (vertical)."""
        return cls(tuple(20.0 / 2 ** l for l in range(levels)),
                   tuple(8.0 / 2 ** l for l in range(levels)))


def total_loss(per_step, weights: LossWeights) -> float:
    """Weighted sum of per-level (horizontal, vertical) step losses."""
    if len(per_step) != len(weights.w_h):
        raise ValueError(f"{len(per_step)} per-step losses for {len(weights.w_h)} weights")
    return float(sum(wh * lh + wv * lv
                     for (lh, lv), wh, wv in zip(per_step, weights.w_h, weights.w_v)))


def ce_grad_logits(targets: np.ndarray, logits: np.ndarray) -> np.ndarray:
    """Gradient of ce_loss_masked(targets, softmax(logits)) with respect to logits.

    (softmax - onehot) / count on counted sites, zero on IGNORE.
    """
    targets = np.asarray(targets)
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != targets.shape + (2,):
        raise ValueError(f"logits shape {logits.shape} does not match targets {targets.shape}")
    grad = np.zeros_like(logits)
    mask = targets != IGNORE
    count = int(mask.sum())
    if count == 0:
        return grad
    probs = softmax_pairs(logits[..., 0], logits[..., 1])
    onehot = np.zeros_like(logits)
    onehot[..., 0] = targets == 0
    onehot[..., 1] = targets == 1
    grad[mask] = (probs[mask] - onehot[mask]) / count
    return grad


def softmax_pairs(x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """Numerically stable two-way softmax, stacked on a trailing axis."""
    m = np.maximum(x0, x1)
    e0 = np.exp(x0 - m)
    e1 = np.exp(x1 - m)
    z = e0 + e1
    return np.stack([e0 / z, e1 / z], axis=-1)


def candidate_color_features(image, schedule, level, axis):
    """Per-candidate feature vectors for the toy scorer.

    For each insertion site and each of its two neighbors: the per-channel
    squared color differences between the inserted pixel and that neighbor,
    plus a constant bias. Shape (grid_h, grid_w, 2, C + 1).
    """
    image = require_image(image)
    ins, a, b = insertion_coords(schedule, level, axis)
    center = image[ins]
    d0 = (center - image[a]) ** 2
    d1 = (center - image[b]) ** 2
    bias = np.ones(d0.shape[:-1] + (1,))
    f0 = np.concatenate([d0, bias], axis=-1)
    f1 = np.concatenate([d1, bias], axis=-1)
    return np.stack([f0, f1], axis=-2)


@dataclass(frozen=True)
class ToyScorerParams:
    """Learned linear weights over candidate color features, with the training curve."""

    weights: np.ndarray
    loss_history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be a flat vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "loss_history", tuple(float(x) for x in self.loss_history))


class TrainedScorer:
    """Scorer interface over learned feature weights: softmax of linear logits."""

    def __init__(self, params: ToyScorerParams):
        self.params = params

    def __call__(self, image, schedule, level, axis):
        feats = candidate_color_features(image, schedule, level, axis)
        if feats.shape[-1] != self.params.weights.shape[0]:
            raise ValueError(
                f"{feats.shape[-1]} features vs {self.params.weights.shape[0]} weights"
            )
        logits = feats @ self.params.weights
        return softmax_pairs(logits[..., 0], logits[..., 1])


def _corpus_loss_and_grad(corpus, schedules, weights_vec, loss_weights):
    n_features = weights_vec.shape[0]
    total = 0.0
    grad = np.zeros(n_features)
    for (image, gt), schedule in zip(corpus, schedules):
        per_step = []
        for level in range(1, schedule.levels + 1):
            pair = []
            for axis, w_level in (("h", loss_weights.w_h[level - 1]),
                                  ("v", loss_weights.w_v[level - 1])):
                feats = candidate_color_features(image, schedule, level, axis)
                targets = derive_targets(gt, schedule, level, axis)
                logits = feats @ weights_vec
                scores = softmax_pairs(logits[..., 0], logits[..., 1])
                loss, _count = ce_loss_masked(targets, scores)
                pair.append(loss)
                g_logits = ce_grad_logits(targets, logits)
                grad += w_level * np.einsum("ijkf,ijk->f", feats, g_logits)
            per_step.append(tuple(pair))
        total += total_loss(per_step, loss_weights)
    n = len(corpus)
    return total / n, grad / n


def train_toy_scorer(corpus, epochs: int, learning_rate: float,
                     loss_weights: LossWeights | None = None,
                     seed_step: int = 16) -> ToyScorerParams:
    """Full-batch gradient descent of the weighted total loss over a corpus
    of (image, ground_truth) pairs.

    The returned loss_history has epochs + 1 entries: the loss at
    initialization, then after each epoch.
    """
    from .grid import build_schedule  # local import keeps module load light

    if not corpus:
        raise ValueError("training corpus is empty")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if learning_rate <= 0:
        raise ValueError(f"learning rate must be positive, got {learning_rate}")

    schedules = []
    for image, gt in corpus:
        image = require_image(image)
        schedule = build_schedule(image.shape[0], image.shape[1], seed_step)
        if np.asarray(gt).shape != schedule.dims[-1]:
            raise ValueError("ground truth dims do not match image")
        schedules.append(schedule)
    if loss_weights is None:
        loss_weights = LossWeights.default(schedules[0].levels)

    n_features = corpus[0][0].shape[2] + 1
    weights_vec = np.zeros(n_features)
    history = []
    for _epoch in range(epochs):
        loss, grad = _corpus_loss_and_grad(corpus, schedules, weights_vec, loss_weights)
        history.append(loss)
        weights_vec = weights_vec - learning_rate * grad
    final_loss, _ = _corpus_loss_and_grad(corpus, schedules, weights_vec, loss_weights)
    history.append(final_loss)
    return ToyScorerParams(weights_vec, tuple(history))


def synthetic_split_corpus(n_images: int, height: int = 49, width: int = 49,
                           seed: int = 0):
    """Synthetic training pairs: two flat color regions split at a random column.

    Returns a list of (image, ground_truth) with labels {0, 1}.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_images):
        split = int(rng.integers(1, width))
        left = rng.random(3)
        right = rng.random(3)
        while np.abs(left - right).max() < 0.2:
            right = rng.random(3)
        image = np.empty((height, width, 3))
        image[:, :split] = left
        image[:, split:] = right
        gt = np.zeros((height, width), dtype=np.int32)
        gt[:, split:] = 1
        corpus.append((image, gt))
    return corpus
