"""Superpixel segmentation by iterative label-map interpolation.

A seed grid of superpixel IDs is repeatedly doubled; every inserted element
copies the label of one of its two flanking neighbors, chosen by association
scores, so superpixels are 4-connected by construction. The package also
ships the training-side machinery (step targets, masked cross-entropy,
weighted total loss), evaluation metrics, a SLIC baseline for comparison,
and file/CLI plumbing.
"""

from .grid import (
    ExpansionSchedule,
    InvalidSizeError,
    build_schedule,
    expanded_dims,
    init_dims,
    init_map,
    nearest_valid_size,
    resize_image,
)
from .interpolation import (
    ConnectivityReport,
    check_connectivity,
    connected_components,
    expand,
    interpolate_h,
    interpolate_v,
    label_upsample_nearest,
    neighbor_pairs_h,
    neighbor_pairs_v,
)
from .losses import (
    IGNORE,
    LossWeights,
    ToyScorerParams,
    TrainedScorer,
    ce_grad_logits,
    ce_loss_masked,
    derive_targets,
    synthetic_split_corpus,
    total_loss,
    train_toy_scorer,
)
from .metrics import MetricsReport, asa, boundary_map, boundary_tolerance, br_bp, co
from .pipeline import SegmentationResult, segment_sin, segment_slic
from .scoring import (
    ColorAffinityParams,
    ColorAffinityScorer,
    GroundTruthScorer,
    color_affinity_scores,
    gt_guided_scores,
    onehot_scores,
    rgb_to_lab,
)
from .slic import SlicParams, enforce_connectivity_post, slic_segment

__version__ = "0.1.0"

__all__ = [
    "ExpansionSchedule", "InvalidSizeError", "build_schedule", "expanded_dims",
    "init_dims", "init_map", "nearest_valid_size", "resize_image",
    "ConnectivityReport", "check_connectivity", "connected_components", "expand",
    "interpolate_h", "interpolate_v", "label_upsample_nearest",
    "neighbor_pairs_h", "neighbor_pairs_v",
    "IGNORE", "LossWeights", "ToyScorerParams", "TrainedScorer",
    "ce_grad_logits", "ce_loss_masked", "derive_targets",
    "synthetic_split_corpus", "total_loss", "train_toy_scorer",
    "MetricsReport", "asa", "boundary_map", "boundary_tolerance", "br_bp", "co",
    "SegmentationResult", "segment_sin", "segment_slic",
    "ColorAffinityParams", "ColorAffinityScorer", "GroundTruthScorer",
    "color_affinity_scores", "gt_guided_scores", "onehot_scores", "rgb_to_lab",
    "SlicParams", "enforce_connectivity_post", "slic_segment",
]
