"""Shared fixtures: a deterministic corpus of synthetic natural-style scenes.

Each scene is a 481x321 image of flat-colored regions (background, a rotated
bar, several ellipses) with a ground-truth segment map. One ellipse is split
into two ground-truth segments of identical color — a boundary only
annotation can see, which keeps oracle-guided scoring strictly ahead of
color-driven scoring.
"""

import numpy as np
import pytest

SCENE_SEEDS = (0, 1, 2, 3, 5, 6)


def natural_scene(seed, height=481, width=321):
    """One synthetic scene: (image in [0,1], ground-truth labels)."""
    rng = np.random.default_rng(seed)
    image = np.empty((height, width, 3))
    image[:] = rng.uniform(0.2, 0.8, 3)
    gt = np.zeros((height, width), dtype=np.int32)
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    region = 1

    # A rotated bar across the frame.
    angle = rng.uniform(0, np.pi)
    ca, sa = np.cos(angle), np.sin(angle)
    cy, cx = rng.uniform(0.3, 0.7) * height, rng.uniform(0.3, 0.7) * width
    u = (ys - cy) * ca + (xs - cx) * sa
    v = -(ys - cy) * sa + (xs - cx) * ca
    bar = (np.abs(u) < rng.uniform(0.12, 0.2) * height) \
        & (np.abs(v) < rng.uniform(0.3, 0.5) * width)
    image[bar] = rng.uniform(0.1, 0.9, 3)
    gt[bar] = region
    region += 1

    # Flat-colored ellipses.
    for _ in range(int(rng.integers(5, 8))):
        cy, cx = rng.uniform(0.1, 0.9) * height, rng.uniform(0.1, 0.9) * width
        ry, rx = rng.uniform(0.05, 0.13) * height, rng.uniform(0.05, 0.13) * width
        angle = rng.uniform(0, np.pi)
        ca, sa = np.cos(angle), np.sin(angle)
        u = ((ys - cy) * ca + (xs - cx) * sa) / ry
        v = (-(ys - cy) * sa + (xs - cx) * ca) / rx
        blob = u * u + v * v <= 1.0
        image[blob] = rng.uniform(0.05, 0.95, 3)
        gt[blob] = region
        region += 1

    # Camouflage pair: one color, two ground-truth segments along a chord.
    cy, cx = rng.uniform(0.3, 0.7) * height, rng.uniform(0.3, 0.7) * width
    ry, rx = rng.uniform(0.07, 0.11) * height, rng.uniform(0.07, 0.11) * width
    u = (ys - cy) / ry
    v = (xs - cx) / rx
    blob = u * u + v * v <= 1.0
    image[blob] = rng.uniform(0.05, 0.95, 3)
    split_angle = rng.uniform(0, np.pi)
    side = (ys - cy) * np.cos(split_angle) + (xs - cx) * np.sin(split_angle) > 0
    gt[blob & ~side] = region
    gt[blob & side] = region + 1

    image = np.round(np.clip(image, 0, 1) * 255) / 255
    return image, gt


@pytest.fixture(scope="session")
def scene_corpus():
    """The pinned evaluation corpus: list of (name, image, gt)."""
    return [(f"scene{seed}",) + natural_scene(seed) for seed in SCENE_SEEDS]
