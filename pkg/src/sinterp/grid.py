"""Grid geometry: seed maps, expansion schedules, coordinate mapping, resizing.

Everything here is a pure function of immutable inputs. Images are float
arrays of shape (H, W, C) with values in [0, 1]; label maps are 2-D integer
arrays.
"""

from dataclasses import dataclass

import numpy as np

LABEL_DTYPE = np.int32


class InvalidSizeError(ValueError):
    """Image size does not fit the seed grid; carries the nearest size that does."""

    def __init__(self, height, width, seed_step, nearest):
        self.nearest = nearest
        super().__init__(
            f"{height}x{width} is not a valid size for seed step {seed_step}; "
            f"nearest valid size is {nearest[0]}x{nearest[1]}"
        )


def _require_positive_dims(height: int, width: int) -> None:
    if height < 1 or width < 1:
        raise ValueError(f"dimensions must be >= 1, got {height}x{width}")


def _require_seed_step(seed_step: int) -> None:
    if seed_step < 2 or (seed_step & (seed_step - 1)) != 0:
        raise ValueError(f"seed step must be a power of two >= 2, got {seed_step}")


def require_image(image: np.ndarray) -> np.ndarray:
    """Validate an image array: shape (H, W, C) with C in {1, 3}, finite values in [0, 1]."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W, C) with C in {{1, 3}}, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError(f"empty image shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise ValueError("image contains non-finite values")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return image


@dataclass(frozen=True)
class ExpansionSchedule:
    """Per-level geometry of the doubling expansion.

    dims[0] is the seed grid, dims[levels] the full image; strides[l] is the
    image-pixel spacing of level-l map elements.
    """

    seed_step: int
    levels: int
    dims: tuple
    strides: tuple

    @property
    def image_height(self) -> int:
        return self.dims[-1][0]

    @property
    def image_width(self) -> int:
        return self.dims[-1][1]


def init_dims(height: int, width: int, seed_step: int) -> tuple:
    """Seed-grid dimensions: ceil-division of the image extent by the seed step."""
    _require_positive_dims(height, width)
    _require_seed_step(seed_step)
    return ((height + seed_step - 1) // seed_step, (width + seed_step - 1) // seed_step)


def expanded_dims(height: int, width: int) -> tuple:
    """One doubling step: n -> 2n - 1 along each axis."""
    _require_positive_dims(height, width)
    return (2 * height - 1, 2 * width - 1)


def nearest_valid_size(height, width, seed_step, target_superpixels=None):
    """Nearest image size whose seed grid tiles exactly.

    Valid sizes are k * seed_step + 1 per axis. With ``target_superpixels``
    (a (rows, cols) pair) the size is forced to that grid; otherwise each
    axis snaps to the closest valid value, ties resolving to the larger one.
    """
    _require_positive_dims(height, width)
    _require_seed_step(seed_step)
    if target_superpixels is not None:
        rows, cols = target_superpixels
        _require_positive_dims(rows, cols)
        return (rows * seed_step - (seed_step - 1), cols * seed_step - (seed_step - 1))

    def snap(x):
        k = (x - 1) // seed_step
        lo = k * seed_step + 1
        hi = lo + seed_step
        return lo if x - lo < hi - x else hi

    return (snap(height), snap(width))


def build_schedule(height: int, width: int, seed_step: int) -> ExpansionSchedule:
    """Expansion schedule for a valid-size image.

    Raises InvalidSizeError (carrying the nearest valid size) when the image
    does not sit exactly on the seed grid.
    """
    h0, w0 = init_dims(height, width, seed_step)
    if height != (h0 - 1) * seed_step + 1 or width != (w0 - 1) * seed_step + 1:
        raise InvalidSizeError(height, width, seed_step,
                               nearest_valid_size(height, width, seed_step))
    levels = seed_step.bit_length() - 1
    dims = [(h0, w0)]
    for _ in range(levels):
        dims.append(expanded_dims(*dims[-1]))
    strides = tuple(seed_step >> l for l in range(levels + 1))
    assert dims[-1] == (height, width)
    return ExpansionSchedule(seed_step, levels, tuple(dims), strides)


def init_map(h0: int, w0: int) -> np.ndarray:
    """Seed label map: row-major unique IDs 0 .. h0*w0 - 1."""
    _require_positive_dims(h0, w0)
    return np.arange(h0 * w0, dtype=LABEL_DTYPE).reshape(h0, w0)


def level_coord_to_pixel(schedule: ExpansionSchedule, level: int, i: int, j: int) -> tuple:
    """Image-pixel coordinate of map element (i, j) at the given level."""
    if not 0 <= level <= schedule.levels:
        raise ValueError(f"level {level} outside 0..{schedule.levels}")
    h, w = schedule.dims[level]
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"({i}, {j}) outside level-{level} dims {h}x{w}")
    s = schedule.strides[level]
    return (i * s, j * s)


def insertion_coords(schedule: ExpansionSchedule, level: int, axis: str):
    """Image coordinates of one interpolation step's insertion sites.

    Returns ((ins_r, ins_c), (a_r, a_c), (b_r, b_c)): index arrays,
    broadcastable to the score-grid shape, for the inserted element and its
    two flanking neighbors (a before, b after, along the axis). The inserted
    site is the image-space midpoint of its neighbors.
    """
    if not 1 <= level <= schedule.levels:
        raise ValueError(f"level {level} outside 1..{schedule.levels}")
    h_prev, w_prev = schedule.dims[level - 1]
    w_cur = schedule.dims[level][1]
    s_prev = schedule.strides[level - 1]
    s_cur = schedule.strides[level]
    if axis == "h":
        rows = (np.arange(h_prev) * s_prev)[:, None]
        ins_c = ((2 * np.arange(w_prev - 1) + 1) * s_cur)[None, :]
        a_c = (np.arange(w_prev - 1) * s_prev)[None, :]
        b_c = a_c + s_prev
        return (rows, ins_c), (rows, a_c), (rows, b_c)
    if axis == "v":
        cols = (np.arange(w_cur) * s_cur)[None, :]
        ins_r = ((2 * np.arange(h_prev - 1) + 1) * s_cur)[:, None]
        a_r = (np.arange(h_prev - 1) * s_prev)[:, None]
        b_r = a_r + s_prev
        return (ins_r, cols), (a_r, cols), (b_r, cols)
    raise ValueError(f"axis must be 'h' or 'v', got {axis!r}")


def resize_image(image: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Bilinear resampling with corner alignment; values stay in [0, 1].

    An identity resize returns a bitwise-equal copy.
    """
    image = require_image(image)
    _require_positive_dims(out_height, out_width)
    h, w = image.shape[:2]
    if (out_height, out_width) == (h, w):
        return image.copy()

    def axis_coords(n_src, n_dst):
        if n_dst == 1 or n_src == 1:
            return np.zeros(n_dst, dtype=np.float64)
        return np.arange(n_dst) * ((n_src - 1) / (n_dst - 1))

    src_r = axis_coords(h, out_height)
    src_c = axis_coords(w, out_width)
    r0 = np.floor(src_r).astype(np.intp)
    c0 = np.floor(src_c).astype(np.intp)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = (src_r - r0)[:, None, None]
    fc = (src_c - c0)[None, :, None]

    top = image[r0][:, c0] * (1.0 - fc) + image[r0][:, c1] * fc
    bot = image[r1][:, c0] * (1.0 - fc) + image[r1][:, c1] * fc
    out = top * (1.0 - fr) + bot * fr
    return np.clip(out, 0.0, 1.0)
