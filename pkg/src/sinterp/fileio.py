"""File formats: PPM/PNG images, label-map containers, overlay rendering.

Images go in and out as float arrays in [0, 1]. Label maps have a small
binary container (magic ``SINL1``), a CSV form, and 16-bit PGM for ground
truth exchange.
"""

import struct

import numpy as np
from PIL import Image

from .grid import LABEL_DTYPE, require_image
from .metrics import boundary_map

LABEL_MAGIC = b"SINL1"


class ImageDecodeError(ValueError):
    """Unreadable or unsupported image data; ``offset`` is the failing byte."""

    def __init__(self, message, offset=None):
        self.offset = offset
        suffix = f" (at byte {offset})" if offset is not None else ""
        super().__init__(message + suffix)


class LabelMapError(ValueError):
    """Unreadable or inconsistent label-map data."""


def _read_ppm_token(data, pos):
    """Next whitespace-delimited token, skipping '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ImageDecodeError("unexpected end of header", offset=start)
    return data[start:pos], pos


def decode_ppm(data: bytes) -> np.ndarray:
    """Binary PPM (P6, maxval 255) to float RGB in [0, 1]."""
    if data[:2] != b"P6":
        raise ImageDecodeError(f"not a P6 PPM (magic {data[:2]!r})", offset=0)
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_ppm_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise ImageDecodeError(f"non-numeric header field {token!r}",
                                   offset=pos - len(token)) from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageDecodeError(f"bad dimensions {width}x{height}", offset=2)
    if maxval != 255:
        raise ImageDecodeError(f"unsupported maxval {maxval}", offset=pos)
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    payload = data[pos:pos + expected]
    if len(payload) < expected:
        raise ImageDecodeError(
            f"truncated pixel data: {len(payload)} of {expected} bytes",
            offset=pos + len(payload))
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return pixels.astype(np.float64) / 255.0


def load_image(path) -> np.ndarray:
    """Decode a PPM (P6) or PNG (8-bit RGB/gray) file to floats in [0, 1]."""
    with open(path, "rb") as handle:
        head = handle.read(8)
        handle.seek(0)
        if head[:2] == b"P6":
            return decode_ppm(handle.read())
        if head[:8] == b"\x89PNG\r\n\x1a\n":
            with Image.open(handle) as img:
                if img.mode not in ("RGB", "L"):
                    img = img.convert("RGB")
                array = np.asarray(img)
            if array.ndim == 2:
                array = array[:, :, None]
            return array.astype(np.float64) / 255.0
    raise ImageDecodeError(f"unsupported image format in {path}", offset=0)


def write_ppm(path, image: np.ndarray) -> None:
    """Write floats in [0, 1] as a binary P6 PPM (maxval 255)."""
    image = require_image(image)
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    quantized = np.round(image * 255.0).astype(np.uint8)
    h, w = quantized.shape[:2]
    with open(path, "wb") as handle:
        handle.write(b"P6\n%d %d\n255\n" % (w, h))
        handle.write(quantized.tobytes())


def _check_label_values(labels):
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.size == 0:
        raise LabelMapError(f"label map must be non-empty 2-D, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0:
        raise LabelMapError("labels must be non-negative integers")
    return labels


def save_label_map(labels, path, form: str = "binary") -> None:
    """Write a label map as the SINL1 binary container or as CSV rows."""
    labels = _check_label_values(labels)
    h, w = labels.shape
    if form == "binary":
        with open(path, "wb") as handle:
            handle.write(LABEL_MAGIC)
            handle.write(struct.pack("<III", h, w, int(labels.max()) + 1))
            handle.write(labels.astype("<u4").tobytes())
    elif form == "csv":
        with open(path, "w", encoding="ascii") as handle:
            for row in labels:
                handle.write(",".join(str(int(v)) for v in row))
                handle.write("\n")
    else:
        raise ValueError(f"unknown label-map form {form!r}; use binary or csv")


def write_pgm16(path, labels) -> None:
    """Write a label map as a 16-bit big-endian binary PGM (P5)."""
    labels = _check_label_values(labels)
    if labels.max() > 65535:
        raise LabelMapError(f"label {labels.max()} exceeds 16-bit PGM range")
    h, w = labels.shape
    with open(path, "wb") as handle:
        handle.write(b"P5\n%d %d\n65535\n" % (w, h))
        handle.write(labels.astype(">u2").tobytes())


def _load_label_binary(data):
    header = struct.calcsize("<III")
    if len(data) < len(LABEL_MAGIC) + header:
        raise LabelMapError("truncated label-map header")
    h, w, n_labels = struct.unpack_from("<III", data, len(LABEL_MAGIC))
    payload = data[len(LABEL_MAGIC) + header:]
    if len(payload) != h * w * 4:
        raise LabelMapError(f"payload is {len(payload)} bytes, expected {h * w * 4}")
    labels = np.frombuffer(payload, dtype="<u4").reshape(h, w).astype(LABEL_DTYPE)
    if n_labels and labels.max() >= n_labels:
        raise LabelMapError(f"label {labels.max()} exceeds declared count {n_labels}")
    return labels


def _load_label_pgm16(data):
    token_pos = [2]

    def next_int():
        token, pos = _read_ppm_token(data, token_pos[0])
        token_pos[0] = pos
        return int(token)

    try:
        w, h, maxval = next_int(), next_int(), next_int()
    except (ImageDecodeError, ValueError) as exc:
        raise LabelMapError(f"bad PGM header: {exc}") from None
    if maxval != 65535:
        raise LabelMapError(f"expected 16-bit PGM, got maxval {maxval}")
    payload = data[token_pos[0] + 1:]
    if len(payload) != h * w * 2:
        raise LabelMapError(f"payload is {len(payload)} bytes, expected {h * w * 2}")
    return np.frombuffer(payload, dtype=">u2").reshape(h, w).astype(LABEL_DTYPE)


def _load_label_csv(data):
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise LabelMapError(f"not a label-map file: {exc}") from None
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([int(cell) for cell in line.split(",")])
        except ValueError:
            raise LabelMapError(f"non-integer cell on line {line_no}") from None
    if not rows:
        raise LabelMapError("empty CSV label map")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise LabelMapError("ragged CSV rows")
    labels = np.array(rows, dtype=np.int64)
    if labels.min() < 0:
        raise LabelMapError("negative label in CSV")
    return labels.astype(LABEL_DTYPE)


def load_label_map(path) -> np.ndarray:
    """Read a label map in any supported form (sniffed by content)."""
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:len(LABEL_MAGIC)] == LABEL_MAGIC:
        return _load_label_binary(data)
    if data[:2] == b"P5":
        return _load_label_pgm16(data)
    return _load_label_csv(data)


def render_overlay(image, labels, path, mode: str = "boundary",
                   color=(1.0, 0.0, 0.0)) -> None:
    """Write a PNG visualization: region boundaries painted over the image,
    or each region filled with its mean color."""
    image = require_image(image)
    labels = np.asarray(labels)
    if labels.shape != image.shape[:2]:
        raise ValueError(f"label map {labels.shape} does not match image "
                         f"{image.shape[:2]}")
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    if mode == "boundary":
        out = image.copy()
        out[boundary_map(labels)] = color
    elif mode == "mean":
        _, idx = np.unique(labels, return_inverse=True)
        idx = idx.reshape(labels.shape)
        counts = np.bincount(idx.ravel()).astype(np.float64)
        out = np.empty_like(image)
        for c in range(3):
            sums = np.bincount(idx.ravel(), weights=image[..., c].ravel())
            out[..., c] = (sums / counts)[idx]
    else:
        raise ValueError(f"unknown overlay mode {mode!r}; use boundary or mean")
    quantized = np.round(np.clip(out, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="RGB").save(path, format="PNG")
