"""Contrast-scoring filter chain used to locate fixation areas.

The chain runs in three stages: block-average subsampling shrinks the frame
(low-pass), an 8-neighbor Laplacian isolates local contrast (high-pass), and
a sliding-window variance map scores how busy each neighborhood is. All
three are pure float64 array transforms.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import as_image

__all__ = ["average_subsample", "laplacian_filter", "variance_map"]


def average_subsample(img, sx: int, sy: int) -> np.ndarray:
    """Shrink by averaging disjoint sx x sy blocks.

    Output pixel (u, v) is the mean of the block whose top-left corner is
    (sx*u, sy*v). Output dimensions are floor(w/sx) x floor(h/sy); trailing
    rows and columns that do not fill a block are dropped.
    """
    arr = as_image(img)
    if sx < 1 or sy < 1:
        raise ValueError(f"subsampling intervals must be positive, got sx={sx}, sy={sy}")
    height, width = arr.shape
    out_w = width // sx
    out_h = height // sy
    if out_w < 1 or out_h < 1:
        raise ValueError(f"image {width}x{height} smaller than one {sx}x{sy} block")
    blocks = arr[: out_h * sy, : out_w * sx].reshape(out_h, sy, out_w, sx)
    return blocks.mean(axis=(1, 3))


def laplacian_filter(img) -> np.ndarray:
    """Convolve with the 8-neighbor Laplacian (all ones, center -8).

    The input is zero-padded, so the output keeps the input shape and border
    values differ from a true interior response. Flat and affine regions map
    to zero on the interior; values are signed.
    """
    arr = as_image(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"Laplacian needs at least a 3x3 image, got {arr.shape[1]}x{arr.shape[0]}")
    padded = np.pad(arr, 1, mode="constant", constant_values=0.0)
    neighbors = (
        padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
        + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
    )
    return neighbors - 8.0 * arr


def variance_map(filtered, window_w: int, window_h: int) -> np.ndarray:
    """Variance of every window_w x window_h sliding window, one-pass form.

    Cell (u, v) covers the window whose top-left corner is (u, v) and equals
    mean(window**2) - mean(window)**2. Output dimensions follow the
    valid-window convention, (w - window_w + 1) x (h - window_h + 1).
    """
    arr = as_image(filtered)
    if window_w < 1 or window_h < 1:
        raise ValueError(f"window dimensions must be positive, got {window_w}x{window_h}")
    height, width = arr.shape
    if window_w > width or window_h > height:
        raise ValueError(f"window {window_w}x{window_h} larger than image {width}x{height}")
    windows = sliding_window_view(arr, (window_h, window_w))
    n = float(window_w * window_h)
    sum_sq = (windows * windows).sum(axis=(2, 3))
    total = windows.sum(axis=(2, 3))
    return sum_sq / n - (total / n) ** 2
