"""Frame-to-frame feature tracking by least-squares optical flow.

Each feature owns a square window. Under brightness constancy the window's
displacement d satisfies G d = e, where G sums gradient products over the
window and e sums gradient-weighted temporal differences. One solve only
handles sub-pixel motion, so the solve is iterated: resample the next frame
at the current estimate, solve for a correction, repeat until the correction
drops below epsilon. All sampling is bilinear, gradients come from the
previous frame only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import FeaturePoint, StructureTensor
from .image import as_image, sample_bilinear

__all__ = [
    "FlowConfig",
    "TrackStatus",
    "flow_system",
    "track_feature",
    "track_all",
]


@dataclass(frozen=True)
class FlowConfig:
    """Knobs for the per-feature flow solver.

    window_radius r gives the (2r+1)**2 feature window; iteration stops when
    the correction |delta d| falls below epsilon or max_iterations is spent.
    det_min scales the singularity guard (reject when |det G| <= det_min *
    trace(G)**2); max_residual bounds the mean per-pixel squared intensity
    error of an accepted track.
    """

    window_radius: int = 3
    max_iterations: int = 20
    epsilon: float = 0.01
    det_min: float = 1e-6
    max_residual: float = 100.0

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValueError(f"window_radius must be >= 1, got {self.window_radius}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.det_min > 0:
            raise ValueError(f"det_min must be > 0, got {self.det_min}")
        if self.max_residual < 0:
            raise ValueError(f"max_residual must be >= 0, got {self.max_residual}")


_LOST_REASONS = ("singular_system", "out_of_bounds", "high_residual", "no_convergence")


@dataclass(frozen=True)
class TrackStatus:
    """Outcome of tracking one feature across one frame pair.

    Either tracked (displacement and residual set, reason None) or lost
    (reason one of singular_system, out_of_bounds, high_residual,
    no_convergence).
    """

    tracked: bool
    displacement: tuple[float, float] | None = None
    residual: float | None = None
    reason: str | None = None

    @classmethod
    def ok(cls, displacement: tuple[float, float], residual: float) -> "TrackStatus":
        return cls(tracked=True, displacement=displacement, residual=residual)

    @classmethod
    def lost(cls, reason: str) -> "TrackStatus":
        if reason not in _LOST_REASONS:
            raise ValueError(f"unknown loss reason {reason!r}")
        return cls(tracked=False, reason=reason)


def _window_grid(cx: float, cy: float, radius: int) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.meshgrid(cx + offsets, cy + offsets)


def _window_inside(img: np.ndarray, cx: float, cy: float, reach: float) -> bool:
    height, width = img.shape
    return (
        cx - reach >= 0.0
        and cy - reach >= 0.0
        and cx + reach <= width - 1.0
        and cy + reach <= height - 1.0
    )


def flow_system(prev, next, center, d_current, cfg: FlowConfig) -> tuple[StructureTensor, np.ndarray]:
    """Build the least-squares system G d = e for one feature window.

    G sums gradient products of the previous frame over the window around
    ``center``; e sums -gradient * temporal difference, where the temporal
    difference compares the next frame resampled at center + d_current
    against the previous frame at center. Subpixel positions are evaluated
    by bilinear interpolation; gradients are central differences of
    bilinearly sampled intensities, so at integer centers G matches the
    detection-time structure tensor of the same patch exactly.
    """
    prev_arr = as_image(prev)
    next_arr = as_image(next)
    cx, cy = float(center[0]), float(center[1])
    dx, dy = float(d_current[0]), float(d_current[1])
    r = cfg.window_radius
    if not _window_inside(prev_arr, cx, cy, r + 1.0):
        raise ValueError(f"flow window at ({cx}, {cy}) leaves the previous frame")
    if not _window_inside(next_arr, cx + dx, cy + dy, float(r)):
        raise ValueError(f"shifted flow window at ({cx + dx}, {cy + dy}) leaves the next frame")

    grid_x, grid_y = _window_grid(cx, cy, r)
    gx = (sample_bilinear(prev_arr, grid_x + 1.0, grid_y) - sample_bilinear(prev_arr, grid_x - 1.0, grid_y)) / 2.0
    gy = (sample_bilinear(prev_arr, grid_x, grid_y + 1.0) - sample_bilinear(prev_arr, grid_x, grid_y - 1.0)) / 2.0
    temporal = sample_bilinear(next_arr, grid_x + dx, grid_y + dy) - sample_bilinear(prev_arr, grid_x, grid_y)

    tensor = StructureTensor(
        a=float((gx * gx).sum()),
        b=float((gx * gy).sum()),
        c=float((gy * gy).sum()),
    )
    e = np.array([-float((gx * temporal).sum()), -float((gy * temporal).sum())])
    return tensor, e


def _window_residual(prev: np.ndarray, next: np.ndarray, cx: float, cy: float, d: np.ndarray, r: int) -> float:
    grid_x, grid_y = _window_grid(cx, cy, r)
    diff = sample_bilinear(next, grid_x + d[0], grid_y + d[1]) - sample_bilinear(prev, grid_x, grid_y)
    return float((diff * diff).mean())


def track_feature(
    prev,
    next,
    fp: FeaturePoint,
    cfg: FlowConfig,
    d_init: tuple[float, float] = (0.0, 0.0),
) -> TrackStatus:
    """Iteratively solve for one feature's displacement between two frames.

    Starts from d_init (zero by default; the pipeline seeds it with the
    parent template's block-match displacement), solves the 2x2 system by
    Cramer's rule, and accumulates corrections until |delta d| < epsilon.
    Every failure mode is encoded in the returned TrackStatus rather than
    raised. A converged displacement is accepted only if the mean per-pixel
    squared residual stays within cfg.max_residual; the tracked position is
    fp.pos + d, subpixel.
    """
    prev_arr = as_image(prev)
    next_arr = as_image(next)
    cx, cy = float(fp.pos[0]), float(fp.pos[1])
    r = cfg.window_radius
    if not _window_inside(prev_arr, cx, cy, r + 1.0):
        return TrackStatus.lost("out_of_bounds")

    d = np.array([float(d_init[0]), float(d_init[1])])
    for _ in range(cfg.max_iterations):
        if not _window_inside(next_arr, cx + d[0], cy + d[1], float(r)):
            return TrackStatus.lost("out_of_bounds")
        tensor, e = flow_system(prev_arr, next_arr, (cx, cy), (d[0], d[1]), cfg)
        det = tensor.det()
        if abs(det) <= cfg.det_min * tensor.trace() ** 2:
            return TrackStatus.lost("singular_system")
        step = np.array(
            [
                (tensor.c * e[0] - tensor.b * e[1]) / det,
                (tensor.a * e[1] - tensor.b * e[0]) / det,
            ]
        )
        d += step
        if math.hypot(step[0], step[1]) < cfg.epsilon:
            if not _window_inside(next_arr, cx + d[0], cy + d[1], float(r)):
                return TrackStatus.lost("out_of_bounds")
            residual = _window_residual(prev_arr, next_arr, cx, cy, d, r)
            if residual > cfg.max_residual:
                return TrackStatus.lost("high_residual")
            return TrackStatus.ok((float(d[0]), float(d[1])), residual)
    return TrackStatus.lost("no_convergence")


def track_all(
    prev,
    next,
    fps: list[FeaturePoint],
    cfg: FlowConfig,
    ids: list[int] | None = None,
    seeds: list[tuple[float, float]] | None = None,
) -> list[tuple[int, TrackStatus]]:
    """Track a batch of features independently, preserving input order.

    ids defaults to the list positions; seeds gives a per-feature initial
    displacement (all zeros by default).
    """
    if ids is None:
        ids = list(range(len(fps)))
    if seeds is None:
        seeds = [(0.0, 0.0)] * len(fps)
    if len(ids) != len(fps) or len(seeds) != len(fps):
        raise ValueError("ids and seeds must match the number of features")
    prev_arr = as_image(prev)
    next_arr = as_image(next)
    return [
        (fid, track_feature(prev_arr, next_arr, fp, cfg, d_init=seed))
        for fid, fp, seed in zip(ids, fps, seeds)
    ]
