"""Synthetic crater terrain and ground-truth camera sequences.

Scenes are built from seeded value noise plus analytic craters (dark bowl,
bright rim), so every pixel is reproducible from the seed alone. A scene
carries a large base canvas and a trajectory of viewport offsets; rendering
a frame crops the viewport at its offset, using the same bilinear
interpolation as the tracker so subpixel ground truth is self-consistent.
Integer offsets reduce to exact pixel copies.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .image import as_image, sample_bilinear, save_image

__all__ = [
    "SyntheticScene",
    "generate_terrain",
    "render_frame",
    "make_scene",
    "write_sequence",
]

_NOISE_CELLS = (64, 32, 16, 8)
_NOISE_DECAY = 0.55
_RIM_WIDTH = 0.14  # rim gaussian sigma as a fraction of crater radius


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """A terrain canvas plus per-frame viewport offsets.

    trajectory[k] is the (x, y) offset of frame k's viewport inside the
    base canvas; content therefore moves by trajectory[k] - trajectory[k+1]
    between consecutive frames. Every placement must keep the full viewport
    inside the canvas.
    """

    base: np.ndarray
    trajectory: tuple[tuple[float, float], ...]
    viewport: tuple[int, int]

    def __post_init__(self):
        base = as_image(self.base)
        vw, vh = self.viewport
        if vw < 1 or vh < 1:
            raise ValueError(f"viewport must be positive, got {vw}x{vh}")
        height, width = base.shape
        for k, (ox, oy) in enumerate(self.trajectory):
            if ox < 0 or oy < 0 or ox > width - vw or oy > height - vh:
                raise ValueError(
                    f"frame {k} offset ({ox}, {oy}) puts the {vw}x{vh} viewport "
                    f"outside the {width}x{height} canvas"
                )


def _value_noise(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    """Multi-octave value noise in [0, 1]: coarse random grids, upsampled."""
    field = np.zeros((h, w))
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    amplitude = 1.0
    total = 0.0
    for cell in _NOISE_CELLS:
        grid = rng.uniform(0.0, 1.0, (h // cell + 2, w // cell + 2))
        grid_x, grid_y = np.meshgrid(xs / cell, ys / cell)
        field += amplitude * sample_bilinear(grid, grid_x, grid_y)
        total += amplitude
        amplitude *= _NOISE_DECAY
    return field / total


def _stamp_crater(field: np.ndarray, cx: float, cy: float, radius: float, depth: float, rim: float) -> None:
    height, width = field.shape
    reach = radius * (1.0 + 5.0 * _RIM_WIDTH)
    x0 = max(0, int(math.floor(cx - reach)))
    x1 = min(width, int(math.ceil(cx + reach)) + 1)
    y0 = max(0, int(math.floor(cy - reach)))
    y1 = min(height, int(math.ceil(cy + reach)) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    local_x = np.arange(x0, x1, dtype=np.float64) - cx
    local_y = np.arange(y0, y1, dtype=np.float64) - cy
    rr = np.sqrt(local_x[None, :] ** 2 + local_y[:, None] ** 2) / radius
    bowl = -depth * np.clip(1.0 - rr * rr, 0.0, None)
    ridge = rim * np.exp(-(((rr - 1.0) / _RIM_WIDTH) ** 2))
    field[y0:y1, x0:x1] += bowl + ridge


def generate_terrain(seed: int, w: int, h: int, crater_count: int) -> np.ndarray:
    """Deterministic crater terrain: value-noise ground plus stamped craters.

    Each crater draws a center, a radius in [4, 20] px, a floor depth and a
    rim brightness from the seeded generator, then adds a dark parabolic
    bowl with a sharp bright rim. Output intensities are clamped to
    [0, 255].
    """
    if w < 64 or h < 64:
        raise ValueError(f"terrain must be at least 64x64, got {w}x{h}")
    if crater_count < 0:
        raise ValueError(f"crater_count must be >= 0, got {crater_count}")
    rng = np.random.default_rng(seed)
    field = 60.0 + 130.0 * _value_noise(rng, w, h)
    for _ in range(crater_count):
        cx = rng.uniform(0.0, w)
        cy = rng.uniform(0.0, h)
        radius = rng.uniform(4.0, 20.0)
        depth = rng.uniform(50.0, 100.0)
        rim = rng.uniform(90.0, 170.0)
        _stamp_crater(field, cx, cy, radius, depth, rim)
    return np.clip(field, 0.0, 255.0)


def render_frame(scene: SyntheticScene, frame_index: int) -> tuple[np.ndarray, tuple[float, float]]:
    """Crop the viewport at the frame's trajectory offset.

    Integer offsets copy pixels directly; fractional offsets resample the
    canvas bilinearly. Returns the frame and the exact offset used.
    """
    if not 0 <= frame_index < len(scene.trajectory):
        raise ValueError(f"frame index {frame_index} outside trajectory of length {len(scene.trajectory)}")
    ox, oy = scene.trajectory[frame_index]
    vw, vh = scene.viewport
    if float(ox).is_integer() and float(oy).is_integer():
        ix, iy = int(ox), int(oy)
        frame = scene.base[iy : iy + vh, ix : ix + vw].copy()
    else:
        grid_x, grid_y = np.meshgrid(ox + np.arange(vw, dtype=np.float64), oy + np.arange(vh, dtype=np.float64))
        frame = sample_bilinear(scene.base, grid_x, grid_y)
    return frame, (float(ox), float(oy))


def make_scene(
    seed: int,
    frame_count: int,
    step: tuple[float, float],
    viewport: tuple[int, int] = (512, 512),
    craters_per_pixel: float = 1.0 / 3500.0,
) -> SyntheticScene:
    """Build a scene whose content translates by ``step`` every frame.

    The viewport walks the canvas opposite to the content motion, starting
    wherever keeps every placement inside; the canvas is sized to fit the
    whole walk plus a margin. Crater count scales with canvas area.
    """
    if frame_count < 1:
        raise ValueError(f"frame_count must be >= 1, got {frame_count}")
    dx, dy = float(step[0]), float(step[1])
    vw, vh = viewport
    span_x = abs(dx) * (frame_count - 1)
    span_y = abs(dy) * (frame_count - 1)
    canvas_w = vw + int(math.ceil(span_x)) + 8
    canvas_h = vh + int(math.ceil(span_y)) + 8
    start_x = 4.0 + max(0.0, dx * (frame_count - 1))
    start_y = 4.0 + max(0.0, dy * (frame_count - 1))
    crater_count = int(round(canvas_w * canvas_h * craters_per_pixel))
    base = generate_terrain(seed, canvas_w, canvas_h, crater_count)
    trajectory = tuple((start_x - k * dx, start_y - k * dy) for k in range(frame_count))
    return SyntheticScene(base=base, trajectory=trajectory, viewport=(vw, vh))


def write_sequence(scene: SyntheticScene, out_dir) -> list[str]:
    """Render every frame to ``frame_<k>.pgm`` plus a ``truth.csv``.

    truth.csv holds one row per frame with the absolute viewport offset,
    4-decimal fixed point: ``frame,dx,dy``. Content motion from frame k to
    k+1 is the difference offset[k] - offset[k+1]. Returns the frame paths
    in order.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths: list[str] = []
    offsets: list[tuple[float, float]] = []
    for k in range(len(scene.trajectory)):
        frame, offset = render_frame(scene, k)
        path = os.path.join(out_dir, f"frame_{k:05d}.pgm")
        save_image(frame, path)
        paths.append(path)
        offsets.append(offset)
    with open(os.path.join(out_dir, "truth.csv"), "w", encoding="ascii") as fh:
        fh.write("frame,dx,dy\n")
        for k, (ox, oy) in enumerate(offsets):
            fh.write(f"{k},{ox:.4f},{oy:.4f}\n")
    return paths
