"""Corner-style feature detection inside fixation sub-images.

Candidate pixels are scored with the 2x2 structure tensor of the local
gradient field. Acceptance uses a root-free polynomial test equivalent to
thresholding the smaller eigenvalue, so the exhaustive scan involves no
transcendental operations; the square root appears only when ranking the
accepted pixels for non-maximum suppression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import as_image

__all__ = [
    "DetectorConfig",
    "StructureTensor",
    "FeaturePoint",
    "image_gradients",
    "structure_tensor_at",
    "accept_pixel",
    "detect_features",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs for the sub-image feature detector.

    patch_radius r gives the (2r+1) x (2r+1) summation patch; lambda_t is
    the acceptance threshold on the smaller tensor eigenvalue; nms_radius is
    the Chebyshev suppression radius; max_features caps the points returned
    per sub-image; min_separation (pixels, Chebyshev) optionally spreads the
    survivors further apart.
    """

    patch_radius: int = 1
    lambda_t: float = 1500.0
    nms_radius: int = 1
    max_features: int = 10
    min_separation: int | None = None

    def __post_init__(self):
        if self.patch_radius < 1:
            raise ValueError(f"patch_radius must be >= 1, got {self.patch_radius}")
        if not self.lambda_t > 0:
            raise ValueError(f"lambda_t must be > 0, got {self.lambda_t}")
        if self.nms_radius < 1:
            raise ValueError(f"nms_radius must be >= 1, got {self.nms_radius}")
        if self.max_features < 1:
            raise ValueError(f"max_features must be >= 1, got {self.max_features}")
        if self.min_separation is not None and self.min_separation < 1:
            raise ValueError(f"min_separation must be >= 1 when set, got {self.min_separation}")


@dataclass(frozen=True)
class StructureTensor:
    """Entries of the symmetric gradient-product matrix [[a, b], [b, c]].

    a = sum of grad_x**2, b = sum of grad_x * grad_y, c = sum of grad_y**2,
    each taken over the same pixel patch.
    """

    a: float
    b: float
    c: float

    def min_eigenvalue(self) -> float:
        """Smaller eigenvalue, ((a + c) - sqrt((a - c)**2 + 4 b**2)) / 2."""
        return 0.5 * ((self.a + self.c) - math.sqrt((self.a - self.c) ** 2 + 4.0 * self.b * self.b))

    def det(self) -> float:
        return self.a * self.c - self.b * self.b

    def trace(self) -> float:
        return self.a + self.c


@dataclass(frozen=True)
class FeaturePoint:
    """A detected point: position, eigenvalue score, tensor, owning template.

    pos is (x, y) in the coordinates of whatever image the detector ran on;
    it is integer-valued at detection and becomes subpixel once tracked.
    """

    pos: tuple[float, float]
    score: float
    tensor: StructureTensor
    parent_template: int


def image_gradients(img) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradients, halved: (I(x+1) - I(x-1)) / 2.

    Returns (grad_x, grad_y) with the same shape as the input. The one-pixel
    border of both outputs is zero; downstream patches must exclude it.
    """
    arr = as_image(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"gradients need at least a 3x3 image, got {arr.shape[1]}x{arr.shape[0]}")
    grad_x = np.zeros_like(arr)
    grad_y = np.zeros_like(arr)
    grad_x[1:-1, 1:-1] = (arr[1:-1, 2:] - arr[1:-1, :-2]) / 2.0
    grad_y[1:-1, 1:-1] = (arr[2:, 1:-1] - arr[:-2, 1:-1]) / 2.0
    return grad_x, grad_y


def structure_tensor_at(grad_x, grad_y, center, patch_radius: int) -> StructureTensor:
    """Sum gradient products over the (2r+1)**2 patch around an integer center.

    The patch must lie inside the gradient interior (at least one pixel away
    from every border, where the gradients are zero-filled).
    """
    gx = np.asarray(grad_x, dtype=np.float64)
    gy = np.asarray(grad_y, dtype=np.float64)
    if gx.shape != gy.shape:
        raise ValueError(f"gradient shapes differ: {gx.shape} vs {gy.shape}")
    cx, cy = int(center[0]), int(center[1])
    r = int(patch_radius)
    if r < 1:
        raise ValueError(f"patch_radius must be >= 1, got {patch_radius}")
    height, width = gx.shape
    if cx - r < 1 or cy - r < 1 or cx + r > width - 2 or cy + r > height - 2:
        raise ValueError(
            f"patch radius {r} at ({cx}, {cy}) touches the gradient border of {width}x{height}"
        )
    wx = gx[cy - r : cy + r + 1, cx - r : cx + r + 1]
    wy = gy[cy - r : cy + r + 1, cx - r : cx + r + 1]
    # products build fresh contiguous arrays, keeping the summation order
    # identical wherever the same patch is summed elsewhere in the pipeline
    a = float((wx * wx).sum())
    b = float((wx * wy).sum())
    c = float((wy * wy).sum())
    return StructureTensor(a, b, c)


def accept_pixel(t: StructureTensor, lambda_t: float) -> bool:
    """Root-free acceptance test: (a - l)(c - l) - b**2 > 0 and a > l.

    Equivalent to requiring the smaller eigenvalue of [[a, b], [b, c]] to
    exceed lambda_t, without computing any eigenvalue or square root.
    """
    p = (t.a - lambda_t) * (t.c - lambda_t) - t.b * t.b
    return p > 0.0 and t.a > lambda_t


def detect_features(sub, cfg: DetectorConfig, parent: int = -1) -> list[FeaturePoint]:
    """Exhaustively scan a sub-image for corner-like points.

    Every pixel whose patch fits inside the gradient interior is tested with
    accept_pixel; accepted pixels are scored by the smaller eigenvalue, then
    thinned by non-maximum suppression: a point survives only if no other
    accepted pixel within nms_radius (Chebyshev) has a higher score, or an
    equal score at an earlier row-major position. Survivors are sorted by
    descending score (row-major on ties), optionally forced min_separation
    apart, and truncated to max_features. Positions are sub-image
    coordinates.
    """
    arr = as_image(sub)
    r = cfg.patch_radius
    height, width = arr.shape
    lo = r + 1
    if width < 2 * lo + 1 or height < 2 * lo + 1:
        raise ValueError(
            f"sub-image {width}x{height} too small for patch_radius {r}; need at least "
            f"{2 * lo + 1}x{2 * lo + 1}"
        )
    grad_x, grad_y = image_gradients(arr)

    accepted: list[tuple[int, int, float, StructureTensor]] = []
    for cy in range(lo, height - lo):
        for cx in range(lo, width - lo):
            tensor = structure_tensor_at(grad_x, grad_y, (cx, cy), r)
            if accept_pixel(tensor, cfg.lambda_t):
                accepted.append((cx, cy, tensor.min_eigenvalue(), tensor))

    nms = cfg.nms_radius
    survivors = []
    for i, (cx, cy, score, tensor) in enumerate(accepted):
        beaten = False
        for j, (ox, oy, other, _) in enumerate(accepted):
            if j == i or abs(ox - cx) > nms or abs(oy - cy) > nms:
                continue
            if other > score or (other == score and j < i):
                beaten = True
                break
        if not beaten:
            survivors.append((cx, cy, score, tensor))

    survivors.sort(key=lambda s: (-s[2], s[1], s[0]))
    picked: list[tuple[int, int, float, StructureTensor]] = []
    for cand in survivors:
        if len(picked) == cfg.max_features:
            break
        if cfg.min_separation is not None and any(
            max(abs(cand[0] - p[0]), abs(cand[1] - p[1])) < cfg.min_separation for p in picked
        ):
            continue
        picked.append(cand)

    return [
        FeaturePoint(pos=(float(cx), float(cy)), score=score, tensor=tensor, parent_template=parent)
        for cx, cy, score, tensor in picked
    ]
