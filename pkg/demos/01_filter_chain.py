"""
Contrast scoring: subsample, Laplacian, variance map
====================================================

Walks one frame through the three-stage filter chain that scores local
contrast, saving a PGM of every stage so the progression is visible.
"""

from pathlib import Path

import numpy as np

from lunar_track import (
    average_subsample,
    generate_terrain,
    laplacian_filter,
    save_image,
    variance_map,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)


def save_normalized(arr, path):
    """Stretch an arbitrary float image onto 0..255 for viewing."""
    lo, hi = float(arr.min()), float(arr.max())
    scaled = (arr - lo) * (255.0 / (hi - lo)) if hi > lo else np.zeros_like(arr)
    save_image(scaled, path)
    print(f"  wrote {path.name}  ({arr.shape[1]}x{arr.shape[0]}, range {lo:.1f}..{hi:.1f})")


# a seeded cratered surface stands in for descent imagery
frame = generate_terrain(seed=12, w=512, h=512, crater_count=70)
print("input frame:")
save_normalized(frame, out_dir / "01_input.pgm")

# stage 1: block averaging shrinks the frame by the sampling intervals,
# suppressing pixel noise before any differentiation
cells = average_subsample(frame, 5, 5)
print("block average (5x5 cells):")
save_normalized(cells, out_dir / "01_subsampled.pgm")

# stage 2: the 8-neighbor Laplacian responds to intensity structure and
# cancels flat or uniformly sloped regions
edges = laplacian_filter(cells)
print("Laplacian of the averaged image:")
save_normalized(edges, out_dir / "01_laplacian.pgm")

# stage 3: local variance of the Laplacian over a sliding window; peaks
# mark the highest-contrast neighborhoods, the candidate fixation areas
vmap = variance_map(edges, 4, 4)
print("variance map (4x4 window):")
save_normalized(vmap, out_dir / "01_variance.pgm")

peak = np.unravel_index(int(np.argmax(vmap)), vmap.shape)
print(f"strongest cell: ({peak[1]}, {peak[0]}) in map coords, "
      f"({peak[1] * 5}, {peak[0] * 5}) in frame pixels, variance {vmap[peak]:.1f}")
