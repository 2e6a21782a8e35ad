"""
Feature points: corner detection inside templates
=================================================

Runs the eigenvalue-test detector inside each selected template and
reports the accepted points with their corner scores.
"""

from pathlib import Path

from lunar_track import (
    DetectorConfig,
    TemplateSpec,
    average_subsample,
    extract_templates,
    generate_terrain,
    laplacian_filter,
    save_image,
    variance_map,
)
from lunar_track.pipeline import Track, TrackPoint, render_overlay

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

frame = generate_terrain(seed=12, w=512, h=512, crater_count=70)
vmap = variance_map(laplacian_filter(average_subsample(frame, 5, 5)), 4, 4)
templates = extract_templates(vmap, TemplateSpec(count=5), (5, 5), frame)

# the detector tests every pixel's structure tensor: a pixel is kept when
# both eigenvalues clear the threshold, without ever taking a square root
from lunar_track import detect_features

cfg = DetectorConfig()  # 3x3 patch, threshold 1500, at most 10 points
marks = []
total = 0
for tpl in templates:
    points = detect_features(tpl.patch, cfg, parent=tpl.id)
    total += len(points)
    print(f"template {tpl.id} at {tpl.anchor}: {len(points)} feature points")
    for fp in points:
        x = tpl.anchor[0] + fp.pos[0]
        y = tpl.anchor[1] + fp.pos[1]
        print(f"    ({x:6.1f}, {y:6.1f})  smaller eigenvalue {fp.score:9.1f}")
        track = Track(feature_id=len(marks), parent_template=tpl.id, birth_frame=0)
        track.points.append(TrackPoint(0, x, y, "tracked"))
        marks.append(track)

print(f"{total} feature points across {len(templates)} templates")

overlay = render_overlay(frame, templates, marks, 0)
save_image(overlay, out_dir / "03_features.pgm")
print("wrote 03_features.pgm (rectangles = templates, crosses = feature points)")
