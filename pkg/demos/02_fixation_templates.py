"""
Fixation areas: selecting and matching templates
================================================

Extracts the highest-contrast template regions from one frame, then
recovers a known camera shift by block-matching them in a second frame.
"""

from pathlib import Path

from lunar_track import (
    TemplateSpec,
    average_subsample,
    extract_templates,
    generate_terrain,
    laplacian_filter,
    match_template,
    render_overlay,
    save_image,
    variance_map,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# two viewports of one terrain, the second shifted so content moves (+6, +4)
terrain = generate_terrain(seed=12, w=640, h=640, crater_count=90)
frame0 = terrain[40:552, 40:552]
frame1 = terrain[36:548, 34:546]

# score contrast, then greedily take the best-separated template anchors
vmap = variance_map(laplacian_filter(average_subsample(frame0, 5, 5)), 4, 4)
templates = extract_templates(vmap, TemplateSpec(count=5), (5, 5), frame0)

print("selected fixation areas (20x20 px):")
for tpl in templates:
    print(f"  template {tpl.id}: anchor {tpl.anchor}")

overlay = render_overlay(frame0, templates, [], 0)
save_image(overlay, out_dir / "02_templates.pgm")
print("wrote 02_templates.pgm with the template rectangles burned in")

# exhaustive SSD search around each anchor finds the per-template motion
print("block-match displacements against the shifted frame (truth +6, +4):")
for tpl in templates:
    result = match_template(tpl, frame1, search_radius=10)
    if result is None:
        print(f"  template {tpl.id}: no placement inside the search window")
    else:
        per_px = result.residual / tpl.patch.size
        print(f"  template {tpl.id}: displacement {result.displacement}, "
              f"residual/px {per_px:.3f}")
