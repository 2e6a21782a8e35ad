"""Fixation-area templates: selection from the variance map and block tracking.

A fixation area is a high-contrast region worth staring at. Anchors are
picked greedily from the variance map (highest cell first, away from map
edges and from each other), the corresponding full-resolution patches become
templates, and each template is followed frame to frame by exhaustive SSD
block matching. Templates that can no longer be matched are replaced by
fresh picks from the current frame's variance map.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .image import as_image, extract_subimage

__all__ = [
    "TemplateSpec",
    "FixationTemplate",
    "MatchResult",
    "TemplateUpdate",
    "ExtractionError",
    "extract_templates",
    "match_template",
    "update_templates",
]


class ExtractionError(RuntimeError):
    """No admissible template site exists in the variance map."""


@dataclass(frozen=True)
class TemplateSpec:
    """Template geometry and selection constraints.

    Dimensions are full-resolution pixels and must be divisible by the
    subsampling intervals in effect. border_margin and min_separation are in
    variance-map cells; when None they default to the template extent in
    cells and twice that extent, which keeps selected templates disjoint.
    """

    template_w: int = 20
    template_h: int = 20
    count: int = 5
    border_margin: int | None = None
    min_separation: int | None = None

    def __post_init__(self):
        if self.template_w < 1 or self.template_h < 1:
            raise ValueError(f"template dims must be positive, got {self.template_w}x{self.template_h}")
        if self.count < 1:
            raise ValueError(f"template count must be >= 1, got {self.count}")
        if self.border_margin is not None and self.border_margin < 0:
            raise ValueError(f"border_margin must be >= 0, got {self.border_margin}")
        if self.min_separation is not None and self.min_separation < 1:
            raise ValueError(f"min_separation must be >= 1, got {self.min_separation}")

    def resolve_margins(self, sx: int, sy: int) -> tuple[int, int]:
        """Return (border_margin, min_separation) in cells, applying defaults."""
        if self.template_w % sx or self.template_h % sy:
            raise ValueError(
                f"template dims {self.template_w}x{self.template_h} not divisible by "
                f"subsampling intervals {sx}x{sy}"
            )
        extent = max(self.template_w // sx, self.template_h // sy)
        margin = self.border_margin if self.border_margin is not None else extent
        separation = self.min_separation if self.min_separation is not None else 2 * extent
        return margin, separation


@dataclass(frozen=True, eq=False)
class FixationTemplate:
    """A tracked patch: stable id, appearance, anchor, and liveness.

    The patch keeps the appearance captured at birth; matching moves the
    anchor but never refreshes the pixels, so the template cannot drift.
    """

    id: int
    patch: np.ndarray
    anchor: tuple[int, int]
    birth_frame: int
    status: str = "active"


@dataclass(frozen=True)
class MatchResult:
    """Best block-match: integer displacement and its summed squared error."""

    displacement: tuple[int, int]
    residual: float


@dataclass(frozen=True, eq=False)
class TemplateUpdate:
    """Outcome of one update round over a frame.

    active holds the survivors (anchors advanced) followed by replacements;
    lost holds the retired templates with status 'lost'; new is the
    replacement subset of active; displacements maps each survivor id to its
    matched integer displacement.
    """

    active: list[FixationTemplate]
    lost: list[FixationTemplate]
    new: list[FixationTemplate]
    displacements: dict[int, tuple[int, int]]


def extract_templates(
    vmap,
    spec: TemplateSpec,
    subsample: tuple[int, int],
    frame,
    start_id: int = 0,
    frame_index: int = 0,
    exclude: tuple[tuple[float, float], ...] = (),
    allow_empty: bool = False,
) -> list[FixationTemplate]:
    """Greedily pick the highest-variance admissible cells as templates.

    A cell (u, v) is admissible when it is at least border_margin cells from
    every map edge, its full-resolution patch fits inside the frame, and it
    is at least min_separation cells (Chebyshev) from every already-selected
    cell and from every position in ``exclude`` (cell units, used to keep
    replacements away from surviving templates). Ties in variance are broken
    in row-major map order. The anchor of cell (u, v) is (sx*u, sy*v).

    Returns up to spec.count templates with consecutive ids from start_id.
    A shortfall triggers a RuntimeWarning; finding none raises
    ExtractionError unless allow_empty is set.
    """
    cells = as_image(vmap)
    frame_arr = as_image(frame)
    sx, sy = int(subsample[0]), int(subsample[1])
    if sx < 1 or sy < 1:
        raise ValueError(f"subsampling intervals must be positive, got {sx}x{sy}")
    margin, separation = spec.resolve_margins(sx, sy)
    map_h, map_w = cells.shape
    frame_h, frame_w = frame_arr.shape

    order = np.argsort(-cells.ravel(), kind="stable")
    taken: list[tuple[int, int]] = []
    keep_away = [(float(u), float(v)) for u, v in exclude]
    picked: list[FixationTemplate] = []
    for flat in order:
        if len(picked) == spec.count:
            break
        v, u = divmod(int(flat), map_w)
        if u < margin or v < margin or u > map_w - 1 - margin or v > map_h - 1 - margin:
            continue
        ax, ay = sx * u, sy * v
        if ax + spec.template_w > frame_w or ay + spec.template_h > frame_h:
            continue
        if any(max(abs(u - ou), abs(v - ov)) < separation for ou, ov in taken):
            continue
        if any(max(abs(u - ou), abs(v - ov)) < separation for ou, ov in keep_away):
            continue
        patch = extract_subimage(frame_arr, (ax, ay), spec.template_w, spec.template_h)
        picked.append(
            FixationTemplate(
                id=start_id + len(picked),
                patch=patch,
                anchor=(ax, ay),
                birth_frame=frame_index,
                status="active",
            )
        )
        taken.append((u, v))

    if not picked and not allow_empty:
        raise ExtractionError("no admissible template site in the variance map")
    if len(picked) < spec.count:
        warnings.warn(
            f"only {len(picked)} of {spec.count} requested templates admissible",
            RuntimeWarning,
            stacklevel=2,
        )
    return picked


def match_template(tpl: FixationTemplate, frame, search_radius: int) -> MatchResult | None:
    """Exhaustive SSD search for the template around its anchor.

    Scans every integer displacement with |dx| <= radius and |dy| <= radius
    whose placement lies fully inside the frame, and returns the one with
    the smallest sum of squared differences. Ties are broken by smaller
    |dx| + |dy|, then by row-major scan order (dy before dx). Returns None
    when no placement fits, in which case the caller marks the template
    lost.
    """
    frame_arr = as_image(frame)
    if search_radius < 0:
        raise ValueError(f"search_radius must be >= 0, got {search_radius}")
    patch = tpl.patch
    th, tw = patch.shape
    fh, fw = frame_arr.shape
    ax, ay = tpl.anchor
    best_key = None
    best: MatchResult | None = None
    for dy in range(-search_radius, search_radius + 1):
        y = ay + dy
        if y < 0 or y + th > fh:
            continue
        for dx in range(-search_radius, search_radius + 1):
            x = ax + dx
            if x < 0 or x + tw > fw:
                continue
            diff = frame_arr[y : y + th, x : x + tw] - patch
            ssd = float((diff * diff).sum())
            key = (ssd, abs(dx) + abs(dy), dy, dx)
            if best_key is None or key < best_key:
                best_key = key
                best = MatchResult(displacement=(dx, dy), residual=ssd)
    return best


def update_templates(
    templates: list[FixationTemplate],
    frame,
    vmap,
    spec: TemplateSpec,
    subsample: tuple[int, int],
    search_radius: int,
    residual_limit: float,
    frame_index: int = 0,
    next_id: int | None = None,
) -> TemplateUpdate:
    """Match every active template against a new frame and refill losses.

    A template survives when a placement exists and its per-pixel SSD
    (residual / (w*h)) stays within residual_limit; its anchor advances by
    the matched displacement. Failed templates are retired and replacements
    are extracted from the frame's variance map, keeping min_separation
    against the survivors, until the active count is restored to spec.count
    or candidates run out.
    """
    frame_arr = as_image(frame)
    sx, sy = int(subsample[0]), int(subsample[1])
    if next_id is None:
        next_id = max((tpl.id for tpl in templates), default=-1) + 1

    survivors: list[FixationTemplate] = []
    lost: list[FixationTemplate] = []
    displacements: dict[int, tuple[int, int]] = {}
    area = float(spec.template_w * spec.template_h)
    for tpl in templates:
        match = match_template(tpl, frame_arr, search_radius)
        if match is None or match.residual / area > residual_limit:
            lost.append(dataclasses.replace(tpl, status="lost"))
            continue
        dx, dy = match.displacement
        survivors.append(dataclasses.replace(tpl, anchor=(tpl.anchor[0] + dx, tpl.anchor[1] + dy)))
        displacements[tpl.id] = (dx, dy)

    shortfall = spec.count - len(survivors)
    new: list[FixationTemplate] = []
    if shortfall > 0:
        occupied = tuple((tpl.anchor[0] / sx, tpl.anchor[1] / sy) for tpl in survivors)
        new = extract_templates(
            vmap,
            dataclasses.replace(spec, count=shortfall),
            (sx, sy),
            frame_arr,
            start_id=next_id,
            frame_index=frame_index,
            exclude=occupied,
            allow_empty=True,
        )
    return TemplateUpdate(active=survivors + new, lost=lost, new=new, displacements=displacements)
