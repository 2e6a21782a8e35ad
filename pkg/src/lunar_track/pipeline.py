"""Whole-sequence orchestration: templates, features, tracks, and reports.

Per frame the pipeline runs the contrast filter chain, matches or replaces
fixation templates, then advances every live feature track with the flow
tracker, seeding each solve with its parent template's block displacement.
Feature detection runs only inside newborn templates, so the per-frame cost
stays proportional to the fixated area rather than the full frame. Results
are returned in memory and optionally written as CSV files plus overlay
images, byte-identically for identical inputs and config.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .features import DetectorConfig, FeaturePoint, detect_features
from .filters import average_subsample, laplacian_filter, variance_map
from .fixation import (
    ExtractionError,
    FixationTemplate,
    TemplateSpec,
    extract_templates,
    update_templates,
)
from .image import as_image, load_image, save_image
from .tracker import FlowConfig, track_feature

__all__ = [
    "PipelineError",
    "PipelineConfig",
    "TrackPoint",
    "Track",
    "FrameReport",
    "run_pipeline",
    "write_tracks",
    "write_reports",
    "render_overlay",
]

# tracker loss reasons mapped to the CSV status vocabulary
LOSS_STATUS = {
    "singular_system": "lost_singular",
    "out_of_bounds": "lost_oob",
    "high_residual": "lost_residual",
    "no_convergence": "lost_noconv",
}


class PipelineError(RuntimeError):
    """Sequence-level failure: bad frame set or nothing to track."""


class TrackPoint(NamedTuple):
    frame: int
    x: float
    y: float
    status: str


@dataclass
class Track:
    """One feature's trajectory: gapless frames from birth to loss.

    Every point is 'tracked' except possibly the last, which carries the
    loss status at the feature's final known position.
    """

    feature_id: int
    parent_template: int
    birth_frame: int
    points: list[TrackPoint] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class FrameReport:
    """Per-frame bookkeeping; live = previous live + new - lost."""

    frame_index: int
    active_templates: int
    template_displacements: dict[int, tuple[int, int]]
    live_tracks: int
    new_tracks: int
    lost_tracks: int


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the batch run needs, with flight-test defaults.

    sx/sy are the subsampling intervals, variance_window the local-variance
    window in map cells. residual_limit is the per-pixel SSD bound that
    keeps a template alive. overlay toggles rendering of annotated frames.
    """

    sx: int = 5
    sy: int = 5
    variance_window: tuple[int, int] = (4, 4)
    template: TemplateSpec = TemplateSpec()
    detector: DetectorConfig = DetectorConfig()
    flow: FlowConfig = FlowConfig()
    search_radius: int = 10
    residual_limit: float = 500.0
    overlay: bool = False

    def __post_init__(self):
        if self.sx < 1 or self.sy < 1:
            raise ValueError(f"subsampling intervals must be positive, got {self.sx}x{self.sy}")
        if self.variance_window[0] < 1 or self.variance_window[1] < 1:
            raise ValueError(f"variance window must be positive, got {self.variance_window}")
        if self.search_radius < 0:
            raise ValueError(f"search_radius must be >= 0, got {self.search_radius}")
        if self.residual_limit < 0:
            raise ValueError(f"residual_limit must be >= 0, got {self.residual_limit}")
        # raises ValueError when template dims don't divide by sx/sy
        self.template.resolve_margins(self.sx, self.sy)


def _variance_chain(frame: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    sub = average_subsample(frame, cfg.sx, cfg.sy)
    filtered = laplacian_filter(sub)
    return variance_map(filtered, cfg.variance_window[0], cfg.variance_window[1])


def _px(value: float) -> int:
    return int(math.floor(value + 0.5))


def _draw_rect(img: np.ndarray, x: int, y: int, w: int, h: int, value: float) -> None:
    height, width = img.shape
    x0, x1 = max(x, 0), min(x + w, width)
    y0, y1 = max(y, 0), min(y + h, height)
    if x0 >= x1 or y0 >= y1:
        return
    if 0 <= y < height:
        img[y, x0:x1] = value
    if 0 <= y + h - 1 < height:
        img[y + h - 1, x0:x1] = value
    if 0 <= x < width:
        img[y0:y1, x] = value
    if 0 <= x + w - 1 < width:
        img[y0:y1, x + w - 1] = value


def _draw_line(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, value: float) -> None:
    height, width = img.shape
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        if 0 <= x < width and 0 <= y < height:
            img[y, x] = value
        if x == x1 and y == y1:
            return
        doubled = 2 * err
        if doubled >= dy:
            err += dy
            x += sx
        if doubled <= dx:
            err += dx
            y += sy


def _draw_cross(img: np.ndarray, x: int, y: int, value: float) -> None:
    height, width = img.shape
    for ox, oy in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
        px, py = x + ox, y + oy
        if 0 <= px < width and 0 <= py < height:
            img[py, px] = value


def render_overlay(frame, templates: list[FixationTemplate], tracks: list[Track], frame_index: int) -> np.ndarray:
    """Annotate a frame copy: template boxes, track trails, position marks.

    Template rectangles get a one-pixel 255 stroke; each track live at this
    frame gets a polyline over its last five positions at 200 and a 3x3
    cross at 255 on the current one. Everything clips to the frame.
    """
    out = as_image(frame).copy()
    for tpl in templates:
        th, tw = tpl.patch.shape
        _draw_rect(out, _px(tpl.anchor[0]), _px(tpl.anchor[1]), tw, th, 255.0)
    current: list[tuple[float, float]] = []
    for track in tracks:
        pts = [p for p in track.points if p.frame <= frame_index]
        if not pts or pts[-1].frame != frame_index or pts[-1].status != "tracked":
            continue
        trail = pts[-5:]
        for a, b in zip(trail, trail[1:]):
            _draw_line(out, _px(a.x), _px(a.y), _px(b.x), _px(b.y), 200.0)
        current.append((pts[-1].x, pts[-1].y))
    for x, y in current:
        _draw_cross(out, _px(x), _px(y), 255.0)
    return out


def write_tracks(tracks: list[Track], path) -> None:
    """Serialize every track point, ordered by frame then feature id.

    Schema: ``frame,feature_id,parent_template,x,y,status`` with x and y in
    fixed 4-decimal form, so identical runs give identical bytes.
    """
    rows = [
        (point.frame, track.feature_id, track.parent_template, point.x, point.y, point.status)
        for track in tracks
        for point in track.points
    ]
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("frame,feature_id,parent_template,x,y,status\n")
        for frame, fid, parent, x, y, status in rows:
            fh.write(f"{frame},{fid},{parent},{x:.4f},{y:.4f},{status}\n")


def write_reports(reports: list[FrameReport], path) -> None:
    """Serialize per-frame counts: ``frame,active_templates,live_tracks,new_tracks,lost_tracks``."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("frame,active_templates,live_tracks,new_tracks,lost_tracks\n")
        for rep in reports:
            fh.write(
                f"{rep.frame_index},{rep.active_templates},{rep.live_tracks},"
                f"{rep.new_tracks},{rep.lost_tracks}\n"
            )


def run_pipeline(frames, cfg: PipelineConfig, out_dir=None) -> tuple[list[Track], list[FrameReport]]:
    """Process an ordered frame sequence end to end.

    Frame 0 seeds templates and feature tracks; every later frame matches
    templates, advances tracks (closing the children of lost templates with
    status lost_parent), and opens tracks inside replacement templates.
    When out_dir is given, writes tracks.csv, frames.csv, and (with
    cfg.overlay) one overlay_<frame>.pgm per frame. The run is deterministic
    for fixed inputs and config.
    """
    paths = [os.fspath(p) for p in frames]
    if len(paths) < 2:
        raise PipelineError(f"need at least two frames, got {len(paths)}")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    tracks: list[Track] = []
    track_by_id: dict[int, Track] = {}
    live: dict[int, FeaturePoint] = {}
    reports: list[FrameReport] = []
    feature_counter = [0]

    def open_tracks(new_templates: list[FixationTemplate], frame_index: int) -> int:
        opened = 0
        for tpl in new_templates:
            ax, ay = tpl.anchor
            for fp in detect_features(tpl.patch, cfg.detector, parent=tpl.id):
                pos = (ax + fp.pos[0], ay + fp.pos[1])
                fid = feature_counter[0]
                feature_counter[0] += 1
                track = Track(feature_id=fid, parent_template=tpl.id, birth_frame=frame_index)
                track.points.append(TrackPoint(frame_index, pos[0], pos[1], "tracked"))
                tracks.append(track)
                track_by_id[fid] = track
                live[fid] = dataclasses.replace(fp, pos=pos)
                opened += 1
        return opened

    def emit_overlay(frame: np.ndarray, templates: list[FixationTemplate], frame_index: int) -> None:
        if cfg.overlay and out_dir is not None:
            overlay = render_overlay(frame, templates, tracks, frame_index)
            save_image(overlay, os.path.join(out_dir, f"overlay_{frame_index:05d}.pgm"))

    frame = load_image(paths[0])
    shape = frame.shape
    vmap = _variance_chain(frame, cfg)
    try:
        templates = extract_templates(
            vmap, cfg.template, (cfg.sx, cfg.sy), frame, start_id=0, frame_index=0
        )
    except ExtractionError as exc:
        raise PipelineError(f"frame 0 yields no templates: {exc}") from exc
    next_template_id = len(templates)
    new_count = open_tracks(templates, 0)
    reports.append(
        FrameReport(
            frame_index=0,
            active_templates=len(templates),
            template_displacements={},
            live_tracks=len(live),
            new_tracks=new_count,
            lost_tracks=0,
        )
    )
    emit_overlay(frame, templates, 0)

    prev = frame
    for t in range(1, len(paths)):
        frame = load_image(paths[t])
        if frame.shape != shape:
            raise PipelineError(
                f"frame {t} is {frame.shape[1]}x{frame.shape[0]}, "
                f"frame 0 was {shape[1]}x{shape[0]}"
            )
        vmap = _variance_chain(frame, cfg)
        update = update_templates(
            templates,
            frame,
            vmap,
            cfg.template,
            (cfg.sx, cfg.sy),
            cfg.search_radius,
            cfg.residual_limit,
            frame_index=t,
            next_id=next_template_id,
        )
        next_template_id += len(update.new)

        lost_count = 0
        for fid in list(live):
            fp = live[fid]
            track = track_by_id[fid]
            seed = update.displacements.get(fp.parent_template)
            if seed is None:
                track.points.append(TrackPoint(t, fp.pos[0], fp.pos[1], "lost_parent"))
                del live[fid]
                lost_count += 1
                continue
            status = track_feature(prev, frame, fp, cfg.flow, d_init=(float(seed[0]), float(seed[1])))
            if status.tracked:
                pos = (fp.pos[0] + status.displacement[0], fp.pos[1] + status.displacement[1])
                live[fid] = dataclasses.replace(fp, pos=pos)
                track.points.append(TrackPoint(t, pos[0], pos[1], "tracked"))
            else:
                track.points.append(TrackPoint(t, fp.pos[0], fp.pos[1], LOSS_STATUS[status.reason]))
                del live[fid]
                lost_count += 1

        new_count = open_tracks(update.new, t)
        templates = update.active
        reports.append(
            FrameReport(
                frame_index=t,
                active_templates=len(templates),
                template_displacements=dict(update.displacements),
                live_tracks=len(live),
                new_tracks=new_count,
                lost_tracks=lost_count,
            )
        )
        emit_overlay(frame, templates, t)
        prev = frame

    if out_dir is not None:
        write_tracks(tracks, os.path.join(out_dir, "tracks.csv"))
        write_reports(reports, os.path.join(out_dir, "frames.csv"))
    return tracks, reports
