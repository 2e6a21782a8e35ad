"""Batch command line: run the tracking pipeline or generate synthetic data.

Two subcommands. ``run`` processes an ordered frame sequence (a directory or
a glob of PGM/PNG files) and writes tracks.csv, frames.csv, and optional
overlays. ``synth`` writes a seeded synthetic descent sequence with ground
truth. Exit codes: 0 success, 1 usage or config error, 2 input I/O error,
3 pipeline failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import sys
from pathlib import Path

from .features import DetectorConfig
from .fixation import TemplateSpec
from .image import ImageFormatError
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .synth import make_scene, write_sequence
from .tracker import FlowConfig

__all__ = ["main", "build_config", "ConfigError"]


class ConfigError(ValueError):
    """A config file or parameter value the pipeline cannot accept."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# every config-file key, with its parser
_KEY_TYPES = {
    "sx": int,
    "sy": int,
    "variance_window_w": int,
    "variance_window_h": int,
    "template_w": int,
    "template_h": int,
    "template_count": int,
    "border_margin": int,
    "min_separation": int,
    "lambda_t": float,
    "patch_radius": int,
    "nms_radius": int,
    "max_features": int,
    "feature_min_separation": int,
    "window_radius": int,
    "max_iterations": int,
    "epsilon": float,
    "det_min": float,
    "max_residual": float,
    "search_radius": int,
    "residual_limit": float,
    "overlay": _parse_bool,
}


def read_config_file(path) -> dict[str, object]:
    """Parse flat ``key = value`` lines into typed values.

    # starts a comment, blank lines are ignored. Unknown keys, empty
    values, and unparsable values all raise ConfigError with the file
    position.
    """
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _KEY_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if not value:
                raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
            try:
                values[key] = _KEY_TYPES[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def build_config(file_values: dict[str, object] | None = None, overrides: dict[str, object] | None = None) -> PipelineConfig:
    """Assemble a PipelineConfig from typed config values plus overrides.

    Overrides (CLI flags) win over file values; None overrides are
    skipped. Raises ConfigError for unknown keys or values the pipeline
    rejects.
    """
    typed: dict[str, object] = {}
    for source in (file_values, overrides):
        for key, value in (source or {}).items():
            if key not in _KEY_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            if value is not None:
                typed[key] = value

    def pick(key: str, default):
        return typed.get(key, default)

    try:
        template = TemplateSpec(
            template_w=pick("template_w", 20),
            template_h=pick("template_h", 20),
            count=pick("template_count", 5),
            border_margin=pick("border_margin", None),
            min_separation=pick("min_separation", None),
        )
        detector = DetectorConfig(
            patch_radius=pick("patch_radius", 1),
            lambda_t=pick("lambda_t", 1500.0),
            nms_radius=pick("nms_radius", 1),
            max_features=pick("max_features", 10),
            min_separation=pick("feature_min_separation", None),
        )
        flow = FlowConfig(
            window_radius=pick("window_radius", 3),
            max_iterations=pick("max_iterations", 20),
            epsilon=pick("epsilon", 0.01),
            det_min=pick("det_min", 1e-6),
            max_residual=pick("max_residual", 100.0),
        )
        return PipelineConfig(
            sx=pick("sx", 5),
            sy=pick("sy", 5),
            variance_window=(pick("variance_window_w", 4), pick("variance_window_h", 4)),
            template=template,
            detector=detector,
            flow=flow,
            search_radius=pick("search_radius", 10),
            residual_limit=pick("residual_limit", 500.0),
            overlay=bool(pick("overlay", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def collect_frames(spec: str) -> list[str]:
    """Resolve a frame source: a directory of PGM/PNG files, or a glob.

    Either way the result is sorted by file name, which defines frame
    order.
    """
    path = Path(spec)
    if path.is_dir():
        return sorted(str(p) for p in path.iterdir() if p.suffix.lower() in (".pgm", ".png"))
    return sorted(glob.glob(spec))


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        self.exit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lunar-track", description="Fixation-area and feature-point tracking over image sequences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="track an image sequence and write CSV results")
    run_p.add_argument("--frames", required=True, help="directory of .pgm/.png frames, or a glob pattern")
    run_p.add_argument("--out", required=True, help="output directory for tracks.csv, frames.csv, overlays")
    run_p.add_argument("--config", help="flat key=value config file")
    run_p.add_argument("--overlay", action="store_true", help="write annotated overlay PGMs")
    run_p.add_argument("--sx", type=int, help="subsampling interval in x")
    run_p.add_argument("--sy", type=int, help="subsampling interval in y")
    run_p.add_argument("--template-size", type=int, help="square template side in pixels")
    run_p.add_argument("--template-count", type=int, help="number of fixation templates")
    run_p.add_argument("--lambda-t", type=float, help="feature acceptance threshold")
    run_p.add_argument("--search-radius", type=int, help="block-match search radius in pixels")
    run_p.add_argument("--window-radius", type=int, help="flow window radius in pixels")

    synth_p = sub.add_parser("synth", help="write a synthetic descent sequence with ground truth")
    synth_p.add_argument("--seed", type=int, required=True, help="terrain seed")
    synth_p.add_argument("--frames", type=int, required=True, help="number of frames")
    synth_p.add_argument("--dx", type=float, required=True, help="content motion per frame, x")
    synth_p.add_argument("--dy", type=float, required=True, help="content motion per frame, y")
    synth_p.add_argument("--out", required=True, help="output directory")
    return parser


def _cmd_run(args) -> int:
    overrides = {
        "sx": args.sx,
        "sy": args.sy,
        "template_w": args.template_size,
        "template_h": args.template_size,
        "template_count": args.template_count,
        "lambda_t": args.lambda_t,
        "search_radius": args.search_radius,
        "window_radius": args.window_radius,
        "overlay": True if args.overlay else None,
    }
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, overrides)
    except OSError as exc:
        print(f"lunar-track: cannot read config: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"lunar-track: config error: {exc}", file=sys.stderr)
        return 1

    try:
        frames = collect_frames(args.frames)
    except OSError as exc:
        print(f"lunar-track: cannot list frames: {exc}", file=sys.stderr)
        return 2
    if len(frames) < 2:
        print(f"lunar-track: need at least two frames, found {len(frames)} in {args.frames!r}", file=sys.stderr)
        return 2

    try:
        run_pipeline(frames, cfg, args.out)
    except (ImageFormatError, OSError) as exc:
        print(f"lunar-track: I/O error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"lunar-track: pipeline failure: {exc}", file=sys.stderr)
        return 3
    return 0


def _cmd_synth(args) -> int:
    try:
        scene = make_scene(args.seed, args.frames, (args.dx, args.dy))
    except ValueError as exc:
        print(f"lunar-track: bad synth parameters: {exc}", file=sys.stderr)
        return 1
    try:
        write_sequence(scene, args.out)
    except OSError as exc:
        print(f"lunar-track: cannot write sequence: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_synth(args)
