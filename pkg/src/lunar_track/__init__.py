"""Fixation-area and feature-point tracking for descent image sequences.

The processing chain: subsample and high-pass each frame, score local
contrast, fixate on the highest-variance regions as block-matching
templates, detect corner-like feature points inside them, and track those
points with iterative least-squares optical flow. Ships as a library plus
the ``lunar-track`` batch CLI and a seeded synthetic-terrain generator for
ground-truth evaluation.
"""

from .features import (
    DetectorConfig,
    FeaturePoint,
    StructureTensor,
    accept_pixel,
    detect_features,
    image_gradients,
    structure_tensor_at,
)
from .filters import average_subsample, laplacian_filter, variance_map
from .fixation import (
    ExtractionError,
    FixationTemplate,
    MatchResult,
    TemplateSpec,
    TemplateUpdate,
    extract_templates,
    match_template,
    update_templates,
)
from .image import (
    ImageFormatError,
    extract_subimage,
    load_image,
    sample_bilinear,
    save_image,
)
from .pipeline import (
    FrameReport,
    PipelineConfig,
    PipelineError,
    Track,
    TrackPoint,
    render_overlay,
    run_pipeline,
    write_tracks,
)
from .synth import SyntheticScene, generate_terrain, make_scene, render_frame, write_sequence
from .tracker import FlowConfig, TrackStatus, flow_system, track_all, track_feature

__version__ = "0.1.0"

__all__ = [
    "DetectorConfig",
    "ExtractionError",
    "FeaturePoint",
    "FixationTemplate",
    "FlowConfig",
    "FrameReport",
    "ImageFormatError",
    "MatchResult",
    "PipelineConfig",
    "PipelineError",
    "StructureTensor",
    "SyntheticScene",
    "TemplateSpec",
    "TemplateUpdate",
    "Track",
    "TrackPoint",
    "TrackStatus",
    "accept_pixel",
    "average_subsample",
    "detect_features",
    "extract_subimage",
    "extract_templates",
    "generate_terrain",
    "image_gradients",
    "laplacian_filter",
    "load_image",
    "make_scene",
    "match_template",
    "render_frame",
    "render_overlay",
    "run_pipeline",
    "sample_bilinear",
    "save_image",
    "structure_tensor_at",
    "track_all",
    "track_feature",
    "update_templates",
    "variance_map",
    "write_sequence",
    "write_tracks",
]
