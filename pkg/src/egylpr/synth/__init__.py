"""Synthetic Egyptian plate scenes with ground truth."""

from .corpus import (CorpusRanges, ManifestEntry, generate_corpus, iter_scenes,
                     read_manifest, scene_spec)
from .render import (FRAME_H, FRAME_W, GroundTruth, SceneSpec, plate_corners,
                     rasterize_plate, render_plate, render_scene)

__all__ = [
    "CorpusRanges", "ManifestEntry", "generate_corpus", "iter_scenes", "read_manifest",
    "scene_spec", "FRAME_H", "FRAME_W", "GroundTruth", "SceneSpec", "plate_corners",
    "rasterize_plate", "render_plate", "render_scene",
]
