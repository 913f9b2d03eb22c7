"""Seeded scene corpora and their line-delimited manifests."""

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from ..imaging import BBox
from ..imfile import write_pgm
from .render import FRAME_H, FRAME_W, SceneSpec, random_plate_text, render_scene, rotated_extent

MANIFEST_NAME = "manifest.jsonl"
_SCENE_STREAM, _TEXT_STREAM, _RENDER_STREAM = 0, 1, 2


@dataclass(frozen=True)
class CorpusRanges:
    skew: tuple = (-10.0, 10.0)
    skew_step: float = 0.0          # 0 = continuous; otherwise a grid
    scale: tuple = (200, 360)
    noise: tuple = (0.0, 4.0)
    illumination: tuple = (-30.0, 30.0)
    clutter: tuple = (0.2, 1.0)
    n_digits: tuple = (1, 4)
    n_letters: tuple = (2, 3)
    views: int = 1                  # scenes per plate identity
    subtitle: bool = True

    def __post_init__(self):
        if self.skew[0] > self.skew[1] or max(abs(self.skew[0]), abs(self.skew[1])) > 10:
            raise ValueError(f"bad skew range {self.skew}")
        if self.scale[0] < 120 or self.scale[0] > self.scale[1] or self.scale[1] > 600:
            raise ValueError(f"bad scale range {self.scale}")
        if self.views < 1:
            raise ValueError("views must be >= 1")
        if self.noise[0] < 0 or self.noise[0] > self.noise[1]:
            raise ValueError(f"bad noise range {self.noise}")

    @classmethod
    def from_dict(cls, d):
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown corpus range keys: {sorted(unknown)}")
        for k, v in known.items():
            if isinstance(v, list):
                known[k] = tuple(v)
        return cls(**known)


def _rng(seed, *keys):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *keys]))


def scene_spec(seed, index, ranges):
    """SceneSpec for scene ``index``; depends only on (seed, index, ranges)."""
    rng = _rng(seed, index, _SCENE_STREAM)
    identity = index // ranges.views
    text = random_plate_text(_rng(seed, identity, _TEXT_STREAM), ranges.n_digits, ranges.n_letters)

    if ranges.skew_step > 0:
        lo = int(np.ceil(ranges.skew[0] / ranges.skew_step - 1e-9))
        hi = int(np.floor(ranges.skew[1] / ranges.skew_step + 1e-9))
        skew = float(rng.integers(lo, hi + 1) * ranges.skew_step)
    else:
        skew = float(rng.uniform(*ranges.skew))
    scale = int(rng.integers(ranges.scale[0] // 2, ranges.scale[1] // 2 + 1)) * 2
    probe = BBox(0, 0, scale, scale // 2)
    x0, y0, x1, y1 = rotated_extent(probe, skew)
    pad = 24
    xmin, xmax = int(np.ceil(-x0)) + pad, int(np.floor(FRAME_W - 1 - x1)) - pad
    ymin, ymax = int(np.ceil(-y0)) + pad, int(np.floor(FRAME_H - 1 - y1)) - pad
    x = int(rng.integers(xmin, xmax + 1))
    y = int(rng.integers(ymin, ymax + 1))
    noise = float(rng.uniform(*ranges.noise))
    illum = float(rng.uniform(*ranges.illumination))
    clutter = float(rng.uniform(*ranges.clutter))
    render_seed = int(_rng(seed, index, _RENDER_STREAM).integers(0, 2**63))
    return SceneSpec(seed=render_seed, plate_text=text, skew=skew, scale=scale,
                     position=BBox(x, y, scale, scale // 2), noise_sigma=noise,
                     illumination=illum, clutter=clutter, identity=identity,
                     subtitle=ranges.subtitle)


def iter_scenes(n, seed, ranges=None, start=0):
    """Yield (index, spec, image, ground truth) without touching the disk."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    ranges = ranges or CorpusRanges()
    for index in range(start, start + n):
        spec = scene_spec(seed, index, ranges)
        img, gt = render_scene(spec)
        yield index, spec, img, gt


def spec_record(spec):
    d = asdict(spec)
    d["position"] = spec.position.as_list()
    return d


def manifest_record(index, image_path, spec, gt):
    return {
        "index": index,
        "image": image_path,
        "plate_text": gt.plate_text,
        "identity": gt.identity,
        "skew": gt.skew,
        "box": gt.plate_box.as_list(),
        "corners": [list(c) for c in gt.corners],
        "glyphs": [{"label": lab, "box": b.as_list()}
                   for lab, b in zip(gt.glyph_labels, gt.glyph_boxes)],
        "spec": spec_record(spec),
    }


def generate_corpus(n, seed, ranges, out_dir, start=0):
    """Render ``n`` scenes as PGM files plus ``manifest.jsonl``; returns its path."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    if not os.path.isdir(out_dir):
        parent = os.path.dirname(os.path.abspath(out_dir))
        if not os.path.isdir(parent):
            raise FileNotFoundError(f"output parent directory does not exist: {parent}")
        os.mkdir(out_dir)
    lines = []
    for index, spec, img, gt in iter_scenes(n, seed, ranges, start):
        name = f"scene_{index:06d}.pgm"
        path = os.path.join(out_dir, name)
        try:
            write_pgm(path, img)
        except OSError as exc:
            raise OSError(f"writing {path}: {exc}") from exc
        lines.append(json.dumps(manifest_record(index, name, spec, gt), ensure_ascii=False,
                                sort_keys=True))
    manifest = os.path.join(out_dir, MANIFEST_NAME)
    from ..imfile import atomic_write_bytes

    atomic_write_bytes(manifest, ("\n".join(lines) + "\n").encode("utf-8"))
    return manifest


@dataclass
class ManifestEntry:
    index: int
    image: str
    plate_text: str
    identity: int
    skew: float
    box: BBox
    corners: list
    glyph_boxes: list
    glyph_labels: list
    record: dict

    @property
    def ground_truth(self):
        from .render import GroundTruth

        return GroundTruth(self.box, self.corners, self.skew, self.glyph_boxes,
                           self.glyph_labels, self.plate_text, self.identity)


def read_manifest(path):
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                r = json.loads(line)
                out.append(ManifestEntry(
                    index=int(r["index"]),
                    image=os.path.join(base, r["image"]),
                    plate_text=r["plate_text"],
                    identity=int(r.get("identity", 0)),
                    skew=float(r["skew"]),
                    box=BBox(*r["box"]),
                    corners=[tuple(c) for c in r["corners"]],
                    glyph_boxes=[BBox(*g["box"]) for g in r["glyphs"]],
                    glyph_labels=[g["label"] for g in r["glyphs"]],
                    record=r,
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad manifest record ({exc})") from exc
    return out
