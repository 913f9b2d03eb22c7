"""Deterministic synthetic plates and 1920x1080 scenes with exact ground truth.

Plate geometry is computed in integer pixel arithmetic from the plate width,
so glyph boxes in the ground truth come from the same numbers that place the
ink. Scene composition (skew, illumination, noise) happens afterwards.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..alphabet import ALPHABET, format_plate_text, parse_plate_text
from ..imaging import BBox, rotation_matrix
from .glyphs import glyph, latin

FRAME_W, FRAME_H = 1920, 1080
WHITE, INK, BAND = 235, 25, 120
MAX_SKEW = 10.0


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    plate_text: str
    skew: float = 0.0
    scale: int = 280
    position: BBox = BBox(800, 480, 280, 140)
    noise_sigma: float = 0.0
    illumination: float = 0.0
    clutter: float = 0.0
    identity: int = 0
    subtitle: bool = True

    def __post_init__(self):
        parse_plate_text(self.plate_text)
        if abs(self.skew) > MAX_SKEW:
            raise ValueError(f"skew {self.skew} outside [-{MAX_SKEW}, {MAX_SKEW}]")
        if self.scale < 64:
            raise ValueError(f"plate width {self.scale} too small")
        if (self.position.w, self.position.h) != (self.scale, self.scale // 2):
            raise ValueError("position box must be scale x scale/2")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class GroundTruth:
    plate_box: BBox
    corners: list
    skew: float
    glyph_boxes: list
    glyph_labels: list
    plate_text: str
    identity: int = 0
    extra: dict = field(default_factory=dict)


def _plate_geometry(width, n_digits, n_letters):
    h = width // 2
    g = {
        "h": h,
        "frame": max(2, width // 64),
        "band_y1": h * 26 // 100,
        "glyph_y0": h * 34 // 100,
        "glyph_h": h * 40 // 100,
        "slot_w": width * 20 // 256,
        "spacing": max(2, width * 6 // 256),
        "center_gap": width * 32 // 256,
        "bar_w": max(2, width // 128),
        "bar_y0": h * 32 // 100,
        "bar_y1": h * 78 // 100,
        "sub_y0": h * 83 // 100,
        "sub_h": h * 10 // 100,
    }
    mid = width // 2
    sw, sp = g["slot_w"], g["spacing"]
    group_d = n_digits * sw + max(0, n_digits - 1) * sp
    x_d = mid - g["center_gap"] // 2 - group_d
    x_l = mid + g["center_gap"] // 2
    g["digit_x"] = [x_d + i * (sw + sp) for i in range(n_digits)]
    g["letter_x"] = [x_l + i * (sw + sp) for i in range(n_letters)]
    g["mid"] = mid
    return g


def _stamp(img, grid, x0, y0, cell_w_total, cell_h_total, value):
    """Paint a boolean grid scaled into [x0, x0+cell_w_total) x [y0, ...)."""
    gh, gw = grid.shape
    xs = [x0 + (c * cell_w_total) // gw for c in range(gw + 1)]
    ys = [y0 + (r * cell_h_total) // gh for r in range(gh + 1)]
    for r, c in zip(*np.nonzero(grid)):
        img[ys[r]:ys[r + 1], xs[c]:xs[c + 1]] = value
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    return BBox(xs[cols[0]], ys[rows[0]], xs[cols[-1] + 1] - xs[cols[0]],
                ys[rows[-1] + 1] - ys[rows[0]])


def _stamp_text(img, text, x_center, y0, char_h, value):
    char_w = char_h * 3 // 5
    gap = max(1, char_w // 2)
    total = len(text) * char_w + (len(text) - 1) * gap
    x = x_center - total // 2
    for ch in text:
        _stamp(img, latin(ch), x, y0, char_w, char_h, value)
        x += char_w + gap


def rasterize_plate(plate_text, width, subtitle=True):
    """Noise-free plate raster plus glyph boxes/labels in plate coordinates."""
    digits, letters = parse_plate_text(plate_text)
    if len(digits) > 4 or len(letters) > 4:
        raise ValueError("at most four digits and four letters fit on a plate")
    g = _plate_geometry(width, len(digits), len(letters))
    h = g["h"]
    img = np.full((h, width), WHITE, dtype=np.uint8)
    t = g["frame"]
    img[:t, :] = INK
    img[-t:, :] = INK
    img[:, :t] = INK
    img[:, -t:] = INK
    img[t:g["band_y1"], t:width - t] = BAND
    bx = g["mid"] - g["bar_w"] // 2
    img[g["bar_y0"]:g["bar_y1"], bx:bx + g["bar_w"]] = INK

    boxes, labels = [], []
    for sym, x in list(zip(digits, g["digit_x"])) + list(zip(letters, g["letter_x"])):
        boxes.append(_stamp(img, glyph(sym.id), x, g["glyph_y0"], g["slot_w"], g["glyph_h"], INK))
        labels.append(sym.id)

    if subtitle and g["sub_h"] >= 5:
        sw, sp = g["slot_w"], g["spacing"]
        if digits:
            cx = g["digit_x"][0] + (len(digits) * sw + (len(digits) - 1) * sp) // 2
            _stamp_text(img, "".join(s.latin for s in digits), cx, g["sub_y0"], g["sub_h"], INK)
        if letters:
            cx = g["letter_x"][0] + (len(letters) * sw + (len(letters) - 1) * sp) // 2
            _stamp_text(img, "".join(s.latin for s in letters), cx, g["sub_y0"], g["sub_h"], INK)
    return img, boxes, labels


def _noise(img, sigma, rng):
    if sigma <= 0:
        return img
    noisy = img.astype(np.float64) + rng.normal(0.0, sigma, img.shape)
    return np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)


def render_plate(spec):
    """Plate image (with the scene spec's noise) and ground truth in plate coordinates."""
    img, boxes, labels = rasterize_plate(spec.plate_text, spec.scale, spec.subtitle)
    h, w = img.shape
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    img = _noise(img, spec.noise_sigma, rng)
    corners = [(-0.5, -0.5), (w - 0.5, -0.5), (w - 0.5, h - 0.5), (-0.5, h - 0.5)]
    gt = GroundTruth(BBox(0, 0, w, h), corners, 0.0, boxes, labels, spec.plate_text, spec.identity)
    return img, gt


def plate_corners(box, skew):
    """Outer corners (TL, TR, BR, BL) of ``box`` rotated by ``skew`` about its center."""
    cx, cy = box.center
    t = np.deg2rad(skew)
    c, s = np.cos(t), np.sin(t)
    pts = [(box.x - 0.5, box.y - 0.5), (box.x1 - 0.5, box.y - 0.5),
           (box.x1 - 0.5, box.y1 - 0.5), (box.x - 0.5, box.y1 - 0.5)]
    out = []
    for px, py in pts:
        dx, dy = px - cx, py - cy
        out.append((float(cx + c * dx + s * dy), float(cy - s * dx + c * dy)))
    return out


def rotated_extent(box, skew):
    pts = np.array(plate_corners(box, skew))
    return pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max()


def _clutter(scene, rng, density, keep_out):
    n = int(round(density * 24))
    placed = []
    kx0, ky0, kx1, ky1 = keep_out
    bg = float(scene[0, 0])
    for _ in range(n):
        for _attempt in range(20):
            kind = rng.integers(0, 3)
            if kind == 0:
                aspect = rng.uniform(0.15, 0.9)
            elif kind == 1:
                aspect = rng.uniform(0.9, 1.15)
            else:
                aspect = rng.uniform(3.5, 10.0)
            long_side = rng.uniform(30, 480)
            if aspect >= 1:
                w, h = long_side, long_side / aspect
            else:
                w, h = long_side * aspect, long_side
            w, h = max(4, int(w)), max(4, int(h))
            if w >= FRAME_W or h >= FRAME_H:
                continue
            x = int(rng.integers(0, FRAME_W - w))
            y = int(rng.integers(0, FRAME_H - h))
            if x < kx1 and x + w > kx0 and y < ky1 and y + h > ky0:
                continue
            if any(x < px1 + 8 and x + w + 8 > px0 and y < py1 + 8 and y + h + 8 > py0
                   for px0, py0, px1, py1 in placed):
                continue
            level = rng.uniform(0, 255)
            if abs(level - bg) < 30:
                level = (level + 128) % 256
            scene[y:y + h, x:x + w] = level
            placed.append((x, y, x + w, y + h))
            break
    return placed


def render_scene(spec):
    """Composite the plate into a 1920x1080 scene; returns (image, ground truth)."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    box = spec.position
    ex0, ey0, ex1, ey1 = rotated_extent(box, spec.skew)
    if ex0 < 0 or ey0 < 0 or ex1 > FRAME_W - 1 or ey1 > FRAME_H - 1:
        raise ValueError("rotated plate does not fit in the frame")

    bg_level = float(rng.integers(90, 181))
    scene = np.full((FRAME_H, FRAME_W), bg_level, dtype=np.float64)
    margin = 40
    _clutter(scene, rng, spec.clutter, (ex0 - margin, ey0 - margin, ex1 + margin, ey1 + margin))

    plate, boxes, labels = rasterize_plate(spec.plate_text, spec.scale, spec.subtitle)
    ph, pw = plate.shape
    src = np.pad(plate.astype(np.float64), 1)
    alpha = np.pad(np.ones((ph, pw)), 1)

    rx0, ry0 = max(0, int(np.floor(ex0)) - 2), max(0, int(np.floor(ey0)) - 2)
    rx1, ry1 = min(FRAME_W, int(np.ceil(ex1)) + 3), min(FRAME_H, int(np.ceil(ey1)) + 3)
    cx, cy = box.center
    inv = rotation_matrix(spec.skew, cx, cy)
    # scene coords -> padded plate coords, for a region starting at (rx0, ry0)
    inv[:, 2] += np.array([1.0 - box.x, 1.0 - box.y]) + inv[:, :2] @ np.array([rx0, ry0])
    rh, rw = ry1 - ry0, rx1 - rx0
    p = kernels.warp_bilinear(src, inv, rh, rw, 0.0)
    a = kernels.warp_bilinear(alpha, inv, rh, rw, 0.0)
    region = scene[ry0:ry1, rx0:rx1]
    scene[ry0:ry1, rx0:rx1] = a * p + (1.0 - a) * region

    if spec.illumination:
        ramp = (np.arange(FRAME_W, dtype=np.float64) / (FRAME_W - 1) - 0.5) * spec.illumination
        scene += ramp[None, :]
    if spec.noise_sigma > 0:
        scene += rng.normal(0.0, spec.noise_sigma, scene.shape)
    img = np.clip(np.floor(scene + 0.5), 0, 255).astype(np.uint8)

    gt = GroundTruth(box, plate_corners(box, spec.skew), float(spec.skew), boxes, labels,
                     spec.plate_text, spec.identity)
    return img, gt


def random_plate_text(rng, n_digits=(1, 4), n_letters=(2, 3)):
    nd = int(rng.integers(n_digits[0], n_digits[1] + 1))
    nl = int(rng.integers(n_letters[0], n_letters[1] + 1))
    ds = ALPHABET.digits
    ls = ALPHABET.letters
    digits = [ds[int(i)] for i in rng.integers(0, len(ds), nd)]
    letters = [ls[int(i)] for i in rng.integers(0, len(ls), nl)]
    return format_plate_text(digits, letters)
