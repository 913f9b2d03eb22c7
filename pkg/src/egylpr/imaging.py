"""Pixel-level primitives shared by every stage.

Gray images are 2D ``uint8`` arrays (row-major, ``img[y, x]``); binary
images are 2D ``bool`` arrays with True as foreground.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateHistogram

DARK = "dark"
BRIGHT = "bright"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box; ``x``/``y`` is the top-left pixel, ``w``/``h`` sizes."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box must be at least 1x1, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box origin must be non-negative, got ({self.x}, {self.y})")

    @property
    def x1(self):
        return self.x + self.w

    @property
    def y1(self):
        return self.y + self.h

    @property
    def area(self):
        return self.w * self.h

    @property
    def center(self):
        return (self.x + (self.w - 1) / 2.0, self.y + (self.h - 1) / 2.0)

    def fits(self, width, height):
        return self.x1 <= width and self.y1 <= height

    def contains(self, other):
        return (self.x <= other.x and self.y <= other.y
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def iou(self, other):
        iw = min(self.x1, other.x1) - max(self.x, other.x)
        ih = min(self.y1, other.y1) - max(self.y, other.y)
        if iw <= 0 or ih <= 0:
            return 0.0
        inter = iw * ih
        return inter / (self.area + other.area - inter)

    def shifted(self, dx, dy):
        return BBox(self.x + dx, self.y + dy, self.w, self.h)

    def as_list(self):
        return [self.x, self.y, self.w, self.h]


def iou(a, b):
    return a.iou(b)


@dataclass(frozen=True)
class Component:
    label: int
    area: int
    box: BBox
    sum_x: int
    sum_y: int

    @property
    def centroid(self):
        return (self.sum_x / self.area, self.sum_y / self.area)


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray
    components: list

    def __len__(self):
        return len(self.components)


def _check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("empty input")
    return img


def to_grayscale(rgb):
    """ITU-R 601 luma, rounded half up and clamped to [0, 255]."""
    a = np.asarray(rgb)
    if a.size == 0:
        raise ValueError("empty input")
    if a.ndim == 2:
        return np.clip(a, 0, 255).astype(np.uint8)
    if a.ndim != 3 or a.shape[2] < 3:
        raise ValueError(f"expected an (h, w, 3) array, got shape {a.shape}")
    c = a[..., :3].astype(np.int64)
    luma = (299 * c[..., 0] + 587 * c[..., 1] + 114 * c[..., 2] + 500) // 1000
    return np.clip(luma, 0, 255).astype(np.uint8)


def prewitt_gradients(img):
    """Raw (gy, gx) Prewitt responses, int32, replicate border."""
    img = _check_gray(img)
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError("prewitt needs an image of at least 3x3")
    return kernels.prewitt(img)


def _threshold_response(g, threshold):
    mag = np.abs(g)
    peak = int(mag.max())
    if peak == 0:
        return np.zeros(g.shape, dtype=bool)
    return mag >= threshold * peak


def prewitt_edges(img, threshold=0.25):
    """Binary (horizontal, vertical) edge maps.

    The horizontal map responds to horizontal lines (intensity change along
    y), the vertical map to vertical lines. Each is thresholded at
    ``threshold`` times its own peak magnitude.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    gy, gx = prewitt_gradients(img)
    return _threshold_response(gy, threshold), _threshold_response(gx, threshold)


def dilate(img, se_w, se_h):
    """Binary dilation by a centered ``se_w`` x ``se_h`` rectangle."""
    if se_w < 1 or se_h < 1 or se_w % 2 == 0 or se_h % 2 == 0:
        raise ValueError(f"structuring element must have odd sides >= 1, got {se_w}x{se_h}")
    src = np.asarray(img, dtype=bool)
    out = src.copy()
    for s in range(1, se_w // 2 + 1):
        out[:, s:] |= src[:, :-s]
        out[:, :-s] |= src[:, s:]
    if se_h > 1:
        src = out.copy()
        for s in range(1, se_h // 2 + 1):
            out[s:, :] |= src[:-s, :]
            out[:-s, :] |= src[s:, :]
    return out


def _between_class_exact(n0, s0, n1, s1):
    # proportional to w0 * w1 * (mu0 - mu1)^2, as an exact (num, den) pair
    d = n1 * s0 - n0 * s1
    return d * d, n0 * n1


def otsu_threshold(img):
    """Level maximizing between-class variance; class 0 is ``<= level``.

    Ties go to the smallest level. Candidates are screened in floating point
    and the winner is settled in exact integer arithmetic.
    """
    img = _check_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)[:256].astype(np.int64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogram()
    levels = np.arange(256, dtype=np.int64)
    n0 = np.cumsum(hist)
    s0 = np.cumsum(hist * levels)
    total_n, total_s = int(n0[-1]), int(s0[-1])
    n1 = total_n - n0
    s1 = total_s - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        d = n1.astype(np.float64) * s0 - n0.astype(np.float64) * s1
        score = np.where((n0 > 0) & (n1 > 0), d * d / (n0.astype(np.float64) * n1), 0.0)
    top = score.max()
    best_level, best = None, None
    for t in np.flatnonzero(score >= top * (1 - 1e-9)).tolist():
        num, den = _between_class_exact(int(n0[t]), int(s0[t]), int(n1[t]), int(s1[t]))
        if best is None or num * best[1] > best[0] * den:
            best_level, best = t, (num, den)
    return int(best_level)


def binarize(img, level, polarity=DARK):
    if not 0 <= level <= 255:
        raise ValueError(f"level must be in [0, 255], got {level}")
    img = np.asarray(img)
    if polarity == DARK:
        return img <= level
    if polarity == BRIGHT:
        return img > level
    raise ValueError(f"unknown polarity {polarity!r}")


def connected_components(img, connectivity=8):
    """Label foreground components, numbered 1.. in raster discovery order."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, stats = kernels.label(img, connectivity)
    comps = [
        Component(i + 1, int(a), BBox(int(x0), int(y0), int(x1 - x0 + 1), int(y1 - y0 + 1)),
                  int(sx), int(sy))
        for i, (a, x0, y0, x1, y1, sx, sy) in enumerate(stats.tolist())
    ]
    return ComponentLabeling(labels, comps)


def rotation_matrix(angle, cx, cy):
    """Inverse map (output -> source) for a counter-clockwise visual rotation."""
    t = np.deg2rad(angle)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, cx - c * cx + s * cy],
                     [s, c, cy - s * cx - c * cy]])


def _to_uint8(a):
    return np.clip(np.floor(a + 0.5), 0, 255).astype(np.uint8)


def rotate_about_center(img, angle, fill=255, center=None):
    """Rotate counter-clockwise by ``angle`` degrees, bilinear, same size.

    ``center`` defaults to the image center; samples falling outside the
    source take ``fill``.
    """
    img = _check_gray(img)
    if abs(angle) > 45:
        raise ValueError(f"|angle| must be <= 45, got {angle}")
    if angle == 0:
        return img.copy()
    h, w = img.shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    inv = rotation_matrix(angle, *center)
    return _to_uint8(kernels.warp_bilinear(img.astype(np.float64), inv, h, w, fill))


def _sample_coords(n_in, n_out):
    if n_out == 1:
        return np.array([(n_in - 1) / 2.0])
    return (np.arange(n_out, dtype=np.float64) * (n_in - 1)) / (n_out - 1)


def resize_bilinear(img, out_w, out_h):
    """Corner-aligned bilinear resize; uint8 in, uint8 out (else float)."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be >= 1, got {out_w}x{out_h}")
    a = np.asarray(img)
    h, w = a.shape
    if (out_w, out_h) == (w, h):
        return a.copy()
    src = a.astype(np.float64)
    xs, ys = _sample_coords(w, out_w), _sample_coords(h, out_h)
    x0 = np.minimum(np.floor(xs).astype(np.intp), w - 1)
    y0 = np.minimum(np.floor(ys).astype(np.intp), h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]
    top = src[y0][:, x0] + fx * (src[y0][:, x1] - src[y0][:, x0])
    bot = src[y1][:, x0] + fx * (src[y1][:, x1] - src[y1][:, x0])
    out = top + fy * (bot - top)
    if a.dtype == np.uint8:
        return _to_uint8(out)
    return out


def crop(img, box):
    a = np.asarray(img)
    h, w = a.shape[:2]
    if not box.fits(w, h):
        raise ValueError(f"box {box} outside {w}x{h} image")
    return a[box.y:box.y1, box.x:box.x1].copy()
