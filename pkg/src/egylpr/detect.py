"""Edge-based plate localization, rotation alignment and extraction.

Candidates come from pairing long vertical edge segments that are bridged,
top and bottom, by long horizontal segments. Geometry is estimated from
segment centroids so it holds for plates skewed by a few degrees. The
alignment step rotates a patch around the candidate and looks for the
plate's internal horizontal line (the lower edge of the top band).
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AlignmentLineNotFound
from .imaging import BBox, dilate, prewitt_gradients, rotation_matrix

PLATE_W, PLATE_H = 256, 128

# stats columns from kernels.label
_AREA, _X0, _Y0, _X1, _Y1, _SX, _SY = range(7)


@dataclass(frozen=True)
class DetectConfig:
    aspect_ratio: float = 2.0
    aspect_tol: float = 0.25
    min_plate_w: int = 120
    sweep_max: float = 10.0
    sweep_step: float = 0.5
    prewitt_threshold: float = 0.25
    minor_frac: float = 0.4       # drop lines shorter than this x min plate size
    nms_iou: float = 0.5
    max_candidates: int = 10

    def __post_init__(self):
        if not self.aspect_ratio > 1:
            raise ValueError("aspect_ratio must be > 1")
        if not 0 < self.aspect_tol < 1:
            raise ValueError("aspect_tol must be in (0, 1)")
        if self.min_plate_w < 8:
            raise ValueError("min_plate_w must be >= 8")
        if not self.sweep_step > 0 or not self.sweep_max > 0:
            raise ValueError("sweep_step and sweep_max must be > 0")
        n = self.sweep_max / self.sweep_step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("sweep_max must be a multiple of sweep_step")
        if self.sweep_max > 45:
            raise ValueError("sweep_max must be <= 45")
        if not 0 < self.prewitt_threshold <= 1:
            raise ValueError("prewitt_threshold must be in (0, 1]")
        if not 0 < self.nms_iou <= 1:
            raise ValueError("nms_iou must be in (0, 1]")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")

    @property
    def aspect_band(self):
        return (self.aspect_ratio * (1 - self.aspect_tol), self.aspect_ratio * (1 + self.aspect_tol))

    def sweep_angles(self):
        n = int(round(self.sweep_max / self.sweep_step))
        return [(n - i) * self.sweep_step for i in range(2 * n + 1)]


@dataclass(frozen=True)
class PlateCandidate:
    box: BBox
    angle: float
    score: float


@dataclass(frozen=True)
class ExtractedPlate:
    image: np.ndarray
    angle: float
    # 2x3 affine taking scene coordinates to extracted-plate coordinates
    transform: np.ndarray

    def map_points(self, pts):
        p = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
        return p @ self.transform[:, :2].T + self.transform[:, 2]

    def map_box(self, corners):
        """Axis-aligned pixel box (in plate coords) covering scene ``corners``."""
        q = self.map_points(corners)
        x0 = int(np.floor(q[:, 0].min() + 0.5))
        y0 = int(np.floor(q[:, 1].min() + 0.5))
        x1 = int(np.floor(q[:, 0].max() + 0.5))
        y1 = int(np.floor(q[:, 1].max() + 0.5))
        x0, y0 = max(0, x0), max(0, y0)
        x1, y1 = min(PLATE_W, max(x1, x0 + 1)), min(PLATE_H, max(y1, y0 + 1))
        if x1 <= x0 or y1 <= y0:
            return None
        return BBox(x0, y0, x1 - x0, y1 - y0)


def _edge_maps(img, threshold):
    gy, gx = prewitt_gradients(img)
    ay, ax = np.abs(gy), np.abs(gx)
    py, px = int(ay.max()), int(ax.max())
    h = ay >= threshold * py if py else np.zeros(ay.shape, bool)
    v = ax >= threshold * px if px else np.zeros(ax.shape, bool)
    return h, v


def _line_stats(mask, min_len, axis):
    _, stats = kernels.label(mask, 4)
    if len(stats) == 0:
        return stats
    if axis == 0:
        length = stats[:, _X1] - stats[:, _X0] + 1
    else:
        length = stats[:, _Y1] - stats[:, _Y0] + 1
    return stats[length >= min_len]


def _candidate_geometry(a, b, t, u):
    """Center, size and tilt of the box framed by lines a|b (left/right), t/u (top/bottom).

    Centroids are taken relative to an integer anchor so that translating the
    scene by whole pixels translates the result exactly.
    """
    ox, oy = int(a[_X0]), int(a[_Y0])

    def rel(s):
        n = int(s[_AREA])
        return ((int(s[_SX]) - ox * n) / n, (int(s[_SY]) - oy * n) / n)

    ca, cb, ct, cu = rel(a), rel(b), rel(t), rel(u)
    dx, dy = cb[0] - ca[0], cb[1] - ca[1]
    width = math.hypot(dx, dy)
    ex = (dx / width, dy / width)
    ey = (-ex[1], ex[0])
    height = (cu[0] - ct[0]) * ey[0] + (cu[1] - ct[1]) * ey[1]
    mab = ((ca[0] + cb[0]) / 2, (ca[1] + cb[1]) / 2)
    mtu = ((ct[0] + cu[0]) / 2, (ct[1] + cu[1]) / 2)
    px = mab[0] * ex[0] + mab[1] * ex[1]
    py = mtu[0] * ey[0] + mtu[1] * ey[1]
    cx = px * ex[0] + py * ey[0]
    cy = px * ex[1] + py * ey[1]
    tilt = math.degrees(math.atan2(-dy, dx))  # counter-clockwise skew of the plate
    return (ox, oy), (cx, cy), width, height, tilt


def _perimeter_score(edges, center, width, height, tilt):
    c, s = math.cos(math.radians(tilt)), math.sin(math.radians(tilt))
    ex, ey = np.array([c, -s]), np.array([s, c])
    hw, hh = width / 2.0, height / 2.0
    nw, nh = max(2, int(width)), max(2, int(height))
    tx = np.linspace(-hw, hw, nw)
    ty = np.linspace(-hh, hh, nh)
    local = np.concatenate([
        np.stack([tx, np.full(nw, -hh)], 1), np.stack([tx, np.full(nw, hh)], 1),
        np.stack([np.full(nh, -hw), ty], 1), np.stack([np.full(nh, hw), ty], 1),
    ])
    pts = np.asarray(center) + local[:, :1] * ex + local[:, 1:] * ey
    xi = np.floor(pts[:, 0] + 0.5).astype(np.intp)
    yi = np.floor(pts[:, 1] + 0.5).astype(np.intp)
    h, w = edges.shape
    ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
    hit = np.zeros(len(pts), dtype=bool)
    hit[ok] = edges[yi[ok], xi[ok]]
    return float(hit.mean())


def _nms(cands, iou_max):
    kept = []
    for c in cands:
        if all(c.box.iou(k.box) <= iou_max for k in kept):
            kept.append(c)
    return kept


def find_plate_candidates(img, cfg=None, debug_dir=None):
    """Plate candidates sorted by descending edge coverage of their outline."""
    cfg = cfg or DetectConfig()
    img = np.asarray(img)
    ih, iw = img.shape
    if iw < cfg.min_plate_w:
        raise ValueError(f"image narrower than min_plate_w ({iw} < {cfg.min_plate_w})")
    hmap, vmap = _edge_maps(img, cfg.prewitt_threshold)
    hd = dilate(hmap, 5, 1)
    vd = dilate(vmap, 1, 5)
    lo, hi = cfg.aspect_band
    min_h_len = cfg.minor_frac * cfg.min_plate_w
    min_v_len = cfg.minor_frac * cfg.min_plate_w / cfg.aspect_ratio
    H = _line_stats(hd, min_h_len, 0)
    V = _line_stats(vd, min_v_len, 1)
    cands = []
    if len(H) >= 2 and len(V) >= 2:
        edges = dilate(hmap | vmap, 3, 3)
        cands = _pair_lines(H, V, edges, cfg, iw, ih)
    cands.sort(key=lambda c: (-c.score, c.box.y, c.box.x, c.box.w, c.box.h))
    cands = _nms(cands, cfg.nms_iou)[:cfg.max_candidates]
    if debug_dir:
        _debug_detect(debug_dir, img, hmap, vmap, cands)
    return cands


def _pair_lines(H, V, edges, cfg, iw, ih):
    lo, hi = cfg.aspect_band
    tan_max = math.tan(math.radians(cfg.sweep_max + 2.0))
    vcx = V[:, _SX] / V[:, _AREA]
    vcy = V[:, _SY] / V[:, _AREA]
    vh = (V[:, _Y1] - V[:, _Y0] + 1).astype(np.float64)
    hcy = H[:, _SY] / H[:, _AREA]

    dx = vcx[None, :] - vcx[:, None]
    hmax = np.maximum(vh[:, None], vh[None, :])
    hmin = np.minimum(vh[:, None], vh[None, :])
    overlap = (np.minimum(V[:, None, _Y1], V[None, :, _Y1])
               - np.maximum(V[:, None, _Y0], V[None, :, _Y0]) + 1)
    ok = ((dx >= 0.8 * cfg.min_plate_w)
          & (hmin >= 0.6 * hmax)
          & (overlap >= 0.5 * hmin)
          & (np.abs(vcy[None, :] - vcy[:, None]) <= dx * tan_max + 0.2 * hmax)
          & (dx >= 0.7 * lo * hmax) & (dx <= 1.6 * hi * hmax))
    out = []
    for i, j in zip(*np.nonzero(ok)):
        a, b = V[i], V[j]
        tol = 0.12 * dx[i, j] + 3.0
        y_lo = min(a[_Y0], b[_Y0]) - 0.35 * hmax[i, j]
        y_hi = max(a[_Y1], b[_Y1]) + 0.35 * hmax[i, j]
        bridge = np.flatnonzero(
            (np.abs(H[:, _X0] - vcx[i]) <= tol) & (np.abs(H[:, _X1] - vcx[j]) <= tol)
            & (hcy >= y_lo) & (hcy <= y_hi))
        if len(bridge) < 2:
            continue
        bridge = bridge[np.argsort(hcy[bridge], kind="stable")]
        for p, ti in enumerate(bridge):
            for ui in bridge[p + 1:]:
                c = _make_candidate(a, b, H[ti], H[ui], edges, cfg, iw, ih)
                if c is not None:
                    out.append(c)
    return out


def _make_candidate(a, b, t, u, edges, cfg, iw, ih):
    lo, hi = cfg.aspect_band
    (ox, oy), (cx, cy), w, h, tilt = _candidate_geometry(a, b, t, u)
    if h <= 0 or abs(tilt) > cfg.sweep_max + 2.0:
        return None
    if not lo <= w / h <= hi or w < cfg.min_plate_w:
        return None
    bw, bh = int(math.floor(w + 0.5)), int(math.floor(h + 0.5))
    bx = ox + int(math.floor(cx - (bw - 1) / 2.0 + 0.5))
    by = oy + int(math.floor(cy - (bh - 1) / 2.0 + 0.5))
    if bx < 0 or by < 0 or bx + bw > iw or by + bh > ih:
        return None
    score = _perimeter_score(edges, (ox + cx, oy + cy), w, h, tilt)
    step = cfg.sweep_step
    angle = max(-cfg.sweep_max, min(cfg.sweep_max, round(-tilt / step) * step))
    return PlateCandidate(BBox(bx, by, bw, bh), float(angle), score)


def _patch_region(box):
    m = int(0.2 * box.h) + 8
    return box.x - m, box.y - m, box.w + 2 * m, box.h + 2 * m, m


class _Source:
    """Float copy of the image window that any rotation of a patch can sample."""

    def __init__(self, img, box, region):
        ox, oy, pw, ph = region
        cx, cy = box.center
        r = max(math.hypot(x - cx, y - cy) for x in (ox, ox + pw) for y in (oy, oy + ph)) + 2
        ih, iw = img.shape
        self.x0, self.y0 = max(0, int(cx - r)), max(0, int(cy - r))
        x1, y1 = min(iw, int(cx + r) + 2), min(ih, int(cy + r) + 2)
        self.data = np.asarray(img[self.y0:y1, self.x0:x1], dtype=np.float64)
        self.box, self.region = box, region

    def patch(self, angle):
        """Window ``region`` of the image rotated by ``angle`` about the box center."""
        ox, oy, pw, ph = self.region
        cx, cy = self.box.center
        inv = rotation_matrix(angle, cx, cy)
        inv[:, 2] += inv[:, :2] @ np.array([ox, oy], dtype=np.float64)
        inv[:, 2] -= np.array([self.x0, self.y0], dtype=np.float64)
        p = kernels.warp_bilinear(self.data, inv, ph, pw, 255.0)
        return np.clip(np.floor(p + 0.5), 0, 255).astype(np.uint8)


def _internal_line_offset(patch, box_in_patch, cfg):
    """Left-minus-right height difference of the internal line, or None."""
    bx, by, bw, bh = box_in_patch
    hmap, _ = _edge_maps(patch, cfg.prewitt_threshold)
    labels, stats = kernels.label(dilate(hmap, 5, 1), 4)
    if len(stats) == 0:
        return None
    width = stats[:, _X1] - stats[:, _X0] + 1
    cy = stats[:, _SY] / stats[:, _AREA]
    margin = 0.15 * bh
    keep = np.flatnonzero((width >= 0.5 * bw) & (cy > by + margin) & (cy < by + bh - 1 - margin))
    if len(keep) == 0:
        return None
    order = sorted(keep.tolist(), key=lambda k: (-width[k], -stats[k, _AREA], k))
    k = order[0]
    x0, x1 = int(stats[k, _X0]), int(stats[k, _X1])
    y0, y1 = int(stats[k, _Y0]), int(stats[k, _Y1])
    end = max(1, int(round(0.1 * (x1 - x0 + 1))))
    sub = labels[y0:y1 + 1, x0:x1 + 1] == k + 1
    rows = np.arange(y0, y1 + 1, dtype=np.float64)[:, None]
    left, right = sub[:, :end], sub[:, -end:]
    if not left.any() or not right.any():
        return None
    yl = (left * rows).sum() / left.sum()
    yr = (right * rows).sum() / right.sum()
    return float(yl - yr)


def alignment_sweep(img, cand, cfg=None):
    """(angle, height difference or None) for every sweep angle, +max down to -max."""
    cfg = cfg or DetectConfig()
    img = np.asarray(img)
    if not cand.box.fits(img.shape[1], img.shape[0]):
        raise ValueError("candidate box outside image")
    ox, oy, pw, ph, m = _patch_region(cand.box)
    local = (m, m, cand.box.w, cand.box.h)
    src = _Source(img, cand.box, (ox, oy, pw, ph))
    return [(a, _internal_line_offset(src.patch(a), local, cfg)) for a in cfg.sweep_angles()]


def alignment_angle(img, cand, cfg=None):
    """Sweep angle that levels the plate's internal horizontal line."""
    sweep = alignment_sweep(img, cand, cfg)
    found = [(abs(d), abs(a), a) for a, d in sweep if d is not None]
    if not found:
        raise AlignmentLineNotFound()
    return min(found)[2]


def _relocate(patch, box_in_patch, cfg):
    """Tighten the nominal box to the outermost long frame edges in the rotated patch."""
    bx, by, bw, bh = box_in_patch
    ph, pw = patch.shape
    hmap, vmap = _edge_maps(patch, cfg.prewitt_threshold)
    zone_y = max(2, int(0.15 * bh))
    zone_x = max(2, int(0.15 * bh))
    rows = hmap[:, bx:bx + bw].sum(axis=1) >= 0.5 * bw
    cols = vmap[by:by + bh, :].sum(axis=0) >= 0.5 * bh

    def first(flags, lo, hi):
        idx = np.flatnonzero(flags[max(0, lo):min(len(flags), hi)])
        return int(idx[0]) + max(0, lo) if len(idx) else None

    def last(flags, lo, hi):
        idx = np.flatnonzero(flags[max(0, lo):min(len(flags), hi)])
        return int(idx[-1]) + max(0, lo) if len(idx) else None

    top = first(rows, 0, by + zone_y)
    bot = last(rows, by + bh - zone_y, ph)
    left = first(cols, 0, bx + zone_x)
    right = last(cols, bx + bw - zone_x, pw)
    y0 = top + 1 if top is not None else by
    y1 = bot if bot is not None else by + bh
    x0 = left + 1 if left is not None else bx
    x1 = right if right is not None else bx + bw
    if y1 - y0 < bh // 2 or x1 - x0 < bw // 2:
        return box_in_patch
    return x0, y0, x1 - x0, y1 - y0


def extract_plate_ex(img, cand, angle, cfg=None):
    """Rotate about the candidate center, re-locate the frame, crop, resize to 256x128."""
    cfg = cfg or DetectConfig()
    from .imaging import resize_bilinear

    img = np.asarray(img)
    if not cand.box.fits(img.shape[1], img.shape[0]):
        raise ValueError("candidate box outside image")
    ox, oy, pw, ph, m = _patch_region(cand.box)
    patch = _Source(img, cand.box, (ox, oy, pw, ph)).patch(angle)
    bx, by, bw, bh = _relocate(patch, (m, m, cand.box.w, cand.box.h), cfg)
    if bw < 2 or bh < 2:
        raise ValueError("relocated plate box is degenerate")
    plate = resize_bilinear(patch[by:by + bh, bx:bx + bw], PLATE_W, PLATE_H)

    # scene -> rotated scene -> patch -> box -> resized
    cx, cy = cand.box.center
    t = math.radians(angle)
    c, s = math.cos(t), math.sin(t)
    fwd = np.array([[c, s], [-s, c]])
    off = np.array([cx, cy]) - fwd @ np.array([cx, cy]) - np.array([ox + bx, oy + by])
    scale = np.diag([(PLATE_W - 1) / (bw - 1), (PLATE_H - 1) / (bh - 1)])
    transform = np.hstack([scale @ fwd, (scale @ off)[:, None]])
    return ExtractedPlate(plate, float(angle), transform)


def extract_plate(img, cand, angle, cfg=None):
    return extract_plate_ex(img, cand, angle, cfg).image


def _debug_detect(debug_dir, img, hmap, vmap, cands):
    from .imfile import write_png

    os.makedirs(debug_dir, exist_ok=True)
    write_png(os.path.join(debug_dir, "edges_horizontal.png"), hmap)
    write_png(os.path.join(debug_dir, "edges_vertical.png"), vmap)
    over = np.stack([np.asarray(img)] * 3, axis=-1).copy()
    for rank, c in enumerate(cands):
        b = c.box
        color = (255, 0, 0) if rank == 0 else (255, 200, 0)
        over[b.y, b.x:b.x1] = color
        over[b.y1 - 1, b.x:b.x1] = color
        over[b.y:b.y1, b.x] = color
        over[b.y:b.y1, b.x1 - 1] = color
    write_png(os.path.join(debug_dir, "candidates.png"), over)
