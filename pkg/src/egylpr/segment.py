"""Character segmentation on an extracted plate.

Otsu binarization (ink is dark), a 3x3 dilation to merge ripples and
detached marks, 8-connected labeling, ratio filtering, then each surviving
box grows ring by ring until no more ink is captured and is cropped tight.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogram
from .imaging import DARK, BBox, binarize, connected_components, dilate, otsu_threshold, resize_bilinear


@dataclass(frozen=True)
class SegmentConfig:
    min_h_frac: float = 0.25
    max_h_frac: float = 0.85
    min_aspect: float = 0.8       # glyph h / w
    max_aspect: float = 6.0
    expand_step: int = 1
    working_width: int = 256
    bottom_band: float = 0.2      # components entirely in this bottom fraction are subtitle text

    def __post_init__(self):
        if not 0 < self.min_h_frac < self.max_h_frac:
            raise ValueError("need 0 < min_h_frac < max_h_frac")
        if not 0 < self.min_aspect < self.max_aspect:
            raise ValueError("need 0 < min_aspect < max_aspect")
        if self.expand_step < 1:
            raise ValueError("expand_step must be >= 1")
        if self.working_width < 8:
            raise ValueError("working_width must be >= 8")
        if not 0 <= self.bottom_band < 1:
            raise ValueError("bottom_band must be in [0, 1)")


@dataclass(frozen=True)
class CharacterCrop:
    mask: np.ndarray
    source_box: BBox
    order: int
    component_box: BBox = None    # the dilated component before expansion


def tight_crop(mask, box):
    """Minimal box around the foreground of ``mask`` inside ``box``."""
    sub = np.asarray(mask, dtype=bool)[box.y:box.y1, box.x:box.x1]
    rows = np.flatnonzero(sub.any(axis=1))
    if len(rows) == 0:
        raise ValueError("tight_crop of an empty box")
    cols = np.flatnonzero(sub.any(axis=0))
    tb = BBox(box.x + int(cols[0]), box.y + int(rows[0]),
              int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))
    m = sub[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1].copy()
    return CharacterCrop(m, tb, 0)


def _grow(box, step, w, h):
    x0, y0 = max(0, box.x - step), max(0, box.y - step)
    x1, y1 = min(w, box.x1 + step), min(h, box.y1 + step)
    return BBox(x0, y0, x1 - x0, y1 - y0)


def _expand(fg, box, step):
    h, w = fg.shape
    count = int(fg[box.y:box.y1, box.x:box.x1].sum())
    while True:
        nb = _grow(box, step, w, h)
        if nb == box:
            return box
        n = int(fg[nb.y:nb.y1, nb.x:nb.x1].sum())
        if n == count:
            return box
        box, count = nb, n


def _keep(comp, plate_h, cfg):
    b = comp.box
    frac = b.h / plate_h
    if not cfg.min_h_frac <= frac <= cfg.max_h_frac:
        return False
    if not cfg.min_aspect <= b.h / b.w <= cfg.max_aspect:
        return False
    return b.y < plate_h * (1 - cfg.bottom_band)


def segment_characters(plate, cfg=None, debug_dir=None):
    """Ordered glyph crops (leftmost first); empty for a blank plate."""
    cfg = cfg or SegmentConfig()
    plate = np.asarray(plate)
    ph, pw = plate.shape
    if pw != cfg.working_width:
        wh = max(1, int(round(ph * cfg.working_width / pw)))
        work = resize_bilinear(plate, cfg.working_width, wh)
    else:
        work = plate
    wh, ww = work.shape
    try:
        level = otsu_threshold(work)
    except DegenerateHistogram:
        return []
    fg = binarize(work, level, DARK)
    lab = connected_components(dilate(fg, 3, 3), 8)
    # frame, band and other plate-sized structures must not feed the expansion
    structural = [c.label for c in lab.components
                  if c.box.h > cfg.max_h_frac * wh or c.box.w > ww // 2]
    ink = fg & ~np.isin(lab.labels, structural) if structural else fg
    crops = []
    for comp in lab.components:
        if not _keep(comp, wh, cfg):
            continue
        box = _expand(ink, comp.box, cfg.expand_step)
        if not ink[box.y:box.y1, box.x:box.x1].any():
            continue
        c = tight_crop(ink, box)
        crops.append((c, comp.box))
    # a box grown into a neighbour can swallow it; keep only maximal boxes
    boxes = [c.source_box for c, _ in crops]
    keep = [i for i, b in enumerate(boxes)
            if not any(j != i and o.contains(b) and (o != b or j < i) for j, o in enumerate(boxes))]
    crops = sorted((crops[i] for i in keep), key=lambda cb: (cb[0].source_box.x, cb[0].source_box.y))
    sx, sy = pw / ww, ph / wh
    out = []
    for order, (c, comp_box) in enumerate(crops):
        sb = c.source_box
        if (ww, wh) != (pw, ph):
            x0, y0 = int(sb.x * sx), int(sb.y * sy)
            sb = BBox(x0, y0, max(1, int(np.ceil(sb.x1 * sx)) - x0), max(1, int(np.ceil(sb.y1 * sy)) - y0))
        out.append(CharacterCrop(c.mask, sb, order, comp_box))
    if debug_dir:
        _debug_strip(debug_dir, out)
    return out


def _debug_strip(debug_dir, crops):
    from .imfile import write_png

    if not crops:
        return
    os.makedirs(debug_dir, exist_ok=True)
    h = max(c.mask.shape[0] for c in crops)
    parts = []
    for c in crops:
        m = np.zeros((h, c.mask.shape[1] + 2), dtype=bool)
        m[:c.mask.shape[0], 1:-1] = c.mask
        parts.append(m)
    write_png(os.path.join(debug_dir, "crops.png"), np.hstack(parts))
