"""Pure-Python (numpy) twins of the compiled kernels in ``_kernels.pyx``.

Same signatures, same arithmetic order, bit-identical outputs.
"""

import numpy as np


def prewitt(img):
    p = np.pad(img.astype(np.int32), 1, mode="edge")
    rows = p[:-2] + p[1:-1] + p[2:]
    cols = p[:, :-2] + p[:, 1:-1] + p[:, 2:]
    gx = rows[:, 2:] - rows[:, :-2]
    gy = cols[2:] - cols[:-2]
    return np.ascontiguousarray(gy, dtype=np.int32), np.ascontiguousarray(gx, dtype=np.int32)


def _runs(row):
    d = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return starts, ends


def label(mask, connectivity):
    """Run-based union-find labeling; see ``_kernels.label``."""
    h, w = mask.shape
    slack = 1 if connectivity == 8 else 0
    run_row, run_start, run_end = [], [], []
    parent = []

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    prev = []
    for y in range(h):
        starts, ends = _runs(mask[y])
        cur = []
        j = 0
        for s, e in zip(starts.tolist(), ends.tolist()):
            idx = len(run_row)
            run_row.append(y)
            run_start.append(s)
            run_end.append(e)
            parent.append(idx)
            # runs in prev overlapping [s - slack, e + slack)
            while j < len(prev) and run_end[prev[j]] + slack <= s:
                j += 1
            k = j
            while k < len(prev) and run_start[prev[k]] < e + slack:
                a, b = find(idx), find(prev[k])
                if a < b:
                    parent[b] = a
                elif b < a:
                    parent[a] = b
                k += 1
            if k > j:
                j = k - 1
            cur.append(idx)
        prev = cur

    labels = np.zeros((h, w), dtype=np.int32)
    n_runs = len(run_row)
    if n_runs == 0:
        return labels, np.zeros((0, 7), dtype=np.int64)
    remap = {}
    run_label = np.empty(n_runs, dtype=np.int32)
    for i in range(n_runs):
        r = find(i)
        lab = remap.get(r)
        if lab is None:
            lab = len(remap) + 1
            remap[r] = lab
        run_label[i] = lab
        labels[run_row[i], run_start[i]:run_end[i]] = lab

    rr = np.asarray(run_row, dtype=np.int64)
    rs = np.asarray(run_start, dtype=np.int64)
    re = np.asarray(run_end, dtype=np.int64)
    n = len(remap)
    li = run_label.astype(np.int64) - 1
    length = re - rs
    stats = np.zeros((n, 7), dtype=np.int64)
    stats[:, 0] = np.bincount(li, weights=length, minlength=n).astype(np.int64)
    x0 = np.full(n, w, dtype=np.int64)
    y0 = np.full(n, h, dtype=np.int64)
    x1 = np.full(n, -1, dtype=np.int64)
    y1 = np.full(n, -1, dtype=np.int64)
    np.minimum.at(x0, li, rs)
    np.minimum.at(y0, li, rr)
    np.maximum.at(x1, li, re - 1)
    np.maximum.at(y1, li, rr)
    stats[:, 1], stats[:, 2], stats[:, 3], stats[:, 4] = x0, y0, x1, y1
    # sum of x over a run [s, e) is (s + e - 1) * (e - s) / 2
    sx = (rs + re - 1) * length // 2
    stats[:, 5] = np.bincount(li, weights=sx, minlength=n).astype(np.int64)
    stats[:, 6] = np.bincount(li, weights=rr * length, minlength=n).astype(np.int64)
    return labels, stats


def warp_bilinear(src, inv, out_h, out_w, fill):
    h, w = src.shape
    a, b, c = inv[0]
    d, e, f = inv[1]
    ys, xs = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    sx = a * xs + b * ys + c
    sy = d * xs + e * ys + f
    inside = (sx >= 0.0) & (sy >= 0.0) & (sx <= w - 1) & (sy <= h - 1)
    sxi = np.where(inside, sx, 0.0)
    syi = np.where(inside, sy, 0.0)
    x0 = np.floor(sxi).astype(np.intp)
    y0 = np.floor(syi).astype(np.intp)
    fx = sxi - x0
    fy = syi - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    s00, s01 = src[y0, x0], src[y0, x1]
    s10, s11 = src[y1, x0], src[y1, x1]
    top = s00 + fx * (s01 - s00)
    bot = s10 + fx * (s11 - s10)
    out = top + fy * (bot - top)
    out[~inside] = fill
    return out


def pegasos_dual(gram, signs, lam, epochs):
    k, n = signs.shape
    alpha = np.zeros((k, n), dtype=np.float64)
    f = np.zeros((k, n), dtype=np.float64)
    t = 0
    for _ in range(epochs):
        for i in range(n):
            t += 1
            scale = 1.0 / (lam * t)
            y = signs[:, i]
            hit = np.flatnonzero(y * scale * f[:, i] < 1.0)
            if hit.size:
                alpha[hit, i] += 1.0
                f[hit] += y[hit, None] * gram[i]
    return alpha
