# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every function here has a pure-Python twin in ``_fallback`` with the same
signature and bit-identical results; ``kernels`` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, cos, sin, M_PI

cnp.import_array()


def prewitt(const cnp.uint8_t[:, ::1] img):
    """Return (gy, gx) Prewitt responses as int32, replicate border."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    gy_arr = np.empty((h, w), dtype=np.int32)
    gx_arr = np.empty((h, w), dtype=np.int32)
    cdef int[:, ::1] gy = gy_arr
    cdef int[:, ::1] gx = gx_arr
    cdef Py_ssize_t y, x, ym, yp, xm, xp
    for y in range(h):
        ym = y - 1 if y > 0 else 0
        yp = y + 1 if y < h - 1 else h - 1
        for x in range(w):
            xm = x - 1 if x > 0 else 0
            xp = x + 1 if x < w - 1 else w - 1
            gx[y, x] = (<int>img[ym, xp] + img[y, xp] + img[yp, xp]
                        - img[ym, xm] - img[y, xm] - img[yp, xm])
            gy[y, x] = (<int>img[yp, xm] + img[yp, x] + img[yp, xp]
                        - img[ym, xm] - img[ym, x] - img[ym, xp])
    return gy_arr, gx_arr


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t i) nogil:
    cdef Py_ssize_t root = i, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


cdef inline void _union(Py_ssize_t[::1] parent, Py_ssize_t a, Py_ssize_t b) nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label(const cnp.uint8_t[:, ::1] mask, int connectivity):
    """Two-pass union-find labeling.

    Returns ``(labels, stats)`` where labels are numbered in raster
    discovery order from 1 and ``stats`` is an int64 array with one row per
    component: area, x0, y0, x1, y1 (inclusive), sum_x, sum_y.
    """
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] lab = labels_arr
    parent_arr = np.zeros(h * w // 2 + 2, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef Py_ssize_t y, x, n = 0, cur, nb
    cdef bint eight = connectivity == 8

    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            cur = 0
            if x > 0 and lab[y, x - 1]:
                cur = lab[y, x - 1]
            if y > 0:
                nb = lab[y - 1, x]
                if nb:
                    if cur:
                        _union(parent, cur, nb)
                    else:
                        cur = nb
                if eight:
                    if x > 0:
                        nb = lab[y - 1, x - 1]
                        if nb:
                            if cur:
                                _union(parent, cur, nb)
                            else:
                                cur = nb
                    if x < w - 1:
                        nb = lab[y - 1, x + 1]
                        if nb:
                            if cur:
                                _union(parent, cur, nb)
                            else:
                                cur = nb
            if not cur:
                n += 1
                if n >= parent.shape[0]:
                    parent_arr = np.concatenate([parent_arr, np.zeros_like(parent_arr)])
                    parent = parent_arr
                parent[n] = n
                cur = n
            lab[y, x] = cur

    remap_arr = np.zeros(n + 1, dtype=np.int32)
    cdef int[::1] remap = remap_arr
    cdef int count = 0
    cdef Py_ssize_t r
    stats_arr = np.zeros((n, 7), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] st = stats_arr
    for y in range(h):
        for x in range(w):
            cur = lab[y, x]
            if not cur:
                continue
            r = _find(parent, cur)
            if not remap[r]:
                count += 1
                remap[r] = count
                st[count - 1, 1] = x
                st[count - 1, 2] = y
                st[count - 1, 3] = x
                st[count - 1, 4] = y
            cur = remap[r]
            lab[y, x] = cur
            st[cur - 1, 0] += 1
            if x < st[cur - 1, 1]:
                st[cur - 1, 1] = x
            if x > st[cur - 1, 3]:
                st[cur - 1, 3] = x
            if y > st[cur - 1, 4]:
                st[cur - 1, 4] = y
            st[cur - 1, 5] += x
            st[cur - 1, 6] += y
    return labels_arr, stats_arr[:count].copy()


def warp_bilinear(const double[:, ::1] src, double[:, ::1] inv, Py_ssize_t out_h,
                  Py_ssize_t out_w, double fill):
    """Inverse-map sampling: out(x, y) = src(inv @ (x, y, 1)), bilinear."""
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    out_arr = np.empty((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double a = inv[0, 0], b = inv[0, 1], c = inv[0, 2]
    cdef double d = inv[1, 0], e = inv[1, 1], f = inv[1, 2]
    cdef double sx, sy, fx, fy, top, bot
    cdef Py_ssize_t x, y, x0, y0, x1, y1
    cdef double xmax = w - 1, ymax = h - 1
    for y in range(out_h):
        for x in range(out_w):
            sx = a * x + b * y + c
            sy = d * x + e * y + f
            if sx < 0.0 or sy < 0.0 or sx > xmax or sy > ymax:
                out[y, x] = fill
                continue
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1 if x0 < w - 1 else x0
            y1 = y0 + 1 if y0 < h - 1 else y0
            top = src[y0, x0] + fx * (src[y0, x1] - src[y0, x0])
            bot = src[y1, x0] + fx * (src[y1, x1] - src[y1, x0])
            out[y, x] = top + fy * (bot - top)
    return out_arr


def pegasos_dual(const double[:, ::1] gram, const double[:, ::1] signs, double lam,
                 Py_ssize_t epochs):
    """Kernelized Pegasos for all one-vs-rest problems at once.

    ``signs`` is (classes, n) of +1/-1. Returns the integer hit counts
    alpha (classes, n); the primal weights are (1/(lam*T)) * sum_j alpha*y*x_j.
    """
    cdef Py_ssize_t k = signs.shape[0], n = signs.shape[1]
    alpha_arr = np.zeros((k, n), dtype=np.float64)
    cdef double[:, ::1] alpha = alpha_arr
    # running decision sums: f[c, i] = sum_j alpha[c, j] * y[c, j] * K[j, i]
    f_arr = np.zeros((k, n), dtype=np.float64)
    cdef double[:, ::1] f = f_arr
    cdef Py_ssize_t t = 0, ep, i, c, j
    cdef double scale, yv
    for ep in range(epochs):
        for i in range(n):
            t += 1
            scale = 1.0 / (lam * t)
            for c in range(k):
                yv = signs[c, i]
                if yv * scale * f[c, i] < 1.0:
                    alpha[c, i] += 1.0
                    for j in range(n):
                        f[c, j] += yv * gram[i, j]
    return alpha_arr
