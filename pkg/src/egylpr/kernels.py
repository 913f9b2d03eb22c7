"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``use_backend`` switches explicitly (tests and the benchmark
compare both).
"""

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_impl = _compiled if _compiled is not None else _fallback


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def backend():
    return "compiled" if _impl is _compiled else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global _impl
    prev = backend()
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _impl = _compiled
    elif name == "python":
        _impl = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def prewitt(img):
    return _impl.prewitt(np.ascontiguousarray(img, dtype=np.uint8))


def label(mask, connectivity):
    m = np.ascontiguousarray(mask, dtype=np.bool_).view(np.uint8)
    return _impl.label(m, int(connectivity))


def warp_bilinear(src, inv, out_h, out_w, fill):
    return _impl.warp_bilinear(
        np.ascontiguousarray(src, dtype=np.float64),
        np.ascontiguousarray(inv, dtype=np.float64),
        int(out_h), int(out_w), float(fill),
    )


def pegasos_dual(gram, signs, lam, epochs):
    return _impl.pegasos_dual(
        np.ascontiguousarray(gram, dtype=np.float64),
        np.ascontiguousarray(signs, dtype=np.float64),
        float(lam), int(epochs),
    )
