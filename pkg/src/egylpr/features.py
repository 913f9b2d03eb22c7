"""PCA features for glyphs and block-DCT features for whole plates."""

from dataclasses import dataclass, field

import numpy as np

from .imaging import resize_bilinear

CHAR_SIZE = 24


def normalize_char(mask, size=CHAR_SIZE):
    """Pad a glyph mask to a centered square and resample to ``size`` x ``size`` in [0, 1]."""
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("glyph mask must be a non-empty 2D array")
    h, w = m.shape
    side = max(h, w)
    sq = np.zeros((side, side))
    y0, x0 = (side - h) // 2, (side - w) // 2
    sq[y0:y0 + h, x0:x0 + w] = m
    return np.clip(resize_bilinear(sq, size, size), 0.0, 1.0)


# -- PCA -------------------------------------------------------------------

@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray              # (n_components, dim), rows orthonormal
    eigenvalues: np.ndarray
    input_dims: tuple              # (w, h)
    covariance: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def n_components(self):
        return self.basis.shape[0]


def covariance(samples):
    """Sample covariance with 1/(k-1) normalization; rows are samples."""
    x = np.asarray(samples, dtype=np.float64)
    d = x - x.mean(axis=0)
    return d.T @ d / (x.shape[0] - 1)


def _fix_signs(vecs):
    # columns of vecs; flip so the largest-magnitude entry is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    s = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    s[s == 0] = 1.0
    return vecs * s


def pca_fit(samples, n_components, input_dims=None, keep_covariance=False):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("pca_fit needs at least 2 samples")
    k, d = x.shape
    if not 1 <= n_components <= min(k - 1, d):
        raise ValueError(f"n_components must be in [1, {min(k - 1, d)}], got {n_components}")
    if input_dims is None:
        input_dims = (d, 1)
    if input_dims[0] * input_dims[1] != d:
        raise ValueError("input_dims do not match the sample dimension")
    mean = x.mean(axis=0)
    cov = covariance(x)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(-vals, kind="stable")[:n_components]
    vals = np.clip(vals[order], 0.0, None)
    basis = _fix_signs(vecs[:, order]).T.copy()
    return PcaModel(mean, basis, vals, tuple(input_dims), cov if keep_covariance else None)


def _flatten_for(model, image):
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 2:
        if (a.shape[1], a.shape[0]) != tuple(model.input_dims):
            raise ValueError(f"image is {a.shape[1]}x{a.shape[0]}, model expects "
                             f"{model.input_dims[0]}x{model.input_dims[1]}")
        a = a.ravel()
    if a.shape != (model.dim,):
        raise ValueError(f"expected a vector of length {model.dim}, got shape {a.shape}")
    return a


def pca_project(model, image):
    return model.basis @ (_flatten_for(model, image) - model.mean)


def pca_project_many(model, samples):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ValueError("sample matrix does not match the model dimension")
    return (x - model.mean) @ model.basis.T


def pca_reconstruct(model, features):
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (model.n_components,):
        raise ValueError("feature length does not match the model")
    return model.mean + model.basis.T @ f


# -- DCT -------------------------------------------------------------------

BLOCK = 8


def _dct_matrix(n=BLOCK):
    p = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    alpha = np.where(p == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    return alpha * np.cos(np.pi * (2 * m + 1) * p / (2 * n))


_C = _dct_matrix()


def _zigzag(n=BLOCK):
    order = []
    for s in range(2 * n - 1):
        lo, hi = max(0, s - n + 1), min(s, n - 1)
        rows = range(lo, hi + 1) if s % 2 else range(hi, lo - 1, -1)
        order.extend((r, s - r) for r in rows)
    return order


ZIGZAG = _zigzag()
_ZZ_ROWS = np.array([p for p, _ in ZIGZAG])
_ZZ_COLS = np.array([q for _, q in ZIGZAG])


def dct2_block(block):
    """Orthonormal 2D DCT-II; result[p, q] has row frequency p, column frequency q."""
    b = np.asarray(block, dtype=np.float64)
    if b.shape != (BLOCK, BLOCK):
        raise ValueError(f"dct2_block needs an 8x8 block, got {b.shape}")
    return _C @ b @ _C.T


def zigzag_select(coeffs, k):
    c = np.asarray(coeffs)
    if c.shape != (BLOCK, BLOCK):
        raise ValueError("zigzag_select needs an 8x8 coefficient block")
    if not 1 <= k <= BLOCK * BLOCK:
        raise ValueError(f"k must be in [1, 64], got {k}")
    return c[_ZZ_ROWS[:k], _ZZ_COLS[:k]].copy()


@dataclass(frozen=True)
class DctConfig:
    k: int = 9
    plate_w: int = 256
    plate_h: int = 128
    block: int = BLOCK

    def __post_init__(self):
        if self.block != BLOCK:
            raise ValueError("block size is fixed at 8")
        if not 1 <= self.k <= 64:
            raise ValueError(f"k must be in [1, 64], got {self.k}")
        if self.plate_w < 8 or self.plate_h < 8 or self.plate_w % 8 or self.plate_h % 8:
            raise ValueError("plate dimensions must be positive multiples of 8")

    @property
    def dim(self):
        return (self.plate_w // 8) * (self.plate_h // 8) * self.k


def dct_features(plate, cfg=None):
    """Row-major 8x8 blocks, each reduced to its first k zigzag coefficients."""
    cfg = cfg or DctConfig()
    a = np.asarray(plate, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] % 8 or a.shape[1] % 8:
        raise ValueError(f"plate dimensions must be multiples of 8, got {a.shape[::-1]}")
    if a.shape != (cfg.plate_h, cfg.plate_w):
        raise ValueError(f"plate is {a.shape[1]}x{a.shape[0]}, config expects "
                         f"{cfg.plate_w}x{cfg.plate_h}")
    by, bx = a.shape[0] // 8, a.shape[1] // 8
    blocks = a.reshape(by, 8, bx, 8).transpose(0, 2, 1, 3)
    coeffs = np.einsum("pm,yxmn,qn->yxpq", _C, blocks, _C, optimize=True)
    return coeffs[:, :, _ZZ_ROWS[:cfg.k], _ZZ_COLS[:cfg.k]].reshape(-1)
