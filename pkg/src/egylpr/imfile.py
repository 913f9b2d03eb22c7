"""Image files: binary PGM (P5, maxval 255) natively, PNG through Pillow."""

import os
import re
import tempfile

import numpy as np

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+"
                         rb"(?:#[^\n]*\n\s*)*(\d+)\s")


class ImageReadError(ValueError):
    pass


def encode_pgm(img):
    img = np.asarray(img)
    if img.dtype == np.bool_:
        img = np.where(img, 255, 0).astype(np.uint8)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("PGM output needs a 2D uint8 image")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def decode_pgm(data):
    m = _PGM_HEADER.match(data)
    if not m:
        raise ImageReadError("not a binary PGM (P5) file")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageReadError(f"unsupported PGM maxval {maxval}")
    payload = data[m.end():m.end() + w * h]
    if len(payload) != w * h:
        raise ImageReadError("truncated PGM payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()


def atomic_write_bytes(path, data):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path, img):
    atomic_write_bytes(path, encode_pgm(img))


def read_pgm(path):
    with open(path, "rb") as f:
        return decode_pgm(f.read())


def write_png(path, img):
    from PIL import Image

    img = np.asarray(img)
    if img.dtype == np.bool_:
        img = np.where(img, 255, 0).astype(np.uint8)
    Image.fromarray(img).save(path, format="PNG")


def read_image(path):
    """Read PGM or PNG (or anything Pillow opens) as a gray uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"P5":
        return decode_pgm(data)
    from PIL import Image, UnidentifiedImageError
    from io import BytesIO

    from .imaging import to_grayscale

    try:
        im = Image.open(BytesIO(data))
        im.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageReadError(f"{path}: {exc}") from exc
    if im.mode in ("L", "1"):
        return np.asarray(im.convert("L"), dtype=np.uint8)
    return to_grayscale(np.asarray(im.convert("RGB")))
