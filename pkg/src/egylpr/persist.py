"""Model files: a JSON header plus numeric payloads written as decimal text.

Floats are emitted with Python's shortest round-trip repr, so loading and
saving again reproduces the file byte for byte.
"""

import json
import math

import numpy as np

from . import __version__
from .classify import KnnModel, SvmModel
from .features import DctConfig, PcaModel
from .imfile import atomic_write_bytes

FORMAT_VERSION = 1
MODEL_TYPES = ("pca", "knn", "svm", "pipeline-bundle")
PRODUCER = f"egylpr/{__version__}"


class ModelFormatError(ValueError):
    pass


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise ModelFormatError("NaN in model payload")
    return x


def _unnum(x):
    if x == "inf":
        return float("inf")
    if x == "-inf":
        return float("-inf")
    return float(x)


def _arr(a):
    a = np.asarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "data": [_num(v) for v in a.ravel().tolist()]}


def _unarr(d):
    data = np.array([_unnum(v) for v in d["data"]], dtype=np.float64)
    return data.reshape(d["shape"])


def pca_payload(m):
    return {"mean": _arr(m.mean), "basis": _arr(m.basis), "eigenvalues": _arr(m.eigenvalues),
            "input_dims": list(m.input_dims)}


def pca_from(p):
    return PcaModel(_unarr(p["mean"]), _unarr(p["basis"]), _unarr(p["eigenvalues"]), tuple(p["input_dims"]))


def knn_payload(m):
    return {"X": _arr(m.X), "labels": list(m.labels), "metric": m.metric,
            "variances": None if m.variances is None else _arr(m.variances),
            "k": m.k, "reject_threshold": _num(m.reject_threshold)}


def knn_from(p):
    var = None if p["variances"] is None else _unarr(p["variances"])
    return KnnModel(_unarr(p["X"]), tuple(p["labels"]), p["metric"], var, int(p["k"]),
                    _unnum(p["reject_threshold"]))


def svm_payload(m):
    return {"classes": list(m.classes), "W": _arr(m.W), "b": _arr(m.b), "reg_c": _num(m.reg_c),
            "mean": _arr(m.mean), "scale": _arr(m.scale), "epochs": m.epochs}


def svm_from(p):
    return SvmModel(tuple(p["classes"]), _unarr(p["W"]), _unarr(p["b"]), _unnum(p["reg_c"]),
                    _unarr(p["mean"]), _unarr(p["scale"]), int(p["epochs"]))


def char_bundle(char_model):
    pca, knn = char_model.pca, char_model.knn
    dims = {"input_w": pca.input_dims[0], "input_h": pca.input_dims[1],
            "components": pca.n_components, "exemplars": knn.X.shape[0]}
    return "pipeline-bundle", dims, {"route": "chars", "pca": pca_payload(pca), "knn": knn_payload(knn)}


def gallery_bundle(dct_cfg, svm, unknown_margin):
    dims = {"feature_dim": svm.dim, "classes": len(svm.classes)}
    return "pipeline-bundle", dims, {
        "route": "plates",
        "dct": {"k": dct_cfg.k, "plate_w": dct_cfg.plate_w, "plate_h": dct_cfg.plate_h},
        "svm": svm_payload(svm), "unknown_margin": _num(unknown_margin)}


def dumps(model_type, dims, payload):
    if model_type not in MODEL_TYPES:
        raise ModelFormatError(f"unknown model type {model_type!r}")
    doc = {"header": {"format_version": FORMAT_VERSION, "model_type": model_type,
                      "created": PRODUCER, "dims": dims},
           "payload": payload}
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")


def save_model(path, model_type, dims, payload):
    atomic_write_bytes(path, dumps(model_type, dims, payload))


def loads(data):
    try:
        doc = json.loads(data)
        header = doc["header"]
        payload = doc["payload"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"not a model file ({exc})") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {header.get('format_version')!r}")
    if header.get("model_type") not in MODEL_TYPES:
        raise ModelFormatError(f"unknown model type {header.get('model_type')!r}")
    return header, payload


def load_model(path):
    with open(path, "rb") as f:
        return loads(f.read())


def decode(header, payload):
    """Build model objects: a PcaModel/KnnModel/SvmModel or a bundle dict."""
    kind = header["model_type"]
    try:
        if kind == "pca":
            return pca_from(payload)
        if kind == "knn":
            return knn_from(payload)
        if kind == "svm":
            return svm_from(payload)
        from .pipeline import CharModel

        if payload.get("route") == "chars":
            return {"route": "chars", "model": CharModel(pca_from(payload["pca"]), knn_from(payload["knn"]))}
        if payload.get("route") == "plates":
            d = payload["dct"]
            return {"route": "plates", "dct": DctConfig(k=d["k"], plate_w=d["plate_w"], plate_h=d["plate_h"]),
                    "svm": svm_from(payload["svm"]), "unknown_margin": _unnum(payload["unknown_margin"])}
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed {kind} payload ({exc})") from exc
    raise ModelFormatError(f"unknown bundle route {payload.get('route')!r}")
