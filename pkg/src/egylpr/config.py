"""Run configuration addressed by dotted keys (``detect.aspect_ratio`` etc.)."""

import dataclasses
import json

from .detect import DetectConfig
from .features import DctConfig
from .segment import SegmentConfig
from .synth.corpus import CorpusRanges


class ConfigError(ValueError):
    pass


def _fields(cls, skip=()):
    return {f.name: f.default for f in dataclasses.fields(cls) if f.name not in skip}


DEFAULTS = {
    "detect": _fields(DetectConfig),
    "segment": _fields(SegmentConfig),
    "features": {"k": 9, "plate_w": 256, "plate_h": 128, "pca_components": 40},
    "classify": {"knn_k": 1, "metric": "euclidean", "reject_percentile": 97.5,
                 "reg_c": 1.0, "epochs": 200, "per_class": 10},
    "recognize": {"unknown_margin": 3.0},
    "eval": {"iou_min": 0.5},
    "synth": {k: list(v) if isinstance(v, tuple) else v for k, v in _fields(CorpusRanges).items()},
}


class RunConfig:
    def __init__(self, values=None):
        self._v = json.loads(json.dumps(DEFAULTS))
        for key, val in (values or {}).items():
            self.set(key, val)
        self.validate()

    def get(self, key):
        sec, name = self._split(key)
        return self._v[sec][name]

    def set(self, key, value):
        sec, name = self._split(key)
        self._v[sec][name] = value

    def _split(self, key):
        parts = key.split(".")
        if len(parts) != 2 or parts[0] not in self._v or parts[1] not in self._v[parts[0]]:
            raise ConfigError(f"unknown config key {key!r}")
        return parts

    def section(self, name):
        return dict(self._v[name])

    def as_dict(self):
        return json.loads(json.dumps(self._v))

    # typed views; constructing them runs each module's validation
    def detect(self):
        return DetectConfig(**self._v["detect"])

    def segment(self):
        return SegmentConfig(**self._v["segment"])

    def dct(self):
        f = self._v["features"]
        return DctConfig(k=f["k"], plate_w=f["plate_w"], plate_h=f["plate_h"])

    def ranges(self):
        return CorpusRanges.from_dict(self._v["synth"])

    def validate(self):
        try:
            self.detect()
            self.segment()
            self.dct()
            self.ranges()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        c = self._v["classify"]
        if c["metric"] not in ("euclidean", "standardized"):
            raise ConfigError("classify.metric must be euclidean or standardized")
        if not isinstance(c["knn_k"], int) or c["knn_k"] < 1 or c["knn_k"] % 2 == 0:
            raise ConfigError("classify.knn_k must be an odd integer >= 1")
        if not 0 < c["reject_percentile"] <= 100:
            raise ConfigError("classify.reject_percentile must be in (0, 100]")
        if not c["reg_c"] > 0 or not isinstance(c["epochs"], int) or c["epochs"] < 1:
            raise ConfigError("classify.reg_c must be > 0 and classify.epochs >= 1")
        if not isinstance(c["per_class"], int) or c["per_class"] < 1:
            raise ConfigError("classify.per_class must be >= 1")
        pc = self._v["features"]["pca_components"]
        if not isinstance(pc, int) or not 1 <= pc <= 576:
            raise ConfigError("features.pca_components must be in [1, 576]")
        if not 0 < self._v["eval"]["iou_min"] <= 1:
            raise ConfigError("eval.iou_min must be in (0, 1]")
        if not self._v["recognize"]["unknown_margin"] >= 0:
            raise ConfigError("recognize.unknown_margin must be >= 0")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path=None, overrides=()):
    """Defaults, then a JSON file (nested sections or dotted keys), then ``key=value`` pairs."""
    values = {}
    if path:
        with open(path, encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        for k, v in data.items():
            if isinstance(v, dict):
                values.update({f"{k}.{kk}": vv for kk, vv in v.items()})
            else:
                values[k] = v
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = _parse_value(v.strip())
    return RunConfig(values)
