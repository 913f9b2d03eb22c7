"""Detection matching, confusion counts and corpus evaluation.

precision = TP/(TP+FP), recall = TP/(TP+FN), accuracy = TP/(TP+FP+FN),
computed exactly and rounded half away from zero for display.
"""

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .detect import DetectConfig
from .errors import LprError, NoPlateFound
from .imfile import ImageReadError, atomic_write_bytes, read_image
from .segment import SegmentConfig

STAGES = ("plate-detect", "char-detect", "char-recognize", "plate-recognize")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def _ratio(num, den):
    return Fraction(num, den) if den > 0 else None


def round_half_away(x, digits=2):
    if x is None:
        return None
    q = Decimal(1).scaleb(-digits)
    d = Decimal(x.numerator) / Decimal(x.denominator) if isinstance(x, Fraction) else Decimal(str(x))
    return float(d.quantize(q, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Metrics:
    precision: Fraction = None
    recall: Fraction = None
    accuracy: Fraction = None

    def rounded(self, digits=2):
        return (round_half_away(self.precision, digits), round_half_away(self.recall, digits),
                round_half_away(self.accuracy, digits))


def metrics(c):
    """Exact metrics; a metric whose denominator is zero is None (undefined)."""
    return Metrics(_ratio(c.tp, c.tp + c.fp), _ratio(c.tp, c.tp + c.fn),
                   _ratio(c.tp, c.tp + c.fp + c.fn))


def match_pairs(pred, truth, iou_min=0.5):
    """Greedy one-to-one matching by descending IoU; returns [(pred i, truth j, iou)]."""
    if not 0 < iou_min <= 1:
        raise ValueError("iou_min must be in (0, 1]")
    cand = []
    for i, p in enumerate(pred):
        for j, t in enumerate(truth):
            if p is None or t is None:
                continue
            v = p.iou(t)
            if v >= iou_min:
                cand.append((-v, i, j))
    cand.sort()
    used_p, used_t, out = set(), set(), []
    for v, i, j in cand:
        if i not in used_p and j not in used_t:
            used_p.add(i)
            used_t.add(j)
            out.append((i, j, -v))
    return out


def match_detections(pred, truth, iou_min=0.5):
    m = len(match_pairs(pred, truth, iou_min))
    return ConfusionCounts(m, len(pred) - m, len(truth) - m)


def labelled_counts(pred, pred_labels, truth, truth_labels, iou_min=0.5):
    """A match counts as TP only with the right label; a wrong label is one FP and one FN."""
    pairs = match_pairs(pred, truth, iou_min)
    good = sum(1 for i, j, _ in pairs if pred_labels[i] == truth_labels[j])
    return ConfusionCounts(good, len(pred) - good, len(truth) - good)


@dataclass
class EvalReport:
    stage: str
    counts: ConfusionCounts
    records: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def metrics(self):
        return metrics(self.counts)

    def row(self):
        p, r, a = self.metrics.rounded(2)
        fmt = lambda v: "undefined" if v is None else f"{v:.2f}"
        return [self.counts.fn, self.counts.fp, self.counts.tp, fmt(p), fmt(r), fmt(a)]

    def table_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["FN", "FP", "TP", "Precision", "Recall", "Accuracy"])
        w.writerow(self.row())
        return buf.getvalue()

    def detail_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["index", "image", "status", "tp", "fp", "fn", "predicted", "truth"]
        w.writerow(keys)
        for r in self.records:
            w.writerow([r.get(k, "") for k in keys])
        return buf.getvalue()


@dataclass(frozen=True)
class EvalSetup:
    det: DetectConfig = DetectConfig()
    seg: SegmentConfig = SegmentConfig()
    iou_min: float = 0.5
    char_model: object = None
    dct_cfg: object = None
    svm: object = None
    unknown_margin: float = 0.0


def _eval_scene(args):
    stage, setup, entry = args
    from . import pipeline

    rec = {"index": entry.index, "image": entry.record.get("image", entry.image)}
    t0 = time.perf_counter()
    try:
        img = read_image(entry.image)
    except (OSError, ImageReadError) as exc:
        rec.update(status="read-error", error=str(exc))
        return rec, _miss(stage, entry)
    gt = entry.ground_truth
    try:
        if stage == "plate-detect":
            try:
                cand, _ = pipeline.locate_plate(img, setup.det)
                pred = [cand.box]
            except NoPlateFound:
                pred = []
            c = match_detections(pred, [gt.plate_box], setup.iou_min)
            rec.update(predicted=";".join(str(b.as_list()) for b in pred), truth=str(gt.plate_box.as_list()))
        elif stage in ("char-detect", "char-recognize"):
            c = _eval_chars(stage, setup, img, gt, rec)
        else:
            c = _eval_identity(setup, img, gt, rec)
        rec.setdefault("status", "ok")
    except NoPlateFound:
        rec.update(status="no-plate")
        c = _miss(stage, entry)
    except LprError as exc:
        rec.update(status="failed", error=str(exc))
        c = _miss(stage, entry)
    rec.update(tp=c.tp, fp=c.fp, fn=c.fn, elapsed_ms=(time.perf_counter() - t0) * 1e3)
    return rec, c


def _miss(stage, entry):
    if stage in ("char-detect", "char-recognize"):
        return ConfusionCounts(0, 0, len(entry.glyph_labels))
    return ConfusionCounts(0, 0, 1)


def _eval_chars(stage, setup, img, gt, rec):
    from . import pipeline
    from .segment import segment_characters

    _, ex = pipeline.locate_and_extract(img, setup.det)
    crops = segment_characters(ex.image, setup.seg)
    truth = pipeline.truth_boxes_in_plate(gt, ex)
    rec["truth"] = " ".join(gt.glyph_labels)
    if stage == "char-detect":
        boxes = [c.source_box for c in crops]
        rec["predicted"] = str(len(boxes))
        return match_detections(boxes, truth, setup.iou_min)
    labeled, rejected = pipeline.classify_crops(crops, setup.char_model)
    rec["rejected"] = rejected
    boxes = [b for _, b, _ in labeled]
    labels = [lab for lab, _, _ in labeled]
    rec["predicted"] = " ".join(labels)
    text = pipeline.assemble_plate_string(labeled).text if labeled else ""
    rec["plate_ok"] = text == gt.plate_text
    return labelled_counts(boxes, labels, truth, gt.glyph_labels, setup.iou_min)


def _eval_identity(setup, img, gt, rec):
    from . import pipeline

    ident = pipeline.recognize_whole_plate(img, setup.det, setup.dct_cfg, setup.svm, setup.unknown_margin)
    enrolled = gt.identity in setup.svm.classes
    rec.update(predicted="unknown" if ident.unknown else str(ident.identity), truth=str(gt.identity),
               margin=ident.margin)
    if ident.unknown:
        return ConfusionCounts(0, 0, 1 if enrolled else 0)
    if ident.identity == gt.identity:
        return ConfusionCounts(1, 0, 0)
    return ConfusionCounts(0, 1, 1 if enrolled else 0)


def run_eval(entries, stage, setup=None, parallelism=1):
    """Evaluate one stage over manifest entries; the fold over counts is order-free."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {', '.join(STAGES)}")
    setup = setup or EvalSetup()
    if stage == "char-recognize" and setup.char_model is None:
        raise ValueError("stage char-recognize needs a character model")
    if stage == "plate-recognize" and (setup.svm is None or setup.dct_cfg is None):
        raise ValueError("stage plate-recognize needs a plate gallery model")
    jobs = [(stage, setup, e) for e in entries]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_eval_scene, jobs, chunksize=4))
    else:
        results = [_eval_scene(j) for j in jobs]
    total = ConfusionCounts()
    for _, c in results:
        total = total + c
    report = EvalReport(stage, total, [r for r, _ in results])
    if stage == "char-recognize":
        ok = sum(1 for r in report.records if r.get("plate_ok"))
        report.extra["plate_string_rate"] = ok / len(report.records) if report.records else None
    return report


def write_report(report, path, detail_path=None):
    atomic_write_bytes(path, report.table_csv().encode("utf-8"))
    if detail_path:
        atomic_write_bytes(detail_path, report.detail_csv().encode("utf-8"))
