"""End-to-end recognition.

Character route: detect, align, extract, segment, PCA project, KNN per glyph,
then split the glyph row into the digit and letter groups. Whole-plate
route: detect, align, extract, block-DCT features, SVM over enrolled plates.
"""

from dataclasses import dataclass, field

import numpy as np

from .alphabet import ALPHABET, DIGIT, LETTER, format_plate_text
from .classify import knn_classify, knn_fit, svm_margin, svm_train
from .detect import DetectConfig, PlateCandidate, alignment_angle, extract_plate_ex, find_plate_candidates
from .errors import AlignmentLineNotFound, DegenerateTrainingSet, NoPlateFound, UnreadablePlate
from .features import CHAR_SIZE, DctConfig, dct_features, normalize_char, pca_fit, pca_project, pca_project_many
from .imaging import resize_bilinear
from .segment import SegmentConfig, segment_characters


@dataclass(frozen=True)
class RecognizedChar:
    label: str
    box: object
    distance: float
    zone: str = ""
    flagged: bool = False


@dataclass(frozen=True)
class PlateString:
    digits: tuple
    letters: tuple
    confidence: tuple              # per character, digits then letters
    chars: tuple = ()
    rejected: int = 0

    @property
    def text(self):
        return format_plate_text([ALPHABET.by_id(s) for s in self.digits],
                                 [ALPHABET.by_id(s) for s in self.letters])

    @property
    def flagged(self):
        return sum(c.flagged for c in self.chars)


@dataclass(frozen=True)
class PlateIdentity:
    identity: object
    margin: float
    unknown: bool = False


@dataclass(frozen=True)
class CharModel:
    pca: object
    knn: object


@dataclass
class PlateRead:
    candidate: PlateCandidate
    extracted: object
    crops: list = field(default_factory=list)
    string: PlateString = None


def locate_plate(img, det_cfg=None, tries=3, debug_dir=None):
    """Best candidate whose internal line can be found; returns (candidate, angle)."""
    det_cfg = det_cfg or DetectConfig()
    cands = find_plate_candidates(img, det_cfg, debug_dir=debug_dir)
    for cand in cands[:tries]:
        try:
            return cand, alignment_angle(img, cand, det_cfg)
        except AlignmentLineNotFound:
            continue
    raise NoPlateFound()


def locate_and_extract(img, det_cfg=None, debug_dir=None):
    cand, angle = locate_plate(img, det_cfg, debug_dir=debug_dir)
    return cand, extract_plate_ex(img, cand, angle, det_cfg)


def assemble_plate_string(labeled):
    """Split (label, box, distance) triples, ordered left to right, into the two groups.

    The split falls in the widest horizontal gap between neighbouring boxes
    (leftmost on ties); the left group is the digit zone. A symbol whose kind
    does not match its zone is kept and flagged.
    """
    items = list(labeled)
    if not items:
        raise ValueError("no characters to assemble")
    if len(items) == 1:
        lab, box, dist = items[0]
        kind = ALPHABET.by_id(lab).kind
        ch = RecognizedChar(lab, box, dist, kind, False)
        if kind == DIGIT:
            return PlateString((lab,), (), (dist,), (ch,))
        return PlateString((), (lab,), (dist,), (ch,))
    gaps = [items[i + 1][1].x - items[i][1].x1 for i in range(len(items) - 1)]
    split = int(np.argmax(gaps)) + 1
    chars = []
    for i, (lab, box, dist) in enumerate(items):
        zone = DIGIT if i < split else LETTER
        chars.append(RecognizedChar(lab, box, dist, zone, ALPHABET.by_id(lab).kind != zone))
    left, right = chars[:split], chars[split:]
    return PlateString(tuple(c.label for c in left), tuple(c.label for c in right),
                       tuple(c.distance for c in chars), tuple(chars))


def classify_crops(crops, model):
    """(label, box, distance) per crop; distances above the reject threshold drop out."""
    out, rejected = [], 0
    for c in crops:
        f = pca_project(model.pca, normalize_char(c.mask, model.pca.input_dims[0]))
        lab, dist = knn_classify(model.knn, f)
        if dist > model.knn.reject_threshold:
            rejected += 1
            continue
        out.append((lab, c.source_box, dist))
    return out, rejected


def read_plate(scene, det_cfg, seg_cfg, model, debug_dir=None):
    """Full character route, keeping intermediate products for evaluation."""
    cand, ex = locate_and_extract(scene, det_cfg, debug_dir=debug_dir)
    crops = segment_characters(ex.image, seg_cfg, debug_dir=debug_dir)
    labeled, rejected = classify_crops(crops, model)
    read = PlateRead(cand, ex, crops)
    if not labeled:
        raise UnreadablePlate()
    ps = assemble_plate_string(labeled)
    read.string = PlateString(ps.digits, ps.letters, ps.confidence, ps.chars, rejected)
    return read


def recognize_plate_chars(scene, det_cfg, seg_cfg, pca, knn, debug_dir=None):
    return read_plate(scene, det_cfg, seg_cfg, CharModel(pca, knn), debug_dir).string


# -- training ----------------------------------------------------------------

def ground_truth_candidate(gt):
    return PlateCandidate(gt.plate_box, float(-gt.skew), 1.0)


def glyph_corners(gt, box):
    """Scene coordinates of the outer corners of plate-space ``box``."""
    pb = gt.plate_box
    cx, cy = pb.center
    t = np.deg2rad(gt.skew)
    c, s = np.cos(t), np.sin(t)
    out = []
    for px, py in ((box.x - 0.5, box.y - 0.5), (box.x1 - 0.5, box.y - 0.5),
                   (box.x1 - 0.5, box.y1 - 0.5), (box.x - 0.5, box.y1 - 0.5)):
        dx, dy = pb.x + px - cx, pb.y + py - cy
        out.append((cx + c * dx + s * dy, cy - s * dx + c * dy))
    return out


def truth_boxes_in_plate(gt, extracted):
    """Ground-truth glyph boxes mapped into the extracted plate frame."""
    return [extracted.map_box(glyph_corners(gt, b)) for b in gt.glyph_boxes]


def match_crops(crops, truth, iou_min=0.5):
    """Greedy best-IoU pairs (crop index, truth index)."""
    pairs = []
    for i, c in enumerate(crops):
        for j, t in enumerate(truth):
            if t is None:
                continue
            v = c.source_box.iou(t)
            if v >= iou_min:
                pairs.append((-v, i, j))
    pairs.sort()
    used_c, used_t, out = set(), set(), []
    for _, i, j in pairs:
        if i not in used_c and j not in used_t:
            used_c.add(i)
            used_t.add(j)
            out.append((i, j))
    return sorted(out)


def collect_char_samples(scenes, per_class=10, seg_cfg=None, det_cfg=None):
    """Normalized glyph images with labels, ``per_class`` of each symbol.

    ``scenes`` yields (image, ground truth). Plates are extracted at their
    known position and skew so training crops match what the segmenter
    produces at recognition time.
    """
    seg_cfg = seg_cfg or SegmentConfig()
    det_cfg = det_cfg or DetectConfig()
    counts = {s.id: 0 for s in ALPHABET}
    samples, labels = [], []
    for img, gt in scenes:
        ex = extract_plate_ex(img, ground_truth_candidate(gt), -gt.skew, det_cfg)
        crops = segment_characters(ex.image, seg_cfg)
        truth = truth_boxes_in_plate(gt, ex)
        for i, j in match_crops(crops, truth):
            lab = gt.glyph_labels[j]
            if counts[lab] >= per_class:
                continue
            counts[lab] += 1
            samples.append(normalize_char(crops[i].mask, CHAR_SIZE).ravel())
            labels.append(lab)
        if all(n >= per_class for n in counts.values()):
            break
    missing = sorted(k for k, n in counts.items() if n < per_class)
    if missing:
        raise DegenerateTrainingSet(f"too few exemplars for {', '.join(missing)}")
    order = sorted(range(len(labels)), key=lambda i: (ALPHABET.by_id(labels[i]).index, i))
    return np.array([samples[i] for i in order]), [labels[i] for i in order]


def train_char_model(samples, labels, n_components=40, metric="euclidean", k=1,
                     reject_percentile=97.5):
    pca = pca_fit(samples, n_components, (CHAR_SIZE, CHAR_SIZE))
    feats = pca_project_many(pca, samples)
    return CharModel(pca, knn_fit(feats, labels, metric, k, reject_percentile))


# -- whole-plate route -------------------------------------------------------

def plate_for_dct(plate, dct_cfg):
    p = np.asarray(plate)
    if p.shape != (dct_cfg.plate_h, dct_cfg.plate_w):
        p = resize_bilinear(p, dct_cfg.plate_w, dct_cfg.plate_h)
    return p


def enroll_gallery(plates, identities, dct_cfg=None, reg_c=1.0, epochs=200):
    """Train the whole-plate SVM over enrolled identities."""
    dct_cfg = dct_cfg or DctConfig()
    identities = list(identities)
    if len(plates) != len(identities):
        raise ValueError("one identity label per plate image")
    counts = {}
    for ident in identities:
        counts[ident] = counts.get(ident, 0) + 1
    if len(counts) < 2:
        raise DegenerateTrainingSet("need at least two identities")
    few = [k for k, n in counts.items() if n < 2]
    if few:
        raise DegenerateTrainingSet(f"identities with fewer than two views: {few}")
    X = np.array([dct_features(plate_for_dct(p, dct_cfg), dct_cfg) for p in plates])
    return dct_cfg, svm_train(X, identities, reg_c, epochs)


def identify_plate(plate, dct_cfg, svm, unknown_margin=0.0):
    f = dct_features(plate_for_dct(plate, dct_cfg), dct_cfg)
    ident, margin = svm_margin(svm, f)
    return PlateIdentity(ident, margin, margin < unknown_margin)


def recognize_whole_plate(scene, det_cfg, dct_cfg, svm, unknown_margin=0.0, debug_dir=None):
    _, ex = locate_and_extract(scene, det_cfg, debug_dir=debug_dir)
    return identify_plate(ex.image, dct_cfg, svm, unknown_margin)
