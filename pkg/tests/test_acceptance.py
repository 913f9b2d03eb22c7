"""Acceptance criteria, each at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary. Run alone with::

    pytest tests/test_acceptance.py -v
"""

import hashlib
import json
import statistics
import time

import numpy as np
import pytest
import scipy.linalg

from egylpr.classify import knn_classify, knn_fit, loo_risk
from egylpr.cli import main as cli_main
from egylpr.detect import DetectConfig
from egylpr.evaluate import ConfusionCounts, labelled_counts, metrics
from egylpr.features import covariance, dct2_block, dct_features, pca_fit
from egylpr.imaging import connected_components, otsu_threshold, prewitt_gradients
from egylpr.pipeline import (assemble_plate_string, classify_crops, collect_char_samples, enroll_gallery,
                             identify_plate, locate_and_extract, locate_plate, read_plate, train_char_model,
                             truth_boxes_in_plate)
from egylpr.segment import SegmentConfig, segment_characters
from egylpr.synth import CorpusRanges, iter_scenes
from test_classify import linear_scan
from test_features import dct_four_loop
from test_imaging import flood_fill_labels, otsu_exhaustive, prewitt_direct, same_partition

TRAIN_SEED, TEST_SEED = 1001, 7


# 1 -------------------------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="1207/1481 = 0.81499 rounds half-away to 0.81, not 0.82")
def test_criterion_1_metric_semantics(criterion):
    table = [((1207, 274, 519), (0.82, 0.70, 0.60)),
             ((3859, 162, 186), (0.96, 0.95, 0.92)),
             ((7238, 124, 196), (0.98, 0.97, 0.96))]
    got = [metrics(ConfusionCounts(*c)).rounded(2) for c, _ in table]
    bad = [f"{c}->{g} expected {e}" for (c, e), g in zip(table, got) if g != e]
    ok = criterion(1, not bad, "; ".join(bad) if bad else "3/3 count tables exact at 2 decimals")
    assert ok


# 2 -------------------------------------------------------------------------------

def test_criterion_2_reproducibility_statement(criterion):
    # the corpus-level figures need corpora that are not available; criteria 3-9
    # stand in for them with oracles and synthetic end-to-end runs
    criterion(2, True, "statement only: corpus-level accuracies not reproducible, substituted by 3-9")


# 3 -------------------------------------------------------------------------------

def test_criterion_3_oracle_equivalences(criterion):
    rng = np.random.default_rng(300)
    fails = {}

    def check(name, ok):
        if not ok:
            fails[name] = fails.get(name, 0) + 1

    for _ in range(100):
        h, w = rng.integers(2, 24, size=2)
        img = rng.integers(0, 256, size=(h, w)).astype(np.uint8)
        if len(np.unique(img)) > 1:
            check("otsu", otsu_threshold(img) == otsu_exhaustive(img))

        mask = rng.random((h, w)) < rng.uniform(0.2, 0.7)
        for conn in (4, 8):
            lab = connected_components(mask, conn)
            ref, n = flood_fill_labels(mask, conn)
            check("ccl", len(lab) == n and same_partition(lab.labels, ref))

        g = rng.integers(0, 256, size=(max(3, h), max(3, w))).astype(np.uint8)
        gy, gx = prewitt_gradients(g)
        ry, rx = prewitt_direct(g)
        check("prewitt", np.array_equal(gy, ry) and np.array_equal(gx, rx))

        b = rng.integers(0, 256, size=(8, 8)).astype(np.float64)
        check("dct", np.max(np.abs(dct2_block(b) - dct_four_loop(b))) <= 1e-9)

        n_train, d = int(rng.integers(3, 30)), int(rng.integers(1, 8))
        X = rng.normal(size=(n_train, d))
        labels = [int(v) for v in rng.integers(0, 4, size=n_train)]
        q = rng.normal(size=d)
        check("knn", knn_classify(knn_fit(X, labels), q)[0] == linear_scan(X, labels, q)[0])

        k, dd = int(rng.integers(12, 40)), int(rng.integers(3, 10))
        S = rng.normal(size=(k, dd)) * np.geomspace(10.0, 0.1, dd)
        nc = int(rng.integers(1, dd))
        m = pca_fit(S, nc)
        _, vecs = scipy.linalg.eigh(np.cov(S, rowvar=False))
        check("pca", scipy.linalg.subspace_angles(m.basis.T, vecs[:, ::-1][:, :nc]).max() <= 1e-6)

    detail = "otsu, ccl(4/8), prewitt, dct, knn, pca agree over 100 instances each"
    ok = criterion(3, not fails, detail if not fails else f"mismatches: {fails}")
    assert ok


# 4 -------------------------------------------------------------------------------

def test_criterion_4_numerical_conservation(criterion):
    rng = np.random.default_rng(400)
    worst = 0.0
    for _ in range(1000):
        b = rng.uniform(-255, 255, size=(8, 8))
        e = (b * b).sum()
        worst = max(worst, abs((dct2_block(b) ** 2).sum() - e) / max(1.0, e))
    rel = 0.0
    for _ in range(50):
        d = int(rng.integers(3, 30))
        S = rng.normal(size=(d + 10, d)) * rng.uniform(0.1, 10, size=d)
        tr = np.trace(covariance(S))
        rel = max(rel, abs(pca_fit(S, d).eigenvalues.sum() - tr) / tr)
    ok = criterion(4, worst <= 1e-9 and rel <= 1e-6,
                   f"parseval worst {worst:.1e} (<= 1e-9), eigen-sum vs trace {rel:.1e} (<= 1e-6)")
    assert ok


# 5 -------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_5_alignment_sweep(criterion):
    ranges = CorpusRanges(skew_step=0.5)
    cfg = DetectConfig()
    hits, elapsed = 0, 0.0
    for _, spec, img, gt in iter_scenes(50, 500, ranges):
        t0 = time.perf_counter()
        try:
            _, angle = locate_plate(img, cfg)
        except Exception:
            angle = None
        elapsed += time.perf_counter() - t0
        if angle is not None and abs(angle + gt.skew) <= 0.5 + 1e-9:
            hits += 1
    ok = criterion(5, hits >= 48 and elapsed <= 30.0,
                   f"{hits}/50 within 0.5 deg (>= 48), {elapsed:.1f} s (<= 30 s)")
    assert ok


# 6 -------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_character_system(criterion):
    t0 = time.perf_counter()
    X, y = collect_char_samples(((img, gt) for _, _, img, gt in iter_scenes(400, TRAIN_SEED)), 10)
    model = train_char_model(X, y)
    det, seg = DetectConfig(), SegmentConfig()
    found, strings = 0, 0
    chars = ConfusionCounts()
    n = 200
    for _, spec, img, gt in iter_scenes(n, TEST_SEED):
        assert spec.noise_sigma <= 4 and abs(spec.skew) <= 10
        try:
            cand, ex = locate_and_extract(img, det)
        except Exception:
            chars = chars + ConfusionCounts(0, 0, len(gt.glyph_labels))
            continue
        found += cand.box.iou(gt.plate_box) >= 0.5
        labeled, _ = classify_crops(segment_characters(ex.image, seg), model)
        truth = truth_boxes_in_plate(gt, ex)
        chars = chars + labelled_counts([b for _, b, _ in labeled], [lab for lab, _, _ in labeled],
                                        truth, gt.glyph_labels, 0.5)
        if labeled:
            strings += assemble_plate_string(labeled).text == gt.plate_text
    elapsed = time.perf_counter() - t0
    recall = found / n
    acc = float(metrics(chars).accuracy)
    rate = strings / n
    ok = criterion(6, X.shape[0] == 260 and recall >= 0.95 and acc >= 0.95 and rate >= 0.85 and elapsed <= 300,
                   f"{X.shape[0]} exemplars, localization recall {recall:.3f} (>= 0.95), "
                   f"char accuracy {acc:.3f} (>= 0.95), plate-string rate {rate:.3f} (>= 0.85), "
                   f"{elapsed:.0f} s (<= 300 s)")
    assert ok


# 7 -------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_7_whole_plate_system(criterion):
    t0 = time.perf_counter()
    views = 6
    enrolled, held = [], []
    for idx, _, img, gt in iter_scenes(20 * views, 700, CorpusRanges(views=views)):
        _, ex = locate_and_extract(img)
        (held if idx % views == views - 1 else enrolled).append((ex.image, gt.identity))
    dct_cfg, svm = enroll_gallery([p for p, _ in enrolled], [i for _, i in enrolled])
    acc = float(np.mean([identify_plate(p, dct_cfg, svm).identity == i for p, i in held]))
    X = np.array([dct_features(p, dct_cfg) for p, _ in enrolled])
    risk = loo_risk(X, [i for _, i in enrolled])
    elapsed = time.perf_counter() - t0
    ok = criterion(7, len(enrolled) == 100 and acc >= 0.90 and risk <= 0.10 and elapsed <= 120,
                   f"20 identities x 5 views, held-out accuracy {acc:.2f} (>= 0.90), "
                   f"loo risk {risk:.3f} (<= 0.10), {elapsed:.0f} s (<= 120 s)")
    assert ok


# 8 -------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_single_scene_latency(criterion, char_model):
    _, _, img, _ = next(iter_scenes(1, TEST_SEED))
    assert img.shape == (1080, 1920)
    det, seg = DetectConfig(), SegmentConfig()
    times = []
    for _ in range(20):
        t0 = time.perf_counter()
        read_plate(img, det, seg, char_model)
        times.append((time.perf_counter() - t0) * 1e3)
    med = statistics.median(times)
    ok = criterion(8, med <= 500, f"median {med:.0f} ms over 20 runs (<= 500 ms)")
    assert ok


# 9 -------------------------------------------------------------------------------

def _digest_dir(path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir())}


def _strip_timing(path):
    recs = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    for r in recs:
        r.pop("timing_ms", None)
    return json.dumps(recs, sort_keys=True)


@pytest.mark.slow
def test_criterion_9_determinism(criterion, tmp_path, monkeypatch):
    # both runs use the same relative paths so the command lines are identical
    digests = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        monkeypatch.chdir(d)
        assert cli_main(["--seed", "3", "synth", "--n", "150", "--out", "train"]) == 0
        assert cli_main(["--seed", "9", "synth", "--n", "5", "--out", "test"]) == 0
        assert cli_main(["train", "--stage", "chars", "--manifest", "train/manifest.jsonl",
                         "--out", "model.json"]) == 0
        assert cli_main(["recognize", "--model", "model.json", "--manifest", "test/manifest.jsonl",
                         "--out", "rec.jsonl"]) == 0
        digests.append((_digest_dir(d / "train"), _digest_dir(d / "test"),
                        (d / "model.json").read_bytes(), _strip_timing(d / "rec.jsonl")))
    a, b = digests
    same = [a[0] == b[0], a[1] == b[1], a[2] == b[2], a[3] == b[3]]
    ok = criterion(9, all(same), "synth corpora, model file, recognition records (timing_ms excluded): "
                   + ", ".join("identical" if s else "DIFFER" for s in same))
    assert ok
