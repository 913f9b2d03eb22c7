import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egylpr.detect import (PLATE_H, PLATE_W, DetectConfig, PlateCandidate, alignment_angle, alignment_sweep,
                           extract_plate_ex, find_plate_candidates)
from egylpr.errors import AlignmentLineNotFound
from egylpr.imaging import BBox, crop, resize_bilinear
from egylpr.synth import SceneSpec, iter_scenes, rasterize_plate, render_scene


def clean_scene(skew=0.0, x=700, y=400, scale=280, text="١٢٣ ب ج"):
    spec = SceneSpec(seed=5, plate_text=text, skew=skew, scale=scale,
                     position=BBox(x, y, scale, scale // 2))
    return render_scene(spec)


def test_sweep_angles_cover_range_in_order():
    angles = DetectConfig().sweep_angles()
    assert len(angles) == 41
    assert angles[0] == 10.0 and angles[-1] == -10.0 and 0.0 in angles
    assert np.allclose(np.diff(angles), -0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectConfig(sweep_max=10.0, sweep_step=0.3)
    with pytest.raises(ValueError):
        DetectConfig(sweep_max=50.0)
    with pytest.raises(ValueError):
        DetectConfig(aspect_ratio=0.9)
    lo, hi = DetectConfig().aspect_band
    assert (lo, hi) == (1.5, 2.5)


def test_finds_plate_on_clean_scene():
    img, gt = clean_scene()
    cands = find_plate_candidates(img)
    assert cands and cands[0].box.iou(gt.plate_box) >= 0.9
    assert all(a.score >= b.score for a, b in zip(cands, cands[1:]))


def test_blank_image_has_no_candidates():
    assert find_plate_candidates(np.full((300, 400), 128, np.uint8)) == []
    with pytest.raises(ValueError):
        find_plate_candidates(np.zeros((50, 60), np.uint8))


@settings(max_examples=8)
@given(st.integers(-40, 40), st.integers(-40, 40))
def test_detection_translates_with_the_scene(dx, dy):
    img, _ = clean_scene(skew=3.5)
    bg = int(img[0, 0])
    shifted = np.full_like(img, bg)
    h, w = img.shape
    shifted[max(0, dy):h + min(0, dy), max(0, dx):w + min(0, dx)] = \
        img[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
    a = find_plate_candidates(img)[0]
    b = find_plate_candidates(shifted)[0]
    assert b.box == a.box.shifted(dx, dy)
    assert b.angle == a.angle
    assert b.score == pytest.approx(a.score)


def test_two_plates_are_both_found():
    scene = np.full((600, 1200), 150, np.uint8)
    p1, _, _ = rasterize_plate("١٢ أ ب", 240)
    p2, _, _ = rasterize_plate("٣٤٥ د ر س", 300)
    scene[100:100 + p1.shape[0], 80:80 + p1.shape[1]] = p1
    scene[250:250 + p2.shape[0], 700:700 + p2.shape[1]] = p2
    boxes = [c.box for c in find_plate_candidates(scene)]
    for truth in (BBox(80, 100, 240, 120), BBox(700, 250, 300, 150)):
        assert max(b.iou(truth) for b in boxes) >= 0.8


@pytest.mark.parametrize("skew", [-9.5, -4.0, 0.0, 2.5, 7.0, 10.0])
def test_alignment_recovers_skew(skew):
    img, gt = clean_scene(skew=skew)
    cand = find_plate_candidates(img)[0]
    assert abs(alignment_angle(img, cand) + skew) <= 0.5


def test_sweep_reports_every_angle():
    img, _ = clean_scene(skew=2.0)
    cand = find_plate_candidates(img)[0]
    sweep = alignment_sweep(img, cand)
    assert [a for a, _ in sweep] == DetectConfig().sweep_angles()
    found = [abs(d) for _, d in sweep if d is not None]
    assert found and min(found) < 1.0


def test_alignment_without_internal_line_raises():
    img = np.full((400, 600), 200, np.uint8)
    img[100:250, 100:400] = 40
    img[110:240, 110:390] = 230
    cand = PlateCandidate(BBox(100, 100, 300, 150), 0.0, 1.0)
    with pytest.raises(AlignmentLineNotFound):
        alignment_angle(img, cand)


def test_extract_plate_is_canonical_size_and_maps_corners():
    img, gt = clean_scene(skew=-6.0)
    cand = find_plate_candidates(img)[0]
    angle = alignment_angle(img, cand)
    ex = extract_plate_ex(img, cand, angle)
    assert ex.image.shape == (PLATE_H, PLATE_W) and ex.image.dtype == np.uint8
    q = ex.map_points(gt.corners)
    target = np.array([[0, 0], [PLATE_W, 0], [PLATE_W, PLATE_H], [0, PLATE_H]], float)
    assert np.abs(q - target).max() <= 8.0


def test_extract_rejects_box_outside_image():
    img = np.zeros((100, 100), np.uint8)
    with pytest.raises(ValueError):
        extract_plate_ex(img, PlateCandidate(BBox(50, 50, 80, 40), 0.0, 1.0), 0.0)


def test_debug_dir_writes_images(tmp_path):
    img, _ = clean_scene()
    find_plate_candidates(img, debug_dir=str(tmp_path))
    names = {p.name for p in tmp_path.iterdir()}
    assert {"edges_horizontal.png", "edges_vertical.png", "candidates.png"} <= names


def test_noise_scores_below_a_real_plate():
    noise = np.random.default_rng(0).integers(0, 256, size=(1080, 1920)).astype(np.uint8)
    img, _ = clean_scene()
    top = find_plate_candidates(img)[0].score
    assert all(c.score < top for c in find_plate_candidates(noise))


def test_candidates_respect_band_and_sweep_grid():
    cfg = DetectConfig()
    lo, hi = cfg.aspect_band
    for _, _, img, _ in iter_scenes(5, 31):
        for c in find_plate_candidates(img, cfg):
            assert c.box.w >= cfg.min_plate_w
            assert lo - 0.05 <= c.box.w / c.box.h <= hi + 0.05
            assert abs(c.angle) <= cfg.sweep_max and (c.angle / cfg.sweep_step).is_integer()
        a = alignment_angle(img, find_plate_candidates(img, cfg)[0], cfg)
        assert abs(a) <= cfg.sweep_max and (a / cfg.sweep_step).is_integer()


def test_extract_at_zero_angle_equals_resized_crop():
    img, gt = clean_scene()
    ex = extract_plate_ex(img, PlateCandidate(gt.plate_box, 0.0, 1.0), 0.0)
    assert np.array_equal(ex.image, resize_bilinear(crop(img, gt.plate_box), PLATE_W, PLATE_H))
