"""Compare the compiled kernels with the numpy fallback.

Times each hot kernel on scene-sized inputs, then the whole character
pipeline on one 1920x1080 scene, under both backends.

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import statistics
import time

import numpy as np

from egylpr import kernels
from egylpr.detect import DetectConfig
from egylpr.imaging import dilate, prewitt_edges
from egylpr.pipeline import collect_char_samples, read_plate, train_char_model
from egylpr.segment import SegmentConfig
from egylpr.synth import iter_scenes


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out) * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pipeline-runs", type=int, default=20)
    args = ap.parse_args()

    _, _, scene, _ = next(iter_scenes(1, 7))
    hmap, _ = prewitt_edges(scene)
    mask = dilate(hmap, 5, 1)
    patch = scene[300:560, 600:1060].astype(np.float64)
    t = np.deg2rad(4.0)
    inv = np.array([[np.cos(t), -np.sin(t), 20.0], [np.sin(t), np.cos(t), -15.0]])
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(100, 400))
    gram = Z @ Z.T
    signs = np.where(np.arange(20)[:, None] == np.arange(100)[None, :] % 20, 1.0, -1.0)

    X, y = collect_char_samples(((img, gt) for _, _, img, gt in iter_scenes(200, 1001)), 10)
    model = train_char_model(X, y)
    det, seg = DetectConfig(), SegmentConfig()

    cases = [
        ("prewitt 1920x1080", lambda: kernels.prewitt(scene)),
        ("label 1920x1080 (4-conn)", lambda: kernels.label(mask, 4)),
        ("warp_bilinear 460x260", lambda: kernels.warp_bilinear(patch, inv, 260, 460, 255.0)),
        ("pegasos 100 samples x 20 classes", lambda: kernels.pegasos_dual(gram, signs, 2.0, 200)),
    ]
    print(f"{'kernel':36s} " + " ".join(f"{b:>12s}" for b in kernels.available_backends()) + "   speedup")
    prev = kernels.backend()
    try:
        for name, fn in cases:
            ms = []
            for b in kernels.available_backends():
                kernels.use_backend(b)
                ms.append(timed(fn, args.repeat))
            ratio = f"{ms[-1] / ms[0]:8.1f}x" if len(ms) > 1 else ""
            print(f"{name:36s} " + " ".join(f"{m:10.2f}ms" for m in ms) + f"  {ratio}")
        ms = []
        for b in kernels.available_backends():
            kernels.use_backend(b)
            runs = args.pipeline_runs if b == "compiled" else max(1, args.pipeline_runs // 10)
            ms.append(timed(lambda: read_plate(scene, det, seg, model), runs))
        ratio = f"{ms[-1] / ms[0]:8.1f}x" if len(ms) > 1 else ""
        print(f"{'recognize one scene (median)':36s} " + " ".join(f"{m:10.2f}ms" for m in ms) + f"  {ratio}")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
