"""egylpr command line: synth, train, recognize, eval, inspect-model.

Exit codes: 0 success, 1 every recognition record failed, 2 invalid input or
configuration, 3 file-system errors.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__, persist
from .config import ConfigError, load_config
from .errors import LprError, NoPlateFound, UnreadablePlate
from .imfile import ImageReadError, atomic_write_bytes, read_image

EXIT_OK, EXIT_ALL_FAILED, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


def _common(suppress):
    # the subcommand copies must not reset values given before the subcommand
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=dflt(None), help="JSON config file")
    p.add_argument("--set", dest="late_overrides" if suppress else "overrides", action="append",
                   default=dflt([]), metavar="KEY=VALUE",
                   help="override a config key, e.g. detect.aspect_ratio=2.0 (repeatable)")
    p.add_argument("--debug-dir", default=dflt(None), help="write intermediate images here")
    p.add_argument("--parallelism", type=int, default=dflt(1), help="worker processes for per-scene work")
    p.add_argument("--seed", type=int, default=dflt(0))
    return p


def build_parser():
    common = _common(suppress=True)
    ap = argparse.ArgumentParser(prog="egylpr", parents=[_common(suppress=False)],
                                 description="Classical license plate detection and recognition.")
    ap.add_argument("--version", action="version", version=f"egylpr {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="render a synthetic scene corpus")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", required=True, help="output directory")

    t = sub.add_parser("train", parents=[common], help="train a character or plate-gallery model")
    t.add_argument("--stage", choices=["chars", "plates"], required=True)
    t.add_argument("--manifest", required=True)
    t.add_argument("--out", required=True, help="model file to write")

    r = sub.add_parser("recognize", parents=[common], help="recognize plates in images")
    r.add_argument("--model", required=True)
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", action="append", help="image file (repeatable)")
    src.add_argument("--manifest")
    r.add_argument("--out", required=True, help="results file (JSON lines)")

    e = sub.add_parser("eval", parents=[common], help="evaluate one stage over a corpus")
    e.add_argument("--manifest", required=True)
    e.add_argument("--stage", required=True,
                   choices=["plate-detect", "char-detect", "char-recognize", "plate-recognize"])
    e.add_argument("--model")
    e.add_argument("--out", required=True, help="report table (CSV)")
    e.add_argument("--detail", help="per-scene detail CSV (default: <out stem>.scenes.csv)")

    i = sub.add_parser("inspect-model", parents=[common], help="print a model file's header")
    i.add_argument("model")
    return ap


# -- commands ----------------------------------------------------------------

def cmd_synth(args, cfg):
    from .synth.corpus import generate_corpus

    path = generate_corpus(args.n, args.seed, cfg.ranges(), args.out)
    print(path)
    return EXIT_OK


def _scenes(entries):
    for e in entries:
        yield read_image(e.image), e.ground_truth


def cmd_train(args, cfg):
    from . import pipeline
    from .synth.corpus import read_manifest

    entries = read_manifest(args.manifest)
    c = cfg.section("classify")
    if args.stage == "chars":
        X, y = pipeline.collect_char_samples(_scenes(entries), c["per_class"], cfg.segment(), cfg.detect())
        model = pipeline.train_char_model(X, y, cfg.get("features.pca_components"), c["metric"],
                                          c["knn_k"], c["reject_percentile"])
        persist.save_model(args.out, *persist.char_bundle(model))
        print(f"{args.out}: {X.shape[0]} exemplars, {model.pca.n_components} components")
        return EXIT_OK
    plates, idents = [], []
    for e in entries:
        img = read_image(e.image)
        try:
            _, ex = pipeline.locate_and_extract(img, cfg.detect())
        except LprError as exc:
            print(f"warning: {e.image}: {exc}; view skipped", file=sys.stderr)
            continue
        plates.append(ex.image)
        idents.append(e.identity)
    dct_cfg, svm = pipeline.enroll_gallery(plates, idents, cfg.dct(), c["reg_c"], c["epochs"])
    persist.save_model(args.out, *persist.gallery_bundle(dct_cfg, svm, cfg.get("recognize.unknown_margin")))
    print(f"{args.out}: {len(svm.classes)} identities from {len(plates)} views")
    return EXIT_OK


def _load_bundle(path):
    header, payload = persist.load_model(path)
    obj = persist.decode(header, payload)
    if not isinstance(obj, dict):
        raise persist.ModelFormatError(f"{path}: expected a pipeline bundle, got {header['model_type']}")
    return obj


def _debug_for(debug_dir, image):
    if not debug_dir:
        return None
    return os.path.join(debug_dir, os.path.splitext(os.path.basename(image))[0])


def _recognize_one(job):
    from . import pipeline

    image, shown, bundle, det, seg, debug_dir = job
    rec = {"image": shown}
    t0 = time.perf_counter()
    try:
        img = read_image(image)
    except (OSError, ImageReadError) as exc:
        rec.update(status="read-error", error=str(exc))
        return rec
    dbg = _debug_for(debug_dir, image)
    try:
        if bundle["route"] == "chars":
            ps = pipeline.read_plate(img, det, seg, bundle["model"], dbg).string
            rec.update(status="ok", plate_string=ps.text, digits=list(ps.digits), letters=list(ps.letters),
                       rejected=ps.rejected, flagged=ps.flagged,
                       chars=[{"label": ch.label, "box": ch.box.as_list(), "distance": ch.distance,
                               "zone": ch.zone, "flagged": ch.flagged} for ch in ps.chars])
        else:
            ident = pipeline.recognize_whole_plate(img, det, bundle["dct"], bundle["svm"],
                                                   bundle["unknown_margin"], dbg)
            rec.update(status="ok", identity=ident.identity, margin=ident.margin, unknown=ident.unknown)
    except NoPlateFound as exc:
        rec.update(status="no-plate", error=str(exc))
    except UnreadablePlate as exc:
        rec.update(status="unreadable", error=str(exc))
    except (LprError, ValueError) as exc:
        rec.update(status="error", error=str(exc))
    rec["timing_ms"] = (time.perf_counter() - t0) * 1e3
    return rec


def cmd_recognize(args, cfg):
    bundle = _load_bundle(args.model)
    if args.manifest:
        from .synth.corpus import read_manifest

        # records name images as the manifest does, so outputs do not depend on its location
        images = [(e.image, e.record["image"]) for e in read_manifest(args.manifest)]
    else:
        images = [(im, im) for im in args.image]
    jobs = [(im, shown, bundle, cfg.detect(), cfg.segment(), args.debug_dir) for im, shown in images]
    if args.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.parallelism) as pool:
            records = list(pool.map(_recognize_one, jobs))
    else:
        records = [_recognize_one(j) for j in jobs]
    text = "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in records)
    atomic_write_bytes(args.out, text.encode("utf-8"))
    n_ok = sum(r["status"] == "ok" for r in records)
    print(f"{args.out}: {n_ok}/{len(records)} ok")
    return EXIT_OK if n_ok else EXIT_ALL_FAILED


def cmd_eval(args, cfg):
    from .evaluate import EvalSetup, run_eval, write_report
    from .synth.corpus import read_manifest

    setup = EvalSetup(cfg.detect(), cfg.segment(), cfg.get("eval.iou_min"))
    if args.stage in ("char-recognize", "plate-recognize"):
        if not args.model:
            raise ConfigError(f"stage {args.stage} needs --model")
        bundle = _load_bundle(args.model)
        want = "chars" if args.stage == "char-recognize" else "plates"
        if bundle["route"] != want:
            raise ConfigError(f"stage {args.stage} needs a {want} model, got {bundle['route']}")
        if want == "chars":
            setup = EvalSetup(setup.det, setup.seg, setup.iou_min, char_model=bundle["model"])
        else:
            setup = EvalSetup(setup.det, setup.seg, setup.iou_min, dct_cfg=bundle["dct"],
                              svm=bundle["svm"], unknown_margin=bundle["unknown_margin"])
    entries = read_manifest(args.manifest)
    report = run_eval(entries, args.stage, setup, args.parallelism)
    detail = args.detail or os.path.splitext(args.out)[0] + ".scenes.csv"
    write_report(report, args.out, detail)
    print("FN,FP,TP,Precision,Recall,Accuracy")
    print(",".join(str(v) for v in report.row()))
    if "plate_string_rate" in report.extra:
        print(f"plate_string_rate,{report.extra['plate_string_rate']:.4f}")
    return EXIT_OK


def cmd_inspect(args, cfg):
    header, payload = persist.load_model(args.model)
    out = dict(header)
    if header["model_type"] == "pipeline-bundle":
        out["route"] = payload.get("route")
    print(json.dumps(out, sort_keys=True, indent=2, ensure_ascii=False))
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "recognize": cmd_recognize,
            "eval": cmd_eval, "inspect-model": cmd_inspect}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.parallelism < 1:
            raise ConfigError("--parallelism must be >= 1")
        cfg = load_config(args.config, args.overrides + getattr(args, "late_overrides", []))
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, persist.ModelFormatError, ImageReadError) as exc:
        print(f"egylpr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"egylpr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"egylpr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
