import csv
import json

import pytest

from egylpr.cli import EXIT_ALL_FAILED, EXIT_INVALID, EXIT_IO, EXIT_OK, build_parser, main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A trained character model and a small scene corpus, built through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    train, test = root / "train", root / "test"
    assert main(["--seed", "3", "synth", "--n", "150", "--out", str(train)]) == EXIT_OK
    assert main(["synth", "--seed", "9", "--n", "6", "--out", str(test)]) == EXIT_OK
    model = root / "chars.json"
    assert main(["train", "--stage", "chars", "--manifest", str(train / "manifest.jsonl"),
                 "--out", str(model)]) == EXIT_OK
    return root, test, model


def test_recognize_and_eval(workspace, capsys):
    root, test, model = workspace
    out = root / "rec.jsonl"
    assert main(["recognize", "--model", str(model), "--manifest", str(test / "manifest.jsonl"),
                 "--out", str(out)]) == EXIT_OK
    recs = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert len(recs) == 6 and all(r["status"] == "ok" for r in recs)
    assert all("plate_string" in r and r["timing_ms"] > 0 for r in recs)
    assert all(not r["image"].startswith("/") for r in recs)

    table = root / "eval.csv"
    assert main(["eval", "--manifest", str(test / "manifest.jsonl"), "--stage", "char-recognize",
                 "--model", str(model), "--out", str(table)]) == EXIT_OK
    assert table.read_text().splitlines()[0] == "FN,FP,TP,Precision,Recall,Accuracy"
    detail = list(csv.DictReader((root / "eval.scenes.csv").open()))
    row = table.read_text().splitlines()[1].split(",")
    sums = [sum(int(d[k]) for d in detail) for k in ("fn", "fp", "tp")]
    assert [int(v) for v in row[:3]] == sums
    assert "FN,FP,TP" in capsys.readouterr().out


def test_eval_detect_in_parallel(workspace):
    root, test, _ = workspace
    assert main(["--parallelism", "2", "eval", "--manifest", str(test / "manifest.jsonl"),
                 "--stage", "plate-detect", "--out", str(root / "det.csv")]) == EXIT_OK
    row = (root / "det.csv").read_text().splitlines()[1].split(",")
    assert row[:3] == ["0", "0", "6"]


def test_inspect_model(workspace, capsys):
    _, _, model = workspace
    assert main(["inspect-model", str(model)]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["model_type"] == "pipeline-bundle" and info["route"] == "chars"


def test_recognize_unreadable_images_exit_1(workspace, tmp_path):
    _, _, model = workspace
    bad = tmp_path / "x.pgm"
    bad.write_bytes(b"nope")
    out = tmp_path / "r.jsonl"
    assert main(["recognize", "--model", str(model), "--image", str(bad), "--out", str(out)]) == EXIT_ALL_FAILED
    assert json.loads(out.read_text())["status"] == "read-error"


def test_exit_codes(tmp_path, workspace):
    _, test, model = workspace
    assert main(["synth", "--n", "0", "--out", str(tmp_path / "z")]) == EXIT_INVALID
    assert main(["synth", "--n", "1", "--out", "/nonexistent/parent/out"]) == EXIT_IO
    assert main(["--set", "detect.bogus=1", "synth", "--n", "1", "--out", str(tmp_path / "q")]) == EXIT_INVALID
    assert main(["inspect-model", str(tmp_path / "missing.json")]) == EXIT_IO
    junk = tmp_path / "junk.json"
    junk.write_text("{}")
    assert main(["inspect-model", str(junk)]) == EXIT_INVALID
    assert main(["eval", "--manifest", str(test / "manifest.jsonl"), "--stage", "char-recognize",
                 "--out", str(tmp_path / "e.csv")]) == EXIT_INVALID
    assert main(["--parallelism", "0", "inspect-model", str(model)]) == EXIT_INVALID
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--manifest", "m", "--stage", "bogus", "--out", "o"])
    assert exc.value.code == 2


def test_set_before_and_after_subcommand_merge():
    args = build_parser().parse_args(["--set", "b=2", "synth", "--set", "a=1", "--n", "1", "--out", "x"])
    assert args.overrides + args.late_overrides == ["b=2", "a=1"]
    args = build_parser().parse_args(["--seed", "4", "synth", "--n", "1", "--out", "x"])
    assert args.seed == 4
