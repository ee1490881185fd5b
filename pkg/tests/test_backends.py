"""Backend adapters and mocks: protocol, determinism, failure handling."""

import json
import sys
from collections import Counter
from pathlib import Path

import pytest

from cloneaug import audio
from cloneaug.backends import (
    BackendError,
    BackendSpec,
    GenerationResult,
    MockClonerKnobs,
    MockTrainerKnobs,
    MockTranscriberKnobs,
    TrainRunConfig,
    expand_command,
    mock_clone,
    run_cloner,
    run_mock_cloner,
    run_mock_trainer,
    run_mock_transcriber_infer,
    run_transcriber_infer,
    run_transcriber_train,
)
from cloneaug.genplan import GenerationJob, make_output_id
from cloneaug.manifest import ManifestRow, write_manifest

from conftest import wav_bytes


def jobs_of(n, words=4):
    out = []
    for k in range(n):
        ref, src = f"{k + 1:06d}", f"{(k % n) + 2:06d}"
        out.append(
            GenerationJob(
                reference_id=ref,
                transcript_source_id=src,
                output_id=make_output_id(ref, src) + f"_{k}",
                text=" ".join(f"w{j}" for j in range(words)),
            )
        )
    return out


def manifest_with(tmp_path, transcripts):
    d = tmp_path / "m"
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, transcript in enumerate(transcripts):
        wav = d / f"utt_{k:04d}.wav"
        wav.write_bytes(wav_bytes(160, 16000))
        rows.append(
            ManifestRow(
                wav_filename=wav.name,
                wav_filesize=wav.stat().st_size,
                transcript=transcript,
            )
        )
    path = d / "manifest.csv"
    write_manifest(rows, path)
    return path


# -- spec validation ---------------------------------------------------------


def test_backend_spec_requires_placeholders():
    with pytest.raises(ValueError, match="plan"):
        BackendSpec(kind="cloner", command_template="run --out {out_dir}")
    with pytest.raises(ValueError, match="unknown backend kind"):
        BackendSpec(kind="mystery", command_template="x")
    BackendSpec(kind="cloner", command_template="run {plan} {out_dir}")


def test_expand_command_keeps_spaced_paths_whole():
    argv = expand_command(
        "tool --plan {plan} --out {out_dir}",
        {"plan": "/tmp/with space/plan.json", "out_dir": "/tmp/o"},
    )
    assert argv == ["tool", "--plan", "/tmp/with space/plan.json", "--out", "/tmp/o"]


def test_generation_result_invariant():
    with pytest.raises(ValueError):
        GenerationResult(output_id="x", status="ok")  # ok without wav
    with pytest.raises(ValueError):
        GenerationResult(
            output_id="x", status="failed", wav_path=Path("a.wav"), duration=1.0
        )
    with pytest.raises(ValueError):
        GenerationResult(output_id="x", status="exploded")


def test_train_run_config_validation():
    with pytest.raises(ValueError):
        TrainRunConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainRunConfig(epochs=1, dropout=1.5)
    with pytest.raises(ValueError):
        TrainRunConfig(epochs=1, dropout="weird")
    assert TrainRunConfig(epochs=1, dropout=0.4).dropout_label == "0.4"


# -- mock cloner --------------------------------------------------------------


def test_mock_clone_duration_contract(tmp_path):
    job = jobs_of(1, words=10)[0]
    knobs = MockClonerKnobs(seconds_per_word=0.3, seed=1)
    result = mock_clone(job, knobs, tmp_path)
    assert result.status == "ok"
    assert result.duration == pytest.approx(3.0, abs=1e-4)
    assert abs(audio.wav_duration(result.wav_path) - 3.0) < 1e-3


def test_mock_clone_overlength(tmp_path):
    job = jobs_of(1, words=10)[0]
    knobs = MockClonerKnobs(
        seconds_per_word=0.3, overlength_probability=1.0, overlength_factor=3.0, seed=1
    )
    result = mock_clone(job, knobs, tmp_path)
    assert result.duration == pytest.approx(9.0, abs=1e-4)


def test_mock_cloner_all_failed(tmp_path):
    plan = jobs_of(5)
    results = run_mock_cloner(plan, MockClonerKnobs(failure_probability=1.0), tmp_path)
    assert all(r.status == "failed" for r in results)
    assert not list(tmp_path.glob("*.wav"))


def test_mock_cloner_all_skipped(tmp_path):
    plan = jobs_of(3)
    results = run_mock_cloner(plan, MockClonerKnobs(skip_probability=1.0), tmp_path)
    assert all(r.status == "skipped_small_spectrogram" for r in results)


def test_mock_cloner_no_fault_all_ok(tmp_path):
    plan = jobs_of(6, words=5)
    results = run_mock_cloner(plan, MockClonerKnobs(seed=3), tmp_path)
    assert all(r.status == "ok" for r in results)
    assert all(r.duration == pytest.approx(1.5, abs=1e-4) for r in results)
    assert len(list(tmp_path.glob("*.wav"))) == 6


def test_mock_cloner_deterministic_bytes(tmp_path):
    plan = jobs_of(4)
    knobs = MockClonerKnobs(seed=11, failure_probability=0.3)
    a = run_mock_cloner(plan, knobs, tmp_path / "a")
    b = run_mock_cloner(plan, knobs, tmp_path / "b")
    assert [r.status for r in a] == [r.status for r in b]
    for wav_a in (tmp_path / "a").glob("*.wav"):
        wav_b = tmp_path / "b" / wav_a.name
        assert wav_a.read_bytes() == wav_b.read_bytes()
    ra = json.loads((tmp_path / "a" / "results.json").read_text())
    rb = json.loads((tmp_path / "b" / "results.json").read_text())
    assert [x["status"] for x in ra] == [x["status"] for x in rb]


def test_mock_cloner_order_independent(tmp_path):
    plan = jobs_of(6)
    knobs = MockClonerKnobs(seed=5, failure_probability=0.5)
    fwd = run_mock_cloner(plan, knobs, tmp_path / "f")
    rev = run_mock_cloner(list(reversed(plan)), knobs, tmp_path / "r")
    by_id_f = {r.output_id: r.status for r in fwd}
    by_id_r = {r.output_id: r.status for r in rev}
    assert by_id_f == by_id_r


def test_round_trip_result_counts(tmp_path):
    plan = jobs_of(25)
    results = run_mock_cloner(
        plan, MockClonerKnobs(failure_probability=0.4, seed=2), tmp_path
    )
    assert len(results) == len(plan)
    assert Counter(r.output_id for r in results) == Counter(j.output_id for j in plan)


# -- command cloner -----------------------------------------------------------


FAKE_CLONER = r"""
import json, struct, sys
plan_path, out_dir = sys.argv[1], sys.argv[2]
jobs = json.load(open(plan_path))
results = []
for job in jobs:
    n = 1600
    data = b"\x00\x00" * n
    hdr = struct.pack("<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(data), b"WAVE",
                      b"fmt ", 16, 1, 1, 16000, 32000, 2, 16, b"data", len(data))
    wav = f"{out_dir}/{job['output_id']}.wav"
    open(wav, "wb").write(hdr + data)
    results.append({"output_id": job["output_id"], "status": "ok",
                    "wav_path": wav, "duration": n / 16000})
json.dump(results, open(f"{out_dir}/results.json", "w"))
"""


def _script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body)
    return path


def test_run_cloner_command_backend(tmp_path):
    script = _script(tmp_path, "fake_cloner.py", FAKE_CLONER)
    spec = BackendSpec(
        kind="cloner",
        command_template=f"{sys.executable} {script} {{plan}} {{out_dir}}",
    )
    plan = jobs_of(4)
    results = run_cloner(plan, spec, tmp_path / "out")
    assert all(r.status == "ok" for r in results)
    assert (tmp_path / "out" / "run_manifest.json").is_file()
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["status_counts"] == {"ok": 4}


def test_run_cloner_batch_failure(tmp_path):
    script = _script(tmp_path, "boom.py", "import sys; sys.exit(3)")
    spec = BackendSpec(
        kind="cloner",
        command_template=f"{sys.executable} {script} {{plan}} {{out_dir}}",
    )
    with pytest.raises(BackendError, match="exited 3"):
        run_cloner(jobs_of(2), spec, tmp_path / "out")


def test_run_cloner_timeout(tmp_path):
    script = _script(tmp_path, "slow.py", "import time; time.sleep(30)")
    spec = BackendSpec(
        kind="cloner",
        command_template=f"{sys.executable} {script} {{plan}} {{out_dir}}",
        timeout=0.5,
    )
    with pytest.raises(BackendError, match="timed out"):
        run_cloner(jobs_of(1), spec, tmp_path / "out")


def test_run_cloner_result_mismatch(tmp_path):
    body = FAKE_CLONER.replace("for job in jobs:", "for job in jobs[:-1]:")
    script = _script(tmp_path, "short.py", body)
    spec = BackendSpec(
        kind="cloner",
        command_template=f"{sys.executable} {script} {{plan}} {{out_dir}}",
    )
    with pytest.raises(BackendError, match="results"):
        run_cloner(jobs_of(3), spec, tmp_path / "out")


# -- mock transcriber / trainer ------------------------------------------------


def test_mock_transcriber_identity_when_clean(tmp_path):
    manifest = manifest_with(tmp_path, ["hello there world", "more words here"])
    hyps = run_mock_transcriber_infer(manifest, MockTranscriberKnobs(0.0, seed=1))
    assert hyps == [
        ("utt_0000", "hello there world"),
        ("utt_0001", "more words here"),
    ]


def test_mock_transcriber_empty_manifest(tmp_path):
    manifest = manifest_with(tmp_path, [])
    assert run_mock_transcriber_infer(manifest, MockTranscriberKnobs(0.0)) == []


def test_mock_transcriber_deterministic(tmp_path):
    manifest = manifest_with(tmp_path, ["a b c d e f g h"] * 5)
    knobs = MockTranscriberKnobs(0.5, seed=9)
    assert run_mock_transcriber_infer(manifest, knobs) == run_mock_transcriber_infer(
        manifest, knobs
    )


def test_mock_trainer_stub_and_literals(tmp_path):
    train = manifest_with(tmp_path / "t", ["x y z"] * 3)
    dev = manifest_with(tmp_path / "d", ["p q r"])
    cfg = TrainRunConfig(epochs=200, dropout=0.4, use_scorer=False)
    model = run_mock_trainer(train, dev, cfg, MockTrainerKnobs(0.2), tmp_path / "run")
    payload = json.loads(model.read_text())
    assert payload["epochs"] == 200
    assert payload["dropout"] == "0.4"
    assert payload["use_scorer"] is False
    assert payload["word_drop_probability"] > 0.2


def test_mock_trainer_rejects_empty_dev(tmp_path):
    train = manifest_with(tmp_path / "t", ["x y z"])
    dev = manifest_with(tmp_path / "d", [])
    with pytest.raises(ValueError, match="empty"):
        run_mock_trainer(
            train, dev, TrainRunConfig(epochs=1), MockTrainerKnobs(), tmp_path / "r"
        )


def test_mock_trainer_rejects_overlap(tmp_path):
    d = tmp_path / "m"
    d.mkdir()
    wav = d / "same.wav"
    wav.write_bytes(wav_bytes(160, 16000))
    row = ManifestRow(wav_filename="same.wav", wav_filesize=wav.stat().st_size, transcript="x")
    write_manifest([row], d / "train.csv")
    write_manifest([row], d / "dev.csv")
    with pytest.raises(ValueError, match="overlap"):
        run_mock_trainer(
            d / "train.csv", d / "dev.csv", TrainRunConfig(epochs=1),
            MockTrainerKnobs(), tmp_path / "r",
        )


def test_trained_model_changes_mock_channel(tmp_path):
    train = manifest_with(tmp_path / "t", ["a b c d e f g h i j"] * 4)
    dev = manifest_with(tmp_path / "d", ["k l m n"])
    model = run_mock_trainer(
        train, dev, TrainRunConfig(epochs=5), MockTrainerKnobs(0.3), tmp_path / "run"
    )
    eval_manifest = manifest_with(tmp_path / "e", ["one two three four five"] * 40)
    knobs = MockTranscriberKnobs(word_drop_probability=0.0, seed=4)
    clean = run_mock_transcriber_infer(eval_manifest, knobs, model_ref="pretrained")
    degraded = run_mock_transcriber_infer(eval_manifest, knobs, model_ref=str(model))
    dropped = sum(
        len(c[1].split()) - len(d[1].split()) for c, d in zip(clean, degraded)
    )
    assert dropped > 0  # the stub's higher drop rate is actually applied


# -- command transcriber -------------------------------------------------------


FAKE_INFER = r"""
import csv, json, pathlib, sys
csv_path, out_dir = sys.argv[1], sys.argv[2]
rows = list(csv.DictReader(open(csv_path)))
hyps = [{"id": pathlib.Path(r["wav_filename"]).stem, "hypothesis": r["transcript"]}
        for r in rows]
json.dump(hyps, open(f"{out_dir}/hypotheses.json", "w"))
"""


def test_run_transcriber_infer_command(tmp_path):
    manifest = manifest_with(tmp_path, ["alpha bravo", "charlie delta"])
    script = _script(tmp_path, "fake_infer.py", FAKE_INFER)
    spec = BackendSpec(
        kind="transcriber_infer",
        command_template=f"{sys.executable} {script} {{dev_csv}} {{out_dir}} {{model}}",
    )
    hyps = run_transcriber_infer(manifest, spec, "model.pbmm", tmp_path / "out")
    assert hyps == [("utt_0000", "alpha bravo"), ("utt_0001", "charlie delta")]


def test_run_transcriber_infer_row_mismatch(tmp_path):
    manifest = manifest_with(tmp_path, ["a", "b", "c"])
    body = FAKE_INFER.replace("for r in rows]", "for r in rows[:-1]]")
    script = _script(tmp_path, "short_infer.py", body)
    spec = BackendSpec(
        kind="transcriber_infer",
        command_template=f"{sys.executable} {script} {{dev_csv}} {{out_dir}} {{model}}",
    )
    with pytest.raises(BackendError, match="count"):
        run_transcriber_infer(manifest, spec, "m", tmp_path / "out")


FAKE_TRAIN = r"""
import sys, pathlib
out_dir = pathlib.Path(sys.argv[1])
args = " ".join(sys.argv[2:])
model = out_dir / "best.model"
model.write_text(args + "\n")
(out_dir / "MODEL_REF").write_text(str(model) + "\n")
"""


def test_run_transcriber_train_command_literals(tmp_path):
    train = manifest_with(tmp_path / "t", ["x y"] * 2)
    dev = manifest_with(tmp_path / "d", ["z w"])
    script = _script(tmp_path, "fake_train.py", FAKE_TRAIN)
    spec = BackendSpec(
        kind="transcriber_train",
        command_template=(
            f"{sys.executable} {script} {{out_dir}} --train {{train_csv}} "
            "--dev {dev_csv} --epochs {epochs} --dropout {dropout} --scorer {scorer}"
        ),
    )
    cfg = TrainRunConfig(epochs=200, dropout=0.4, use_scorer=False)
    model = run_transcriber_train(train, dev, spec, cfg, tmp_path / "out")
    recorded = model.read_text()
    # the expanded command line carries the literal hyperparameters
    assert "--epochs 200" in recorded
    assert "--dropout 0.4" in recorded
    assert "--scorer no" in recorded


def test_run_transcriber_train_missing_artifact(tmp_path):
    train = manifest_with(tmp_path / "t", ["x y"])
    dev = manifest_with(tmp_path / "d", ["z"])
    script = _script(tmp_path, "noop.py", "pass")
    spec = BackendSpec(
        kind="transcriber_train",
        command_template=(
            f"{sys.executable} {script} {{train_csv}} {{dev_csv}} "
            "{epochs} {dropout} {out_dir}"
        ),
    )
    with pytest.raises(BackendError, match="MODEL_REF"):
        run_transcriber_train(
            train, dev, spec, TrainRunConfig(epochs=1), tmp_path / "out"
        )
