"""Manifest CSVs: format, quoting round-trip, train/dev partition."""

from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from cloneaug.corpus import ConditioningConfig, condition_corpus, ingest_corpus
from cloneaug.manifest import (
    HEADER,
    ManifestRow,
    build_eval_csv,
    build_train_dev,
    read_manifest,
    write_manifest,
)

from conftest import wav_bytes


def make_wavs(tmp_path, count, n_samples=160):
    blob = wav_bytes(n_samples, 16000)
    paths = []
    d = tmp_path / "wavs"
    d.mkdir(exist_ok=True)
    for k in range(count):
        p = d / f"gen_{k:05d}.wav"
        p.write_bytes(blob)
        paths.append(p)
    return paths


def test_header_and_round_trip(tmp_path):
    paths = make_wavs(tmp_path, 3)
    rows = [
        ManifestRow(wav_filename=p.name, wav_filesize=p.stat().st_size, transcript=t)
        for p, t in zip(paths, ["plain words", 'has "quotes"', "has, commas, here"])
    ]
    out = tmp_path / "wavs" / "m.csv"
    write_manifest(rows, out)
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(HEADER)
    assert "\r" not in text  # LF endings
    assert read_manifest(out) == rows


@given(
    transcripts=st.lists(
        st.text(
            # control characters never reach the writer: normalization
            # strips every Cc (CSV could not even carry NUL or a bare CR)
            alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
            max_size=40,
        ),
        min_size=1,
        max_size=8,
    )
)
def test_writer_round_trips_arbitrary_transcripts(tmp_path_factory, transcripts):
    # the CSV layer must be lossless over its input domain, commas and
    # quotes very much included
    out = tmp_path_factory.mktemp("m") / "m.csv"
    rows = [
        ManifestRow(wav_filename=f"w{k}.wav", wav_filesize=k + 1, transcript=t)
        for k, t in enumerate(transcripts)
    ]
    write_manifest(rows, out)
    assert read_manifest(out) == rows


def test_read_manifest_rejects_wrong_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_manifest(bad)


def test_build_train_dev_split(tmp_path):
    paths = make_wavs(tmp_path, 40)
    kept = [(p, f"transcript number {k}") for k, p in enumerate(paths)]
    train, dev = build_train_dev(
        kept, 15, seed=5, train_path=tmp_path / "train.csv", dev_path=tmp_path / "dev.csv"
    )
    assert len(dev) == 15
    assert len(train) == 25
    train_files = {r.wav_filename for r in train}
    dev_files = {r.wav_filename for r in dev}
    assert not train_files & dev_files
    assert len(train_files | dev_files) == 40


def test_build_train_dev_zero_val(tmp_path):
    paths = make_wavs(tmp_path, 4)
    kept = [(p, "words") for p in paths]
    train, dev = build_train_dev(
        kept, 0, seed=1, train_path=tmp_path / "t.csv", dev_path=tmp_path / "d.csv"
    )
    assert dev == []
    assert len(train) == 4


def test_build_train_dev_rejects_val_count(tmp_path):
    paths = make_wavs(tmp_path, 3)
    kept = [(p, "w") for p in paths]
    with pytest.raises(ValueError):
        build_train_dev(kept, 3, 0, tmp_path / "t.csv", tmp_path / "d.csv")


def test_build_train_dev_deterministic(tmp_path):
    paths = make_wavs(tmp_path, 20)
    kept = [(p, f"t {k}") for k, p in enumerate(paths)]
    for name in ("a", "b"):
        build_train_dev(
            kept, 6, 99,
            tmp_path / name / "train.csv", tmp_path / name / "dev.csv",
        )
    assert (tmp_path / "a" / "train.csv").read_bytes() == (
        tmp_path / "b" / "train.csv"
    ).read_bytes()
    assert (tmp_path / "a" / "dev.csv").read_bytes() == (
        tmp_path / "b" / "dev.csv"
    ).read_bytes()


def test_transcripts_are_normalized(tmp_path):
    paths = make_wavs(tmp_path, 1)
    build_train_dev(
        [(paths[0], "SEGMENT 1")],
        0,
        0,
        tmp_path / "train.csv",
        tmp_path / "dev.csv",
    )
    rows = read_manifest(tmp_path / "train.csv")
    assert rows[0].transcript == "segment one"


def test_filesize_matches_disk(tmp_path):
    paths = make_wavs(tmp_path, 5, n_samples=320)
    kept = [(p, "x") for p in paths]
    train, _ = build_train_dev(kept, 0, 0, tmp_path / "t.csv", tmp_path / "d.csv")
    for row in train:
        assert (tmp_path / row.wav_filename).stat().st_size == row.wav_filesize


def test_paths_relative_to_manifest_dir(tmp_path):
    paths = make_wavs(tmp_path, 2)
    kept = [(p, "x") for p in paths]
    out_dir = tmp_path / "deep" / "dir"
    train, _ = build_train_dev(kept, 0, 0, out_dir / "t.csv", out_dir / "d.csv")
    for row in train:
        assert not Path(row.wav_filename).is_absolute()
        assert (out_dir / row.wav_filename).resolve().is_file()


def test_build_eval_csv(tmp_path, corpus_factory):
    root = corpus_factory(count=6)
    entries = ingest_corpus(root).entries
    conditioned = condition_corpus(entries, ConditioningConfig(), tmp_path / "cond")
    rows = build_eval_csv(conditioned, tmp_path / "cond" / "test.csv")
    assert len(rows) == 6
    # corpus order preserved
    assert [Path(r.wav_filename).stem for r in rows] == [e.id for e in conditioned]


def test_build_eval_csv_single(tmp_path, corpus_factory):
    root = corpus_factory(count=1)
    entries = ingest_corpus(root).entries
    conditioned = condition_corpus(entries, ConditioningConfig(), tmp_path / "cond")
    assert len(build_eval_csv(conditioned, tmp_path / "test.csv")) == 1


def test_build_eval_csv_missing_wav(tmp_path, corpus_factory):
    root = corpus_factory(count=2)
    entries = ingest_corpus(root).entries
    conditioned = condition_corpus(entries, ConditioningConfig(), tmp_path / "cond")
    (tmp_path / "cond" / f"{conditioned[1].id}.wav").unlink()
    with pytest.raises(FileNotFoundError, match=conditioned[1].id):
        build_eval_csv(conditioned, tmp_path / "cond" / "test.csv")


def test_build_eval_csv_rejects_empty():
    with pytest.raises(ValueError):
        build_eval_csv([], Path("nowhere.csv"))


def test_comma_and_quote_transcripts_survive_emission(tmp_path):
    # digit-bearing tokens keep punctuation through normalization, which is
    # how commas and quotes legitimately reach the CSV layer
    paths = make_wavs(tmp_path, 2)
    kept = [
        (paths[0], 'the budget was 3,000 total'),
        (paths[1], 'a 3"5 bracket and don\'t touch'),
    ]
    train, _ = build_train_dev(kept, 0, 0, tmp_path / "t.csv", tmp_path / "d.csv")
    parsed = read_manifest(tmp_path / "t.csv")
    assert parsed == train
    assert parsed[0].transcript == "the budget was 3,000 total"
    assert parsed[1].transcript == 'a 3"5 bracket and don\'t touch'
