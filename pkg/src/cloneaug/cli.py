"""Command-line interface.

One subcommand per pipeline operation (ingest, split, plan, generate, filter,
manifest, train, infer, wer, rate-serve, report) plus ``run`` for a full
experiment. Commands that involve randomness take an explicit --seed and
every command leaves a stage record next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import backends
from .backends import BackendSpec, MockClonerKnobs, MockTranscriberKnobs, TrainRunConfig
from .corpus import (
    ConditioningConfig,
    SubsetSpec,
    condition_corpus,
    drop_empty_transcripts,
    ingest_corpus,
    load_corpus_index,
    read_id_file,
    save_corpus_index,
    select_by_ids,
    split_subsets,
    write_subset_id_files,
)
from .evalwer import evaluate_corpus
from .genplan import GenPlanConfig, plan_generation, read_plan, write_plan
from .manifest import build_eval_csv, build_train_dev, read_manifest
from .pipeline import ExperimentConfig, digest_inputs, run_experiment
from .qualfilter import FilterConfig, filter_generated, write_discard_report
from .rating import RatingStore, SessionDefinition, create_session

logger = logging.getLogger(__name__)


def _write_stage_record(
    out_dir: Path, stage: str, seed: int | None, started: float, config: dict
) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "stage": stage,
        "status": "completed",
        "seed": seed,
        "inputs_digest": digest_inputs(config),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    (out_dir / "stage_record.json").write_text(
        json.dumps(record, indent=2) + "\n", encoding="utf-8"
    )


def _load_backend_spec(path: Path, kind: str) -> BackendSpec:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return BackendSpec(
        kind=kind,
        command_template=payload["template"],
        timeout=payload.get("timeout"),
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    started = time.monotonic()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = ingest_corpus(Path(args.root))
    (out_dir / "ingest_report.txt").write_text(
        result.report.render(), encoding="utf-8"
    )
    cfg = ConditioningConfig(
        target_sample_rate=args.sample_rate,
        highpass_cutoff=args.highpass,
        target_level_db=args.level,
    )
    conditioned = condition_corpus(result.entries, cfg, out_dir)
    kept, removal = drop_empty_transcripts(conditioned)
    (out_dir / "removal_report.txt").write_text(removal.render(), encoding="utf-8")
    for rid in removal.removed_ids:
        for suffix in (".wav", ".txt", ".json"):
            stray = out_dir / f"{rid}{suffix}"
            if stray.exists():
                stray.unlink()
    save_corpus_index(kept, out_dir)
    _write_stage_record(
        out_dir,
        "ingest",
        None,
        started,
        {"root": str(args.root), "sample_rate": args.sample_rate},
    )
    print(
        f"ingested {result.report.num_entries} entries, "
        f"removed {len(removal.removed_ids)} empty transcript(s), "
        f"kept {len(kept)}"
    )
    return 0


def _parse_sizes(text: str) -> tuple:
    sizes = []
    for part in text.split(","):
        part = part.strip()
        sizes.append(part if part == "remainder" else int(part))
    return tuple(sizes)


def cmd_split(args: argparse.Namespace) -> int:
    started = time.monotonic()
    entries = load_corpus_index(Path(args.corpus))
    spec = SubsetSpec(sizes=_parse_sizes(args.sizes), seed=args.seed)
    subsets = split_subsets(entries, spec)
    paths = write_subset_id_files(subsets, Path(args.out))
    _write_stage_record(
        Path(args.out),
        "split",
        args.seed,
        started,
        {"sizes": args.sizes, "seed": args.seed},
    )
    for path, subset in zip(paths, subsets):
        print(f"{path}: {len(subset)} ids")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    started = time.monotonic()
    entries = load_corpus_index(Path(args.corpus))
    if args.ids:
        entries = select_by_ids(entries, read_id_file(Path(args.ids)))
    jobs = plan_generation(entries, GenPlanConfig(limit=args.limit, seed=args.seed))
    out = Path(args.out)
    write_plan(jobs, out)
    _write_stage_record(
        out.parent,
        "plan",
        args.seed,
        started,
        {"limit": args.limit, "seed": args.seed, "ids": args.ids or ""},
    )
    print(f"planned {len(jobs)} jobs -> {out}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    plan = read_plan(Path(args.plan))
    out_dir = Path(args.out_dir)
    if args.backend:
        spec = _load_backend_spec(Path(args.backend), "cloner")
        results = backends.run_cloner(plan, spec, out_dir)
    else:
        knobs = MockClonerKnobs(
            seconds_per_word=args.seconds_per_word,
            overlength_probability=args.overlength_probability,
            overlength_factor=args.overlength_factor,
            failure_probability=args.failure_probability,
            skip_probability=args.skip_probability,
            seed=args.seed,
        )
        results = backends.run_mock_cloner(plan, knobs, out_dir)
    ok = sum(1 for r in results if r.status == backends.STATUS_OK)
    _write_stage_record(
        out_dir, "generate", args.seed, started, {"plan": str(args.plan)}
    )
    print(f"generated {ok}/{len(results)} ok -> {out_dir}")
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    started = time.monotonic()
    results = backends.read_results(Path(args.results))
    ok_results = [r for r in results if r.status == backends.STATUS_OK]
    entries = load_corpus_index(Path(args.corpus))
    originals = {e.id: e.clip.duration for e in entries}
    cfg = FilterConfig(gap_size_percentage=args.gap_pct, gap_size=args.gap_size)
    kept, decisions, report = filter_generated(ok_results, originals, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_discard_report(out_dir / "discard_report.txt", cfg, decisions)
    (out_dir / "decisions.json").write_text(
        json.dumps([d.__dict__ for d in decisions], indent=2, default=str) + "\n",
        encoding="utf-8",
    )
    backends.write_results(kept, out_dir / "kept.json")
    _write_stage_record(
        out_dir,
        "filter",
        None,
        started,
        {"gap_pct": args.gap_pct, "gap_size": args.gap_size},
    )
    sys.stdout.write(report)
    return 0


def cmd_manifest(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if args.manifest_mode == "train-dev":
        kept = backends.read_results(Path(args.kept))
        jobs = {job.output_id: job for job in read_plan(Path(args.plan))}
        pairs = [(r.wav_path, jobs[r.output_id].text) for r in kept]
        out_dir = Path(args.out_dir)
        train_rows, dev_rows = build_train_dev(
            pairs,
            args.val_count,
            args.seed,
            out_dir / "train.csv",
            out_dir / "dev.csv",
        )
        _write_stage_record(
            out_dir,
            "manifest",
            args.seed,
            started,
            {"val_count": args.val_count},
        )
        print(f"train: {len(train_rows)} rows, dev: {len(dev_rows)} rows")
    else:
        entries = load_corpus_index(Path(args.corpus))
        if args.ids:
            entries = select_by_ids(entries, read_id_file(Path(args.ids)))
        rows = build_eval_csv(entries, Path(args.out))
        _write_stage_record(
            Path(args.out).parent, "manifest", None, started, {"ids": args.ids or ""}
        )
        print(f"eval manifest: {len(rows)} rows -> {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    started = time.monotonic()
    run = TrainRunConfig(
        epochs=args.epochs,
        dropout="standard" if args.dropout == "standard" else float(args.dropout),
        use_scorer=args.scorer,
    )
    out_dir = Path(args.out_dir)
    if args.backend:
        spec = _load_backend_spec(Path(args.backend), "transcriber_train")
        model = backends.run_transcriber_train(
            Path(args.train_csv),
            Path(args.dev_csv),
            spec,
            run,
            out_dir,
            model=args.model or "",
            scorer_path=args.scorer_path or "",
        )
    else:
        knobs = backends.MockTrainerKnobs(
            base_drop_probability=args.base_drop_probability, seed=args.seed
        )
        model = backends.run_mock_trainer(
            Path(args.train_csv), Path(args.dev_csv), run, knobs, out_dir
        )
    _write_stage_record(
        out_dir,
        "train",
        args.seed,
        started,
        {"epochs": args.epochs, "dropout": args.dropout, "scorer": args.scorer},
    )
    print(f"model: {model}")
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    started = time.monotonic()
    out_dir = Path(args.out).parent
    if args.backend:
        spec = _load_backend_spec(Path(args.backend), "transcriber_infer")
        hyps = backends.run_transcriber_infer(
            Path(args.csv), spec, args.model, out_dir, scorer=args.scorer_path or "no"
        )
    else:
        knobs = MockTranscriberKnobs(
            word_drop_probability=args.word_drop_probability, seed=args.seed
        )
        hyps = backends.run_mock_transcriber_infer(
            Path(args.csv), knobs, args.model
        )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(
        json.dumps([{"id": i, "hypothesis": h} for i, h in hyps], indent=2) + "\n",
        encoding="utf-8",
    )
    _write_stage_record(
        out_dir, "infer", args.seed, started, {"csv": str(args.csv)}
    )
    print(f"{len(hyps)} hypotheses -> {args.out}")
    return 0


def cmd_wer(args: argparse.Namespace) -> int:
    started = time.monotonic()
    rows = read_manifest(Path(args.refs))
    refs = {Path(r.wav_filename).stem: r.transcript for r in rows}
    payload = json.loads(Path(args.hyps).read_text(encoding="utf-8"))
    pairs = [(item["id"], refs[item["id"]], item["hypothesis"]) for item in payload]
    report = evaluate_corpus(pairs)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(
            json.dumps(report.as_dict(), indent=2) + "\n", encoding="utf-8"
        )
        _write_stage_record(
            Path(args.out).parent, "wer", None, started, {"refs": str(args.refs)}
        )
    print(f"{report.mean_wer:.3f}")
    return 0


def cmd_rate_serve(args: argparse.Namespace) -> int:
    store = RatingStore(Path(args.sessions_dir))
    if args.create:
        definition = SessionDefinition.from_json(Path(args.create))
        session = create_session(definition)
        store.create(session)
        print(f"created session {session.session_id} with {len(session.tasks)} tasks")
        if args.create_only:
            return 0
    import uvicorn

    from .rating_api import create_app

    app = create_app(store, ui_dir=Path(args.ui_dir) if args.ui_dir else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from . import reporting

    if args.run:
        out_dir = Path(args.out) if args.out else Path(args.run) / "report"
        written = reporting.render_run_report(Path(args.run), out_dir)
    elif args.session:
        store = RatingStore(Path(args.sessions_dir))
        scores = store.scores(args.session)
        out_dir = (
            Path(args.out)
            if args.out
            else Path(args.sessions_dir) / args.session / "report"
        )
        written = reporting.render_session_report(scores, out_dir)
    else:
        print("report: pass --run RUN_DIR or --session SESSION_ID", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config))
    report = run_experiment(cfg, stop_after=args.stop_after)
    if report is None:
        print(f"stopped after stage '{args.stop_after}'")
        return 0
    from .reporting import render_wer_table

    sys.stdout.write(render_wer_table(report["rows"]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloneaug",
        description=(
            "Voice-clone data augmentation pipeline: corpus prep, cloning-job "
            "planning, quality filtering, manifests, WER evaluation, and a "
            "human rating service."
        ),
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest, condition, and clean a raw corpus")
    p.add_argument("--root", required=True, help="raw corpus root")
    p.add_argument("--out", required=True, help="conditioned corpus directory")
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--highpass", type=float, default=80.0)
    p.add_argument("--level", type=float, default=-23.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="split a corpus into random subsets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sizes", required=True, help="e.g. 500,remainder")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("plan", help="plan voice-cloning jobs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ids", help="optional id file restricting the references")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("generate", help="run the cloner (command or mock) on a plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--backend", help="backend spec JSON; omit to use the mock")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seconds-per-word", type=float, default=0.3)
    p.add_argument("--overlength-probability", type=float, default=0.0)
    p.add_argument("--overlength-factor", type=float, default=3.0)
    p.add_argument("--failure-probability", type=float, default=0.0)
    p.add_argument("--skip-probability", type=float, default=0.0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="discard over-length generated audio")
    p.add_argument("--results", required=True, help="results.json from generate")
    p.add_argument("--corpus", required=True, help="conditioned corpus directory")
    p.add_argument("--gap-pct", type=float, default=50.0)
    p.add_argument("--gap-size", type=float, default=5.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("manifest", help="emit transcriber CSV manifests")
    msub = p.add_subparsers(dest="manifest_mode", required=True)
    pt = msub.add_parser("train-dev", help="train/dev split from kept audios")
    pt.add_argument("--kept", required=True, help="kept.json from filter")
    pt.add_argument("--plan", required=True, help="plan.json (for transcripts)")
    pt.add_argument("--val-count", type=int, required=True)
    pt.add_argument("--seed", type=int, required=True)
    pt.add_argument("--out-dir", required=True)
    pt.set_defaults(func=cmd_manifest)
    pe = msub.add_parser("eval", help="test CSV from a corpus subset")
    pe.add_argument("--corpus", required=True)
    pe.add_argument("--ids")
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=cmd_manifest)

    p = sub.add_parser("train", help="run transcriber training (command or mock)")
    p.add_argument("--train-csv", required=True)
    p.add_argument("--dev-csv", required=True)
    p.add_argument("--backend", help="backend spec JSON; omit to use the mock")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--dropout", default="standard")
    p.add_argument("--scorer", action="store_true")
    p.add_argument("--scorer-path", default="")
    p.add_argument("--model", default="")
    p.add_argument("--base-drop-probability", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="transcribe a manifest (command or mock)")
    p.add_argument("--csv", required=True)
    p.add_argument("--backend", help="backend spec JSON; omit to use the mock")
    p.add_argument("--model", default="pretrained")
    p.add_argument("--scorer-path", default="")
    p.add_argument("--word-drop-probability", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="hypotheses JSON path")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("wer", help="score hypotheses against a reference manifest")
    p.add_argument("--refs", required=True, help="manifest CSV with references")
    p.add_argument("--hyps", required=True, help="hypotheses JSON")
    p.add_argument("--out", help="optional JSON report path")
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("rate-serve", help="serve the rating API (and optional UI)")
    p.add_argument("--sessions-dir", required=True)
    p.add_argument("--create", help="session definition JSON to create first")
    p.add_argument("--create-only", action="store_true")
    p.add_argument("--ui-dir", help="static UI directory to serve at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_rate_serve)

    p = sub.add_parser("report", help="render tables, CSVs, and figures")
    p.add_argument("--run", help="experiment output root")
    p.add_argument("--session", help="rating session id")
    p.add_argument("--sessions-dir", default="sessions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="run a full experiment from a config JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--stop-after", help="halt after this stage (for debugging)")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, RuntimeError) as exc:
        if args.verbose:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
