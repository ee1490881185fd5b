"""Experiment orchestration: the full augmentation pipeline at any scale.

Stages run in a fixed order (ingest, condition, split, optional cloner-train
export, plan, generate, filter, manifest, baseline eval, per-scenario
train+eval, report). Every stage writes its artifacts under
``<output_root>/<stage>/`` together with a stage record carrying input and
output digests; re-running a completed stage with unchanged inputs is a
no-op, which is what makes interrupted runs resumable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import backends, reporting
from .backends import (
    BackendSpec,
    MockClonerKnobs,
    MockTrainerKnobs,
    MockTranscriberKnobs,
    TrainRunConfig,
)
from .corpus import (
    ConditioningConfig,
    SubsetSpec,
    condition_corpus,
    drop_empty_transcripts,
    export_cloner_training_layout,
    ingest_corpus,
    load_corpus_index,
    save_corpus_index,
    split_subsets,
    write_subset_id_files,
)
from .evalwer import evaluate_corpus
from .genplan import GenPlanConfig, plan_generation, read_plan, write_plan
from .manifest import build_eval_csv, build_train_dev, read_manifest
from .qualfilter import FilterConfig, filter_generated, write_discard_report

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    train: TrainRunConfig


def _derive(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ExperimentConfig:
    corpus_root: Path
    output_root: Path
    seed: int
    conditioning: ConditioningConfig
    subset_sizes: tuple
    subset_seed: int
    eval_subset: int
    generation_subset: int
    cloner_training_subset: int | None
    gen_limit: int
    gen_seed: int
    cloner: dict
    filter_cfg: FilterConfig
    val_count: int
    manifest_seed: int
    transcriber: dict
    scenarios: list[Scenario]

    @classmethod
    def from_json(cls, path: Path) -> "ExperimentConfig":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(payload, base_dir=Path(path).parent)

    @classmethod
    def from_dict(cls, payload: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        base = Path(base_dir) if base_dir else Path.cwd()

        def _path(value: str) -> Path:
            p = Path(value)
            return p if p.is_absolute() else base / p

        seed = payload.get("seed", 0)
        cond = payload.get("conditioning", {})
        subsets = payload.get("subsets", {})
        roles = payload.get("roles", {})
        generation = payload.get("generation", {})
        man = payload.get("manifest", {})
        filt = payload.get("filter", {})
        scenarios = [
            Scenario(
                name=item["name"],
                train=TrainRunConfig(
                    epochs=item.get("epochs", 200),
                    dropout=item.get("dropout", "standard"),
                    use_scorer=item.get("use_scorer", False),
                ),
            )
            for item in payload.get("scenarios", [])
        ]
        return cls(
            corpus_root=_path(payload["corpus_root"]),
            output_root=_path(payload["output_root"]),
            seed=seed,
            conditioning=ConditioningConfig(
                target_sample_rate=cond.get("target_sample_rate", 16000),
                highpass_cutoff=cond.get("highpass_cutoff", 80.0),
                target_level_db=cond.get("target_level_db", -23.0),
            ),
            subset_sizes=tuple(subsets.get("sizes", ["remainder"])),
            subset_seed=subsets.get("seed", _derive(seed, "split")),
            eval_subset=roles.get("eval", 1),
            generation_subset=roles.get("generation", 2),
            cloner_training_subset=roles.get("cloner_training"),
            gen_limit=generation.get("limit", 21),
            gen_seed=generation.get("seed", _derive(seed, "plan")),
            cloner=payload.get("cloner", {"type": "mock"}),
            filter_cfg=FilterConfig(
                gap_size_percentage=filt.get("gap_size_percentage", 50.0),
                gap_size=filt.get("gap_size", 5.0),
            ),
            val_count=man.get("val_count", 0),
            manifest_seed=man.get("seed", _derive(seed, "manifest")),
            transcriber=payload.get("transcriber", {"type": "mock"}),
            scenarios=scenarios,
        )

    def validate(self) -> None:
        if not self.scenarios:
            raise ConfigError("scenario list is empty; nothing to train")
        n_subsets = len(self.subset_sizes)
        for label, idx in (
            ("eval", self.eval_subset),
            ("generation", self.generation_subset),
            ("cloner_training", self.cloner_training_subset),
        ):
            if idx is None:
                continue
            if not 1 <= idx <= n_subsets:
                raise ConfigError(
                    f"roles.{label} = {idx} does not name one of the "
                    f"{n_subsets} configured subsets"
                )
        if self.cloner.get("type", "mock") not in ("mock", "command"):
            raise ConfigError(f"unknown cloner type {self.cloner.get('type')!r}")
        if self.transcriber.get("type", "mock") not in ("mock", "command"):
            raise ConfigError(
                f"unknown transcriber type {self.transcriber.get('type')!r}"
            )


# ---------------------------------------------------------------------------
# digests and stage records


def _digest_file(path: Path, hasher) -> None:
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            hasher.update(chunk)


def digest_paths(paths: Sequence[Path], relative_to: Path | None = None) -> str:
    """Stable digest over file names and bytes."""
    hasher = hashlib.sha256()
    files: list[Path] = []
    for path in paths:
        path = Path(path)
        if path.is_dir():
            files.extend(p for p in sorted(path.rglob("*")) if p.is_file())
        elif path.is_file():
            files.append(path)
    for path in sorted(files):
        name = path.relative_to(relative_to) if relative_to else path.name
        hasher.update(str(name).encode("utf-8"))
        _digest_file(path, hasher)
    return hasher.hexdigest()


def digest_inputs(config: dict, files: Sequence[Path] = ()) -> str:
    hasher = hashlib.sha256()
    hasher.update(json.dumps(config, sort_keys=True, default=str).encode("utf-8"))
    hasher.update(digest_paths(files).encode("utf-8"))
    return hasher.hexdigest()


@dataclass
class StageRecord:
    stage: str
    status: str
    seed: int | None
    inputs_digest: str
    outputs_digest: str
    wall_time_s: float

    def as_dict(self) -> dict:
        return self.__dict__.copy()


class ExperimentRunner:
    """Execute the stage graph for one configuration."""

    def __init__(self, cfg: ExperimentConfig) -> None:
        cfg.validate()
        self.cfg = cfg
        self.root = Path(cfg.output_root)

    # -- stage machinery ----------------------------------------------------

    def _stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def _record_path(self, stage: str) -> Path:
        return self._stage_dir(stage) / "stage_record.json"

    def _outputs_digest(self, stage: str) -> str:
        stage_dir = self._stage_dir(stage)
        files = [
            p
            for p in sorted(stage_dir.rglob("*"))
            if p.is_file() and p.name != "stage_record.json"
        ]
        return digest_paths(files, relative_to=stage_dir)

    def _run_stage(
        self,
        stage: str,
        inputs_digest: str,
        fn: Callable[[Path], None],
        seed: int | None = None,
    ) -> None:
        record_path = self._record_path(stage)
        if record_path.is_file():
            record = json.loads(record_path.read_text(encoding="utf-8"))
            if (
                record.get("status") == "completed"
                and record.get("inputs_digest") == inputs_digest
                and record.get("outputs_digest") == self._outputs_digest(stage)
            ):
                logger.info("stage %s is up to date; skipping", stage)
                return
        stage_dir = self._stage_dir(stage)
        stage_dir.mkdir(parents=True, exist_ok=True)
        started = time.monotonic()
        try:
            fn(stage_dir)
        except Exception as exc:
            raise StageError(stage, exc) from exc
        record = StageRecord(
            stage=stage,
            status="completed",
            seed=seed,
            inputs_digest=inputs_digest,
            outputs_digest=self._outputs_digest(stage),
            wall_time_s=round(time.monotonic() - started, 3),
        )
        record_path.write_text(
            json.dumps(record.as_dict(), indent=2) + "\n", encoding="utf-8"
        )

    # -- backends -----------------------------------------------------------

    def _generate(self, plan, out_dir: Path):
        cloner = self.cfg.cloner
        if cloner.get("type", "mock") == "mock":
            knobs = MockClonerKnobs(
                seconds_per_word=cloner.get("seconds_per_word", 0.3),
                overlength_probability=cloner.get("overlength_probability", 0.0),
                overlength_factor=cloner.get("overlength_factor", 3.0),
                failure_probability=cloner.get("failure_probability", 0.0),
                skip_probability=cloner.get("skip_probability", 0.0),
                seed=cloner.get("seed", _derive(self.cfg.seed, "cloner")),
                sample_rate=self.cfg.conditioning.target_sample_rate,
            )
            return backends.run_mock_cloner(plan, knobs, out_dir)
        spec = BackendSpec(
            kind="cloner",
            command_template=cloner["template"],
            timeout=cloner.get("timeout"),
        )
        return backends.run_cloner(plan, spec, out_dir)

    def _infer(self, manifest_csv: Path, model_ref: str, out_dir: Path):
        transcriber = self.cfg.transcriber
        if transcriber.get("type", "mock") == "mock":
            knobs = MockTranscriberKnobs(
                word_drop_probability=transcriber.get("word_drop_probability", 0.2),
                seed=transcriber.get("seed", _derive(self.cfg.seed, "transcriber")),
            )
            hyps = backends.run_mock_transcriber_infer(manifest_csv, knobs, model_ref)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "hypotheses.json").write_text(
                json.dumps(
                    [{"id": i, "hypothesis": h} for i, h in hyps], indent=2
                )
                + "\n",
                encoding="utf-8",
            )
            return hyps
        spec = BackendSpec(
            kind="transcriber_infer",
            command_template=transcriber["infer_template"],
            timeout=transcriber.get("timeout"),
        )
        return backends.run_transcriber_infer(
            manifest_csv,
            spec,
            model_ref,
            out_dir,
            scorer=transcriber.get("scorer", "no"),
        )

    def _train(
        self, train_csv: Path, dev_csv: Path, run: TrainRunConfig, out_dir: Path
    ) -> str:
        transcriber = self.cfg.transcriber
        if transcriber.get("type", "mock") == "mock":
            knobs = MockTrainerKnobs(
                base_drop_probability=transcriber.get("word_drop_probability", 0.2),
                seed=transcriber.get("seed", _derive(self.cfg.seed, "transcriber")),
            )
            return str(
                backends.run_mock_trainer(train_csv, dev_csv, run, knobs, out_dir)
            )
        spec = BackendSpec(
            kind="transcriber_train",
            command_template=transcriber["train_template"],
            timeout=transcriber.get("timeout"),
        )
        return str(
            backends.run_transcriber_train(
                train_csv,
                dev_csv,
                spec,
                run,
                out_dir,
                model=transcriber.get("model", ""),
                scorer_path=transcriber.get("scorer", ""),
            )
        )

    def _baseline_model_ref(self) -> str:
        return self.cfg.transcriber.get("model", "pretrained")

    # -- the run ------------------------------------------------------------

    def run(self, stop_after: str | None = None) -> dict | None:
        """Execute stages in order; returns the report unless stopped early."""
        cfg = self.cfg

        def done(stage: str) -> bool:
            return stop_after == stage

        # ingest: pair raw files, write the pairing report
        ingest_cfg = {"corpus_root": str(cfg.corpus_root)}

        def do_ingest(stage_dir: Path) -> None:
            result = ingest_corpus(cfg.corpus_root)
            (stage_dir / "ingest_report.txt").write_text(
                result.report.render(), encoding="utf-8"
            )
            raw_index = [
                {"id": e.id, "wav": str(e.clip.path), "raw_text": e.raw_text}
                for e in result.entries
            ]
            (stage_dir / "raw_index.json").write_text(
                json.dumps(raw_index, indent=2) + "\n", encoding="utf-8"
            )

        self._run_stage(
            "ingest",
            digest_inputs(ingest_cfg, [cfg.corpus_root]),
            do_ingest,
        )
        if done("ingest"):
            return None

        # condition: resample/filter/normalize, then drop empty transcripts
        cond_cfg = {
            "target_sample_rate": cfg.conditioning.target_sample_rate,
            "highpass_cutoff": cfg.conditioning.highpass_cutoff,
            "target_level_db": cfg.conditioning.target_level_db,
        }

        def do_condition(stage_dir: Path) -> None:
            result = ingest_corpus(cfg.corpus_root)
            conditioned = condition_corpus(
                result.entries, cfg.conditioning, stage_dir / "corpus"
            )
            kept, removal = drop_empty_transcripts(conditioned)
            (stage_dir / "removal_report.txt").write_text(
                removal.render(), encoding="utf-8"
            )
            save_corpus_index(kept, stage_dir / "corpus")
            # drop the conditioned files of removed entries
            for rid in removal.removed_ids:
                for suffix in (".wav", ".txt", ".json"):
                    stray = stage_dir / "corpus" / f"{rid}{suffix}"
                    if stray.exists():
                        stray.unlink()

        self._run_stage(
            "condition",
            digest_inputs(cond_cfg, [self._stage_dir("ingest")]),
            do_condition,
        )
        if done("condition"):
            return None

        corpus_dir = self._stage_dir("condition") / "corpus"

        # split into subsets
        split_cfg = {"sizes": list(cfg.subset_sizes), "seed": cfg.subset_seed}

        def do_split(stage_dir: Path) -> None:
            entries = load_corpus_index(corpus_dir)
            spec = SubsetSpec(sizes=tuple(cfg.subset_sizes), seed=cfg.subset_seed)
            subsets = split_subsets(entries, spec)
            write_subset_id_files(subsets, stage_dir)

        self._run_stage(
            "split",
            digest_inputs(split_cfg, [corpus_dir / "corpus_index.json"]),
            do_split,
            seed=cfg.subset_seed,
        )
        if done("split"):
            return None

        def subset_entries(index: int):
            entries = load_corpus_index(corpus_dir)
            by_id = {e.id: e for e in entries}
            ids_path = self._stage_dir("split") / f"subset_{index}.txt"
            ids = [
                line.strip()
                for line in ids_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
            return [by_id[i] for i in ids]

        # optional export for cloner training
        if cfg.cloner_training_subset is not None:
            export_cfg = {"subset": cfg.cloner_training_subset}

            def do_export(stage_dir: Path) -> None:
                entries = load_corpus_index(corpus_dir)
                id_file = (
                    self._stage_dir("split")
                    / f"subset_{cfg.cloner_training_subset}.txt"
                )
                export_cloner_training_layout(entries, id_file, stage_dir / "layout")

            self._run_stage(
                "cloner_export",
                digest_inputs(export_cfg, [self._stage_dir("split")]),
                do_export,
            )
            if done("cloner_export"):
                return None

        # plan generation jobs
        plan_cfg = {
            "limit": cfg.gen_limit,
            "seed": cfg.gen_seed,
            "subset": cfg.generation_subset,
        }

        def do_plan(stage_dir: Path) -> None:
            refs = subset_entries(cfg.generation_subset)
            jobs = plan_generation(
                refs, GenPlanConfig(limit=cfg.gen_limit, seed=cfg.gen_seed)
            )
            write_plan(jobs, stage_dir / "plan.json")

        self._run_stage(
            "plan",
            digest_inputs(plan_cfg, [self._stage_dir("split")]),
            do_plan,
            seed=cfg.gen_seed,
        )
        if done("plan"):
            return None

        plan_path = self._stage_dir("plan") / "plan.json"

        # run the cloner
        def do_generate(stage_dir: Path) -> None:
            self._generate(read_plan(plan_path), stage_dir)

        self._run_stage(
            "generate",
            digest_inputs({"cloner": cfg.cloner}, [plan_path]),
            do_generate,
        )
        if done("generate"):
            return None

        # duration-gap filter
        filter_cfg = {
            "gap_size_percentage": cfg.filter_cfg.gap_size_percentage,
            "gap_size": cfg.filter_cfg.gap_size,
        }

        def do_filter(stage_dir: Path) -> None:
            results = backends.read_results(
                self._stage_dir("generate") / "results.json"
            )
            ok_results = [r for r in results if r.status == backends.STATUS_OK]
            entries = load_corpus_index(corpus_dir)
            originals = {e.id: e.clip.duration for e in entries}
            kept, decisions, _ = filter_generated(
                ok_results, originals, cfg.filter_cfg
            )
            write_discard_report(
                stage_dir / "discard_report.txt", cfg.filter_cfg, decisions
            )
            (stage_dir / "decisions.json").write_text(
                json.dumps([d.__dict__ for d in decisions], indent=2, default=str)
                + "\n",
                encoding="utf-8",
            )
            backends.write_results(kept, stage_dir / "kept.json")

        self._run_stage(
            "filter",
            digest_inputs(
                filter_cfg,
                [
                    self._stage_dir("generate") / "results.json",
                    corpus_dir / "corpus_index.json",
                ],
            ),
            do_filter,
        )
        if done("filter"):
            return None

        # manifests for training and evaluation
        man_cfg = {
            "val_count": cfg.val_count,
            "seed": cfg.manifest_seed,
            "eval_subset": cfg.eval_subset,
        }

        def do_manifest(stage_dir: Path) -> None:
            kept = backends.read_results(self._stage_dir("filter") / "kept.json")
            jobs = {job.output_id: job for job in read_plan(plan_path)}
            pairs = [(r.wav_path, jobs[r.output_id].text) for r in kept]
            build_train_dev(
                pairs,
                cfg.val_count,
                cfg.manifest_seed,
                stage_dir / "train.csv",
                stage_dir / "dev.csv",
            )
            build_eval_csv(subset_entries(cfg.eval_subset), stage_dir / "test.csv")

        self._run_stage(
            "manifest",
            digest_inputs(
                man_cfg,
                [self._stage_dir("filter") / "kept.json", self._stage_dir("split")],
            ),
            do_manifest,
            seed=cfg.manifest_seed,
        )
        if done("manifest"):
            return None

        test_csv = self._stage_dir("manifest") / "test.csv"
        train_csv = self._stage_dir("manifest") / "train.csv"
        dev_csv = self._stage_dir("manifest") / "dev.csv"

        def wer_for(model_ref: str, out_dir: Path) -> float:
            hyps = self._infer(test_csv, model_ref, out_dir)
            rows = read_manifest(test_csv)
            refs = {Path(r.wav_filename).stem: r.transcript for r in rows}
            report = evaluate_corpus(
                [(utt_id, refs[utt_id], hyp) for utt_id, hyp in hyps]
            )
            (out_dir / "wer_report.json").write_text(
                json.dumps(report.as_dict(), indent=2) + "\n", encoding="utf-8"
            )
            return report.mean_wer

        # baseline evaluation happens before any training stage
        def do_baseline(stage_dir: Path) -> None:
            mean = wer_for(self._baseline_model_ref(), stage_dir)
            (stage_dir / "wer.txt").write_text(f"{mean:.3f}\n", encoding="utf-8")

        self._run_stage(
            "eval_baseline",
            digest_inputs({"transcriber": cfg.transcriber}, [test_csv]),
            do_baseline,
        )
        if done("eval_baseline"):
            return None

        # per-scenario fine-tuning and evaluation
        for scenario in cfg.scenarios:
            scen_cfg = {
                "name": scenario.name,
                "epochs": scenario.train.epochs,
                "dropout": scenario.train.dropout_label,
                "use_scorer": scenario.train.use_scorer,
                "transcriber": cfg.transcriber,
            }

            def do_train(stage_dir: Path, scenario=scenario) -> None:
                model_ref = self._train(
                    train_csv, dev_csv, scenario.train, stage_dir
                )
                (stage_dir / "MODEL_REF").write_text(
                    model_ref + "\n", encoding="utf-8"
                )

            self._run_stage(
                f"train_{scenario.name}",
                digest_inputs(scen_cfg, [train_csv, dev_csv]),
                do_train,
            )
            if done(f"train_{scenario.name}"):
                return None

            def do_eval(stage_dir: Path, scenario=scenario) -> None:
                model_ref = (
                    (self._stage_dir(f"train_{scenario.name}") / "MODEL_REF")
                    .read_text(encoding="utf-8")
                    .strip()
                )
                mean = wer_for(model_ref, stage_dir)
                (stage_dir / "wer.txt").write_text(f"{mean:.3f}\n", encoding="utf-8")

            self._run_stage(
                f"eval_{scenario.name}",
                digest_inputs(
                    scen_cfg,
                    [self._stage_dir(f"train_{scenario.name}"), test_csv],
                ),
                do_eval,
            )
            if done(f"eval_{scenario.name}"):
                return None

        # final report
        def do_report(stage_dir: Path) -> None:
            rows = [
                {
                    "scenario": "pretrained",
                    "dropout": "-",
                    "scorer": "-",
                    "wer": float(
                        (self._stage_dir("eval_baseline") / "wer.txt")
                        .read_text()
                        .strip()
                    ),
                }
            ]
            for scenario in cfg.scenarios:
                rows.append(
                    {
                        "scenario": scenario.name,
                        "dropout": scenario.train.dropout_label,
                        "scorer": "yes" if scenario.train.use_scorer else "no",
                        "wer": float(
                            (self._stage_dir(f"eval_{scenario.name}") / "wer.txt")
                            .read_text()
                            .strip()
                        ),
                    }
                )
            plan_jobs = read_plan(plan_path)
            kept = backends.read_results(self._stage_dir("filter") / "kept.json")
            decisions = json.loads(
                (self._stage_dir("filter") / "decisions.json").read_text()
            )
            report = {
                "rows": rows,
                "plan": {"num_jobs": len(plan_jobs), "limit": cfg.gen_limit},
                "filter": {
                    "kept": len(kept),
                    "discarded": len(decisions) - len(kept),
                    "gap_size_percentage": cfg.filter_cfg.gap_size_percentage,
                    "gap_size": cfg.filter_cfg.gap_size,
                },
                "seeds": {
                    "master": cfg.seed,
                    "split": cfg.subset_seed,
                    "plan": cfg.gen_seed,
                    "manifest": cfg.manifest_seed,
                },
            }
            (stage_dir / "report.json").write_text(
                json.dumps(report, indent=2) + "\n", encoding="utf-8"
            )
            (stage_dir / "report.txt").write_text(
                reporting.render_wer_table(rows), encoding="utf-8"
            )
            reporting.write_wer_csv(rows, stage_dir / "report.csv")
            reporting.plot_wer_by_scenario(
                rows, stage_dir / "figures" / "wer_by_scenario.png"
            )

        eval_digests = [self._stage_dir("eval_baseline") / "wer.txt"] + [
            self._stage_dir(f"eval_{s.name}") / "wer.txt" for s in cfg.scenarios
        ]
        self._run_stage(
            "report", digest_inputs({"seed": cfg.seed}, eval_digests), do_report
        )
        return json.loads(
            (self._stage_dir("report") / "report.json").read_text(encoding="utf-8")
        )


def run_experiment(cfg: ExperimentConfig, stop_after: str | None = None) -> dict | None:
    return ExperimentRunner(cfg).run(stop_after=stop_after)
