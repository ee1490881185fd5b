"""Adapters for external voice-cloner and transcriber tools, plus mock backends.

The adapter protocol is file-based: a cloner gets a plan JSON and an output
directory and must leave ``<output_id>.wav`` files (16-bit PCM, 16 kHz mono)
plus a ``results.json`` array of generation results; an inference backend
gets a manifest CSV and must leave ``hypotheses.json``; a training backend
must leave ``MODEL_REF`` containing the path of its best model artifact.

Command templates are expanded token-by-token after shlex splitting, so
substituted paths with spaces stay single arguments. Required placeholders:

    cloner:             {plan} {out_dir}
    transcriber_infer:  {dev_csv} {model} {out_dir}   ({dev_csv} is the
                        manifest being transcribed; {scorer} optional)
    transcriber_train:  {train_csv} {dev_csv} {epochs} {dropout} {out_dir}
                        ({model}/{scorer} optional; {scorer} expands to the
                        scorer path or the literal "no")

Per-job failures are data (a status), never exceptions, so one bad job
cannot abort a batch; a nonzero exit is a batch failure.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import shlex
import subprocess
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import audio
from .genplan import GenerationJob
from .manifest import read_manifest

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_SKIPPED = "skipped_small_spectrogram"
STATUSES = {STATUS_OK, STATUS_FAILED, STATUS_SKIPPED}

REQUIRED_PLACEHOLDERS = {
    "cloner": {"plan", "out_dir"},
    "transcriber_infer": {"dev_csv", "model", "out_dir"},
    "transcriber_train": {"train_csv", "dev_csv", "epochs", "dropout", "out_dir"},
}

_PLACEHOLDERS = (
    "plan",
    "out_dir",
    "train_csv",
    "dev_csv",
    "model",
    "scorer",
    "epochs",
    "dropout",
)


class BackendError(RuntimeError):
    """Batch-level backend failure (bad exit, timeout, broken protocol)."""


@dataclass(frozen=True)
class BackendSpec:
    kind: str
    command_template: str
    timeout: float | None = None

    def __post_init__(self) -> None:
        required = REQUIRED_PLACEHOLDERS.get(self.kind)
        if required is None:
            raise ValueError(f"unknown backend kind: {self.kind}")
        missing = {
            name for name in required if f"{{{name}}}" not in self.command_template
        }
        if missing:
            raise ValueError(
                f"{self.kind} template is missing placeholders: {sorted(missing)}"
            )


@dataclass(frozen=True)
class GenerationResult:
    output_id: str
    status: str
    wav_path: Path | None = None
    duration: float | None = None

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        ok_shape = self.wav_path is not None and (self.duration or 0) > 0
        if (self.status == STATUS_OK) != ok_shape:
            raise ValueError(
                f"result {self.output_id}: status {self.status} inconsistent with "
                f"wav_path={self.wav_path} duration={self.duration}"
            )

    def as_dict(self) -> dict:
        return {
            "output_id": self.output_id,
            "status": self.status,
            "wav_path": str(self.wav_path) if self.wav_path else None,
            "duration": self.duration,
        }

    @classmethod
    def from_dict(cls, item: dict) -> "GenerationResult":
        return cls(
            output_id=item["output_id"],
            status=item["status"],
            wav_path=Path(item["wav_path"]) if item.get("wav_path") else None,
            duration=item.get("duration"),
        )


@dataclass(frozen=True)
class TrainRunConfig:
    epochs: int
    dropout: str | float = "standard"
    use_scorer: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if isinstance(self.dropout, str):
            if self.dropout != "standard":
                raise ValueError(f"dropout must be 'standard' or a value in (0,1)")
        elif not 0.0 < self.dropout < 1.0:
            raise ValueError(f"explicit dropout must be in (0,1), got {self.dropout}")

    @property
    def dropout_label(self) -> str:
        return self.dropout if isinstance(self.dropout, str) else str(self.dropout)


def expand_command(template: str, values: dict[str, str]) -> list[str]:
    """Expand placeholders inside each shlex token of the template."""
    argv = []
    for token in shlex.split(template):
        expanded = token
        for name in _PLACEHOLDERS:
            expanded = expanded.replace(f"{{{name}}}", values.get(name, ""))
        argv.append(expanded)
    return argv


def _run_command(argv: list[str], timeout: float | None, log_path: Path) -> None:
    logger.info("running backend: %s", " ".join(argv))
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired as exc:
        raise BackendError(f"backend timed out after {timeout}s: {argv}") from exc
    except OSError as exc:
        raise BackendError(f"backend could not be launched: {argv}: {exc}") from exc
    log_path.parent.mkdir(parents=True, exist_ok=True)
    log_path.write_text(
        f"command: {' '.join(argv)}\nexit: {proc.returncode}\n"
        f"--- stdout ---\n{proc.stdout}\n--- stderr ---\n{proc.stderr}\n",
        encoding="utf-8",
    )
    if proc.returncode != 0:
        raise BackendError(
            f"backend exited {proc.returncode}; see {log_path}\n{proc.stderr}"
        )


def _validate_results(
    plan: Sequence[GenerationJob], results: Sequence[GenerationResult]
) -> None:
    if len(results) != len(plan):
        raise BackendError(
            f"backend returned {len(results)} results for {len(plan)} jobs"
        )
    expected = Counter(job.output_id for job in plan)
    actual = Counter(result.output_id for result in results)
    if expected != actual:
        raise BackendError("result output_ids do not match the plan")
    for result in results:
        if result.status == STATUS_OK:
            if result.wav_path is None or not result.wav_path.is_file():
                raise BackendError(f"ok result without a WAV: {result.output_id}")


def write_results(results: Sequence[GenerationResult], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps([r.as_dict() for r in results], indent=2) + "\n", encoding="utf-8"
    )


def read_results(path: Path) -> list[GenerationResult]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    return [GenerationResult.from_dict(item) for item in payload]


def _write_run_manifest(
    out_dir: Path, command: str, results: Sequence[GenerationResult]
) -> None:
    counts = Counter(result.status for result in results)
    payload = {
        "command": command,
        "num_jobs": len(results),
        "status_counts": dict(sorted(counts.items())),
        "results": [r.as_dict() for r in results],
    }
    (out_dir / "run_manifest.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# command-backed adapters


def run_cloner(
    plan: Sequence[GenerationJob], spec: BackendSpec, out_dir: Path
) -> list[GenerationResult]:
    """Run an external cloner over a plan and collect its results."""
    if spec.kind != "cloner":
        raise ValueError(f"expected a cloner spec, got kind={spec.kind}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan_path = out_dir / "plan.json"
    plan_path.write_text(
        json.dumps([job.as_dict() for job in plan], indent=2) + "\n", encoding="utf-8"
    )
    argv = expand_command(
        spec.command_template, {"plan": str(plan_path), "out_dir": str(out_dir)}
    )
    _run_command(argv, spec.timeout, out_dir / "backend.log")
    results_path = out_dir / "results.json"
    if not results_path.is_file():
        raise BackendError(f"backend exited 0 but wrote no {results_path}")
    results = read_results(results_path)
    _validate_results(plan, results)
    _write_run_manifest(out_dir, " ".join(argv), results)
    return results


def run_transcriber_infer(
    manifest_csv: Path,
    spec: BackendSpec,
    model_ref: str,
    out_dir: Path,
    scorer: str = "no",
) -> list[tuple[str, str]]:
    """Transcribe every manifest row; returns (id, hypothesis) in row order."""
    if spec.kind != "transcriber_infer":
        raise ValueError(f"expected a transcriber_infer spec, got kind={spec.kind}")
    rows = read_manifest(Path(manifest_csv))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    argv = expand_command(
        spec.command_template,
        {
            "dev_csv": str(manifest_csv),
            "model": model_ref,
            "scorer": scorer,
            "out_dir": str(out_dir),
        },
    )
    _run_command(argv, spec.timeout, out_dir / "backend.log")
    hyp_path = out_dir / "hypotheses.json"
    if not hyp_path.is_file():
        raise BackendError(f"backend exited 0 but wrote no {hyp_path}")
    payload = json.loads(hyp_path.read_text(encoding="utf-8"))
    if len(payload) != len(rows):
        raise BackendError(
            f"hypothesis count {len(payload)} does not match "
            f"manifest row count {len(rows)}"
        )
    hypotheses = [(item["id"], item["hypothesis"]) for item in payload]
    for (hyp_id, _), row in zip(hypotheses, rows):
        if hyp_id != Path(row.wav_filename).stem:
            raise BackendError(
                f"hypothesis id {hyp_id} out of order with manifest row "
                f"{row.wav_filename}"
            )
    return hypotheses


def run_transcriber_train(
    train_csv: Path,
    dev_csv: Path,
    spec: BackendSpec,
    cfg: TrainRunConfig,
    out_dir: Path,
    model: str = "",
    scorer_path: str = "",
) -> Path:
    """Run an external trainer and return its best-model reference."""
    if spec.kind != "transcriber_train":
        raise ValueError(f"expected a transcriber_train spec, got kind={spec.kind}")
    _check_train_manifests(Path(train_csv), Path(dev_csv))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    argv = expand_command(
        spec.command_template,
        {
            "train_csv": str(train_csv),
            "dev_csv": str(dev_csv),
            "model": model,
            "scorer": scorer_path if cfg.use_scorer and scorer_path else "no",
            "epochs": str(cfg.epochs),
            "dropout": cfg.dropout_label,
            "out_dir": str(out_dir),
        },
    )
    _run_command(argv, spec.timeout, out_dir / "backend.log")
    ref_path = out_dir / "MODEL_REF"
    if not ref_path.is_file():
        raise BackendError(f"backend exited 0 but wrote no {ref_path}")
    model_path = Path(ref_path.read_text(encoding="utf-8").strip())
    if not model_path.is_file():
        raise BackendError(f"MODEL_REF points at a missing artifact: {model_path}")
    return model_path


def _check_train_manifests(train_csv: Path, dev_csv: Path) -> None:
    train_rows = read_manifest(train_csv)
    dev_rows = read_manifest(dev_csv)
    if not train_rows:
        raise ValueError(f"training manifest is empty: {train_csv}")
    if not dev_rows:
        raise ValueError(f"validation manifest is empty: {dev_csv}")
    # manifest paths are relative to the manifest's own directory
    train_files = {(train_csv.parent / r.wav_filename).resolve() for r in train_rows}
    dev_files = {(dev_csv.parent / r.wav_filename).resolve() for r in dev_rows}
    overlap = train_files & dev_files
    if overlap:
        raise ValueError(
            f"train and dev manifests overlap on {len(overlap)} file(s), "
            f"e.g. {sorted(overlap)[0]}"
        )


# ---------------------------------------------------------------------------
# mock backends (deterministic test doubles)


def _derive_seed(*parts: object) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class MockClonerKnobs:
    seconds_per_word: float = 0.3
    overlength_probability: float = 0.0
    overlength_factor: float = 3.0
    failure_probability: float = 0.0
    skip_probability: float = 0.0
    seed: int = 0
    sample_rate: int = 16000


def mock_clone(
    job: GenerationJob, knobs: MockClonerKnobs, out_dir: Path
) -> GenerationResult:
    """Deterministic stand-in for a voice cloner.

    Ok results are a sine-plus-noise WAV of duration word_count x
    seconds_per_word, stretched by overlength_factor when the seeded
    overlength draw fires. All draws derive from (seed, output_id) so the
    outcome is independent of batch order.
    """
    rng = random.Random(_derive_seed(knobs.seed, job.output_id))
    if rng.random() < knobs.failure_probability:
        return GenerationResult(output_id=job.output_id, status=STATUS_FAILED)
    if rng.random() < knobs.skip_probability:
        return GenerationResult(output_id=job.output_id, status=STATUS_SKIPPED)
    word_count = max(1, len(job.text.split()))
    duration = word_count * knobs.seconds_per_word
    if rng.random() < knobs.overlength_probability:
        duration *= knobs.overlength_factor
    num_samples = max(1, round(duration * knobs.sample_rate))
    t = np.arange(num_samples) / knobs.sample_rate
    freq = 200.0 + (_derive_seed(knobs.seed, job.output_id, "freq") % 800)
    noise_rng = np.random.default_rng(_derive_seed(knobs.seed, job.output_id, "noise"))
    samples = 0.1 * np.sin(2 * np.pi * freq * t) + 0.02 * noise_rng.standard_normal(
        num_samples
    )
    wav_path = Path(out_dir) / f"{job.output_id}.wav"
    audio.write_wav(wav_path, samples, knobs.sample_rate)
    return GenerationResult(
        output_id=job.output_id,
        status=STATUS_OK,
        wav_path=wav_path,
        duration=num_samples / knobs.sample_rate,
    )


def run_mock_cloner(
    plan: Sequence[GenerationJob], knobs: MockClonerKnobs, out_dir: Path
) -> list[GenerationResult]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = [mock_clone(job, knobs, out_dir) for job in plan]
    write_results(results, out_dir / "results.json")
    _write_run_manifest(out_dir, f"mock_cloner(seed={knobs.seed})", results)
    return results


@dataclass(frozen=True)
class MockTranscriberKnobs:
    word_drop_probability: float = 0.0
    seed: int = 0


def _model_drop_probability(model_ref: str, default: float) -> float:
    path = Path(model_ref)
    if path.is_file():
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return default
        if isinstance(payload, dict) and "word_drop_probability" in payload:
            return float(payload["word_drop_probability"])
    return default


def run_mock_transcriber_infer(
    manifest_csv: Path, knobs: MockTranscriberKnobs, model_ref: str = "pretrained"
) -> list[tuple[str, str]]:
    """Corrupt each manifest transcript by dropping words independently.

    Every reference word survives with probability 1 - q where q comes from
    the model stub when ``model_ref`` is a mock model file, else from knobs.
    With q = 0 the hypotheses equal the normalized references exactly.
    """
    q = _model_drop_probability(model_ref, knobs.word_drop_probability)
    hypotheses: list[tuple[str, str]] = []
    for row in read_manifest(Path(manifest_csv)):
        utt_id = Path(row.wav_filename).stem
        # seed from the effective drop rate, not the model path, so runs in
        # different output roots stay byte-identical
        rng = random.Random(_derive_seed(knobs.seed, f"q={q:.6f}", utt_id))
        words = [w for w in row.transcript.split() if rng.random() >= q]
        hypotheses.append((utt_id, " ".join(words)))
    return hypotheses


@dataclass(frozen=True)
class MockTrainerKnobs:
    base_drop_probability: float = 0.2
    seed: int = 0


def run_mock_trainer(
    train_csv: Path,
    dev_csv: Path,
    cfg: TrainRunConfig,
    knobs: MockTrainerKnobs,
    out_dir: Path,
) -> Path:
    """Write a stub model embedding (epochs, dropout, scorer) for audit.

    The stub's word-drop probability is slightly above the pretrained base,
    nudged further by the non-standard-dropout and scorer knobs, so that
    different training scenarios yield distinct, reproducible WER rows.
    """
    _check_train_manifests(Path(train_csv), Path(dev_csv))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    drop = knobs.base_drop_probability + 0.02
    if cfg.dropout != "standard":
        drop += 0.05
    if cfg.use_scorer:
        drop += 0.025
    payload = {
        "kind": "mock_transcriber_model",
        "epochs": cfg.epochs,
        "dropout": cfg.dropout_label,
        "use_scorer": cfg.use_scorer,
        "word_drop_probability": round(min(drop, 0.95), 6),
    }
    model_path = out_dir / "model.json"
    model_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    (out_dir / "MODEL_REF").write_text(str(model_path) + "\n", encoding="utf-8")
    return model_path
