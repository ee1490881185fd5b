"""Plan voice-cloning jobs: random donor transcripts for each reference voice."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

logger = logging.getLogger(__name__)

OUTPUT_ID_SEPARATOR = "__from__"


@dataclass(frozen=True)
class GenPlanConfig:
    limit: int
    seed: int

    def __post_init__(self) -> None:
        if self.limit < 1:
            raise ValueError(f"limit must be >= 1, got {self.limit}")


@dataclass(frozen=True)
class GenerationJob:
    reference_id: str
    transcript_source_id: str
    output_id: str
    text: str

    def as_dict(self) -> dict:
        return {
            "reference_id": self.reference_id,
            "transcript_source_id": self.transcript_source_id,
            "output_id": self.output_id,
            "text": self.text,
        }


def make_output_id(reference_id: str, source_id: str) -> str:
    return f"{reference_id}{OUTPUT_ID_SEPARATOR}{source_id}"


def split_output_id(output_id: str) -> tuple[str, str]:
    """Recover (reference_id, transcript_source_id) from an output id."""
    reference_id, sep, source_id = output_id.partition(OUTPUT_ID_SEPARATOR)
    if not sep or not reference_id or not source_id:
        raise ValueError(f"malformed output id: {output_id!r}")
    return reference_id, source_id


def plan_generation(entries: Sequence, cfg: GenPlanConfig) -> list[GenerationJob]:
    """Pair every reference voice with random donor transcripts.

    For each entry, min(limit, N-1) transcripts are sampled uniformly without
    replacement from the other entries; an entry never donates to itself. The
    plan is deterministic for a fixed (entries, seed) and is emitted sorted by
    (reference_id, selection order).
    """
    if len(entries) < 2:
        raise ValueError(
            f"need at least 2 entries to plan generation, got {len(entries)}"
        )
    ordered = sorted(entries, key=lambda e: e.id)
    per_reference = min(cfg.limit, len(ordered) - 1)
    if per_reference < cfg.limit:
        logger.warning(
            "limit %d exceeds available donor transcripts; clamping to %d",
            cfg.limit,
            per_reference,
        )
    rng = random.Random(cfg.seed)
    jobs: list[GenerationJob] = []
    for reference in ordered:
        donors = [e for e in ordered if e.id != reference.id]
        for donor in rng.sample(donors, per_reference):
            jobs.append(
                GenerationJob(
                    reference_id=reference.id,
                    transcript_source_id=donor.id,
                    output_id=make_output_id(reference.id, donor.id),
                    text=donor.raw_text,
                )
            )
    return jobs


def write_plan(jobs: Sequence[GenerationJob], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [job.as_dict() for job in jobs]
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_plan(path: Path) -> list[GenerationJob]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    return [GenerationJob(**item) for item in payload]
