"""Duration-gap quality filter for generated audio.

A generated clip is discarded only when its duration exceeds BOTH thresholds
derived from the duration of the original recording of its donor transcript:
a relative one (original * (1 + gap_size_percentage/100)) and an absolute one
(original + gap_size). Both boundaries are inclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .backends import GenerationResult
from .genplan import split_output_id


class UnresolvableSourceError(ValueError):
    """A result's donor-transcript id has no known original duration."""


@dataclass(frozen=True)
class FilterConfig:
    gap_size_percentage: float = 50.0
    gap_size: float = 5.0

    def __post_init__(self) -> None:
        for name in ("gap_size_percentage", "gap_size"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)  # ints coerce for stable reports


@dataclass(frozen=True)
class FilterDecision:
    output_id: str
    generated_duration: float
    original_duration: float
    verdict: str  # "keep" | "discard"
    pct_threshold: float
    gap_threshold: float


def decide(
    output_id: str,
    generated_duration: float,
    original_duration: float,
    cfg: FilterConfig,
) -> FilterDecision:
    """Apply the two-attribute rule to one generated clip."""
    pct_threshold = original_duration * (1.0 + cfg.gap_size_percentage / 100.0)
    gap_threshold = original_duration + cfg.gap_size
    discard = (
        generated_duration >= pct_threshold and generated_duration >= gap_threshold
    )
    return FilterDecision(
        output_id=output_id,
        generated_duration=generated_duration,
        original_duration=original_duration,
        verdict="discard" if discard else "keep",
        pct_threshold=pct_threshold,
        gap_threshold=gap_threshold,
    )


def filter_generated(
    results: Sequence[GenerationResult],
    originals: Mapping[str, float],
    cfg: FilterConfig,
) -> tuple[list[GenerationResult], list[FilterDecision], str]:
    """Split ok results into kept/discarded and render the discard report.

    `originals` maps donor-transcript ids to the duration of their original
    (conditioned) recording. Results must be status ok with a duration.
    """
    kept: list[GenerationResult] = []
    decisions: list[FilterDecision] = []
    for result in results:
        if result.status != "ok" or result.duration is None:
            raise ValueError(f"filter_generated expects ok results, got {result}")
        _, source_id = split_output_id(result.output_id)
        if source_id not in originals:
            raise UnresolvableSourceError(
                f"no original duration for transcript source '{source_id}' "
                f"(output {result.output_id}); plan and corpus disagree"
            )
        original = originals[source_id]
        if original <= 0:
            raise ValueError(f"original duration must be > 0 for {source_id}")
        decision = decide(result.output_id, result.duration, original, cfg)
        decisions.append(decision)
        if decision.verdict == "keep":
            kept.append(result)
    report = render_discard_report(cfg, decisions)
    return kept, decisions, report


def render_discard_report(cfg: FilterConfig, decisions: Sequence[FilterDecision]) -> str:
    """Line-oriented report: config header, one line per discard, total."""
    lines = [
        f"gap_size_percentage={cfg.gap_size_percentage} gap_size={cfg.gap_size} "
        "original_durations=post_conditioning"
    ]
    discarded = [d for d in decisions if d.verdict == "discard"]
    for d in discarded:
        lines.append(
            f"{d.output_id}\tgenerated={d.generated_duration}s"
            f"\toriginal={d.original_duration}s"
        )
    lines.append(f"TOTAL DISCARDED: {len(discarded)}")
    return "\n".join(lines) + "\n"


def write_discard_report(
    path: Path, cfg: FilterConfig, decisions: Sequence[FilterDecision]
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_discard_report(cfg, decisions), encoding="utf-8")
