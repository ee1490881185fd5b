"""Word error rate from a minimal word-level alignment, plus corpus aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .textnorm import normalize_text


class EmptyReferenceError(ValueError):
    """Raised when a reference is empty; the rate is undefined."""


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        return self.distance / self.ref_len

    def as_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "ref_len": self.ref_len,
            "rate": self.rate,
        }


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Minimal word-level edit distance between reference and hypothesis.

    The breakdown corresponds to one minimal alignment; among ties the
    backtrace prefers substitutions over deletion+insertion pairs so the
    (S, D, I) triple is deterministic. The rate can exceed 1.
    """
    m = len(reference)
    n = len(hypothesis)
    if m == 0:
        raise EmptyReferenceError("reference is empty; WER is undefined")

    # bottom-up DP over prefix lengths; full matrix kept for the backtrace
    rows: list[list[int]] = [list(range(n + 1))]
    prev = rows[0]
    for i in range(1, m + 1):
        ref_word = reference[i - 1]
        cur = [i] + [0] * n
        prev_row = prev
        for j in range(1, n + 1):
            diag = prev_row[j - 1]
            if ref_word != hypothesis[j - 1]:
                diag += 1
            up = prev_row[j] + 1
            left = cur[j - 1] + 1
            best = diag if diag <= up else up
            if left < best:
                best = left
            cur[j] = best
        rows.append(cur)
        prev = cur

    subs = dels = ins = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            step = 0 if reference[i - 1] == hypothesis[j - 1] else 1
            if rows[i][j] == rows[i - 1][j - 1] + step:
                subs += step
                i -= 1
                j -= 1
                continue
        if i > 0 and rows[i][j] == rows[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(substitutions=subs, deletions=dels, insertions=ins, ref_len=m)


@dataclass
class CorpusWerReport:
    per_utterance: list[tuple[str, WerBreakdown]]
    mean_wer: float
    total_substitutions: int
    total_deletions: int
    total_insertions: int
    total_ref_len: int
    normalization: str = "both_sides"

    @property
    def micro_wer(self) -> float:
        total = self.total_substitutions + self.total_deletions + self.total_insertions
        return total / self.total_ref_len

    def as_dict(self) -> dict:
        return {
            "mean_wer": self.mean_wer,
            "totals": {
                "substitutions": self.total_substitutions,
                "deletions": self.total_deletions,
                "insertions": self.total_insertions,
                "ref_len": self.total_ref_len,
            },
            "normalization": self.normalization,
            "per_utterance": [
                {"id": utt_id, **bd.as_dict()} for utt_id, bd in self.per_utterance
            ],
        }


def evaluate_corpus(pairs: Iterable[tuple[str, str, str]]) -> CorpusWerReport:
    """Score (id, reference text, hypothesis text) triples.

    Both sides are normalized and whitespace-tokenized before scoring. The
    mean is the arithmetic mean of per-utterance rates (macro); totals are
    included so a micro rate is recoverable.
    """
    materialized = list(pairs)
    empties = [utt_id for utt_id, ref, _ in materialized if not normalize_text(ref)]
    if empties:
        raise EmptyReferenceError(
            "empty normalized reference for ids: " + ", ".join(empties)
        )
    per_utterance: list[tuple[str, WerBreakdown]] = []
    tot_s = tot_d = tot_i = tot_len = 0
    for utt_id, ref, hyp in materialized:
        breakdown = wer(normalize_text(ref).split(), normalize_text(hyp).split())
        per_utterance.append((utt_id, breakdown))
        tot_s += breakdown.substitutions
        tot_d += breakdown.deletions
        tot_i += breakdown.insertions
        tot_len += breakdown.ref_len
    mean = (
        sum(bd.rate for _, bd in per_utterance) / len(per_utterance)
        if per_utterance
        else 0.0
    )
    return CorpusWerReport(
        per_utterance=per_utterance,
        mean_wer=mean,
        total_substitutions=tot_s,
        total_deletions=tot_d,
        total_insertions=tot_i,
        total_ref_len=tot_len,
    )
