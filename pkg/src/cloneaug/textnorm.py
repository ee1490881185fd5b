"""Transcript normalization: lowercase, spell out integers, settle punctuation.

The manifest builder and the WER evaluator both run text through
:func:`normalize_transcript`, so this module owns the tokenization policy.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

MAX_SPELLABLE = 999_999_999

_UNITS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]


@dataclass
class NormalizationReport:
    tokens_lowercased: int = 0
    numbers_converted: int = 0
    tokens_left_unconverted: list[str] = field(default_factory=list)


def number_to_words(value: int) -> str:
    """Spell a nonnegative integer in English, no hyphens or "and".

    Supported range is 0..=999,999,999 ("21" -> "twenty one").
    """
    if value < 0 or value > MAX_SPELLABLE:
        raise ValueError(f"number out of supported range: {value}")
    if value < 20:
        return _UNITS[value]

    def under_thousand(n: int) -> list[str]:
        words: list[str] = []
        if n >= 100:
            words.append(_UNITS[n // 100])
            words.append("hundred")
            n %= 100
        if n >= 20:
            words.append(_TENS[n // 10])
            n %= 10
            if n:
                words.append(_UNITS[n])
        elif n:
            words.append(_UNITS[n])
        return words

    words: list[str] = []
    millions, rest = divmod(value, 1_000_000)
    thousands, ones = divmod(rest, 1_000)
    if millions:
        words += under_thousand(millions) + ["million"]
    if thousands:
        words += under_thousand(thousands) + ["thousand"]
    if ones:
        words += under_thousand(ones)
    return " ".join(words)


def _strip_outer_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and not token[start].isalnum():
        start += 1
    while end > start and not token[end - 1].isalnum():
        end -= 1
    return token[start:end]


def _clean_word(token: str) -> list[str]:
    # keep letters and intra-word apostrophes; other punctuation splits the token
    parts: list[str] = []
    current: list[str] = []
    for i, ch in enumerate(token):
        if ch.isalnum():
            current.append(ch)
        elif ch == "'" and current and i + 1 < len(token) and token[i + 1].isalnum():
            current.append(ch)
        else:
            if current:
                parts.append("".join(current))
                current = []
    if current:
        parts.append("".join(current))
    return parts


def normalize_transcript(raw: str) -> tuple[str, NormalizationReport]:
    """Normalize one transcript line.

    Lowercases everything, converts standalone digit tokens in the supported
    range to English words, collapses whitespace, and strips punctuation
    except intra-word apostrophes. Digit-bearing tokens that are not plain
    integers ("7.5", "1st", "x2") pass through untouched and are reported.
    """
    report = NormalizationReport()
    # control characters would corrupt line-oriented outputs (CSV cannot
    # even carry NUL); they act as token separators here
    raw = "".join(
        " " if unicodedata.category(ch) == "Cc" else ch for ch in raw
    )
    out: list[str] = []
    for token in raw.split():
        lowered = token.lower()
        if lowered != token:
            report.tokens_lowercased += 1
        core = _strip_outer_punct(lowered)
        if not core:
            continue
        if core.isdecimal():
            value = int(core)
            if value <= MAX_SPELLABLE:
                out.append(number_to_words(value))
                report.numbers_converted += 1
            else:
                out.append(core)
                report.tokens_left_unconverted.append(core)
            continue
        if any(ch.isdigit() for ch in core):
            # mixed alphanumerics and non-integer numbers are left as-is
            out.append(core)
            report.tokens_left_unconverted.append(core)
            continue
        out.extend(_clean_word(core))
    return " ".join(out), report


def normalize_text(raw: str) -> str:
    """Normalization without the report, for callers that only want the text."""
    return normalize_transcript(raw)[0]
