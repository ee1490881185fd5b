"""Shared fixture builders: tiny WAV corpora that are fast to mass-produce."""

from __future__ import annotations

import struct
import wave
from pathlib import Path

import numpy as np
import pytest


def tone_samples(duration_s: float, sample_rate: int, freq: float = 440.0) -> np.ndarray:
    n = max(1, round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    return 0.1 * np.sin(2 * np.pi * freq * t)


def write_wav_file(
    path: Path,
    samples: np.ndarray,
    sample_rate: int,
    channels: int = 1,
) -> None:
    pcm = np.round(np.clip(samples, -1, 1) * 32767).astype("<i2")
    if channels > 1 and pcm.ndim == 1:
        pcm = np.repeat(pcm[:, None], channels, axis=1)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def wav_bytes(num_samples: int, sample_rate: int) -> bytes:
    """Raw bytes of a silent 16-bit mono WAV, for fast mass file creation."""
    data = b"\x00\x00" * num_samples
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(data),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        sample_rate,
        sample_rate * 2,
        2,
        16,
        b"data",
        len(data),
    )
    return header + data


def make_corpus(
    root: Path,
    count: int,
    sample_rate: int = 16000,
    duration_s: float = 0.5,
    empty_transcript_indices: tuple[int, ...] = (),
    words_per_transcript: int = 6,
    durations: list[float] | None = None,
) -> Path:
    """LibriSpeech-style fixture tree: clip_<k>.wav + clip_<k>.txt."""
    root.mkdir(parents=True, exist_ok=True)
    vocab = [
        "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
        "hotel", "india", "juliet", "kilo", "lima",
    ]
    cache: dict[int, bytes] = {}
    for k in range(count):
        dur = durations[k] if durations is not None else duration_s
        n = max(1, round(dur * sample_rate))
        if n not in cache:
            cache[n] = wav_bytes(n, sample_rate)
        (root / f"clip_{k:04d}.wav").write_bytes(cache[n])
        if k in empty_transcript_indices:
            text = "   "
        else:
            words = [vocab[(k + i) % len(vocab)] for i in range(words_per_transcript)]
            text = " ".join(words)
        (root / f"clip_{k:04d}.txt").write_text(text + "\n", encoding="utf-8")
    return root


def make_varied_corpus(root: Path, count: int, sample_rate: int = 8000) -> Path:
    """Corpus with per-clip transcript lengths and durations, for e2e runs."""
    root.mkdir(parents=True, exist_ok=True)
    vocab = [
        "signal", "diode", "current", "voltage", "filter", "matrix", "vector",
        "theorem", "lecture", "circuit", "converge", "absolute", "integral",
        "gradient", "spectrum", "sampling",
    ]
    cache: dict[int, bytes] = {}
    for k in range(count):
        duration = 0.5 + (k % 6) * 0.1  # 0.5 .. 1.0 s
        n = round(duration * sample_rate)
        if n not in cache:
            cache[n] = wav_bytes(n, sample_rate)
        (root / f"clip_{k:04d}.wav").write_bytes(cache[n])
        n_words = 5 + (k * 7) % 8  # 5 .. 12 words
        words = [vocab[(k + i * 3) % len(vocab)] for i in range(n_words)]
        (root / f"clip_{k:04d}.txt").write_text(" ".join(words) + "\n", encoding="utf-8")
    return root


@pytest.fixture
def corpus_factory(tmp_path):
    def _make(name: str = "corpus", **kwargs) -> Path:
        return make_corpus(tmp_path / name, **kwargs)

    return _make
