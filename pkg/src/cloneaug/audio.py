"""WAV I/O and the small amount of DSP the corpus conditioner needs.

Samples are float64 in [-1, 1] throughout; files are linear PCM WAV
(8/16/32-bit in, 16-bit out).
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
from scipy.signal import lfilter


class AudioFormatError(ValueError):
    """Raised for WAV files this toolkit cannot decode."""


_SAMPWIDTH_DTYPE = {1: np.uint8, 2: np.dtype("<i2"), 4: np.dtype("<i4")}


def read_wav(path: Path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file.

    Returns (samples, sample_rate) where samples has shape [n] for mono or
    [n, channels] otherwise.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            rate = wf.getframerate()
            sampwidth = wf.getsampwidth()
            nframes = wf.getnframes()
            raw = wf.readframes(nframes)
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"not a decodable PCM WAV: {path}: {exc}") from exc
    if rate <= 0 or channels <= 0:
        raise AudioFormatError(f"invalid WAV header ({rate} Hz, {channels} ch): {path}")
    dtype = _SAMPWIDTH_DTYPE.get(sampwidth)
    if dtype is None:
        raise AudioFormatError(f"unsupported sample width {sampwidth} bytes: {path}")
    data = np.frombuffer(raw, dtype=dtype)
    if channels > 1:
        data = data.reshape(-1, channels)
    if sampwidth == 1:  # 8-bit WAV is unsigned
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        samples = data.astype(np.float64) / float(2 ** (8 * sampwidth - 1))
    return samples, rate


def read_wav_info(path: Path) -> tuple[int, int]:
    """Return (num_samples, sample_rate) from the header without decoding audio."""
    try:
        with wave.open(str(path), "rb") as wf:
            return wf.getnframes(), wf.getframerate()
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"not a decodable PCM WAV: {path}: {exc}") from exc


def wav_duration(path: Path) -> float:
    """Clip duration in seconds, derived from the header sample count."""
    nframes, rate = read_wav_info(path)
    if rate <= 0:
        raise AudioFormatError(f"invalid sample rate in {path}")
    return nframes / rate


def write_wav(path: Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float samples as 16-bit PCM."""
    if samples.ndim != 1:
        raise ValueError("write_wav expects mono samples")
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def to_mono(samples: np.ndarray) -> np.ndarray:
    if samples.ndim == 1:
        return samples
    return samples.mean(axis=1)


def resample_linear(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Linear-interpolation resampling; output length = round(n * dst/src)."""
    if src_rate == dst_rate:
        return samples
    n_in = len(samples)
    n_out = max(1, round(n_in * dst_rate / src_rate))
    # sample positions of the output grid expressed in input-sample indices
    positions = np.arange(n_out) * (src_rate / dst_rate)
    return np.interp(positions, np.arange(n_in), samples)


def highpass(samples: np.ndarray, sample_rate: int, cutoff_hz: float) -> np.ndarray:
    """Single-pole IIR high-pass: y[n] = a*(y[n-1] + x[n] - x[n-1])."""
    if cutoff_hz <= 0:
        return samples
    rc = 1.0 / (2.0 * np.pi * cutoff_hz)
    dt = 1.0 / sample_rate
    alpha = rc / (rc + dt)
    return lfilter([alpha, -alpha], [1.0, -alpha], samples)


def rms_db(samples: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(np.square(samples))))
    if rms <= 0.0:
        return float("-inf")
    return 20.0 * np.log10(rms)


def normalize_rms(samples: np.ndarray, target_db: float) -> np.ndarray:
    """Scale to the target RMS level; near-silent input is returned unchanged."""
    rms = float(np.sqrt(np.mean(np.square(samples))))
    if rms < 1e-12:
        return samples
    gain = 10.0 ** (target_db / 20.0) / rms
    scaled = samples * gain
    peak = float(np.max(np.abs(scaled)))
    if peak > 1.0:  # keep peak at full scale rather than hard-clipping
        scaled = scaled / peak
    return scaled
