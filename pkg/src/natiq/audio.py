"""PCM16 waveforms and WAV file round-trips.

Everything downstream (segmentation, synthesis, serving) moves audio
around as a Waveform; files on disk are mono RIFF/PCM16 WAV.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_RATES = (16000, 22050, 44100)
FULL_SCALE = 32768.0


class MalformedAudioError(ValueError):
    """Bytes that do not parse as mono PCM16 WAV."""


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.int16)
        if samples.ndim != 1:
            raise ValueError("waveforms are mono: expected a 1-D sample array")
        object.__setattr__(self, "samples", samples)
        if self.sample_rate not in SUPPORTED_RATES:
            raise ValueError(
                f"sample rate {self.sample_rate} not in {SUPPORTED_RATES}"
            )

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def to_float(self) -> np.ndarray:
        """Samples as float32 in [-1, 1)."""
        return self.samples.astype(np.float32) / FULL_SCALE

    @classmethod
    def from_float(cls, samples: np.ndarray, sample_rate: int) -> "Waveform":
        clipped = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 32767 / FULL_SCALE)
        return cls(np.round(clipped * FULL_SCALE).astype(np.int16), sample_rate)

    def slice_seconds(self, start_s: float, end_s: float) -> "Waveform":
        lo = max(0, int(round(start_s * self.sample_rate)))
        hi = min(len(self.samples), int(round(end_s * self.sample_rate)))
        return Waveform(self.samples[lo:hi], self.sample_rate)


def peak_dbfs(w: Waveform) -> float:
    peak = int(np.max(np.abs(w.samples.astype(np.int32)))) if len(w.samples) else 0
    if peak == 0:
        return float("-inf")
    return 20.0 * float(np.log10(peak / FULL_SCALE))


def wav_bytes(w: Waveform) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(w.samples.tobytes())
    return buf.getvalue()


def write_wav(path: str | Path, w: Waveform) -> None:
    Path(path).write_bytes(wav_bytes(w))


def waveform_from_wav_bytes(data: bytes) -> Waveform:
    """Parse mono PCM16 WAV bytes, validating the RIFF structure."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedAudioError("missing RIFF/WAVE header")
    try:
        with wave.open(io.BytesIO(data), "rb") as f:
            channels = f.getnchannels()
            width = f.getsampwidth()
            rate = f.getframerate()
            frames = f.readframes(f.getnframes())
    except (wave.Error, EOFError) as exc:
        raise MalformedAudioError(f"unreadable WAV: {exc}") from exc
    if channels != 1 or width != 2:
        raise MalformedAudioError(
            f"expected mono PCM16, got {channels} channel(s) at width {width}"
        )
    if rate not in SUPPORTED_RATES:
        raise MalformedAudioError(f"unsupported sample rate {rate}")
    return Waveform(np.frombuffer(frames, dtype=np.int16), rate)


def read_wav(path: str | Path) -> Waveform:
    return waveform_from_wav_bytes(Path(path).read_bytes())
