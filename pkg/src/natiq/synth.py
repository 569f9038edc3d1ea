"""Two-stage synthesis: characters to mel frames, mel frames to PCM.

The reference implementation is deliberately non-neural. Each character
cluster (base letter plus its combining marks) gets a fixed duration by
class, voiced letters lay harmonic energy at multiples of the voice's
base pitch, unvoiced letters get broadband noise bins, and the vocoder
resynthesizes with a sinusoidal oscillator bank. Output is deterministic
down to the byte, which is what the pipeline and timing tests need;
humanlike audio is a non-goal. Neural backends plug in over HTTP through
the same request/response types.
"""

from __future__ import annotations

import logging
import math
import time
import unicodedata
from dataclasses import dataclass
from threading import BoundedSemaphore
from typing import Protocol

import numpy as np

from .audio import (
    SUPPORTED_RATES,
    MalformedAudioError,
    Waveform,
    waveform_from_wav_bytes,
)
from .diacritizer import SHADDA, DiacritizedText, Source

log = logging.getLogger(__name__)

MEL_BANDS = 80
STFT_WINDOW = 1024
STFT_HOP = 256
MEL_FMIN_HZ = 0.0
MEL_FMAX_HZ = 8000.0
DEFAULT_OUTPUT_RATE = 22050
DEFAULT_TIMEOUT_S = 30.0

# Reference-model duration constants, milliseconds per character class.
VOWEL_MS = 90.0
CONSONANT_MS = 60.0
PAUSE_MS = 120.0
SHADDA_MS = 60.0

HARMONICS = 10

_VOWEL_LETTERS = frozenset("اويىآ")
_UNVOICED = frozenset("تثحخسشصطفقكهءةأإؤئ")
_HARAKAT_90MS = frozenset("ًٌٍَُِ")
_SUKUN = "ْ"
_TATWEEL = "ـ"

_ARABIC_BLOCK = range(0x0600, 0x0700)


class EncodeError(ValueError):
    pass


class UnknownVoiceError(KeyError):
    pass


class RemoteSynthesisError(RuntimeError):
    """Base for failures talking to a remote backend."""


class BackendTimeoutError(RemoteSynthesisError):
    """Endpoint unreachable or did not answer in time."""


class BackendHTTPError(RemoteSynthesisError):
    """Endpoint answered with a non-success status."""


def _mel(f: float) -> float:
    return 2595.0 * math.log10(1.0 + f / 700.0)


def _from_mel(m: np.ndarray) -> np.ndarray:
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def band_centers_hz() -> np.ndarray:
    """Center frequency of each of the 80 bands (HTK mel, 0-8 kHz)."""
    edges = np.linspace(_mel(MEL_FMIN_HZ), _mel(MEL_FMAX_HZ), MEL_BANDS + 2)
    return _from_mel(edges[1:-1])


_CENTERS = band_centers_hz()

# Broadband palette for unvoiced letters: twelve upper bands; each letter
# picks six of them by code point so fricatives stay distinguishable.
_NOISE_PALETTE = tuple(range(52, 76, 2))
_NOISE_AMP = 0.15


def nearest_band(freq_hz: float) -> int:
    return int(np.argmin(np.abs(_CENTERS - freq_hz)))


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray
    frame_hop_s: float
    sample_rate: int
    skipped_chars: int = 0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[1] != MEL_BANDS:
            raise ValueError(f"mel frames must be [T x {MEL_BANDS}], got {frames.shape}")
        if frames.shape[0] < 1:
            raise ValueError("mel spectrogram needs at least one frame")
        if not np.all(np.isfinite(frames)):
            raise ValueError("mel frames contain non-finite entries")
        if np.any(frames < 0):
            raise ValueError("mel energies are non-negative")
        object.__setattr__(self, "frames", frames)
        if self.frame_hop_s <= 0:
            raise ValueError("frame_hop_s must be > 0")

    @property
    def duration_s(self) -> float:
        return self.frames.shape[0] * self.frame_hop_s


@dataclass(frozen=True)
class VoiceSpec:
    name: str
    style: str
    base_f0: float

    def __post_init__(self):
        if self.style not in ("neutral", "expressive"):
            raise ValueError(f"style must be neutral or expressive, got {self.style!r}")
        if not 60.0 <= self.base_f0 <= 400.0:
            raise ValueError(f"base_f0 {self.base_f0} outside [60, 400] Hz")


VOICES = {
    "hamza": VoiceSpec(name="hamza", style="neutral", base_f0=110.0),
    "amina": VoiceSpec(name="amina", style="expressive", base_f0=205.0),
}


def get_voice(name: str) -> VoiceSpec:
    try:
        return VOICES[name]
    except KeyError:
        raise UnknownVoiceError(name) from None


def list_voices() -> tuple[str, ...]:
    return tuple(sorted(VOICES))


@dataclass(frozen=True)
class SynthesisRequest:
    diacritized_text: DiacritizedText
    voice: VoiceSpec = VOICES["hamza"]
    output_rate: int = DEFAULT_OUTPUT_RATE

    def __post_init__(self):
        text = self.diacritized_text
        if isinstance(text, str):
            text = DiacritizedText(text, Source.PASSTHROUGH)
            object.__setattr__(self, "diacritized_text", text)
        if not text.content.strip():
            raise EncodeError("cannot synthesize empty text")
        if self.output_rate not in SUPPORTED_RATES:
            raise ValueError(f"output rate {self.output_rate} not in {SUPPORTED_RATES}")


@dataclass
class _Cluster:
    base: str
    marks: str = ""

    def duration_ms(self) -> float:
        if self.base == " ":
            return PAUSE_MS
        ms = VOWEL_MS if self.base in _VOWEL_LETTERS else CONSONANT_MS
        for mark in self.marks:
            if mark in _HARAKAT_90MS:
                ms += VOWEL_MS
            elif mark == SHADDA:
                ms += SHADDA_MS
            # sukun adds nothing: it closes the syllable
        return ms


def _classify(ch: str) -> str:
    if ch.isspace():
        return "pause"
    if unicodedata.category(ch).startswith("P"):
        return "pause"
    if ch == _TATWEEL:
        return "ignore"
    if unicodedata.combining(ch):
        return "mark"
    if ch.isalpha() and ord(ch) in _ARABIC_BLOCK:
        return "letter"
    return "unknown"


def _clusterize(text: str) -> tuple[list[_Cluster], int]:
    clusters: list[_Cluster] = []
    skipped = 0
    bad: list[str] = []
    for ch in text:
        kind = _classify(ch)
        if kind == "pause":
            # Collapse runs: one pause regardless of punctuation pile-up.
            if not (clusters and clusters[-1].base == " "):
                clusters.append(_Cluster(" "))
        elif kind == "letter":
            clusters.append(_Cluster(ch))
        elif kind == "mark":
            if clusters and clusters[-1].base != " ":
                clusters[-1].marks += ch
            else:
                skipped += 1
                bad.append(ch)
        elif kind == "ignore":
            continue
        else:
            skipped += 1
            bad.append(ch)
    if bad:
        log.warning("encode skipped %d unsupported character(s): %s",
                    skipped, "".join(sorted(set(bad))))
    return clusters, skipped


def encode(req: SynthesisRequest) -> MelSpectrogram:
    """Character clusters to mel frames; deterministic by construction.

    Frame counts round up per cluster, so frame totals add exactly when
    texts are concatenated (no cross-character state exists to break it).
    """
    rate = req.output_rate
    hop_s = STFT_HOP / rate
    clusters, skipped = _clusterize(req.diacritized_text.content)
    voiced_clusters = [c for c in clusters if c.base != " "]
    if not voiced_clusters:
        raise EncodeError("text contains no synthesizable characters")

    frame_counts = [
        max(1, math.ceil(c.duration_ms() / 1000.0 / hop_s)) for c in clusters
    ]
    total = sum(frame_counts)
    frames = np.zeros((total, MEL_BANDS), dtype=np.float32)

    f0 = req.voice.base_f0
    expressive = req.voice.style == "expressive"
    pos = 0
    spoken_index = 0
    for cluster, count in zip(clusters, frame_counts):
        if cluster.base == " ":
            pos += count
            continue
        # Expressive voices breathe: energy swells on a fixed 6-cluster
        # cycle. Frequencies stay put so the band set stays small.
        gain = 1.0 + (0.3 * math.sin(2 * math.pi * spoken_index / 6.0) if expressive else 0.0)
        geminate = SHADDA in cluster.marks
        if geminate:
            gain *= 1.25
        if cluster.base in _UNVOICED:
            start = ord(cluster.base) % (len(_NOISE_PALETTE) - 5)
            for b in _NOISE_PALETTE[start : start + 6]:
                frames[pos : pos + count, b] += (gain * _NOISE_AMP) ** 2
        else:
            for k in range(1, HARMONICS + 1):
                freq = f0 * k
                if freq > MEL_FMAX_HZ:
                    break
                b = nearest_band(freq)
                frames[pos : pos + count, b] += (gain / k) ** 2
        spoken_index += 1
        pos += count
    return MelSpectrogram(
        frames=frames, frame_hop_s=hop_s, sample_rate=rate, skipped_chars=skipped
    )


def vocode(mel: MelSpectrogram) -> Waveform:
    """Sinusoidal resynthesis: one oscillator per active band.

    Output length is exactly T frames of hop samples; peak is scaled to
    half full-scale so downstream chains never see clipping.
    """
    frames = np.asarray(mel.frames, dtype=np.float32)
    if frames.ndim != 2 or frames.shape[1] != MEL_BANDS:
        raise ValueError(f"expected [T x {MEL_BANDS}] mel frames, got {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise ValueError("mel frames contain non-finite entries")
    if np.any(frames < 0):
        raise ValueError("mel energies are non-negative")

    rate = mel.sample_rate
    hop = int(round(mel.frame_hop_s * rate))
    n = frames.shape[0] * hop
    out = np.zeros(n, dtype=np.float32)
    active = np.flatnonzero(frames.max(axis=0) > 0)
    if active.size:
        t = np.arange(n, dtype=np.float32) / rate
        for b in active:
            amp = np.repeat(np.sqrt(frames[:, b]), hop)
            out += amp * np.sin((2.0 * np.pi * _CENTERS[b]) * t, dtype=np.float32)
        peak = float(np.max(np.abs(out)))
        if peak > 0:
            out *= 0.5 / peak
    return Waveform.from_float(out, rate)


class Synthesizer(Protocol):
    def synthesize(self, req: SynthesisRequest) -> tuple[Waveform, float]: ...


class ReferenceSynthesizer:
    """Local deterministic backend; extra_latency_s pads the wall clock
    to rehearse slow-backend timing without a network."""

    def __init__(self, extra_latency_s: float = 0.0):
        if extra_latency_s < 0:
            raise ValueError("extra_latency_s must be >= 0")
        self.extra_latency_s = extra_latency_s

    def synthesize(self, req: SynthesisRequest) -> tuple[Waveform, float]:
        t0 = time.perf_counter()
        if self.extra_latency_s:
            time.sleep(self.extra_latency_s)
        wave = vocode(encode(req))
        return wave, time.perf_counter() - t0


def synthesize(req: SynthesisRequest) -> tuple[Waveform, float]:
    return ReferenceSynthesizer().synthesize(req)


def remote_synthesize(
    req: SynthesisRequest,
    endpoint: str,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> tuple[Waveform, float]:
    """POST the request to {endpoint}/synthesize, expect WAV bytes back.

    Timing covers the full round trip, which is what remote RTF means.
    """
    import requests

    payload = {
        "text": req.diacritized_text.content,
        "voice": req.voice.name,
        "rate": req.output_rate,
    }
    t0 = time.perf_counter()
    try:
        resp = requests.post(
            endpoint.rstrip("/") + "/synthesize", json=payload, timeout=timeout_s
        )
    except requests.Timeout as exc:
        raise BackendTimeoutError(f"no answer from {endpoint} in {timeout_s}s") from exc
    except requests.ConnectionError as exc:
        raise BackendTimeoutError(f"cannot reach {endpoint}") from exc
    if resp.status_code != 200:
        raise BackendHTTPError(f"{endpoint} answered {resp.status_code}")
    wave = waveform_from_wav_bytes(resp.content)
    if wave.sample_rate != req.output_rate:
        raise MalformedAudioError(
            f"asked for {req.output_rate} Hz, backend sent {wave.sample_rate} Hz"
        )
    return wave, time.perf_counter() - t0


class RemoteSynthesizer:
    """Client for a neural backend speaking the /synthesize wire protocol.

    In-flight requests per endpoint are capped; the semaphore is the only
    shared state, so instances are safe to share across threads.
    """

    def __init__(
        self,
        endpoint: str,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_inflight: int = 4,
    ):
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self._slots = BoundedSemaphore(max_inflight)

    def synthesize(self, req: SynthesisRequest) -> tuple[Waveform, float]:
        with self._slots:
            return remote_synthesize(req, self.endpoint, self.timeout_s)
