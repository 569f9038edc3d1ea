"""Normalize -> diacritize -> synthesize as one timed unit.

The CLI and the HTTP service both speak through this module so the same
input always yields the same waveform bytes, whichever door it came in.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .audio import Waveform
from .diacritizer import (
    DiacritizedText,
    DiacritizerBackend,
    EchoBackend,
    FailurePolicy,
    diacritize,
)
from .normalizer import NormalizeConfig, NormalizedText, normalize
from .synth import (
    DEFAULT_OUTPUT_RATE,
    ReferenceSynthesizer,
    SynthesisRequest,
    Synthesizer,
    get_voice,
)


@dataclass(frozen=True)
class StageTimings:
    normalize_s: float
    diacritize_s: float
    synth_s: float

    def to_dict(self) -> dict:
        return {
            "normalize_s": self.normalize_s,
            "diacritize_s": self.diacritize_s,
            "synth_s": self.synth_s,
        }


@dataclass
class PipelineResult:
    waveform: Waveform
    normalized: NormalizedText
    diacritized: DiacritizedText
    timings: StageTimings
    rtf: float


def run_pipeline(
    text: str,
    voice: str = "hamza",
    output_rate: int = DEFAULT_OUTPUT_RATE,
    *,
    backend: DiacritizerBackend | None = None,
    policy: FailurePolicy = FailurePolicy.PASSTHROUGH,
    synthesizer: Synthesizer | None = None,
    normalize_config: NormalizeConfig | None = None,
) -> PipelineResult:
    """Run the full text-to-waveform pipeline with per-stage timings.

    rtf is synthesis wall time over produced audio duration; the text
    stages are excluded because they do not scale with audio length.
    """
    spec = get_voice(voice)
    if backend is None:
        backend = EchoBackend()
    if synthesizer is None:
        synthesizer = ReferenceSynthesizer()
    if normalize_config is None:
        normalize_config = NormalizeConfig()

    t0 = time.perf_counter()
    normalized = normalize(text, normalize_config)
    t1 = time.perf_counter()
    diacritized = diacritize(normalized, backend, policy)
    t2 = time.perf_counter()
    req = SynthesisRequest(diacritized, voice=spec, output_rate=output_rate)
    wave, synth_s = synthesizer.synthesize(req)
    timings = StageTimings(t1 - t0, t2 - t1, synth_s)
    return PipelineResult(
        waveform=wave,
        normalized=normalized,
        diacritized=diacritized,
        timings=timings,
        rtf=synth_s / wave.duration_s,
    )
