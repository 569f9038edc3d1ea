import json
import math
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from natiq.audio import MalformedAudioError, wav_bytes, waveform_from_wav_bytes
from natiq.diacritizer import DiacritizedText, Source
from natiq.synth import (
    MEL_BANDS,
    VOICES,
    BackendHTTPError,
    BackendTimeoutError,
    EncodeError,
    MelSpectrogram,
    ReferenceSynthesizer,
    RemoteSynthesizer,
    SynthesisRequest,
    UnknownVoiceError,
    VoiceSpec,
    band_centers_hz,
    encode,
    get_voice,
    list_voices,
    nearest_band,
    remote_synthesize,
    synthesize,
    vocode,
)

HOP_MS = 256 / 22050 * 1000  # 11.60998... ms


def req(text, voice="hamza", rate=22050):
    return SynthesisRequest(DiacritizedText(text, Source.BACKEND), get_voice(voice), rate)


def test_mel_validation():
    good = np.zeros((4, MEL_BANDS), dtype=np.float32)
    MelSpectrogram(good, 0.0116, 22050)
    with pytest.raises(ValueError):
        MelSpectrogram(np.zeros((4, 79)), 0.0116, 22050)
    with pytest.raises(ValueError):
        MelSpectrogram(np.zeros((0, MEL_BANDS)), 0.0116, 22050)
    bad = good.copy()
    bad[0, 0] = -1.0
    with pytest.raises(ValueError):
        MelSpectrogram(bad, 0.0116, 22050)
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        MelSpectrogram(bad, 0.0116, 22050)


def test_voice_spec_validation():
    with pytest.raises(ValueError):
        VoiceSpec(name="x", style="neutral", base_f0=50.0)
    with pytest.raises(ValueError):
        VoiceSpec(name="x", style="neutral", base_f0=500.0)
    with pytest.raises(ValueError):
        VoiceSpec(name="x", style="angry", base_f0=120.0)
    VoiceSpec(name="custom-lab", style="expressive", base_f0=250.0)


def test_bundled_voices():
    assert list_voices() == ("amina", "hamza")
    assert get_voice("hamza").style == "neutral"
    assert get_voice("amina").style == "expressive"
    assert get_voice("amina").base_f0 > get_voice("hamza").base_f0
    with pytest.raises(UnknownVoiceError):
        get_voice("nadia")


def test_request_validation():
    with pytest.raises(EncodeError):
        req("")
    with pytest.raises(EncodeError):
        req("   ")
    with pytest.raises(ValueError):
        SynthesisRequest(DiacritizedText("كتب", Source.BACKEND), VOICES["hamza"], 8000)
    # Plain strings are accepted and marked passthrough.
    r = SynthesisRequest("كتب")
    assert r.diacritized_text.source is Source.PASSTHROUGH


def test_fatha_letter_frame_count():
    # Consonant 60 ms + fatha 90 ms = 150 ms; ceil(150 / 11.61) = 13.
    mel = encode(req("كَ"))
    assert mel.frames.shape == (13, MEL_BANDS)
    assert mel.frame_hop_s == pytest.approx(0.01161, abs=1e-5)


@pytest.mark.parametrize(
    "text,frames",
    [
        ("ب", math.ceil(60 / HOP_MS)),                      # 6
        ("ا", math.ceil(90 / HOP_MS)),                      # 8
        ("با", math.ceil(60 / HOP_MS) + math.ceil(90 / HOP_MS)),
        ("ب ا", 6 + math.ceil(120 / HOP_MS) + 8),           # pause = 11
        ("بّ", math.ceil((60 + 60) / HOP_MS)),              # shadda adds 60
        ("بَّ", math.ceil((60 + 90 + 60) / HOP_MS)),         # 19
        ("بْ", math.ceil(60 / HOP_MS)),                     # sukun adds nothing
        ("ب  ا", 6 + 11 + 8),                               # space run collapses
        ("ب. ا", 6 + 11 + 8),                               # punctuation joins the pause
    ],
)
def test_frame_counts_from_duration_constants(text, frames):
    assert encode(req(text)).frames.shape[0] == frames


def test_encode_deterministic():
    a = encode(req("ذهب الولد إلى المدرسة"))
    b = encode(req("ذهب الولد إلى المدرسة"))
    assert np.array_equal(a.frames, b.frames)


def test_encode_skips_unknown_chars():
    mel = encode(req("كتب abc كتب"))
    assert mel.skipped_chars == 3
    clean = encode(req("كتب كتب"))
    assert mel.frames.shape == clean.frames.shape


def test_encode_all_unknown_errors():
    with pytest.raises(EncodeError):
        encode(req("xyz"))


def test_encode_frame_additivity():
    import random

    rng = random.Random(7)
    letters = "ابتثجحخدذرزسشصضطظعغفقكلمنهويءة"
    marks = "َُِّْ"
    for _ in range(50):
        def sample():
            out = []
            for _ in range(rng.randrange(1, 10)):
                out.append(rng.choice(letters))
                if rng.random() < 0.5:
                    out.append(rng.choice(marks))
                if rng.random() < 0.2:
                    out.append(" ")
            return "".join(out).strip() or "ب"

        a, b = sample(), sample()
        fa = encode(req(a)).frames.shape[0]
        fb = encode(req(b)).frames.shape[0]
        fab = encode(req(a + b)).frames.shape[0]
        assert fab == fa + fb, (a, b)


def test_voiced_letter_lands_on_harmonic_bands():
    f0 = get_voice("hamza").base_f0
    mel = encode(req("ب"))  # voiced consonant
    active = set(np.flatnonzero(mel.frames[0] > 0))
    expected = {nearest_band(f0 * k) for k in range(1, 11) if f0 * k <= 8000}
    assert active == expected


def test_unvoiced_letter_uses_high_bands():
    mel = encode(req("س"))
    active = np.flatnonzero(mel.frames[0] > 0)
    assert len(active) == 6
    assert active.min() >= 52


def test_pause_frames_are_silent():
    mel = encode(req("ب ب"))
    assert np.all(mel.frames[6:17] == 0)


def test_higher_rate_shrinks_hop():
    mel = encode(req("كَ", rate=44100))
    assert mel.frame_hop_s == pytest.approx(256 / 44100)
    assert mel.frames.shape[0] == math.ceil(150 / (256 / 44100 * 1000))


def test_vocode_duration_exact():
    mel = encode(req("ذهب الولد"))
    w = vocode(mel)
    assert len(w.samples) == mel.frames.shape[0] * 256
    assert abs(w.duration_s - mel.duration_s) <= mel.frame_hop_s


def test_vocode_all_zero_is_silent():
    mel = MelSpectrogram(np.zeros((10, MEL_BANDS)), 256 / 22050, 22050)
    w = vocode(mel)
    assert len(w.samples) == 2560
    assert np.all(w.samples == 0)


def test_vocode_single_band_fft_peak():
    for band in (10, 40, 70):
        frames = np.zeros((50, MEL_BANDS), dtype=np.float32)
        frames[:, band] = 1.0
        w = vocode(MelSpectrogram(frames, 256 / 22050, 22050))
        spectrum = np.abs(np.fft.rfft(w.to_float()))
        peak_hz = np.argmax(spectrum) * 22050 / len(w.samples)
        centers = band_centers_hz()
        lo = centers[band - 1] if band > 0 else 0.0
        hi = centers[band + 1] if band < MEL_BANDS - 1 else 22050 / 2
        assert lo < peak_hz < hi, (band, peak_hz, centers[band])


def test_vocode_deterministic():
    mel = encode(req("كتب"))
    assert np.array_equal(vocode(mel).samples, vocode(mel).samples)


def test_vocode_rejects_nonfinite():
    mel = encode(req("كتب"))
    mel.frames[0, 0] = np.nan  # arrays stay mutable behind the frozen dataclass
    with pytest.raises(ValueError):
        vocode(mel)


def test_vocode_peak_never_clips():
    w = vocode(encode(req("ذهب الولد إلى المدرسة وقرأ كتابا")))
    assert np.max(np.abs(w.samples)) <= 16385  # scaled to half full-scale


def test_synthesize_sentence_round_trips_as_wav():
    w, timing = synthesize(req("وقال الأستاذ الدكتور ماجد"))
    assert w.duration_s > 0
    assert timing > 0
    parsed = waveform_from_wav_bytes(wav_bytes(w))
    assert np.array_equal(parsed.samples, w.samples)
    assert parsed.sample_rate == 22050


def test_synthesize_duration_monotone_on_prefixes():
    text = "ذهب الولد إلى المدرسة صباحا"
    prev = 0.0
    for end in range(2, len(text) + 1, 5):
        prefix = text[:end].strip()
        if not prefix:
            continue
        w, _ = synthesize(req(prefix))
        assert w.duration_s >= prev
        prev = w.duration_s


def test_synthesize_deterministic_bytes():
    a, _ = synthesize(req("كتب الطالب الدرس"))
    b, _ = synthesize(req("كتب الطالب الدرس"))
    assert wav_bytes(a) == wav_bytes(b)


def test_injected_latency_shows_in_timing():
    slow = ReferenceSynthesizer(extra_latency_s=0.05)
    _, timing = slow.synthesize(req("كتب"))
    assert timing >= 0.05
    with pytest.raises(ValueError):
        ReferenceSynthesizer(extra_latency_s=-1.0)


class _LoopbackHandler(BaseHTTPRequestHandler):
    behavior = "ok"

    def do_POST(self):
        assert self.path == "/synthesize"
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.behavior == "error":
            self.send_response(500)
            self.end_headers()
            return
        if self.behavior == "slow":
            time.sleep(1.0)
        r = SynthesisRequest(
            DiacritizedText(body["text"], Source.BACKEND),
            get_voice(body["voice"]),
            16000 if self.behavior == "wrong-rate" else body["rate"],
        )
        wave, _ = ReferenceSynthesizer().synthesize(r)
        payload = wav_bytes(wave)
        if self.behavior == "truncated":
            payload = payload[:20]
        self.send_response(200)
        self.send_header("Content-Type", "audio/wav")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def loopback():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _LoopbackHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _LoopbackHandler.behavior = "ok"
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_remote_loopback_matches_local(loopback):
    r = req("ذهب الولد إلى المدرسة")
    local, _ = synthesize(r)
    remote, timing = remote_synthesize(r, loopback)
    assert np.array_equal(remote.samples, local.samples)
    assert remote.sample_rate == local.sample_rate
    assert timing > 0


def test_remote_unreachable_is_timeout_kind():
    with pytest.raises(BackendTimeoutError):
        remote_synthesize(req("كتب"), "http://127.0.0.1:9", timeout_s=0.5)


def test_remote_slow_backend_times_out(loopback):
    _LoopbackHandler.behavior = "slow"
    with pytest.raises(BackendTimeoutError):
        remote_synthesize(req("كتب"), loopback, timeout_s=0.2)


def test_remote_http_error_kind(loopback):
    _LoopbackHandler.behavior = "error"
    with pytest.raises(BackendHTTPError):
        remote_synthesize(req("كتب"), loopback)


def test_remote_truncated_wav_is_malformed(loopback):
    _LoopbackHandler.behavior = "truncated"
    with pytest.raises(MalformedAudioError):
        remote_synthesize(req("كتب"), loopback)


def test_remote_rate_mismatch_is_malformed(loopback):
    _LoopbackHandler.behavior = "wrong-rate"
    with pytest.raises(MalformedAudioError):
        remote_synthesize(req("كتب"), loopback)


def test_remote_synthesizer_class(loopback):
    client = RemoteSynthesizer(loopback, max_inflight=2)
    r = req("كتب الطالب")
    wave, timing = client.synthesize(r)
    local, _ = synthesize(r)
    assert np.array_equal(wave.samples, local.samples)
    with pytest.raises(ValueError):
        RemoteSynthesizer(loopback, max_inflight=0)
