import numpy as np
import pytest

from natiq.audio import (
    MalformedAudioError,
    Waveform,
    peak_dbfs,
    read_wav,
    wav_bytes,
    waveform_from_wav_bytes,
    write_wav,
)


def tone(freq=440.0, dur=0.25, rate=22050, amp=0.5):
    t = np.arange(int(dur * rate)) / rate
    return Waveform.from_float(amp * np.sin(2 * np.pi * freq * t), rate)


def test_waveform_basics():
    w = tone()
    assert w.sample_rate == 22050
    assert w.duration_s == pytest.approx(0.25, abs=1 / 22050)
    assert w.samples.dtype == np.int16


def test_waveform_rejects_bad_rate():
    with pytest.raises(ValueError):
        Waveform(np.zeros(10, dtype=np.int16), 12345)


def test_from_float_clips():
    w = Waveform.from_float(np.array([2.0, -2.0, 0.0]), 22050)
    assert w.samples[0] == 32767
    assert w.samples[1] == -32768
    assert w.samples[2] == 0


def test_float_round_trip():
    w = tone()
    again = Waveform.from_float(w.to_float(), w.sample_rate)
    assert np.array_equal(w.samples, again.samples)


def test_slice_seconds():
    w = tone(dur=1.0)
    part = w.slice_seconds(0.25, 0.75)
    assert part.duration_s == pytest.approx(0.5, abs=2 / 22050)
    lo = int(round(0.25 * 22050))
    hi = int(round(0.75 * 22050))
    assert np.array_equal(part.samples, w.samples[lo:hi])


def test_peak_dbfs():
    assert peak_dbfs(Waveform(np.zeros(100, dtype=np.int16), 22050)) == float("-inf")
    full = Waveform(np.array([32767], dtype=np.int16), 22050)
    assert peak_dbfs(full) == pytest.approx(0.0, abs=0.001)
    half = Waveform.from_float(np.array([0.5]), 22050)
    assert peak_dbfs(half) == pytest.approx(-6.02, abs=0.01)


def test_wav_round_trip_bytes():
    w = tone()
    raw = wav_bytes(w)
    assert raw[:4] == b"RIFF"
    assert raw[8:12] == b"WAVE"
    back = waveform_from_wav_bytes(raw)
    assert back.sample_rate == w.sample_rate
    assert np.array_equal(back.samples, w.samples)


def test_wav_round_trip_file(tmp_path):
    w = tone(rate=16000)
    path = tmp_path / "t.wav"
    write_wav(path, w)
    back = read_wav(path)
    assert back.sample_rate == 16000
    assert np.array_equal(back.samples, w.samples)


def test_malformed_bytes_rejected():
    with pytest.raises(MalformedAudioError):
        waveform_from_wav_bytes(b"not audio at all")
    with pytest.raises(MalformedAudioError):
        waveform_from_wav_bytes(b"RIFF\x00\x00\x00\x00JUNK")
    truncated = wav_bytes(tone())[:30]
    with pytest.raises(MalformedAudioError):
        waveform_from_wav_bytes(truncated)


def test_unsupported_rate_rejected():
    import io
    import wave

    buf = io.BytesIO()
    with wave.open(buf, "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(8000)
        f.writeframes(b"\x00\x00" * 100)
    with pytest.raises(MalformedAudioError):
        waveform_from_wav_bytes(buf.getvalue())


def test_stereo_rejected():
    import io
    import wave

    buf = io.BytesIO()
    with wave.open(buf, "wb") as f:
        f.setnchannels(2)
        f.setsampwidth(2)
        f.setframerate(22050)
        f.writeframes(b"\x00\x00\x00\x00" * 100)
    with pytest.raises(MalformedAudioError):
        waveform_from_wav_bytes(buf.getvalue())
