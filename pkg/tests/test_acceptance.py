"""Release gate: one test per shipping criterion.

Every test prints a single [PASS]/[FAIL] line naming its criterion, so
`pytest -s tests/test_acceptance.py` reads as a checklist. Tolerances
are stated inline; oracles are imported from the test modules that
froze them, never re-derived from the code under test.
"""

import itertools
import json
import math
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from natiq.audio import Waveform, waveform_from_wav_bytes, wav_bytes
from natiq.cli import main as cli_main
from natiq.diacritizer import TableBackend, diacritize, strip_diacritics
from natiq.evaluation import (
    align,
    char_error_rate,
    is_real_time,
    real_time_factor,
    word_error_rate,
)
from natiq.mos import aggregate_mos, assign_raters, build_pool, record_rating
from natiq.normalizer import Case, Gender, normalize, spell_integer
from natiq.segmenter import (
    detect_silences,
    segment,
    sentence_mark_offsets,
)
from natiq.service import ServiceConfig, create_app
from natiq.synth import ReferenceSynthesizer, SynthesisRequest, get_voice

from number_table import SPELLINGS_0_99
from test_evaluation import brute_force_cost

ROOT = Path(__file__).resolve().parents[1]
MODULE_T0 = time.monotonic()


@contextmanager
def criterion(name):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}  ({time.perf_counter() - t0:.2f}s)")


# 1 ------------------------------------------------------------------


def test_normalization_goldens_exact_under_one_second():
    with criterion("normalization goldens exact, < 1 s"):
        t0 = time.perf_counter()
        assert normalize("وقال أ. د. ماجد").text == "وقال الأستاذ الدكتور ماجد"
        # Hundredths read units-then-tens: "three and forty".
        assert normalize("16.43").text == "ستة عشر وثلاثة وأربعين جزء من المئة"
        assert time.perf_counter() - t0 < 1.0


# 2 ------------------------------------------------------------------


def test_number_spelling_zero_mismatches():
    with criterion("number spelling: 400 table + 100 compositional, zero mismatches"):
        agreements = [
            (g, c)
            for g in (Gender.MASCULINE, Gender.FEMININE)
            for c in (Case.NOMINATIVE, Case.ACCUSATIVE_GENITIVE)
        ]
        mismatches = []
        checked = 0
        for gender, case in agreements:
            table = SPELLINGS_0_99[(gender.value, case.value)]
            for n, expected in enumerate(table):
                checked += 1
                got = " ".join(spell_integer(n, gender, case))
                if got != expected:
                    mismatches.append((n, gender.value, case.value))
        assert checked == 400

        from test_numbers import compositional_oracle

        rng = random.Random(4242)
        for _ in range(100):
            n = rng.randrange(100, 1_000_000)
            gender, case = rng.choice(agreements)
            got = " ".join(spell_integer(n, gender, case))
            if got != compositional_oracle(n, gender, case):
                mismatches.append((n, gender.value, case.value))
        assert mismatches == []


# 3 ------------------------------------------------------------------


def test_alignment_dp_matches_brute_force_50k_sample():
    with criterion("edit-distance DP vs brute force: 50k sampled pairs, zero mismatches"):
        alphabet = "ابت"
        strings = [
            "".join(p)
            for length in range(7)
            for p in itertools.product(alphabet, repeat=length)
        ]
        assert len(strings) == 1093  # (3^7 - 1) / 2
        rng = random.Random(2024)
        mismatches = 0
        for _ in range(50_000):
            ref = rng.choice(strings)
            hyp = rng.choice(strings)
            if align(list(ref), list(hyp)).cost != brute_force_cost(ref, hyp):
                mismatches += 1
        assert mismatches == 0

        # Hand-computed examples, compared exactly.
        assert word_error_rate("ذهب الولد الى المدرسة", "ذهب الولد المدرسة")[0] == 25.0
        assert char_error_rate("كتب", "كتبت")[0] == 100.0 * 1 / 3


# 4 ------------------------------------------------------------------


def test_strip_idempotent_and_backend_round_trip_1000():
    with criterion("diacritic strip: 1000 fuzzed strings, idempotent + skeleton round-trip"):
        letters = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي"
        vowels = "َُِ"
        rng = random.Random(64)
        for _ in range(1000):
            skeleton = " ".join(
                "".join(rng.choice(letters) for _ in range(rng.randrange(1, 6)))
                for _ in range(rng.randrange(1, 4))
            )
            once = strip_diacritics(skeleton)
            assert strip_diacritics(once) == once

            table = {
                word: "".join(ch + rng.choice(vowels) for ch in word)
                for word in skeleton.split()
            }
            result = diacritize(skeleton, TableBackend(table))
            assert strip_diacritics(result.content) == skeleton


# 5 ------------------------------------------------------------------


def test_rtf_band_with_injected_one_second_delay():
    with criterion("RTF: 1.0 s delay on ~10 s audio lands in [0.105, 0.115]·(1+overhead)"):
        text = " ".join(["با"] * 33)
        req = SynthesisRequest(text, voice=get_voice("hamza"))

        pure_wave, pure_s = ReferenceSynthesizer().synthesize(req)
        duration = pure_wave.duration_s
        assert 8.7 < duration < 9.6  # close enough to the nominal 10 s
        overhead = real_time_factor(pure_s, duration)

        delayed_wave, synth_s = ReferenceSynthesizer(extra_latency_s=1.0).synthesize(req)
        measured = real_time_factor(synth_s, delayed_wave.duration_s)
        lo = 0.105 * (1 + overhead)
        hi = 0.115 * (1 + overhead)
        assert lo <= measured <= hi, f"rtf {measured:.4f} outside [{lo:.4f}, {hi:.4f}]"

        # Recompute from the recorded time and the serialized audio.
        reparsed = waveform_from_wav_bytes(wav_bytes(delayed_wave))
        recomputed = synth_s / reparsed.duration_s
        assert abs(measured - recomputed) <= 0.05 * recomputed

        # The real-time flag flips exactly at ratio 1.0.
        assert is_real_time(real_time_factor(2.5, 2.5)) is True
        assert is_real_time(1.0) is True
        assert is_real_time(math.nextafter(1.0, 2.0)) is False


# 6 ------------------------------------------------------------------


def test_mos_pool_assignment_and_exact_means():
    with criterion("MOS: 600-entry pool, 14x15 seed-reproducible, cell means exact"):
        sentences = [f"الجملة رقم {i} ضمن التقييم" for i in range(100)]
        models = ["base", "vowelized", "tuned"]
        voices = ["hamza", "amina"]

        def build():
            return build_pool(
                sentences, models, voices, lambda t, m, v: f"{m}-{v}.wav"
            )

        study = build()
        assert len(study.pool) == 600

        first = assign_raters(study, 14, 15, seed=7)
        assert len(first) == 14
        assert all(len(ids) == 15 for ids in first.values())
        again = assign_raters(build(), 14, 15, seed=7)
        assert first == again
        assert assign_raters(build(), 14, 15, seed=8) != first

        # Constant score per cell: the mean must come back as that
        # constant, bit for bit.
        score_of = {
            ("base", "hamza"): 5, ("base", "amina"): 4,
            ("vowelized", "hamza"): 3, ("vowelized", "amina"): 2,
            ("tuned", "hamza"): 1, ("tuned", "amina"): 5,
        }
        for rater, ids in study.assignments.items():
            for entry_id in ids:
                entry = study.entry(entry_id)
                record_rating(
                    study, rater, entry_id, score_of[(entry.model, entry.voice)]
                )
        cells = aggregate_mos(study)
        assert set(cells) == set(score_of)
        for key, cell in cells.items():
            assert cell.mean == score_of[key]
        assert sum(c.count for c in cells.values()) == 14 * 15

        # A mixed cell with an exactly representable mean.
        small = build_pool(sentences[:4], ["base"], ["hamza"], lambda t, m, v: "x.wav")
        assign_raters(small, 1, 4, seed=1)
        for entry_id, score in zip(small.assignments["r01"], (4, 5, 4, 5)):
            record_rating(small, "r01", entry_id, score)
        assert aggregate_mos(small)[("base", "hamza")].mean == 4.5


# 7 ------------------------------------------------------------------


def test_segmentation_mean_band_and_marked_cuts_only():
    with criterion("segmentation: mean in [8, 12] s for target 10, cuts only at sentence silences"):
        rate = 16000
        rng = random.Random(424)

        def tone(dur_s):
            t = np.arange(int(round(dur_s * rate))) / rate
            return 0.3 * np.sin(2 * np.pi * rng.uniform(150, 400) * t)

        def quiet(dur_s):
            return np.zeros(int(round(dur_s * rate)))

        parts, sentences = [], []
        n_internal = 0
        for k in range(100):
            if k % 7 == 3:
                # A hesitation pause inside the sentence: detectable,
                # but not a legal cut point.
                parts += [tone(rng.uniform(1.5, 4.0)), quiet(0.35),
                          tone(rng.uniform(1.5, 4.0))]
                n_internal += 1
            else:
                parts.append(tone(rng.uniform(3.0, 9.0)))
            sentences.append(f"جملة تجريبية رقم {k}.")
            if k < 99:
                parts.append(quiet(0.5))
        w = Waveform.from_float(np.concatenate(parts), rate)
        text = " ".join(sentences)

        silences = detect_silences(w, -40.0, 0.3)
        assert len(silences) == 99 + n_internal
        boundary = [i for i, s in enumerate(silences) if s.duration_s > 0.43]
        internal = [i for i in range(len(silences)) if i not in boundary]
        assert len(boundary) == 99
        assert len(internal) == n_internal

        marks = dict(zip(boundary, sentence_mark_offsets(text)))
        segs = segment(w, text, silences, 10.0, marks=marks)

        mean = sum(s.duration_s for s in segs) / len(segs)
        assert 8.0 <= mean <= 12.0, f"mean {mean:.2f}s"

        # Transcript conservation, word for word.
        assert " ".join(s.transcript for s in segs).split() == text.split()
        # Sample conservation: the cuts partition the file.
        assert sum(len(s.audio.samples) for s in segs) == len(w.samples)

        # Every cut sits at a marked (sentence) silence midpoint and
        # never at a hesitation pause.
        allowed = {int(round(silences[i].mid_s * rate)) for i in boundary}
        forbidden = {int(round(silences[i].mid_s * rate)) for i in internal}
        cuts = set(np.cumsum([len(s.audio.samples) for s in segs])[:-1].tolist())
        assert cuts <= allowed
        assert not cuts & forbidden


# 8 ------------------------------------------------------------------


def test_cli_and_service_produce_identical_wav_bytes(tmp_path, capsys):
    with criterion("end to end: CLI and service WAVs byte-identical, headers parse"):
        texts = ["عندي 3 كتب", "وقال أ. د. ماجد", "مرحبا بالعالم"]
        src = tmp_path / "s.txt"
        src.write_text("\n".join(texts) + "\n", encoding="utf-8")
        out_dir = tmp_path / "cli"
        code = cli_main(
            ["synth", "--text-file", str(src), "--voice", "hamza",
             "--out", str(out_dir)]
        )
        capsys.readouterr()
        assert code == 0

        client = TestClient(create_app(ServiceConfig()))
        for index, text in enumerate(texts, start=1):
            job_id = client.post(
                "/api/synthesize", json={"text": text, "voice": "hamza"}
            ).json()["job_id"]
            deadline = time.monotonic() + 15
            while time.monotonic() < deadline:
                doc = client.get(f"/api/jobs/{job_id}").json()
                if doc["state"] in ("done", "failed"):
                    break
                time.sleep(0.02)
            assert doc["state"] == "done"
            served = client.get(doc["audio_ref"]).content

            assert served == (out_dir / f"utt-{index:04d}.wav").read_bytes()
            assert served[:4] == b"RIFF" and served[8:12] == b"WAVE"
            wave = waveform_from_wav_bytes(served)
            assert wave.sample_rate == 22050
            assert len(wave.samples) > 0


def test_full_suite_runs_without_webapp_under_time_budget():
    with criterion("primary suite: no webapp needed, < 5 min wall clock"):
        t0 = time.monotonic()
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
             "--ignore", str(ROOT / "tests" / "test_acceptance.py"),
             str(ROOT / "tests")],
            cwd=ROOT, capture_output=True, text=True, timeout=300,
        )
        elapsed = time.monotonic() - t0
        assert proc.returncode == 0, proc.stdout[-2000:] + proc.stderr[-2000:]
        own = time.monotonic() - MODULE_T0
        assert elapsed + own < 300, f"suite {elapsed:.0f}s + gate {own:.0f}s"
        print(f"  (suite {elapsed:.1f}s, gate so far {own:.1f}s)")
