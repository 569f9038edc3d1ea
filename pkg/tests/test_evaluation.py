import itertools
import random
from functools import lru_cache

import pytest

from natiq.evaluation import (
    EmptyReferenceError,
    EvalReport,
    EvalRow,
    align,
    char_error_rate,
    default_text_normalizer,
    is_real_time,
    make_text_normalizer,
    real_time_factor,
    word_error_rate,
)


def brute_force_cost(ref, hyp):
    """Plain memoized recursion over all alignments; no DP table."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        return min(
            go(i + 1, j + 1) + (ref[i] != hyp[j]),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )

    return go(0, 0)


def test_align_counts_on_hand_example():
    trace = align(["ذهب", "الولد", "الى", "المدرسة"], ["ذهب", "الولد", "المدرسة"])
    assert trace.matches == 3
    assert trace.deletions == 1
    assert trace.substitutions == 0
    assert trace.insertions == 0
    assert trace.reference_length == 4


def test_align_ops_cover_both_sequences():
    ref = list("كتاب")
    hyp = list("كتب")
    trace = align(ref, hyp)
    assert [op.reference for op in trace.ops if op.reference is not None] == ref
    assert [op.hypothesis for op in trace.ops if op.hypothesis is not None] == hyp


def test_align_exhaustive_tiny_pairs():
    alphabet = "ابت"
    strings = [
        "".join(p)
        for n in range(4)
        for p in itertools.product(alphabet, repeat=n)
    ]
    for ref in strings:
        for hyp in strings:
            trace = align(list(ref), list(hyp))
            assert trace.cost == brute_force_cost(ref, hyp), (ref, hyp)
            assert trace.matches + trace.substitutions + trace.deletions == len(ref)
            assert trace.matches + trace.substitutions + trace.insertions == len(hyp)


def test_align_sampled_pairs():
    rng = random.Random(5)
    alphabet = "ابت"
    for _ in range(5000):
        ref = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 7)))
        hyp = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 7)))
        assert align(list(ref), list(hyp)).cost == brute_force_cost(ref, hyp)


def test_align_triangle_inequality():
    rng = random.Random(11)
    alphabet = "ابتث"
    for _ in range(300):
        a, b, c = (
            "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 8)))
            for _ in range(3)
        )
        ab = align(list(a), list(b)).cost
        bc = align(list(b), list(c)).cost
        ac = align(list(a), list(c)).cost
        assert ac <= ab + bc


def wer(ref, hyp, **kw):
    return word_error_rate(ref, hyp, **kw)[0]


def cer(ref, hyp, **kw):
    return char_error_rate(ref, hyp, **kw)[0]


def test_wer_hand_example():
    assert wer("ذهب الولد الى المدرسة", "ذهب الولد المدرسة") == pytest.approx(25.0)


def test_wer_identity():
    assert wer("ذهب الولد الى المدرسة", "ذهب الولد الى المدرسة") == 0.0


def test_wer_identity_fuzz():
    rng = random.Random(13)
    words = ["ذهب", "كتب", "الولد", "المدرسة", "سريعا"]
    for _ in range(100):
        text = " ".join(rng.choice(words) for _ in range(rng.randrange(1, 10)))
        assert wer(text, text) == 0.0


def test_cer_hand_example():
    assert cer("كتب", "كتبت") == pytest.approx(33.33, abs=0.01)


def test_cer_counts_spaces():
    # One missing space out of 7 reference characters.
    assert cer("ذهب ولد", "ذهبولد") == pytest.approx(100.0 / 7)


def test_vowelized_reference_scores_zero():
    ref = "ذَهَبَ الوَلَدُ إِلى المَدْرَسَةِ"
    hyp = "ذهب الولد إلى المدرسة"
    assert wer(ref, hyp) == 0.0
    assert cer(ref, hyp) == 0.0


def test_punctuation_ignored_by_default():
    assert wer("ذهب الولد.", "ذهب الولد") == 0.0


def test_empty_reference_rejected():
    with pytest.raises(EmptyReferenceError):
        word_error_rate("", "كتب")
    with pytest.raises(EmptyReferenceError):
        word_error_rate("!!!", "كتب")


def test_insertions_can_exceed_100():
    assert wer("كتب", "كتب ذهب الولد") == pytest.approx(200.0)


def test_normalizer_fold_hamza_flag():
    plain = default_text_normalizer
    folding = make_text_normalizer(fold_hamza=True)
    assert plain("أحمد") != plain("احمد")
    assert folding("أحمد") == folding("احمد")
    assert folding("مكتبة") == folding("مكتبه")


def test_normalizer_keeps_diacritics_when_asked():
    keep = make_text_normalizer(strip=False)
    assert keep("كَتَبَ") == "كَتَبَ"


def test_rtf_examples():
    assert real_time_factor(0.9, 10.0) == pytest.approx(0.09)
    assert real_time_factor(42.4, 10.0) == pytest.approx(4.24)


def test_rtf_flag_boundary():
    assert is_real_time(real_time_factor(10.0, 10.0))
    assert is_real_time(real_time_factor(9.99, 10.0))
    assert not is_real_time(real_time_factor(10.01, 10.0))


def test_rtf_rejects_nonpositive():
    with pytest.raises(ValueError):
        real_time_factor(0.0, 10.0)
    with pytest.raises(ValueError):
        real_time_factor(1.0, 0.0)
    with pytest.raises(ValueError):
        real_time_factor(-1.0, 10.0)


def test_eval_row_validation():
    with pytest.raises(ValueError):
        EvalRow(model="m", voice="v", wer=-1.0, cer=0.0, rtf=0.1, n_utterances=1)
    with pytest.raises(ValueError):
        EvalRow(model="m", voice="v", wer=0.0, cer=0.0, rtf=0.0, n_utterances=1)


def test_eval_report_round_trip():
    report = EvalReport(
        rows=[
            EvalRow(model="ref", voice="hamza", wer=12.5, cer=4.2, rtf=0.11, n_utterances=100),
            EvalRow(model="ref", voice="amina", wer=13.0, cer=4.5, rtf=0.12, n_utterances=100),
        ],
        metadata={"corpus": "dev"},
    )
    restored = EvalReport.from_dict(report.to_dict())
    assert restored == report
    assert report.row_for("ref", "hamza").wer == 12.5
    assert report.to_dict()["rows"][0]["real_time"] is True
