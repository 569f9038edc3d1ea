"""WER, CER, and real-time-factor scoring.

Error rates come from a minimum-cost edit alignment with uniform costs.
Both sides are normalized first — diacritics stripped, punctuation
removed, whitespace collapsed — so a vowelized reference scores 0 against
its own bare skeleton.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .diacritizer import strip_diacritics


@dataclass(frozen=True)
class AlignOp:
    op: str  # match | substitute | insert | delete
    reference: str | None
    hypothesis: str | None


@dataclass(frozen=True)
class AlignmentTrace:
    ops: tuple[AlignOp, ...]
    matches: int
    substitutions: int
    deletions: int
    insertions: int

    @property
    def reference_length(self) -> int:
        return self.matches + self.substitutions + self.deletions

    @property
    def cost(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def align(reference: Sequence[str], hypothesis: Sequence[str]) -> AlignmentTrace:
    """Minimum-cost alignment of two token sequences, uniform costs."""
    n, m = len(reference), len(hypothesis)
    # dist[i][j]: cost of aligning reference[:i] with hypothesis[:j].
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        ref_tok = reference[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ref_tok != hypothesis[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    ops: list[AlignOp] = []
    counts = {"match": 0, "substitute": 0, "insert": 0, "delete": 0}
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            reference[i - 1] != hypothesis[j - 1]
        ):
            op = "match" if reference[i - 1] == hypothesis[j - 1] else "substitute"
            ops.append(AlignOp(op, reference[i - 1], hypothesis[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(AlignOp("delete", reference[i - 1], None))
            i -= 1
        else:
            ops.append(AlignOp("insert", None, hypothesis[j - 1]))
            j -= 1
        counts[ops[-1].op] += 1
    ops.reverse()
    return AlignmentTrace(
        ops=tuple(ops),
        matches=counts["match"],
        substitutions=counts["substitute"],
        deletions=counts["delete"],
        insertions=counts["insert"],
    )


_FOLD_ALEF = str.maketrans({"أ": "ا", "إ": "ا", "آ": "ا", "ٱ": "ا", "ى": "ي", "ة": "ه"})


def make_text_normalizer(
    strip: bool = True,
    remove_punctuation: bool = True,
    collapse_whitespace: bool = True,
    fold_hamza: bool = False,
) -> Callable[[str], str]:
    """Scoring-side text normalizer. Hamza/alef folding is off unless
    asked for; it erases real spelling distinctions."""

    def normalize(text: str) -> str:
        if strip:
            text = strip_diacritics(text)
        if fold_hamza:
            text = text.translate(_FOLD_ALEF)
        if remove_punctuation:
            text = "".join(
                " " if unicodedata.category(ch).startswith("P") else ch
                for ch in text
            )
        if collapse_whitespace:
            text = " ".join(text.split())
        return text

    return normalize


default_text_normalizer = make_text_normalizer()


class EmptyReferenceError(ValueError):
    """Reference side is empty after normalization; rates are undefined."""


def word_error_rate(
    reference: str,
    hypothesis: str,
    normalize_fn: Callable[[str], str] | None = None,
) -> tuple[float, AlignmentTrace]:
    """Percent WER over whitespace tokens: 100 * (S+D+I) / N."""
    normalize_fn = normalize_fn or default_text_normalizer
    ref_tokens = normalize_fn(reference).split()
    hyp_tokens = normalize_fn(hypothesis).split()
    if not ref_tokens:
        raise EmptyReferenceError("reference is empty after normalization")
    trace = align(ref_tokens, hyp_tokens)
    return 100.0 * trace.cost / trace.reference_length, trace


def char_error_rate(
    reference: str,
    hypothesis: str,
    normalize_fn: Callable[[str], str] | None = None,
) -> tuple[float, AlignmentTrace]:
    """Percent CER over characters; spaces count as characters."""
    normalize_fn = normalize_fn or default_text_normalizer
    ref_chars = list(normalize_fn(reference))
    hyp_chars = list(normalize_fn(hypothesis))
    if not ref_chars:
        raise EmptyReferenceError("reference is empty after normalization")
    trace = align(ref_chars, hyp_chars)
    return 100.0 * trace.cost / trace.reference_length, trace


def real_time_factor(generation_s: float, audio_duration_s: float) -> float:
    """Generation time divided by produced audio duration."""
    if generation_s <= 0 or audio_duration_s <= 0:
        raise ValueError("generation and duration must both be positive")
    return generation_s / audio_duration_s


def is_real_time(rtf: float) -> bool:
    return rtf <= 1.0


@dataclass
class EvalRow:
    model: str
    voice: str
    wer: float | None = None
    cer: float | None = None
    rtf: float | None = None
    n_utterances: int = 0

    def __post_init__(self):
        for name in ("wer", "cer"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.rtf is not None and self.rtf <= 0:
            raise ValueError("rtf must be > 0")


@dataclass
class EvalReport:
    """Per (model, voice) metric rows plus run-level metadata."""

    rows: list[EvalRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def row_for(self, model: str, voice: str) -> EvalRow:
        for row in self.rows:
            if row.model == model and row.voice == voice:
                return row
        row = EvalRow(model=model, voice=voice)
        self.rows.append(row)
        return row

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "model": r.model,
                    "voice": r.voice,
                    "wer": r.wer,
                    "cer": r.cer,
                    "rtf": r.rtf,
                    "real_time": None if r.rtf is None else is_real_time(r.rtf),
                    "n_utterances": r.n_utterances,
                }
                for r in self.rows
            ],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        report = cls(metadata=dict(doc.get("metadata", {})))
        for r in doc.get("rows", []):
            report.rows.append(EvalRow(
                model=r["model"],
                voice=r["voice"],
                wer=r.get("wer"),
                cer=r.get("cer"),
                rtf=r.get("rtf"),
                n_utterances=r.get("n_utterances", 0),
            ))
        return report
