"""Short-vowel restoration through pluggable backends.

The diacritizer itself is a client: backends (a real service, or the
in-repo mocks) produce the vowelized string, and this module enforces the
contract around them — canonical mark ordering, placement validation, and
skeleton preservation (stripping the result must give back the input).
"""

from __future__ import annotations

import enum
import json
import logging
import threading
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .normalizer import NormalizedText

log = logging.getLogger(__name__)

# U+064B..U+0652: tanween forms, fatha, damma, kasra, shadda, sukun.
DIACRITICS = frozenset(chr(cp) for cp in range(0x064B, 0x0653))
TATWEEL = "ـ"
_REMOVABLE = DIACRITICS | {TATWEEL}

_HARAKAT = frozenset(chr(cp) for cp in range(0x064B, 0x0651)) | {"ْ"}
SHADDA = "ّ"

_DIGIT_CHARS = frozenset("0123456789٠١٢٣٤٥٦٧٨٩")


class Source(enum.Enum):
    BACKEND = "backend"
    MANUAL_REVIEW = "manual-review"
    PASSTHROUGH = "passthrough"


@dataclass(frozen=True)
class DiacritizedText:
    content: str
    source: Source

    def surface(self) -> str:
        return strip_diacritics(self.content)


def strip_diacritics(text: str) -> str:
    """Remove harakat (U+064B-U+0652) and tatweel; keep everything else."""
    return "".join(ch for ch in text if ch not in _REMOVABLE)


def canonical_order(text: str) -> str:
    """Reorder each run of combining marks into Unicode canonical order
    (ascending combining class, stable). Composition is deliberately not
    applied: NFC would also compose hamza/madda onto alef and change the
    letter skeleton."""
    out: list[str] = []
    run: list[str] = []

    def flush():
        run.sort(key=unicodedata.combining)
        out.extend(run)
        run.clear()

    for ch in text:
        if unicodedata.combining(ch):
            run.append(ch)
        else:
            flush()
            out.append(ch)
    flush()
    return "".join(out)


@dataclass(frozen=True)
class Violation:
    offset: int
    rule: str
    message: str


def validate_diacritization(text: str) -> list[Violation]:
    """Check diacritic placement; an empty list means well-formed.

    Rules: a diacritic must follow an Arabic base letter
    (leading-diacritic), no mark may repeat within one letter's cluster
    (repeated-haraka), and shadda tolerates at most one companion harakah
    (shadda-combining). Offsets index code points in the input.
    """
    violations: list[Violation] = []
    cluster: list[tuple[int, str]] = []
    base: str | None = None

    def check_cluster():
        seen: set[str] = set()
        harakat = 0
        has_shadda = False
        for offset, mark in cluster:
            if mark in seen:
                violations.append(Violation(
                    offset, "repeated-haraka",
                    f"mark {unicodedata.name(mark, mark)} repeated on one letter",
                ))
            seen.add(mark)
            if mark == SHADDA:
                has_shadda = True
            elif mark in _HARAKAT:
                harakat += 1
        if has_shadda and harakat > 1:
            violations.append(Violation(
                cluster[0][0], "shadda-combining",
                f"shadda with {harakat} harakat on one letter",
            ))

    for offset, ch in enumerate(text):
        if ch in DIACRITICS:
            if base is None:
                violations.append(Violation(
                    offset, "leading-diacritic",
                    f"{unicodedata.name(ch, ch)} has no base letter",
                ))
            else:
                cluster.append((offset, ch))
        elif unicodedata.combining(ch):
            # Foreign combining mark: ride along, neither base nor haraka.
            continue
        else:
            if cluster:
                check_cluster()
                cluster.clear()
            base = ch if ch.isalpha() else None
    if cluster:
        check_cluster()
    return violations


class BackendError(RuntimeError):
    """Backend unreachable or returned an unusable response."""


class DiacritizationError(RuntimeError):
    """Diacritization failed and the policy says not to degrade."""


class DiacritizerBackend(Protocol):
    def diacritize(self, text: str) -> str: ...


class EchoBackend:
    """Returns the input unchanged. The no-op stand-in for development."""

    def diacritize(self, text: str) -> str:
        return text


class TableBackend:
    """Word-for-word lookup; words missing from the table pass through.

    Deterministic mock for the external service: tests know exactly what
    it returns because they wrote the table.
    """

    def __init__(self, table: dict[str, str]):
        for skeleton, vowelized in table.items():
            if strip_diacritics(vowelized) != strip_diacritics(skeleton):
                raise ValueError(
                    f"table entry changes the skeleton: {skeleton!r} -> {vowelized!r}"
                )
        self.table = dict(table)

    def diacritize(self, text: str) -> str:
        return "".join(
            self.table.get(segment, segment) for segment in _split_keep_spaces(text)
        )


def _split_keep_spaces(text: str) -> list[str]:
    parts: list[str] = []
    word = ""
    for ch in text:
        if ch.isspace():
            if word:
                parts.append(word)
                word = ""
            parts.append(ch)
        else:
            word += ch
    if word:
        parts.append(word)
    return parts


class HttpBackend:
    """Client for the line-oriented HTTP protocol:
    POST {base_url}/diacritize with {"text": ...} -> {"diacritized": ...}.

    A semaphore caps concurrent in-flight requests so a burst of jobs
    cannot flood the upstream service.
    """

    def __init__(self, base_url: str, timeout_s: float = 10.0, max_inflight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._slot = threading.BoundedSemaphore(max_inflight)

    def diacritize(self, text: str) -> str:
        import requests

        with self._slot:
            try:
                response = requests.post(
                    f"{self.base_url}/diacritize",
                    json={"text": text},
                    timeout=self.timeout_s,
                )
            except requests.RequestException as exc:
                raise BackendError(f"diacritizer unreachable: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(f"diacritizer returned HTTP {response.status_code}")
        try:
            payload = response.json()
            diacritized = payload["diacritized"]
        except (ValueError, KeyError) as exc:
            raise BackendError(f"malformed diacritizer response: {exc}") from exc
        if not isinstance(diacritized, str):
            raise BackendError("malformed diacritizer response: non-string payload")
        return diacritized


class FailurePolicy(enum.Enum):
    FAIL = "fail"
    PASSTHROUGH = "passthrough"


def diacritize(
    text: NormalizedText | str,
    backend: DiacritizerBackend,
    policy: FailurePolicy = FailurePolicy.FAIL,
) -> DiacritizedText:
    """Vowelize normalized text through the backend.

    The backend's output is canonically ordered, then rejected unless it
    validates and strips back to the input skeleton. Failures follow the
    policy: FAIL raises, PASSTHROUGH returns the input unvowelized.
    """
    surface = text.text if isinstance(text, NormalizedText) else text
    if any(ch in _DIGIT_CHARS for ch in surface):
        raise ValueError("diacritization expects digit-free input; normalize first")

    def degrade(reason: str) -> DiacritizedText:
        if policy is FailurePolicy.FAIL:
            raise DiacritizationError(reason)
        log.warning("diacritization degraded to passthrough: %s", reason)
        return DiacritizedText(surface, Source.PASSTHROUGH)

    try:
        raw = backend.diacritize(surface)
    except BackendError as exc:
        return degrade(str(exc))
    result = canonical_order(raw)
    violations = validate_diacritization(result)
    if violations:
        first = violations[0]
        return degrade(
            f"backend output invalid at offset {first.offset}: {first.rule}"
        )
    if strip_diacritics(result) != strip_diacritics(surface):
        return degrade("backend output does not strip back to the input skeleton")
    return DiacritizedText(result, Source.BACKEND)


class ReviewReason(enum.Enum):
    MISPRONUNCIATION = "mispronunciation"
    DIACRITIC_FIX = "diacritic-fix"
    ENTITY = "entity"


@dataclass(frozen=True)
class ReviewRecord:
    """One reviewed transcript correction for a segment."""

    segment_id: str
    original: str
    corrected: str
    reason: ReviewReason
    reviewer: str = ""

    def __post_init__(self):
        if self.corrected == self.original:
            raise ValueError("a review record must change something")
        if self.reason is not ReviewReason.MISPRONUNCIATION:
            if strip_diacritics(self.original) != strip_diacritics(self.corrected):
                raise ValueError(
                    f"reason {self.reason.value} may not change the skeleton"
                )


def match_transcript(
    reference: str,
    hypothesis: str,
    segment_id: str = "",
) -> list[ReviewRecord]:
    """Candidate corrections from aligning a transcript against what an
    ASR system heard: same-skeleton substitutions become diacritic fixes,
    different-skeleton substitutions mispronunciation candidates.
    Insertions and deletions are alignment noise, not candidates."""
    from .evaluation import align

    ref_words = reference.split()
    hyp_words = hypothesis.split()
    if not ref_words:
        raise ValueError("empty reference transcript")
    trace = align(ref_words, hyp_words)
    candidates: list[ReviewRecord] = []
    for op in trace.ops:
        if op.op != "substitute":
            continue
        if strip_diacritics(op.reference) == strip_diacritics(op.hypothesis):
            reason = ReviewReason.DIACRITIC_FIX
        else:
            reason = ReviewReason.MISPRONUNCIATION
        candidates.append(ReviewRecord(
            segment_id=segment_id,
            original=op.reference,
            corrected=op.hypothesis,
            reason=reason,
        ))
    return candidates


def save_review_records(path: str | Path, records: list[ReviewRecord]) -> None:
    """One JSON object per line."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps({
                "segment_id": record.segment_id,
                "original": record.original,
                "corrected": record.corrected,
                "reason": record.reason.value,
                "reviewer": record.reviewer,
            }, ensure_ascii=False))
            f.write("\n")


def load_review_records(path: str | Path) -> list[ReviewRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8-sig").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        records.append(ReviewRecord(
            segment_id=doc["segment_id"],
            original=doc["original"],
            corrected=doc["corrected"],
            reason=ReviewReason(doc["reason"]),
            reviewer=doc.get("reviewer", ""),
        ))
    return records
