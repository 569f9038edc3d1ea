"""Silence-driven corpus segmentation.

Long recordings are cut into sentence-aligned pieces: detect quiet spans,
let the caller mark which of them are sentence boundaries, then accumulate
sentences greedily toward a target mean duration. Cuts land only on marked
silence midpoints or file edges, so prosody inside a sentence is never
broken.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .audio import Waveform

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD_DB = -40.0
DEFAULT_MIN_SILENCE_S = 0.3
DEFAULT_MAX_SEGMENT_S = 15.0

# Window geometry for the RMS scan.
WINDOW_S = 0.025
HOP_S = 0.010

# Sentence-final punctuation, Arabic and Latin.
SENTENCE_END_MARKS = ".!?؟؛…"

WARN_OVERSIZED = "oversized-sentence"


class SegmentationError(ValueError):
    pass


@dataclass(frozen=True)
class SilenceSpan:
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.end_s <= self.start_s:
            raise ValueError("silence span must have positive length")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def mid_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass
class AudioSegment:
    audio: Waveform
    transcript: str
    id: str
    duration_s: float
    warnings: tuple[str, ...] = ()


def detect_silences(
    w: Waveform,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    min_dur_s: float = DEFAULT_MIN_SILENCE_S,
) -> list[SilenceSpan]:
    """Spans where windowed RMS stays below threshold_db for >= min_dur_s.

    25 ms windows on a 10 ms hop; a span runs from the first quiet window's
    start to the last quiet window's end, clamped to the file.
    """
    if min_dur_s <= 0:
        raise ValueError("min_dur_s must be > 0")
    n = len(w.samples)
    if n == 0:
        return []
    rate = w.sample_rate
    win = max(1, int(round(WINDOW_S * rate)))
    hop = max(1, int(round(HOP_S * rate)))

    x = w.to_float().astype(np.float64)
    cumsq = np.concatenate([[0.0], np.cumsum(x * x)])
    starts = np.arange(0, n, hop)
    ends = np.minimum(starts + win, n)
    mean_sq = (cumsq[ends] - cumsq[starts]) / (ends - starts)
    # dBFS; silent windows hit -inf, which always passes the threshold.
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(mean_sq)
    quiet = db < threshold_db

    spans: list[SilenceSpan] = []
    i = 0
    while i < len(quiet):
        if not quiet[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(quiet) and quiet[j + 1]:
            j += 1
        start = float(starts[i]) / rate
        end = float(min(starts[j] + win, n)) / rate
        if end - start >= min_dur_s:
            spans.append(SilenceSpan(start, end))
        i = j + 1
    return spans


def sentence_mark_offsets(text: str) -> list[int]:
    """Char offsets just past each run of sentence-final punctuation."""
    offsets = []
    i = 0
    while i < len(text):
        if text[i] in SENTENCE_END_MARKS:
            while i + 1 < len(text) and text[i + 1] in SENTENCE_END_MARKS:
                i += 1
            offsets.append(i + 1)
        i += 1
    # A mark at the very end is the file edge, not an internal cut.
    if offsets and offsets[-1] == len(text):
        offsets.pop()
    return offsets


def pair_marks(text: str, silences: list[SilenceSpan]) -> dict[int, int]:
    """Pair the k-th sentence end with the k-th silence, in order.

    The counts must agree; a recording whose pauses do not line up with
    its punctuation needs manual marking instead.
    """
    offsets = sentence_mark_offsets(text)
    if len(offsets) != len(silences):
        raise SegmentationError(
            f"{len(offsets)} sentence marks vs {len(silences)} silences; "
            "supply explicit marks"
        )
    return dict(enumerate(offsets))


def segment(
    w: Waveform,
    transcript: str,
    silences: list[SilenceSpan],
    target_mean_s: float,
    *,
    marks: Mapping[int, int] | Iterable[tuple[int, int]],
    max_duration_s: float = DEFAULT_MAX_SEGMENT_S,
    id_prefix: str = "seg",
) -> list[AudioSegment]:
    """Cut at marked silence midpoints, greedily approaching target_mean_s.

    marks maps a silence index to the char offset where its sentence ends.
    A sentence longer than max_duration_s is emitted alone with a warning
    flag; only a file with no usable cut at all raises.
    """
    if target_mean_s <= 0:
        raise ValueError("target_mean_s must be > 0")
    if not transcript.strip():
        raise ValueError("transcript is empty")
    marks = dict(marks)
    for idx in marks:
        if not 0 <= idx < len(silences):
            raise SegmentationError(f"mark references silence {idx}, have {len(silences)}")
        if not 0 <= marks[idx] <= len(transcript):
            raise SegmentationError(f"mark offset {marks[idx]} outside transcript")

    rate = w.sample_rate
    n = len(w.samples)
    cuts = sorted((silences[i].mid_s, off) for i, off in marks.items())
    if [off for _, off in cuts] != sorted(off for _, off in cuts):
        raise SegmentationError("mark offsets out of order relative to silence times")

    if not cuts and w.duration_s > max_duration_s:
        raise SegmentationError(
            f"no eligible boundaries and span 0.0..{w.duration_s:.2f}s "
            f"exceeds {max_duration_s}s"
        )

    # Atomic pieces between consecutive cuts; never split inside one.
    edges = [(0, 0)] + [(int(round(t * rate)), off) for t, off in cuts] + [(n, len(transcript))]
    pieces = []
    for (s0, c0), (s1, c1) in zip(edges, edges[1:]):
        text = transcript[c0:c1].strip()
        if not text:
            raise SegmentationError(f"empty transcript slice at chars {c0}..{c1}")
        pieces.append((s0, s1, text))

    groups: list[list[tuple[int, int, str]]] = []
    current: list[tuple[int, int, str]] = []

    def dur(group):
        return (group[-1][1] - group[0][0]) / rate

    for piece in pieces:
        piece_s = (piece[1] - piece[0]) / rate
        if piece_s > max_duration_s:
            if current:
                groups.append(current)
                current = []
            groups.append([piece])
            continue
        if current:
            before = dur(current)
            after = before + piece_s
            if after > max_duration_s:
                groups.append(current)
                current = [piece]
                continue
            if after >= target_mean_s:
                # Close on whichever side of the target is nearer; ties
                # close early to keep segments short.
                if abs(before - target_mean_s) <= abs(after - target_mean_s):
                    groups.append(current)
                    current = [piece]
                else:
                    current.append(piece)
                    groups.append(current)
                    current = []
                continue
        current.append(piece)
        if dur(current) >= target_mean_s:
            groups.append(current)
            current = []
    if current:
        groups.append(current)

    segments = []
    for k, group in enumerate(groups):
        lo, hi = group[0][0], group[-1][1]
        audio = Waveform(w.samples[lo:hi], rate)
        warnings = ()
        if audio.duration_s > max_duration_s:
            warnings = (WARN_OVERSIZED,)
            log.warning("segment %s-%04d runs %.2fs, over the %.1fs cap",
                        id_prefix, k, audio.duration_s, max_duration_s)
        segments.append(AudioSegment(
            audio=audio,
            transcript=" ".join(text for _, _, text in group),
            id=f"{id_prefix}-{k:04d}",
            duration_s=audio.duration_s,
            warnings=warnings,
        ))
    return segments


def reduce_silence(
    w: Waveform,
    silences: list[SilenceSpan],
    max_pause_s: float,
) -> Waveform:
    """Shorten pauses: edges keep max_pause_s/2, internal gaps max_pause_s.

    Samples outside the given spans are copied through untouched.
    """
    if max_pause_s <= 0:
        raise ValueError("max_pause_s must be > 0")
    n = len(w.samples)
    rate = w.sample_rate
    keep: list[tuple[int, int]] = []
    pos = 0
    for span in silences:
        a = min(max(int(round(span.start_s * rate)), 0), n)
        b = min(max(int(round(span.end_s * rate)), a), n)
        if a < pos:
            raise ValueError("silence spans must be sorted and non-overlapping")
        keep.append((pos, a))
        at_edge = a == 0 or b == n
        allow = int(round((max_pause_s / 2 if at_edge else max_pause_s) * rate))
        if b - a <= allow:
            keep.append((a, b))
        elif a == 0:
            keep.append((b - allow, b))  # leading: keep the tail
        elif b == n:
            keep.append((a, a + allow))  # trailing: keep the head
        else:
            half = allow // 2
            keep.append((a, a + half))
            keep.append((b - (allow - half), b))
        pos = b
    keep.append((pos, n))
    parts = [w.samples[s:e] for s, e in keep if e > s]
    if not parts:
        return Waveform(np.zeros(0, dtype=np.int16), rate)
    return Waveform(np.concatenate(parts), rate)


def normalize_loudness(w: Waveform, target_db: float) -> Waveform:
    """Scale linearly so the peak sits at target_db dBFS (clamped to 0)."""
    if target_db > 0:
        raise ValueError("target_db is a dBFS value; it cannot exceed 0")
    peak = np.max(np.abs(w.to_float()))
    if peak == 0.0:
        log.warning("normalize_loudness: all-zero waveform left unchanged")
        return w
    gain = 10.0 ** (target_db / 20.0) / peak
    return Waveform.from_float(w.to_float() * gain, w.sample_rate)
