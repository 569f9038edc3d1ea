"""Listening-test management: build a rating pool, deal samples to
raters, collect 1-5 scores, and average them per (model, voice) cell.

The flow mirrors how such studies actually run: synthesize every
sentence under every backend and voice, hand each rater a random
without-replacement subset, and only ever report means for cells that
received ratings. Missing cells stay missing; zero would be a score.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

log = logging.getLogger(__name__)

MOS_SCALE = {5: "excellent", 4: "good", 3: "fair", 2: "poor", 1: "bad"}


@dataclass(frozen=True)
class PoolEntry:
    id: str
    sentence_id: str
    text: str
    model: str
    voice: str
    audio_ref: str


@dataclass(frozen=True)
class Rating:
    rater: str
    entry_id: str
    score: int

    def __post_init__(self):
        if self.score not in MOS_SCALE:
            raise ValueError(f"score must be 1..5, got {self.score}")


@dataclass
class MosStudy:
    pool: list[PoolEntry] = field(default_factory=list)
    assignments: dict[str, list[str]] = field(default_factory=dict)
    ratings: list[Rating] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def entry(self, entry_id: str) -> PoolEntry:
        for e in self.pool:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)

    def to_dict(self) -> dict:
        return {
            "pool": [asdict(e) for e in self.pool],
            "assignments": self.assignments,
            "ratings": [asdict(r) for r in self.ratings],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MosStudy":
        return cls(
            pool=[PoolEntry(**e) for e in data.get("pool", [])],
            assignments={k: list(v) for k, v in data.get("assignments", {}).items()},
            ratings=[Rating(**r) for r in data.get("ratings", [])],
            metadata=dict(data.get("metadata", {})),
        )


def build_pool(
    sentences: Iterable[str],
    models: Iterable[str],
    voices: Iterable[str],
    synth_fn: Callable[[str, str, str], str],
) -> MosStudy:
    """One pool entry per (sentence, model, voice) that synthesizes.

    synth_fn(text, model, voice) returns an audio reference; a raising
    combination is logged and skipped, never fatal. Iteration order is
    fixed (sentences outermost), so two builds over the same inputs
    produce the same pool.
    """
    sentences = list(sentences)
    models = list(models)
    voices = list(voices)
    pool: list[PoolEntry] = []
    skipped = 0
    for s_idx, text in enumerate(sentences):
        sentence_id = f"s{s_idx:04d}"
        for model in models:
            for voice in voices:
                try:
                    audio_ref = synth_fn(text, model, voice)
                except Exception as exc:
                    skipped += 1
                    log.warning("pool skip %s/%s/%s: %s", sentence_id, model, voice, exc)
                    continue
                pool.append(PoolEntry(
                    id=f"{model}.{voice}.{sentence_id}",
                    sentence_id=sentence_id,
                    text=text,
                    model=model,
                    voice=voice,
                    audio_ref=audio_ref,
                ))
    study = MosStudy(pool=pool)
    study.metadata.update({
        "sentences": len(sentences),
        "models": models,
        "voices": voices,
        "skipped": skipped,
    })
    return study


def assign_raters(
    study: MosStudy,
    raters: int | Iterable[str],
    n_per_rater: int = 15,
    seed: int = 0,
) -> dict[str, list[str]]:
    """Deal each rater n_per_rater pool entries without replacement.

    Different raters may overlap; one rater never sees a sample twice.
    The same seed deals the same hands.
    """
    if not study.pool:
        raise ValueError("pool is empty; build it first")
    if isinstance(raters, int):
        raters = [f"r{i + 1:02d}" for i in range(raters)]
    raters = list(raters)
    if n_per_rater > len(study.pool):
        raise ValueError(
            f"cannot deal {n_per_rater} samples from a pool of {len(study.pool)}"
        )
    rng = random.Random(seed)
    ids = [e.id for e in study.pool]
    assignments = {r: rng.sample(ids, n_per_rater) for r in raters}
    study.assignments = assignments
    study.metadata["assignment_seed"] = seed
    return assignments


def record_rating(study: MosStudy, rater: str, entry_id: str, score: int) -> Rating:
    """Store one score; re-rating the same sample replaces the old score."""
    if rater not in study.assignments:
        raise ValueError(f"unknown rater {rater!r}")
    if entry_id not in study.assignments[rater]:
        raise ValueError(f"{entry_id} was not assigned to {rater}")
    rating = Rating(rater=rater, entry_id=entry_id, score=score)
    study.ratings = [
        r for r in study.ratings if not (r.rater == rater and r.entry_id == entry_id)
    ]
    study.ratings.append(rating)
    return rating


@dataclass(frozen=True)
class MosCell:
    mean: float
    count: int


def aggregate_mos(study: MosStudy) -> dict[tuple[str, str], MosCell]:
    """Arithmetic mean per (model, voice); unrated cells stay absent."""
    sums: dict[tuple[str, str], list[int]] = {}
    for rating in study.ratings:
        e = study.entry(rating.entry_id)
        sums.setdefault((e.model, e.voice), []).append(rating.score)
    return {
        cell: MosCell(mean=sum(scores) / len(scores), count=len(scores))
        for cell, scores in sorted(sums.items())
    }


def save_study(path: str | Path, study: MosStudy) -> None:
    Path(path).write_text(
        json.dumps(study.to_dict(), ensure_ascii=False, indent=1), encoding="utf-8"
    )


def load_study(path: str | Path) -> MosStudy:
    return MosStudy.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
