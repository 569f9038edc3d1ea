"""Corpus manifest: one `id|raw|diacritized` line per segment.

Pipes inside fields are backslash-escaped so the format stays grep- and
cut-friendly for the common case while surviving adversarial text.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class ManifestError(ValueError):
    pass


_FIELD_SEP = "|"


def _escape(field: str) -> str:
    return field.replace("\\", "\\\\").replace("|", "\\|")


def _split_unescaped(line: str) -> list[str]:
    """Split on separator pipes, unescaping as we go. A lookbehind regex
    cannot do this: a field ending in an escaped backslash would shadow
    the separator after it."""
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line) and line[i + 1] in "\\|":
            buf.append(line[i + 1])
            i += 2
        elif ch == _FIELD_SEP:
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(ch)
            i += 1
    parts.append("".join(buf))
    return parts


@dataclass(frozen=True)
class ManifestRow:
    id: str
    raw_transcript: str
    diacritized_transcript: str

    def __post_init__(self):
        if not self.id.strip():
            raise ManifestError("manifest row needs a non-empty id")
        if any(ch in self.id for ch in "|\n"):
            raise ManifestError(f"id {self.id!r} may not contain pipes or newlines")
        for name in ("raw_transcript", "diacritized_transcript"):
            if "\n" in getattr(self, name):
                raise ManifestError(f"{name} may not span lines")

    def to_line(self) -> str:
        return _FIELD_SEP.join(
            (self.id, _escape(self.raw_transcript), _escape(self.diacritized_transcript))
        )

    @classmethod
    def from_line(cls, line: str, lineno: int = 0) -> "ManifestRow":
        parts = _split_unescaped(line.rstrip("\n"))
        if len(parts) != 3:
            raise ManifestError(
                f"line {lineno}: expected 3 pipe-separated fields, got {len(parts)}"
            )
        return cls(*parts)


def write_manifest(path: str | Path, rows: Iterable[ManifestRow]) -> None:
    rows = list(rows)
    seen: set[str] = set()
    for row in rows:
        if row.id in seen:
            raise ManifestError(f"duplicate segment id {row.id!r}")
        seen.add(row.id)
    Path(path).write_text(
        "".join(row.to_line() + "\n" for row in rows), encoding="utf-8"
    )


def read_manifest(path: str | Path) -> list[ManifestRow]:
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    text = Path(path).read_text(encoding="utf-8-sig")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row = ManifestRow.from_line(line, lineno)
        if row.id in seen:
            raise ManifestError(f"line {lineno}: duplicate segment id {row.id!r}")
        seen.add(row.id)
        rows.append(row)
    return rows
