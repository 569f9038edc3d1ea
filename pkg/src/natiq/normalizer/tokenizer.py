"""Tokenize raw Arabic text into typed spans.

The tokenizer never drops characters: token spans are non-overlapping,
cover the input exactly, and concatenating surfaces reconstructs it.
Arabic-Indic digits are classified exactly like ASCII digits.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

ARABIC_INDIC_DIGITS = "٠١٢٣٤٥٦٧٨٩"
_DIGIT_TRANSLATION = str.maketrans(ARABIC_INDIC_DIGITS, "0123456789")

_DIGIT = r"[0-9٠-٩]"
# Arabic letters plus combining marks and tatweel, so diacritized words
# tokenize as single units.
_ARABIC_WORD_RE = re.compile(r"[ء-ٰٟٱ]+")
_LATIN_RE = re.compile(r"[A-Za-z]+")
_WHITESPACE_RE = re.compile(r"\s+")
_DATE_RE = re.compile(rf"({_DIGIT}{{1,2}})(/|-)({_DIGIT}{{1,2}})\2({_DIGIT}{{4}})(?!{_DIGIT})")
_FRACTION_RE = re.compile(rf"({_DIGIT}+)/({_DIGIT}+)")
_DECIMAL_RE = re.compile(rf"({_DIGIT}+)[.٫]({_DIGIT}+)")
_INTEGER_RE = re.compile(rf"{_DIGIT}+")


class TokenKind(enum.Enum):
    ARABIC_WORD = "arabic-word"
    INTEGER = "integer"
    DECIMAL = "decimal"
    FRACTION = "fraction"
    DATE = "date"
    ABBREVIATION = "abbreviation"
    LATIN = "latin"
    PUNCTUATION = "punctuation"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class RawText:
    content: str
    source_id: str = ""


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind
    span: tuple[int, int]


def to_ascii_digits(text: str) -> str:
    return text.translate(_DIGIT_TRANSLATION)


class LexiconError(ValueError):
    """Malformed abbreviation lexicon resource."""


@dataclass
class AbbreviationLexicon:
    """Dotted abbreviation patterns mapped to their expansion words.

    Loaded from a UTF-8 tab-separated file: one ``pattern<TAB>expansion``
    per line, ``#`` comments allowed. Expansions must be digit-free.
    """

    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for pattern, expansion in self.entries.items():
            for word in expansion:
                if _INTEGER_RE.search(word):
                    raise LexiconError(
                        f"expansion for {pattern!r} contains digits: {word!r}"
                    )

    @classmethod
    def from_text(cls, text: str) -> "AbbreviationLexicon":
        entries: dict[str, tuple[str, ...]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise LexiconError(f"line {lineno}: expected pattern<TAB>expansion")
            pattern, expansion = line.split("\t", 1)
            pattern = pattern.strip()
            if pattern in entries:
                raise LexiconError(f"line {lineno}: duplicate pattern {pattern!r}")
            entries[pattern] = tuple(expansion.split())
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "AbbreviationLexicon":
        return cls.from_text(Path(path).read_text(encoding="utf-8-sig"))

    @classmethod
    @lru_cache(maxsize=1)
    def bundled(cls) -> "AbbreviationLexicon":
        """The lexicon resource shipped with the package."""
        text = (
            resources.files("natiq.normalizer")
            .joinpath("data/abbreviations.tsv")
            .read_text(encoding="utf-8")
        )
        return cls.from_text(text)

    def patterns_longest_first(self) -> list[str]:
        return sorted(self.entries, key=len, reverse=True)

    def expand(self, surface: str) -> tuple[str, ...] | None:
        return self.entries.get(surface)


def _at_boundary(text: str, pos: int) -> bool:
    """True when an abbreviation may start at pos. Only letters and
    combining marks block: they survive normalization in place, while
    digits are replaced by words plus a separating space, so treating
    digits as blockers would make normalization non-idempotent."""
    if pos == 0:
        return True
    prev = text[pos - 1]
    return not (prev.isalpha() or unicodedata.combining(prev))


def tokenize(raw: RawText | str, lexicon: AbbreviationLexicon | None = None) -> list[Token]:
    """Split text into tokens; abbreviation patterns are matched longest
    first and only at word boundaries, so a sentence-final dot after an
    ordinary word never turns it into an abbreviation. With no lexicon
    given, the bundled one applies."""
    text = raw.content if isinstance(raw, RawText) else raw
    if lexicon is None:
        lexicon = AbbreviationLexicon.bundled()
    patterns = lexicon.patterns_longest_first()
    tokens: list[Token] = []
    pos = 0
    n = len(text)

    def emit(end: int, kind: TokenKind):
        nonlocal pos
        tokens.append(Token(text[pos:end], kind, (pos, end)))
        pos = end

    while pos < n:
        ws = _WHITESPACE_RE.match(text, pos)
        if ws:
            emit(ws.end(), TokenKind.WHITESPACE)
            continue
        if _at_boundary(text, pos):
            matched = False
            for pattern in patterns:
                if text.startswith(pattern, pos):
                    emit(pos + len(pattern), TokenKind.ABBREVIATION)
                    matched = True
                    break
            if matched:
                continue
        m = _DATE_RE.match(text, pos)
        if m and _valid_date(m):
            emit(m.end(), TokenKind.DATE)
            continue
        m = _FRACTION_RE.match(text, pos)
        if m:
            emit(m.end(), TokenKind.FRACTION)
            continue
        m = _DECIMAL_RE.match(text, pos)
        if m:
            emit(m.end(), TokenKind.DECIMAL)
            continue
        m = _INTEGER_RE.match(text, pos)
        if m:
            emit(m.end(), TokenKind.INTEGER)
            continue
        m = _ARABIC_WORD_RE.match(text, pos)
        if m:
            emit(m.end(), TokenKind.ARABIC_WORD)
            continue
        m = _LATIN_RE.match(text, pos)
        if m:
            emit(m.end(), TokenKind.LATIN)
            continue
        emit(pos + 1, TokenKind.PUNCTUATION)
    return tokens


def _valid_date(m: re.Match) -> bool:
    day = int(to_ascii_digits(m.group(1)))
    month = int(to_ascii_digits(m.group(3)))
    return 1 <= day <= 31 and 1 <= month <= 12


def parse_date(surface: str) -> tuple[int, int, int]:
    """Day, month, year of a DATE token surface."""
    m = _DATE_RE.match(surface)
    if not m or not _valid_date(m):
        raise ValueError(f"not a date surface: {surface!r}")
    return (
        int(to_ascii_digits(m.group(1))),
        int(to_ascii_digits(m.group(3))),
        int(to_ascii_digits(m.group(4))),
    )
