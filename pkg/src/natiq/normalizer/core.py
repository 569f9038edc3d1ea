"""Expand digits, dates, fractions, and abbreviations into Arabic words.

The output keeps the original layout: only replaced tokens change, all
whitespace and punctuation is copied through verbatim, so text that is
already normal comes back unchanged and the pass is idempotent.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, field
from fractions import Fraction

from .numbers import (
    MAX_DECIMAL_PLACES,
    MAX_INTEGER,
    Case,
    Gender,
    NumberSpelling,
    spell_decimal,
    spell_digits,
    spell_fraction,
    spell_integer,
)
from .tokenizer import (
    AbbreviationLexicon,
    RawText,
    Token,
    TokenKind,
    parse_date,
    to_ascii_digits,
    tokenize,
)

log = logging.getLogger(__name__)

MONTH_NAMES = {
    "gregorian": [
        "يناير", "فبراير", "مارس", "أبريل", "مايو", "يونيو",
        "يوليو", "أغسطس", "سبتمبر", "أكتوبر", "نوفمبر", "ديسمبر",
    ],
    "levant": [
        "كانون الثاني", "شباط", "آذار", "نيسان", "أيار", "حزيران",
        "تموز", "آب", "أيلول", "تشرين الأول", "تشرين الثاني", "كانون الأول",
    ],
}

# Trace flags.
FLAG_UNPARSEABLE = "unparseable"
FLAG_UNKNOWN_ABBREVIATION = "unknown-abbreviation"


def _agreement_flags(config: NormalizeConfig) -> list[str]:
    return [f"gender={config.gender.value}", f"case={config.case.value}"]


class UnexpandableAbbreviation(KeyError):
    """Raised when an abbreviation token has no lexicon entry."""


@dataclass(frozen=True)
class NormalizeConfig:
    gender: Gender = Gender.MASCULINE
    case: Case = Case.ACCUSATIVE_GENITIVE
    month_style: str = "gregorian"

    def __post_init__(self):
        if self.month_style not in MONTH_NAMES:
            raise ValueError(f"unknown month style {self.month_style!r}")


@dataclass(frozen=True)
class TraceEntry:
    """Provenance record: one input token span and the output words it
    produced (a half-open range into NormalizedText.words)."""

    span: tuple[int, int]
    kind: TokenKind
    output_range: tuple[int, int]
    flags: tuple[str, ...] = ()


@dataclass
class NormalizedText:
    """Digit-free expansion of a raw text with provenance back to it."""

    text: str
    words: list[str]
    trace: list[TraceEntry]
    source_id: str = ""
    warnings: list[str] = field(default_factory=list)

    def surface(self) -> str:
        return self.text


def expand_abbreviation(token: Token, lexicon: AbbreviationLexicon) -> list[str]:
    """Expansion words for an abbreviation token; multi-dot patterns
    expand as a unit. Unknown patterns raise UnexpandableAbbreviation."""
    if token.kind is not TokenKind.ABBREVIATION:
        raise ValueError(f"not an abbreviation token: {token.surface!r}")
    expansion = lexicon.expand(token.surface)
    if expansion is None:
        raise UnexpandableAbbreviation(token.surface)
    return list(expansion)


def _expand_number_token(token: Token, config: NormalizeConfig) -> tuple[list[str], list[str]]:
    """Words plus trace flags for an integer/decimal/fraction/date token.

    Values the grammar cannot spell (beyond 10^12, more than 4 fractional
    digits) degrade to digit-by-digit reading instead of passing digits
    through, keeping the output digit-free either way.
    """
    surface = to_ascii_digits(token.surface)
    if token.kind is TokenKind.INTEGER:
        value = int(surface)
        if value > MAX_INTEGER:
            return spell_digits(surface), [FLAG_UNPARSEABLE]
        return spell_integer(value, config.gender, config.case), _agreement_flags(config)
    if token.kind is TokenKind.DECIMAL:
        int_part, frac_part = surface.replace("٫", ".").split(".")
        if len(frac_part) > MAX_DECIMAL_PLACES or int(int_part) > MAX_INTEGER:
            return spell_digits(surface), [FLAG_UNPARSEABLE]
        spelling = NumberSpelling(
            value=Fraction(int(int_part)) + Fraction(int(frac_part), 10 ** len(frac_part)),
            gender=config.gender,
            case=config.case,
            places=len(frac_part),
        )
        return spell_decimal(spelling), _agreement_flags(config)
    if token.kind is TokenKind.FRACTION:
        num, den = (int(part) for part in surface.split("/"))
        if den == 0 or num > MAX_INTEGER or den > MAX_INTEGER:
            return spell_digits(surface), [FLAG_UNPARSEABLE]
        return spell_fraction(num, den, config.case), []
    if token.kind is TokenKind.DATE:
        day, month, year = parse_date(surface)
        # Day counts a masculine noun (day), and years read as masculine
        # cardinals, so both ignore the configured gender.
        words = spell_integer(day, Gender.MASCULINE, config.case)
        words.extend(MONTH_NAMES[config.month_style][month - 1].split(" "))
        words.extend(spell_integer(year, Gender.MASCULINE, config.case))
        return words, []
    raise ValueError(f"not a numeric token kind: {token.kind}")


_REPLACED_KINDS = frozenset({
    TokenKind.INTEGER,
    TokenKind.DECIMAL,
    TokenKind.FRACTION,
    TokenKind.DATE,
    TokenKind.ABBREVIATION,
})
_WORDLIKE_KINDS = _REPLACED_KINDS | {TokenKind.ARABIC_WORD, TokenKind.LATIN}


# Single-letter prefixes that attach to the following word.
_CLITICS = frozenset("وفبلك")


def _wordlike_char(ch: str) -> bool:
    # Combining harakat count: a diacritized word may end in one, and an
    # expansion pasted straight after it would merge the two words.
    return ch.isalpha() or ch.isdigit() or unicodedata.combining(ch) != 0


def normalize(
    raw: RawText | str,
    config: NormalizeConfig = NormalizeConfig(),
    lexicon: AbbreviationLexicon | None = None,
) -> NormalizedText:
    """Normalize raw text into its fully spelled-out form."""
    if isinstance(raw, str):
        raw = RawText(raw)
    if lexicon is None:
        lexicon = AbbreviationLexicon.bundled()
    tokens = tokenize(raw, lexicon)

    chunks: list[str] = []
    words: list[str] = []
    trace: list[TraceEntry] = []
    warnings: list[str] = []

    for index, token in enumerate(tokens):
        flags: list[str] = []
        if token.kind in _REPLACED_KINDS:
            if token.kind is TokenKind.ABBREVIATION:
                try:
                    out_words = expand_abbreviation(token, lexicon)
                except UnexpandableAbbreviation:
                    out_words = [token.surface]
                    flags.append(FLAG_UNKNOWN_ABBREVIATION)
                    warnings.append(f"no expansion for abbreviation {token.surface!r}")
                    log.warning("no expansion for abbreviation %r", token.surface)
            else:
                out_words, flags = _expand_number_token(token, config)
                if FLAG_UNPARSEABLE in flags:
                    warnings.append(f"spelled {token.surface!r} digit by digit")
                    log.warning("spelled %r digit by digit", token.surface)
            replacement = " ".join(out_words)
            # Keep expansions separated from adjacent word material that
            # had no whitespace of its own ("3كتب" reads as two words).
            # A lone clitic letter stays attached: "و3" is "وثلاثة".
            if (
                chunks
                and chunks[-1]
                and _wordlike_char(chunks[-1][-1])
                and chunks[-1] not in _CLITICS
            ):
                replacement = " " + replacement
            if index + 1 < len(tokens) and tokens[index + 1].kind in _WORDLIKE_KINDS:
                replacement = replacement + " "
            chunks.append(replacement)
            start = len(words)
            words.extend(out_words)
            trace.append(TraceEntry(token.span, token.kind, (start, len(words)), tuple(flags)))
        elif token.kind is TokenKind.WHITESPACE:
            chunks.append(token.surface)
            trace.append(TraceEntry(token.span, token.kind, (len(words), len(words))))
        else:
            chunks.append(token.surface)
            start = len(words)
            words.append(token.surface)
            trace.append(TraceEntry(token.span, token.kind, (start, len(words))))

    return NormalizedText(
        text="".join(chunks),
        words=words,
        trace=trace,
        source_id=raw.source_id,
        warnings=warnings,
    )
