from .core import (
    FLAG_UNKNOWN_ABBREVIATION,
    FLAG_UNPARSEABLE,
    MONTH_NAMES,
    NormalizeConfig,
    NormalizedText,
    TraceEntry,
    UnexpandableAbbreviation,
    expand_abbreviation,
    normalize,
)
from .numbers import (
    MAX_DECIMAL_PLACES,
    MAX_INTEGER,
    Case,
    Gender,
    NumberRangeError,
    NumberSpelling,
    PrecisionError,
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

__all__ = [
    "AbbreviationLexicon",
    "Case",
    "FLAG_UNKNOWN_ABBREVIATION",
    "FLAG_UNPARSEABLE",
    "Gender",
    "MAX_DECIMAL_PLACES",
    "MAX_INTEGER",
    "MONTH_NAMES",
    "NormalizeConfig",
    "NormalizedText",
    "NumberRangeError",
    "NumberSpelling",
    "PrecisionError",
    "RawText",
    "Token",
    "TokenKind",
    "TraceEntry",
    "UnexpandableAbbreviation",
    "expand_abbreviation",
    "normalize",
    "parse_date",
    "spell_decimal",
    "spell_digits",
    "spell_fraction",
    "spell_integer",
    "to_ascii_digits",
    "tokenize",
]
