"""Spell Arabic cardinal numbers with grammatical agreement.

Classical counting rules: units 3-10 take the gender opposite the counted
noun (polarity), 11-19 are compound forms, tens join units-first with waw,
and the tens suffix inflects for case. Scale words (thousand, million, ...)
impose their own agreement on their multiplier, so only the final group
below 1000 follows the caller's gender.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

MAX_INTEGER = 10**12
MAX_DECIMAL_PLACES = 4


class Gender(enum.Enum):
    """Gender of the counted noun, not of the number word itself."""

    MASCULINE = "masculine"
    FEMININE = "feminine"


class Case(enum.Enum):
    NOMINATIVE = "nominative"
    ACCUSATIVE_GENITIVE = "accusative-genitive"


class NumberRangeError(ValueError):
    """Value outside the supported 0..10^12 range."""


class PrecisionError(ValueError):
    """Fractional part longer than the supported number of places."""


@dataclass(frozen=True)
class NumberSpelling:
    """A number together with the agreement features used to spell it.

    ``places`` preserves trailing zeros of the written form ("5.10" is ten
    parts per hundred, not one part per ten); when omitted it is derived
    from the denominator of ``value``.
    """

    value: Fraction
    gender: Gender = Gender.MASCULINE
    case: Case = Case.ACCUSATIVE_GENITIVE
    definite: bool = False
    places: int | None = None

    def __post_init__(self):
        if self.value < 0:
            raise NumberRangeError("number spellings cover values >= 0")
        if self.places is not None:
            if not 0 <= self.places <= MAX_DECIMAL_PLACES:
                raise PrecisionError(
                    f"fractional part limited to {MAX_DECIMAL_PLACES} places"
                )
            frac = self.value - int(self.value)
            if (frac * 10**self.places).denominator != 1:
                raise PrecisionError(
                    f"value {self.value} does not fit in {self.places} places"
                )


# Unit forms indexed 0..10. The list name says which counted-noun gender
# selects it; 3..10 carry the opposite-gender marking (polarity).
_UNITS = {
    (Gender.MASCULINE, Case.NOMINATIVE): [
        "صفر", "واحد", "اثنان", "ثلاثة", "أربعة", "خمسة",
        "ستة", "سبعة", "ثمانية", "تسعة", "عشرة",
    ],
    (Gender.MASCULINE, Case.ACCUSATIVE_GENITIVE): [
        "صفر", "واحد", "اثنين", "ثلاثة", "أربعة", "خمسة",
        "ستة", "سبعة", "ثمانية", "تسعة", "عشرة",
    ],
    (Gender.FEMININE, Case.NOMINATIVE): [
        "صفر", "واحدة", "اثنتان", "ثلاث", "أربع", "خمس",
        "ست", "سبع", "ثمان", "تسع", "عشر",
    ],
    (Gender.FEMININE, Case.ACCUSATIVE_GENITIVE): [
        "صفر", "واحدة", "اثنتين", "ثلاث", "أربع", "خمس",
        "ست", "سبع", "ثمان", "تسع", "عشر",
    ],
}

# 11..19. Only 12 declines; 11 and 13..19 are fixed compounds.
_TEENS = {
    (Gender.MASCULINE, Case.NOMINATIVE): [
        "أحد عشر", "اثنا عشر", "ثلاثة عشر", "أربعة عشر", "خمسة عشر",
        "ستة عشر", "سبعة عشر", "ثمانية عشر", "تسعة عشر",
    ],
    (Gender.MASCULINE, Case.ACCUSATIVE_GENITIVE): [
        "أحد عشر", "اثني عشر", "ثلاثة عشر", "أربعة عشر", "خمسة عشر",
        "ستة عشر", "سبعة عشر", "ثمانية عشر", "تسعة عشر",
    ],
    (Gender.FEMININE, Case.NOMINATIVE): [
        "إحدى عشرة", "اثنتا عشرة", "ثلاث عشرة", "أربع عشرة", "خمس عشرة",
        "ست عشرة", "سبع عشرة", "ثماني عشرة", "تسع عشرة",
    ],
    (Gender.FEMININE, Case.ACCUSATIVE_GENITIVE): [
        "إحدى عشرة", "اثنتي عشرة", "ثلاث عشرة", "أربع عشرة", "خمس عشرة",
        "ست عشرة", "سبع عشرة", "ثماني عشرة", "تسع عشرة",
    ],
}

_TENS = {
    Case.NOMINATIVE: {
        20: "عشرون", 30: "ثلاثون", 40: "أربعون", 50: "خمسون",
        60: "ستون", 70: "سبعون", 80: "ثمانون", 90: "تسعون",
    },
    Case.ACCUSATIVE_GENITIVE: {
        20: "عشرين", 30: "ثلاثين", 40: "أربعين", 50: "خمسين",
        60: "ستين", 70: "سبعين", 80: "ثمانين", 90: "تسعين",
    },
}

_HUNDRED = "مئة"
# Dual hundred: standalone vs construct (before a scale word the nun drops).
_TWO_HUNDRED = {Case.NOMINATIVE: "مئتان", Case.ACCUSATIVE_GENITIVE: "مئتين"}
_TWO_HUNDRED_CONSTRUCT = {Case.NOMINATIVE: "مئتا", Case.ACCUSATIVE_GENITIVE: "مئتي"}
_HUNDREDS = {
    300: "ثلاثمئة", 400: "أربعمئة", 500: "خمسمئة", 600: "ستمئة",
    700: "سبعمئة", 800: "ثمانمئة", 900: "تسعمئة",
}

# Scale words: (singular, dual by case, 3-10 plural, 11-99 singular accusative).
_SCALES = [
    ("ألف", {Case.NOMINATIVE: "ألفان", Case.ACCUSATIVE_GENITIVE: "ألفين"}, "آلاف", "ألفا"),
    ("مليون", {Case.NOMINATIVE: "مليونان", Case.ACCUSATIVE_GENITIVE: "مليونين"}, "ملايين", "مليونا"),
    ("مليار", {Case.NOMINATIVE: "ملياران", Case.ACCUSATIVE_GENITIVE: "مليارين"}, "مليارات", "مليارا"),
    ("تريليون", {Case.NOMINATIVE: "تريليونان", Case.ACCUSATIVE_GENITIVE: "تريليونين"}, "تريليونات", "تريليونا"),
]

# Denominator words for decimal expansion, keyed by fractional digit count.
_DECIMAL_DENOMINATORS = {1: "العشرة", 2: "المئة", 3: "الألف", 4: "عشرة الآلاف"}

# Classical fraction nouns for denominators 2..10: singular, plural.
# The dual declines regularly (singular + ان/ين), so it is derived.
_FRACTION_NOUNS = {
    2: ("نصف", "أنصاف"),
    3: ("ثلث", "أثلاث"),
    4: ("ربع", "أرباع"),
    5: ("خمس", "أخماس"),
    6: ("سدس", "أسداس"),
    7: ("سبع", "أسباع"),
    8: ("ثمن", "أثمان"),
    9: ("تسع", "أتساع"),
    10: ("عشر", "أعشار"),
}
_DUAL_SUFFIX = {Case.NOMINATIVE: "ان", Case.ACCUSATIVE_GENITIVE: "ين"}

_DIGIT_NAMES = ["صفر", "واحد", "اثنان", "ثلاثة", "أربعة", "خمسة", "ستة", "سبعة", "ثمانية", "تسعة"]
_DECIMAL_POINT_WORD = "فاصلة"


def _join(parts: list[list[str]]) -> list[str]:
    """Join word groups with a waw prefixed to each following group."""
    out: list[str] = []
    for part in parts:
        if not part:
            continue
        if out:
            out.append("و" + part[0])
            out.extend(part[1:])
        else:
            out.extend(part)
    return out


def _spell_0_99(n: int, gender: Gender, case: Case) -> list[str]:
    if n <= 10:
        return [_UNITS[(gender, case)][n]]
    if n <= 19:
        return _TEENS[(gender, case)][n - 11].split(" ")
    tens, unit = n - n % 10, n % 10
    if unit == 0:
        return [_TENS[case][tens]]
    return [_UNITS[(gender, case)][unit], "و" + _TENS[case][tens]]


def _spell_hundreds_word(h: int, case: Case, construct: bool) -> str:
    if h == 100:
        return _HUNDRED
    if h == 200:
        return (_TWO_HUNDRED_CONSTRUCT if construct else _TWO_HUNDRED)[case]
    return _HUNDREDS[h]


def _spell_below_1000(n: int, gender: Gender, case: Case) -> list[str]:
    """Final group of a number, agreeing with the caller's counted noun."""
    hundreds, rest = n - n % 100, n % 100
    parts = []
    if hundreds:
        parts.append([_spell_hundreds_word(hundreds, case, construct=False)])
    if rest:
        parts.append(_spell_0_99(rest, gender, case))
    return _join(parts)


def _spell_scale_group(m: int, scale: int, case: Case) -> list[str]:
    """Spell m x 1000^scale. The multiplier agrees with the scale word
    (all scale words are masculine), and the scale word's own form follows
    the last conjunct of the multiplier: singular after 1 and hundreds,
    dual for 2, plural after 3-10, singular accusative after 11-99."""
    singular, dual, plural, acc_singular = _SCALES[scale - 1]
    if m == 1:
        return [singular]
    if m == 2:
        return [dual[case]]
    rest = m % 100
    if m >= 100 and rest == 0:
        return [_spell_hundreds_word(m, case, construct=True), singular]
    if m > 100 and rest in (1, 2):
        # A bare final 1 or 2 is carried by the scale word itself:
        # "one hundred thousand and two thousand" rather than a dangling
        # unit word before the scale.
        return _join([
            _spell_scale_group(m - rest, scale, case),
            _spell_scale_group(rest, scale, case),
        ])
    words = _spell_below_1000(m, Gender.MASCULINE, case)
    counted = plural if rest and rest <= 10 else acc_singular
    return words + [counted]


def spell_integer(
    n: int,
    gender: Gender = Gender.MASCULINE,
    case: Case = Case.ACCUSATIVE_GENITIVE,
    definite: bool = False,
) -> list[str]:
    """Spell a non-negative integer up to 10^12 as a word sequence."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"expected an integer, got {type(n).__name__}")
    if not 0 <= n <= MAX_INTEGER:
        raise NumberRangeError(f"integer spelling covers 0..{MAX_INTEGER}, got {n}")
    if n == 0:
        words = ["صفر"]
    else:
        parts = []
        remainder = n
        for scale in range(len(_SCALES), 0, -1):
            unit_value = 1000**scale
            m, remainder = divmod(remainder, unit_value)
            if m:
                parts.append(_spell_scale_group(m, scale, case))
        if remainder:
            parts.append(_spell_below_1000(remainder, gender, case))
        words = _join(parts)
    if definite:
        words = ["ال" + words[0]] + words[1:]
    return words


def spell_decimal(spelling: NumberSpelling) -> list[str]:
    """Spell a decimal as integer words, then the fractional numerator as
    parts per the power-of-ten denominator ("... جزء من المئة")."""
    integer_part = int(spelling.value)
    frac = spelling.value - integer_part
    places = spelling.places
    if places is None:
        places = 0
        scaled = frac
        while scaled.denominator != 1:
            scaled = frac * 10 ** (places + 1)
            places += 1
            if places > MAX_DECIMAL_PLACES:
                raise PrecisionError(
                    f"fractional part of {spelling.value} needs more than "
                    f"{MAX_DECIMAL_PLACES} places"
                )
    numerator = int(frac * 10**places)
    int_words = spell_integer(integer_part, spelling.gender, spelling.case, spelling.definite)
    if numerator == 0:
        return int_words
    # The numerator counts masculine parts, so its agreement is fixed.
    num_words = spell_integer(numerator, Gender.MASCULINE, spelling.case)
    return _join([int_words, num_words]) + ["جزء", "من", _DECIMAL_DENOMINATORS[places]]


def spell_fraction(
    numerator: int,
    denominator: int,
    case: Case = Case.ACCUSATIVE_GENITIVE,
) -> list[str]:
    """Spell a simple fraction. Denominators 2..10 use the classical
    fraction nouns; anything else falls back to the parts-of pattern."""
    if denominator <= 0 or numerator < 0:
        raise NumberRangeError("fractions need numerator >= 0 and denominator > 0")
    noun = _FRACTION_NOUNS.get(denominator)
    if noun is not None and 1 <= numerator <= 10:
        single, plural = noun
        if numerator == 1:
            return [single]
        if numerator == 2:
            return [single + _DUAL_SUFFIX[case]]
        # Fraction nouns are masculine, so 3..10 take the marked form.
        return spell_integer(numerator, Gender.MASCULINE, case) + [plural]
    num_words = spell_integer(numerator, Gender.MASCULINE, case)
    den_words = spell_integer(denominator, Gender.MASCULINE, Case.ACCUSATIVE_GENITIVE)
    return num_words + ["جزء", "من"] + den_words


def spell_digits(digits: str) -> list[str]:
    """Read a digit string out digit by digit, naming the decimal point.

    Fallback for numeric material outside the grammar's range; keeps the
    output digit-free without rejecting the input.
    """
    words = []
    for ch in digits:
        if ch in ".٫":
            words.append(_DECIMAL_POINT_WORD)
        elif ch == "/":
            words.append("على")
        elif ch.isdigit():
            words.append(_DIGIT_NAMES[int(ch)])
    return words
