"""Text cleaning, per-token script profiling, and code-mixing typology.

Cleaning applies three rules in order: URLs become the literal token
``URL``, emoji become their mapped lowercase names, and remaining
special characters are dropped before whitespace is collapsed. The
typology assigns one of six structural mixing types; it is a documented
heuristic driven by Unicode script ranges and an English wordlist, with
the English-fraction thresholds exposed as configuration.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .features import split_sentences

KANNADA_RANGE = (0x0C80, 0x0CFF)

# Latin letters per the profile contract: Basic Latin + Latin-1.
_LATIN_RANGES = ((0x41, 0x5A), (0x61, 0x7A), (0xC0, 0xD6), (0xD8, 0xF6), (0xF8, 0xFF))

_EMOJI_RANGES = (
    (0x1F000, 0x1F02F),
    (0x1F0A0, 0x1F0FF),
    (0x1F1E6, 0x1F1FF),
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F700, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0x1F900, 0x1F9FF),
)

# FE0F (presentation selector) and ZWJ glue emoji sequences together.
_EMOJI_JOINERS = {0xFE0F, 0x200D}

# Default thresholds on the English fraction of Latin alphabetic tokens.
# A Latin-only text below the low mark is romanized Kannada (Type 3);
# between the marks the two languages interleave (Type 5). The low mark
# sits at 0.10 so that a nine-token romanized sentence carrying a single
# unambiguous English word still counts as interleaved.
ENGLISH_FRACTION_LOW = 0.10
ENGLISH_FRACTION_HIGH = 0.90

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")

# Kept by cleaning rule 3 in addition to letters, marks, digits, whitespace.
_SENTENCE_PUNCT = {".", "!", "?", ",", "।"}


class ScriptTag(enum.Enum):
    KANNADA = "Kannada"
    LATIN = "Latin"
    DIGIT = "Digit"
    EMOJI = "Emoji"
    OTHER = "Other"


class MixType(enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    TYPE4 = "Type4"
    TYPE5 = "Type5"
    TYPE6 = "Type6"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class CodeMixProfile:
    token_tags: list[tuple[str, ScriptTag, Optional[bool]]]
    sentence_scripts: list[ScriptTag]
    mix_type: MixType


def _in_ranges(cp: int, ranges) -> bool:
    return any(lo <= cp <= hi for lo, hi in ranges)


def is_emoji_char(ch: str) -> bool:
    return _in_ranges(ord(ch), _EMOJI_RANGES)


def char_script(ch: str) -> ScriptTag:
    cp = ord(ch)
    if KANNADA_RANGE[0] <= cp <= KANNADA_RANGE[1]:
        return ScriptTag.KANNADA
    if _in_ranges(cp, _LATIN_RANGES):
        return ScriptTag.LATIN
    if ch.isdigit():
        return ScriptTag.DIGIT
    if is_emoji_char(ch):
        return ScriptTag.EMOJI
    return ScriptTag.OTHER


def token_script(token: str) -> ScriptTag:
    """Majority character class of a token; ties resolve to Other."""
    counts: dict[ScriptTag, int] = {}
    for ch in token:
        if ord(ch) in _EMOJI_JOINERS:
            continue
        tag = char_script(ch)
        counts[tag] = counts.get(tag, 0) + 1
    if not counts:
        return ScriptTag.OTHER
    best = max(counts.values())
    winners = [tag for tag, c in counts.items() if c == best]
    return winners[0] if len(winners) == 1 else ScriptTag.OTHER


def script_profile(text: str) -> list[tuple[str, ScriptTag]]:
    """One (token, script) pair per whitespace token of the raw text."""
    return [(tok, token_script(tok)) for tok in text.split()]


def _load_emoji_table(path: str | Path | None = None) -> dict[str, str]:
    if path is None:
        source = resources.files("kanhope.data").joinpath("emoji_names.tsv").read_text("utf-8")
    else:
        source = Path(path).read_text(encoding="utf-8")
    table: dict[str, str] = {}
    for line in source.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        codes, _, name = line.partition("\t")
        seq = "".join(chr(int(c, 16)) for c in codes.split("-"))
        table[seq] = name.strip()
    return table


def _load_lexicon(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        source = resources.files("kanhope.data").joinpath("english_words.txt").read_text("utf-8")
    else:
        source = Path(path).read_text(encoding="utf-8")
    return frozenset(
        line.strip() for line in source.splitlines() if line.strip() and not line.startswith("#")
    )


_DEFAULT_EMOJI: dict[str, str] | None = None
_DEFAULT_LEXICON: frozenset[str] | None = None


def default_emoji_table() -> dict[str, str]:
    global _DEFAULT_EMOJI
    if _DEFAULT_EMOJI is None:
        _DEFAULT_EMOJI = _load_emoji_table()
    return _DEFAULT_EMOJI


def default_lexicon() -> frozenset[str]:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = _load_lexicon()
    return _DEFAULT_LEXICON


def load_emoji_table(path: str | Path) -> dict[str, str]:
    return _load_emoji_table(path)


def load_lexicon(path: str | Path) -> frozenset[str]:
    return _load_lexicon(path)


def _emoji_name(ch: str, table: dict[str, str]) -> str | None:
    if ch in table:
        return table[ch]
    try:
        name = unicodedata.name(ch).lower()
    except ValueError:
        return None
    return re.sub(r"[^a-z ]+", " ", name).strip()


def _replace_emoji(text: str, table: dict[str, str]) -> str:
    max_seq = max((len(k) for k in table), default=1)
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        matched = None
        if is_emoji_char(text[i]) or text[i] in table:
            for length in range(min(max_seq, n - i), 0, -1):
                if text[i : i + length] in table:
                    matched = (length, table[text[i : i + length]])
                    break
        if matched:
            out.append(f" {matched[1]} ")
            i += matched[0]
            continue
        ch = text[i]
        if is_emoji_char(ch):
            name = _emoji_name(ch, table)
            out.append(f" {name} " if name else " ")
        elif ord(ch) in _EMOJI_JOINERS:
            out.append(" ")
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def clean(text: str, emoji_map: dict[str, str] | None = None) -> str:
    """Apply the three cleaning rules; total and idempotent."""
    table = emoji_map if emoji_map is not None else default_emoji_table()
    text = _URL_RE.sub("URL", text)
    text = _replace_emoji(text, table)
    kept: list[str] = []
    for ch in text:
        if ch.isspace() or ch in _SENTENCE_PUNCT:
            kept.append(ch)
            continue
        cat = unicodedata.category(ch)
        if cat[0] in ("L", "M") or cat == "Nd":
            kept.append(ch)
    return " ".join("".join(kept).split())


def _is_alpha_token(tag: ScriptTag) -> bool:
    return tag in (ScriptTag.KANNADA, ScriptTag.LATIN)


def _latin_letters(token: str) -> str:
    return "".join(ch for ch in token.lower() if _in_ranges(ord(ch), _LATIN_RANGES))


def _has_internal_script_mix(token: str) -> bool:
    has_kn = any(KANNADA_RANGE[0] <= ord(ch) <= KANNADA_RANGE[1] for ch in token)
    has_lat = any(_in_ranges(ord(ch), _LATIN_RANGES) for ch in token)
    return has_kn and has_lat


def _dominant_script(tags: list[ScriptTag]) -> ScriptTag:
    alpha = [t for t in tags if _is_alpha_token(t)] or tags
    if not alpha:
        return ScriptTag.OTHER
    counts: dict[ScriptTag, int] = {}
    for t in alpha:
        counts[t] = counts.get(t, 0) + 1
    best = max(counts.values())
    winners = sorted((t for t, c in counts.items() if c == best), key=lambda t: t.value)
    return winners[0]


def _english_fraction(tokens: list[tuple[str, ScriptTag, Optional[bool]]]) -> float | None:
    alpha = [t for t in tokens if _is_alpha_token(t[1])]
    if not alpha:
        return None
    hits = sum(1 for t in alpha if t[2] is True)
    return hits / len(alpha)


def codemix_type(
    text: str,
    english_lexicon: frozenset[str] | None = None,
    english_low: float = ENGLISH_FRACTION_LOW,
    english_high: float = ENGLISH_FRACTION_HIGH,
) -> CodeMixProfile:
    """Profile the structural code-mixing type of one text.

    Latin tokens are guessed English when their letters appear in the
    lexicon, romanized Kannada otherwise. The cascade:

    * any single token mixing both scripts -> Type4
    * Kannada script only -> Type1
    * Latin only: english fraction < low -> Type3, > high -> Type1,
      otherwise the languages interleave -> Type5
    * both scripts, single sentence -> Type4
    * both scripts, several sentences -> Type6 when some Latin-only
      sentence also interleaves languages, otherwise Type2
    """
    lexicon = english_lexicon if english_lexicon is not None else default_lexicon()

    token_tags: list[tuple[str, ScriptTag, Optional[bool]]] = []
    for tok in text.split():
        tag = token_script(tok)
        is_english: Optional[bool] = None
        if tag == ScriptTag.LATIN:
            is_english = _latin_letters(tok) in lexicon
        token_tags.append((tok, tag, is_english))

    sentences = split_sentences(text)
    sentence_profiles = []
    for sent in sentences:
        tags = [(tok, token_script(tok)) for tok in sent.split()]
        sentence_profiles.append(tags)
    sentence_scripts = [_dominant_script([t for _, t in prof]) for prof in sentence_profiles]

    mix = _classify(text, token_tags, sentence_profiles, lexicon, english_low, english_high)
    return CodeMixProfile(token_tags, sentence_scripts, mix)


def _classify(text, token_tags, sentence_profiles, lexicon, low, high) -> MixType:
    alpha = [t for t in token_tags if _is_alpha_token(t[1])]
    if not alpha:
        return MixType.UNKNOWN

    if any(_has_internal_script_mix(tok) for tok, _, _ in token_tags):
        return MixType.TYPE4

    scripts = {t[1] for t in alpha}
    if scripts == {ScriptTag.KANNADA}:
        return MixType.TYPE1

    if scripts == {ScriptTag.LATIN}:
        frac = _english_fraction(token_tags)
        if frac < low:
            return MixType.TYPE3
        if frac > high:
            return MixType.TYPE1
        return MixType.TYPE5

    # both scripts present
    any_english = any(t[2] is True for t in token_tags)
    if len(sentence_profiles) >= 2 and any_english:
        for prof in sentence_profiles:
            tags = [(tok, tag, _latin_letters(tok) in lexicon if tag == ScriptTag.LATIN else None)
                    for tok, tag in prof]
            sent_alpha = [t for t in tags if _is_alpha_token(t[1])]
            if not sent_alpha:
                continue
            if {t[1] for t in sent_alpha} == {ScriptTag.LATIN}:
                frac = _english_fraction(tags)
                if frac is not None and low <= frac <= high:
                    return MixType.TYPE6
        return MixType.TYPE2
    return MixType.TYPE4
