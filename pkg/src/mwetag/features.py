"""Token feature columns.

Every token is expanded into 22 fixed feature columns plus a BIO label.  The
column layout is shared by the file reader/writer, the template engine, and
the gene catalogue, so the indices below are the single source of truth.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .errors import ConfigError, InputError
from .stemmer import AffixLexicon, stem

LABELS = ("O", "B-MWE", "I-MWE")

NUM_COLUMNS = 22
SUFFIX_SLOTS = 10
ABSENT = "0"

COL_WORD = 0
COL_STEM = 1
COL_SUFFIX_FIRST = 2  # ten slots: columns 2..11, rightmost-stripped suffix first
COL_SUFFIX_PRESENT = 12
COL_SUFFIX_COUNT = 13
COL_PREFIX = 14
COL_PREFIX_PRESENT = 15
COL_DIGIT = 16
COL_SALUTATION = 17
COL_FOLLOWUP = 18
COL_FREQUENCY = 19
COL_LENGTH = 20
COL_POS = 21


@dataclass(frozen=True)
class TokenRecord:
    """One token row: 22 feature columns (as written to file) plus its label."""

    columns: tuple[str, ...]
    label: str = "O"

    def __post_init__(self) -> None:
        if len(self.columns) != NUM_COLUMNS:
            raise InputError(
                f"token row needs {NUM_COLUMNS} feature columns, got {len(self.columns)}"
            )

    @property
    def word(self) -> str:
        return self.columns[COL_WORD]

    @property
    def stem(self) -> str:
        return self.columns[COL_STEM]

    @property
    def suffix_slots(self) -> tuple[str, ...]:
        return self.columns[COL_SUFFIX_FIRST : COL_SUFFIX_FIRST + SUFFIX_SLOTS]

    @property
    def suffix_present(self) -> int:
        return int(self.columns[COL_SUFFIX_PRESENT])

    @property
    def suffix_count(self) -> int:
        return int(self.columns[COL_SUFFIX_COUNT])

    @property
    def prefix(self) -> str:
        return self.columns[COL_PREFIX]

    @property
    def prefix_present(self) -> int:
        return int(self.columns[COL_PREFIX_PRESENT])

    @property
    def digit_flag(self) -> int:
        return int(self.columns[COL_DIGIT])

    @property
    def salutation_flag(self) -> int:
        return int(self.columns[COL_SALUTATION])

    @property
    def followup_flag(self) -> int:
        return int(self.columns[COL_FOLLOWUP])

    @property
    def frequency_bin(self) -> int:
        return int(self.columns[COL_FREQUENCY])

    @property
    def length_flag(self) -> int:
        return int(self.columns[COL_LENGTH])

    @property
    def pos(self) -> str:
        return self.columns[COL_POS]


Sentence = tuple[TokenRecord, ...]


@dataclass(frozen=True)
class Gazetteer:
    """Salutation words (looked up one token back) and follow-up words
    (looked up one token ahead)."""

    salutations: frozenset[str]
    followups: frozenset[str]

    def __post_init__(self) -> None:
        for name in ("salutations", "followups"):
            entries = frozenset(unicodedata.normalize("NFC", e) for e in getattr(self, name))
            if any(not e for e in entries):
                raise ConfigError(f"empty {name} entry")
            object.__setattr__(self, name, entries)


def _read_gazetteer_lines(source: str | Path | IO[str]) -> frozenset[str]:
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    entries = {
        unicodedata.normalize("NFC", raw.strip())
        for raw in lines
        if raw.strip() and not raw.lstrip().startswith("#")
    }
    return frozenset(entries)


def load_gazetteer(
    salutation_source: str | Path | IO[str], followup_source: str | Path | IO[str]
) -> Gazetteer:
    """One entry per line, ``#`` comments and blanks ignored, NFC-normalized."""
    return Gazetteer(
        salutations=_read_gazetteer_lines(salutation_source),
        followups=_read_gazetteer_lines(followup_source),
    )


@dataclass(frozen=True)
class FrequencyTable:
    counts: Mapping[str, int] = field(default_factory=dict)

    def count(self, word: str) -> int:
        return self.counts.get(word, 0)


def build_frequency_table(words: Iterable[str]) -> FrequencyTable:
    """Count raw surface occurrences. Build this from training data only."""
    return FrequencyTable(counts=dict(Counter(words)))


def length_flag(word: str) -> int:
    """1 when the word is longer than 3 codepoints."""
    return int(len(word) > 3)


def frequency_bin(count: int) -> int:
    """0 below 100 occurrences, 1 at or above (saturating)."""
    if count < 0:
        raise InputError(f"count must be >= 0, got {count}")
    return int(count >= 100)


def digit_flag(word: str) -> int:
    """1 when any codepoint is a decimal digit, in any script."""
    return int(any(ch.isdecimal() for ch in word))


def build_token_record(
    word: str,
    pos: str,
    label: str,
    prev_word: str | None,
    next_word: str | None,
    lexicon: AffixLexicon,
    gazetteer: Gazetteer,
    frequencies: FrequencyTable,
    min_stem: int = 1,
) -> TokenRecord:
    """Expand one token into its 22 feature columns.

    prev_word/next_word are None at sentence boundaries, which zeroes the
    gazetteer flags.  Suffix slots hold at most the first SUFFIX_SLOTS
    stripped suffixes, rightmost-stripped first, padded with "0".
    """
    if label not in LABELS:
        raise InputError(f"label {label!r} not in {LABELS}")
    word = unicodedata.normalize("NFC", word)
    result = stem(word, lexicon, min_stem)

    slots = list(result.stripped_suffixes[:SUFFIX_SLOTS])
    slots += [ABSENT] * (SUFFIX_SLOTS - len(slots))
    suffix_count = len(result.stripped_suffixes[:SUFFIX_SLOTS])
    prefix = result.stripped_prefixes[0] if result.stripped_prefixes else ABSENT

    columns = (
        word,
        result.stem,
        *slots,
        str(int(suffix_count > 0)),
        str(suffix_count),
        prefix,
        str(int(prefix != ABSENT)),
        str(digit_flag(word)),
        str(int(prev_word is not None and prev_word in gazetteer.salutations)),
        str(int(next_word is not None and next_word in gazetteer.followups)),
        str(frequency_bin(frequencies.count(word))),
        str(length_flag(word)),
        pos,
    )
    return TokenRecord(columns=columns, label=label)


def encode_corpus(
    raw_sentences: Sequence[Sequence[tuple[str, str, str]]],
    lexicon: AffixLexicon,
    gazetteer: Gazetteer,
    frequencies: FrequencyTable | None = None,
    min_stem: int = 1,
) -> list[Sentence]:
    """Expand (word, pos, label) sentences into token rows.

    When no frequency table is given, one is built from these sentences;
    pass a prebuilt table to encode held-out data against training counts.
    """
    if frequencies is None:
        frequencies = build_frequency_table(
            w for sentence in raw_sentences for w, _, _ in sentence
        )
    encoded: list[Sentence] = []
    for s_idx, sentence in enumerate(raw_sentences):
        words = [w for w, _, _ in sentence]
        rows = []
        for t, (word, pos, label) in enumerate(sentence):
            if label not in LABELS:
                raise InputError(
                    f"sentence {s_idx + 1}, token {t + 1}: "
                    f"label {label!r} not in {LABELS}"
                )
            rows.append(
                build_token_record(
                    word,
                    pos,
                    label,
                    words[t - 1] if t > 0 else None,
                    words[t + 1] if t + 1 < len(words) else None,
                    lexicon,
                    gazetteer,
                    frequencies,
                    min_stem,
                )
            )
        encoded.append(tuple(rows))
    return encoded
