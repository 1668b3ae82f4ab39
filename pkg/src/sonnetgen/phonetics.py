"""Pronunciation lexicon, stress patterns and rhyme classification.

The lexicon reads the CMU pronouncing dictionary format.  Rhyme parts run
from the last primary-stressed vowel to the end of the word; two words are
*strict* rhymes when those parts are identical (stress digits ignored) and
*slant* rhymes when the vowel matches and the trailing phonemes are similar.
"""

from __future__ import annotations

import enum
import logging
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .errors import IdentityRhymeError, LexiconLoadError, LexiconParseError, UnknownWordError

log = logging.getLogger(__name__)

VOWELS = frozenset(
    "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW".split()
)
CONSONANT_MANNER: Mapping[str, str] = {
    "B": "stop", "D": "stop", "G": "stop", "K": "stop", "P": "stop", "T": "stop",
    "CH": "affricate", "JH": "affricate",
    "DH": "fricative", "F": "fricative", "S": "fricative", "SH": "fricative",
    "TH": "fricative", "V": "fricative", "Z": "fricative", "ZH": "fricative",
    "HH": "aspirate",
    "M": "nasal", "N": "nasal", "NG": "nasal",
    "L": "liquid", "R": "liquid",
    "W": "glide", "Y": "glide",
}
ARPABET = VOWELS | frozenset(CONSONANT_MANNER)

_PHONE_RE = re.compile(r"^([A-Z]+)([0-9]?)$")
_ALTERNATE_RE = re.compile(r"\(\d+\)$")


class StressMark(enum.Enum):
    U = "U"
    S = "S"
    A = "A"

    def matches(self, slot: "StressMark") -> bool:
        return self is StressMark.A or slot is StressMark.A or self is slot


class RhymeClass(enum.Enum):
    STRICT = "strict"
    SLANT = "slant"
    NONE = "none"

    def __bool__(self) -> bool:
        return self is not RhymeClass.NONE


@dataclass(frozen=True, slots=True)
class Phoneme:
    symbol: str
    stress: int | None = None

    @property
    def is_vowel(self) -> bool:
        return self.stress is not None

    @property
    def kind(self) -> str:
        return "vowel" if self.is_vowel else "consonant"

    def __str__(self) -> str:
        return self.symbol if self.stress is None else f"{self.symbol}{self.stress}"


_PHONEME_CACHE: dict[str, Phoneme] = {}


def phoneme(code: str) -> Phoneme:
    """Parse one ARPAbet code such as ``AO1`` or ``L``; instances are shared."""
    cached = _PHONEME_CACHE.get(code)
    if cached is not None:
        return cached
    m = _PHONE_RE.match(code)
    if m is None or m.group(1) not in ARPABET:
        raise ValueError(f"unknown phoneme symbol {code!r}")
    symbol, digit = m.groups()
    if symbol in VOWELS:
        if digit not in ("0", "1", "2"):
            raise ValueError(f"vowel {code!r} needs one stress digit 0/1/2")
        ph = Phoneme(symbol, int(digit))
    else:
        if digit:
            raise ValueError(f"consonant {code!r} cannot carry a stress digit")
        ph = Phoneme(symbol)
    _PHONEME_CACHE[code] = ph
    return ph


@dataclass(frozen=True, slots=True)
class Pronunciation:
    phonemes: tuple[Phoneme, ...]

    def __post_init__(self) -> None:
        if not any(p.is_vowel for p in self.phonemes):
            raise ValueError("pronunciation has no vowel")

    @classmethod
    def parse(cls, text: str) -> "Pronunciation":
        return cls(tuple(phoneme(code) for code in text.split()))

    def __str__(self) -> str:
        return " ".join(str(p) for p in self.phonemes)

    def __len__(self) -> int:
        return len(self.phonemes)


def stress_pattern(p: Pronunciation) -> tuple[StressMark, ...]:
    """One mark per vowel; monosyllables are ambiguous whatever their digit."""
    stresses = [ph.stress for ph in p.phonemes if ph.is_vowel]
    if len(stresses) == 1:
        return (StressMark.A,)
    table = {0: StressMark.U, 1: StressMark.S, 2: StressMark.A}
    return tuple(table[s] for s in stresses)


def syllable_count(p: Pronunciation) -> int:
    return sum(1 for ph in p.phonemes if ph.is_vowel)


def rhyme_part(p: Pronunciation) -> tuple[Phoneme, ...]:
    """Suffix from the last primary-stressed vowel (else secondary, else any)."""
    phones = p.phonemes
    for wanted in (1, 2, None):
        for i in range(len(phones) - 1, -1, -1):
            ph = phones[i]
            if ph.is_vowel and (wanted is None or ph.stress == wanted):
                return phones[i:]
    raise AssertionError("unreachable: pronunciation without vowel")


def _rhyme_key(p: Pronunciation) -> tuple[str, tuple[str, ...]]:
    part = rhyme_part(p)
    return part[0].symbol, tuple(ph.symbol for ph in part[1:])


def _is_subsequence(short: tuple[str, ...], long: tuple[str, ...]) -> bool:
    it = iter(long)
    return all(sym in it for sym in short)


def codas_similar(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    """Slant-rhyme tail rule: subsequence either way, or same final manner.

    Both tails must carry the same number of trailing syllables, so a
    one-syllable ending never pairs with a two-syllable ending.
    """
    if _vowel_count(a) != _vowel_count(b):
        return False
    if len(a) <= len(b):
        if _is_subsequence(a, b):
            return True
    elif _is_subsequence(b, a):
        return True
    if a and b:
        ma = CONSONANT_MANNER.get(a[-1])
        mb = CONSONANT_MANNER.get(b[-1])
        return ma is not None and ma == mb
    return False


def _vowel_count(tail: tuple[str, ...]) -> int:
    return sum(sym in VOWELS for sym in tail)


def _classify_keys(
    ka: tuple[str, tuple[str, ...]], kb: tuple[str, tuple[str, ...]]
) -> RhymeClass:
    if ka[0] != kb[0]:
        return RhymeClass.NONE
    if ka[1] == kb[1]:
        return RhymeClass.STRICT
    return RhymeClass.SLANT if codas_similar(ka[1], kb[1]) else RhymeClass.NONE


class PronunciationLexicon:
    """Immutable word -> pronunciations map with case-insensitive lookup."""

    def __init__(
        self,
        entries: Mapping[str, Iterable[Pronunciation]],
        rejected: Iterable[tuple[int, str]] = (),
    ) -> None:
        self._entries: dict[str, tuple[Pronunciation, ...]] = {}
        for word, prons in entries.items():
            prons = tuple(prons)
            if not prons:
                raise ValueError(f"{word!r} has no pronunciation")
            self._entries[word.lower()] = prons
        self.rejected: tuple[tuple[int, str], ...] = tuple(rejected)
        self._index: dict[str, dict[tuple[str, ...], frozenset[str]]] | None = None
        self._index_lock = threading.Lock()
        self._candidates: dict[str, frozenset[str]] = {}

    def __contains__(self, word: object) -> bool:
        return isinstance(word, str) and word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __getitem__(self, word: str) -> tuple[Pronunciation, ...]:
        return self.lookup(word)

    def lookup(self, word: str) -> tuple[Pronunciation, ...]:
        try:
            return self._entries[word.lower()]
        except KeyError:
            raise UnknownWordError(word) from None

    def get(self, word: str) -> tuple[Pronunciation, ...] | None:
        return self._entries.get(word.lower())

    def words(self) -> Iterator[str]:
        return iter(self._entries)

    def pronunciation_count(self) -> int:
        return sum(len(v) for v in self._entries.values())

    def _rhyme_index(self) -> dict[str, dict[tuple[str, ...], frozenset[str]]]:
        if self._index is None:
            with self._index_lock:
                if self._index is None:
                    raw: dict[str, dict[tuple[str, ...], set[str]]] = {}
                    for word, prons in self._entries.items():
                        for p in prons:
                            vowel, tail = _rhyme_key(p)
                            raw.setdefault(vowel, {}).setdefault(tail, set()).add(word)
                    self._index = {
                        v: {t: frozenset(ws) for t, ws in tails.items()}
                        for v, tails in raw.items()
                    }
        return self._index


def parse_lexicon(raw: IO[str] | Iterable[str]) -> PronunciationLexicon:
    """Parse CMU-dict formatted lines.

    ``;;;`` comment lines and blank lines are skipped, trailing ``# ...``
    annotations are dropped, and ``WORD(n)`` alternates are merged under the
    lowercased headword.  Entries without any vowel cannot be scanned; they
    are left out and listed in ``PronunciationLexicon.rejected``.

    Raises:
        LexiconParseError: a line is malformed or uses an unknown phoneme.
        LexiconLoadError: the stream cannot be read or decoded.
    """
    entries: dict[str, list[Pronunciation]] = {}
    rejected: list[tuple[int, str]] = []
    try:
        for line_no, line in enumerate(raw, 1):
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            if line.startswith(";;;"):
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) < 2:
                raise LexiconParseError(line_no, f"entry without phonemes: {line!r}")
            word = _ALTERNATE_RE.sub("", fields[0]).lower()
            phones = []
            for code in fields[1:]:
                try:
                    phones.append(phoneme(code))
                except ValueError as exc:
                    raise LexiconParseError(line_no, f"{exc} in entry {fields[0]!r}") from None
            if not any(p.is_vowel for p in phones):
                rejected.append((line_no, fields[0]))
                continue
            entries.setdefault(word, []).append(Pronunciation(tuple(phones)))
    except (OSError, UnicodeDecodeError) as exc:
        raise LexiconLoadError(str(exc)) from exc
    if rejected:
        log.info("skipped %d vowel-less lexicon entries", len(rejected))
    return PronunciationLexicon(entries, rejected)


def default_lexicon_path() -> Path:
    return Path(str(resources.files("cmudict") / "data" / "cmudict.dict"))


def load_lexicon(path: str | Path | None = None) -> PronunciationLexicon:
    path = Path(path) if path is not None else default_lexicon_path()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_lexicon(fh)
    except OSError as exc:
        raise LexiconLoadError(f"cannot read lexicon {path}: {exc}") from exc


@lru_cache(maxsize=1)
def default_lexicon() -> PronunciationLexicon:
    """The full CMU dictionary bundled with the ``cmudict`` package."""
    return load_lexicon()


def classify_rhyme(a: str, b: str, lex: PronunciationLexicon) -> RhymeClass:
    a_l, b_l = a.lower(), b.lower()
    if a_l == b_l:
        raise IdentityRhymeError(f"a word cannot rhyme with itself: {a!r}")
    keys_a = {_rhyme_key(p) for p in lex.lookup(a_l)}
    keys_b = {_rhyme_key(p) for p in lex.lookup(b_l)}
    best = RhymeClass.NONE
    for ka in keys_a:
        for kb in keys_b:
            cls = _classify_keys(ka, kb)
            if cls is RhymeClass.STRICT:
                return cls
            if cls is RhymeClass.SLANT:
                best = cls
    return best


def rhyme_candidates(w: str, lex: PronunciationLexicon) -> frozenset[str]:
    """Every other lexicon word that strictly or slantly rhymes with ``w``."""
    w_l = w.lower()
    cached = lex._candidates.get(w_l)
    if cached is not None:
        return cached
    index = lex._rhyme_index()
    found: set[str] = set()
    for p in lex.lookup(w_l):
        vowel, tail = _rhyme_key(p)
        for other_tail, words in index.get(vowel, {}).items():
            if other_tail == tail or codas_similar(tail, other_tail):
                found.update(words)
    found.discard(w_l)
    result = lex._candidates[w_l] = frozenset(found)
    return result
