"""Line stress templates, scansion and whole-poem format checking."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import IdentityRhymeError, SchemeError, UnknownWordError
from .phonetics import (
    Pronunciation,
    PronunciationLexicon,
    StressMark,
    classify_rhyme,
    stress_pattern,
    syllable_count,
)
from .reports import FormatReport, LineDiagnostic, PairDiagnostic

U, S = StressMark.U, StressMark.S


@dataclass(frozen=True)
class StressTemplate:
    name: str
    marks: tuple[StressMark, ...]

    def __len__(self) -> int:
        return len(self.marks)

    def __str__(self) -> str:
        return " ".join(m.value for m in self.marks)


STANDARD = StressTemplate("standard", (U, S) * 5)
INVERTED_FIRST_FOOT = StressTemplate("inverted_first_foot", (S, U) + (U, S) * 4)
FEMININE = StressTemplate("feminine", (U, S) * 5 + (U,))
_TEMPLATES = (STANDARD, INVERTED_FIRST_FOOT, FEMININE)
TEMPLATES_BY_NAME = {t.name: t for t in _TEMPLATES}


def line_templates() -> list[StressTemplate]:
    """The admissible line templates, in matching order."""
    return list(_TEMPLATES)


def pattern_fits(pattern: Sequence[StressMark], slots: Sequence[StressMark]) -> bool:
    return len(pattern) == len(slots) and all(p.matches(s) for p, s in zip(pattern, slots))


def word_fits(
    slots: Sequence[StressMark], w: str, lex: PronunciationLexicon
) -> Pronunciation | None:
    """First pronunciation of ``w`` whose stress pattern fills ``slots`` exactly."""
    for p in lex.lookup(w):
        if pattern_fits(stress_pattern(p), slots):
            return p
    return None


def fits_line_end(w: str, lex: PronunciationLexicon) -> bool:
    """Whether some pronunciation of ``w`` can close a line of some template."""
    return _fits_line_end(lex, w.lower())


@lru_cache(maxsize=None)
def _fits_line_end(lex: PronunciationLexicon, w: str) -> bool:
    prons = lex.get(w)
    if prons is None:
        return False
    for p in prons:
        pattern = stress_pattern(p)
        for t in _TEMPLATES:
            if len(pattern) <= len(t) and pattern_fits(pattern, t.marks[len(t) - len(pattern):]):
                return True
    return False


# --- rhyme schemes ---------------------------------------------------------

PRESETS = {
    "shakespearean": "ABABCDCDEFEFGG",
    "petrarchan": "ABBAABBACDECDE",
}
STANZAS = {
    "shakespearean": (4, 4, 4, 2),
    "petrarchan": (8, 6),
}


@dataclass(frozen=True)
class RhymeScheme:
    letters: str
    name: str | None = None

    def __post_init__(self) -> None:
        if len(self.letters) != 14 or not re.fullmatch(r"[A-Z]+", self.letters):
            raise SchemeError(f"rhyme scheme must be 14 uppercase letters, got {self.letters!r}")
        lonely = [c for c in sorted(set(self.letters)) if self.letters.count(c) < 2]
        if lonely:
            raise SchemeError(f"letters without a rhyming partner: {''.join(lonely)}")

    @classmethod
    def parse(cls, text: str) -> "RhymeScheme":
        """Accept a preset name or a letter string such as ``ABABCDCDEFEFGG``."""
        key = text.strip().lower()
        if key in PRESETS:
            return cls(PRESETS[key], key)
        letters = re.sub(r"\s+", "", text).upper()
        for name, preset in PRESETS.items():
            if preset == letters:
                return cls(letters, name)
        return cls(letters)

    @property
    def stanzas(self) -> tuple[int, ...]:
        return STANZAS.get(self.name or "", (14,))

    def lines_for(self, letter: str) -> list[int]:
        return [i + 1 for i, c in enumerate(self.letters) if c == letter]

    def groups(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for i, c in enumerate(self.letters, 1):
            out.setdefault(c, []).append(i)
        return out

    def pairs(self) -> list[tuple[int, int]]:
        """All same-letter line pairs (1-based), C(k, 2) per letter."""
        out = []
        for lines in self.groups().values():
            out.extend(itertools.combinations(lines, 2))
        return sorted(out)


SHAKESPEAREAN = RhymeScheme.parse("shakespearean")
PETRARCHAN = RhymeScheme.parse("petrarchan")


def initial_rhyme_lines(s: RhymeScheme) -> list[int]:
    seen: set[str] = set()
    out = []
    for i, c in enumerate(s.letters, 1):
        if c not in seen:
            seen.add(c)
            out.append(i)
    return out


# --- scansion ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z0-9]+)*")


def line_words(text: str) -> list[str]:
    """Lowercased lookup words; punctuation dropped, hyphenated words split."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class ScanResult:
    matched: str | None
    assignment: tuple[tuple[str, Pronunciation], ...] = ()
    unknown: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.matched is not None


def _tile(
    words: Sequence[str],
    options: Sequence[Sequence[tuple[Pronunciation, tuple[StressMark, ...]]]],
    marks: tuple[StressMark, ...],
) -> list[Pronunciation] | None:
    chosen: list[Pronunciation] = []

    def walk(i: int, pos: int) -> bool:
        if i == len(words):
            return pos == len(marks)
        for pron, pattern in options[i]:
            end = pos + len(pattern)
            if end <= len(marks) and pattern_fits(pattern, marks[pos:end]):
                chosen.append(pron)
                if walk(i + 1, end):
                    return True
                chosen.pop()
        return False

    return chosen if walk(0, 0) else None


def _options(words: Sequence[str], lex: PronunciationLexicon):
    opts, unknown = [], []
    for w in words:
        prons = lex.get(w)
        if prons is None:
            unknown.append(w)
            opts.append(())
        else:
            opts.append(tuple((p, stress_pattern(p)) for p in prons))
    return opts, tuple(unknown)


def scan_line(words: Sequence[str], lex: PronunciationLexicon) -> ScanResult:
    words = [w.lower() for w in words]
    opts, unknown = _options(words, lex)
    if unknown:
        return ScanResult(None, unknown=unknown)
    for template in _TEMPLATES:
        chosen = _tile(words, opts, template.marks)
        if chosen is not None:
            return ScanResult(template.name, tuple(zip(words, chosen)))
    return ScanResult(None)


def syllable_totals(words: Sequence[str], lex: PronunciationLexicon) -> set[int]:
    """Every line length reachable by some choice of pronunciations."""
    totals = {0}
    for w in words:
        prons = lex.get(w)
        if prons is None:
            return set()
        counts = {syllable_count(p) for p in prons}
        totals = {t + c for t in totals for c in counts}
    return totals


def check_sonnet_format(
    poem: Sequence[str | Sequence[str]],
    s: RhymeScheme,
    lex: PronunciationLexicon,
) -> FormatReport:
    """Rhyme, meter and syllable compliance of a 14-line poem.

    Lines may be raw strings or pre-tokenised word lists.  The rhyme
    denominator counts every same-letter pair, so a letter used on four
    lines contributes six pairs.
    """
    if len(poem) != 14:
        raise SchemeError(f"a sonnet needs 14 lines, got {len(poem)}")
    lines = [line_words(x) if isinstance(x, str) else [w.lower() for w in x] for x in poem]

    diags = []
    for i, words in enumerate(lines, 1):
        result = scan_line(words, lex)
        totals = syllable_totals(words, lex)
        diags.append(
            LineDiagnostic(i, tuple(words), result.matched, tuple(sorted(totals)), result.unknown)
        )

    pair_diags = []
    for a, b in s.pairs():
        wa = lines[a - 1][-1] if lines[a - 1] else None
        wb = lines[b - 1][-1] if lines[b - 1] else None
        pair_diags.append(PairDiagnostic(a, b, (wa, wb), _pair_label(wa, wb, lex)))

    return FormatReport(
        rhyme_num=sum(p.rhyme in ("strict", "slant") for p in pair_diags),
        rhyme_den=len(pair_diags),
        meter_num=sum(d.meter_ok for d in diags),
        meter_den=len(diags),
        syllable_num=sum(d.syllable_ok for d in diags),
        syllable_den=len(diags),
        lines=tuple(diags),
        pairs=tuple(pair_diags),
    )


def _pair_label(a: str | None, b: str | None, lex: PronunciationLexicon) -> str:
    if a is None or b is None:
        return "unknown"
    try:
        return classify_rhyme(a, b, lex).value
    except UnknownWordError:
        return "unknown"
    except IdentityRhymeError:
        return "identical"


def sonnet_format_ok(report: FormatReport) -> bool:
    return (
        report.rhyme_num == report.rhyme_den
        and report.meter_num == report.meter_den
        and report.syllable_num == report.syllable_den
    )


def scheme_pair_count(letters: Iterable[str]) -> int:
    """Same-letter pair count from letter multiplicities."""
    counts: dict[str, int] = {}
    for c in letters:
        counts[c] = counts.get(c, 0) + 1
    return sum(k * (k - 1) // 2 for k in counts.values())
