"""Figurative polishing: imagery substitution and meter-safe similes.

Both transformations read TSV tables.  Generative models can stand in for
the tables through ``provider_rows``, which runs a command that prints the
same TSV rows.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
import subprocess
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .phonetics import PronunciationLexicon, StressMark, stress_pattern
from .sketch import FixedPhrase, ImagerySubstitution, Sketch

SAMPLE_SIZE = 4
POS_TAGS = frozenset({"noun", "adjective", "verb", "other"})


@dataclass(frozen=True)
class FigurativeTable:
    """Key word -> (value phrase, confidence) rows sorted by confidence."""

    rows: Mapping[str, tuple[tuple[tuple[str, ...], float], ...]]

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, float]]) -> "FigurativeTable":
        grouped: dict[str, list[tuple[tuple[str, ...], float]]] = {}
        for key, value, conf in rows:
            phrase = tuple(value.lower().split())
            if not phrase:
                raise ValueError(f"empty phrase for {key!r}")
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"confidence {conf} for {key!r} outside [0, 1]")
            grouped.setdefault(key.lower(), []).append((phrase, conf))
        return cls({k: tuple(sorted(v, key=lambda pc: -pc[1])) for k, v in grouped.items()})

    def __contains__(self, key: object) -> bool:
        return key in self.rows

    def __len__(self) -> int:
        return len(self.rows)

    def get(self, key: str) -> tuple[tuple[tuple[str, ...], float], ...]:
        return self.rows.get(key, ())


class ImageryTable(FigurativeTable):
    pass


class SimileTable(FigurativeTable):
    pass


def _read_tsv(source: str | Path | io.TextIOBase) -> list[list[str]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return _read_tsv(fh)
    rows = []
    for row in csv.reader(source, delimiter="\t"):
        if not row or not row[0].strip() or row[0].startswith("#"):
            continue
        rows.append([c.strip() for c in row])
    return rows


def _triples(rows: Iterable[Sequence[str]]) -> list[tuple[str, str, float]]:
    out = []
    for n, row in enumerate(rows, 1):
        if len(row) != 3:
            raise ValueError(f"row {n}: expected 3 tab-separated fields, got {len(row)}")
        out.append((row[0], row[1], float(row[2])))
    return out


def load_imagery(source) -> ImageryTable:
    return ImageryTable.from_rows(_triples(_read_tsv(source)))


def load_similes(source) -> SimileTable:
    return SimileTable.from_rows(_triples(_read_tsv(source)))


def provider_rows(command: Sequence[str], queries: Iterable[str], timeout: float = 600.0) -> list[tuple[str, str, float]]:
    """Ask an external generator for table rows, one query word per stdin line."""
    res = subprocess.run(
        list(command), input="\n".join(queries) + "\n",
        capture_output=True, text=True, timeout=timeout, check=True,
    )
    return _triples(_read_tsv(io.StringIO(res.stdout)))


class PosLexicon:
    def __init__(self, tags: Mapping[str, Iterable[str]]) -> None:
        self._tags: dict[str, frozenset[str]] = {}
        for word, ts in tags.items():
            ts = frozenset(ts)
            if not ts <= POS_TAGS:
                raise ValueError(f"{word!r}: unknown tags {sorted(ts - POS_TAGS)}")
            self._tags[word.lower()] = ts

    def tags(self, word: str) -> frozenset[str]:
        return self._tags.get(word.lower(), frozenset())

    def is_noun(self, word: str) -> bool:
        return "noun" in self.tags(word)

    def is_adjective(self, word: str) -> bool:
        return "adjective" in self.tags(word)


def load_pos(source) -> PosLexicon:
    tags = {}
    for n, row in enumerate(_read_tsv(source), 1):
        if len(row) != 2:
            raise ValueError(f"row {n}: expected word<TAB>tags")
        tags[row[0]] = [t.strip() for t in row[1].split(",") if t.strip()]
    return PosLexicon(tags)


# --- meter check for phrases -----------------------------------------------


def alternates(pattern: Sequence[StressMark]) -> bool:
    """Pattern fits strictly alternating stress starting on either parity."""
    for first in (StressMark.S, StressMark.U):
        other = StressMark.U if first is StressMark.S else StressMark.S
        if all(m.matches(first if i % 2 == 0 else other) for i, m in enumerate(pattern)):
            return True
    return False


def phrase_alternates(words: Sequence[str], lex: PronunciationLexicon) -> bool:
    """Some pronunciation choice gives the phrase an alternating stress run."""
    options = []
    for w in words:
        prons = lex.get(w)
        if prons is None:
            return False
        options.append({stress_pattern(p) for p in prons})
    return any(
        alternates([m for part in combo for m in part])
        for combo in itertools.product(*options)
    )


# --- transformations --------------------------------------------------------


def _editable_slots(sk: Sketch, want) -> list[tuple[int, int, str]]:
    """(line, slot, word) for content words passing ``want``; rhyme slots never qualify."""
    out = []
    for i, ls in enumerate(sk.lines):
        anchored = {p.anchor for p in ls.fixed_phrases}
        for j, w in enumerate(ls.content_words):
            if w != ls.rhyme_word and j not in anchored and want(w):
                out.append((i, j, w))
    return out


def apply_imagery(
    sk: Sketch,
    tbl: ImageryTable,
    pos: PosLexicon,
    max_repl: int = 2,
    rng: random.Random | None = None,
    lex: PronunciationLexicon | None = None,
) -> Sketch:
    """Swap the most confident noun -> imagery pairs into the sketch."""
    rng = rng or random.Random(0)
    slots = _editable_slots(sk, lambda w: pos.is_noun(w) and w in tbl)
    sampled = rng.sample(slots, min(SAMPLE_SIZE, len(slots)))
    proposals = []
    for i, j, w in sampled:
        for phrase, conf in tbl.get(w):
            image = phrase[0] if len(phrase) == 1 else None
            if image is None or image in sk.lines[i].content_words or image == sk.lines[i].rhyme_word:
                continue
            if lex is None or image in lex:
                proposals.append((conf, i, j, w, image))
                break
    proposals.sort(key=lambda p: (-p[0], p[1], p[2]))
    lines = list(sk.lines)
    for conf, i, j, w, image in proposals[:max_repl]:
        ls = lines[i]
        words = list(ls.content_words)
        words[j] = image
        scores = dict(ls.scores)
        if w in scores:
            scores[image] = scores.pop(w)
        lines[i] = replace(
            ls,
            content_words=tuple(words),
            scores=scores,
            imagery=ls.imagery + (ImagerySubstitution(w, image, conf),),
        )
    return replace(sk, lines=tuple(lines))


def simile_phrase(adjective: str, vehicle: Sequence[str]) -> tuple[str, ...]:
    return (adjective, "like", *vehicle)


def apply_similes(
    sk: Sketch,
    tbl: SimileTable,
    pos: PosLexicon,
    lex: PronunciationLexicon,
    max_add: int = 1,
    rng: random.Random | None = None,
) -> Sketch:
    """Attach up to ``max_add`` "ADJ like VEHICLE" phrases that keep the meter."""
    rng = rng or random.Random(0)
    slots = _editable_slots(sk, lambda w: pos.is_adjective(w) and w in tbl)
    sampled = rng.sample(slots, min(SAMPLE_SIZE, len(slots)))
    proposals = []
    for i, j, w in sampled:
        for vehicle, conf in tbl.get(w):
            phrase = simile_phrase(w, vehicle)
            if phrase_alternates(phrase, lex):
                proposals.append((conf, i, j, phrase))
                break
    proposals.sort(key=lambda p: (-p[0], p[1], p[2]))
    lines = list(sk.lines)
    used_lines: set[int] = set()
    added = 0
    for conf, i, j, phrase in proposals:
        if added >= max_add:
            break
        if i in used_lines:
            continue
        ls = lines[i]
        lines[i] = replace(ls, fixed_phrases=ls.fixed_phrases + (FixedPhrase(phrase, j),))
        used_lines.add(i)
        added += 1
    return replace(sk, lines=tuple(lines))


def polish(
    sk: Sketch,
    imagery: ImageryTable,
    similes: SimileTable,
    pos: PosLexicon,
    lex: PronunciationLexicon,
    rng: random.Random | None = None,
    max_repl: int = 2,
    max_add: int = 1,
) -> Sketch:
    rng = rng or random.Random(0)
    sk = apply_imagery(sk, imagery, pos, max_repl=max_repl, rng=rng, lex=lex)
    return apply_similes(sk, similes, pos, lex, max_add=max_add, rng=rng)
