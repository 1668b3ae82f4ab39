"""Automatic evaluation: format compliance, Distinct-2 and imageability."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MetricError, SonnetError
from .meter import RhymeScheme, check_sonnet_format, line_words
from .phonetics import PronunciationLexicon
from .reports import BatchReport, FormatReport, NoveltyReport, PoemRow
from .sketch import stopwords as default_stopwords

__all__ = [
    "BatchReport",
    "FormatReport",
    "ImageabilityLexicon",
    "NoveltyReport",
    "PoemRow",
    "batch_report",
    "distinct_2",
    "format_table",
    "imageability",
    "load_imageability",
    "novelty",
    "poem_lines",
    "report_json",
]

Poem = str | Sequence[str]


def poem_lines(poem: Poem) -> list[list[str]]:
    """Tokenised nonblank lines; a string is split on newlines."""
    raw = poem.splitlines() if isinstance(poem, str) else list(poem)
    return [toks for toks in (line_words(x) for x in raw) if toks]


@dataclass(frozen=True)
class ImageabilityLexicon:
    ratings: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.ratings:
            raise ValueError("imageability lexicon is empty")
        for w, r in self.ratings.items():
            if not math.isfinite(r):
                raise ValueError(f"non-finite rating for {w!r}")

    def get(self, word: str) -> float | None:
        return self.ratings.get(word.lower())

    @property
    def range(self) -> tuple[float, float]:
        vals = self.ratings.values()
        return min(vals), max(vals)


def load_imageability(path: str | Path) -> ImageabilityLexicon:
    ratings: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{n}: expected word<TAB>rating")
            ratings[parts[0].strip().lower()] = float(parts[1])
    return ImageabilityLexicon(ratings)


def distinct_2(poem: Poem) -> float:
    """Unique within-line bigrams over all within-line bigrams."""
    total, seen = 0, set()
    for toks in poem_lines(poem):
        for bg in zip(toks, toks[1:]):
            seen.add(bg)
            total += 1
    if total == 0:
        raise MetricError("Distinct-2 is undefined: no line has two tokens")
    return len(seen) / total


def _bigram_total(poem: Poem) -> int:
    return sum(max(len(t) - 1, 0) for t in poem_lines(poem))


def imageability(
    poem: Poem,
    lex: ImageabilityLexicon,
    stopwords: Iterable[str] | None = None,
) -> tuple[float, int]:
    """Mean rating of non-stopword tokens the lexicon knows, and their count."""
    stop = frozenset(stopwords) if stopwords is not None else default_stopwords()
    vals = [
        r for toks in poem_lines(poem) for w in toks
        if w not in stop and (r := lex.get(w)) is not None
    ]
    if not vals:
        raise MetricError("imageability is undefined: no scorable tokens")
    return math.fsum(vals) / len(vals), len(vals)


def novelty(poem: Poem, img_lex: ImageabilityLexicon, stopwords: Iterable[str] | None = None) -> NoveltyReport:
    d2 = distinct_2(poem)
    mean, n = imageability(poem, img_lex, stopwords)
    return NoveltyReport(d2, mean, n, _bigram_total(poem))


def _mean(xs: Sequence[float]) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


def batch_report(
    poems: Sequence[Poem] | Mapping[str, Poem],
    scheme: RhymeScheme | None,
    lex: PronunciationLexicon | None,
    img_lex: ImageabilityLexicon | None = None,
    stopwords: Iterable[str] | None = None,
) -> BatchReport:
    """Macro-averaged format and novelty scores with one row per poem.

    Pass ``scheme=None`` to skip format checking and ``img_lex=None`` to skip
    novelty.  Per-poem failures are recorded on the row instead of raised.
    """
    items = list(poems.items()) if isinstance(poems, Mapping) else [
        (f"poem{i + 1}", p) for i, p in enumerate(poems)
    ]
    if not items:
        raise MetricError("batch_report needs at least one poem")
    stop = frozenset(stopwords) if stopwords is not None else None
    rows = []
    for name, poem in items:
        row = PoemRow(name)
        lines = poem.splitlines() if isinstance(poem, str) else list(poem)
        lines = [x for x in lines if x.strip()]
        if scheme is not None and lex is not None:
            try:
                row.format = check_sonnet_format(lines, scheme, lex)
            except SonnetError as exc:
                row.errors.append(f"format: {exc}")
        if img_lex is not None:
            try:
                row.novelty = novelty(lines, img_lex, stop)
            except SonnetError as exc:
                row.errors.append(f"novelty: {exc}")
        rows.append(row)

    fmts = [r.format for r in rows if r.format is not None]
    novs = [r.novelty for r in rows if r.novelty is not None]
    return BatchReport(
        rows=rows,
        rhyme_pct=_mean([f.rhyme_pct for f in fmts]) if fmts else 0.0,
        meter_pct=_mean([f.meter_pct for f in fmts]) if fmts else 0.0,
        syllable_pct=_mean([f.syllable_pct for f in fmts]) if fmts else 0.0,
        distinct2=_mean([n.distinct2 for n in novs]),
        imageability=_mean([n.imageability for n in novs]),
    )


def report_json(report: BatchReport) -> str:
    def row(r: PoemRow) -> dict:
        out: dict = {"name": r.name, "errors": list(r.errors)}
        if r.format is not None:
            f = r.format
            out["format"] = {
                "rhyme_pct": f.rhyme_pct, "meter_pct": f.meter_pct, "syllable_pct": f.syllable_pct,
                "rhyme": [f.rhyme_num, f.rhyme_den],
                "meter": [f.meter_num, f.meter_den],
                "syllable": [f.syllable_num, f.syllable_den],
                "pairs": [[p.first, p.second, p.words[0], p.words[1], p.rhyme] for p in f.pairs],
                "lines": [[d.index, d.template, list(d.syllable_totals)] for d in f.lines],
            }
        if r.novelty is not None:
            out["novelty"] = r.novelty.to_dict()
        return out

    return json.dumps(
        {
            "aggregate": {
                "rhyme_pct": report.rhyme_pct,
                "meter_pct": report.meter_pct,
                "syllable_pct": report.syllable_pct,
                "distinct2": report.distinct2,
                "imageability": report.imageability,
                "poems": len(report.rows),
                "failed": len(report.failed),
            },
            "rows": [row(r) for r in report.rows],
        },
        indent=2,
        sort_keys=True,
    )


def _cell(x: float | None, scale: float = 1.0, digits: int = 1) -> str:
    return "-" if x is None else f"{x * scale:.{digits}f}"


def format_table(report: BatchReport) -> str:
    """Aligned plain-text table; Distinct-2 is shown on a 0-100 scale."""
    header = ("poem", "rhyme", "meter", "syll", "dist-2", "image", "errors")
    body = []
    for r in report.rows:
        f, n = r.format, r.novelty
        body.append((
            r.name,
            _cell(f.rhyme_pct if f else None),
            _cell(f.meter_pct if f else None),
            _cell(f.syllable_pct if f else None),
            _cell(n.distinct2 if n else None, 100.0),
            _cell(n.imageability if n else None, digits=3),
            "; ".join(r.errors),
        ))
    body.append((
        "ALL",
        _cell(report.rhyme_pct), _cell(report.meter_pct), _cell(report.syllable_pct),
        _cell(report.distinct2, 100.0), _cell(report.imageability, digits=3),
        f"{len(report.failed)} failed" if report.failed else "",
    ))
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]

    def fmt(row: Sequence[str]) -> str:
        cells = [c.ljust(w) if i in (0, 6) else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        return "  ".join(cells).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), rule, *map(fmt, body[:-1]), rule, fmt(body[-1])]) + "\n"
