"""Poem plans: keyword extraction, masked prompts and the reference planner."""

from __future__ import annotations

import json
import re
import subprocess
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .errors import PlannerError, PromptFormatError
from .lm import tokenize
from .meter import RhymeScheme, initial_rhyme_lines
from .phonetics import PronunciationLexicon

PROMPT_FORMAT_VERSION = 1
LINES = 14
MASK = "[MASK]"


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """The SMART stopword list shipped with the package."""
    text = resources.files("sonnetgen").joinpath("data/smart_stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


# --- plan types -------------------------------------------------------------


@dataclass(frozen=True)
class FixedPhrase:
    words: tuple[str, ...]
    anchor: int  # index into LineSketch.content_words


@dataclass(frozen=True)
class ImagerySubstitution:
    original: str
    replacement: str
    confidence: float


@dataclass(frozen=True)
class LineSketch:
    content_words: tuple[str, ...]
    rhyme_word: str = ""
    fixed_phrases: tuple[FixedPhrase, ...] = ()
    scores: Mapping[str, float] = field(default_factory=dict)
    imagery: tuple[ImagerySubstitution, ...] = ()

    def to_dict(self) -> dict:
        d: dict = {
            "content_words": list(self.content_words),
            "rhyme_word": self.rhyme_word,
            "fixed_phrases": [{"words": list(p.words), "anchor": p.anchor} for p in self.fixed_phrases],
        }
        if self.scores:
            d["scores"] = dict(self.scores)
        if self.imagery:
            d["imagery"] = [
                {"original": s.original, "replacement": s.replacement, "confidence": s.confidence}
                for s in self.imagery
            ]
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "LineSketch":
        return cls(
            content_words=tuple(d.get("content_words", ())),
            rhyme_word=d.get("rhyme_word", "") or "",
            fixed_phrases=tuple(
                FixedPhrase(tuple(p["words"]), int(p["anchor"])) for p in d.get("fixed_phrases", ())
            ),
            scores=dict(d.get("scores", {})),
            imagery=tuple(
                ImagerySubstitution(s["original"], s["replacement"], float(s["confidence"]))
                for s in d.get("imagery", ())
            ),
        )


@dataclass(frozen=True)
class Sketch:
    title: str
    lines: tuple[LineSketch, ...]
    rhyme_provenance: tuple[str, ...] = ()
    # run provenance (config hash, seed); excluded from equality
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if len(self.lines) != LINES:
            raise ValueError(f"a sketch has {LINES} lines, got {len(self.lines)}")

    def slot_counts(self) -> list[int]:
        return [len(ls.content_words) for ls in self.lines]

    def with_line(self, i: int, ls: LineSketch) -> "Sketch":
        lines = list(self.lines)
        lines[i] = ls
        return replace(self, lines=tuple(lines))

    def to_dict(self) -> dict:
        d: dict = {"title": self.title, "lines": [ls.to_dict() for ls in self.lines]}
        if self.rhyme_provenance:
            d["rhyme_provenance"] = list(self.rhyme_provenance)
        if self.metadata:
            d["provenance"] = dict(self.metadata)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "Sketch":
        return cls(
            title=d["title"],
            lines=tuple(LineSketch.from_dict(x) for x in d["lines"]),
            rhyme_provenance=tuple(d.get("rhyme_provenance", ())),
            metadata=dict(d.get("provenance", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "Sketch":
        return cls.from_dict(json.loads(text))


def slot_counts(scheme: RhymeScheme) -> list[int]:
    """Three keyword slots on initial rhyming lines, two elsewhere."""
    init = set(initial_rhyme_lines(scheme))
    return [3 if i in init else 2 for i in range(1, LINES + 1)]


# --- RAKE -------------------------------------------------------------------

_PHRASE_SPLIT_RE = re.compile(r"[^\w\s']+")


def _candidate_phrases(line: str, stop: frozenset[str]) -> list[list[str]]:
    phrases = []
    for chunk in _PHRASE_SPLIT_RE.split(line.lower()):
        current: list[str] = []
        for tok in tokenize(chunk):
            if tok in stop or tok.isdigit():
                if current:
                    phrases.append(current)
                current = []
            else:
                current.append(tok)
        if current:
            phrases.append(current)
    return phrases


def rake_scores(lines: Sequence[str], stop: frozenset[str] | None = None) -> dict[str, float]:
    """Document-wide RAKE word scores, degree / frequency."""
    stop = stopwords() if stop is None else stop
    freq: dict[str, int] = defaultdict(int)
    degree: dict[str, int] = defaultdict(int)
    for line in lines:
        for phrase in _candidate_phrases(line, stop):
            for w in phrase:
                freq[w] += 1
                degree[w] += len(phrase)
    return {w: degree[w] / freq[w] for w in freq}


def ranked_line_words(
    lines: Sequence[str], stop: frozenset[str] | None = None
) -> list[list[tuple[str, float]]]:
    """Per line, its distinct candidate words by descending score.

    Ties keep the order in which words first appear on the line.
    """
    stop = stopwords() if stop is None else stop
    scores = rake_scores(lines, stop)
    out = []
    for line in lines:
        seen: dict[str, int] = {}
        for phrase in _candidate_phrases(line, stop):
            for w in phrase:
                seen.setdefault(w, len(seen))
        ranked = sorted(seen, key=lambda w: (-scores[w], seen[w]))
        out.append([(w, scores[w]) for w in ranked])
    return out


def extract_keywords(lines: Sequence[str], k: int = 3) -> list[list[str]]:
    """Top-``k`` RAKE words of each line, listed in line order."""
    if not lines:
        raise ValueError("no lines to extract keywords from")
    out = []
    for line, ranked in zip(lines, ranked_line_words(lines)):
        top = {w for w, _ in ranked[:k]}
        out.append([w for w in _line_order(line) if w in top])
    return out


def _line_order(line: str) -> list[str]:
    seen: dict[str, None] = {}
    for tok in tokenize(line):
        seen.setdefault(tok, None)
    return list(seen)


# --- masked prompt format ---------------------------------------------------

_SEP = "|||"
_TITLE_RE = re.compile(r"^Title: (.*) \.$")
_LINE_RE = re.compile(r"^Line (\d+):(.*)$")


def _check_title(title: str) -> None:
    if _SEP in title or "\n" in title:
        raise PromptFormatError("title may not contain '|||' or line breaks")


def _format(title: str, rows: Sequence[Sequence[str]]) -> str:
    _check_title(title)
    parts = [f"Title: {title} . {_SEP}"]
    for i, row in enumerate(rows, 1):
        parts.append(f" Line {i}: " + "".join(f"{w} " for w in row) + _SEP)
    return "".join(parts)


def serialize_masked_prompt(title: str, counts: Sequence[int]) -> str:
    if len(counts) != LINES:
        raise PromptFormatError(f"need {LINES} slot counts, got {len(counts)}")
    for i, n in enumerate(counts, 1):
        if n not in (2, 3):
            raise PromptFormatError(f"line {i}: slot count must be 2 or 3, got {n}")
    return _format(title, [[MASK] * n for n in counts])


def serialize_keyword_output(title: str, keywords: Sequence[Sequence[str]]) -> str:
    for i, row in enumerate(keywords, 1):
        for w in row:
            if not w or w.split() != [w] or w == MASK or _SEP in w:
                raise PromptFormatError(f"line {i}: invalid keyword {w!r}")
    return _format(title, keywords)


def _split(text: str) -> tuple[str, list[list[str]]]:
    text = text.strip()
    if not text:
        raise PromptFormatError("empty text")
    pieces = [p.strip() for p in text.split(_SEP)]
    if pieces and pieces[-1] == "":
        pieces.pop()
    m = _TITLE_RE.match(pieces[0]) if pieces else None
    if m is None:
        raise PromptFormatError("missing 'Title: ... .' header")
    rows = []
    for expected, piece in enumerate(pieces[1:], 1):
        lm = _LINE_RE.match(piece)
        if lm is None or int(lm.group(1)) != expected:
            raise PromptFormatError(f"line {expected}: expected 'Line {expected}:' got {piece!r}")
        rows.append(lm.group(2).split())
    if len(rows) != LINES:
        raise PromptFormatError(f"expected {LINES} lines, got {len(rows)}")
    return m.group(1), rows


def parse_masked_prompt(text: str) -> tuple[str, list[int]]:
    title, rows = _split(text)
    counts = []
    for i, row in enumerate(rows, 1):
        if any(tok != MASK for tok in row):
            raise PromptFormatError(f"line {i}: prompt slots must be {MASK}")
        counts.append(len(row))
    return title, counts


def parse_keyword_output(text: str, counts: Sequence[int] | None = None) -> list[list[str]]:
    """Recover one word per mask; ``counts`` (from the prompt) is enforced if given."""
    _, rows = _split(text)
    for i, row in enumerate(rows, 1):
        if MASK in row:
            raise PromptFormatError(f"line {i}: unfilled {MASK} in output")
        if counts is not None and len(row) != counts[i - 1]:
            raise PromptFormatError(f"line {i}: expected {counts[i - 1]} words, got {len(row)}")
    return rows


# --- planners ---------------------------------------------------------------


class KeywordPlanner(Protocol):
    def plan(self, title: str, counts: Sequence[int]) -> list[list[str]]: ...


class CommandPlanner:
    """Runs an external planner: masked prompt on stdin, keyword output on stdout."""

    def __init__(self, command: Sequence[str], timeout: float = 600.0) -> None:
        self.command = list(command)
        self.timeout = timeout

    def plan(self, title: str, counts: Sequence[int]) -> list[list[str]]:
        prompt = serialize_masked_prompt(title, counts)
        try:
            res = subprocess.run(
                self.command, input=prompt, capture_output=True, text=True,
                timeout=self.timeout, check=True,
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise PlannerError(f"planner command failed: {exc}") from exc
        return parse_keyword_output(res.stdout, counts)


def _title_overlap(title_tokens: set[str], doc: Sequence[str]) -> int:
    doc_tokens = {t for line in doc for t in tokenize(line)}
    return len(title_tokens & doc_tokens)


class ReferencePlanner:
    """Retrieval planner: RAKE keywords of the corpus document closest to the title."""

    def __init__(self, corpus: Sequence[Sequence[str]], lex: PronunciationLexicon) -> None:
        if not corpus:
            raise PlannerError("empty corpus")
        self.corpus = [list(doc) for doc in corpus if doc]
        if not self.corpus:
            raise PlannerError("empty corpus")
        self.lex = lex

    def choose_document(self, title: str) -> list[str]:
        title_tokens = set(tokenize(title)) - stopwords()
        best, best_score = self.corpus[0], -1
        for doc in self.corpus:
            score = _title_overlap(title_tokens, doc)
            if score > best_score:
                best, best_score = doc, score
        return best

    def plan_scored(self, title: str, counts: Sequence[int]) -> list[list[tuple[str, float]]]:
        doc = self.choose_document(title)
        lines = [doc[i % len(doc)] for i in range(len(counts))]
        ranked = ranked_line_words(lines)
        doc_scores = rake_scores(lines)
        pool = sorted(
            (w for w in doc_scores if w in self.lex),
            key=lambda w: (-doc_scores[w], w),
        )
        out = []
        for i, n in enumerate(counts):
            line_pos = {w: j for j, w in enumerate(_line_order(lines[i]))}
            chosen = [(w, s) for w, s in ranked[i] if w in self.lex][:n]
            chosen.sort(key=lambda ws: line_pos.get(ws[0], len(line_pos)))
            used = {w for w, _ in chosen}
            for w in pool:
                if len(chosen) >= n:
                    break
                if w not in used:
                    chosen.append((w, doc_scores[w]))
                    used.add(w)
            if len(chosen) < n:
                raise PlannerError(f"line {i + 1}: document too small to fill {n} keyword slots")
            out.append(chosen)
        return out

    def plan(self, title: str, counts: Sequence[int]) -> list[list[str]]:
        return [[w for w, _ in row] for row in self.plan_scored(title, counts)]


def sketch_from_keywords(
    title: str,
    keywords: Sequence[Sequence[str]],
    scores: Sequence[Mapping[str, float]] | None = None,
) -> Sketch:
    lines = []
    for i, row in enumerate(keywords):
        sc = dict(scores[i]) if scores is not None else {}
        lines.append(LineSketch(tuple(w.lower() for w in row), scores=sc))
    return Sketch(title, tuple(lines))


def plan_reference(
    title: str,
    lex: PronunciationLexicon,
    corpus: Sequence[Sequence[str]],
    scheme: RhymeScheme,
) -> Sketch:
    planner = ReferencePlanner(corpus, lex)
    scored = planner.plan_scored(title, slot_counts(scheme))
    return sketch_from_keywords(
        title, [[w for w, _ in row] for row in scored], [dict(row) for row in scored]
    )


def plan_with(planner: KeywordPlanner, title: str, scheme: RhymeScheme) -> Sketch:
    counts = slot_counts(scheme)
    keywords = planner.plan(title, counts)
    if [len(row) for row in keywords] != counts:
        raise PlannerError("planner output does not match the requested slot counts")
    return sketch_from_keywords(title, keywords)


def iter_keywords(sk: Sketch) -> Iterable[str]:
    for ls in sk.lines:
        yield from ls.content_words
        if ls.rhyme_word:
            yield ls.rhyme_word
