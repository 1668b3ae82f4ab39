"""Rhyme-slot filling: initial rhyme words from the plan, partners by sampling."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AssignmentError, RenormalizationError
from .lm import END, LanguageModel, NextWordDistribution, SamplerParams
from .meter import RhymeScheme, fits_line_end
from .phonetics import PronunciationLexicon, classify_rhyme, rhyme_candidates
from .sketch import LineSketch, Sketch, slot_counts, stopwords

INITIAL, SAMPLED, FALLBACK = "initial", "sampled", "fallback"


def renormalize(d: NextWordDistribution, candidates: Sequence[str] | set[str] | frozenset[str]) -> NextWordDistribution:
    """Restrict ``d`` to ``candidates`` and rescale to a proper distribution."""
    if not candidates:
        raise RenormalizationError("empty candidate set")
    vocab = d.vocab
    idx = sorted({vocab._index[w] for w in candidates if w in vocab})
    probs = np.zeros_like(d.probs)
    if idx:
        sel = d.probs[idx]
        total = float(sel.sum())
        if total > 0:
            probs[idx] = sel / total
            probs.flags.writeable = False
            return NextWordDistribution(vocab, probs)
    raise RenormalizationError("no candidate carries probability mass")


def rhyme_context(ls: LineSketch) -> list[str]:
    """Reverse context used to score a partner line's rhyme word."""
    return [END, *reversed(ls.content_words)]


@dataclass
class RhymeAssignment:
    sketch: Sketch
    rhyme_words: tuple[str, ...]
    provenance: tuple[str, ...]
    candidates: dict[str, frozenset[str]] = field(default_factory=dict)


def _sample(d: NextWordDistribution, rng: random.Random) -> str:
    nz = np.flatnonzero(d.probs)
    cum = np.cumsum(d.probs[nz])
    j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return d.vocab.word(int(nz[min(j, nz.size - 1)]))


def _try_letter(
    initial: str,
    partners: list[int],
    lines: list[LineSketch],
    taken: set[str],
    lex: PronunciationLexicon,
    model: LanguageModel,
    rng: random.Random,
) -> tuple[frozenset[str], dict[int, tuple[str, str]]] | None:
    # function words rhyme only through their weak readings, so they are left out
    stop = stopwords()
    pool = frozenset(
        w for w in rhyme_candidates(initial, lex) if w not in stop and fits_line_end(w, lex)
    )
    if not pool:
        return None
    chosen: dict[int, tuple[str, str]] = {}
    for j in partners:
        ls = lines[j - 1]
        picked = [w for w, _ in chosen.values()]
        cands = {
            w for w in pool
            if w not in taken and w != initial and w not in picked and w not in ls.content_words
        }
        # every pair inside a letter group is checked, not just pairs with the initial word
        cands = {w for w in cands if all(classify_rhyme(w, other, lex) for other in picked)}
        if not cands:
            return None
        d = model.next_distribution(rhyme_context(ls))
        try:
            word, how = _sample(renormalize(d, cands), rng), SAMPLED
        except RenormalizationError:
            word, how = rng.choice(sorted(cands)), FALLBACK
        chosen[j] = (word, how)
    return pool, chosen


def assign_rhymes(
    sk: Sketch,
    scheme: RhymeScheme,
    lex: PronunciationLexicon,
    model: LanguageModel,
    params: SamplerParams | None = None,
    rng: random.Random | None = None,
) -> RhymeAssignment:
    """Fill every rhyme slot of a freshly planned sketch.

    For each scheme letter the last keyword of its first line becomes the
    initial rhyme word (falling back to the earlier keywords when it has no
    usable rhymes); the letter's other lines sample from the model
    distribution renormalised over the rhyme candidates.
    """
    params = params or SamplerParams()
    rng = rng if rng is not None else random.Random(params.seed)
    expected = slot_counts(scheme)
    if sk.slot_counts() != expected:
        raise AssignmentError(0, f"sketch slot layout {sk.slot_counts()} does not match {expected}")

    lines = list(sk.lines)
    rhyme_words = [""] * 14
    provenance = [""] * 14
    taken: set[str] = set()
    used_candidates: dict[str, frozenset[str]] = {}

    for letter, group in scheme.groups().items():
        first, partners = group[0], group[1:]
        words = lines[first - 1].content_words
        result = None
        for pos in range(len(words) - 1, -1, -1):
            initial = words[pos]
            if initial not in lex or initial in taken or not fits_line_end(initial, lex):
                continue
            result = _try_letter(initial, partners, lines, taken, lex, model, rng)
            if result is not None:
                break
        if result is None:
            raise AssignmentError(first, f"no keyword of {list(words)} yields rhyme partners")
        pool, chosen = result
        rest = words[:pos] + words[pos + 1:]
        lines[first - 1] = replace(lines[first - 1], content_words=rest, rhyme_word=initial)
        rhyme_words[first - 1], provenance[first - 1] = initial, INITIAL
        taken.add(initial)
        for j, (word, how) in chosen.items():
            lines[j - 1] = replace(lines[j - 1], rhyme_word=word)
            rhyme_words[j - 1], provenance[j - 1] = word, how
            taken.add(word)
        used_candidates[letter] = pool

    out = replace(sk, lines=tuple(lines), rhyme_provenance=tuple(provenance))
    return RhymeAssignment(out, tuple(rhyme_words), tuple(provenance), used_candidates)
