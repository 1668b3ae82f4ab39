"""Toy vocabulary with invented pronunciations and a brute-force line enumerator."""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from sonnetgen.decoder import DecodeParams, exhaustive_proposer, search_line
from sonnetgen.lm import SamplerParams, train
from sonnetgen.meter import line_templates
from sonnetgen.phonetics import PronunciationLexicon, parse_lexicon, stress_pattern
from sonnetgen.sketch import LineSketch

CONS = "B D F G K L M N P S T V Z".split()
VOW = "AA IY UW EH OW".split()

# word -> stress digit strings, one per pronunciation
TOY: dict[str, list[str]] = {
    "above": ["01"], "afternoon": ["201"], "again": ["01"], "amora": ["010"],
    "away": ["01"], "belong": ["01"], "below": ["01"], "beneath": ["01"],
    "destiny": ["100"], "eternity": ["0100"], "evermore": ["102"], "forgotten": ["010"],
    "golden": ["10"], "hollow": ["10"], "imagine": ["0100"], "lantern": ["10"],
    "melody": ["100"], "morning": ["10"], "ocean": ["10"], "present": ["10", "01"],
    "remember": ["010"], "silently": ["100"], "sorrow": ["10"], "suddenly": ["100"],
    "tomorrow": ["010"], "tonight": ["01"], "under": ["10"], "wandering": ["100", "10"],
}
RHYME, CONTENT = "again", ("afternoon", "forgotten")

# a free monosyllable makes the live frontier outgrow the vocabulary
CROWDED: dict[str, list[str]] = {
    "delight": ["01"], "remember": ["010"], "sorrow": ["10"], "evermore": ["102"],
    "tomorrow": ["010"], "silently": ["100"], "above": ["01"], "forgotten": ["010"],
    "beneath": ["01"], "destiny": ["100"], "returning": ["010"], "wandering": ["100", "10"],
    "present": ["10", "01"], "night": ["1"],
}
CROWDED_RHYME, CROWDED_CONTENT = "delight", ("remember", "sorrow")


def toy_lexicon(vocab: Mapping[str, Sequence[str]]) -> PronunciationLexicon:
    lines = []
    for n, (w, alts) in enumerate(sorted(vocab.items())):
        for j, digits in enumerate(alts):
            phones = []
            for i, d in enumerate(digits):
                phones += [CONS[(n + i) % len(CONS)], VOW[(n * 3 + i) % len(VOW)] + d]
            head = w.upper() if j == 0 else f"{w.upper()}({j})"
            lines.append(f"{head}  {' '.join(phones)}")
    return parse_lexicon(lines)


def toy_model(vocab: Mapping[str, Sequence[str]], seed: int = 3):
    words = sorted(vocab)
    r = random.Random(seed)
    text = "\n".join(" ".join(r.choice(words) for _ in range(6)) for _ in range(40))
    return train(text)


def enumerate_lines(
    vocab: Mapping[str, Sequence[str]],
    rhyme: str,
    content: Sequence[str],
    lex: PronunciationLexicon,
    no_repeat: int = 3,
) -> set[tuple[str, ...]]:
    """Every valid line, built left to right over every template.

    A line is valid when it scans, ends with ``rhyme``, uses each content
    word before the rhyme, and repeats no ``no_repeat``-gram.
    """
    words = sorted(vocab)
    pats = {w: {tuple(m.value for m in stress_pattern(p)) for p in lex.lookup(w)} for w in words}
    found: set[tuple[str, ...]] = set()

    def fits(pat, marks):
        return all(p == "A" or p == m for p, m in zip(pat, marks))

    def rec(seq, pos, marks):
        for w in words:
            for pat in pats[w]:
                end = pos + len(pat)
                if end > len(marks) or not fits(pat, marks[pos:end]):
                    continue
                nxt = seq + (w,)
                n = no_repeat
                if len(nxt) >= n and any(nxt[-n:] == nxt[i:i + n] for i in range(len(nxt) - n)):
                    continue
                if end == len(marks):
                    if w == rhyme and all(c in nxt[:-1] for c in content):
                        found.add(nxt)
                else:
                    rec(nxt, end, marks)

    for t in line_templates():
        rec((), 0, tuple(m.value for m in t.marks))
    return found


def decoder_lines(vocab, rhyme, content, lex, model, beam_width: int) -> set[tuple[str, ...]]:
    params = DecodeParams(sampler=SamplerParams(seed=0), beam_width=beam_width)
    ls = LineSketch(tuple(content), rhyme)
    done = search_line(ls, model, lex, params, propose=exhaustive_proposer(model))
    return {s.words for s in done}
