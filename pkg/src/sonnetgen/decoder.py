"""Meter- and keyword-constrained reverse decoding of sonnet lines.

Each line is built right to left.  Beams start from the rhyme word placed
at the end of every template it can close, then grow leftward with words
proposed by the language model plus the line's outstanding content words.
A word survives only if one of its pronunciations fills the next template
slots exactly, so every finished beam scans by construction.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import random
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .errors import LineGenerationError, SamplingExhausted, SonnetGenerationError
from .lm import END, START, LanguageModel, NextWordDistribution, SamplerParams, sample_many, violates_no_repeat
from .meter import RhymeScheme, StressTemplate, line_templates, pattern_fits
from .phonetics import Pronunciation, PronunciationLexicon, StressMark, stress_pattern
from .sketch import LineSketch, Sketch

log = logging.getLogger(__name__)

# Log-probability charged for words the model has never seen.
OOV_LOGPROB = math.log(1e-9)


@dataclass(frozen=True)
class DecodeParams:
    sampler: SamplerParams = field(default_factory=SamplerParams)
    samples_per_step: int = 10
    beam_width: int = 8
    retry_budget: int = 8

    def __post_init__(self) -> None:
        if min(self.samples_per_step, self.beam_width, self.retry_budget) < 1:
            raise ValueError("decode parameters must be positive")

    def doubled(self) -> "DecodeParams":
        return replace(self, samples_per_step=2 * self.samples_per_step, beam_width=2 * self.beam_width)


@dataclass(frozen=True)
class Requirement:
    """A content word, or a fixed phrase emitted as one block."""

    words: tuple[str, ...]  # left to right
    score: float = 0.0

    @property
    def is_phrase(self) -> bool:
        return len(self.words) > 1


@dataclass(frozen=True)
class BeamState:
    tokens: tuple[str, ...]  # rightmost first
    prons: tuple[Pronunciation, ...]
    stress_consumed: int
    remaining: tuple[int, ...]  # indices of unmet requirements
    logprob: float
    template: StressTemplate

    @property
    def words(self) -> tuple[str, ...]:
        """The line read left to right."""
        return self.tokens[::-1]

    @property
    def complete(self) -> bool:
        return self.stress_consumed == len(self.template)


@dataclass(frozen=True)
class GeneratedLine:
    words: tuple[str, ...]
    template: str
    logprob: float
    relaxed: bool = False
    dropped: tuple[str, ...] = ()


@dataclass
class Sonnet:
    title: str
    scheme: RhymeScheme
    lines: list[GeneratedLine]
    seed: int | None = None
    params: DecodeParams | None = None
    metadata: dict = field(default_factory=dict)

    def to_text(self) -> str:
        out, i = [], 0
        for size in self.scheme.stanzas:
            block = self.lines[i:i + size]
            out.append("\n".join(_render(ln.words) for ln in block))
            i += size
        return "\n\n".join(out) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "scheme": self.scheme.letters,
            "lines": [
                {
                    "text": _render(ln.words),
                    "words": list(ln.words),
                    "template": ln.template,
                    "logprob": ln.logprob,
                    "relaxed": ln.relaxed,
                    "dropped": list(ln.dropped),
                }
                for ln in self.lines
            ],
            "provenance": {
                "seed": self.seed,
                "params": asdict(self.params) if self.params else None,
                **self.metadata,
            },
        }


def _render(words: Sequence[str]) -> str:
    text = " ".join(words)
    return text[:1].upper() + text[1:]


def requirements(ls: LineSketch) -> list[Requirement]:
    """Content words still to place, with fixed phrases replacing their anchors."""
    anchored = {p.anchor: p for p in ls.fixed_phrases}
    out = []
    for j, w in enumerate(ls.content_words):
        score = ls.scores.get(w, 0.0)
        if j in anchored:
            out.append(Requirement(anchored[j].words, score))
        else:
            out.append(Requirement((w,), score))
    return out


@lru_cache(maxsize=8)
def lexicon_patterns(lex: PronunciationLexicon) -> tuple[tuple[StressMark, ...], ...]:
    """Distinct stress patterns short enough to sit inside a line."""
    longest = max(len(t) for t in line_templates())
    found = {
        pat for w in lex.words() for p in lex.lookup(w)
        if len(pat := stress_pattern(p)) <= longest
    }
    return tuple(sorted(found, key=lambda pat: (len(pat), [m.value for m in pat])))


ContextFn = Callable[[Sequence[Sequence[str]], Sequence[str]], list[str]]
ProposeFn = Callable[[BeamState, NextWordDistribution], Iterable[str]]


def default_context(prev_lines: Sequence[Sequence[str]], tokens: Sequence[str]) -> list[str]:
    """Reverse context for the next word; earlier lines are ignored by n-gram models."""
    return [END, *tokens]


def _logp(d: NextWordDistribution, w: str) -> float:
    p = d.get(w)
    return math.log(p) if p > 0 else OOV_LOGPROB


class _LineSearch:
    def __init__(
        self,
        rhyme: str,
        reqs: Sequence[Requirement],
        model: LanguageModel,
        lex: PronunciationLexicon,
        params: DecodeParams,
        prev_lines: Sequence[Sequence[str]],
        context: ContextFn,
    ) -> None:
        self.rhyme = rhyme
        self.reqs = list(reqs)
        self.model = model
        self.lex = lex
        self.params = params
        self.prev_lines = prev_lines
        self.context = context
        n = params.sampler.no_repeat_ngram_size
        self.ngram = n
        # n-grams of earlier lines, stored right to left like the beams
        self.history: set[tuple[str, ...]] = set()
        for line in prev_lines:
            rev = list(line)[::-1]
            for i in range(len(rev) - n + 1):
                self.history.add(tuple(rev[i:i + n]))
        self._patterns: dict[str, list[tuple[tuple[StressMark, ...], Pronunciation]]] = {}
        self.min_syllables = [
            sum(min(len(p) for p, _ in self.patterns(w)) for w in r.words) for r in self.reqs
        ]
        self.req_blocks = [
            {tuple(m for pat, _ in combo for m in pat) for combo in itertools.product(*(self.patterns(w) for w in r.words))}
            for r in self.reqs
        ]
        self.fillers = lexicon_patterns(lex)
        self._live: dict[tuple[tuple[StressMark, ...], int, frozenset[int]], bool] = {}

    def patterns(self, w: str) -> list[tuple[tuple[StressMark, ...], Pronunciation]]:
        got = self._patterns.get(w)
        if got is None:
            seen: dict[tuple[StressMark, ...], Pronunciation] = {}
            for p in self.lex.lookup(w):
                seen.setdefault(stress_pattern(p), p)
            got = self._patterns[w] = list(seen.items())
        return got

    def seeds(self, templates: Sequence[StressTemplate]) -> list[BeamState]:
        d = self.model.next_distribution(self.context(self.prev_lines, ()))
        lp = _logp(d, self.rhyme)
        out = []
        for t in templates:
            L = len(t)
            for pattern, pron in self.patterns(self.rhyme):
                k = len(pattern)
                if k <= L and pattern_fits(pattern, t.marks[L - k:]):
                    out.append(BeamState((self.rhyme,), (pron,), k, tuple(range(len(self.reqs))), lp, t))
        return out

    def _repeats(self, tokens: Sequence[str], w: str) -> bool:
        n = self.ngram
        if violates_no_repeat(tokens, w, n):
            return True
        if len(tokens) + 1 >= n:
            gram = tuple(tokens[len(tokens) - n + 1:]) + (w,) if n > 1 else (w,)
            return gram in self.history
        return False

    def _feasible(self, remaining: Sequence[int], marks: tuple[StressMark, ...], free: int) -> bool:
        """Whether ``marks[:free]`` can still be tiled with every outstanding requirement."""
        if sum(self.min_syllables[i] for i in remaining) > free:
            return False
        return self._tileable(marks, free, frozenset(remaining))

    def _tileable(self, marks: tuple[StressMark, ...], end: int, reqs: frozenset[int]) -> bool:
        if end == 0:
            return not reqs
        key = (marks, end, reqs)
        got = self._live.get(key)
        if got is None:
            got = False
            for i in reqs:
                for block in self.req_blocks[i]:
                    k = len(block)
                    if k <= end and pattern_fits(block, marks[end - k:end]) and self._tileable(marks, end - k, reqs - {i}):
                        got = True
                        break
                if got:
                    break
            if not got:
                for block in self.fillers:
                    k = len(block)
                    if k <= end and pattern_fits(block, marks[end - k:end]) and self._tileable(marks, end - k, reqs):
                        got = True
                        break
            self._live[key] = got
        return got

    def _place(self, state: BeamState, words: Sequence[str], met: int | None) -> list[BeamState]:
        """Place ``words`` (left to right) immediately left of the beam."""
        marks = state.template.marks
        out = []
        for combo in itertools.product(*(self.patterns(w) for w in words)):
            k = sum(len(pat) for pat, _ in combo)
            free = len(marks) - state.stress_consumed
            if k > free:
                continue
            flat = [m for pat, _ in combo for m in pat]
            if not pattern_fits(flat, marks[free - k:free]):
                continue
            tokens = list(state.tokens)
            logprob = state.logprob
            ok = True
            for w in reversed(words):
                if self._repeats(tokens, w):
                    ok = False
                    break
                d = self.model.next_distribution(self.context(self.prev_lines, tokens))
                logprob += _logp(d, w)
                tokens.append(w)
            if not ok:
                continue
            remaining = tuple(i for i in state.remaining if i != met)
            if not self._feasible(remaining, marks, free - k):
                continue
            prons = state.prons + tuple(p for _, p in reversed(combo))
            out.append(BeamState(tuple(tokens), prons, state.stress_consumed + k, remaining, logprob, state.template))
        return out

    def expand(self, state: BeamState, proposals: Iterable[str]) -> list[BeamState]:
        """All legal one-step extensions: proposed words plus unmet requirements."""
        singles: dict[str, int | None] = {}
        phrases: list[int] = []
        for i in state.remaining:
            r = self.reqs[i]
            if r.is_phrase:
                phrases.append(i)
            else:
                singles.setdefault(r.words[0], i)
        for w in proposals:
            if w not in singles and w in self.lex:
                singles[w] = None
        out: list[BeamState] = []
        for w, met in singles.items():
            out.extend(self._place(state, (w,), met))
        for i in phrases:
            out.extend(self._place(state, self.reqs[i].words, i))
        return out

    def finish(self, state: BeamState) -> BeamState:
        d = self.model.next_distribution(self.context(self.prev_lines, state.tokens))
        return replace(state, logprob=state.logprob + _logp(d, START))

    def run(
        self,
        templates: Sequence[StressTemplate],
        propose: ProposeFn,
        beam_width: int,
    ) -> list[BeamState]:
        active = [
            s for s in self.seeds(templates)
            if self._feasible(s.remaining, s.template.marks, len(s.template) - s.stress_consumed)
        ]
        done: list[BeamState] = []
        for s in list(active):
            if s.complete:
                active.remove(s)
                if not s.remaining:
                    done.append(self.finish(s))
        while active:
            nxt: list[BeamState] = []
            for state in active:
                d = self.model.next_distribution(self.context(self.prev_lines, state.tokens))
                for child in self.expand(state, propose(state, d)):
                    if child.complete:
                        if not child.remaining:
                            done.append(self.finish(child))
                    else:
                        nxt.append(child)
            nxt.sort(key=lambda s: (-s.logprob, s.template.name, s.tokens))
            active = nxt[:beam_width]
        done.sort(key=lambda s: (-s.logprob, s.template.name, s.tokens))
        return done


def _sampling_proposer(params: DecodeParams, rng: random.Random) -> ProposeFn:
    def propose(state: BeamState, d: NextWordDistribution) -> list[str]:
        try:
            words = sample_many(d, params.sampler, params.samples_per_step, rng=rng)
        except SamplingExhausted:
            return []
        return list(dict.fromkeys(words))

    return propose


def exhaustive_proposer(model: LanguageModel) -> ProposeFn:
    """Propose every ordinary vocabulary word; used to audit the pruning rules."""
    words = list(model.vocab.words)
    return lambda state, d: words


def search_line(
    ls: LineSketch,
    model: LanguageModel,
    lex: PronunciationLexicon,
    params: DecodeParams,
    rng: random.Random | None = None,
    prev_lines: Sequence[Sequence[str]] = (),
    propose: ProposeFn | None = None,
    context: ContextFn = default_context,
    reqs: Sequence[Requirement] | None = None,
) -> list[BeamState]:
    """One beam-search pass; returns every completed valid beam, best first."""
    if not ls.rhyme_word:
        raise LineGenerationError("line has no rhyme word")
    rng = rng if rng is not None else random.Random(params.sampler.seed)
    reqs = requirements(ls) if reqs is None else list(reqs)
    search = _LineSearch(ls.rhyme_word, reqs, model, lex, params, prev_lines, context)
    templates = [t for t in line_templates() if any(s.template == t for s in search.seeds([t]))]
    if not templates:
        raise LineGenerationError(f"rhyme word {ls.rhyme_word!r} cannot end any line template")
    propose = propose or _sampling_proposer(params, rng)
    return search.run(templates, propose, params.beam_width)


def _placeable(req: Requirement, rhyme: str, lex: PronunciationLexicon) -> bool:
    """Whether the requirement fits somewhere left of the rhyme word in any template."""
    search_patterns = []
    for w in req.words:
        search_patterns.append({stress_pattern(p) for p in lex.lookup(w)})
    blocks = {tuple(m for pat in combo for m in pat) for combo in itertools.product(*search_patterns)}
    rhyme_lens = {len(stress_pattern(p)) for p in lex.lookup(rhyme)}
    for t in line_templates():
        for r in rhyme_lens:
            span = len(t) - r
            for block in blocks:
                for start in range(0, span - len(block) + 1):
                    if pattern_fits(block, t.marks[start:start + len(block)]):
                        return True
    return False


def generate_line(
    ls: LineSketch,
    prev_lines: Sequence[Sequence[str]],
    model: LanguageModel,
    lex: PronunciationLexicon,
    params: DecodeParams,
    rng: random.Random,
    context: ContextFn = default_context,
) -> GeneratedLine:
    """Decode one line, relaxing the search when it keeps failing.

    Attempts run ``retry_budget`` times at the given width, then with beam
    width and samples doubled.  If that still fails, the lowest-scored
    content requirement is dropped and the doubled search repeats.
    """
    if not ls.rhyme_word:
        raise LineGenerationError("line has no rhyme word")
    lex.lookup(ls.rhyme_word)
    for w in ls.content_words:
        lex.lookup(w)
    for p in ls.fixed_phrases:
        for w in p.words:
            lex.lookup(w)

    reqs = requirements(ls)
    dropped: list[str] = []
    # requirements that cannot sit anywhere in a line are dropped up front
    for r in list(reqs):
        if not _placeable(r, ls.rhyme_word, lex):
            reqs.remove(r)
            dropped.append(" ".join(r.words))

    def attempt(p: DecodeParams) -> BeamState | None:
        for _ in range(p.retry_budget):
            done = search_line(ls, model, lex, p, rng, prev_lines, context=context, reqs=reqs)
            if done:
                return done[0]
        return None

    best = None if dropped else attempt(params)
    wide = params.doubled()
    while best is None:
        best = attempt(wide)
        if best is not None:
            break
        if not reqs:
            raise LineGenerationError(f"no valid line ends with {ls.rhyme_word!r}")
        weakest = min(range(len(reqs)), key=lambda i: (reqs[i].score, -i))
        dropped.append(" ".join(reqs.pop(weakest).words))
        log.info("relaxing line ending %r: dropped %s", ls.rhyme_word, dropped[-1])
    return GeneratedLine(best.words, best.template.name, best.logprob, bool(dropped), tuple(dropped))


def generate_sonnet(
    sk: Sketch,
    scheme: RhymeScheme,
    model: LanguageModel,
    lex: PronunciationLexicon,
    params: DecodeParams,
    rng: random.Random | None = None,
    context: ContextFn = default_context,
) -> Sonnet:
    for i, ls in enumerate(sk.lines, 1):
        if not ls.rhyme_word:
            raise SonnetGenerationError(i, "sketch line has no rhyme word")
    seed = params.sampler.seed
    rng = rng if rng is not None else random.Random(seed)
    lines: list[GeneratedLine] = []
    for i, ls in enumerate(sk.lines, 1):
        try:
            line = generate_line(ls, [ln.words for ln in lines], model, lex, params, rng, context)
        except LineGenerationError as exc:
            raise SonnetGenerationError(i, str(exc)) from exc
        lines.append(line)
    return Sonnet(sk.title, scheme, lines, seed, params)
