"""Language-model contract and a reference reverse n-gram model.

The model reads sentences right to left: ``"a b"`` is trained as the
sequence ``</s> b a <s>``, so the first context of every line is the
line-end marker followed by the rhyme word.  Smoothing is interpolated
absolute discounting with Kneser-Ney continuation counts for lower orders.
"""

from __future__ import annotations

import json
import math
import random
import re
from collections import OrderedDict, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, Iterable, Iterator, Mapping, Protocol, Sequence

import numpy as np

from .errors import SamplingExhausted, TrainingError

START = "<s>"
END = "</s>"
UNK = "<unk>"
SPECIALS = (END, START, UNK)

MODEL_FORMAT = "sonnetgen-reverse-ngram"
MODEL_VERSION = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")
_SENTENCE_END_RE = re.compile(r"[.!?]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def sentences(text: str) -> Iterator[list[str]]:
    """Token lists split on line breaks and sentence-final punctuation."""
    for line in text.splitlines():
        for chunk in _SENTENCE_END_RE.split(line):
            toks = tokenize(chunk)
            if toks:
                yield toks


def split_documents(text: str) -> list[list[str]]:
    """Blank-line separated documents, each a list of nonempty lines."""
    docs, current = [], []
    for line in text.splitlines():
        if line.strip():
            current.append(line.strip())
        elif current:
            docs.append(current)
            current = []
    if current:
        docs.append(current)
    return docs


@dataclass(frozen=True)
class SamplerParams:
    top_k: int = 50
    temperature: float = 0.85
    no_repeat_ngram_size: int = 3
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.no_repeat_ngram_size < 1:
            raise ValueError("no_repeat_ngram_size must be >= 1")


class Vocabulary:
    """Dense index over specials followed by sorted words."""

    def __init__(self, words: Iterable[str]) -> None:
        ordinary = sorted(set(words) - set(SPECIALS))
        self._words: tuple[str, ...] = SPECIALS + tuple(ordinary)
        self._index = {w: i for i, w in enumerate(self._words)}
        self.unk_id = self._index[UNK]
        mask = np.ones(len(self._words), dtype=bool)
        mask[[self._index[s] for s in SPECIALS]] = False
        mask.flags.writeable = False
        self.generable = mask

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: object) -> bool:
        return word in self._index and word not in SPECIALS

    def __iter__(self) -> Iterator[str]:
        return iter(self._words)

    def index(self, word: str) -> int:
        return self._index.get(word, self.unk_id)

    def word(self, i: int) -> str:
        return self._words[i]

    @property
    def words(self) -> tuple[str, ...]:
        """Ordinary words only."""
        return self._words[len(SPECIALS):]


class NextWordDistribution:
    """Probability of each vocabulary entry as the next (leftward) word."""

    __slots__ = ("vocab", "probs")

    def __init__(self, vocab: Vocabulary, probs: np.ndarray) -> None:
        self.vocab = vocab
        self.probs = probs

    def __getitem__(self, word: str) -> float:
        i = self.vocab._index.get(word)
        return 0.0 if i is None else float(self.probs[i])

    def get(self, word: str, default: float = 0.0) -> float:
        i = self.vocab._index.get(word)
        return default if i is None else float(self.probs[i])

    def items(self) -> Iterator[tuple[str, float]]:
        for i in np.flatnonzero(self.probs):
            yield self.vocab.word(int(i)), float(self.probs[i])

    def as_dict(self) -> dict[str, float]:
        return dict(self.items())

    def total(self) -> float:
        return float(math.fsum(self.probs))


class LanguageModel(Protocol):
    """Word-in/word-out next-token contract used by rhyme and decoding.

    ``reverse_context`` lists tokens in generation order: the first item was
    generated first (usually the line-end marker), the last item is the
    leftmost word produced so far.
    """

    vocab: Vocabulary

    def next_distribution(self, reverse_context: Sequence[str]) -> NextWordDistribution: ...


class _Level:
    __slots__ = ("idx", "disc", "gamma")

    def __init__(self, idx: np.ndarray, disc: np.ndarray, gamma: float) -> None:
        self.idx, self.disc, self.gamma = idx, disc, gamma


class ReverseNGramModel:
    CACHE_SIZE = 1024

    def __init__(
        self,
        order: int,
        discount: float,
        vocab: Vocabulary,
        counts: Sequence[dict[tuple[int, ...], dict[int, int]]],
        metadata: Mapping[str, Any] | None = None,
    ) -> None:
        if order < 1:
            raise ValueError("order must be >= 1")
        if len(counts) != order:
            raise ValueError("need one count table per order")
        self.order = order
        self.discount = discount
        self.vocab = vocab
        # counts[k-1] maps a (k-1)-token history to adjusted follower counts
        self.counts = counts
        # free-form provenance written into the file header
        self.metadata = dict(metadata or {})
        self._levels: list[dict[tuple[int, ...], _Level]] = [
            self._compile(table) for table in counts
        ]
        self._base = self._unigram()
        self._cache: OrderedDict[tuple[int, ...], np.ndarray] = OrderedDict()

    def _compile(self, table: dict[tuple[int, ...], dict[int, int]]) -> dict[tuple[int, ...], _Level]:
        d = self.discount
        out = {}
        for h, followers in table.items():
            idx = np.fromiter(followers.keys(), dtype=np.int64, count=len(followers))
            c = np.fromiter(followers.values(), dtype=np.float64, count=len(followers))
            total = c.sum()
            out[h] = _Level(idx, np.maximum(c - d, 0.0) / total, d * len(c) / total)
        return out

    def _unigram(self) -> np.ndarray:
        # START is a valid prediction; END and UNK never are.
        targets = self.vocab.generable.copy()
        targets[self.vocab.index(START)] = True
        base = np.zeros(len(self.vocab))
        level = self._levels[0].get(())
        if level is None:
            base[targets] = 1.0 / targets.sum()
            return base
        base[targets] = level.gamma / targets.sum()
        base[level.idx] += level.disc
        return base

    def _history(self, reverse_context: Sequence[str]) -> tuple[int, ...]:
        if self.order == 1:
            return ()
        tail = reverse_context[-(self.order - 1):]
        return tuple(self.vocab.index(w) for w in tail)

    def next_distribution(self, reverse_context: Sequence[str]) -> NextWordDistribution:
        h = self._history(reverse_context)
        probs = self._cache.get(h)
        if probs is None:
            probs = self._base.copy()
            for k in range(1, len(h) + 1):
                level = self._levels[k].get(h[len(h) - k:])
                if level is not None:
                    probs *= level.gamma
                    probs[level.idx] += level.disc
            probs.flags.writeable = False
            self._cache[h] = probs
            if len(self._cache) > self.CACHE_SIZE:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(h)
        return NextWordDistribution(self.vocab, probs)

    # --- persistence -------------------------------------------------------

    def dumps(self) -> str:
        vocab = self.vocab
        header = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "order": self.order,
            "discount": self.discount,
            "vocab_size": len(vocab),
        }
        if self.metadata:
            header["meta"] = self.metadata
        lines = [json.dumps(header, sort_keys=True), json.dumps({"vocab": list(vocab.words)})]
        for k, table in enumerate(self.counts, 1):
            rows = []
            for h, followers in table.items():
                hw = [vocab.word(i) for i in h]
                cw = sorted((vocab.word(i), c) for i, c in followers.items())
                rows.append((hw, cw))
            rows.sort()
            for hw, cw in rows:
                lines.append(json.dumps({"n": k, "h": hw, "c": cw}))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "ReverseNGramModel":
        rows = text.splitlines()
        try:
            header = json.loads(rows[0])
            if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
                raise ValueError(f"unsupported model header {header!r}")
            vocab = Vocabulary(json.loads(rows[1])["vocab"])
            if len(vocab) != header["vocab_size"]:
                raise ValueError("vocab_size does not match stored vocabulary")
            order = header["order"]
            counts: list[dict[tuple[int, ...], dict[int, int]]] = [{} for _ in range(order)]
            for row in rows[2:]:
                rec = json.loads(row)
                h = tuple(vocab.index(w) for w in rec["h"])
                counts[rec["n"] - 1][h] = {vocab.index(w): c for w, c in rec["c"]}
        except (IndexError, KeyError, json.JSONDecodeError) as exc:
            raise ValueError(f"malformed model file: {exc}") from exc
        return cls(order, header["discount"], vocab, counts, header.get("meta"))

    @classmethod
    def load(cls, path: str | Path) -> "ReverseNGramModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def reversed_sequence(tokens: Sequence[str]) -> list[str]:
    return [END, *reversed(tokens), START]


def train(
    corpus: str | IO[str] | Iterable[str],
    order: int = 3,
    discount: float = 0.75,
) -> ReverseNGramModel:
    """Count a reverse n-gram model from plain prose.

    ``corpus`` may be a string, a text stream, or an iterable of text chunks.
    The highest order keeps raw counts, as do n-grams that begin at the
    line-end marker; every other n-gram uses the number of distinct words
    seen to its left in the reversed stream.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if isinstance(corpus, str):
        chunks: Iterable[str] = [corpus]
    elif hasattr(corpus, "read"):
        chunks = [corpus.read()]  # type: ignore[union-attr]
    else:
        chunks = corpus
    seqs = [reversed_sequence(s) for chunk in chunks for s in sentences(chunk)]
    if not seqs:
        raise TrainingError("corpus contains no tokens")

    vocab = Vocabulary(w for seq in seqs for w in seq)
    raw: list[dict[tuple[int, ...], int]] = [defaultdict(int) for _ in range(order + 1)]
    left: list[dict[tuple[int, ...], set[int]]] = [defaultdict(set) for _ in range(order + 1)]
    end_id = vocab.index(END)
    for seq in seqs:
        ids = [vocab.index(w) for w in seq]
        for i in range(1, len(ids)):
            for k in range(1, order + 1):
                lo = i - k + 1
                if lo < 0:
                    break
                gram = tuple(ids[lo:i + 1])
                raw[k][gram] += 1
                if lo > 0:
                    left[k][gram].add(ids[lo - 1])

    counts: list[dict[tuple[int, ...], dict[int, int]]] = []
    for k in range(1, order + 1):
        table: dict[tuple[int, ...], dict[int, int]] = {}
        continuation = k == 1 or k < order
        for gram, c in raw[k].items():
            if continuation and gram[0] != end_id:
                c = len(left[k][gram])
            table.setdefault(gram[:-1], {})[gram[-1]] = c
        counts.append(table)
    return ReverseNGramModel(order, discount, vocab, counts)


# --- sampling ----------------------------------------------------------------


def _candidate_mask(d: NextWordDistribution, forbidden: Iterable[str]) -> np.ndarray:
    mask = d.vocab.generable & (d.probs > 0)
    for w in forbidden:
        i = d.vocab._index.get(w)
        if i is not None:
            mask[i] = False
    return mask


def _top_k(d: NextWordDistribution, params: SamplerParams, forbidden: Iterable[str]):
    mask = _candidate_mask(d, forbidden)
    cand = np.flatnonzero(mask)
    if cand.size == 0:
        raise SamplingExhausted("no permitted word has positive probability")
    p = d.probs[cand]
    order = np.lexsort((cand, -p))[: params.top_k]
    cand, p = cand[order], p[order]
    logw = (np.log(p) - math.log(p[0])) / params.temperature
    cum = np.cumsum(np.exp(logw))
    return cand, cum


def topk_sample(
    d: NextWordDistribution,
    params: SamplerParams,
    forbidden: Iterable[str] = (),
    rng: random.Random | None = None,
) -> str:
    """Draw one word from the tempered top-k of ``d``, skipping ``forbidden``."""
    return sample_many(d, params, 1, forbidden, rng)[0]


def sample_many(
    d: NextWordDistribution,
    params: SamplerParams,
    n: int,
    forbidden: Iterable[str] = (),
    rng: random.Random | None = None,
) -> list[str]:
    rng = rng if rng is not None else random.Random(params.seed)
    cand, cum = _top_k(d, params, forbidden)
    total = cum[-1]
    picks = []
    for _ in range(n):
        j = int(np.searchsorted(cum, rng.random() * total, side="right"))
        picks.append(d.vocab.word(int(cand[min(j, cand.size - 1)])))
    return picks


def violates_no_repeat(generated: Sequence[str], candidate: str, size: int) -> bool:
    """True iff ``generated + [candidate]`` ends in an n-gram seen earlier."""
    if size < 1:
        raise ValueError("size must be >= 1")
    if len(generated) + 1 < size:
        return False
    tail = tuple(generated[len(generated) - size + 1:]) + (candidate,) if size > 1 else (candidate,)
    for i in range(len(generated) - size + 1):
        if tuple(generated[i:i + size]) == tail:
            return True
    return False


def greedy_decode(model: LanguageModel, max_len: int = 100) -> list[str]:
    """Argmax decode from the line-end marker; returns left-to-right words."""
    ctx = [END]
    vocab = model.vocab
    start = vocab.index(START)
    allowed = vocab.generable.copy()
    allowed[start] = True
    out: list[str] = []
    for _ in range(max_len):
        probs = np.where(allowed, model.next_distribution(ctx).probs, -1.0)
        i = int(np.argmax(probs))
        if i == start:
            break
        out.append(vocab.word(i))
        ctx.append(vocab.word(i))
    return out[::-1]
