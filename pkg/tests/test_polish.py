from __future__ import annotations

import io
import random
import sys

import pytest
from hypothesis import given, settings, strategies as st

from sonnetgen.meter import SHAKESPEAREAN
from sonnetgen.phonetics import StressMark
from sonnetgen.polish import (
    ImageryTable,
    PosLexicon,
    SimileTable,
    alternates,
    apply_imagery,
    apply_similes,
    load_imagery,
    load_pos,
    phrase_alternates,
    polish,
    provider_rows,
    simile_phrase,
)
from sonnetgen.rhyme import assign_rhymes
from sonnetgen.sketch import LineSketch, Sketch, plan_reference

U, S, A = StressMark.U, StressMark.S, StressMark.A

POS = PosLexicon({"love": ["noun"], "bright": ["adjective"], "shining": ["adjective"], "day": ["noun"]})


def blank_sketch(lines: dict[int, LineSketch]) -> Sketch:
    rows = [lines.get(i, LineSketch(("stone",), f"w{i}")) for i in range(14)]
    return Sketch("t", tuple(rows))


def test_alternation_rule():
    assert alternates((A, A, S, U))
    assert alternates((U, S, U))
    assert not alternates((S, U, A, S, U))
    assert not alternates((S, S))


def test_simile_meter_fixtures(lex):
    assert phrase_alternates(simile_phrase("bright", ("diamond",)), lex)
    assert not phrase_alternates(simile_phrase("shining", ("diamond",)), lex)
    assert phrase_alternates(("sudden", "like", "a", "flash"), lex)
    assert not phrase_alternates(("qwzxv", "like", "stone"), lex)


def test_simile_accepts_bright_rejects_shining(lex):
    tbl = SimileTable.from_rows([("bright", "diamond", 0.9), ("shining", "diamond", 0.95)])
    sk = blank_sketch({2: LineSketch(("bright", "sky"), "night"), 5: LineSketch(("shining", "sea"), "way")})
    out = apply_similes(sk, tbl, POS, lex, max_add=2)
    assert sum(len(ls.fixed_phrases) for ls in out.lines) == 1
    assert out.lines[2].fixed_phrases[0].words == ("bright", "like", "diamond")
    assert out.lines[2].fixed_phrases[0].anchor == 0
    assert out.lines[5].fixed_phrases == ()


def test_simile_limit(lex):
    tbl = SimileTable.from_rows([("bright", "diamond", 0.9)])
    sk = blank_sketch({i: LineSketch(("bright", "sky"), f"r{i}") for i in range(4)})
    out = apply_similes(sk, tbl, POS, lex, max_add=1)
    assert sum(len(ls.fixed_phrases) for ls in out.lines) == 1


def test_imagery_love_rose(lex):
    tbl = ImageryTable.from_rows([("love", "rose", 0.9), ("love", "flame", 0.7), ("day", "sun", 0.4)])
    sk = blank_sketch({0: LineSketch(("love", "day"), "night"), 3: LineSketch(("day",), "way")})
    out = apply_imagery(sk, tbl, POS, max_repl=1, lex=lex)
    assert out.lines[0].content_words == ("rose", "day")
    assert [(s.original, s.replacement, s.confidence) for s in out.lines[0].imagery] == [("love", "rose", 0.9)]
    assert out.lines[3] == sk.lines[3]
    out2 = apply_imagery(sk, tbl, POS, max_repl=2, lex=lex)
    assert sum(len(ls.imagery) for ls in out2.lines) == 2


def test_rhyme_slots_are_never_edited(lex):
    tbl = ImageryTable.from_rows([("love", "rose", 0.9)])
    sims = SimileTable.from_rows([("bright", "diamond", 0.9)])
    sk = blank_sketch({0: LineSketch((), "love"), 1: LineSketch((), "bright")})
    out = polish(sk, tbl, sims, POS, lex)
    assert out == sk


def test_empty_tables_are_identity(lex, model, documents):
    sk = plan_reference("the four seasons", lex, documents, SHAKESPEAREAN)
    sk = assign_rhymes(sk, SHAKESPEAREAN, lex, model, rng=random.Random(0)).sketch
    empty = polish(sk, ImageryTable.from_rows([]), SimileTable.from_rows([]), PosLexicon({}), lex)
    assert empty.to_json() == sk.to_json()


def test_shipped_tables_polish(lex, model, documents, tables):
    imagery, similes, pos = tables
    sk = plan_reference("love", lex, documents, SHAKESPEAREAN)
    sk = assign_rhymes(sk, SHAKESPEAREAN, lex, model, rng=random.Random(1)).sketch
    out = polish(sk, imagery, similes, pos, lex, rng=random.Random(1))
    assert [ls.rhyme_word for ls in out.lines] == [ls.rhyme_word for ls in sk.lines]
    assert sum(len(ls.imagery) for ls in out.lines) <= 2
    assert sum(len(ls.fixed_phrases) for ls in out.lines) <= 1
    for ls in out.lines:
        for p in ls.fixed_phrases:
            assert p.words[0] == ls.content_words[p.anchor] and phrase_alternates(p.words, lex)


def test_table_loading_and_validation():
    tbl = load_imagery(io.StringIO("# comment\nlove\trose\t0.9\nlove\tflame\t0.7\n"))
    assert tbl.get("love") == ((("rose",), 0.9), (("flame",), 0.7))
    with pytest.raises(ValueError):
        load_imagery(io.StringIO("love\trose\n"))
    with pytest.raises(ValueError):
        ImageryTable.from_rows([("love", "rose", 1.5)])
    pos = load_pos(io.StringIO("bright\tadjective,noun\n"))
    assert pos.is_adjective("bright") and pos.is_noun("Bright")
    with pytest.raises(ValueError):
        PosLexicon({"x": ["adverb"]})


def test_provider_rows(tmp_path):
    script = tmp_path / "gen.py"
    script.write_text(
        "import sys\nfor w in sys.stdin.read().split():\n    print(f'{w}\\t{w}s\\t0.5')\n",
        encoding="utf-8",
    )
    assert provider_rows([sys.executable, str(script)], ["rose", "moon"]) == [
        ("rose", "roses", 0.5), ("moon", "moons", 0.5),
    ]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_polish_preserves_structure(lex, model, documents, tables, seed):
    imagery, similes, pos = tables
    sk = plan_reference("the sea", lex, documents, SHAKESPEAREAN)
    sk = assign_rhymes(sk, SHAKESPEAREAN, lex, model, rng=random.Random(seed)).sketch
    out = polish(sk, imagery, similes, pos, lex, rng=random.Random(seed))
    assert out.slot_counts() == sk.slot_counts()
    assert [ls.rhyme_word for ls in out.lines] == [ls.rhyme_word for ls in sk.lines]
