from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, strategies as st

from sonnetgen.errors import MetricError
from sonnetgen.eval import (
    ImageabilityLexicon,
    batch_report,
    distinct_2,
    format_table,
    imageability,
    load_imageability,
    novelty,
    report_json,
)
from sonnetgen.meter import SHAKESPEAREAN

from test_meter import PERFECT

WORDS = "the sea wind, light dark! stone river. cold deep a of".split()


def brute_distinct_2(text: str) -> float:
    pairs = []
    for raw in text.split("\n"):
        toks = [t.strip(",.!?;:").lower() for t in raw.split()]
        toks = [t for t in toks if t]
        pairs += [(toks[i], toks[i + 1]) for i in range(len(toks) - 1)]
    return len(set(pairs)) / len(pairs)


def random_text(r: random.Random) -> str:
    lines = [" ".join(r.choice(WORDS) for _ in range(r.randint(2, 9))) for _ in range(r.randint(1, 14))]
    return "\n".join(lines)


def test_distinct_2_matches_brute_force_on_random_texts():
    r = random.Random(0)
    for _ in range(25):
        text = random_text(r)
        assert distinct_2(text) == brute_distinct_2(text)


@given(st.lists(st.lists(st.sampled_from(WORDS), min_size=2, max_size=8).map(" ".join), min_size=1, max_size=14))
def test_distinct_2_property(lines):
    d = distinct_2(lines)
    assert 0 < d <= 1
    assert d == brute_distinct_2("\n".join(lines))


def test_distinct_2_examples():
    assert distinct_2("a b a b") == 2 / 3
    assert distinct_2(["a b", "b a"]) == 1.0  # no bigram spans the line break
    with pytest.raises(MetricError):
        distinct_2("one\ntwo\n")


IMG = ImageabilityLexicon({"w1": 0.2, "w2": 0.8, "rose": 0.95, "stone": 0.7, "idea": 0.1})


@pytest.mark.parametrize(
    "poem, expected, count",
    [
        ("w1 w2", 0.5, 2),
        ("the w1 and the w2", 0.5, 2),
        ("rose rose stone", (0.95 * 2 + 0.7) / 3, 3),
        ("idea\nunknown rose", (0.1 + 0.95) / 2, 2),
        ("W1 stone, w2!", (0.2 + 0.7 + 0.8) / 3, 3),
    ],
)
def test_imageability_fixtures(poem, expected, count):
    mean, n = imageability(poem, IMG)
    assert abs(mean - expected) <= 1e-9 and n == count


def test_imageability_undefined():
    with pytest.raises(MetricError):
        imageability("the of and", IMG)
    with pytest.raises(MetricError):
        imageability("unknown words", IMG)
    with pytest.raises(ValueError):
        ImageabilityLexicon({})
    with pytest.raises(ValueError):
        ImageabilityLexicon({"x": math.nan})


def test_custom_stopwords():
    assert imageability("w1 w2", IMG, stopwords={"w1"}) == (0.8, 1)


def test_shipped_imageability_file(img_lex, tmp_path):
    lo, hi = img_lex.range
    assert 0.0 <= lo < hi <= 1.0
    p = tmp_path / "img.tsv"
    p.write_text("# header\nrose\t0.9\n\nstone\t0.5\n", encoding="utf-8")
    assert load_imageability(p).ratings == {"rose": 0.9, "stone": 0.5}
    p.write_text("rose 0.9\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_imageability(p)


def test_novelty_report(img_lex):
    rep = novelty(PERFECT, img_lex)
    assert rep.distinct2 == distinct_2(PERFECT) and rep.total_bigrams == sum(len(x.split()) - 1 for x in PERFECT)


def test_batch_of_identical_poems(lex, img_lex):
    one = novelty(PERFECT, img_lex)
    rep = batch_report([PERFECT] * 5, SHAKESPEAREAN, lex, img_lex)
    assert len(rep.rows) == 5 and not rep.failed
    assert (rep.rhyme_pct, rep.meter_pct, rep.syllable_pct) == (100.0, 100.0, 100.0)
    assert rep.distinct2 == pytest.approx(one.distinct2, abs=1e-12)
    assert rep.imageability == pytest.approx(one.imageability, abs=1e-12)


def test_batch_records_failures(lex, img_lex):
    rep = batch_report({"good": PERFECT, "short": PERFECT[:13]}, SHAKESPEAREAN, lex, img_lex)
    assert [r.name for r in rep.failed] == ["short"]
    assert rep.rhyme_pct == 100.0  # macro-average over poems that could be scored
    doc = json.loads(report_json(rep))
    assert doc["aggregate"]["poems"] == 2 and doc["aggregate"]["failed"] == 1
    table = format_table(rep)
    assert table.splitlines()[-1].startswith("ALL") and "1 failed" in table
    with pytest.raises(MetricError):
        batch_report([], SHAKESPEAREAN, lex)


def test_table_scales_distinct_2():
    poem = ["sea wind sea wind", "cold stone"]
    rep = batch_report([poem], None, None, ImageabilityLexicon({"stone": 0.5}))
    row = format_table(rep).splitlines()[2].split()
    assert row[4] == f"{100 * distinct_2(poem):.1f}" == "75.0"
