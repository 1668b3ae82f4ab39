from __future__ import annotations

import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from sonnetgen.errors import SchemeError, UnknownWordError
from sonnetgen.meter import (
    FEMININE,
    INVERTED_FIRST_FOOT,
    PETRARCHAN,
    SHAKESPEAREAN,
    STANDARD,
    TEMPLATES_BY_NAME,
    RhymeScheme,
    check_sonnet_format,
    fits_line_end,
    initial_rhyme_lines,
    line_templates,
    line_words,
    scan_line,
    scheme_pair_count,
    sonnet_format_ok,
    syllable_totals,
    word_fits,
)
from sonnetgen.phonetics import StressMark, syllable_count

U, S, A = StressMark.U, StressMark.S, StressMark.A

MONO = "the cat sat on a mat and dog ran far off to see".split()

# constructed to scan and rhyme under the dictionary's own readings
PERFECT = [
    "shall i compare thee to a summer's day",
    "thou art more lovely and more fair of late",
    "rough winds do shake the darling buds of may",
    "and summer's lease hath all too short a date",
    "sometime too hot the eye of heaven shines",
    "and often is his gold complexion dimmed",
    "and every fair from fair at times declines",
    "by chance or nature's changing course is trimmed",
    "but thy eternal summer shall not fade",
    "nor lose possession of the fair you know",
    "nor shall death brag you wander in his shade",
    "when in eternal lines to time you grow",
    "so long as men can breathe or eyes can see",
    "so long lives this and this gives life to thee",
]


def test_templates_exact():
    ts = line_templates()
    assert [t.name for t in ts] == ["standard", "inverted_first_foot", "feminine"]
    assert str(ts[0]) == "U S U S U S U S U S"
    assert str(ts[1]) == "S U U S U S U S U S"
    assert len(ts[2]) == 11 and ts[2].marks == (U, S) * 5 + (U,)


def test_initial_rhyme_lines_presets():
    assert initial_rhyme_lines(SHAKESPEAREAN) == [1, 2, 5, 6, 9, 10, 13]
    assert initial_rhyme_lines(PETRARCHAN) == [1, 2, 9, 10, 11]
    assert initial_rhyme_lines(RhymeScheme("AABBCCDDEEFFGG"))[:3] == [1, 3, 5]


def test_scheme_validation():
    assert RhymeScheme.parse("ABAB CDCD EFEF GG") == SHAKESPEAREAN
    for bad in ("ABAB", "ABABCDCDEFEFGH", "abab cdcd efef gg1"):
        with pytest.raises(SchemeError):
            RhymeScheme.parse(bad)


def test_pair_counts():
    assert len(SHAKESPEAREAN.pairs()) == 7
    assert len(PETRARCHAN.pairs()) == comb(4, 2) + comb(4, 2) + 3 * comb(2, 2)
    octave = {p for p in PETRARCHAN.pairs() if p[1] <= 8}
    assert {(1, 4), (2, 3), (5, 8), (6, 7)} <= octave


@given(st.lists(st.sampled_from("ABCDEFG"), min_size=14, max_size=14))
def test_pair_count_brute_force(letters):
    letters = "".join(letters)
    brute = sum(
        1 for i, j in itertools.combinations(range(14), 2) if letters[i] == letters[j]
    )
    assert scheme_pair_count(letters) == brute
    try:
        s = RhymeScheme(letters)
    except SchemeError:
        return
    assert len(s.pairs()) == brute
    firsts = initial_rhyme_lines(s)
    assert firsts == sorted(set(firsts)) and len(firsts) == len(set(letters))


def test_word_fits_examples(lex):
    assert word_fits((U, S), "sudden", lex) is None
    assert word_fits((S, U), "sudden", lex) is not None
    assert word_fits((S,), "fall", lex) is not None
    with pytest.raises(UnknownWordError):
        word_fits((S,), "qwzxv", lex)


def test_line_end_viability(lex):
    assert fits_line_end("delight", lex)
    assert fits_line_end("sudden", lex)  # feminine ending
    assert not fits_line_end("beautiful", lex)  # S U U cannot close any template


def test_monosyllable_lines(lex):
    assert scan_line(MONO[:10], lex).matched == "standard"
    assert scan_line(MONO[:11], lex).matched == "feminine"
    assert not scan_line(MONO[:9], lex)


def test_unknown_word_reported(lex):
    r = scan_line(["the", "qwzxv"], lex)
    assert not r and r.unknown == ("qwzxv",)


def test_inverted_first_foot(lex):
    r = scan_line("sometime too hot the eye of heaven shines".split(), lex)
    assert r.matched in ("standard", "inverted_first_foot")
    r = scan_line("beautiful the cat sat on the mat and".split(), lex)
    assert r.matched == "inverted_first_foot"


def test_scan_assignment_tiles(lex):
    r = scan_line(line_words(PERFECT[1]), lex)
    assert r
    assert sum(syllable_count(p) for _, p in r.assignment) == len(TEMPLATES_BY_NAME[r.matched])


def test_line_words_tokenisation():
    assert line_words("Rough winds, do shake!") == ["rough", "winds", "do", "shake"]
    assert line_words("summer's well-worn day") == ["summer's", "well", "worn", "day"]


def test_perfect_fixture(lex):
    report = check_sonnet_format(PERFECT, SHAKESPEAREAN, lex)
    assert (report.rhyme_pct, report.meter_pct, report.syllable_pct) == (100.0, 100.0, 100.0)
    assert sonnet_format_ok(report)


def test_one_broken_pair(lex):
    poem = list(PERFECT)
    poem[2] = "rough winds do shake the darling buds of june"
    report = check_sonnet_format(poem, SHAKESPEAREAN, lex)
    assert (report.rhyme_num, report.rhyme_den) == (6, 7)


def test_unknown_final_word_fails_all(lex):
    poem = list(PERFECT)
    poem[0] = "shall i compare thee to a summer's qwzxv"
    report = check_sonnet_format(poem, SHAKESPEAREAN, lex)
    assert not report.lines[0].meter_ok and not report.lines[0].syllable_ok
    assert report.rhyme_num == 6
    assert report.pairs[0].rhyme == "unknown"


def test_thirteen_lines_rejected(lex):
    with pytest.raises(SchemeError):
        check_sonnet_format(PERFECT[:13], SHAKESPEAREAN, lex)


def test_petrarchan_denominator(lex):
    report = check_sonnet_format(PERFECT, PETRARCHAN, lex)
    assert report.rhyme_den == scheme_pair_count(PETRARCHAN.letters) == 15


words_strategy = st.lists(st.sampled_from(sorted(set(MONO) | {"sudden", "delight", "remember", "beautiful", "river"})), min_size=1, max_size=12)


@given(words_strategy)
def test_matched_lines_have_ten_or_eleven_syllables(lex, words):
    r = scan_line(words, lex)
    if r:
        assert sum(syllable_count(p) for _, p in r.assignment) in (10, 11)
        assert set(syllable_totals(words, lex)) & {10, 11}


@given(words_strategy, st.sampled_from(MONO))
def test_adding_a_word_never_keeps_the_same_match(lex, words, extra):
    before = scan_line(words, lex).matched
    after = scan_line(words + [extra], lex).matched
    if before is not None:
        assert after != before


def test_template_constants_are_distinct():
    assert len({STANDARD.marks, INVERTED_FIRST_FOOT.marks, FEMININE.marks}) == 3
