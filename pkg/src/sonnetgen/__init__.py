"""Zero-shot sonnet generation under meter and rhyme constraints.

The pipeline runs four stages: plan keywords for each line, assign rhyme
words, polish the plan with imagery and similes, then decode every line
right to left under the chosen stress template.
"""

from __future__ import annotations

from .decoder import DecodeParams, Sonnet, generate_line, generate_sonnet
from .errors import SonnetError
from .eval import ImageabilityLexicon, batch_report, distinct_2, imageability
from .lm import ReverseNGramModel, SamplerParams, train
from .meter import (
    PETRARCHAN,
    SHAKESPEAREAN,
    RhymeScheme,
    StressTemplate,
    check_sonnet_format,
    initial_rhyme_lines,
    line_templates,
    scan_line,
)
from .phonetics import (
    Pronunciation,
    PronunciationLexicon,
    RhymeClass,
    StressMark,
    classify_rhyme,
    default_lexicon,
    parse_lexicon,
    rhyme_candidates,
)
from .polish import polish
from .rhyme import assign_rhymes
from .sketch import LineSketch, Sketch, extract_keywords

__version__ = "0.1.0"

__all__ = [
    "DecodeParams", "ImageabilityLexicon", "LineSketch", "PETRARCHAN", "Pronunciation",
    "PronunciationLexicon", "ReverseNGramModel", "RhymeClass", "RhymeScheme", "SHAKESPEAREAN",
    "SamplerParams", "Sketch", "Sonnet", "SonnetError", "StressMark", "StressTemplate",
    "assign_rhymes", "batch_report", "check_sonnet_format", "classify_rhyme", "default_lexicon",
    "distinct_2", "extract_keywords", "generate_line", "generate_sonnet", "imageability",
    "initial_rhyme_lines", "line_templates", "parse_lexicon", "polish", "rhyme_candidates",
    "scan_line", "train",
]
