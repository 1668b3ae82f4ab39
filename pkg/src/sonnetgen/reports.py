"""Report records produced by format checking and novelty scoring."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


@dataclass(frozen=True)
class LineDiagnostic:
    index: int  # 1-based
    words: tuple[str, ...]
    template: str | None
    syllable_totals: tuple[int, ...]
    unknown: tuple[str, ...] = ()

    @property
    def meter_ok(self) -> bool:
        return self.template is not None

    @property
    def syllable_ok(self) -> bool:
        return not self.unknown and any(t in (10, 11) for t in self.syllable_totals)


@dataclass(frozen=True)
class PairDiagnostic:
    first: int
    second: int
    words: tuple[str | None, str | None]
    rhyme: str  # strict | slant | none | unknown | identical


@dataclass(frozen=True)
class FormatReport:
    rhyme_num: int
    rhyme_den: int
    meter_num: int
    meter_den: int
    syllable_num: int
    syllable_den: int
    lines: tuple[LineDiagnostic, ...] = ()
    pairs: tuple[PairDiagnostic, ...] = ()

    @property
    def rhyme_pct(self) -> float:
        return _pct(self.rhyme_num, self.rhyme_den)

    @property
    def meter_pct(self) -> float:
        return _pct(self.meter_num, self.meter_den)

    @property
    def syllable_pct(self) -> float:
        return _pct(self.syllable_num, self.syllable_den)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.update(rhyme_pct=self.rhyme_pct, meter_pct=self.meter_pct, syllable_pct=self.syllable_pct)
        return d


@dataclass(frozen=True)
class NoveltyReport:
    distinct2: float
    imageability: float
    scored_tokens: int = 0
    total_bigrams: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class PoemRow:
    name: str
    format: FormatReport | None = None
    novelty: NoveltyReport | None = None
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class BatchReport:
    rows: list[PoemRow]
    rhyme_pct: float
    meter_pct: float
    syllable_pct: float
    distinct2: float | None
    imageability: float | None

    @property
    def failed(self) -> list[PoemRow]:
        return [r for r in self.rows if not r.ok]
