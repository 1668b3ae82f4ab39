"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class SonnetError(Exception):
    """Base class for all errors raised by this package."""


class LexiconLoadError(SonnetError):
    pass


class LexiconParseError(SonnetError):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownWordError(SonnetError, KeyError):
    def __init__(self, word: str) -> None:
        super().__init__(word)
        self.word = word

    def __str__(self) -> str:
        return f"word not in lexicon: {self.word!r}"


class IdentityRhymeError(SonnetError, ValueError):
    pass


class SchemeError(SonnetError, ValueError):
    pass


class PromptFormatError(SonnetError, ValueError):
    pass


class PlannerError(SonnetError):
    pass


class TrainingError(SonnetError):
    pass


class SamplingExhausted(SonnetError):
    pass


class RenormalizationError(SonnetError, ValueError):
    pass


class AssignmentError(SonnetError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class LineGenerationError(SonnetError):
    pass


class SonnetGenerationError(SonnetError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class MetricError(SonnetError, ValueError):
    pass
