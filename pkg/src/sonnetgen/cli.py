"""Command-line entry point: ``sonnetgen <command> [options]``.

Every command reads an optional ``key = value`` config file (``--config``);
flags given on the command line win over the file.  Keys match the
``RunConfig`` field names, for example::

    # run.conf
    corpus = data/prose.txt
    model = out/model.jsonl
    scheme = petrarchan
    seed = 7
    beam_width = 8
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import random
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from . import eval as evaluation
from .decoder import DecodeParams, Sonnet, generate_sonnet
from .errors import SonnetError
from .lm import ReverseNGramModel, SamplerParams, split_documents, train
from .meter import RhymeScheme, check_sonnet_format, sonnet_format_ok
from .phonetics import PronunciationLexicon, default_lexicon, load_lexicon
from .polish import ImageryTable, PosLexicon, SimileTable, load_imagery, load_pos, load_similes, polish
from .rhyme import assign_rhymes
from .sketch import CommandPlanner, LineSketch, Sketch, plan_reference, plan_with

log = logging.getLogger("sonnetgen")

MIN_DOC_LINES = 8
MAX_DOC_LINES = 50


def bundled(name: str) -> str:
    return str(resources.files("sonnetgen") / "data" / name)


@dataclass
class RunConfig:
    lexicon: str | None = None  # None: the CMU dictionary shipped with ``cmudict``
    corpus: str = field(default_factory=lambda: bundled("corpus.txt"))
    imagery: str = field(default_factory=lambda: bundled("imagery.tsv"))
    similes: str = field(default_factory=lambda: bundled("similes.tsv"))
    pos: str = field(default_factory=lambda: bundled("pos.tsv"))
    imageability: str = field(default_factory=lambda: bundled("imageability.tsv"))
    model: str | None = None  # None: train from ``corpus`` in memory
    planner_cmd: str | None = None
    scheme: str = "shakespearean"
    seed: int = 0
    order: int = 3
    top_k: int = 50
    temperature: float = 0.85
    no_repeat_ngram_size: int = 3
    samples_per_step: int = 10
    beam_width: int = 8
    retry_budget: int = 8
    max_replacements: int = 2
    max_similes: int = 1

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str  # keep keys as written
        parser.read_string("[run]\n" + Path(path).read_text(encoding="utf-8"))
        return cls().updated(dict(parser["run"]))

    def updated(self, values: dict[str, object]) -> "RunConfig":
        types = {f.name: f.type for f in fields(self)}
        clean = {}
        for key, value in values.items():
            if value is None:
                continue
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            t = str(types[key])
            if isinstance(value, str):
                if t.startswith("int"):
                    value = int(value)
                elif t.startswith("float"):
                    value = float(value)
            clean[key] = value
        return replace(self, **clean)

    def validate(self, needed: Sequence[str]) -> None:
        for key in needed:
            path = getattr(self, key)
            if path is not None and not Path(path).exists():
                raise FileNotFoundError(f"{key}: {path} does not exist")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def provenance(self) -> dict[str, object]:
        return {"config_hash": self.digest(), "seed": self.seed}

    @property
    def sampler(self) -> SamplerParams:
        return SamplerParams(self.top_k, self.temperature, self.no_repeat_ngram_size, self.seed)

    @property
    def decode(self) -> DecodeParams:
        return DecodeParams(self.sampler, self.samples_per_step, self.beam_width, self.retry_budget)

    @property
    def rhyme_scheme(self) -> RhymeScheme:
        return RhymeScheme.parse(self.scheme)


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception) -> None:
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (SonnetError, ValueError, OSError) as exc:
        raise StageError(name, exc) from exc


# --- resource loading ---------------------------------------------------------


def lexicon_for(cfg: RunConfig) -> PronunciationLexicon:
    return load_lexicon(cfg.lexicon) if cfg.lexicon else default_lexicon()


def filtered_documents(text: str) -> tuple[list[list[str]], int]:
    """Documents within the line-count bounds, plus the number dropped."""
    docs = split_documents(text)
    kept = [d for d in docs if MIN_DOC_LINES <= len(d) <= MAX_DOC_LINES]
    return kept, len(docs) - len(kept)


def corpus_documents(cfg: RunConfig) -> list[list[str]]:
    docs, dropped = filtered_documents(Path(cfg.corpus).read_text(encoding="utf-8"))
    log.info("corpus: kept %d documents, dropped %d", len(docs), dropped)
    if not docs:
        raise SonnetError(f"no documents of {MIN_DOC_LINES}-{MAX_DOC_LINES} lines in {cfg.corpus}")
    return docs


def train_model(cfg: RunConfig) -> ReverseNGramModel:
    text = Path(cfg.corpus).read_text(encoding="utf-8")
    docs, dropped = filtered_documents(text)
    log.info("train-lm: kept %d documents, dropped %d", len(docs), dropped)
    if not docs:
        raise SonnetError(
            f"corpus has no documents of {MIN_DOC_LINES}-{MAX_DOC_LINES} lines "
            f"({dropped} dropped by the length filter)"
        )
    model = train(["\n".join(d) for d in docs], order=cfg.order)
    model.metadata = {**cfg.provenance(), "documents": len(docs), "dropped": dropped}
    return model


def model_for(cfg: RunConfig) -> ReverseNGramModel:
    if cfg.model:
        return ReverseNGramModel.load(cfg.model)
    return train_model(cfg)


def tables_for(cfg: RunConfig) -> tuple[ImageryTable, SimileTable, PosLexicon]:
    return load_imagery(cfg.imagery), load_similes(cfg.similes), load_pos(cfg.pos)


# --- pipeline stages --------------------------------------------------------


def stage_plan(cfg: RunConfig, title: str, lex: PronunciationLexicon) -> Sketch:
    scheme = cfg.rhyme_scheme
    if cfg.planner_cmd:
        sk = plan_with(CommandPlanner(cfg.planner_cmd.split()), title, scheme)
    else:
        sk = plan_reference(title, lex, corpus_documents(cfg), scheme)
    return replace(sk, metadata=cfg.provenance())


def stage_rhyme(cfg: RunConfig, sk: Sketch, lex, model, rng: random.Random) -> Sketch:
    out = assign_rhymes(sk, cfg.rhyme_scheme, lex, model, cfg.sampler, rng).sketch
    return replace(out, metadata=cfg.provenance())


def stage_polish(cfg: RunConfig, sk: Sketch, lex, rng: random.Random) -> Sketch:
    imagery, similes, pos = tables_for(cfg)
    out = polish(sk, imagery, similes, pos, lex, rng, cfg.max_replacements, cfg.max_similes)
    return replace(out, metadata=cfg.provenance())


def strip_content(sk: Sketch) -> Sketch:
    """Keep only the rhyme words: the planless ablation."""
    lines = tuple(LineSketch((), ls.rhyme_word) for ls in sk.lines)
    return replace(sk, lines=lines)


def run_pipeline(
    cfg: RunConfig,
    title: str,
    skip_polish: bool = False,
    no_plan: bool = False,
    sketch: Sketch | None = None,
) -> tuple[Sketch, Sonnet]:
    rng = random.Random(cfg.seed)
    lex = _stage("load", lexicon_for, cfg)
    model = _stage("load", model_for, cfg)
    if sketch is None:
        sk = _stage("plan", stage_plan, cfg, title, lex)
        sk = _stage("rhyme", stage_rhyme, cfg, sk, lex, model, rng)
        if no_plan:
            sk = strip_content(sk)
        elif not skip_polish:
            sk = _stage("polish", stage_polish, cfg, sk, lex, rng)
    else:
        sk = sketch
    sonnet = _stage("generate", generate_sonnet, sk, cfg.rhyme_scheme, model, lex, cfg.decode, rng)
    sonnet.metadata.update(
        cfg.provenance(),
        skip_polish=skip_polish,
        no_plan=no_plan,
    )
    return replace(sk, metadata=cfg.provenance()), sonnet


# --- poem files -----------------------------------------------------------------


def read_poem(path: str | Path) -> list[str]:
    """Nonblank lines of a poem file; ``#`` lines carry provenance and are skipped."""
    text = Path(path).read_text(encoding="utf-8")
    return [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def sonnet_text(sonnet: Sonnet) -> str:
    meta = sonnet.metadata
    head = f"# {sonnet.title} | seed={sonnet.seed} config={meta.get('config_hash', '-')}\n"
    return head + sonnet.to_text()


# --- commands --------------------------------------------------------------


def _write(path: str | Path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    log.info("wrote %s", p)


def cmd_train_lm(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate(["corpus"])
    model = _stage("train-lm", train_model, cfg)
    out = args.out or cfg.model
    if not out:
        raise SonnetError("train-lm needs --out or a model path in the config")
    _write(out, model.dumps())
    return 0


def cmd_plan(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate(["corpus"])
    lex = _stage("load", lexicon_for, cfg)
    sk = _stage("plan", stage_plan, cfg, args.title, lex)
    _emit(args.out, sk.to_json())
    return 0


def cmd_rhyme(cfg: RunConfig, args: argparse.Namespace) -> int:
    lex = _stage("load", lexicon_for, cfg)
    model = _stage("load", model_for, cfg)
    sk = _stage("load", Sketch.from_json, Path(args.sketch).read_text(encoding="utf-8"))
    out = _stage("rhyme", stage_rhyme, cfg, sk, lex, model, random.Random(cfg.seed))
    _emit(args.out, out.to_json())
    return 0


def cmd_polish(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate(["imagery", "similes", "pos"])
    lex = _stage("load", lexicon_for, cfg)
    sk = _stage("load", Sketch.from_json, Path(args.sketch).read_text(encoding="utf-8"))
    out = _stage("polish", stage_polish, cfg, sk, lex, random.Random(cfg.seed))
    _emit(args.out, out.to_json())
    return 0


def cmd_generate(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate(["corpus", "imagery", "similes", "pos", "model", "lexicon"])
    sketch = None
    if args.sketch:
        sketch = _stage("load", Sketch.from_json, Path(args.sketch).read_text(encoding="utf-8"))
    title = args.title or (sketch.title if sketch else None)
    if not title:
        raise SonnetError("generate needs --title or --sketch")
    sk, sonnet = run_pipeline(cfg, title, args.skip_polish, args.no_plan, sketch)
    lex = lexicon_for(cfg)
    report = check_sonnet_format([ln.words for ln in sonnet.lines], cfg.rhyme_scheme, lex)
    report_doc = {"provenance": cfg.provenance(), **_format_summary(report)}

    out = Path(args.out_dir)
    _write(out / "sketch.json", sk.to_json())
    _write(out / "sonnet.txt", sonnet_text(sonnet))
    _write(out / "sonnet.json", sonnet.to_json() + "\n")
    _write(out / "report.json", json.dumps(report_doc, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(sonnet.to_text())
    sys.stdout.write(
        f"\nrhyme {report.rhyme_pct:.1f}%  meter {report.meter_pct:.1f}%  syllable {report.syllable_pct:.1f}%\n"
    )
    return 0 if sonnet_format_ok(report) else 1


def _format_summary(report) -> dict:
    return {
        "rhyme_pct": report.rhyme_pct,
        "meter_pct": report.meter_pct,
        "syllable_pct": report.syllable_pct,
        "rhyme": [report.rhyme_num, report.rhyme_den],
        "meter": [report.meter_num, report.meter_den],
        "syllable": [report.syllable_num, report.syllable_den],
        "pairs": [[p.first, p.second, *p.words, p.rhyme] for p in report.pairs],
        "lines": [[d.index, d.template, list(d.syllable_totals)] for d in report.lines],
    }


def _poems(paths: Sequence[str]) -> dict[str, list[str]]:
    return {p: read_poem(p) for p in paths}


def cmd_check(cfg: RunConfig, args: argparse.Namespace) -> int:
    lex = _stage("load", lexicon_for, cfg)
    report = evaluation.batch_report(_poems(args.poems), cfg.rhyme_scheme, lex, None)
    _report_out(report, args)
    return 1 if report.failed else 0


def cmd_score(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.validate(["imageability"])
    img = _stage("load", evaluation.load_imageability, cfg.imageability)
    lex = _stage("load", lexicon_for, cfg) if args.with_format else None
    scheme = cfg.rhyme_scheme if args.with_format else None
    report = evaluation.batch_report(_poems(args.poems), scheme, lex, img)
    _report_out(report, args)
    return 1 if report.failed else 0


def _report_out(report, args: argparse.Namespace) -> None:
    sys.stdout.write(evaluation.format_table(report))
    if args.json:
        _write(args.json, evaluation.report_json(report) + "\n")
    for row in report.failed:
        for err in row.errors:
            print(f"error: {row.name}: {err}", file=sys.stderr)


def _emit(path: str | None, text: str) -> None:
    if path:
        _write(path, text)
    else:
        sys.stdout.write(text)


# --- argument parsing ---------------------------------------------------------


def _scheme_arg(text: str) -> str:
    try:
        RhymeScheme.parse(text)
    except SonnetError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--lexicon")
    g.add_argument("--corpus")
    g.add_argument("--model")
    g.add_argument("--imagery")
    g.add_argument("--similes")
    g.add_argument("--pos")
    g.add_argument("--imageability")
    g.add_argument("--planner-cmd", dest="planner_cmd")
    g.add_argument("--scheme", type=_scheme_arg)
    g.add_argument("--seed", type=int)
    g.add_argument("--order", type=int)
    g.add_argument("--top-k", dest="top_k", type=int)
    g.add_argument("--temperature", type=float)
    g.add_argument("--no-repeat-ngram-size", dest="no_repeat_ngram_size", type=int)
    g.add_argument("--samples-per-step", dest="samples_per_step", type=int)
    g.add_argument("--beam-width", dest="beam_width", type=int)
    g.add_argument("--retry-budget", dest="retry_budget", type=int)
    g.add_argument("--max-replacements", dest="max_replacements", type=int)
    g.add_argument("--max-similes", dest="max_similes", type=int)
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sonnetgen", description="Zero-shot sonnet generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", parents=[common], help="train the reverse n-gram model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("plan", parents=[common], help="plan a keyword sketch for a title")
    p.add_argument("--title", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("rhyme", parents=[common], help="assign rhyme words to a sketch")
    p.add_argument("--sketch", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rhyme)

    p = sub.add_parser("polish", parents=[common], help="add imagery and similes to a sketch")
    p.add_argument("--sketch", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_polish)

    p = sub.add_parser("generate", parents=[common], help="run the whole pipeline")
    p.add_argument("--title")
    p.add_argument("--sketch", help="start from a finished sketch instead of planning")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--skip-polish", action="store_true", help="skip imagery and similes")
    p.add_argument("--no-plan", action="store_true", help="decode from rhyme words alone")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("check", parents=[common], help="format-check poem files")
    p.add_argument("poems", nargs="+")
    p.add_argument("--json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("score", parents=[common], help="novelty scores for poem files")
    p.add_argument("poems", nargs="+")
    p.add_argument("--json")
    p.add_argument("--with-format", action="store_true", help="also run format checks")
    p.set_defaults(func=cmd_score)
    return parser


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    return cfg.updated({k: v for k, v in vars(args).items() if k in _CONFIG_KEYS})


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        cfg.rhyme_scheme
    except (ValueError, OSError, configparser.Error) as exc:
        parser.error(str(exc))
    try:
        return args.func(cfg, args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SonnetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
