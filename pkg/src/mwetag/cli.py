"""Command-line interface.

Exit codes: 0 on success, 1 on data/configuration errors, 2 on usage errors.
Settings resolve in three layers: built-in defaults, then a --config file,
then explicit command-line flags.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, fields, replace
from importlib.resources import files as resource_files
from pathlib import Path
from typing import IO, Sequence

from .corpus import (
    Corpus,
    atomic_write_text,
    load_model,
    read_column_file,
    read_raw,
    save_model,
    write_column_file,
)
from .crf import TrainConfig, train, viterbi_decode
from .errors import ConfigError, MweTagError
from .evaluation import render_csv, render_text, score
from .features import TokenRecord, encode_corpus, load_gazetteer
from .ga import GaConfig, history_from_csv, history_to_csv, run_ga
from .stemmer import load_affix_lexicon, stem
from .templates import (
    chromosome_to_template,
    default_catalogue,
    parse_template,
    serialize_template,
)


@dataclass(frozen=True)
class RunConfig:
    prefixes: str | None = None
    suffixes: str | None = None
    gazetteer_salutations: str | None = None
    gazetteer_followups: str | None = None
    template: str | None = None
    model: str | None = None
    out: str | None = None
    history: str | None = None
    mode: str = "span"
    seed: int = 0
    min_stem: int = 1
    folds: int = 3
    max_generations: int = 50
    population_size: int = 20
    crossover_rate: float = 0.8
    mutation_rate: float | None = None
    elitism_count: int = 2
    stagnation_generations: int = 5
    rho: float = 10.0
    max_iterations: int = 200
    gradient_tolerance: float = 1e-4


_INT_KEYS = {
    "seed",
    "min_stem",
    "folds",
    "max_generations",
    "population_size",
    "elitism_count",
    "stagnation_generations",
    "max_iterations",
}
_FLOAT_KEYS = {"crossover_rate", "mutation_rate", "rho", "gradient_tolerance"}
_STR_KEYS = {
    "prefixes",
    "suffixes",
    "gazetteer_salutations",
    "gazetteer_followups",
    "template",
    "model",
    "out",
    "history",
    "mode",
}


def load_run_config(source: str | Path | IO[str]) -> RunConfig:
    """Flat ``key = value`` file; unknown keys and bad values are errors."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    values: dict[str, object] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown setting {key!r}")
        except ValueError:
            raise ConfigError(
                f"line {lineno}: bad value {value!r} for {key!r}"
            ) from None
    config = replace(RunConfig(), **values)
    if config.mode not in ("span", "token"):
        raise ConfigError(f"mode must be 'span' or 'token', got {config.mode!r}")
    return config


def _merge_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(RunConfig)
        if getattr(args, f.name, None) is not None
    }
    config = replace(config, **overrides)
    if config.mode not in ("span", "token"):
        raise ConfigError(f"mode must be 'span' or 'token', got {config.mode!r}")
    return config


def _packaged(name: str) -> io.StringIO:
    return io.StringIO((resource_files("mwetag") / "data" / name).read_text("utf-8"))


def _load_lexicon(config: RunConfig):
    prefixes = config.prefixes or _packaged("prefixes_list.txt")
    suffixes = config.suffixes or _packaged("suffixes_list.txt")
    return load_affix_lexicon(prefixes, suffixes)


def _load_gazetteer(config: RunConfig):
    salutations = config.gazetteer_salutations or _packaged("salutations.txt")
    followups = config.gazetteer_followups or _packaged("followups.txt")
    return load_gazetteer(salutations, followups)


def _require(config: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(config, n) is None]
    if missing:
        raise ConfigError(
            "missing required settings: " + ", ".join(f"--{n.replace('_', '-')}" for n in missing)
        )


def _train_config(config: RunConfig) -> TrainConfig:
    return TrainConfig(
        rho=config.rho,
        max_iterations=config.max_iterations,
        gradient_tolerance=config.gradient_tolerance,
    )


def _cmd_stem(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    lexicon = _load_lexicon(config)
    words = args.words or [line.strip() for line in sys.stdin if line.strip()]
    for word in words:
        result = stem(word, lexicon, config.min_stem)
        print(
            "\t".join(
                [
                    result.original,
                    result.stem,
                    "+".join(result.stripped_prefixes) or "-",
                    "+".join(result.stripped_suffixes) or "-",
                ]
            )
        )
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    _require(config, "out")
    raw = read_raw(args.input)
    encoded = encode_corpus(
        raw, _load_lexicon(config), _load_gazetteer(config), min_stem=config.min_stem
    )
    corpus = Corpus(sentences=tuple(encoded))
    write_column_file(corpus, config.out)
    print(f"encoded {len(corpus)} sentences / {corpus.token_count} tokens -> {config.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    _require(config, "template", "model")
    corpus = read_column_file(args.data, expect_labels=True)
    template = parse_template(Path(config.template).read_text(encoding="utf-8"))
    model = train(list(corpus), template, _train_config(config))
    save_model(model, config.model)
    print(f"trained on {len(corpus)} sentences, {len(model.weights)} weights -> {config.model}")
    return 0


def _cmd_tag(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    _require(config, "model", "out")
    model = load_model(config.model)
    corpus = read_column_file(args.data, expect_labels=False)
    tagged = []
    for sentence in corpus:
        labels = viterbi_decode(model, sentence)
        tagged.append(
            tuple(
                TokenRecord(columns=record.columns, label=label)
                for record, label in zip(sentence, labels)
            )
        )
    write_column_file(Corpus(sentences=tuple(tagged)), config.out)
    print(f"tagged {len(corpus)} sentences -> {config.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    gold = read_column_file(args.gold, expect_labels=True)
    predicted = read_column_file(args.predicted, expect_labels=True)
    report = score(
        [[r.label for r in s] for s in gold],
        [[r.label for r in s] for s in predicted],
        mode=config.mode,
    )
    print(render_text(report))
    if config.out:
        atomic_write_text(config.out, render_csv(report))
    return 0


def _cmd_ga_search(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    _require(config, "out", "history")
    corpus = read_column_file(args.data, expect_labels=True)
    catalogue = default_catalogue()
    ga_config = GaConfig(
        population_size=config.population_size,
        crossover_rate=config.crossover_rate,
        mutation_rate=config.mutation_rate,
        elitism_count=config.elitism_count,
        max_generations=config.max_generations,
        stagnation_generations=config.stagnation_generations,
        folds=config.folds,
        seed=config.seed,
    )
    result = run_ga(list(corpus), catalogue, ga_config, _train_config(config))
    best = result.best
    atomic_write_text(
        config.out, serialize_template(chromosome_to_template(best.bits, catalogue))
    )
    atomic_write_text(config.history, history_to_csv(result.history))
    chosen = [g.name for g, bit in zip(catalogue.genes, best.bits) if bit]
    print(f"best fitness {best.fitness:.4f} after {len(result.history)} generations")
    print(f"selected {len(chosen)} genes: {', '.join(chosen)}")
    print(f"template -> {config.out}")
    print(f"history -> {config.history}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    history = history_from_csv(Path(args.history).read_text(encoding="utf-8"))
    if not history:
        raise ConfigError(f"history file {args.history} has no generations")
    best_values = [record.best_fitness for record in history]
    top = max(best_values)
    first_at = next(r.generation for r in history if r.best_fitness == top)
    print(f"generations: {len(history)}")
    print(f"best fitness:  min {min(best_values):.4f}  max {top:.4f}  final {best_values[-1]:.4f}")
    print(f"max first attained at generation {first_at}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwetag",
        description="Multiword-expression tagging with a CRF and GA-selected features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, affixes=False, gazetteers=False) -> None:
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--seed", type=int)
        if affixes:
            p.add_argument("--prefixes", help="prefix list file (default: packaged)")
            p.add_argument("--suffixes", help="suffix list file (default: packaged)")
            p.add_argument("--min-stem", dest="min_stem", type=int)
        if gazetteers:
            p.add_argument("--gazetteer-salutations", dest="gazetteer_salutations")
            p.add_argument("--gazetteer-followups", dest="gazetteer_followups")

    p = sub.add_parser("stem", help="stem words with the affix lexicon")
    common(p, affixes=True)
    p.add_argument("words", nargs="*", help="words to stem (default: stdin lines)")
    p.set_defaults(func=_cmd_stem)

    p = sub.add_parser("encode", help="expand raw word/pos/label triples into feature columns")
    common(p, affixes=True, gazetteers=True)
    p.add_argument("input", help="raw triples file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("train", help="train a CRF from a labeled column file")
    common(p)
    p.add_argument("data", help="labeled column file")
    p.add_argument("--template")
    p.add_argument("--model")
    p.add_argument("--rho", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--tolerance", dest="gradient_tolerance", type=float)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tag", help="label a column file with a trained model")
    common(p)
    p.add_argument("data", help="column file (labels optional, ignored)")
    p.add_argument("--model")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("eval", help="score predicted labels against gold labels")
    common(p)
    p.add_argument("gold", help="gold column file")
    p.add_argument("predicted", help="predicted column file")
    p.add_argument("--mode", choices=("span", "token"))
    p.add_argument("--out", help="also write the report as CSV")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ga-search", help="search feature subsets with the genetic algorithm")
    common(p)
    p.add_argument("data", help="labeled column file")
    p.add_argument("--out", help="where to write the best template")
    p.add_argument("--history", help="where to write the per-generation history CSV")
    p.add_argument("--folds", type=int)
    p.add_argument("--generations", dest="max_generations", type=int)
    p.add_argument("--population", dest="population_size", type=int)
    p.add_argument("--crossover-rate", dest="crossover_rate", type=float)
    p.add_argument("--mutation-rate", dest="mutation_rate", type=float)
    p.add_argument("--elitism", dest="elitism_count", type=int)
    p.add_argument("--stagnation", dest="stagnation_generations", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--tolerance", dest="gradient_tolerance", type=float)
    p.set_defaults(func=_cmd_ga_search)

    p = sub.add_parser("report", help="summarize a ga-search history CSV")
    p.add_argument("history", help="history CSV from ga-search")
    p.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MweTagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
