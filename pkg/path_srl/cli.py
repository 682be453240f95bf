"""
Command-line interface: train, label, evaluate, search, dump-embeddings

Exit codes:
    0  success
    1  any other failure
    2  configuration error (including invalid arguments)
    3  I/O error: unreadable or unwritable files, missing or mismatched bundle
    4  validation error: malformed corpus, misaligned files, untrainable data
"""

import argparse
import logging
import sys
from dataclasses import replace

from path_srl import __version__
from path_srl.config import ABLATIONS, load_config
from path_srl.errors import (
    AlignmentError,
    BundleError,
    ConfigError,
    CorpusFormatError,
    PathSrlError,
    TrainingDataError,
)
from path_srl.evaluation import (
    f1_by_sentence_length,
    recall_by_path_frequency,
    report_by_category_and_role,
    score,
)
from path_srl.pipeline import LabelingOptions, embedding_rows, label_corpus, load_bundle, save_bundle
from path_srl.processing.conll_io import read_corpus_file, write_corpus_file
from path_srl.training.search import DEFAULT_BUDGET, RandomSearch, bundle_objective, load_search_space, write_results
from path_srl.training.train_pipeline import train_bundle

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3, 4
REPORTS = ("overall", "path-freq", "sent-len", "role-table")


def cmd_train(args) -> int:
    config = load_config(
        args.config,
        seed=args.seed,
        jobs=args.jobs,
        epochs=args.epochs,
        ablation=args.ablate,
        use_reranker=False if args.no_reranker else None,
    )
    train = read_corpus_file(args.train)
    dev = read_corpus_file(args.dev) if args.dev else []
    run = train_bundle(train, dev, config)
    save_bundle(run.bundle, args.output, run.records)
    if run.dev_f1 is not None:
        print(f"dev_f1={run.dev_f1:.2f}")
    return EXIT_OK


def _labeling_options(bundle, args) -> LabelingOptions:
    stored = bundle.config or {}
    labeling, reranker = stored.get("labeling") or {}, stored.get("reranker") or {}
    options = LabelingOptions(
        labeling.get("gold_predicates", True),
        labeling.get("threshold", 0.5),
        reranker.get("nbest", 4),
    )
    updates = {"gold_predicates": args.gold_predicates, "threshold": args.threshold}
    if getattr(args, "nbest", None) is not None:
        updates["nbest"] = args.nbest
    options = replace(options, **{k: v for k, v in updates.items() if v is not None})
    if not 0.0 <= options.threshold <= 1.0 or options.nbest < 1:
        raise ConfigError(f"invalid labeling options {options}")
    return options


def cmd_label(args) -> int:
    bundle = load_bundle(args.bundle)
    options = _labeling_options(bundle, args)
    reranker = None if args.no_reranker else bundle.reranker
    corpus = read_corpus_file(args.input)
    labeled = label_corpus(corpus, bundle, reranker, options, args.jobs)
    write_corpus_file(labeled, args.output)
    logger.info("Labeled %d sentences into %s", len(labeled), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    gold = read_corpus_file(args.gold)
    predicted = read_corpus_file(args.predicted)
    reports = args.report or ["overall"]
    if "path-freq" in reports and not args.training:
        raise ConfigError("--report path-freq needs --training")
    training = read_corpus_file(args.training) if args.training else []

    for name in reports:
        if name == "overall":
            report = score(gold, predicted)
        elif name == "path-freq":
            report = recall_by_path_frequency(gold, predicted, training)
        elif name == "sent-len":
            report = f1_by_sentence_length(gold, predicted)
        else:
            report = report_by_category_and_role(gold, predicted)
        if args.format == "records":
            print("\n".join(report.records(name)))
        else:
            print(f"# {name}")
            print(report.to_frame().to_string())
            print()
    return EXIT_OK


def cmd_search(args) -> int:
    config = load_config(args.config, seed=args.seed, jobs=args.jobs)
    parameters = load_search_space(args.space)
    train = read_corpus_file(args.train)
    dev = read_corpus_file(args.dev)
    search = RandomSearch(parameters, config.seed)
    search.optimize(bundle_objective(train, dev, config, args.epochs), args.iterations)
    trials, best = write_results(search, config, args.output)
    print(search.to_frame().to_string(index=False))
    print(f"trials={trials} best={best}")
    return EXIT_OK


def cmd_dump_embeddings(args) -> int:
    bundle = load_bundle(args.bundle)
    options = _labeling_options(bundle, args)
    corpus = read_corpus_file(args.input)
    with open(args.output, "w", encoding="utf-8", newline="") as f:
        for row in embedding_rows(corpus, bundle, options):
            f.write(row.format() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="path_srl", description="Dependency path LSTM semantic role labeler")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train a system bundle")
    train.add_argument("train", help="training corpus (CoNLL-2009)")
    train.add_argument("dev", nargs="?", help="development corpus for epoch selection and the dev F1")
    train.add_argument("-o", "--output", required=True, help="bundle directory")
    train.add_argument("--config", help="YAML configuration (default: config/default.yaml)")
    train.add_argument("--seed", type=int)
    train.add_argument("--epochs", type=int, help="epochs for every network")
    train.add_argument("--jobs", type=int)
    train.add_argument("--no-reranker", action="store_true")
    train.add_argument("--ablate", action="append", choices=ABLATIONS)
    train.set_defaults(func=cmd_train)

    label = commands.add_parser("label", help="label a corpus with a trained bundle")
    label.add_argument("bundle")
    label.add_argument("input")
    label.add_argument("output")
    label.add_argument("--no-reranker", action="store_true", help="local argmax structures")
    label.add_argument("--gold-predicates", action=argparse.BooleanOptionalAction, default=None)
    label.add_argument("--threshold", type=float)
    label.add_argument("--nbest", type=int)
    label.add_argument("--jobs", type=int, default=1)
    label.set_defaults(func=cmd_label)

    evaluate = commands.add_parser("evaluate", help="score predictions against gold")
    evaluate.add_argument("gold")
    evaluate.add_argument("predicted")
    evaluate.add_argument("--training", help="training corpus for path frequencies")
    evaluate.add_argument("--report", action="append", choices=REPORTS)
    evaluate.add_argument("--format", choices=("table", "records"), default="table")
    evaluate.set_defaults(func=cmd_evaluate)

    search = commands.add_parser("search", help="random hyperparameter search")
    search.add_argument("train")
    search.add_argument("dev")
    search.add_argument("-o", "--output", required=True, help="directory for trials.csv and best.yaml")
    search.add_argument("--space", help="YAML search space (default: the published ranges)")
    search.add_argument("--iterations", type=int, default=10)
    search.add_argument("--epochs", type=int, default=DEFAULT_BUDGET, help="epoch budget per trial")
    search.add_argument("--config")
    search.add_argument("--seed", type=int)
    search.add_argument("--jobs", type=int)
    search.set_defaults(func=cmd_search)

    dump = commands.add_parser("dump-embeddings", help="export path embeddings of identified arguments")
    dump.add_argument("bundle")
    dump.add_argument("input")
    dump.add_argument("output")
    dump.add_argument("--gold-predicates", action=argparse.BooleanOptionalAction, default=None)
    dump.add_argument("--threshold", type=float)
    dump.set_defaults(func=cmd_dump_embeddings)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except (BundleError, OSError) as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO
    except (CorpusFormatError, AlignmentError, TrainingDataError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_VALIDATION
    except PathSrlError as e:
        logger.error("%s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
