"""Command-line interface.

Subcommands mirror the pipeline stages; most take ``--config`` plus
optional ``--seed``/``--fold``/``--system``/``--beam`` overrides.
"""

import argparse
import logging
import sys

from .errors import QgError
from .expconfig import ALL_SYSTEMS, parse_config
from .harness import Experiment


def _experiment(args):
    overrides = {"seed": args.seed} if getattr(args, "seed", None) is not None else None
    return Experiment(parse_config(args.config, overrides=overrides))


def cmd_prepare_contexts(args):
    _experiment(args).prepare_contexts()


def cmd_train_transe(args):
    _experiment(args).train_transe()


def cmd_make_folds(args):
    _experiment(args).make_folds()


def _systems(exp, args):
    return [args.system] if args.system else exp.config.system_list()


def _fold_ids(exp, args):
    return [args.fold] if args.fold is not None else [f.fold_id for f in exp.folds]


def cmd_train(args):
    exp = _experiment(args)
    for fold_id in _fold_ids(exp, args):
        for system in _systems(exp, args):
            exp.train_system(system, fold_id)


def cmd_generate(args):
    exp = _experiment(args)
    for fold_id in _fold_ids(exp, args):
        for system in _systems(exp, args):
            exp.generate(system, fold_id, beam=args.beam)


def cmd_evaluate(args):
    exp = _experiment(args)
    systems = _systems(exp, args)
    fold_ids = _fold_ids(exp, args)
    aggregates = exp.evaluate(systems, fold_ids)
    for system, agg in aggregates.items():
        mean, std = agg["bleu_4"]
        print(f"{system}\tBLEU-4 {mean * 100:.2f} ± {std * 100:.2f}")


def cmd_run_experiment(args):
    exp = _experiment(args)
    aggregates = exp.run()
    print(f"report: {exp.path('report.tsv')}")
    for system, agg in aggregates.items():
        mean, std = agg["bleu_4"]
        print(f"{system}\tBLEU-4 {mean * 100:.2f} ± {std * 100:.2f}")


def cmd_export_human_eval(args):
    exp = _experiment(args)
    out, key = exp.export_human_eval(n=args.n, seed=args.seed,
                                     fold_id=args.fold if args.fold is not None else 0)
    print(f"annotation sheet: {out}")
    print(f"blinding key: {key}")


def cmd_make_toy_data(args):
    from . import toydata
    if args.corpus == "transe":
        path = toydata.write_toy_kb(args.out)
        print(f"wrote {path}")
        return
    corpus = toydata.smoke_corpus() if args.corpus == "smoke" else toydata.zero_shot_corpus()
    for role, path in toydata.write_corpus(args.out, corpus).items():
        print(f"wrote {role}: {path}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zeroshot-qg",
        description="Zero-shot question generation from KB triples.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, config=True, fold=False, system=False, beam=False):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("--config", required=True, help="experiment config file")
            p.add_argument("--seed", type=int, default=None, help="override config seed")
        if fold:
            p.add_argument("--fold", type=int, default=None, help="restrict to one fold")
        if system:
            p.add_argument("--system", choices=ALL_SYSTEMS, default=None,
                           help="restrict to one system")
        if beam:
            p.add_argument("--beam", type=int, default=None, help="beam width (1 = greedy)")
        p.set_defaults(func=func)
        return p

    add("prepare-contexts", cmd_prepare_contexts,
        "mine predicate patterns and type labels; write the dataset JSONL")
    add("train-transe", cmd_train_transe, "train the KB embeddings")
    add("make-folds", cmd_make_folds, "build the zero-shot cross-validation folds")
    add("train", cmd_train, "train systems / build retrieval indexes",
        fold=True, system=True)
    add("generate", cmd_generate, "decode questions for test folds",
        fold=True, system=True, beam=True)
    add("evaluate", cmd_evaluate, "score generations and write report + figures",
        fold=True, system=True)
    add("run-experiment", cmd_run_experiment, "the full pipeline end to end")
    he = add("export-human-eval", cmd_export_human_eval,
             "write a blinded human-annotation sheet", fold=True)
    he.add_argument("--n", type=int, default=None, help="number of rows (default: config)")

    toy = sub.add_parser("make-toy-data", help="write a bundled synthetic corpus")
    toy.add_argument("--out", required=True, help="output directory")
    toy.add_argument("--corpus", choices=("smoke", "zeroshot", "transe"),
                     default="smoke")
    toy.set_defaults(func=cmd_make_toy_data)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except QgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
