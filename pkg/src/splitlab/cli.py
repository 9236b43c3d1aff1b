"""Command line entry point: ``splitlab {run,split,diagnose,pca,synth}``."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .data import SynthConfig, default_synth_config, generate_synthetic, read_dataset, save_dataset, standardize
from .diagnostics import SimilarityReport, pca_fit, similarity_diagnostic, write_pca_csv
from .exceptions import SplitlabError
from .harness import ExperimentConfig, load_dataset, run_experiment, write_report
from .learners import LEARNERS
from .splitting import Aggregation, SplitConfig, SplitPair, Strategy, make_split

EXIT_FAILURE = 1
EXIT_USAGE = 2


class StageError(Exception):
    def __init__(self, stage, error):
        self.stage = stage
        super().__init__(f"{stage} failed: {error}")


def _add_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="dataset CSV (default: built-in synthetic data)")
    src.add_argument("--synth-config", help="synthetic generator config JSON")
    p.add_argument("--assume-normalized", action="store_true",
                   help="reject predictor values above 1 on ingest")


def _add_split_opts(p):
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--n-clusters", type=int, default=10)
    p.add_argument("--aggregation", choices=[a.value for a in Aggregation], default="mean")


def build_parser():
    parser = argparse.ArgumentParser(prog="splitlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full repeated experiment")
    _add_source(run)
    _add_split_opts(run)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--repeats", type=int, default=25)
    run.add_argument("--strategy", action="append", choices=[s.value for s in Strategy],
                     help="repeatable; default all four")
    run.add_argument("--learner", action="append", choices=sorted(LEARNERS),
                     help="repeatable; default both")
    run.add_argument("--threads", type=int, help="overrides SPLITLAB_THREADS")
    run.add_argument("--no-pca", action="store_true", help="skip pca_*.csv exports")
    run.add_argument("--out", required=True, help="output directory")

    split = sub.add_parser("split", help="produce one train/test split as JSON")
    _add_source(split)
    _add_split_opts(split)
    split.add_argument("--strategy", choices=[s.value for s in Strategy], default="monte_carlo")
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--repeat", type=int, default=0)
    split.add_argument("--out", help="output JSON path (default: stdout)")

    diag = sub.add_parser("diagnose", help="not-recognized fraction of a split's test rows")
    _add_source(diag)
    diag.add_argument("--split", required=True, help="split JSON from `splitlab split`")
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--out", help="output JSON path (default: stdout)")

    pca = sub.add_parser("pca", help="2-D PCA projection as CSV")
    _add_source(pca)
    pca.add_argument("--split", help="restrict to a split's rows and tag their side")
    pca.add_argument("--seed", type=int, default=0, help="seed for synthetic data")
    pca.add_argument("--out", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    synth.add_argument("--config", help="generator config JSON (default: built-in layout)")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", help="dataset CSV path")
    synth.add_argument("--write-config", help="also write the generator config JSON here")
    return parser


def _load(args, seed=0):
    try:
        if args.input:
            return read_dataset(args.input, assume_normalized=args.assume_normalized)
        return load_dataset(ExperimentConfig(synth_config_path=args.synth_config, seed=seed))
    except SplitlabError as exc:
        raise StageError("ingest", exc) from exc


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_split(path):
    with open(path, encoding="utf-8") as fh:
        return SplitPair.from_json(fh.read())


def cmd_run(args):
    try:
        config = ExperimentConfig(
            input_path=args.input, synth_config_path=args.synth_config, n_train=args.n_train,
            n_test=args.n_test, repeats=args.repeats, seed=args.seed,
            strategies=tuple(args.strategy or [s.value for s in Strategy]),
            learners=tuple(args.learner or LEARNERS), n_clusters=args.n_clusters,
            aggregation=args.aggregation, out_dir=args.out, threads=args.threads,
            assume_normalized=args.assume_normalized, export_pca=not args.no_pca)
    except SplitlabError as exc:
        raise StageError("config", exc) from exc
    dataset = _load(args, seed=args.seed)
    try:
        report = run_experiment(config, dataset=dataset)
    except SplitlabError as exc:
        raise StageError("experiment", exc) from exc
    write_report(report, args.out, dataset=dataset, export_pca=config.export_pca)
    failed = sum(r["status"] != "ok" for r in report.rows)
    print(f"wrote {len(report.rows)} rows ({failed} failed) to {args.out}")
    return 0


def cmd_split(args):
    dataset = _load(args, seed=args.seed)
    try:
        config = SplitConfig(n_train=args.n_train, n_test=args.n_test, seed=args.seed,
                             strategy=args.strategy, aggregation=args.aggregation,
                             n_clusters=args.n_clusters)
        pair = make_split(dataset, config, args.repeat)
    except SplitlabError as exc:
        raise StageError(f"{args.strategy} split", exc) from exc
    _emit(pair.to_json() + "\n", args.out)
    return 0


def cmd_diagnose(args):
    dataset = _load(args, seed=args.seed)
    pair = _read_split(args.split)
    try:
        frac = similarity_diagnostic(dataset.X[pair.train_indices], dataset.X[pair.test_indices], args.seed)
    except SplitlabError as exc:
        raise StageError("diagnostic", exc) from exc
    report = SimilarityReport.from_fractions([frac]).to_dict()
    report.update(strategy=pair.strategy.value, split_seed=pair.seed, repeat=pair.repeat)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_pca(args):
    dataset = _load(args, seed=args.seed)
    Z = standardize(dataset.X, dataset.column_stats)
    try:
        model = pca_fit(Z)
    except SplitlabError as exc:
        raise StageError("pca", exc) from exc
    if args.split:
        pair = _read_split(args.split)
        idx = np.concatenate([pair.train_indices, pair.test_indices])
        sides = ["train"] * pair.train_indices.shape[0] + ["test"] * pair.test_indices.shape[0]
    else:
        idx = np.arange(len(dataset))
        sides = ["all"] * len(dataset)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_pca_csv(fh, model.transform(Z[idx]), dataset.y[idx], dataset.groups[idx], sides)
    ratio = ", ".join(f"{r:.3f}" for r in model.explained_variance_ratio_)
    print(f"explained variance ratio: {ratio}")
    return 0


def cmd_synth(args):
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                config = SynthConfig.from_json(fh.read())
        else:
            config = default_synth_config()
        if args.write_config:
            _emit(config.to_json() + "\n", args.write_config)
        if args.out:
            save_dataset(generate_synthetic(config, seed=args.seed), args.out)
    except (SplitlabError, KeyError, ValueError) as exc:
        raise StageError("synth", exc) from exc
    return 0


COMMANDS = {"run": cmd_run, "split": cmd_split, "diagnose": cmd_diagnose, "pca": cmd_pca,
            "synth": cmd_synth}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for attr in ("input", "synth_config", "config", "split"):
        path = getattr(args, attr, None)
        if path and not os.path.exists(path):
            print(f"splitlab {args.command}: error: file not found: {path}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"splitlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
