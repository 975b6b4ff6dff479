"""
Command line interface: `logical-layout annotate | extract-features | train | evaluate`.

Exit codes are 0 on success, 1 when an input or an argument could not be processed and 2 on internal errors.
"""
import argparse
import logging
import sys
from pathlib import Path

import pandas as pd
from joblib import Parallel, delayed

from logical_layout.alto_model import BLOCK, LINE, LogicalLabel, parse_alto_file, write_annotated
from logical_layout.config import load_config
from logical_layout.errors import LayoutError, ConfigError, TrainingDataError
from logical_layout.evaluation import load_predictions, load_truth, score, compare
from logical_layout.features import extract_features, feature_csv, LINE_ID_COLUMNS, BLOCK_ID_COLUMNS, \
    LINE_LEARNING_FEATURES, BLOCK_LEARNING_FEATURES
from logical_layout.ripper import Hyperparameters, HyperGrid, RipperModel, OneVsRest, RipperLabeler, fit, \
    grid_search
from logical_layout.rule_engine import annotate
from logical_layout.utils import atomic_write

logger = logging.getLogger(__name__)

OUTPUT_SUFFIXES = {"alto": ".annotated.xml", "json": ".json", "csv": ".csv"}

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INTERNAL = 2


def setup_logging(verbose=False):
    """ Logs to standard error; results only go to files and standard output. """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _config(args):
    return load_config(args.config, seed=args.seed, jobs=args.jobs)


def _run_batch(worker, inputs, jobs):
    """ Runs `worker` on every input in a bounded pool; returns the number of failed inputs. """
    results = Parallel(n_jobs=jobs)(delayed(worker)(path) for path in inputs)
    failures = 0
    for path, error in zip(inputs, results):
        if error is not None:
            logger.error("%s: %s", path, error)
            failures += 1
    return failures


########################################################################################################################
# annotate
########################################################################################################################

def _load_labeler(model_paths, header_words):
    models = [RipperModel.from_json(Path(p).read_text(encoding="utf-8")) for p in model_paths]
    by_kind = {BLOCK: {}, LINE: {}}
    for model in models:
        if model.kind not in by_kind:
            raise ConfigError("Model for {} has no element kind.".format(model.positive_class))
        by_kind[model.kind][model.positive_class] = model
    for kind, kind_models in by_kind.items():
        if not kind_models:
            raise ConfigError("No {} model given; annotating with models needs block and line models.".format(kind))
    return RipperLabeler(OneVsRest(by_kind[BLOCK]), OneVsRest(by_kind[LINE]), header_words)


class _Annotator:
    """ Annotates one file; picklable so that it can run in worker processes. """

    def __init__(self, config, rule_book, labeler, fmt, out_dir):
        self.config = config
        self.rule_book = rule_book
        self.labeler = labeler
        self.fmt = fmt
        self.out_dir = Path(out_dir)
        self.header_words = config.header_word_set()

    def __call__(self, path):
        path = Path(path)
        try:
            doc = parse_alto_file(path, doc_title=self.config.doc_title)
            features = extract_features(doc, self.header_words)
            if self.labeler is not None:
                self.labeler.annotate(doc, features)
            else:
                annotate(doc, self.config, rule_book=self.rule_book, features=features)
            atomic_write(self.out_dir / (path.stem + OUTPUT_SUFFIXES[self.fmt]), write_annotated(doc, self.fmt))
        except (LayoutError, OSError) as e:
            return str(e)
        except Exception as e:
            logger.exception("Unexpected error on %s", path)
            return "unexpected error: {!r}".format(e)
        return None


def cmd_annotate(args):
    config = _config(args)
    labeler = _load_labeler(args.model, config.header_word_set()) if args.model else None
    rule_book = None if labeler is not None else config.rule_book()
    worker = _Annotator(config, rule_book, labeler, args.format, args.out_dir)
    failures = _run_batch(worker, args.inputs, config.jobs)
    logger.info("Annotated %d of %d documents", len(args.inputs) - failures, len(args.inputs))
    return EXIT_FAILURE if failures else EXIT_OK


########################################################################################################################
# extract-features
########################################################################################################################

class _FeatureWriter:

    def __init__(self, config, out_dir):
        self.config = config
        self.out_dir = Path(out_dir)
        self.header_words = config.header_word_set()

    def __call__(self, path):
        path = Path(path)
        try:
            doc = parse_alto_file(path, doc_title=self.config.doc_title)
            features = extract_features(doc, self.header_words)
            atomic_write(self.out_dir / (path.stem + ".lines.csv"), feature_csv(features.lines))
            atomic_write(self.out_dir / (path.stem + ".blocks.csv"), feature_csv(features.blocks))
            atomic_write(self.out_dir / (path.stem + ".document.json"), features.document.to_json())
        except (LayoutError, OSError) as e:
            return str(e)
        except Exception as e:
            logger.exception("Unexpected error on %s", path)
            return "unexpected error: {!r}".format(e)
        return None


def cmd_extract_features(args):
    config = _config(args)
    failures = _run_batch(_FeatureWriter(config, args.out_dir), args.inputs, config.jobs)
    return EXIT_FAILURE if failures else EXIT_OK


########################################################################################################################
# train
########################################################################################################################

def read_training_data(feature_paths, truth_path, kind):
    """
    Joins feature CSVs written by `extract-features` with the ground truth labels of their elements.

    Returns
    -------
    tuple :
        (features as pd.DataFrame, list of label values)

    """
    id_columns = LINE_ID_COLUMNS if kind == LINE else BLOCK_ID_COLUMNS
    frames = [pd.read_csv(p, dtype={c: str for c in id_columns}, keep_default_na=False) for p in feature_paths]
    features = pd.concat(frames, ignore_index=True)
    missing = [c for c in id_columns if c not in features.columns]
    if missing:
        raise TrainingDataError("The feature files lack the column(s) {}; are they {} features?".format(
            ", ".join(missing), kind))
    truth = load_truth(truth_path).frame
    truth = truth[truth["kind"] == kind]
    merged = features.merge(truth[["document_id", "element_id", "label"]], on=["document_id", "element_id"],
                            how="left")
    unlabeled = merged["label"].isna().sum()
    if unlabeled:
        logger.warning("Dropping %d %s examples without ground truth", unlabeled, kind)
        merged = merged[merged["label"].notna()].reset_index(drop=True)
    if merged.empty:
        raise TrainingDataError("No {} example has a ground truth label.".format(kind))
    return merged.drop(columns=id_columns + ["label"]), list(merged["label"])


def _feature_columns(frame, kind, feature_set):
    if feature_set == "all":
        return list(frame.columns)
    learning = LINE_LEARNING_FEATURES if kind == LINE else BLOCK_LEARNING_FEATURES
    dropped = [c for c in frame.columns if c not in learning]
    if dropped:
        logger.warning("Not learning from the %s column(s) outside the learning feature set: %s", kind,
                       ", ".join(dropped))
    return [f for f in learning if f in frame.columns]


def cmd_train(args):
    config = _config(args)
    label = LogicalLabel.parse(args.label)
    frame, labels = read_training_data(args.features, args.truth, args.kind)
    features = _feature_columns(frame, args.kind, args.feature_set)
    out = Path(args.out)

    if args.grid:
        hyperparameters, table = grid_search(frame, labels, label, HyperGrid(), folds=args.folds, seed=config.seed,
                                             features=features, jobs=config.jobs)
        atomic_write(out.with_suffix(".grid.csv"), table.to_csv(index=False, float_format="%.6f"))
        logger.info("Grid search scores written to %s", out.with_suffix(".grid.csv"))
    else:
        hyperparameters = Hyperparameters(
            prune_size=args.prune_size, k=args.k, dl_allowance=args.dl_allowance,
            n_discretize_bins=args.n_discretize_bins)

    model = fit(frame, labels, label, hyperparameters, seed=config.seed, features=features, kind=args.kind)
    atomic_write(out.with_suffix(".json"), model.to_json())
    atomic_write(out.with_suffix(".rules"), model.to_rules_text())
    for line in model.describe():
        print(line)
    logger.info("Learned %d rules for %s %s", len(model.rules), args.kind, label)
    return EXIT_OK


########################################################################################################################
# evaluate
########################################################################################################################

def cmd_evaluate(args):
    truth = load_truth(args.truth, layouts=args.layouts)
    names = args.name or [Path(p).stem for p in args.predictions]
    if len(names) != len(args.predictions):
        raise ConfigError("Got {} names for {} prediction files.".format(len(names), len(args.predictions)))
    reports = {name: score(load_predictions(path), truth, name=name) for name, path in zip(names, args.predictions)}

    if len(reports) == 1:
        report = next(iter(reports.values()))
        sys.stdout.write(report.to_text())
        document = report.to_json()
    else:
        for report in reports.values():
            sys.stdout.write(report.to_text() + "\n")
        comparison = compare(reports)
        sys.stdout.write(comparison.to_text())
        document = comparison.to_json()
    if args.out:
        atomic_write(args.out, document + "\n")
    return EXIT_OK


########################################################################################################################
# Entry point
########################################################################################################################

def build_parser():
    parser = argparse.ArgumentParser(prog="logical-layout",
                                     description="Logical layout analysis of XML ALTO documents.")
    parser.add_argument("--config", type=Path, help="YAML configuration file.")
    parser.add_argument("--seed", type=int, help="Random seed (default: 0 or the configured seed).")
    parser.add_argument("--jobs", type=int, help="Number of worker processes (default: 1).")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log debug messages.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("annotate", help="Label the blocks and lines of ALTO files.")
    p.add_argument("inputs", nargs="+", type=Path, help="ALTO files.")
    p.add_argument("--format", choices=sorted(OUTPUT_SUFFIXES), default="alto", help="Output format.")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="Output directory.")
    p.add_argument("--model", action="append", type=Path,
                   help="Learned model (JSON written by train); repeat for every label. Replaces the rule sets.")
    p.set_defaults(func=cmd_annotate)

    p = commands.add_parser("extract-features", help="Write the line, block and document features of ALTO files.")
    p.add_argument("inputs", nargs="+", type=Path, help="ALTO files.")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="Output directory.")
    p.set_defaults(func=cmd_extract_features)

    p = commands.add_parser("train", help="Learn the rules of one label with RIPPER.")
    p.add_argument("features", nargs="+", type=Path, help="Line or block feature CSVs written by extract-features.")
    p.add_argument("--truth", type=Path, required=True, help="Ground truth CSV.")
    p.add_argument("--label", required=True, help="Label to learn, e.g. Title.")
    p.add_argument("--kind", choices=[BLOCK, LINE], required=True, help="Element kind of the feature files.")
    p.add_argument("--out", type=Path, required=True,
                   help="Output path stem; writes <out>.json, <out>.rules and with --grid <out>.grid.csv.")
    p.add_argument("--feature-set", choices=["learning", "all"], default="learning",
                   help="Learn from the learning feature subset or from all columns.")
    p.add_argument("--grid", action="store_true", help="Select the hyperparameters by cross-validated grid search.")
    p.add_argument("--folds", type=int, default=3, help="Folds of the grid search.")
    defaults = Hyperparameters()
    p.add_argument("--prune-size", type=float, default=defaults.prune_size)
    p.add_argument("--k", type=int, default=defaults.k, help="Optimisation rounds.")
    p.add_argument("--dl-allowance", type=float, default=defaults.dl_allowance)
    p.add_argument("--n-discretize-bins", type=int, default=defaults.n_discretize_bins)
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("evaluate", help="Score predictions against ground truth.")
    p.add_argument("predictions", nargs="+", type=Path, help="Prediction files (CSV or JSON lines).")
    p.add_argument("--truth", type=Path, required=True, help="Ground truth CSV.")
    p.add_argument("--layouts", type=Path, help="Layout manifest CSV (document_id, layout).")
    p.add_argument("--name", action="append", help="Name of each prediction file, in order.")
    p.add_argument("--out", type=Path, help="Write the report as JSON.")
    p.set_defaults(func=cmd_evaluate)
    return parser


def run(argv=None):
    """ Runs the command line and returns the exit code. """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_FAILURE
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (LayoutError, OSError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_FAILURE
    except Exception:
        logger.exception("Internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(run())
