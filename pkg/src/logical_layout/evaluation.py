"""
Scoring of annotations against ground truth.

Ground truth and predictions are tables of (document id, element id, kind, label). Elements whose true label is
Other are ignored, every other element is scored one-vs-rest per label, per layout category of its document
(one, two or three and more columns) and averaged over the categories.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from logical_layout.alto_model import LogicalLabel, BLOCK, LINE, annotation_records
from logical_layout.errors import PredictionFormatError, IdMismatchError, TruthMismatchError, ConfigError

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["document_id", "element_id"]
TRUTH_COLUMNS = ["document_id", "element_id", "kind", "label"]
METRICS = ["precision", "recall", "f1"]

LAYOUT_CATEGORIES = ("1c", "2c", "3c+")
MEAN = "Mean"
ALL_LAYOUTS = "all"

# Labels reported per element kind, in table order.
EVALUATED_LABELS = {
    BLOCK: (LogicalLabel.TEXT, LogicalLabel.TITLE, LogicalLabel.HEADER),
    LINE: (LogicalLabel.TEXT, LogicalLabel.TITLE, LogicalLabel.FIRSTLINE, LogicalLabel.HEADER),
}

_COLUMN_ALIASES = {"documentId": "document_id", "elementId": "element_id", "elementKind": "kind"}


########################################################################################################################
# Loading
########################################################################################################################

def _label_value(value, row, path):
    try:
        return LogicalLabel.parse(value).emitted().value
    except ValueError:
        raise PredictionFormatError("unknown label '{}'".format(value), row=row, path=path)


def _kind_value(value, row, path):
    kind = str(value).strip().lower()
    if kind not in (BLOCK, LINE):
        raise PredictionFormatError("unknown element kind '{}', expected block or line".format(value), row=row,
                                    path=path)
    return kind


def _read_records(path, fmt):
    path = Path(path)
    if fmt == "csv":
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        return frame.rename(columns=_COLUMN_ALIASES)
    if fmt == "json":
        text = path.read_text(encoding="utf-8").strip()
        try:
            if text.startswith("["):
                records = json.loads(text)
            else:
                records = [json.loads(line) for line in text.splitlines() if line.strip()]
        except json.JSONDecodeError as e:
            raise PredictionFormatError("invalid JSON: {}".format(e), row=e.lineno, path=str(path))
        frame = pd.DataFrame.from_records(records)
        return frame.rename(columns=_COLUMN_ALIASES).astype(str)
    raise ValueError("Unknown prediction format '{}', expected csv or json.".format(fmt))


def _normalize(frame, path, required, kinds_required=False):
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise PredictionFormatError("missing column(s) {} in '{}'".format(", ".join(missing), path))
    frame = frame.copy()
    if "document_id" not in frame.columns:
        frame["document_id"] = ""
    # rows are numbered from 1, header excluded
    rows = range(1, len(frame) + 1)
    frame["label"] = [_label_value(v, row, path) for v, row in zip(frame["label"], rows)]
    if "kind" in frame.columns:
        frame["kind"] = [_kind_value(v, row, path) for v, row in zip(frame["kind"], rows)]
    elif kinds_required:
        raise PredictionFormatError("missing column kind in '{}'".format(path))
    else:
        frame["kind"] = ""
    frame["document_id"] = frame["document_id"].astype(str)
    frame["element_id"] = frame["element_id"].astype(str)
    duplicated = frame.duplicated(KEY_COLUMNS, keep="first")
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.values)[0]) + 1
        raise PredictionFormatError("duplicate element '{}'".format(frame["element_id"].iloc[row - 1]), row=row,
                                    path=path)
    return frame[TRUTH_COLUMNS].reset_index(drop=True)


def load_predictions(path, fmt=None):
    """
    Reads the labels predicted by any labeler.

    Parameters
    ----------
    path : str or Path
        CSV file with columns `element_id` and `label` (plus optional `document_id` and `kind`), or a JSON file
        holding either an array of records or one record per line, as written by `write_annotated(doc, "json")`.
    fmt : str, optional
        "csv" or "json". Guessed from the file suffix if omitted.

    Returns
    -------
    pd.DataFrame :
        Columns document_id, element_id, kind and label (emitted label values). Missing document ids and kinds are
        empty strings.

    Raises
    ------
    PredictionFormatError :
        If a column is missing, a label is unknown (reported with its row number) or an element occurs twice.

    """
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix.lower() in (".json", ".jsonl") else "csv"
    frame = _read_records(path, fmt)
    predictions = _normalize(frame, str(path), required=["element_id", "label"])
    logger.debug("Read %d predictions from %s", len(predictions), path)
    return predictions


@dataclass
class GroundTruth:
    """ True labels of blocks and lines, and the layout category of each document. """
    frame: pd.DataFrame
    layouts: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        invalid = sorted(set(self.layouts.values()) - set(LAYOUT_CATEGORIES))
        if invalid:
            raise ConfigError("Unknown layout categories: {}. Expected one of {}.".format(
                ", ".join(invalid), ", ".join(LAYOUT_CATEGORIES)))

    def __len__(self):
        return len(self.frame)

    @property
    def fingerprint(self):
        """ Digest identifying the truth labels and layouts, independent of row order. """
        ordered = self.frame.sort_values(KEY_COLUMNS)[TRUTH_COLUMNS]
        digest = hashlib.sha256(ordered.to_csv(index=False).encode("utf-8"))
        for document_id in sorted(self.layouts):
            digest.update("{}={}\n".format(document_id, self.layouts[document_id]).encode("utf-8"))
        return digest.hexdigest()

    def with_layouts(self, layouts):
        return GroundTruth(self.frame, dict(layouts))

    @classmethod
    def from_documents(cls, docs, layouts=None):
        """ Ground truth taken from the labels (or TYPE attributes) of annotated documents. """
        rows = [{k: r[k] for k in TRUTH_COLUMNS} for doc in docs for r in annotation_records(doc)]
        frame = pd.DataFrame(rows, columns=TRUTH_COLUMNS)
        frame["label"] = [LogicalLabel.parse(v).emitted().value for v in frame["label"]]
        return cls(frame, dict(layouts or {}))


def load_truth(path, layouts=None):
    """
    Reads ground truth from a CSV file with columns `document_id, element_id, kind, label`.

    Parameters
    ----------
    path : str or Path
        Ground truth file.
    layouts : str, Path or dict, optional
        Layout manifest (see `load_layouts`) or an already loaded mapping of document ids to layout categories.

    Returns
    -------
    GroundTruth

    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False).rename(columns=_COLUMN_ALIASES)
    frame = _normalize(frame, str(path), required=TRUTH_COLUMNS, kinds_required=True)
    if layouts is not None and not isinstance(layouts, dict):
        layouts = load_layouts(layouts)
    return GroundTruth(frame, dict(layouts or {}))


def load_layouts(path):
    """ Reads a layout manifest: CSV with columns `document_id, layout`, layout being one of 1c, 2c or 3c+. """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if "document_id" not in frame.columns or "layout" not in frame.columns:
        raise PredictionFormatError("the layout manifest '{}' needs columns document_id and layout".format(path))
    layouts = {}
    for row, (document_id, layout) in enumerate(zip(frame["document_id"], frame["layout"]), start=1):
        layout = layout.strip()
        if layout not in LAYOUT_CATEGORIES:
            raise PredictionFormatError("unknown layout category '{}'".format(layout), row=row, path=str(path))
        layouts[document_id] = layout
    return layouts


########################################################################################################################
# Scoring
########################################################################################################################

def layout_mean(values):
    """ Unweighted arithmetic mean over layout categories. """
    return float(np.mean(values)) if len(values) else 0.0


def _match(predictions, truth):
    keys = KEY_COLUMNS
    truth_frame = truth.frame
    if len(predictions) and (predictions["document_id"] == "").all():
        # predictions without document ids are matched on element ids alone
        if truth_frame["element_id"].duplicated().any():
            raise PredictionFormatError("predictions lack document ids but element ids are not unique in the truth")
        keys = ["element_id"]
    merged = truth_frame.merge(predictions[keys + ["label"]], on=keys, how="outer", suffixes=("_true", "_pred"),
                               indicator=True)
    missing = merged[merged["_merge"] == "left_only"]
    unexpected = merged[merged["_merge"] == "right_only"]
    if len(missing) or len(unexpected):
        def as_keys(frame):
            return [tuple(str(v) for v in values) for values in frame[keys].itertuples(index=False)]
        raise IdMismatchError(as_keys(missing), as_keys(unexpected))
    return merged.drop(columns="_merge")


def _check_kinds(merged):
    """ Rejects labels that do not exist for the kind of their element, e.g. a Firstline block. """
    for column, source in (("label_true", "ground truth"), ("label_pred", "predictions")):
        for kind in (BLOCK, LINE):
            allowed = {label.value for label in EVALUATED_LABELS[kind]} | {LogicalLabel.OTHER.value}
            wrong = merged[(merged["kind"] == kind) & ~merged[column].isin(allowed)]
            if len(wrong):
                shown = ", ".join("{}/{} ({})".format(*values) for values in
                                  wrong[["document_id", "element_id", column]].head(10).itertuples(index=False))
                raise PredictionFormatError("{} {} element(s) of the {} carry a label that no {} can have: {}".format(
                    len(wrong), kind, source, kind, shown))


def _scores(y_true, y_pred, labels):
    values = [label.value for label in labels]
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=values, zero_division=0)
    return precision, recall, f1, support


@dataclass
class EvaluationReport:
    """
    Precision, recall and F1 per element kind, layout category and label, with the Mean rows over the layout
    categories, and one confusion matrix per kind (rows: true labels, columns: predicted labels).
    """
    table: pd.DataFrame
    confusion: Dict[str, pd.DataFrame]
    truth_fingerprint: str
    name: str = ""

    @property
    def kinds(self):
        return list(dict.fromkeys(self.table["kind"]))

    def layouts(self, kind=None):
        table = self.table if kind is None else self.table[self.table["kind"] == kind]
        return [layout for layout in dict.fromkeys(table["layout"]) if layout != MEAN]

    def row(self, kind, label, layout=MEAN):
        label = LogicalLabel.parse(label).value
        selected = self.table[(self.table["kind"] == kind) & (self.table["label"] == label)
                              & (self.table["layout"] == layout)]
        if selected.empty:
            raise KeyError((kind, label, layout))
        return selected.iloc[0]

    def metric(self, kind, label, metric="f1", layout=MEAN):
        """ A single value of the report, e.g. `report.metric("block", "Title", "recall", "2c")`. """
        value = self.row(kind, label, layout)[metric]
        return int(value) if metric == "support" else float(value)

    def means(self):
        """ Mean rows indexed by (kind, label). """
        means = self.table[self.table["layout"] == MEAN]
        return means.set_index(["kind", "label"])[METRICS + ["support"]]

    def accuracy(self, kind):
        """ Share of the scored elements of `kind` whose predicted label is correct. """
        matrix = self.confusion[kind]
        total = matrix.values.sum()
        correct = sum(matrix.loc[label, label] for label in matrix.index if label in matrix.columns)
        return float(correct) / total if total else 0.0

    def to_dict(self):
        return {
            "name": self.name,
            "truthFingerprint": self.truth_fingerprint,
            "metrics": [
                {k: (int(v) if k == "support" else float(v) if k in METRICS else v) for k, v in record.items()}
                for record in self.table.to_dict(orient="records")
            ],
            "confusion": {
                kind: {
                    "labels": list(matrix.index),
                    "predicted": list(matrix.columns),
                    "counts": matrix.values.astype(int).tolist(),
                }
                for kind, matrix in self.confusion.items()
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        """ Aligned plain-text tables, one per element kind: labels as rows, P/R/F1 per layout category. """
        parts = []
        if self.name:
            parts.append(self.name)
        for kind in self.kinds:
            table = self.table[self.table["kind"] == kind]
            pivot = table.pivot(index="label", columns="layout", values=METRICS)
            pivot = pivot.swaplevel(axis=1)
            order = self.layouts(kind) + [MEAN]
            pivot = pivot.reindex(columns=pd.MultiIndex.from_product([order, METRICS]))
            pivot = pivot.reindex(index=[label.value for label in EVALUATED_LABELS[kind]])
            pivot.columns = pd.MultiIndex.from_tuples([(layout, _SHORT[m]) for layout, m in pivot.columns])
            pivot.index.name = "Text" + kind.capitalize()
            parts.append(pivot.to_string(float_format="{:.3f}".format))
        return "\n\n".join(parts) + "\n"


_SHORT = {"precision": "P", "recall": "R", "f1": "F1"}


def score(predictions, truth, name=""):
    """
    Scores predicted labels against ground truth.

    Parameters
    ----------
    predictions : pd.DataFrame
        Predictions as returned by `load_predictions`.
    truth : GroundTruth
        True labels, with or without layout categories.
    name : str, optional
        Name of the labeler, used in comparisons.

    Returns
    -------
    EvaluationReport :
        Elements whose true label is Other are excluded. Without layout categories every document counts as a
        single category "all".

    Raises
    ------
    IdMismatchError :
        If predictions and truth do not cover the same elements.
    PredictionFormatError :
        If a true or predicted label does not exist for the kind of its element, e.g. a Firstline block.

    """
    merged = _match(predictions, truth)
    _check_kinds(merged)
    merged = merged[merged["label_true"] != LogicalLabel.OTHER.value].copy()
    if truth.layouts:
        merged["layout"] = merged["document_id"].map(truth.layouts)
        unknown = sorted(set(merged.loc[merged["layout"].isna(), "document_id"]))
        if unknown:
            raise ConfigError("Documents missing from the layout manifest: {}".format(", ".join(unknown)))
        categories = [c for c in LAYOUT_CATEGORIES if (merged["layout"] == c).any()]
    else:
        logger.warning("No layout categories given, reporting all documents as one category.")
        merged["layout"] = ALL_LAYOUTS
        categories = [ALL_LAYOUTS]

    rows = []
    confusion = {}
    for kind in (BLOCK, LINE):
        scored = merged[merged["kind"] == kind]
        if scored.empty:
            continue
        labels = EVALUATED_LABELS[kind]
        kind_categories = [c for c in categories if (scored["layout"] == c).any()]
        per_layout = {}
        for category in kind_categories:
            subset = scored[scored["layout"] == category]
            per_layout[category] = _scores(subset["label_true"], subset["label_pred"], labels)
            precision, recall, f1, support = per_layout[category]
            for i, label in enumerate(labels):
                rows.append((kind, category, label.value, precision[i], recall[i], f1[i], int(support[i])))
        for i, label in enumerate(labels):
            values = [per_layout[c] for c in kind_categories]
            rows.append((kind, MEAN, label.value,
                         layout_mean([v[0][i] for v in values]),
                         layout_mean([v[1][i] for v in values]),
                         layout_mean([v[2][i] for v in values]),
                         int(sum(v[3][i] for v in values))))
        columns = [label.value for label in labels] + [LogicalLabel.OTHER.value]
        matrix = confusion_matrix(scored["label_true"], scored["label_pred"], labels=columns)
        confusion[kind] = pd.DataFrame(matrix[:len(labels)], index=columns[:len(labels)], columns=columns)
        logger.debug("Scored %d %s elements", len(scored), kind)

    table = pd.DataFrame(rows, columns=["kind", "layout", "label"] + METRICS + ["support"])
    return EvaluationReport(table=table, confusion=confusion, truth_fingerprint=truth.fingerprint, name=name)


########################################################################################################################
# Comparison
########################################################################################################################

@dataclass
class Comparison:
    """ Mean precision, recall and F1 of several labelers side by side, with the best value of each column flagged. """
    table: pd.DataFrame
    best: pd.DataFrame

    @property
    def names(self):
        return list(dict.fromkeys(self.table.columns.get_level_values(0)))

    def to_text(self):
        """ Plain-text table, best values bolded as `**0.962**`. """
        cells = self.table.copy().astype(object)
        for column in self.table.columns:
            cells[column] = ["**{:.3f}**".format(v) if flag else "{:.3f}".format(v)
                             for v, flag in zip(self.table[column], self.best[column])]
        cells.columns = pd.MultiIndex.from_tuples([(name, _SHORT[m]) for name, m in cells.columns])
        return cells.to_string() + "\n"

    def to_dict(self):
        rows = []
        for (kind, label), values in self.table.iterrows():
            for name in self.names:
                rows.append({
                    "kind": kind,
                    "label": label,
                    "name": name,
                    **{m: float(values[(name, m)]) for m in METRICS},
                    "best": [m for m in METRICS if bool(self.best.loc[(kind, label), (name, m)])],
                })
        return {"systems": self.names, "rows": rows}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def compare(reports):
    """
    Puts the Mean rows of several reports side by side.

    Parameters
    ----------
    reports : dict or list
        Mapping of names to `EvaluationReport`s, or a list of reports named by their `name` attribute.

    Returns
    -------
    Comparison :
        For each (kind, label) row and each metric, every system reaching the maximum is flagged, so ties flag all
        maxima.

    Raises
    ------
    TruthMismatchError :
        If the reports were not computed on the same ground truth.

    """
    if not isinstance(reports, dict):
        reports = {report.name or "system{}".format(i + 1): report for i, report in enumerate(reports)}
    if len(reports) < 2:
        raise ValueError("At least two reports are needed for a comparison, got {}.".format(len(reports)))
    fingerprints = {report.truth_fingerprint for report in reports.values()}
    if len(fingerprints) > 1:
        raise TruthMismatchError(list(reports))

    names = list(reports)
    table = pd.concat({name: reports[name].means()[METRICS] for name in names}, axis=1)
    best = pd.DataFrame(False, index=table.index, columns=table.columns)
    for metric in METRICS:
        values = table.xs(metric, axis=1, level=1)
        maxima = values.max(axis=1)
        for name in names:
            best[(name, metric)] = np.isclose(values[name], maxima, rtol=0, atol=1e-12)
    return Comparison(table=table, best=best)
