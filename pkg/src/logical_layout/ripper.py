"""
RIPPER rule induction.

One binary model is learned per logical label: continuous features are discretised into equal-frequency bins,
rules are grown with the FOIL gain on a growing set and pruned on a pruning set, the rule set is built by sequential
covering with a description length stopping criterion, then simplified and optimised. `OneVsRest` combines the
binary models, `RipperLabeler` chains the block and line models to annotate documents.
"""
import itertools
import json
import logging
import math
import numbers
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import gammaln
from sklearn.metrics import f1_score
from sklearn.model_selection import StratifiedKFold

from logical_layout.alto_model import LogicalLabel, BLOCK, LINE, label_from_type
from logical_layout.errors import FeatureMissingError, TrainingDataError
from logical_layout.features import extract_features
from logical_layout.rules import Condition, Constant, Ref, Rule, Clause, RuleBook, IN_RANGE, IS_TRUE, IS_FALSE, \
    format_rules, format_value

logger = logging.getLogger(__name__)

BOOLEAN = "boolean"
CATEGORICAL = "categorical"
CONTINUOUS = "continuous"

LEVELS = {BLOCK: "B", LINE: "L"}


@dataclass(frozen=True)
class Hyperparameters:
    prune_size: float = .33
    k: int = 2
    dl_allowance: float = 64
    n_discretize_bins: int = 10

    def as_tuple(self):
        return self.prune_size, self.k, self.dl_allowance, self.n_discretize_bins


@dataclass(frozen=True)
class HyperGrid:
    prune_size: tuple = (.25, .33, .50)
    k: tuple = (1, 2)
    dl_allowance: tuple = (32, 64, 128)
    n_discretize_bins: tuple = (5, 10, 20, 30)

    def combinations(self):
        """ Cartesian product of the value lists, in lexicographic order. """
        return [Hyperparameters(*values)
                for values in itertools.product(self.prune_size, self.k, self.dl_allowance, self.n_discretize_bins)]

    def __len__(self):
        return len(self.prune_size) * len(self.k) * len(self.dl_allowance) * len(self.n_discretize_bins)


# Best grid search results per (kind, label) on a corpus of French newspapers; a reference, not the defaults.
REFERENCE_HYPERPARAMETERS = {
    (BLOCK, LogicalLabel.HEADER): Hyperparameters(.5, 2, 64, 10),
    (BLOCK, LogicalLabel.TITLE): Hyperparameters(.33, 1, 64, 10),
    (BLOCK, LogicalLabel.TEXT): Hyperparameters(.25, 2, 64, 10),
    (LINE, LogicalLabel.HEADER): Hyperparameters(.33, 1, 64, 10),
    (LINE, LogicalLabel.TITLE): Hyperparameters(.25, 1, 64, 10),
    (LINE, LogicalLabel.FIRSTLINE): Hyperparameters(.33, 1, 64, 10),
    (LINE, LogicalLabel.TEXT): Hyperparameters(.5, 2, 64, 10),
}


########################################################################################################################
# Discretisation
########################################################################################################################

@dataclass(frozen=True)
class Bin:
    feature: str
    lower: float
    upper: float

    def __str__(self):
        return "{} < {} <= {}".format(format_value(self.lower), self.feature, format_value(self.upper))


def _feature_kind(series):
    if pd.api.types.is_bool_dtype(series):
        return BOOLEAN
    if pd.api.types.is_numeric_dtype(series):
        return CONTINUOUS
    return CATEGORICAL


def _categorical_values(series):
    return series.fillna("").astype(str).to_numpy()


class Discretizer:
    """
    Equal-frequency cut points of the continuous features, learned on training data.

    A value x of a feature with cut points c_1 < ... < c_m falls in bin j when c_j < x <= c_(j+1), the outermost
    bins being unbounded.

    """

    def __init__(self, kinds, cuts=None, categories=None):
        self.kinds = dict(kinds)
        self.cuts = {f: list(v) for f, v in (cuts or {}).items()}
        self.categories = {f: list(v) for f, v in (categories or {}).items()}

    @classmethod
    def fit(cls, frame, n_bins):
        if n_bins < 2:
            raise ValueError("n_bins must be at least 2, got {}.".format(n_bins))
        kinds, cuts, categories = {}, {}, {}
        for column in frame.columns:
            kind = _feature_kind(frame[column])
            kinds[column] = kind
            if kind == CONTINUOUS:
                values = frame[column].to_numpy(dtype=float)
                if len(values) == 0:
                    cuts[column] = []
                    continue
                probabilities = np.arange(1, n_bins) / n_bins
                points = np.unique(np.quantile(values, probabilities, method="lower"))
                cuts[column] = [float(p) for p in points if p < values.max()]
            elif kind == CATEGORICAL:
                categories[column] = sorted(set(_categorical_values(frame[column])))
        return cls(kinds, cuts, categories)

    @property
    def features(self):
        return list(self.kinds)

    def n_bins(self, feature):
        return len(self.cuts[feature]) + 1

    def bin_bounds(self, feature, index):
        cuts = self.cuts[feature]
        lower = -math.inf if index == 0 else cuts[index - 1]
        upper = math.inf if index == len(cuts) else cuts[index]
        return lower, upper

    def bins(self):
        return [Bin(f, *self.bin_bounds(f, j)) for f, kind in self.kinds.items() if kind == CONTINUOUS
                for j in range(self.n_bins(f))]

    def transform(self, frame):
        """ Bin indices for continuous features, other features unchanged. """
        binned = frame.copy()
        for feature, kind in self.kinds.items():
            if kind == CONTINUOUS:
                binned[feature] = np.searchsorted(np.asarray(self.cuts[feature], dtype=float),
                                                  frame[feature].to_numpy(dtype=float), side="left")
        return binned

    def candidate_conditions(self):
        """
        All conditions a rule can use, ordered by feature then by bin range.

        Continuous features give one interval per bin plus the intervals open to either side; booleans give
        `= true` and `= false`; categorical features one equality test per observed value.

        """
        conditions = []
        for feature, kind in self.kinds.items():
            if kind == BOOLEAN:
                conditions += [InducedCondition(feature, value=True), InducedCondition(feature, value=False)]
            elif kind == CATEGORICAL:
                conditions += [InducedCondition(feature, value=v) for v in self.categories[feature]]
            else:
                last = self.n_bins(feature) - 1
                ranges = {(j, j) for j in range(last + 1)}
                ranges |= {(0, j) for j in range(last)}
                ranges |= {(j, last) for j in range(1, last + 1)}
                ranges.discard((0, last))
                for lo, hi in sorted(ranges):
                    conditions.append(InducedCondition(feature, self.bin_bounds(feature, lo)[0],
                                                       self.bin_bounds(feature, hi)[1]))
        return conditions

    def to_dict(self):
        return {"kinds": self.kinds, "cuts": self.cuts, "categories": self.categories}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kinds"], data.get("cuts"), data.get("categories"))


def discretize(frame, n_bins):
    """
    Equal-frequency discretisation of the continuous columns of `frame`.

    Cut points are the quantiles k / n_bins of the training values (lower order statistic), duplicates merged and
    cut points equal to the maximum dropped, so a constant feature gives a single bin.

    Parameters
    ----------
    frame : pd.DataFrame
        Training features; boolean and non-numeric columns pass through.
    n_bins : int
        Maximum number of bins per feature, at least 2.

    Returns
    -------
    tuple :
        (binned frame, list of Bin)

    """
    discretizer = Discretizer.fit(frame, n_bins)
    return discretizer.transform(frame), discretizer.bins()


########################################################################################################################
# Rules
########################################################################################################################

@dataclass(frozen=True)
class InducedCondition:
    """ `lower < feature <= upper` for continuous features, `feature = value` otherwise. """
    feature: str
    lower: float = -math.inf
    upper: float = math.inf
    value: object = None

    def covers(self, frame):
        column = frame[self.feature]
        if isinstance(self.value, (bool, np.bool_)):
            return column.to_numpy(dtype=bool) == bool(self.value)
        if self.value is not None:
            return _categorical_values(column) == self.value
        values = column.to_numpy(dtype=float)
        return (values > self.lower) & (values <= self.upper)

    def describe(self, level=None):
        name = "{}.{}".format(level, self.feature) if level else self.feature
        if isinstance(self.value, (bool, np.bool_)):
            return name if self.value else "not " + name
        if self.value is not None:
            return "{} = {}".format(name, format_value(self.value))
        if self.lower == -math.inf:
            return "{} <= {}".format(name, format_value(self.upper))
        if self.upper == math.inf:
            return "{} > {}".format(name, format_value(self.lower))
        return "{} < {} <= {}".format(format_value(self.lower), name, format_value(self.upper))

    def to_condition(self, level):
        ref = Ref(level, self.feature)
        if isinstance(self.value, (bool, np.bool_)):
            return Condition(ref, IS_TRUE if self.value else IS_FALSE)
        if self.value is not None:
            return Condition(ref, "=", Constant(self.value))
        if self.lower == -math.inf:
            return Condition(ref, "<=", Constant(self.upper))
        if self.upper == math.inf:
            return Condition(ref, ">", Constant(self.lower))
        return Condition(ref, IN_RANGE, (Constant(self.lower), Constant(self.upper)))

    def to_dict(self):
        return {
            "feature": self.feature,
            "lower": None if self.lower == -math.inf else self.lower,
            "upper": None if self.upper == math.inf else self.upper,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["feature"],
                   -math.inf if data.get("lower") is None else data["lower"],
                   math.inf if data.get("upper") is None else data["upper"],
                   data.get("value"))


@dataclass
class InducedRule:
    conditions: tuple
    covered_positives: int = 0
    covered_negatives: int = 0
    dl: float = 0.

    def covers(self, frame):
        mask = np.ones(len(frame), dtype=bool)
        for condition in self.conditions:
            mask &= condition.covers(frame)
        return mask

    @property
    def laplace(self):
        """ Laplace corrected precision of the rule on its training coverage. """
        return (self.covered_positives + 1) / (self.covered_positives + self.covered_negatives + 2)

    def to_dict(self):
        return {
            "conditions": [c.to_dict() for c in self.conditions],
            "covered_positives": self.covered_positives,
            "covered_negatives": self.covered_negatives,
            "dl": self.dl,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(InducedCondition.from_dict(c) for c in data["conditions"]), data["covered_positives"],
                   data["covered_negatives"], data["dl"])


def format_rule(rule, label, level=None):
    """ Readable form of an induced rule, e.g. "L.followingSpace > 75 and 745 < L.width <= 970 → Title". """
    return "{} → {}".format(" and ".join(c.describe(level) for c in rule.conditions), label)


class ConditionSpace:
    """ The candidate conditions of a training set with their coverage masks (conditions x rows). """

    def __init__(self, frame, discretizer):
        self.discretizer = discretizer
        self.conditions = discretizer.candidate_conditions()
        self.index = {c: i for i, c in enumerate(self.conditions)}
        if self.conditions:
            self.masks = np.vstack([c.covers(frame) for c in self.conditions])
        else:
            self.masks = np.zeros((0, len(frame)), dtype=bool)

    @classmethod
    def from_frame(cls, frame, n_bins=10):
        return cls(frame, Discretizer.fit(frame, n_bins))

    def __len__(self):
        return len(self.conditions)

    @property
    def n_rows(self):
        return self.masks.shape[1]

    def mask(self, conditions):
        """ Rows covered by the conjunction of `conditions`. """
        mask = np.ones(self.n_rows, dtype=bool)
        for condition in conditions:
            mask &= self.masks[self.index[condition]]
        return mask


########################################################################################################################
# Metrics
########################################################################################################################

def foil_gain(p0, n0, p1, n1):
    """
    FOIL information gain of specialising a rule.

    Parameters
    ----------
    p0, n0 : int
        Positive and negative examples covered before adding the condition.
    p1, n1 : int
        Positive and negative examples covered after adding it.

    Returns
    -------
    float :
        p1 * (log2(p1 / (p1 + n1)) - log2(p0 / (p0 + n0))), 0 when p1 is 0.

    """
    if min(p0, n0, p1, n1) < 0:
        raise ValueError("Counts must be non-negative, got {}.".format((p0, n0, p1, n1)))
    if p1 == 0 or p0 == 0:
        return 0.
    return p1 * (math.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))


def _foil_gains(p0, n0, p1, n1):
    p1 = p1.astype(float)
    n1 = n1.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = p1 * (np.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))
    gains[p1 == 0] = -np.inf
    return gains


def rule_quality(positives, negatives):
    """ (P - N) / (P + N) on the pruning set; -1 for a rule covering nothing. """
    if positives + negatives == 0:
        return -1.
    return (positives - negatives) / (positives + negatives)


def _integer_code_length(k):
    if k == 0:
        return 0.
    return math.log2(k) + 2 * math.log2(math.log2(k + 1) + 1)


def _log2_choose(n, k):
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / math.log(2)


def description_length(rule, n_possible, uncovered_positives, false_positives, covered=None, uncovered=None):
    """
    Description length in bits of a rule and its exceptions.

    The rule costs ||k|| + k * log2(C) bits for k conditions out of C possible ones, ||k|| being a universal code
    for integers; the exceptions cost log2(covered choose false_positives) + log2(uncovered choose
    uncovered_positives). The sum is halved to account for redundancy among conditions.

    Parameters
    ----------
    rule : InducedRule or int
        The rule, or its number of conditions.
    n_possible : int
        Number of conditions a rule can choose from.
    uncovered_positives : int
        Positive examples not covered.
    false_positives : int
        Negative examples covered.
    covered : int, optional
        Examples covered (default `false_positives`).
    uncovered : int, optional
        Examples not covered (default `uncovered_positives`).

    Returns
    -------
    float

    """
    k = rule if isinstance(rule, numbers.Integral) else len(rule.conditions)
    covered = false_positives if covered is None else covered
    uncovered = uncovered_positives if uncovered is None else uncovered
    if min(k, n_possible, uncovered_positives, false_positives, covered, uncovered) < 0:
        raise ValueError("Counts must be non-negative.")
    if false_positives > covered or uncovered_positives > uncovered:
        raise ValueError("Exceptions cannot exceed the examples they are drawn from.")
    rule_bits = 0.
    if k > 0:
        rule_bits = _integer_code_length(k) + k * math.log2(max(n_possible, 1))
    exception_bits = _log2_choose(covered, false_positives) + _log2_choose(uncovered, uncovered_positives)
    return 0.5 * (rule_bits + exception_bits)


########################################################################################################################
# Growing and pruning
########################################################################################################################

def grow_rule(space, y, rows, start=()):
    """
    Greedily adds the condition with the highest FOIL gain until the rule covers no negative example of `rows` or no
    condition has a positive gain. The first condition is always added; ties go to the first condition in feature
    and bin order.

    Parameters
    ----------
    space : ConditionSpace
        Candidate conditions of the training set.
    y : np.ndarray
        Boolean target of all training rows.
    rows : np.ndarray
        Indices of the growing set.
    start : tuple of InducedCondition, optional
        Conditions to extend (revision of an existing rule).

    Returns
    -------
    InducedRule :
        With its coverage counts on the growing set.

    Raises
    ------
    TrainingDataError :
        If the growing set contains no positive example.

    """
    rows = np.asarray(rows, dtype=int)
    if not y[rows].any():
        raise TrainingDataError("Cannot grow a rule without positive examples.")
    chosen = [space.index[c] for c in start]
    cover = rows[space.mask(start)[rows]]
    while len(cover):
        positive = y[cover]
        p0 = int(positive.sum())
        n0 = len(cover) - p0
        if p0 == 0 or (chosen and n0 == 0):
            break
        sub = space.masks[:, cover]
        p1 = sub[:, positive].sum(axis=1)
        n1 = sub[:, ~positive].sum(axis=1)
        gains = _foil_gains(p0, n0, p1, n1)
        gains[chosen] = -np.inf
        best = int(np.argmax(gains)) if len(gains) else 0
        if not len(gains) or gains[best] == -np.inf or (chosen and gains[best] <= 0):
            break
        chosen.append(best)
        cover = cover[sub[best]]
    positives = int(y[cover].sum())
    return InducedRule(tuple(space.conditions[i] for i in chosen), positives, len(cover) - positives)


def prune_rule(space, y, rule, rows):
    """
    Keeps the prefix of the rule's conditions with the highest `rule_quality` on the pruning set `rows`, removing
    conditions from the newest; ties keep the longer rule and the rule is never emptied.

    """
    rows = np.asarray(rows, dtype=int)
    if len(rule.conditions) <= 1 or len(rows) == 0:
        return rule
    best, best_quality = rule.conditions, None
    for size in range(len(rule.conditions), 0, -1):
        conditions = rule.conditions[:size]
        covered = space.mask(conditions)[rows]
        positives = int(y[rows][covered].sum())
        quality = rule_quality(positives, int(covered.sum()) - positives)
        if best_quality is None or quality > best_quality:
            best, best_quality = conditions, quality
    if best == rule.conditions:
        return rule
    return InducedRule(best)


########################################################################################################################
# Sequential covering
########################################################################################################################

class _SequentialCovering:

    def __init__(self, space, y, hyperparameters, rng):
        self.space = space
        self.y = y
        self.hp = hyperparameters
        self.rng = rng
        self.rows = np.arange(len(y))
        self._masks = {}

    def rule_mask(self, rule):
        key = rule.conditions
        if key not in self._masks:
            self._masks[key] = self.space.mask(key)
        return self._masks[key]

    def covered(self, rules):
        mask = np.zeros(len(self.y), dtype=bool)
        for rule in rules:
            mask |= self.rule_mask(rule)
        return mask

    def ruleset_dl(self, rules):
        n_possible = len(self.space)
        covered = self.covered(rules)
        n_covered = int(covered.sum())
        false_positives = int((covered & ~self.y).sum())
        uncovered_positives = int((~covered & self.y).sum())
        bits = sum(description_length(rule, n_possible, 0, 0) for rule in rules)
        return bits + description_length(0, n_possible, uncovered_positives, false_positives, n_covered,
                                         len(self.y) - n_covered)

    def split(self, rows):
        """ Stratified random split into growing and pruning set. """
        grow, prune = [], []
        for group in (rows[self.y[rows]], rows[~self.y[rows]]):
            permuted = self.rng.permutation(group)
            n_prune = int(math.floor(len(group) * self.hp.prune_size))
            prune.append(permuted[:n_prune])
            grow.append(permuted[n_prune:])
        return np.sort(np.concatenate(grow)).astype(int), np.sort(np.concatenate(prune)).astype(int)

    def build_rule(self, rows, start=()):
        """ Grows and prunes one rule on `rows`; returns (rule, pruning set error) or None. """
        grow, prune = self.split(rows)
        if not self.y[grow].any():
            return None
        rule = grow_rule(self.space, self.y, grow, start)
        if not rule.conditions:
            return None
        rule = prune_rule(self.space, self.y, rule, prune)
        evaluation = prune if len(prune) else grow
        covered = self.rule_mask(rule)[evaluation]
        positives = int(self.y[evaluation][covered].sum())
        negatives = int(covered.sum()) - positives
        error = 1. if positives + negatives == 0 else negatives / (positives + negatives)
        return rule, error

    def cover(self, rules):
        rules = list(rules)
        best_dl = self.ruleset_dl(rules)
        remaining = self.rows[~self.covered(rules)]
        while self.y[remaining].any():
            built = self.build_rule(remaining)
            if built is None:
                break
            rule, error = built
            if error > .5:
                logger.debug("Stopping: rule error %.3f on the pruning set", error)
                break
            candidate = rules + [rule]
            dl = self.ruleset_dl(candidate)
            if dl > best_dl + self.hp.dl_allowance:
                logger.debug("Stopping: description length %.1f exceeds %.1f + %s", dl, best_dl,
                             self.hp.dl_allowance)
                break
            newly_covered = self.rule_mask(rule)[remaining]
            if not newly_covered.any():
                break
            rules = candidate
            best_dl = min(best_dl, dl)
            remaining = remaining[~newly_covered]
        return rules

    def delete(self, rules):
        """ Removes, from the newest, every rule whose removal does not increase the total description length. """
        rules = list(rules)
        for i in range(len(rules) - 1, -1, -1):
            candidate = rules[:i] + rules[i + 1:]
            if self.ruleset_dl(candidate) <= self.ruleset_dl(rules):
                rules = candidate
        return rules

    def optimize(self, rules):
        """ Replaces every rule by its replacement or revision when this lowers the total description length. """
        rules = list(rules)
        for i, rule in enumerate(list(rules)):
            others = rules[:i] + rules[i + 1:]
            residual = self.rows[~self.covered(others)]
            variants = [rule]
            for start in ((), rule.conditions):
                built = self.build_rule(residual, start)
                if built is not None and built[0].conditions not in [v.conditions for v in variants]:
                    variants.append(built[0])
            dls = [self.ruleset_dl(rules[:i] + [v] + rules[i + 1:]) for v in variants]
            rules[i] = variants[int(np.argmin(dls))]
        return rules


def _binary_target(labels, positive_class):
    target = str(positive_class).lower()
    return np.asarray([str(label).lower() == target for label in labels], dtype=bool)


@dataclass
class RipperModel:
    positive_class: object
    rules: list
    discretizer: Discretizer
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)
    features: list = field(default_factory=list)
    kind: Optional[str] = None
    seed: int = 0
    default_positives: int = 0
    default_negatives: int = 0
    training_summary: dict = field(default_factory=dict)

    @property
    def bins(self):
        return self.discretizer.bins()

    @property
    def level(self):
        return LEVELS.get(self.kind)

    def _check_features(self, frame):
        for feature in self.features:
            if feature not in frame.columns:
                raise FeatureMissingError(feature)

    def predict_proba(self, frame):
        """ Score of every row: Laplace precision of the first matching rule, else that of the uncovered examples. """
        self._check_features(frame)
        default = (self.default_positives + 1) / (self.default_positives + self.default_negatives + 2)
        scores = np.full(len(frame), default, dtype=float)
        assigned = np.zeros(len(frame), dtype=bool)
        for rule in self.rules:
            matched = rule.covers(frame) & ~assigned
            scores[matched] = rule.laplace
            assigned |= matched
        return scores

    def predict(self, frame):
        """ True for rows covered by a rule. """
        self._check_features(frame)
        covered = np.zeros(len(frame), dtype=bool)
        for rule in self.rules:
            covered |= rule.covers(frame)
        return covered

    def describe(self):
        return [format_rule(rule, self.positive_class, self.level) for rule in self.rules]

    def rule_book(self):
        """ The rules in the rule file grammar, loadable by the rule engine. """
        if self.kind not in LEVELS:
            raise ValueError("Only block and line models can be written as rule files.")
        label = LogicalLabel.parse(self.positive_class)
        rules = [Rule("{}{}".format(label.value, i), self.kind, label,
                      tuple(Clause((c.to_condition(self.level),)) for c in rule.conditions))
                 for i, rule in enumerate(self.rules, start=1)]
        book = RuleBook()
        book[self.kind].rules.extend(rules)
        return book

    def to_rules_text(self):
        header = "Induced {} rules for {} ({})".format(self.kind, self.positive_class, ", ".join(
            "{}={}".format(k, v) for k, v in asdict(self.hyperparameters).items()))
        return format_rules(self.rule_book(), header=header)

    def to_dict(self):
        return {
            "positive_class": str(self.positive_class),
            "kind": self.kind,
            "features": list(self.features),
            "hyperparameters": asdict(self.hyperparameters),
            "seed": self.seed,
            "discretizer": self.discretizer.to_dict(),
            "rules": [rule.to_dict() for rule in self.rules],
            "default": {"covered_positives": self.default_positives, "covered_negatives": self.default_negatives},
            "training_summary": self.training_summary,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data):
        try:
            positive_class = LogicalLabel.parse(data["positive_class"])
        except ValueError:
            positive_class = data["positive_class"]
        return cls(
            positive_class=positive_class,
            rules=[InducedRule.from_dict(r) for r in data["rules"]],
            discretizer=Discretizer.from_dict(data["discretizer"]),
            hyperparameters=Hyperparameters(**data["hyperparameters"]),
            features=data["features"],
            kind=data.get("kind"),
            seed=data.get("seed", 0),
            default_positives=data["default"]["covered_positives"],
            default_negatives=data["default"]["covered_negatives"],
            training_summary=data.get("training_summary", {}),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _summarize(model, space, y, learner):
    assigned = np.zeros(len(y), dtype=bool)
    n_possible = len(space)
    for rule in model.rules:
        mask = learner.rule_mask(rule) & ~assigned
        rule.covered_positives = int(y[mask].sum())
        rule.covered_negatives = int(mask.sum()) - rule.covered_positives
        covered_all = learner.rule_mask(rule)
        false_positives = int((covered_all & ~y).sum())
        uncovered_positives = int((~covered_all & y).sum())
        rule.dl = description_length(rule, n_possible, uncovered_positives, false_positives,
                                     int(covered_all.sum()), len(y) - int(covered_all.sum()))
        assigned |= mask
    model.default_positives = int(y[~assigned].sum())
    model.default_negatives = int((~assigned).sum()) - model.default_positives
    model.training_summary = {
        "examples": int(len(y)),
        "positives": int(y.sum()),
        "rules": len(model.rules),
        "covered_positives": int(sum(r.covered_positives for r in model.rules)),
        "covered_negatives": int(sum(r.covered_negatives for r in model.rules)),
        "uncovered_positives": model.default_positives,
        "possible_conditions": n_possible,
        "description_length": learner.ruleset_dl(model.rules),
    }


def fit(frame, labels, positive_class, hyperparameters=None, seed=0, features=None, kind=None):
    """
    Learns the rule set of one label.

    Parameters
    ----------
    frame : pd.DataFrame
        Training features, one row per example.
    labels : array-like
        Label of every row.
    positive_class : LogicalLabel or str or bool
        The label to learn; every other label is negative.
    hyperparameters : Hyperparameters, optional
        Default: prune_size .33, k 2, dl_allowance 64, n_discretize_bins 10.
    seed : int, optional
        Seed of the growing/pruning splits.
    features : list of str, optional
        Columns to learn from (default: all columns of `frame`).
    kind : str, optional
        "block" or "line" when the features are block or line features, used to write rule files.

    Returns
    -------
    RipperModel

    Raises
    ------
    TrainingDataError :
        If the labels contain only one class or no feature yields a condition.

    """
    hp = hyperparameters or Hyperparameters()
    features = list(features) if features is not None else list(frame.columns)
    missing = [f for f in features if f not in frame.columns]
    if missing:
        raise FeatureMissingError(missing[0])
    frame = frame[features].reset_index(drop=True)
    y = _binary_target(labels, positive_class)
    if len(y) != len(frame):
        raise TrainingDataError("Got {} labels for {} examples.".format(len(y), len(frame)))
    if y.all() or not y.any():
        raise TrainingDataError("The training data must contain examples of '{}' and of other labels.".format(
            positive_class))
    discretizer = Discretizer.fit(frame, hp.n_discretize_bins)
    space = ConditionSpace(frame, discretizer)
    if not len(space):
        raise TrainingDataError("No feature provides a usable condition.")

    learner = _SequentialCovering(space, y, hp, np.random.default_rng(seed))
    rules = learner.delete(learner.cover([]))
    for _ in range(hp.k):
        rules = learner.optimize(rules)
        rules = learner.delete(learner.cover(rules))

    model = RipperModel(positive_class, [InducedRule(r.conditions) for r in rules], discretizer, hp, features, kind,
                        seed)
    _summarize(model, space, y, learner)
    logger.debug("Learned %d rules for %s (%s)", len(model.rules), positive_class, hp)
    return model


def predict_score(model, row):
    """ Score of a single example (mapping feature name -> value). """
    return float(model.predict_proba(pd.DataFrame([dict(row)]))[0])


########################################################################################################################
# Multiclass
########################################################################################################################

class OneVsRest:
    """ One binary model per label; an example gets the label of the highest score, ties to the first label. """

    def __init__(self, models):
        self.models = dict(models)

    @property
    def labels(self):
        return list(self.models)

    def predict_scores(self, frame):
        return pd.DataFrame({label: model.predict_proba(frame) for label, model in self.models.items()},
                            index=frame.index)

    def predict(self, frame):
        if len(frame) == 0:
            return []
        scores = self.predict_scores(frame).to_numpy()
        return [self.labels[i] for i in np.argmax(scores, axis=1)]

    @classmethod
    def fit(cls, frame, labels, classes, hyperparameters=None, seed=0, features=None, kind=None, jobs=1):
        """
        Trains the binary models of `classes` in parallel.

        Parameters
        ----------
        hyperparameters : Hyperparameters or dict, optional
            Shared hyperparameters, or per label.

        """
        def params(label):
            if isinstance(hyperparameters, dict):
                return hyperparameters.get(label)
            return hyperparameters

        labels = list(labels)
        models = Parallel(n_jobs=jobs)(
            delayed(fit)(frame, labels, label, params(label), seed, features, kind) for label in classes)
        return cls(zip(classes, models))

    def to_dict(self):
        return {str(label): model.to_dict() for label, model in self.models.items()}

    @classmethod
    def from_dict(cls, data):
        models = [RipperModel.from_dict(d) for d in data.values()]
        return cls((m.positive_class, m) for m in models)


class RipperLabeler:
    """
    Annotates documents with learned models: blocks first, then lines with the predicted block label as their
    `blockType` feature. Elements with a TYPE attribute keep the label it implies and lines of Other blocks are
    Other, as in the rule based pipeline.

    """

    def __init__(self, blocks, lines, header_words=None):
        self.blocks = blocks
        self.lines = lines
        self.header_words = header_words

    def annotate(self, doc, features=None):
        features = features if features is not None else extract_features(doc, self.header_words)
        block_list = [block for _, block in doc.blocks()]
        predicted = self.blocks.predict(features.blocks) if len(block_list) else []
        block_labels = {}
        for block, label in zip(block_list, predicted):
            if block.type_attr is not None:
                label = label_from_type(block.type_attr, BLOCK)
            elif not block.lines:
                label = LogicalLabel.OTHER
            block.label = LogicalLabel.parse(label)
            block_labels[block.id] = block.label

        line_frame = features.lines.copy()
        line_frame["blockType"] = [block_labels[b].type_value for b in line_frame["block_id"]]
        predicted = self.lines.predict(line_frame) if len(line_frame) else []
        for (_, block, line), label in zip(doc.lines(), predicted):
            if line.type_attr is not None:
                label = label_from_type(line.type_attr, LINE)
            elif block_labels[block.id] is LogicalLabel.OTHER:
                label = LogicalLabel.OTHER
            line.label = LogicalLabel.parse(label).emitted()
        return doc


########################################################################################################################
# Grid search
########################################################################################################################

def _evaluate(frame, y, hp, splits, seed):
    scores, sizes = [], []
    for fold, (train, test) in enumerate(splits):
        if y[train].all() or not y[train].any() or not y[test].any() or y[test].all():
            logger.warning("Skipping fold %d for %s: a class is missing", fold, hp)
            continue
        model = fit(frame.iloc[train], y[train], True, hp, seed)
        scores.append(f1_score(y[test], model.predict(frame.iloc[test]), zero_division=0))
        sizes.append(len(model.rules))
    row = asdict(hp)
    row.update({
        "mean_f1": float(np.mean(scores)) if scores else float("nan"),
        "std_f1": float(np.std(scores)) if scores else float("nan"),
        "mean_rules": float(np.mean(sizes)) if sizes else float("nan"),
        "folds": len(scores),
    })
    return row


def grid_search(frame, labels, positive_class, grid=None, folds=3, seed=0, features=None, jobs=1):
    """
    Cross-validated grid search of the hyperparameters of one label.

    Parameters
    ----------
    frame : pd.DataFrame
        Training features.
    labels : array-like
        Label of every row.
    positive_class : LogicalLabel or str or bool
        The label to learn.
    grid : HyperGrid, optional
        Default is the full 72 point grid.
    folds : int, optional
        Number of stratified folds, at least 2.
    seed : int, optional
        Seed of the fold assignment and of the learners.
    jobs : int, optional
        Grid points evaluated in parallel.

    Returns
    -------
    tuple :
        (best Hyperparameters, pd.DataFrame of mean F1 per combination). The best combination has the highest mean
        F1, then the fewest rules, then the lowest hyperparameter values.

    """
    if folds < 2:
        raise ValueError("At least 2 folds are required, got {}.".format(folds))
    grid = grid or HyperGrid()
    if features is not None:
        frame = frame[list(features)]
    frame = frame.reset_index(drop=True)
    y = _binary_target(labels, positive_class)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    try:
        splits = list(splitter.split(np.zeros(len(y)), y))
    except ValueError as e:
        raise TrainingDataError("Cannot build {} folds: {}".format(folds, e))
    combinations = grid.combinations()
    rows = Parallel(n_jobs=jobs)(delayed(_evaluate)(frame, y, hp, splits, seed) for hp in combinations)
    table = pd.DataFrame(rows)

    def key(i):
        f1 = table["mean_f1"].iloc[i]
        size = table["mean_rules"].iloc[i]
        return (-f1 if not np.isnan(f1) else np.inf, size if not np.isnan(size) else np.inf,
                combinations[i].as_tuple())

    best = min(range(len(combinations)), key=key)
    if np.isnan(table["mean_f1"].iloc[best]):
        raise TrainingDataError("No fold contains both classes.")
    logger.info("Best hyperparameters for %s: %s (F1 %.3f)", positive_class, combinations[best],
                table["mean_f1"].iloc[best])
    return combinations[best], table
