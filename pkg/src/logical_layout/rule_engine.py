"""
Rule based annotation of text blocks and text lines.

Blocks are labelled before lines: every block rule is applied to every block in reading order, adding its label to
the block's candidate set; conflict resolutions then reduce each candidate set to one label. Lines of Title, Header
and Other blocks inherit the block label, the other lines go through the line rules and resolutions the same way,
followed by the reading order fixups (first line of the document, line following a title).
"""
import logging
from dataclasses import dataclass
from typing import Optional

from logical_layout.alto_model import LogicalLabel, BLOCK, LINE, label_from_type
from logical_layout.comparison import COMPARATORS, between, is_true, is_false
from logical_layout.config import Config
from logical_layout.features import extract_features
from logical_layout.rules import ContextCondition, FlagCondition, LineQuantifier, Ref, IN_RANGE, IS_TRUE, IS_FALSE

logger = logging.getLogger(__name__)

INHERITED_LABELS = (LogicalLabel.TITLE, LogicalLabel.HEADER, LogicalLabel.OTHER)


@dataclass(frozen=True)
class Neighbours:
    """ Candidate labels of the element and of its neighbours on the page (None at page boundaries). """
    prev: Optional[frozenset] = None
    next: Optional[frozenset] = None
    current: frozenset = frozenset()


########################################################################################################################
# Condition evaluation
########################################################################################################################

def _stat(doc_stats, name):
    return doc_stats[name] if isinstance(doc_stats, dict) else getattr(doc_stats, name)


def _resolve(ref, line_row, block_row, doc_stats):
    if ref.level == "L":
        value = line_row[ref.feature]
    elif ref.level == "B":
        value = block_row[ref.feature]
    else:
        value = _stat(doc_stats, ref.feature)
    if ref.scale_op == "*":
        value = value * ref.scale.value
    elif ref.scale_op == "/":
        value = value / ref.scale.value
    return value


def _eval_atom(atom, line_row, block_row, doc_stats, neighbours, lines):
    if isinstance(atom, ContextCondition):
        labels = {"prev": neighbours.prev, "next": neighbours.next, "self": neighbours.current}[atom.target]
        if labels is None:
            return atom.negated
        return (atom.label in labels) != atom.negated
    if isinstance(atom, FlagCondition):
        return bool(atom.flag.value)
    if isinstance(atom, LineQuantifier):
        return any(_eval_atom(a, line, block_row, doc_stats, neighbours, None)
                   for line in (lines or [])[:atom.count.value] for a in atom.atoms)
    value = _resolve(atom.feature, line_row, block_row, doc_stats)
    if atom.comparator == IS_TRUE:
        result = is_true(value)
    elif atom.comparator == IS_FALSE:
        result = is_false(value)
    elif atom.comparator == IN_RANGE:
        result = between(value, atom.operand[0].value, atom.operand[1].value)
    else:
        operand = atom.operand
        if isinstance(operand, Ref):
            operand = _resolve(operand, line_row, block_row, doc_stats)
        else:
            operand = operand.value
        result = COMPARATORS[atom.comparator](value, operand)
    return bool(result)


def eval_clauses(clauses, element_row, block_row, doc_stats, neighbours=None, lines=None):
    """ True iff every clause has at least one satisfied atom. """
    neighbours = neighbours or Neighbours()
    line_row = element_row if block_row is not None else None
    block_row = block_row if block_row is not None else element_row
    return all(any(_eval_atom(atom, line_row, block_row, doc_stats, neighbours, lines) for atom in clause.atoms)
               for clause in clauses)


def eval_rule(rule, element_row, block_row, doc_stats, neighbours=None, lines=None):
    """
    Evaluates the conditions of a rule on one element.

    Parameters
    ----------
    rule : Rule or Resolution
        A loaded rule; feature references were validated at load time.
    element_row : dict
        Features of the element (a line row for line rules, a block row for block rules).
    block_row : dict or None
        Features of the block containing the line, None for block rules.
    doc_stats : DocumentFeatures or dict
        Document level features.
    neighbours : Neighbours, optional
        Candidate labels of the neighbouring elements and of the element itself.
    lines : list of dict, optional
        Line rows of the block, for `any line in first n` conditions of block rules.

    Returns
    -------
    bool

    """
    return eval_clauses(rule.clauses, element_row, block_row, doc_stats, neighbours, lines)


def resolve_candidates(resolutions, candidates, element_row, block_row, doc_stats, neighbours=None):
    """
    Applies conflict resolutions in order to one candidate set.

    A resolution whose conditions hold reduces the candidates to its winning label; otherwise the winning label is
    removed, unless it is the only candidate left.

    Returns
    -------
    frozenset

    """
    neighbours = neighbours or Neighbours()
    candidates = frozenset(candidates)
    for resolution in resolutions:
        if not resolution.applies(candidates):
            continue
        context = Neighbours(neighbours.prev, neighbours.next, candidates)
        if eval_rule(resolution, element_row, block_row, doc_stats, context):
            candidates = frozenset([resolution.winner])
        elif candidates - {resolution.winner}:
            candidates = candidates - {resolution.winner}
    return candidates


def final_label(candidates, default=LogicalLabel.TEXT):
    """ The single label of a resolved candidate set; `default` for an empty set. """
    if not candidates:
        return default
    remaining = [label for label in LogicalLabel if label in candidates]
    if len(remaining) > 1:
        logger.debug("Unresolved candidates %s, keeping %s", [str(c) for c in remaining], remaining[0])
    return remaining[0]


########################################################################################################################
# Pipeline steps
########################################################################################################################

def _page_neighbours(doc, elements_of_page):
    """ For every element (by index in reading order), the indices of its neighbours on the same page. """
    prev_index, next_index = {}, {}
    position = 0
    for page in doc.pages:
        count = len(elements_of_page(page))
        for i in range(count):
            prev_index[position + i] = position + i - 1 if i > 0 else None
            next_index[position + i] = position + i + 1 if i + 1 < count else None
        position += count
    return prev_index, next_index


def _page_lines(page):
    return [line for block in page.blocks for line in block.lines]


def _apply_rules(rules, rows, block_rows, doc_stats, candidates, fixed, prev_index, next_index, lines=None):
    for rule in rules:
        for i, row in enumerate(rows):
            if i in fixed:
                continue
            p, n = prev_index[i], next_index[i]
            neighbours = Neighbours(
                prev=frozenset(candidates[p]) if p is not None else None,
                next=frozenset(candidates[n]) if n is not None else None,
                current=frozenset(candidates[i]),
            )
            block_row = block_rows[i] if block_rows is not None else None
            if eval_rule(rule, row, block_row, doc_stats, neighbours, lines[i] if lines is not None else None):
                candidates[i].add(rule.label)


def _resolve_all(rule_set, rows, block_rows, doc_stats, candidates, fixed, prev_index, next_index):
    for resolution in rule_set.resolutions:
        for i, row in enumerate(rows):
            if i in fixed:
                continue
            p, n = prev_index[i], next_index[i]
            neighbours = Neighbours(
                prev=frozenset(candidates[p]) if p is not None else None,
                next=frozenset(candidates[n]) if n is not None else None,
            )
            block_row = block_rows[i] if block_rows is not None else None
            candidates[i] = set(resolve_candidates([resolution], candidates[i], row, block_row, doc_stats,
                                                   neighbours))


def classify_blocks(doc, features, rule_set):
    """
    Applies the block annotation rules.

    Blocks carrying a TYPE attribute are not processed and keep the label it implies; blocks without lines get
    Other.

    Parameters
    ----------
    doc : Document
        A parsed document.
    features : FeatureSet
        Features of `doc`.
    rule_set : RuleSet
        Block rules.

    Returns
    -------
    tuple :
        (list of candidate label sets in block reading order, set of indices of fixed blocks)

    """
    blocks = [block for _, block in doc.blocks()]
    rows = features.blocks.to_dict("records")
    lines_by_block = {}
    for row in features.lines.to_dict("records"):
        lines_by_block.setdefault(row["block_id"], []).append(row)
    candidates, fixed = [], set()
    for i, block in enumerate(blocks):
        if block.type_attr is not None:
            candidates.append({label_from_type(block.type_attr, BLOCK)})
            fixed.add(i)
        elif not block.lines:
            candidates.append({LogicalLabel.OTHER})
            fixed.add(i)
        else:
            candidates.append(set())
    prev_index, next_index = _page_neighbours(doc, lambda page: page.blocks)
    block_lines = [lines_by_block.get(block.id, []) for block in blocks]
    _apply_rules(rule_set.rules, rows, None, features.document, candidates, fixed, prev_index, next_index,
                 block_lines)
    return candidates, fixed


def resolve_block_conflicts(doc, features, candidates, fixed, rule_set):
    """
    Reduces the block candidate sets to one label per block.

    Returns
    -------
    list of LogicalLabel :
        Labels in block reading order; blocks without candidates get the default label of `rule_set` (Text).

    """
    rows = features.blocks.to_dict("records")
    candidates = [set(c) for c in candidates]
    prev_index, next_index = _page_neighbours(doc, lambda page: page.blocks)
    _resolve_all(rule_set, rows, None, features.document, candidates, fixed, prev_index, next_index)
    default = rule_set.default_label or LogicalLabel.TEXT
    return [final_label(c, default) for c in candidates]


def classify_lines(doc, features, block_labels, rule_set):
    """
    Applies the line annotation rules.

    Lines of Title, Header and Other blocks inherit the block label without rule evaluation, lines carrying a TYPE
    attribute keep the label it implies.

    Parameters
    ----------
    doc : Document
        A parsed document.
    features : FeatureSet
        Features of `doc`.
    block_labels : list of LogicalLabel
        Final block labels in reading order.
    rule_set : RuleSet
        Line rules.

    Returns
    -------
    tuple :
        (list of candidate label sets in line reading order, set of indices of fixed lines)

    """
    label_of_block = {block.id: label for (_, block), label in zip(doc.blocks(), block_labels)}
    block_rows = {row["element_id"]: row for row in features.blocks.to_dict("records")}
    rows = features.lines.to_dict("records")
    candidates, fixed = [], set()
    for i, (_, block, line) in enumerate(doc.lines()):
        if line.type_attr is not None:
            candidates.append({label_from_type(line.type_attr, LINE)})
            fixed.add(i)
        elif label_of_block[block.id] in INHERITED_LABELS:
            candidates.append({label_of_block[block.id]})
            fixed.add(i)
        else:
            candidates.append(set())
    prev_index, next_index = _page_neighbours(doc, _page_lines)
    _apply_rules(rule_set.rules, rows, [block_rows[row["block_id"]] for row in rows], features.document,
                 candidates, fixed, prev_index, next_index)
    return candidates, fixed


def resolve_line_conflicts(doc, features, candidates, fixed, block_labels, rule_set):
    """
    Reduces the line candidate sets to one label per line and applies the reading order fixups: the first line of
    the document becomes Title unless it is Header or Other, and a Text line following a Title line becomes
    Firstline. The working label Lastline ends up as Text.

    Returns
    -------
    list of LogicalLabel :
        Labels in line reading order.

    """
    block_rows = {row["element_id"]: row for row in features.blocks.to_dict("records")}
    rows = features.lines.to_dict("records")
    candidates = [set(c) for c in candidates]
    prev_index, next_index = _page_neighbours(doc, _page_lines)
    _resolve_all(rule_set, rows, [block_rows[row["block_id"]] for row in rows], features.document, candidates,
                 fixed, prev_index, next_index)
    default = rule_set.default_label or LogicalLabel.TEXT
    labels = []
    for i, c in enumerate(candidates):
        if i not in fixed and len(c) > 1:
            c = c - {LogicalLabel.LASTLINE}
        labels.append(final_label(c, default))

    if labels and 0 not in fixed and labels[0] not in (LogicalLabel.HEADER, LogicalLabel.OTHER):
        labels[0] = LogicalLabel.TITLE
    for i in range(1, len(labels)):
        if i in fixed:
            continue
        if labels[i - 1] is LogicalLabel.TITLE and labels[i] is LogicalLabel.TEXT:
            labels[i] = LogicalLabel.FIRSTLINE
    return [label.emitted() for label in labels]


########################################################################################################################
# Pipeline
########################################################################################################################

def annotate(doc, config=None, rule_book=None, features=None):
    """
    Labels every text block and text line of a document with the rule sets.

    Parameters
    ----------
    doc : Document
        A parsed document; its `label` attributes are set in place.
    config : Config, optional
        Rule file, thresholds and header word set (default configuration if omitted).
    rule_book : RuleBook, optional
        Preloaded rules, taking precedence over the rule file of `config`.
    features : FeatureSet, optional
        Precomputed features of `doc`.

    Returns
    -------
    Document :
        `doc`, annotated. Annotating an annotated document changes nothing.

    Raises
    ------
    EmptyDocumentError :
        If the document has no line.

    """
    config = config or Config()
    rule_book = rule_book or config.rule_book()
    features = features if features is not None else extract_features(doc, config.header_word_set())

    candidates, fixed = classify_blocks(doc, features, rule_book.block)
    block_labels = resolve_block_conflicts(doc, features, candidates, fixed, rule_book.block)
    for (_, block), label in zip(doc.blocks(), block_labels):
        block.label = label

    candidates, fixed = classify_lines(doc, features, block_labels, rule_book.line)
    line_labels = resolve_line_conflicts(doc, features, candidates, fixed, block_labels, rule_book.line)
    for (_, _, line), label in zip(doc.lines(), line_labels):
        line.label = label

    logger.info("Annotated %s: %d blocks, %d lines", doc.id, len(block_labels), len(line_labels))
    return doc
