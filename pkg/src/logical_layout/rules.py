"""
Declarative rule files.

A rule file is line oriented; `#` starts a comment. Three kinds of entries exist::

    rule <id>: <block|line> -> <Label>
      when <clause>
      when <clause>

    resolve <id>: <block|line> <labels> vs <labels> -> <Label>      labels: Label, {Label, ...} or *
      when <clause>

    default <block|line> -> <Label>

A rule holds when all of its `when` clauses hold; a clause is a disjunction of atoms joined by `or`. Atoms are

    <ref> <op> <operand>             op in <, <=, >, >=, =, !=
    <ref> in <lo>..<hi>              lo < value <= hi, -inf and inf allowed
    <ref>  /  not <ref>              boolean feature is true / false
    prev|next|self is [not] <Label>  candidate labels of the neighbouring or current element
    $name                            boolean threshold
    any line in first <n>: <atom> or <atom> ...
                                     block rules only, holds if one of the first n lines satisfies the atoms

with `<ref>` one of `L.<line feature>`, `B.<block feature>` and `D.<document feature>`. Operands are numbers,
quoted strings, `true`/`false`, thresholds `$name`, or references scaled by `* x` or `/ x`.

A resolution applies to an element whose candidate labels intersect both label sets (`*` matches any candidates).
If its clauses hold the element keeps only the winning label, otherwise the winning label is dropped.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

from logical_layout.alto_model import LogicalLabel, BLOCK, LINE
from logical_layout.config import DEFAULT_THRESHOLDS
from logical_layout.errors import RuleDefinitionError
from logical_layout.features import LINE_FEATURES, BLOCK_FEATURES, DOCUMENT_FEATURES, BOOLEAN_FEATURES

logger = logging.getLogger(__name__)

LEVEL_FEATURES = {"L": LINE_FEATURES, "B": BLOCK_FEATURES, "D": DOCUMENT_FEATURES}
CONTEXT_TARGETS = ("prev", "next", "self")

IN_RANGE = "in"
IS_TRUE = "is-true"
IS_FALSE = "is-false"


########################################################################################################################
# Types
########################################################################################################################

@dataclass(frozen=True)
class Constant:
    value: Union[float, int, bool, str]
    name: Optional[str] = None

    def __str__(self):
        if self.name is not None:
            return "$" + self.name
        return format_value(self.value)


@dataclass(frozen=True)
class Ref:
    level: str
    feature: str
    scale_op: Optional[str] = None
    scale: Optional[Constant] = None

    def __str__(self):
        text = "{}.{}".format(self.level, self.feature)
        if self.scale_op is not None:
            text += " {} {}".format(self.scale_op, self.scale)
        return text


@dataclass(frozen=True)
class Condition:
    """ A test of one feature: `comparator` is a symbol of `COMPARATORS`, `in`, `is-true` or `is-false`. """
    feature: Ref
    comparator: str
    operand: Union[Constant, Ref, Tuple[Constant, Constant], None] = None

    def __str__(self):
        if self.comparator == IS_TRUE:
            return str(self.feature)
        if self.comparator == IS_FALSE:
            return "not {}".format(self.feature)
        if self.comparator == IN_RANGE:
            return "{} in {}..{}".format(self.feature, self.operand[0], self.operand[1])
        return "{} {} {}".format(self.feature, self.comparator, self.operand)


@dataclass(frozen=True)
class ContextCondition:
    """ Label test on the candidate labels of the previous, next or current element. """
    target: str
    label: LogicalLabel
    negated: bool = False

    def __str__(self):
        return "{} is {}{}".format(self.target, "not " if self.negated else "", self.label.value)


@dataclass(frozen=True)
class FlagCondition:
    flag: Constant

    def __str__(self):
        return str(self.flag)


@dataclass(frozen=True)
class LineQuantifier:
    """ Holds if any of the first `count` lines of the block satisfies one of `atoms`. """
    count: Constant
    atoms: tuple

    def __str__(self):
        return "any line in first {}: {}".format(self.count, " or ".join(str(a) for a in self.atoms))


@dataclass(frozen=True)
class Clause:
    atoms: tuple

    def __str__(self):
        return " or ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class Rule:
    id: str
    scope: str
    label: LogicalLabel
    clauses: tuple = ()

    @property
    def conditions(self):
        return [a for c in self.clauses for a in c.atoms if not isinstance(a, ContextCondition)]

    @property
    def context_conditions(self):
        return [a for c in self.clauses for a in c.atoms if isinstance(a, ContextCondition)]

    def __str__(self):
        head = "rule {}: {} -> {}".format(self.id, self.scope, self.label.value)
        return "\n".join([head] + ["  when {}".format(c) for c in self.clauses])


@dataclass(frozen=True)
class Resolution:
    """ Conflict resolution between `left` and `right` candidate labels (None matches any candidates). """
    id: str
    scope: str
    left: Optional[frozenset]
    right: Optional[frozenset]
    winner: LogicalLabel
    clauses: tuple = ()

    def applies(self, candidates):
        if self.left is not None and not candidates & self.left:
            return False
        return self.right is None or bool(candidates & self.right)

    def __str__(self):
        head = "resolve {}: {} {} vs {} -> {}".format(self.id, self.scope, _format_labels(self.left),
                                                      _format_labels(self.right), self.winner.value)
        return "\n".join([head] + ["  when {}".format(c) for c in self.clauses])


@dataclass
class RuleSet:
    """ The annotation rules, conflict resolutions and default label of one scope, in evaluation order. """
    scope: str
    rules: list = field(default_factory=list)
    resolutions: list = field(default_factory=list)
    default_label: Optional[LogicalLabel] = None

    def __str__(self):
        parts = [str(r) for r in self.rules] + [str(r) for r in self.resolutions]
        if self.default_label is not None:
            parts.append("default {} -> {}".format(self.scope, self.default_label.value))
        return "\n\n".join(parts)


@dataclass
class RuleBook:
    block: RuleSet = field(default_factory=lambda: RuleSet(BLOCK))
    line: RuleSet = field(default_factory=lambda: RuleSet(LINE))
    source: str = "<rules>"

    def __getitem__(self, scope):
        return self.block if scope == BLOCK else self.line

    def __eq__(self, other):
        return isinstance(other, RuleBook) and self.block == other.block and self.line == other.line


def format_value(value):
    if hasattr(value, "item"):
        # numpy scalar
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"{}"'.format(value.replace("\\", "\\\\").replace('"', '\\"'))
    if isinstance(value, float):
        if value == float("inf"):
            return "inf"
        if value == float("-inf"):
            return "-inf"
        if value.is_integer():
            return str(int(value))
    return repr(value)


def _format_labels(labels):
    if labels is None:
        return "*"
    names = sorted(label.value for label in labels)
    return names[0] if len(names) == 1 else "{" + ", ".join(names) + "}"


def format_rules(book, header=None):
    """
    Serialises a rule book to the rule file grammar; `load_rules(format_rules(book))` equals `book`.

    Parameters
    ----------
    book : RuleBook
        The rules to serialise.
    header : str, optional
        Comment placed at the top of the file.

    Returns
    -------
    str

    """
    parts = []
    if header:
        parts.append("\n".join("# " + line if line else "#" for line in header.splitlines()))
    for scope in (BLOCK, LINE):
        text = str(book[scope])
        if text:
            parts.append(text)
    return "\n\n".join(parts) + "\n"


########################################################################################################################
# Parsing
########################################################################################################################

_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<arrow>->)
  | (?P<range>\.\.)
  | (?P<number>-?(?:inf\b|\d+(?:\.\d+)?(?:[eE][-+]?\d+)?))
  | (?P<ref>[LBD]\.[A-Za-z_][A-Za-z0-9_]*)
  | (?P<threshold>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|<|>|=)
  | (?P<punct>[:{},*/])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass
class _Token:
    kind: str
    text: str
    column: int


class _Line:
    """ Token cursor over one line of a rule file. """

    def __init__(self, text, number, source, thresholds):
        self.number = number
        self.source = source
        self.thresholds = thresholds
        self.tokens = []
        self.end_column = len(text) + 1
        position = 0
        while position < len(text):
            match = _TOKEN.match(text, position)
            if match is None:
                self.error("unexpected character '{}'".format(text[position]), position + 1)
            if match.lastgroup != "space":
                self.tokens.append(_Token(match.lastgroup, match.group(), position + 1))
            position = match.end()
        self.index = 0

    def error(self, msg, column=None):
        if column is None:
            column = self.tokens[self.index].column if self.index < len(self.tokens) else self.end_column
        raise RuleDefinitionError(msg, line=self.number, column=column, source=self.source)

    def peek(self, offset=0):
        i = self.index + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at_end(self):
        return self.index >= len(self.tokens)

    def next(self, kind=None, text=None, what=None):
        token = self.peek()
        if token is None or (kind is not None and token.kind != kind) or (text is not None and token.text != text):
            expected = what or text or kind
            found = "end of line" if token is None else "'{}'".format(token.text)
            self.error("expected {}, found {}".format(expected, found))
        self.index += 1
        return token

    def accept(self, kind=None, text=None):
        token = self.peek()
        if token is not None and (kind is None or token.kind == kind) and (text is None or token.text == text):
            self.index += 1
            return token
        return None

    def expect_end(self):
        if not self.at_end():
            self.error("unexpected '{}'".format(self.peek().text))


def _number_value(text):
    if text in ("inf", "-inf"):
        return float(text)
    return float(text) if any(c in text for c in ".eE") else int(text)


class _Parser:

    def __init__(self, source, thresholds):
        self.source = source
        self.thresholds = thresholds
        self.book = RuleBook(source=source)
        self.current = None
        self.ids = set()

    def parse(self, text):
        for number, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0] if '"' not in raw else _strip_comment(raw)
            if not content.strip():
                continue
            line = _Line(content, number, self.source, self.thresholds)
            keyword = line.next("word", what="'rule', 'resolve', 'default' or 'when'")
            if keyword.text == "rule":
                self.finish()
                self.current = self.rule_header(line)
            elif keyword.text == "resolve":
                self.finish()
                self.current = self.resolve_header(line)
            elif keyword.text == "default":
                self.finish()
                self.default(line)
            elif keyword.text == "when":
                if self.current is None:
                    line.error("'when' outside of a rule", keyword.column)
                self.current["clauses"].append(self.clause(line, self.current["scope"]))
                line.expect_end()
            else:
                line.error("unknown keyword '{}'".format(keyword.text), keyword.column)
        self.finish()
        return self.book

    def finish(self):
        entry, self.current = self.current, None
        if entry is None:
            return
        if not entry["clauses"]:
            raise RuleDefinitionError("rule '{}' has no condition".format(entry["id"]), line=entry["line"],
                                      column=1, source=self.source)
        kind = entry.pop("kind")
        entry.pop("line")
        entry["clauses"] = tuple(entry["clauses"])
        rule_set = self.book[entry["scope"]]
        if kind == "rule":
            rule_set.rules.append(Rule(**entry))
        else:
            rule_set.resolutions.append(Resolution(**entry))

    def identifier(self, line):
        token = line.next(what="rule id")
        if token.kind not in ("word", "number"):
            line.error("invalid rule id '{}'".format(token.text), token.column)
        if token.text in self.ids:
            line.error("duplicate rule id '{}'".format(token.text), token.column)
        self.ids.add(token.text)
        return token.text

    def scope(self, line):
        token = line.next("word", what="'block' or 'line'")
        if token.text not in (BLOCK, LINE):
            line.error("unknown scope '{}'".format(token.text), token.column)
        return token.text

    def label(self, line, scope):
        token = line.next("word", what="a label")
        try:
            label = LogicalLabel.parse(token.text)
        except ValueError:
            line.error("unknown label '{}'".format(token.text), token.column)
        if scope == BLOCK and label in (LogicalLabel.FIRSTLINE, LogicalLabel.LASTLINE):
            line.error("label {} cannot be assigned to blocks".format(label.value), token.column)
        return label

    def label_set(self, line, scope):
        if line.accept("punct", "{"):
            labels = [self.label(line, scope)]
            while line.accept("punct", ","):
                labels.append(self.label(line, scope))
            line.next("punct", "}")
            return frozenset(labels)
        return frozenset([self.label(line, scope)])

    def rule_header(self, line):
        rule_id = self.identifier(line)
        line.next("punct", ":")
        scope = self.scope(line)
        line.next("arrow", what="'->'")
        label = self.label(line, scope)
        line.expect_end()
        return {"kind": "rule", "line": line.number, "id": rule_id, "scope": scope, "label": label, "clauses": []}

    def resolve_header(self, line):
        rule_id = self.identifier(line)
        line.next("punct", ":")
        scope = self.scope(line)
        left = None if line.accept("punct", "*") else self.label_set(line, scope)
        line.next("word", "vs")
        right = None if line.accept("punct", "*") else self.label_set(line, scope)
        line.next("arrow", what="'->'")
        winner = self.label(line, scope)
        line.expect_end()
        return {"kind": "resolve", "line": line.number, "id": rule_id, "scope": scope, "left": left,
                "right": right, "winner": winner, "clauses": []}

    def default(self, line):
        scope = self.scope(line)
        line.next("arrow", what="'->'")
        label = self.label(line, scope)
        line.expect_end()
        if label is LogicalLabel.LASTLINE:
            line.error("Lastline cannot be a default label")
        self.book[scope].default_label = label

    # conditions

    def clause(self, line, scope):
        if line.peek() is not None and line.peek().text == "any":
            return Clause((self.quantifier(line, scope),))
        atoms = [self.atom(line, scope)]
        while line.accept("word", "or"):
            if line.peek() is not None and line.peek().text == "any":
                line.error("'any line' must start its clause")
            atoms.append(self.atom(line, scope))
        return Clause(tuple(atoms))

    def quantifier(self, line, scope):
        start = line.next("word", "any")
        if scope != BLOCK:
            line.error("'any line' is only allowed in block rules", start.column)
        line.next("word", "line")
        line.next("word", "in")
        line.next("word", "first")
        count = self.constant(line)
        if isinstance(count.value, bool) or not isinstance(count.value, int) or count.value < 1:
            line.error("line count must be a positive integer")
        line.next("punct", ":")
        atoms = [self.atom(line, LINE, in_quantifier=True)]
        while line.accept("word", "or"):
            atoms.append(self.atom(line, LINE, in_quantifier=True))
        return LineQuantifier(count, tuple(atoms))

    def atom(self, line, scope, in_quantifier=False):
        token = line.peek()
        if token is None:
            line.error("expected a condition")
        if token.kind == "word" and token.text in CONTEXT_TARGETS:
            if in_quantifier:
                line.error("label tests are not allowed inside 'any line'")
            line.next()
            line.next("word", "is")
            negated = line.accept("word", "not") is not None
            return ContextCondition(token.text, self.label(line, LINE), negated)
        if token.kind == "word" and token.text == "not":
            line.next()
            ref = self.ref(line, scope)
            self.check_boolean(line, ref)
            return Condition(ref, IS_FALSE)
        if token.kind == "threshold":
            flag = self.constant(line)
            if not isinstance(flag.value, bool):
                line.error("threshold '{}' is not a boolean flag".format(flag.name), token.column)
            return FlagCondition(flag)
        ref = self.ref(line, scope)
        op = line.accept("op")
        if op is not None:
            return Condition(ref, op.text, self.operand(line, scope))
        if line.accept("word", "in"):
            lower = self.constant(line)
            line.next("range", what="'..'")
            upper = self.constant(line)
            return Condition(ref, IN_RANGE, (lower, upper))
        self.check_boolean(line, ref)
        return Condition(ref, IS_TRUE)

    def check_boolean(self, line, ref):
        if ref.feature not in BOOLEAN_FEATURES:
            line.error("feature {}.{} is not boolean".format(ref.level, ref.feature))

    def ref(self, line, scope, scaled=False):
        token = line.next("ref", what="a feature reference (L., B. or D.)")
        level, feature = token.text.split(".", 1)
        if feature not in LEVEL_FEATURES[level]:
            line.error("unknown feature '{}' at level {}".format(feature, level), token.column)
        if level == "L" and scope == BLOCK:
            line.error("line features can only be used inside 'any line' in block rules", token.column)
        if scaled:
            op = line.accept("punct", "*") or line.accept("punct", "/")
            if op is not None:
                factor = self.constant(line)
                if isinstance(factor.value, (bool, str)):
                    line.error("scale factor must be numeric")
                if op.text == "/" and factor.value == 0:
                    line.error("division by zero", op.column)
                return Ref(level, feature, op.text, factor)
        return Ref(level, feature)

    def operand(self, line, scope):
        token = line.peek()
        if token is not None and token.kind == "ref":
            return self.ref(line, scope, scaled=True)
        return self.constant(line)

    def constant(self, line):
        token = line.next(what="a value")
        if token.kind == "number":
            return Constant(_number_value(token.text))
        if token.kind == "string":
            return Constant(re.sub(r"\\(.)", r"\1", token.text[1:-1]))
        if token.kind == "word" and token.text in ("true", "false"):
            return Constant(token.text == "true")
        if token.kind == "threshold":
            name = token.text[1:]
            if name not in self.thresholds:
                line.error("unknown threshold '{}'".format(name), token.column)
            return Constant(self.thresholds[name], name)
        line.error("expected a value, found '{}'".format(token.text), token.column)


def _strip_comment(raw):
    in_string = False
    escaped = False
    for i, c in enumerate(raw):
        if escaped:
            escaped = False
        elif c == "\\":
            escaped = True
        elif c == '"':
            in_string = not in_string
        elif c == "#" and not in_string:
            return raw[:i]
    return raw


def load_rules(text, thresholds=None, source="<rules>"):
    """
    Parses rule file content.

    Parameters
    ----------
    text : str
        Content in the rule file grammar.
    thresholds : dict, optional
        Values of the `$name` thresholds (default is `DEFAULT_THRESHOLDS`).
    source : str, optional
        Name used in error messages.

    Returns
    -------
    RuleBook

    Raises
    ------
    RuleDefinitionError :
        With line and column, for syntax errors, unknown features, thresholds or labels.

    """
    thresholds = DEFAULT_THRESHOLDS if thresholds is None else thresholds
    book = _Parser(source, thresholds).parse(text)
    logger.debug("Loaded %d block and %d line rules from %s", len(book.block.rules), len(book.line.rules), source)
    return book


def load_rule_file(path, thresholds=None):
    path = Path(path)
    return load_rules(path.read_text(encoding="utf-8"), thresholds=thresholds, source=str(path))
