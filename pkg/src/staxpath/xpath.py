"""Forward Core XPath: parser, compiler to alternating automata, reference evaluator.

Supported: the ``child``, ``descendant`` and ``following-sibling`` axes
(``/x`` and ``//x`` abbreviate the first two), name tests, ``*`` and
``node()``, and predicates built from relative paths with ``and``, ``or``
and ``not(...)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .asta import ASTA, TOP, And, ATransition, Down, Formula, Not, Or
from .labels import LEAF, LabelSet
from .tree import BinaryTree, Element

CHILD, DESC, FOLL = "child", "descendant", "following-sibling"
WILDCARD = "*"


class XPathError(ValueError):
    """Syntax error or unsupported construct; ``pos`` is a character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Step:
    axis: str
    test: str
    predicate: Optional["Pred"] = None

    def __str__(self) -> str:
        pred = f"[{self.predicate}]" if self.predicate is not None else ""
        return f"{self.axis}::{self.test}{pred}"


@dataclass(frozen=True)
class PAnd:
    left: "Pred"
    right: "Pred"

    def __str__(self) -> str:
        return f"({self.left} and {self.right})"


@dataclass(frozen=True)
class POr:
    left: "Pred"
    right: "Pred"

    def __str__(self) -> str:
        return f"({self.left} or {self.right})"


@dataclass(frozen=True)
class PNot:
    body: "Pred"

    def __str__(self) -> str:
        return f"not({self.body})"


@dataclass(frozen=True)
class PPath:
    steps: tuple  # empty tuple stands for "."

    def __str__(self) -> str:
        return "/".join(str(s) for s in self.steps) or "."


Pred = Union[PAnd, POr, PNot, PPath]


@dataclass(frozen=True)
class Query:
    absolute: bool
    steps: tuple

    def __str__(self) -> str:
        return "/" + "/".join(str(s) for s in self.steps)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(//|/|::|\[|\]|\(|\)|\*|\.|@|[A-Za-z_][A-Za-z0-9_.-]*)")
_AXES = {CHILD, DESC, FOLL}
_KNOWN_AXES = _AXES | {"attribute", "self", "parent", "ancestor", "ancestor-or-self",
                       "descendant-or-self", "following", "preceding", "preceding-sibling"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise XPathError(f"unexpected character {text[pos]!r}", pos)
            self.toks.append((m.group(1), m.start(1)))
            pos = m.end()
        self.k = 0

    def peek(self, ahead: int = 0) -> Optional[str]:
        k = self.k + ahead
        return self.toks[k][0] if k < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.k][1] if self.k < len(self.toks) else len(self.text)

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            want = repr(expected) if expected else "a token"
            got = repr(tok) if tok is not None else "end of query"
            raise XPathError(f"expected {want}, got {got}", self.pos())
        self.k += 1
        return tok

    def query(self) -> Query:
        absolute = self.peek() in ("/", "//")
        steps = self.path(first_axis=CHILD)
        if self.peek() is not None:
            raise XPathError(f"unexpected {self.peek()!r}", self.pos())
        return Query(absolute, steps)

    def path(self, first_axis: str) -> tuple:
        steps = []
        axis = first_axis
        if self.peek() == "/":
            self.take()
        elif self.peek() == "//":
            self.take()
            axis = DESC
        while True:
            steps.append(self.step(axis))
            if self.peek() == "/":
                self.take()
                axis = CHILD
            elif self.peek() == "//":
                self.take()
                axis = DESC
            else:
                return tuple(steps)

    def step(self, default_axis: str) -> Step:
        axis = default_axis
        tok = self.peek()
        if tok == "@":
            raise XPathError("attribute axis is not supported", self.pos())
        if tok is not None and self.peek(1) == "::":
            if tok not in _KNOWN_AXES:
                raise XPathError(f"unknown axis {tok!r}", self.pos())
            if tok not in _AXES:
                raise XPathError(f"axis {tok!r} is not supported", self.pos())
            if default_axis == DESC and tok != CHILD:
                raise XPathError("only a child step may follow '//'", self.pos())
            self.take()
            self.take("::")
            axis = DESC if default_axis == DESC else tok
        test = self.node_test()
        pred = None
        while self.peek() == "[":
            self.take()
            p = self.expr()
            self.take("]")
            pred = p if pred is None else PAnd(pred, p)
        return Step(axis, test, pred)

    def node_test(self) -> str:
        pos = self.pos()
        tok = self.take()
        if tok == WILDCARD:
            return WILDCARD
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.-]*", tok):
            raise XPathError(f"expected a node test, got {tok!r}", pos)
        if self.peek() == "(":
            self.take()
            self.take(")")
            if tok == "node":
                return WILDCARD
            if tok == "text":
                raise XPathError("text() is not supported", pos)
            raise XPathError(f"unknown node test {tok}()", pos)
        return tok

    def expr(self) -> Pred:
        left = self.conj()
        while self.peek() == "or":
            self.take()
            left = POr(left, self.conj())
        return left

    def conj(self) -> Pred:
        left = self.unary()
        while self.peek() == "and":
            self.take()
            left = PAnd(left, self.unary())
        return left

    def unary(self) -> Pred:
        tok = self.peek()
        if tok == "not" and self.peek(1) == "(":
            self.take()
            self.take("(")
            body = self.expr()
            self.take(")")
            return PNot(body)
        if tok == "(":
            self.take()
            body = self.expr()
            self.take(")")
            return body
        if tok in ("/", "//"):
            raise XPathError("absolute paths inside predicates are not supported", self.pos())
        if tok == ".":
            self.take()
            if self.peek() not in ("/", "//"):
                return PPath(())
            return PPath(self.path(first_axis=CHILD))
        return PPath(self.path(first_axis=CHILD))


def parse_xpath(text: str) -> Query:
    """Parse a query; raises :class:`XPathError` with a character position."""
    if not text.strip():
        raise XPathError("empty query", 0)
    return _Parser(text).query()


# ---------------------------------------------------------------------------
# Compiler
# ---------------------------------------------------------------------------

def _labels(test: str) -> LabelSet:
    return LabelSet.every() if test == WILDCARD else LabelSet.of(test)


def _entry_side(axis: str) -> int:
    return 2 if axis == FOLL else 1


class _Compiler:
    def __init__(self):
        self.states: list = []
        self.transitions: list = []
        self.labels: set = set()

    def fresh(self) -> str:
        q = f"q{len(self.states)}"
        self.states.append(q)
        return q

    def steps(self, steps: tuple, select_last: bool) -> str:
        """Compile a step sequence; returns the state of its first step."""
        s = steps[0]
        q = self.fresh()
        if s.test != WILDCARD:
            self.labels.add(s.test)
        pred = self.pred(s.predicate) if s.predicate is not None else None
        if len(steps) > 1:
            nxt = self.steps(steps[1:], select_last)
            move: Formula = Down(_entry_side(steps[1].axis), nxt)
            formula = move if pred is None else And(move, pred)
            select = False
        else:
            formula = TOP if pred is None else pred
            select = select_last
        self.transitions.append(ATransition(q, _labels(s.test), select, formula))
        loop = Or(Down(1, q), Down(2, q)) if s.axis == DESC else Down(2, q)
        self.transitions.append(ATransition(q, LabelSet.every(), False, loop))
        return q

    def pred(self, p: Pred) -> Formula:
        if isinstance(p, PAnd):
            return And(self.pred(p.left), self.pred(p.right))
        if isinstance(p, POr):
            return Or(self.pred(p.left), self.pred(p.right))
        if isinstance(p, PNot):
            return Not(self.pred(p.body))
        if not p.steps:
            return TOP
        q = self.steps(p.steps, select_last=False)
        return Down(_entry_side(p.steps[0].axis), q)


def compile_to_asta(query: Union[Query, str], alphabet=()) -> ASTA:
    """One state per step: a progress transition and a recursion transition each."""
    if isinstance(query, str):
        query = parse_xpath(query)
    c = _Compiler()
    first = c.steps(query.steps, select_last=True)
    # the document node has no siblings, so a following-sibling first step selects nothing
    top = [] if query.steps[0].axis == FOLL else [first]
    return ASTA(c.states, top, c.transitions, frozenset(alphabet) | c.labels)


# ---------------------------------------------------------------------------
# Reference evaluator
# ---------------------------------------------------------------------------

class _Doc:
    """Unranked document with elements numbered in document order; -1 is the document node."""

    def __init__(self, root: Element):
        # identical subtrees may be shared objects, so number by traversal
        self.tags = []
        self.children = []
        self.parent = []
        counter = 0
        stack = [(root, -1)]
        while stack:
            e, p = stack.pop()
            k = counter
            counter += 1
            self.tags.append(e.tag)
            self.children.append([])
            self.parent.append(p)
            if p >= 0:
                self.children[p].append(k)
            for c in reversed(e.children):
                stack.append((c, k))
        self.roots = [0]

    def kids(self, k: int) -> list:
        return self.roots if k == -1 else self.children[k]

    def descendants(self, k: int) -> list:
        out = []
        stack = list(reversed(self.kids(k)))
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
        return out

    def following_siblings(self, k: int) -> list:
        if k == -1:
            return []
        sibs = self.kids(self.parent[k])
        return sibs[sibs.index(k) + 1:]


def _axis(doc: _Doc, k: int, axis: str) -> list:
    if axis == CHILD:
        return doc.kids(k)
    if axis == DESC:
        return doc.descendants(k)
    return doc.following_siblings(k)


def _apply(doc: _Doc, context: set, steps: tuple) -> set:
    for s in steps:
        nxt = set()
        for k in context:
            for x in _axis(doc, k, s.axis):
                if (s.test == WILDCARD or doc.tags[x] == s.test) and \
                        (s.predicate is None or _holds(doc, x, s.predicate)):
                    nxt.add(x)
        context = nxt
    return context


def _holds(doc: _Doc, k: int, p: Pred) -> bool:
    if isinstance(p, PAnd):
        return _holds(doc, k, p.left) and _holds(doc, k, p.right)
    if isinstance(p, POr):
        return _holds(doc, k, p.left) or _holds(doc, k, p.right)
    if isinstance(p, PNot):
        return not _holds(doc, k, p.body)
    return bool(_apply(doc, {k}, p.steps)) if p.steps else True


def oracle_eval(query: Union[Query, str], doc: Element) -> list:
    """Selected elements as document-order ranks, by direct set semantics."""
    if isinstance(query, str):
        query = parse_xpath(query)
    d = _Doc(doc)
    return sorted(_apply(d, {-1}, query.steps))


def oracle_binary_ids(query: Union[Query, str], doc: Element, t: BinaryTree) -> tuple:
    """Same as :func:`oracle_eval`, translated to node ids of the encoded tree."""
    ranks = oracle_eval(query, doc)
    ids = [i for i, lab in enumerate(t.labels) if lab != LEAF]
    return tuple(ids[k] for k in ranks)
