"""Binary trees, element-only XML documents and the encoding between them.

A binary tree is either the leaf ``#`` or ``l(t1, t2)``.  Every node has a
path over {1, 2} (the empty tuple is the root) and a dense pre-order id.
Because every internal node has exactly two children, the pre-order list
of labels determines the tree, so that list is the canonical storage.

XML documents are read through the first-child/next-sibling encoding: the
left child of a node is its first XML child and the right child is its
next XML sibling.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence
from xml.parsers import expat

from .labels import LEAF

Path = tuple

TAG_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")


class BinaryTree:
    """Immutable full binary tree stored as pre-order arrays.

    ``left[i]`` and ``right[i]`` are child ids (-1 for ``#`` nodes),
    ``parent[i]`` is -1 for the root, and ``size[i]`` counts the nodes of
    the subtree rooted at ``i`` (including leaves), so the subtree of ``i``
    is exactly the id interval ``[i, i + size[i])``.
    """

    __slots__ = ("labels", "left", "right", "parent", "size", "depth", "_hash")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        n = len(labels)
        if n == 0:
            raise ValueError("empty label sequence")
        left = [-1] * n
        right = [-1] * n
        parent = [-1] * n
        depth = [0] * n
        # Each open internal node waits for its left and then its right child.
        pending: list = []
        for i, lab in enumerate(labels):
            if i > 0:
                if not pending:
                    raise ValueError("label sequence continues after a complete tree")
                p = pending[-1]
                if left[p] == -1:
                    left[p] = i
                else:
                    right[p] = i
                    pending.pop()
                parent[i] = p
                depth[i] = depth[p] + 1
            if lab != LEAF:
                pending.append(i)
        if pending:
            raise ValueError("incomplete tree: some internal node lacks children")
        size = [1] * n
        for i in range(n - 1, -1, -1):
            if left[i] != -1:
                size[i] = 1 + size[left[i]] + size[right[i]]
        self.labels = labels
        self.left = tuple(left)
        self.right = tuple(right)
        self.parent = tuple(parent)
        self.size = tuple(size)
        self.depth = tuple(depth)
        self._hash = hash(labels)

    # construction helpers
    @classmethod
    def leaf(cls) -> "BinaryTree":
        return cls((LEAF,))

    @classmethod
    def node(cls, label: str, left: "BinaryTree", right: "BinaryTree") -> "BinaryTree":
        if label == LEAF:
            raise ValueError("# cannot label an internal node")
        return cls((label,) + left.labels + right.labels)

    @classmethod
    def parse(cls, text: str) -> "BinaryTree":
        """Read the term syntax ``a(b(#,#),#)``."""
        tokens = re.findall(r"[^\s(),]+|[(),]", text)
        out: list = []
        pos = 0

        def expect(tok: str) -> None:
            nonlocal pos
            if pos >= len(tokens) or tokens[pos] != tok:
                got = tokens[pos] if pos < len(tokens) else "end of input"
                raise ValueError(f"expected {tok!r}, got {got!r}")
            pos += 1

        # Iterative reader: each frame counts the children still expected.
        stack: list = []
        while True:
            if pos >= len(tokens):
                raise ValueError("unexpected end of term")
            tok = tokens[pos]
            pos += 1
            if tok in "(),":
                raise ValueError(f"unexpected {tok!r}")
            out.append(tok)
            if tok != LEAF:
                expect("(")
                stack.append(2)
                continue
            while stack:
                stack[-1] -= 1
                if stack[-1] == 1:
                    expect(",")
                    break
                stack.pop()
                expect(")")
            if not stack:
                break
        if pos != len(tokens):
            raise ValueError("trailing input after term")
        return cls(out)

    # basic queries
    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BinaryTree) and self.labels == other.labels

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"BinaryTree({self})"

    def __str__(self) -> str:
        parts: list = []
        stack: list = []
        for lab in self.labels:
            if lab == LEAF:
                parts.append(LEAF)
                while stack:
                    stack[-1] -= 1
                    if stack[-1] == 1:
                        parts.append(",")
                        break
                    stack.pop()
                    parts.append(")")
            else:
                parts.append(lab + "(")
                stack.append(2)
        return "".join(parts)

    def label(self, i: int) -> str:
        return self.labels[i]

    def is_leaf(self, i: int) -> bool:
        return self.labels[i] == LEAF

    def internal_count(self) -> int:
        return sum(1 for lab in self.labels if lab != LEAF)

    def alphabet(self) -> frozenset:
        return frozenset(lab for lab in self.labels if lab != LEAF)

    def path(self, i: int) -> Path:
        steps = []
        while self.parent[i] != -1:
            p = self.parent[i]
            steps.append(1 if self.left[p] == i else 2)
            i = p
        return tuple(reversed(steps))

    def node_at(self, path: Sequence[int]) -> int:
        i = 0
        for step in path:
            if self.left[i] == -1:
                raise KeyError(f"path {tuple(path)} leaves the tree")
            if step == 1:
                i = self.left[i]
            elif step == 2:
                i = self.right[i]
            else:
                raise KeyError(f"path steps must be 1 or 2, got {step}")
        return i

    def subtree(self, i: int) -> "BinaryTree":
        return BinaryTree(self.labels[i:i + self.size[i]])

    def is_ancestor_or_self(self, a: int, b: int) -> bool:
        return a <= b < a + self.size[a]

    def leaves(self) -> list:
        return [i for i, lab in enumerate(self.labels) if lab == LEAF]

    def element_ids(self) -> list:
        """Map each node id to its rank among non-# nodes (-1 for leaves)."""
        out, k = [], 0
        for lab in self.labels:
            if lab == LEAF:
                out.append(-1)
            else:
                out.append(k)
                k += 1
        return out


def substitute(t: BinaryTree, path: Sequence[int], replacement: BinaryTree) -> BinaryTree:
    """Replace the subtree of ``t`` rooted at ``path`` by ``replacement``."""
    i = t.node_at(path)
    return BinaryTree(t.labels[:i] + replacement.labels + t.labels[i + t.size[i]:])


def doc_order_cmp(a: Sequence[int], b: Sequence[int]) -> int:
    """Compare two node paths in document order; returns -1, 0 or 1."""
    a, b = tuple(a), tuple(b)
    return (a > b) - (a < b)


def random_tree(seed, max_nodes: int, alphabet: Iterable[str], leaf_prob: float = 0.35) -> BinaryTree:
    """Draw a binary tree with at most ``max_nodes`` internal nodes.

    Positions are filled in pre-order.  Each open position becomes ``#``
    with probability ``leaf_prob`` (or always once the budget is spent),
    otherwise an internal node with a uniformly drawn label.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    alphabet = sorted(set(alphabet) - {LEAF})
    if not alphabet:
        raise ValueError("empty alphabet")
    rng = random.Random(seed)
    labels = []
    open_positions = 1
    budget = max_nodes
    while open_positions:
        if budget and rng.random() >= leaf_prob:
            labels.append(rng.choice(alphabet))
            budget -= 1
            open_positions += 1
        else:
            labels.append(LEAF)
            open_positions -= 1
    return BinaryTree(labels)


def all_trees(alphabet: Iterable[str], max_internal: int) -> Iterator[BinaryTree]:
    """Every tree over ``alphabet`` with at most ``max_internal`` internal nodes."""
    alphabet = sorted(alphabet)

    def build(n: int) -> Iterator[tuple]:
        if n == 0:
            yield (LEAF,)
            return
        for k in range(n):
            for lab in alphabet:
                for left in build(k):
                    for right in build(n - 1 - k):
                        yield (lab,) + left + right

    for n in range(max_internal + 1):
        for labels in build(n):
            yield BinaryTree(labels)


# ---------------------------------------------------------------------------
# Element-only XML
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Element:
    """A node of an unranked, ordered, element-only document."""

    tag: str
    children: tuple = field(default=())

    def __str__(self) -> str:
        if not self.children:
            return self.tag
        return self.tag + "(" + ", ".join(str(c) for c in self.children) + ")"

    def iter(self) -> Iterator["Element"]:
        """Elements of the subtree in document order."""
        stack = [self]
        while stack:
            e = stack.pop()
            yield e
            stack.extend(reversed(e.children))

    def size(self) -> int:
        return sum(1 for _ in self.iter())

    def to_xml(self) -> str:
        parts: list = []
        stack: list = [(self, False)]
        while stack:
            e, closing = stack.pop()
            if closing:
                parts.append(f"</{e.tag}>")
            elif not e.children:
                parts.append(f"<{e.tag}/>")
            else:
                parts.append(f"<{e.tag}>")
                stack.append((e, True))
                stack.extend((c, False) for c in reversed(e.children))
        return "".join(parts)


class ParseError(ValueError):
    """Malformed or unsupported XML input; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


def parse_doc(text) -> Element:
    """Parse the element-only XML subset.

    Whitespace between tags is ignored.  Attributes, text, comments,
    declarations, processing instructions and CDATA are rejected.
    """
    if isinstance(text, str):
        text = text.encode("utf-8")
    parser = expat.ParserCreate("UTF-8")
    stack: list = [[]]
    tags: list = []

    def fail(message: str) -> None:
        raise ParseError(message, parser.CurrentByteIndex)

    def start(tag, attrs):
        if attrs:
            fail("attributes are not supported")
        if not TAG_RE.fullmatch(tag):
            fail(f"unsupported tag name {tag!r}")
        tags.append(tag)
        stack.append([])

    def end(tag):
        children = stack.pop()
        tags.pop()
        stack[-1].append(Element(tag, tuple(children)))

    def chars(data):
        if data.strip():
            fail("text content is not supported")

    def reject(what):
        return lambda *args: fail(f"{what} is not supported")

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.CommentHandler = reject("comment")
    parser.StartCdataSectionHandler = reject("CDATA section")
    parser.ProcessingInstructionHandler = reject("processing instruction")
    parser.XmlDeclHandler = reject("XML declaration")
    parser.StartDoctypeDeclHandler = reject("document type declaration")
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        message = expat.errors.messages.get(exc.code, str(exc))
        offset = parser.CurrentByteIndex if parser.CurrentByteIndex >= 0 else len(text)
        raise ParseError(message, offset) from None
    roots = stack[0]
    if len(roots) != 1:
        raise ParseError("expected a single root element", len(text))
    return roots[0]


def to_binary(doc: Element) -> BinaryTree:
    """First-child/next-sibling encoding of ``doc``."""
    out = []
    stack = [((doc,), 0)]
    while stack:
        siblings, k = stack.pop()
        if k == len(siblings):
            out.append(LEAF)
            continue
        node = siblings[k]
        out.append(node.tag)
        stack.append((siblings, k + 1))
        stack.append((node.children, 0))
    return BinaryTree(out)


def from_binary(t: BinaryTree) -> Element:
    """Inverse of :func:`to_binary`; the root must have ``#`` as right child."""
    if t.is_leaf(0):
        raise ValueError("the empty tree encodes no document")
    if not t.is_leaf(t.right[0]):
        raise ValueError("the root of an encoded document has no sibling")

    # children have larger ids than their parent, so build in reverse pre-order
    built: dict = {}
    for i in range(len(t) - 1, -1, -1):
        if t.is_leaf(i):
            continue
        kids = []
        j = t.left[i]
        while not t.is_leaf(j):
            kids.append(built.pop(j))
            j = t.right[j]
        built[i] = Element(t.labels[i], tuple(kids))
    return built[0]
