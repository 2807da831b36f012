"""Relevant nodes of deterministic selecting automata.

A node is relevant when the automaton learns something there: it selects
the node, or its state differs from what it would be by just looping or
ignoring a universal subtree.  This module computes relevant sets from
complete runs, the jumping top-down traversal that only visits those
nodes, the leaf-driven bottom-up evaluator, and two semantic oracles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .index import JumpIndex, build_index
from .labels import LEAF, LabelSet
from .sta import BU_DET, TD_DET, STA, Run, _finish_run, check_kind, classify_state, to_recognizer
from .tree import BinaryTree


class Rejected(Exception):
    """The input tree is not accepted."""


def universal_state(a: STA) -> Optional[str]:
    """The top-down universal state, if any (unique when ``a`` is minimal)."""
    for q in a.states:
        if "universal" in classify_state(a, q):
            return q
    return None


def sink_states(a: STA) -> frozenset:
    return frozenset(q for q in a.states if "sink" in classify_state(a, q))


def bu_universal_state(a: STA) -> Optional[str]:
    """An accepting state that every context keeps: any tree containing it is accepted."""
    sigma = sorted(a.alphabet)
    for q in a.states:
        if q not in a.top:
            continue
        if all(a.sources(q, p, lab) == {q} and a.sources(p, q, lab) == {q}
               for p in a.states for lab in sigma):
            return q
    return None


# ---------------------------------------------------------------------------
# Relevant sets from complete runs
# ---------------------------------------------------------------------------

def td_relevant_set(a: STA, run: Run) -> frozenset:
    """Top-down relevant nodes of ``run``; ``a`` should be minimal and complete.

    Internal nodes are relevant when selecting or when the states of the
    node and its children are not a loop ``(q; q, q)`` or a loop on one
    side with the universal state on the other.  The root is always
    relevant; a ``#`` leaf is relevant only in a non-bottom state.
    """
    t = run.tree
    top = universal_state(a)
    out = {0}
    for i, lab in enumerate(t.labels):
        q = run.states[i]
        if lab == LEAF:
            if q not in a.bottom:
                out.add(i)
            continue
        q1, q2 = run.states[t.left[i]], run.states[t.right[i]]
        if (q, lab) in a.select:
            out.add(i)
        elif not ((q == q1 == q2) or (q == q1 and q2 == top) or (q == q2 and q1 == top)):
            out.add(i)
    return frozenset(out)


def bu_relevant_set(a: STA, run: Run) -> frozenset:
    """Bottom-up relevant nodes of ``run``; ``a`` should be a minimal complete BDSTA."""
    t = run.tree
    (q0,) = a.bottom
    top = bu_universal_state(a)
    skip_child = {q0, top}
    out = {0}
    for i, lab in enumerate(t.labels):
        if lab == LEAF:
            continue
        q = run.states[i]
        q1, q2 = run.states[t.left[i]], run.states[t.right[i]]
        if (q, lab) in a.select:
            out.add(i)
        elif not (q == top or q == q1 == q2 or (q == q1 and q2 in skip_child)
                  or (q == q2 and q1 in skip_child)):
            out.add(i)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Jumping top-down traversal
# ---------------------------------------------------------------------------

@dataclass
class JumpResult:
    """Partial run computed by the jumping traversal."""

    mapping: dict = field(default_factory=dict)
    accepted: bool = True
    jumps: int = 0

    def visited(self) -> frozenset:
        return frozenset(self.mapping)


@dataclass(frozen=True)
class _Moves:
    """How a state treats each label: keep looping, follow one side, or stop."""

    loop: frozenset
    left: frozenset
    right: frozenset
    stop: LabelSet


def _moves(a: STA, q: str, top: Optional[str]) -> _Moves:
    loop, left, right = set(), set(), set()
    for lab in a.alphabet:
        if (q, lab) in a.select:
            continue
        (pair,) = a.destinations(q, lab)
        if pair == (q, q):
            loop.add(lab)
        elif top is not None and pair == (q, top):
            left.add(lab)
        elif top is not None and pair == (top, q):
            right.add(lab)
    stop = LabelSet(frozenset(loop | left | right), True)
    return _Moves(frozenset(loop), frozenset(left), frozenset(right), stop)


def topdown_jump(a: STA, t: BinaryTree, idx: Optional[JumpIndex] = None) -> JumpResult:
    """Run a minimal complete TDSTA visiting only top-down relevant nodes.

    From a node in state ``q`` the traversal looks for the next nodes where
    ``q`` stops looping.  When ``q`` only loops on both sides the top-most
    such nodes are found with descendant and following jumps; when it only
    follows its left (right) spine next to a universal state, one jump along
    that spine suffices; mixed cases walk the skipped region explicitly.
    Skipped ``#`` leaves are still checked against the bottom states by
    counting them.  A rejected tree yields an empty mapping.
    """
    if idx is None:
        idx = build_index(t)
    (q_init,) = a.top
    top = universal_state(a)
    sinks = sink_states(a)
    moves = {q: _moves(a, q, top) for q in a.states}
    result = JumpResult()
    labels = t.labels

    def next_relevant(pi: int, q: str) -> list:
        m = moves[q]
        lab = labels[pi]
        if lab == LEAF:
            return [] if q in a.bottom else [pi]
        if lab in m.stop:
            return [pi]
        if m.loop and not m.left and not m.right:
            result.jumps += 1
            found = idx.topmost_matches(pi, m.stop)
            covered = sum(t.size[x] for x in found)
            skipped_leaves = (t.size[pi] - covered + 1 - len(found)) // 2
            if skipped_leaves and q not in a.bottom:
                raise Rejected
            return found
        if m.left and not m.loop and not m.right:
            result.jumps += 1
            hit = idx.jump_leftmost(pi, m.stop)
            if hit is None and q not in a.bottom:
                raise Rejected
            return [] if hit is None else [hit]
        if m.right and not m.loop and not m.left:
            result.jumps += 1
            hit = idx.jump_rightmost(pi, m.stop)
            if hit is None and q not in a.bottom:
                raise Rejected
            return [] if hit is None else [hit]
        found, stack = [], [pi]
        while stack:
            i = stack.pop()
            lab = labels[i]
            if lab == LEAF:
                if q not in a.bottom:
                    found.append(i)
                continue
            if lab in m.stop:
                found.append(i)
                continue
            if lab in m.loop or lab in m.right:
                stack.append(t.right[i])
            if lab in m.loop or lab in m.left:
                stack.append(t.left[i])
        return found

    def visit(pi: int, q: str) -> None:
        stack = [(pi, q)]
        while stack:
            pi, q = stack.pop()
            result.mapping[pi] = q
            lab = labels[pi]
            if lab == LEAF:
                if q not in a.bottom:
                    raise Rejected
                continue
            dests = a.destinations(q, lab)
            if not dests:
                raise Rejected
            ((q1, q2),) = dests
            if q1 in sinks or q2 in sinks:
                raise Rejected
            for child, state in ((t.right[pi], q2), (t.left[pi], q1)):
                for nxt in reversed(next_relevant(child, state)):
                    stack.append((nxt, state))

    try:
        visit(0, q_init)
    except Rejected:
        return JumpResult({}, False, result.jumps)
    return result


# ---------------------------------------------------------------------------
# Bottom-up evaluation
# ---------------------------------------------------------------------------

def bottomup_eval(a: STA, t: BinaryTree, idx: Optional[JumpIndex] = None) -> Run:
    """Leaf-driven bottom-up run of a deterministic complete BDSTA.

    The leaves are read in pre-order with the bottom state.  Whenever the
    last two entries are the two children of one node they are reduced to
    that node with its source state.  Raises :class:`Rejected` when the
    root state is not a top state.
    """
    if idx is None:
        idx = build_index(t)
    (q0,) = a.bottom
    states = [None] * len(t)
    stack: list = []
    for leaf in idx.leaves_in_order():
        states[leaf] = q0
        stack.append(leaf)
        while len(stack) >= 2:
            right, left = stack[-1], stack[-2]
            p = t.parent[right]
            if p == -1 or t.right[p] != right or t.left[p] != left:
                break
            stack[-2:] = [p]
            (states[p],) = a.sources(states[left], states[right], t.labels[p])
    if states[0] not in a.top:
        raise Rejected
    return _finish_run(a, t, states)


# ---------------------------------------------------------------------------
# Semantic oracles
# ---------------------------------------------------------------------------

class _Types:
    """Subset view of an automaton: a tree's type is the set of states accepting it."""

    def __init__(self, a: STA):
        self.a = a
        self.rules: dict = {}
        for tr in a.transitions:
            for lab in tr.labels.members(a.alphabet):
                self.rules.setdefault(lab, []).append(tr)

    def combine(self, lab: str, left: frozenset, right: frozenset) -> frozenset:
        return frozenset(tr.state for tr in self.rules.get(lab, ())
                         if tr.left in left and tr.right in right)

    def of_tree(self, t: BinaryTree) -> list:
        out = [frozenset()] * len(t)
        for i in range(len(t) - 1, -1, -1):
            if t.labels[i] == LEAF:
                out[i] = self.a.bottom
            else:
                out[i] = self.combine(t.labels[i], out[t.left[i]], out[t.right[i]])
        return out

    def inhabited(self) -> list:
        found = [self.a.bottom]
        seen = {self.a.bottom}
        k = 0
        while k < len(found):
            # pair the new type with every type found so far, both ways round
            cur = found[k]
            k += 1
            for other in list(found[:k]):
                for lab in sorted(self.rules):
                    for l, r in ((cur, other), (other, cur)):
                        ty = self.combine(lab, l, r)
                        if ty not in seen:
                            seen.add(ty)
                            found.append(ty)
        return found


def semantic_relevance(a: STA, t: BinaryTree, pi: int, _cache: Optional[dict] = None) -> bool:
    """Whether replacing the subtree at ``pi`` can change membership of ``t``.

    Every subtree has a type, the set of states accepting it.  Acceptance
    of ``t`` only depends on the type found at ``pi``, so ``pi`` is
    relevant exactly when the context function from inhabited types to
    acceptance is not constant.
    """
    flags = check_kind(a)
    if TD_DET not in flags and BU_DET not in flags:
        raise ValueError("semantic_relevance needs a deterministic automaton")
    cache = _cache if _cache is not None else {}
    if "types" not in cache:
        types = _Types(a)
        cache["types"] = types
        cache["inhabited"] = types.inhabited()
        cache["tree"] = None
    types = cache["types"]
    if cache.get("tree") is not t:
        cache["tree"] = t
        cache["of_tree"] = types.of_tree(t)
    base = cache["of_tree"]
    ancestors = []
    i = pi
    while t.parent[i] != -1:
        ancestors.append(i)
        i = t.parent[i]

    def accepted_with(ty: frozenset) -> bool:
        cur = ty
        for child in ancestors:
            p = t.parent[child]
            if t.left[p] == child:
                cur = types.combine(t.labels[p], cur, base[t.right[p]])
            else:
                cur = types.combine(t.labels[p], base[t.left[p]], cur)
        return bool(cur & a.top)

    outcomes = {accepted_with(ty) for ty in cache["inhabited"]}
    return len(outcomes) > 1


def semantic_relevant_set(a: STA, t: BinaryTree) -> frozenset:
    cache: dict = {}
    return frozenset(i for i in range(len(t)) if semantic_relevance(a, t, i, cache))


def sub_automaton_classes(a: STA) -> tuple:
    """Exact equivalence of the restricted automata ``a[q]``, and which equal the trivial one.

    Works on the recognizer, where selection is visible in hatted labels:
    two states are equivalent when no reachable membership vector tells
    them apart, and a state behaves like the automaton accepting every
    tree while selecting nothing when it accepts exactly the hat-free
    trees.  Returns ``(class_of, trivial)``.
    """
    r = to_recognizer(a)
    pos = {q: k for k, q in enumerate(r.states)}
    rules: dict = {}
    for tr in r.transitions:
        for lab in tr.labels.members(r.alphabet):
            rules.setdefault(lab, []).append((1 << pos[tr.state], 1 << pos[tr.left], 1 << pos[tr.right]))
    plain = set(a.alphabet)
    start = (sum(1 << pos[q] for q in r.bottom), True)
    found = [start]
    seen = {start}
    k = 0
    while k < len(found):
        cur = found[k]
        k += 1
        for other in list(found[:k]):
            for lab, rs in rules.items():
                for (v1, h1), (v2, h2) in ((cur, other), (other, cur)):
                    v = 0
                    for q, l, rr in rs:
                        if v1 & l and v2 & rr:
                            v |= q
                    item = (v, h1 and h2 and lab in plain)
                    if item not in seen:
                        seen.add(item)
                        found.append(item)
    signature = {q: tuple(bool(v >> pos[q] & 1) for v, _ in found) for q in a.states}
    class_of: dict = {}
    ids: dict = {}
    for q in a.states:
        class_of[q] = ids.setdefault(signature[q], len(ids))
    trivial = frozenset(q for q in a.states
                        if all(bool(v >> pos[q] & 1) == h for v, h in found))
    return class_of, trivial


def definition_relevant_set(a: STA, run: Run, classes: Optional[tuple] = None) -> frozenset:
    """Relevant nodes of ``run`` decided through sub-automaton equivalence.

    Unlike :func:`td_relevant_set` this needs no minimal automaton: state
    equality is replaced by equivalence of the restricted automata and the
    universal state by equivalence with the trivial automaton.  Root and
    leaves follow the same convention as the syntactic version.
    """
    class_of, trivial = classes if classes is not None else sub_automaton_classes(a)
    t = run.tree
    out = {0}
    for i, lab in enumerate(t.labels):
        q = run.states[i]
        if lab == LEAF:
            if q not in a.bottom:
                out.add(i)
            continue
        q1, q2 = run.states[t.left[i]], run.states[t.right[i]]
        c, c1, c2 = class_of[q], class_of[q1], class_of[q2]
        if (q, lab) in a.select:
            out.add(i)
        elif not ((c == c1 == c2) or (c == c1 and q2 in trivial) or (c == c2 and q1 in trivial)):
            out.add(i)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

SELECTED = "selected-relevant"
CHANGING = "state-change-relevant"
SKIP_SUBTREE = "skippable-subtree"
SKIP_PATH = "skippable-on-path"


def relevance_report(a: STA, run: Run, relevant: frozenset) -> list:
    """Classify every node as ``(id, class, state)``.

    Non-relevant nodes in a universal or sink state, or ``#`` leaves, are
    inside skippable subtrees; the other non-relevant nodes are passed
    over on a looping path.
    """
    t = run.tree
    idle = {q for q in a.states if classify_state(a, q)}
    out = []
    for i, lab in enumerate(t.labels):
        q = run.states[i]
        if i in relevant:
            kind = SELECTED if i in run.selected else CHANGING
        elif lab == LEAF or q in idle:
            kind = SKIP_SUBTREE
        else:
            kind = SKIP_PATH
        out.append((i, kind, q))
    return out


def format_report(rows: list) -> str:
    return "".join(f"{i}\t{kind}\t{q if q is not None else ''}\n" for i, kind, q in rows)
