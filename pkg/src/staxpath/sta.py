"""Selecting tree automata.

An automaton is a 6-tuple (alphabet, states, top, bottom, select, delta).
A transition ``(q, L, q1, q2)`` reads: a node labelled by some ``l`` in
``L`` may be in state ``q`` when its children are in ``q1`` and ``q2``.
A run is accepting when the root is in a top state and every ``#`` leaf is
in a bottom state; a node labelled ``l`` reached in state ``q`` by an
accepting run is selected when ``(q, l)`` is a selecting configuration.

Besides runs, this module provides restriction to a set of states, the
recognizer encoding over hatted labels (and its inverse), minimization of
deterministic automata, equivalence checks and state classification.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional

from .labels import LEAF, LabelSet, hat, is_hatted, unhat
from .tree import BinaryTree, all_trees

TD_DET = "td_det"
TD_COMPLETE = "td_complete"
BU_DET = "bu_det"
BU_COMPLETE = "bu_complete"


class AmbiguityError(ValueError):
    """A recognizer cannot be decoded into a selecting automaton."""


@dataclass(frozen=True)
class Transition:
    state: str
    labels: LabelSet
    left: str
    right: str


class STA:
    """Selecting tree automaton over a finite alphabet."""

    def __init__(self, alphabet, states, top, bottom, select, transitions):
        self.alphabet = frozenset(alphabet)
        self.states = tuple(dict.fromkeys(states))
        self.top = frozenset(top)
        self.bottom = frozenset(bottom)
        self.select = frozenset(select)
        self.transitions = tuple(transitions)
        known = set(self.states)
        for q in self.top | self.bottom:
            if q not in known:
                raise ValueError(f"unknown state {q!r}")
        for q, lab in self.select:
            if q not in known or lab not in self.alphabet:
                raise ValueError(f"bad selecting configuration {(q, lab)!r}")
        for tr in self.transitions:
            if not {tr.state, tr.left, tr.right} <= known:
                raise ValueError(f"transition {tr} uses an unknown state")
            if not tr.labels.cofinite and not tr.labels.names <= self.alphabet:
                raise ValueError(f"transition {tr} uses labels outside the alphabet")
        dest: dict = {}
        src: dict = {}
        for tr in self.transitions:
            for lab in tr.labels.members(self.alphabet):
                dest.setdefault((tr.state, lab), set()).add((tr.left, tr.right))
                src.setdefault((tr.left, tr.right, lab), set()).add(tr.state)
        self._dest = {k: frozenset(v) for k, v in dest.items()}
        self._src = {k: frozenset(v) for k, v in src.items()}

    def destinations(self, q: str, label: str) -> frozenset:
        return self._dest.get((q, label), frozenset())

    def sources(self, q1: str, q2: str, label: str) -> frozenset:
        return self._src.get((q1, q2, label), frozenset())

    def is_selecting(self, q: str, label: str) -> bool:
        return (q, label) in self.select

    def __repr__(self) -> str:
        return f"STA(states={list(self.states)}, transitions={len(self.transitions)})"

    def to_text(self) -> str:
        return dump_sta(self)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_LINE = re.compile(r"(\S+)\s*,\s*(~?\{[^{}]*\})\s*(->|=>)\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)")


def dump_sta(a: STA) -> str:
    lines = [
        "alphabet: " + " ".join(sorted(a.alphabet)),
        "states: " + " ".join(a.states),
        "top: " + " ".join(q for q in a.states if q in a.top),
        "bottom: " + " ".join(q for q in a.states if q in a.bottom),
        "select: " + " ".join(f"{q}:{lab}" for q, lab in sorted(a.select)),
    ]
    for tr in a.transitions:
        members = tr.labels.members(a.alphabet)
        chosen = frozenset(lab for lab in members if (tr.state, lab) in a.select)
        for arrow, part in (("->", members - chosen), ("=>", chosen)):
            if part:
                labels = LabelSet(part).relative_to(a.alphabet)
                lines.append(f"{tr.state} , {labels} {arrow} ({tr.left},{tr.right})")
    return "\n".join(lines) + "\n"


def parse_sta(text: str) -> STA:
    headers: dict = {}
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        m = _LINE.fullmatch(line)
        if m:
            rows.append(m.groups())
            continue
        key, sep, value = line.partition(":")
        if not sep or key.strip() not in {"alphabet", "states", "top", "bottom", "select"}:
            raise ValueError(f"cannot read automaton line {raw!r}")
        headers[key.strip()] = value.split()
    select = set()
    for item in headers.get("select", []):
        q, _, lab = item.partition(":")
        select.add((q, lab))
    if "alphabet" in headers:
        alphabet = set(headers["alphabet"])
    else:
        alphabet = {lab for _, lab in select}
        for _, labels, _, _, _ in rows:
            alphabet |= LabelSet.parse(labels).names
    transitions = []
    for q, labels, arrow, q1, q2 in rows:
        ls = LabelSet.parse(labels)
        transitions.append(Transition(q, ls, q1, q2))
        if arrow == "=>":
            select |= {(q, lab) for lab in ls.members(alphabet)}
    states = headers.get("states") or list(dict.fromkeys(
        s for tr in transitions for s in (tr.state, tr.left, tr.right)))
    return STA(alphabet, states, headers.get("top", []), headers.get("bottom", []), select, transitions)


# ---------------------------------------------------------------------------
# Reference automata
# ---------------------------------------------------------------------------

def descendant_pair_sta(upper: str = "a", lower: str = "b", alphabet=("a", "b", "c")) -> STA:
    """Top-down automaton selecting ``lower`` nodes below an ``upper`` node."""
    alphabet = frozenset(alphabet) | {upper, lower}
    return STA(
        alphabet, ["q0", "q1"], ["q0"], ["q0", "q1"], [("q1", lower)],
        [
            Transition("q0", LabelSet.of(upper), "q1", "q0"),
            Transition("q0", LabelSet.but(upper), "q0", "q0"),
            Transition("q1", LabelSet.of(lower), "q1", "q1"),
            Transition("q1", LabelSet.but(lower), "q1", "q1"),
        ],
    )


def root_label_sta(root: str = "a", alphabet=("a", "b", "c")) -> STA:
    """Recognizer for documents whose root is ``root`` with any content."""
    alphabet = frozenset(alphabet) | {root}
    return STA(
        alphabet, ["q0", "q_top", "q_bot"], ["q0"], ["q_top"], [],
        [
            Transition("q0", LabelSet.of(root), "q_top", "q_top"),
            Transition("q0", LabelSet.but(root), "q_bot", "q_bot"),
            Transition("q_top", LabelSet.every(), "q_top", "q_top"),
            Transition("q_bot", LabelSet.every(), "q_bot", "q_bot"),
        ],
    )


def has_descendant_sta(upper: str = "a", lower: str = "b", alphabet=("a", "b", "c")) -> STA:
    """Bottom-up automaton selecting ``upper`` nodes with a ``lower`` node in their left subtree.

    ``q0`` means no ``lower`` node below, ``q1`` that one occurs (and an
    ``upper`` node in ``q1`` has it in its left subtree), ``q2`` marks an
    ``upper`` node whose ``lower`` witness only occurs among its right
    siblings.
    """
    if upper == lower:
        raise ValueError("labels must differ")
    alphabet = frozenset(alphabet) | {upper, lower}
    others = LabelSet.but(upper, lower)
    states = ["q0", "q1", "q2"]
    found = {"q1", "q2"}
    transitions = []
    for l, r in product(states, states):
        transitions.append(Transition("q1", LabelSet.of(lower), l, r))
        if l in found:
            transitions.append(Transition("q1", LabelSet.of(upper), l, r))
        elif r in found:
            transitions.append(Transition("q2", LabelSet.of(upper), l, r))
        else:
            transitions.append(Transition("q0", LabelSet.of(upper), l, r))
        transitions.append(Transition("q1" if l in found or r in found else "q0", others, l, r))
    return STA(alphabet, states, states, ["q0"], [("q1", upper)], transitions)


# ---------------------------------------------------------------------------
# Kinds and runs
# ---------------------------------------------------------------------------

def check_kind(a: STA) -> frozenset:
    """Determinism and completeness flags in both directions."""
    sigma = sorted(a.alphabet)
    flags = set()
    dest_sizes = [len(a.destinations(q, lab)) for q in a.states for lab in sigma]
    if len(a.top) == 1 and all(n <= 1 for n in dest_sizes):
        flags.add(TD_DET)
    if all(n >= 1 for n in dest_sizes):
        flags.add(TD_COMPLETE)
    src_sizes = [len(a.sources(q1, q2, lab)) for q1 in a.states for q2 in a.states for lab in sigma]
    if len(a.bottom) == 1 and all(n <= 1 for n in src_sizes):
        flags.add(BU_DET)
    if all(n >= 1 for n in src_sizes):
        flags.add(BU_COMPLETE)
    return frozenset(flags)


@dataclass(frozen=True)
class Run:
    """A run of an automaton: one state per node id of ``tree``."""

    tree: BinaryTree
    states: tuple
    accepting: bool
    selected: frozenset

    def state(self, node: int) -> str:
        return self.states[node]


def _finish_run(a: STA, t: BinaryTree, states: list) -> Run:
    accepting = states[0] in a.top and all(
        states[i] in a.bottom for i, lab in enumerate(t.labels) if lab == LEAF)
    selected = frozenset(
        i for i, lab in enumerate(t.labels)
        if lab != LEAF and (states[i], lab) in a.select) if accepting else frozenset()
    return Run(t, tuple(states), accepting, selected)


def td_run(a: STA, t: BinaryTree) -> Run:
    """The unique run of a top-down deterministic complete automaton."""
    (top,) = a.top
    states = [None] * len(t)
    states[0] = top
    for i, lab in enumerate(t.labels):
        if lab == LEAF:
            continue
        (pair,) = a.destinations(states[i], lab)
        states[t.left[i]], states[t.right[i]] = pair
    return _finish_run(a, t, states)


def bu_run(a: STA, t: BinaryTree) -> Run:
    """The unique run of a bottom-up deterministic complete automaton."""
    (bottom,) = a.bottom
    states = [None] * len(t)
    for i in range(len(t) - 1, -1, -1):
        lab = t.labels[i]
        if lab == LEAF:
            states[i] = bottom
        else:
            (states[i],) = a.sources(states[t.left[i]], states[t.right[i]], lab)
    return _finish_run(a, t, states)


def accepting_runs(a: STA, t: BinaryTree) -> Iterator[tuple]:
    """Enumerate every accepting run as a tuple of states (small inputs only)."""
    n = len(t)

    def extend(i: int, states: list) -> Iterator[tuple]:
        # states[j] is fixed for every j < i and for the children pushed so far
        if i == n:
            yield tuple(states)
            return
        q, lab = states[i], t.labels[i]
        if lab == LEAF:
            if q in a.bottom:
                yield from extend(i + 1, states)
            return
        for q1, q2 in sorted(a.destinations(q, lab)):
            states[t.left[i]], states[t.right[i]] = q1, q2
            yield from extend(i + 1, states)
        states[t.left[i]] = states[t.right[i]] = None

    for q in sorted(a.top):
        yield from extend(0, [q] + [None] * (n - 1))


def _inside(a: STA, t: BinaryTree) -> list:
    """For each node, the states from which its subtree is accepted."""
    inside = [frozenset()] * len(t)
    by_label: dict = {}
    for tr in a.transitions:
        for lab in tr.labels.members(a.alphabet):
            by_label.setdefault(lab, []).append(tr)
    for i in range(len(t) - 1, -1, -1):
        lab = t.labels[i]
        if lab == LEAF:
            inside[i] = a.bottom
            continue
        left, right = inside[t.left[i]], inside[t.right[i]]
        inside[i] = frozenset(tr.state for tr in by_label.get(lab, ())
                              if tr.left in left and tr.right in right)
    return inside


def accepts(a: STA, t: BinaryTree) -> bool:
    return bool(_inside(a, t)[0] & a.top)


def selected_nodes_exhaustive(a: STA, t: BinaryTree, max_nodes: int = 18) -> frozenset:
    """Union over all accepting runs of the nodes they select.

    Works for nondeterministic automata.  Instead of listing runs one by
    one, every node gets the states it can take in some accepting run
    (states accepting its subtree that a consistent context can reach);
    this is exactly the set of values the enumerated runs would give it.
    """
    if len(t) > max_nodes:
        raise ValueError(f"tree has {len(t)} nodes, bound is {max_nodes}")
    inside = _inside(a, t)
    outside = [set() for _ in range(len(t))]
    outside[0] = set(inside[0] & a.top)
    chosen = set()
    for i, lab in enumerate(t.labels):
        if lab == LEAF or not outside[i]:
            continue
        if any((q, lab) in a.select for q in outside[i]):
            chosen.add(i)
        left, right = t.left[i], t.right[i]
        for q in outside[i]:
            for q1, q2 in a.destinations(q, lab):
                if q1 in inside[left] and q2 in inside[right]:
                    outside[left].add(q1)
                    outside[right].add(q2)
    return frozenset(chosen)


def behaviour(a: STA, t: BinaryTree) -> tuple:
    """Membership and selected set, the observable result of ``a`` on ``t``."""
    ok = accepts(a, t)
    return ok, selected_nodes_exhaustive(a, t, max_nodes=len(t)) if ok else frozenset()


# ---------------------------------------------------------------------------
# Restriction and recognizers
# ---------------------------------------------------------------------------

def reachable_states(a: STA, start: Iterable[str]) -> list:
    seen = list(dict.fromkeys(start))
    known = set(seen)
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for tr in a.transitions:
            if tr.state == q:
                for nxt in (tr.left, tr.right):
                    if nxt not in known:
                        known.add(nxt)
                        seen.append(nxt)
                        queue.append(nxt)
    return [q for q in a.states if q in known]


def restrict(a: STA, qs: Iterable[str]) -> STA:
    """The automaton with top states ``qs`` and only the states they reach."""
    qs = list(qs)
    keep = set(reachable_states(a, qs))
    return STA(
        a.alphabet, [q for q in a.states if q in keep], qs, a.bottom & keep,
        {(q, lab) for q, lab in a.select if q in keep},
        [tr for tr in a.transitions if tr.state in keep],
    )


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def to_recognizer(a: STA) -> STA:
    """Encode selection through hatted labels; the result selects nothing.

    Transitions are split into their non-selecting part over plain labels
    and their selecting part over hatted labels, then completed towards a
    fresh sink state.  Top-down deterministic inputs are completed per
    (state, label); otherwise the completion is per (children, label) so
    that bottom-up determinism survives.
    """
    sigma = sorted(a.alphabet)
    full = frozenset(sigma) | {hat(s) for s in sigma}
    sink = _fresh("q_sink", a.states)
    transitions = []
    for tr in a.transitions:
        members = tr.labels.members(a.alphabet)
        plain = frozenset(lab for lab in members if (tr.state, lab) not in a.select)
        hatted = frozenset(hat(lab) for lab in members if (tr.state, lab) in a.select)
        for part in (plain, hatted):
            if part:
                transitions.append(Transition(tr.state, LabelSet(part), tr.left, tr.right))
    states = list(a.states) + [sink]
    flags = check_kind(a)
    if TD_DET in flags or BU_DET not in flags:
        for q in a.states:
            covered = set()
            for tr in transitions:
                if tr.state == q:
                    covered |= tr.labels.names
            missing = full - covered
            if missing:
                transitions.append(Transition(q, LabelSet(missing), sink, sink))
        transitions.append(Transition(sink, LabelSet(full), sink, sink))
    else:
        covered: dict = {}
        for tr in transitions:
            covered.setdefault((tr.left, tr.right), set()).update(tr.labels.names)
        for q1, q2 in product(states, states):
            missing = full - covered.get((q1, q2), set())
            if missing:
                transitions.append(Transition(sink, LabelSet(missing), q1, q2))
    return STA(full, states, a.top, a.bottom, (), transitions)


def inhabited_states(a: STA) -> frozenset:
    """States whose restricted language is non-empty."""
    done = set(a.bottom)
    changed = True
    while changed:
        changed = False
        for tr in a.transitions:
            if tr.state not in done and tr.left in done and tr.right in done \
                    and tr.labels.members(a.alphabet):
                done.add(tr.state)
                changed = True
    return frozenset(done)


def _intersecting_pairs(a: STA) -> set:
    """Pairs of states whose languages share a tree."""
    pairs = {(p, q) for p in a.bottom for q in a.bottom}
    by_label: dict = {}
    for tr in a.transitions:
        for lab in tr.labels.members(a.alphabet):
            by_label.setdefault(lab, []).append(tr)
    changed = True
    while changed:
        changed = False
        for trs in by_label.values():
            for t1 in trs:
                for t2 in trs:
                    key = (t1.state, t2.state)
                    if key not in pairs and (t1.left, t2.left) in pairs and (t1.right, t2.right) in pairs:
                        pairs.add(key)
                        changed = True
    return pairs


def useful_states(a: STA) -> frozenset:
    """States taken by at least one node of at least one accepting run."""
    live = inhabited_states(a)
    seen = {q for q in a.top if q in live}
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for tr in a.transitions:
            if tr.state == q and tr.left in live and tr.right in live \
                    and tr.labels.members(a.alphabet):
                for nxt in (tr.left, tr.right):
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
    return frozenset(seen)


def is_selecting_unambiguous(r: STA) -> bool:
    """No useful state accepts both some ``s(t1, t2)`` and its root-hatted twin.

    States outside every accepting run (such as a completion sink) are
    ignored, since no accepted tree can observe them.
    """
    pairs = _intersecting_pairs(r)
    useful = useful_states(r)
    for t1 in r.transitions:
        for t2 in r.transitions:
            if t1.state != t2.state or t1.state not in useful:
                continue
            if (t1.left, t2.left) not in pairs or (t1.right, t2.right) not in pairs:
                continue
            for lab in t1.labels.members(r.alphabet):
                if not is_hatted(lab) and hat(lab) in r.alphabet and hat(lab) in t2.labels:
                    return False
    return True


def from_recognizer(r: STA) -> STA:
    """Decode a selecting-unambiguous recognizer back into a selecting automaton."""
    if not is_selecting_unambiguous(r):
        raise AmbiguityError("recognizer is not selecting-unambiguous")
    base = frozenset(unhat(lab) for lab in r.alphabet)
    live = inhabited_states(r)
    transitions = []
    select = set()
    plain_reads = set()
    for tr in r.transitions:
        if tr.left not in live or tr.right not in live:
            continue
        members = tr.labels.members(r.alphabet)
        plain = frozenset(lab for lab in members if not is_hatted(lab))
        hatted = frozenset(unhat(lab) for lab in members if is_hatted(lab))
        if plain:
            transitions.append(Transition(tr.state, LabelSet(plain), tr.left, tr.right))
            plain_reads |= {(tr.state, lab) for lab in plain}
        if hatted:
            transitions.append(Transition(tr.state, LabelSet(hatted), tr.left, tr.right))
            select |= {(tr.state, lab) for lab in hatted}
    useful = useful_states(r)
    clash = {(q, lab) for q, lab in select & plain_reads if q in useful}
    if clash:
        q, lab = sorted(clash)[0]
        raise AmbiguityError(f"state {q} reads {lab} both with and without selection")
    decoded = STA(base, r.states, r.top, r.bottom, select, transitions)
    return restrict(decoded, [q for q in r.states if q in r.top])


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------

def _refine(members: list, key0: dict, signature) -> dict:
    """Coarsest partition refining ``key0`` that is stable under ``signature``."""
    cls = {}
    ids: dict = {}
    for q in members:
        cls[q] = ids.setdefault(key0[q], len(ids))
    while True:
        ids = {}
        new = {}
        for q in members:
            new[q] = ids.setdefault((cls[q], signature(q, cls)), len(ids))
        if len(set(new.values())) == len(set(cls.values())):
            return new
        cls = new


def _group_labels(entries: dict, alphabet) -> list:
    """Invert ``label -> value`` into ``value -> LabelSet`` (in first-seen order)."""
    groups: dict = {}
    for lab in sorted(entries):
        groups.setdefault(entries[lab], []).append(lab)
    return [(value, LabelSet(frozenset(labs)).relative_to(alphabet)) for value, labs in groups.items()]


def minimize(a: STA) -> STA:
    """Minimal equivalent automaton in the direction ``a`` is deterministic in.

    The partition starts from final status and the set of labels each
    state selects on, then is refined on destinations (top-down) or on
    sources in every context (bottom-up).  States that no accepting run
    can use are merged into a single sink first.
    """
    flags = check_kind(a)
    if {TD_DET, TD_COMPLETE} <= flags:
        return _minimize_td(a)
    if {BU_DET, BU_COMPLETE} <= flags:
        return _minimize_bu(a)
    raise ValueError("minimize needs a deterministic and complete automaton")


def _sink_name(a: STA, useful) -> str:
    for q in a.states:
        if q not in useful:
            return q
    return _fresh("q_sink", a.states)


def _minimize_td(a: STA) -> STA:
    sigma = sorted(a.alphabet)
    (top,) = a.top
    dest = {(q, lab): next(iter(a.destinations(q, lab))) for q in a.states for lab in sigma}
    inhabited = inhabited_states(a)
    if top not in inhabited:
        return STA(a.alphabet, [top], [top], [], [],
                   [Transition(top, LabelSet(frozenset(sigma)).relative_to(sigma), top, top)])
    useful = [top]
    queue = deque([top])
    while queue:
        q = queue.popleft()
        for lab in sigma:
            q1, q2 = dest[q, lab]
            if q1 in inhabited and q2 in inhabited:
                for nxt in (q1, q2):
                    if nxt not in useful:
                        useful.append(nxt)
                        queue.append(nxt)
    useful_set = set(useful)
    sink = _sink_name(a, useful_set)
    table = {}
    for q in useful:
        for lab in sigma:
            q1, q2 = dest[q, lab]
            table[q, lab] = (q1, q2) if q1 in inhabited and q2 in inhabited else (sink, sink)
    sel = {q: frozenset(lab for lab in sigma if (q, lab) in a.select and table[q, lab][0] != sink)
           for q in useful}
    members = [q for q in a.states if q in useful_set]
    needs_sink = any(pair == (sink, sink) for pair in table.values())
    if needs_sink:
        members.append(sink)
        for lab in sigma:
            table[sink, lab] = (sink, sink)
        sel[sink] = frozenset()
    key0 = {q: (q in a.bottom and q != sink, sel[q], q == sink) for q in members}

    def signature(q, cls):
        return tuple((cls[table[q, lab][0]], cls[table[q, lab][1]]) for lab in sigma)

    cls = _refine(members, key0, signature)
    rep: dict = {}
    for q in members:
        rep.setdefault(cls[q], q)
    name = {q: rep[cls[q]] for q in members}
    transitions = []
    select = set()
    for r in rep.values():
        entries = {lab: (name[table[r, lab][0]], name[table[r, lab][1]]) for lab in sigma}
        for (q1, q2), labels in _group_labels(entries, sigma):
            transitions.append(Transition(r, labels, q1, q2))
        select |= {(r, lab) for lab in sel[r]}
    bottom = {name[q] for q in members if q in a.bottom and q != sink}
    return STA(a.alphabet, list(rep.values()), [name[top]], bottom, select, transitions)


def _minimize_bu(a: STA) -> STA:
    sigma = sorted(a.alphabet)
    (leaf,) = a.bottom
    src = {(q1, q2, lab): next(iter(a.sources(q1, q2, lab)))
           for q1 in a.states for q2 in a.states for lab in sigma}
    inhabited = [leaf]
    changed = True
    while changed:
        changed = False
        for q1, q2, lab in product(list(inhabited), list(inhabited), sigma):
            s = src[q1, q2, lab]
            if s not in inhabited:
                inhabited.append(s)
                changed = True
    live = {q for q in inhabited if q in a.top}
    changed = True
    while changed:
        changed = False
        for q1, q2, lab in product(inhabited, inhabited, sigma):
            if src[q1, q2, lab] in live and not {q1, q2} <= live:
                live |= {q1, q2}
                changed = True
    useful = [q for q in a.states if q in live and q in inhabited]
    if not useful:
        only = leaf
        return STA(a.alphabet, [only], [], [only], [],
                   [Transition(only, LabelSet(frozenset(sigma)).relative_to(sigma), only, only)])
    useful_set = set(useful)
    sink = _sink_name(a, useful_set)
    members = list(useful)
    table = {}
    for q1, q2, lab in product(useful, useful, sigma):
        s = src[q1, q2, lab]
        table[q1, q2, lab] = s if s in useful_set else sink
    if sink in table.values():
        members.append(sink)
        for q1, q2, lab in product(members, members, sigma):
            if sink in (q1, q2):
                table[q1, q2, lab] = sink
    sel = {q: frozenset() for q in members}
    for (q1, q2, lab), s in table.items():
        if s != sink and (s, lab) in a.select:
            sel[s] = sel[s] | {lab}
    key0 = {q: (q in a.top and q != sink, sel[q], q == sink) for q in members}

    def signature(q, cls):
        return tuple((cls[table[q, p, lab]], cls[table[p, q, lab]]) for p in members for lab in sigma)

    cls = _refine(members, key0, signature)
    rep: dict = {}
    for q in members:
        rep.setdefault(cls[q], q)
    name = {q: rep[cls[q]] for q in members}
    reps = list(rep.values())
    transitions = []
    for q1, q2 in product(reps, reps):
        entries = {lab: name[table[q1, q2, lab]] for lab in sigma}
        for s, labels in _group_labels(entries, sigma):
            transitions.append(Transition(s, labels, q1, q2))
    select = {(r, lab) for r in reps for lab in sel[r]}
    top = {name[q] for q in members if q in a.top and q != sink}
    return STA(a.alphabet, reps, top, [name[leaf]], select, transitions)


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

def isomorphic(a: STA, b: STA) -> bool:
    """Exact structural equality up to renaming of deterministic automata."""
    if a.alphabet != b.alphabet or len(a.states) != len(b.states):
        return False
    fa, fb = check_kind(a), check_kind(b)
    sigma = sorted(a.alphabet)
    if TD_DET in fa and TD_DET in fb:
        topdown = True
        (ta,), (tb,) = a.top, b.top
        start = (ta, tb)
    elif BU_DET in fa and BU_DET in fb:
        topdown = False
        (ba,), (bb,) = a.bottom, b.bottom
        start = (ba, bb)
    else:
        return False
    mapping: dict = {}
    back: dict = {}

    def bind(p, q) -> bool:
        if p in mapping or q in back:
            return mapping.get(p) == q and back.get(q) == p
        if (p in a.top) != (q in b.top) or (p in a.bottom) != (q in b.bottom):
            return False
        if {lab for s, lab in a.select if s == p} != {lab for s, lab in b.select if s == q}:
            return False
        mapping[p], back[q] = q, p
        return True

    if not bind(*start):
        return False
    if topdown:
        queue = deque([start])
        while queue:
            p, q = queue.popleft()
            for lab in sigma:
                da, db = a.destinations(p, lab), b.destinations(q, lab)
                if len(da) != len(db):
                    return False
                if not da:
                    continue
                ((x1, x2),), ((y1, y2),) = da, db
                for x, y in ((x1, y1), (x2, y2)):
                    fresh = x not in mapping
                    if not bind(x, y):
                        return False
                    if fresh:
                        queue.append((x, y))
    else:
        changed = True
        while changed:
            changed = False
            known = list(mapping.items())
            for (p1, q1), (p2, q2), lab in product(known, known, sigma):
                sa, sb = a.sources(p1, p2, lab), b.sources(q1, q2, lab)
                if len(sa) != len(sb):
                    return False
                if sa:
                    (x,), (y,) = sa, sb
                    fresh = x not in mapping
                    if not bind(x, y):
                        return False
                    changed |= fresh
    return len(mapping) == len(a.states)


def sta_equiv(a: STA, b: STA, max_internal: int = 4) -> bool:
    """Whether two automata accept the same trees and select the same nodes.

    Deterministic automata of the same direction are compared exactly by
    minimizing both and testing isomorphism.  Otherwise every tree with at
    most ``max_internal`` internal nodes is compared.
    """
    fa, fb = check_kind(a), check_kind(b)
    if a.alphabet == b.alphabet:
        for need in ({TD_DET, TD_COMPLETE}, {BU_DET, BU_COMPLETE}):
            if need <= fa and need <= fb:
                return isomorphic(minimize(a), minimize(b))
    alphabet = a.alphabet | b.alphabet
    return all(behaviour(a, t) == behaviour(b, t) for t in all_trees(alphabet, max_internal))


def separating_witness(a: STA, q1: str, q2: str, max_depth: int = 6) -> Optional[BinaryTree]:
    """A tree over plain and hatted labels accepted from exactly one of two states.

    The search runs on the recognizer of ``a``; by the recognizer
    correspondence, such a tree shows the two states do not compute the
    same selection.  Returns ``None`` when nothing of depth at most
    ``max_depth`` separates them.
    """
    r = to_recognizer(a)
    pos = {q: k for k, q in enumerate(r.states)}
    b1, b2 = 1 << pos[q1], 1 << pos[q2]
    rules: dict = {}
    for tr in r.transitions:
        for lab in tr.labels.members(r.alphabet):
            rules.setdefault(lab, []).append((1 << pos[tr.state], 1 << pos[tr.left], 1 << pos[tr.right]))
    leaf_vec = sum(1 << pos[q] for q in r.bottom)
    reps = {leaf_vec: ((LEAF,), 0)}

    def separates(v: int) -> bool:
        return bool(v & b1) != bool(v & b2)

    if separates(leaf_vec):
        return BinaryTree((LEAF,))
    for depth in range(1, max_depth + 1):
        items = list(reps.items())
        fresh = {}
        for lab in sorted(rules):
            for v1, (t1, d1) in items:
                for v2, (t2, d2) in items:
                    if max(d1, d2) != depth - 1:
                        continue
                    v = 0
                    for q, l, rr in rules[lab]:
                        if v1 & l and v2 & rr:
                            v |= q
                    if v in reps or v in fresh:
                        continue
                    labels = (lab,) + t1 + t2
                    if separates(v):
                        return BinaryTree(labels)
                    fresh[v] = (labels, depth)
        if not fresh:
            return None
        reps.update(fresh)
    return None


# ---------------------------------------------------------------------------
# State classification
# ---------------------------------------------------------------------------

def essential_labels(a: STA, q: str) -> frozenset:
    """Labels on which ``q`` leaves its ``(q, q)`` loop or selects."""
    return frozenset(
        lab for lab in a.alphabet
        if a.destinations(q, lab) != frozenset({(q, q)}) or (q, lab) in a.select)


def classify_state(a: STA, q: str) -> frozenset:
    """Subset of ``{"non_changing", "universal", "sink"}`` (top-down reading)."""
    if essential_labels(a, q):
        return frozenset()
    return frozenset({"non_changing", "universal" if q in a.bottom else "sink"})


def classify_state_bu(a: STA, q: str) -> frozenset:
    """Bottom-up reading: universal when in the top set, sink otherwise."""
    if essential_labels(a, q):
        return frozenset()
    return frozenset({"non_changing", "universal" if q in a.top else "sink"})
