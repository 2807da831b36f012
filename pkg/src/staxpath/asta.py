"""Alternating selecting tree automata and their evaluation engines.

Transitions map a state and a label set to a Boolean formula over
``↓1 q`` (first child in state ``q``) and ``↓2 q`` (second child).
Evaluation is bottom-up over result sets, mappings from states to the
nodes selected so far, but every call first narrows the states it needs
top-down.  That narrowing is a deterministic top-down automaton over sets
of states, built on demand; when it loops on a set of states, the engine
jumps over the nodes that cannot change it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .index import JumpIndex, build_index
from .labels import LEAF, LabelSet
from .tree import BinaryTree

# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "⊤"


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "⊥"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} ∨ {self.right})"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} ∧ {self.right})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"¬{self.body}"


@dataclass(frozen=True)
class Down:
    side: int
    state: str

    def __post_init__(self):
        if self.side not in (1, 2):
            raise ValueError("side must be 1 or 2")

    def __str__(self) -> str:
        return f"↓{self.side}{self.state}"


Formula = Union[Top, Bot, Or, And, Not, Down]
TOP = Top()
BOT = Bot()


def disj(*fs: Formula) -> Formula:
    if not fs:
        return BOT
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def conj(*fs: Formula) -> Formula:
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def atoms(f: Formula) -> frozenset:
    """All ``(side, state)`` pairs occurring in ``f``."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Down):
            out.add((g.side, g.state))
        elif isinstance(g, (Or, And)):
            stack += [g.left, g.right]
        elif isinstance(g, Not):
            stack.append(g.body)
    return frozenset(out)


def side_atoms(f: Formula, side: int) -> frozenset:
    return frozenset(q for s, q in atoms(f) if s == side)


def formula_size(f: Formula) -> int:
    if isinstance(f, (Or, And)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, Not):
        return 1 + formula_size(f.body)
    return 1


# ---------------------------------------------------------------------------
# Result sets and formula evaluation
# ---------------------------------------------------------------------------

def union(g1: dict, g2: dict) -> dict:
    """Pointwise union of two result sets."""
    if not g1:
        return g2
    if not g2:
        return g1
    out = dict(g1)
    for q, nodes in g2.items():
        out[q] = out[q] | nodes if q in out else nodes
    return out


def result_set(g: dict) -> dict:
    """Document-ordered view of a result set: state -> sorted tuple of ids."""
    return {q: tuple(sorted(nodes)) for q, nodes in sorted(g.items())}


def eval_formula(f: Formula, g1: dict, g2: dict) -> tuple:
    """The judgement ``g1, g2 |- f = (b, S)``; ``S`` is a frozenset of nodes."""
    if isinstance(f, Top):
        return True, frozenset()
    if isinstance(f, Down):
        g = g1 if f.side == 1 else g2
        if f.state in g:
            return True, frozenset(g[f.state])
        return False, frozenset()
    if isinstance(f, Not):
        b, _ = eval_formula(f.body, g1, g2)
        return not b, frozenset()
    if isinstance(f, Or):
        b1, s1 = eval_formula(f.left, g1, g2)
        b2, s2 = eval_formula(f.right, g1, g2)
        if b1 and b2:
            return True, s1 | s2
        if b1:
            return True, s1
        if b2:
            return True, s2
        return False, frozenset()
    if isinstance(f, And):
        b1, s1 = eval_formula(f.left, g1, g2)
        b2, s2 = eval_formula(f.right, g1, g2)
        if b1 and b2:
            return True, s1 | s2
        return False, frozenset()
    return False, frozenset()


def formula_support(f: Formula, dom1, dom2) -> tuple:
    """Truth of ``f`` and the atoms whose node sets end up in its result.

    Only the domains of the two result sets matter, which is what makes
    the outcome of a transition cacheable.
    """
    if isinstance(f, Top):
        return True, frozenset()
    if isinstance(f, Down):
        if f.state in (dom1 if f.side == 1 else dom2):
            return True, frozenset({(f.side, f.state)})
        return False, frozenset()
    if isinstance(f, Not):
        b, _ = formula_support(f.body, dom1, dom2)
        return not b, frozenset()
    if isinstance(f, (Or, And)):
        b1, s1 = formula_support(f.left, dom1, dom2)
        b2, s2 = formula_support(f.right, dom1, dom2)
        if b1 and b2:
            return True, s1 | s2
        if isinstance(f, Or) and (b1 or b2):
            return True, s1 if b1 else s2
        return False, frozenset()
    return False, frozenset()


def kleene(f: Formula, dom1) -> Optional[bool]:
    """Three-valued truth of ``f`` when only the first child is known."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Down):
        return f.state in dom1 if f.side == 1 else None
    if isinstance(f, Not):
        v = kleene(f.body, dom1)
        return None if v is None else not v
    v1, v2 = kleene(f.left, dom1), kleene(f.right, dom1)
    if isinstance(f, Or):
        if v1 is True or v2 is True:
            return True
        if v1 is False and v2 is False:
            return False
        return None
    if v1 is False or v2 is False:
        return False
    if v1 is True and v2 is True:
        return True
    return None


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ATransition:
    state: str
    labels: LabelSet
    select: bool
    formula: Formula

    def __str__(self) -> str:
        return f"{self.state}, {self.labels} {'⇒' if self.select else '→'} {self.formula}"


OTHER = "\x00other"


class ASTA:
    """Alternating selecting tree automaton ``(alphabet, states, top, transitions)``."""

    def __init__(self, states, top, transitions, alphabet=()):
        self.states = tuple(dict.fromkeys(states))
        self.top = frozenset(top)
        self.transitions = tuple(transitions)
        self.alphabet = frozenset(alphabet)
        known = set(self.states)
        if not self.top <= known:
            raise ValueError("top states must be declared")
        for tr in self.transitions:
            if tr.state not in known:
                raise ValueError(f"transition for unknown state {tr.state!r}")
            for _, q in atoms(tr.formula):
                if q not in known:
                    raise ValueError(f"formula of {tr} mentions unknown state {q!r}")
        self.by_state = {q: [tr for tr in self.transitions if tr.state == q] for q in self.states}
        self.mentioned = frozenset(lab for tr in self.transitions for lab in tr.labels.names)
        self.node_free = self._node_free()

    def _node_free(self) -> frozenset:
        # greatest fixpoint: no selecting transition and only node-free atoms
        free = {q for q in self.states if not any(tr.select for tr in self.by_state[q])}
        changed = True
        while changed:
            changed = False
            for q in list(free):
                if any(s not in free for tr in self.by_state[q] for _, s in atoms(tr.formula)):
                    free.discard(q)
                    changed = True
        return frozenset(free)

    def label_key(self, label: str) -> str:
        """Labels never named by a transition all behave alike."""
        return label if label in self.mentioned else OTHER

    def active(self, states: Iterable[str], label: str, prune: bool = True) -> tuple:
        """Transitions of ``states`` that match ``label``.

        With ``prune``, a state whose result can hold no node and that has a
        matching non-selecting ``→ ⊤`` transition keeps only that one: the
        state is then proved whatever the children say, and nothing else it
        could derive carries nodes.
        """
        out = []
        chosen = set(states)
        for q in self.states:
            if q not in chosen:
                continue
            trs = [tr for tr in self.by_state[q] if label in tr.labels]
            if prune and q in self.node_free:
                sure = [tr for tr in trs if not tr.select and tr.formula == TOP]
                if sure:
                    trs = sure[:1]
            out.extend(trs)
        return tuple(out)

    def __str__(self) -> str:
        lines = [f"states: {' '.join(self.states)}", f"top: {' '.join(q for q in self.states if q in self.top)}"]
        lines += [str(tr) for tr in self.transitions]
        return "\n".join(lines) + "\n"


def tda_step(a: ASTA, states: Iterable[str], label: str, prune: bool = True) -> tuple:
    """Successor pair of a state set in the top-down approximation."""
    trs = a.active(states, label, prune)
    r1 = frozenset(q for tr in trs for q in side_atoms(tr.formula, 1))
    r2 = frozenset(q for tr in trs for q in side_atoms(tr.formula, 2))
    return r1, r2


@dataclass(frozen=True)
class JumpPlan:
    kind: str  # "stay", "topmost", "left" or "right"
    labels: frozenset = frozenset()

    def __str__(self) -> str:
        if self.kind == "stay":
            return "stay"
        return f"jump-{self.kind} {{{','.join(sorted(self.labels))}}}"


STAY = JumpPlan("stay")


def _move_kind(a: ASTA, states: frozenset, label: str) -> str:
    """How ``states`` treat ``label``: loop on both sides, one side, or change."""
    trs = a.active(states, label)
    r1, r2 = tda_step(a, states, label)
    shapes = set()
    for tr in trs:
        q = tr.state
        f = tr.formula
        if tr.select:
            return "change"
        if f in (Or(Down(1, q), Down(2, q)), Or(Down(2, q), Down(1, q))):
            shapes.add("topmost")
        elif f == Down(1, q):
            shapes.add("left")
        elif f == Down(2, q):
            shapes.add("right")
        else:
            return "change"
    if len(shapes) != 1:
        return "change"
    (shape,) = shapes
    expect = {"topmost": (states, states), "left": (states, frozenset()), "right": (frozenset(), states)}
    return shape if (r1, r2) == expect[shape] else "change"


def jump_plan(a: ASTA, states: Iterable[str]) -> JumpPlan:
    """Which jump, if any, is safe from a node entered with ``states``.

    Every label outside the returned set leaves the state set unchanged on
    the side(s) it moves to, through plain non-selecting self loops, so
    the result at a node equals the results of its next labelled nodes.
    """
    states = frozenset(states)
    if not states:
        return STAY
    if _move_kind(a, states, OTHER) == "change":
        return STAY
    kinds = {lab: _move_kind(a, states, lab) for lab in sorted(a.mentioned)}
    change = frozenset(lab for lab, k in kinds.items() if k == "change")
    stable = {k for k in kinds.values() if k != "change"} | {_move_kind(a, states, OTHER)}
    if len(stable) != 1:
        return STAY
    return JumpPlan(stable.pop(), change)


def eval_trans(g1: dict, g2: dict, pi: int, trs: Iterable[ATransition]) -> dict:
    """Result set produced at node ``pi`` by the transitions ``trs``."""
    out: dict = {}
    for tr in trs:
        ok, nodes = eval_formula(tr.formula, g1, g2)
        if not ok:
            continue
        if tr.select:
            nodes = nodes | {pi}
        out[tr.state] = out[tr.state] | nodes if tr.state in out else frozenset(nodes)
    return out


def propagate_left(a: ASTA, trs: Iterable[ATransition], dom1) -> tuple:
    """Drop second-child atoms that cannot matter once the first child is known.

    A formula already false needs nothing from the second child; one
    already true needs it only to collect nodes, which node-free atoms
    never carry.  Returns ``(trs, r2)``.
    """
    trs = tuple(trs)
    needed = set()
    for tr in trs:
        v = kleene(tr.formula, dom1)
        if v is False:
            continue
        if v is True and all(q in a.node_free for _, q in atoms(tr.formula)):
            continue
        needed |= side_atoms(tr.formula, 2)
    return trs, frozenset(needed)


# ---------------------------------------------------------------------------
# Engines
# ---------------------------------------------------------------------------

@dataclass
class Stats:
    visited: int = 0
    selected: int = 0
    memo_entries: int = 0
    jumps: int = 0
    engine: str = ""

    def record(self) -> str:
        return "".join(f"{k}={getattr(self, k)}\n"
                       for k in ("visited", "selected", "memo_entries", "jumps", "engine"))


ENGINE_FLAGS = {
    "naive": dict(prune=False, jump=False, memo=False, propagate=False),
    "jump": dict(prune=True, jump=True, memo=False, propagate=False),
    "memo": dict(prune=True, jump=False, memo=True, propagate=False),
    "opt": dict(prune=True, jump=True, memo=True, propagate=True),
}


def _drive(gen):
    """Run nested generators without Python recursion; each yield is a sub-call."""
    stack = [gen]
    value = None
    while stack:
        try:
            sub = stack[-1].send(value)
        except StopIteration as stop:
            stack.pop()
            value = stop.value
            continue
        stack.append(sub)
        value = None
    return value


class Evaluator:
    """One evaluation instance for an automaton: owns the memo tables and counters.

    The memo tables survive across runs, so evaluating the same query on
    the same document twice adds no entries the second time.
    """

    def __init__(self, a: ASTA, prune=True, jump=True, memo=True, propagate=True, name="opt"):
        self.a = a
        self.prune, self.jump, self.memo, self.propagate = prune, jump, memo, propagate
        self.name = name
        self.ids: dict = {}
        self.sets: list = []
        self.intern(frozenset())
        self.intern(a.top)
        self.trans_memo: dict = {}
        self.result_memo: dict = {}
        self.plan_memo: dict = {}
        self.stats = Stats(engine=name)

    @classmethod
    def for_engine(cls, a: ASTA, engine: str) -> "Evaluator":
        return cls(a, name=engine, **ENGINE_FLAGS[engine])

    def intern(self, states: frozenset) -> int:
        sid = self.ids.get(states)
        if sid is None:
            sid = self.ids[states] = len(self.sets)
            self.sets.append(states)
        return sid

    @property
    def memo_entries(self) -> int:
        return len(self.trans_memo) + len(self.result_memo)

    # phase 1: transitions and child state sets for (state set, label)
    def _transitions(self, states: frozenset, label: str) -> tuple:
        if not self.memo:
            trs = self.a.active(states, label, self.prune)
            return trs, *tda_step(self.a, states, label, self.prune)
        key = (self.intern(states), self.a.label_key(label))
        hit = self.trans_memo.get(key)
        if hit is None:
            trs = self.a.active(states, label, self.prune)
            hit = self.trans_memo[key] = (trs, *tda_step(self.a, states, label, self.prune))
        return hit

    # phase 2: which states hold and which child entries flow into them
    def _combine(self, states, label, trs, g1: dict, g2: dict, pi: int) -> dict:
        if not self.memo:
            return eval_trans(g1, g2, pi, trs)
        atoms1 = frozenset(q for tr in trs for q in side_atoms(tr.formula, 1))
        atoms2 = frozenset(q for tr in trs for q in side_atoms(tr.formula, 2))
        dom1, dom2 = atoms1.intersection(g1), atoms2.intersection(g2)
        key = (self.intern(states), self.a.label_key(label), dom1, dom2)
        skeleton = self.result_memo.get(key)
        if skeleton is None:
            parts: dict = {}
            for tr in trs:
                ok, support = formula_support(tr.formula, dom1, dom2)
                if ok:
                    sel, sup = parts.get(tr.state, (False, frozenset()))
                    parts[tr.state] = (sel or tr.select, sup | support)
            skeleton = self.result_memo[key] = tuple(
                (q, sel, tuple(sorted(sup))) for q, (sel, sup) in parts.items())
        out = {}
        for q, sel, sup in skeleton:
            nodes = frozenset({pi}) if sel else frozenset()
            for side, s in sup:
                nodes = nodes | (g1 if side == 1 else g2)[s]
            out[q] = nodes
        return out

    def _plan(self, states: frozenset) -> JumpPlan:
        plan = self.plan_memo.get(states)
        if plan is None:
            plan = self.plan_memo[states] = jump_plan(self.a, states)
        return plan

    def _node(self, pi: int, states: frozenset):
        t = self.tree
        label = t.labels[pi]
        self.stats.visited += 1
        trs, r1, r2 = self._transitions(states, label)
        g1 = yield self._child(t.left[pi], r1)
        if self.propagate:
            trs, r2 = propagate_left(self.a, trs, g1.keys())
        g2 = yield self._child(t.right[pi], r2)
        return self._combine(states, label, trs, g1, g2, pi)

    def _child(self, pi: int, states: frozenset):
        t = self.tree
        if not states or t.labels[pi] == LEAF:
            return {}
        if not self.jump:
            return (yield self._node(pi, states))
        plan = self._plan(states)
        if plan.kind == "stay" or t.labels[pi] in plan.labels:
            return (yield self._node(pi, states))
        self.stats.jumps += 1
        if plan.kind == "topmost":
            out: dict = {}
            for m in self.idx.topmost_matches(pi, plan.labels):
                out = union(out, (yield self._node(m, states)))
            return out
        walk = self.idx.jump_leftmost if plan.kind == "left" else self.idx.jump_rightmost
        hit = walk(pi, plan.labels)
        if hit is None:
            return {}
        return (yield self._node(hit, states))

    def evaluate_at(self, t: BinaryTree, idx: JumpIndex, pi: int, states: frozenset) -> dict:
        """Result set of the subtree at ``pi`` entered with ``states``."""
        self.tree, self.idx = t, idx
        return _drive(self._child(pi, frozenset(states)))

    def run(self, t: BinaryTree, idx: Optional[JumpIndex] = None) -> tuple:
        """Selected node ids in document order, and the counters of this run."""
        if idx is None:
            idx = build_index(t)
        self.stats = Stats(engine=self.name)
        gamma = self.evaluate_at(t, idx, 0, self.a.top)
        nodes = set()
        for q in self.a.top:
            nodes |= gamma.get(q, frozenset())
        self.stats.selected = len(nodes)
        self.stats.memo_entries = self.memo_entries
        return tuple(sorted(nodes)), self.stats


def eval_asta_naive(a: ASTA, t: BinaryTree, pi: int = 0, r: Optional[Iterable[str]] = None) -> dict:
    """Plain evaluation: no pruning, jumping, caching or propagation."""
    ev = Evaluator.for_engine(a, "naive")
    return result_set(ev.evaluate_at(t, build_index(t), pi, frozenset(a.top if r is None else r)))


def eval_asta_opt(a: ASTA, t: BinaryTree, idx: Optional[JumpIndex] = None,
                  jump: bool = True, memo: bool = True, propagate: bool = True) -> tuple:
    ev = Evaluator(a, jump=jump, memo=memo, propagate=propagate, name="opt")
    return ev.run(t, idx)


def evaluate(a: ASTA, t: BinaryTree, engine: str = "opt", idx: Optional[JumpIndex] = None) -> tuple:
    if engine == "hybrid":
        return hybrid_eval(a, t, idx)
    if engine not in ENGINE_FLAGS:
        raise ValueError(f"unknown engine {engine!r}")
    return Evaluator.for_engine(a, engine).run(t, idx)


def reachable_plans(a: ASTA, labels: Iterable[str] = ()) -> list:
    """Every tda state reachable from the top states, with its jump plan.

    Rows are ``(states, label-class, left, right)`` transitions; the label
    class ``OTHER`` stands for every label the automaton does not name.
    """
    classes = sorted(a.mentioned | set(labels)) + [OTHER]
    seen = [a.top]
    rows = []
    k = 0
    while k < len(seen):
        s = seen[k]
        k += 1
        for lab in classes:
            s1, s2 = tda_step(a, s, lab)
            rows.append((s, lab, s1, s2))
            for nxt in (s1, s2):
                if nxt and nxt not in seen:
                    seen.append(nxt)
    return [(s, jump_plan(a, s)) for s in seen], rows


# ---------------------------------------------------------------------------
# Hybrid evaluation
# ---------------------------------------------------------------------------

class Unsupported(ValueError):
    """The automaton is not a descendant chain the hybrid engine handles."""


@dataclass(frozen=True)
class _Step:
    state: str
    labels: LabelSet
    progress: ATransition
    predicate: Formula  # progress formula without the move to the next step


def chain_steps(a: ASTA) -> list:
    """Read ``//l1[p1]//l2[p2]...`` back from a compiled automaton."""
    if len(a.top) != 1:
        raise Unsupported("several top states")
    (q,) = a.top
    steps = []
    seen = set()
    while True:
        if q in seen:
            raise Unsupported("cyclic chain")
        seen.add(q)
        trs = a.by_state[q]
        loops = [tr for tr in trs if tr.labels == LabelSet.every() and not tr.select
                 and tr.formula == Or(Down(1, q), Down(2, q))]
        rest = [tr for tr in trs if tr not in loops]
        if len(loops) != 1 or len(rest) != 1:
            raise Unsupported(f"state {q} is not a descendant step")
        (prog,) = rest
        f = prog.formula
        if prog.select:
            steps.append(_Step(q, prog.labels, prog, f))
            return steps
        if isinstance(f, Down) and f.side == 1:
            nxt, pred = f.state, TOP
        elif isinstance(f, And) and isinstance(f.left, Down) and f.left.side == 1:
            nxt, pred = f.left.state, f.right
        else:
            raise Unsupported(f"state {q} has an unexpected progress formula")
        steps.append(_Step(q, prog.labels, prog, pred))
        q = nxt


def hybrid_eval(a: ASTA, t: BinaryTree, idx: Optional[JumpIndex] = None) -> tuple:
    """Start from the rarest step label and check the ancestors by parent moves.

    For each node carrying the pivot label, the nearest suitable ancestor
    is matched to each earlier step in turn (the nearest choice leaves the
    most ancestors for the remaining steps); step predicates and the part
    of the query below the pivot are evaluated with the regular engine.
    """
    steps = chain_steps(a)
    if idx is None:
        idx = build_index(t)
    counts = [idx.label_count(s.labels) if not s.labels.cofinite else len(t) for s in steps]
    pivot = min(range(len(steps)), key=lambda i: (counts[i], i))
    if pivot == 0:
        ev = Evaluator.for_engine(a, "opt")
        ev.name = "hybrid"
        return ev.run(t, idx)
    # single-transition states that check a step at a given node
    extra = []
    checks = {}
    for i, s in enumerate(steps):
        name = f"{s.state}@"
        while name in a.states:
            name += "@"
        checks[i] = name
        formula = s.progress.formula if i == pivot else s.predicate
        extra.append(ATransition(name, s.labels, s.progress.select and i == pivot, formula))
    derived = ASTA(a.states + tuple(checks.values()), a.top, a.transitions + tuple(extra), a.alphabet)
    ev = Evaluator.for_engine(derived, "opt")
    ev.tree, ev.idx = t, idx
    ev.stats = Stats(engine="hybrid")

    def holds(i: int, node: int) -> Optional[dict]:
        g = _drive(ev._child(node, frozenset({checks[i]})))
        return g if checks[i] in g else None

    found = set()
    # the pivot is strictly rarer than the first step, so its label set is finite
    occurrences = sorted(v for lab in steps[pivot].labels.names for v in idx.by_label.get(lab, ()))
    for v in occurrences:
        g = holds(pivot, v)
        if g is None:
            continue
        node, ok = v, True
        for i in range(pivot - 1, -1, -1):
            node = idx.xml_parent(node)
            while node is not None:
                ev.stats.visited += 1
                if t.labels[node] in steps[i].labels and holds(i, node) is not None:
                    break
                node = idx.xml_parent(node)
            if node is None:
                ok = False
                break
        if ok:
            found |= g[checks[pivot]]
    ev.stats.selected = len(found)
    ev.stats.memo_entries = ev.memo_entries
    return tuple(sorted(found)), ev.stats
