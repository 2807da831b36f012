"""Verification suites: each one checks a property over generated instances.

Every suite returns a :class:`SuiteResult`.  Failures carry counterexample
triples ``(tree term, automaton text, query)`` that replay through the
``query`` command (the tree term is accepted in place of an XML file).
"""
from __future__ import annotations

import functools
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import asta as A
from .gen import CONFIGS, XMarkConfig, random_bu_sta, random_doc, random_query, random_td_sta, xmark_doc
from .index import build_index
from .labels import LEAF
from .relevance import (bu_relevant_set, definition_relevant_set, semantic_relevance,
                        sub_automaton_classes, td_relevant_set, topdown_jump)
from .sta import (STA, all_trees, behaviour, bu_run, dump_sta, from_recognizer, is_selecting_unambiguous,
                  minimize, separating_witness, to_recognizer, td_run)
from .tree import BinaryTree, Element, random_tree, to_binary
from .xpath import compile_to_asta, oracle_binary_ids


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checked: int = 0
    details: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    seconds: float = 0.0

    def fail(self, message: str, triple: Optional[tuple] = None, keep: int = 5) -> None:
        self.passed = False
        if len(self.counterexamples) < keep:
            self.details.append(message)
            if triple is not None:
                self.counterexamples.append(triple)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.checked} checks in {self.seconds:.1f}s"

    def render(self) -> str:
        lines = [self.summary()] + [f"  {d}" for d in self.details]
        for tree, automaton, query in self.counterexamples:
            lines.append("  counterexample:")
            lines.append(f"    tree: {tree}")
            if query:
                lines.append(f"    query: {query}")
            if automaton:
                lines += [f"    | {ln}" for ln in automaton.rstrip("\n").splitlines()]
        return "\n".join(lines)


def _timed(fn: Callable) -> Callable:
    @functools.wraps(fn)
    def run(*args, **kwargs) -> SuiteResult:
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res
    return run


ENGINES = ("naive", "jump", "memo", "opt")


@_timed
def check_engines(count: int = 1000, max_nodes: int = 300, seed: int = 0) -> SuiteResult:
    """All engines and the hybrid one agree with the direct XPath evaluator."""
    res = SuiteResult("engines")
    hybrid_runs = 0
    for k in range(count):
        s = seed * 1_000_003 + k
        query = random_query(s)
        doc = random_doc(s, max_nodes)
        t = to_binary(doc)
        idx = build_index(t)
        a = compile_to_asta(query, alphabet=t.alphabet())
        expected = oracle_binary_ids(query, doc, t)
        engines = list(ENGINES)
        try:
            A.chain_steps(a)
            engines.append("hybrid")
            hybrid_runs += 1
        except A.Unsupported:
            pass
        for engine in engines:
            got, _ = A.evaluate(a, t, engine, idx)
            res.checked += 1
            if got != expected:
                res.fail(f"{engine} on {query!r}: {list(got)} != {list(expected)}", (str(t), str(a), query))
    res.details.insert(0, f"{count} (document, query) pairs, {hybrid_runs} also run by the hybrid engine")
    return res


@_timed
def check_topdown_jump(count: int = 500, max_states: int = 6, max_internal: int = 39,
                       seed: int = 0) -> SuiteResult:
    """The jumping traversal returns exactly the relevant part of the unique run."""
    res = SuiteResult("topdown-jump")
    rejected = 0
    for k in range(count):
        s = seed * 1_000_003 + k
        a = minimize(random_td_sta(s, n_states=2 + s % (max_states - 1)))
        t = random_tree(s, max_internal, a.alphabet)
        run = td_run(a, t)
        jr = topdown_jump(a, t)
        res.checked += 1
        if not run.accepting:
            rejected += 1
            if jr.mapping or jr.accepted:
                res.fail(f"rejected tree but traversal returned {len(jr.mapping)} nodes", (str(t), dump_sta(a), ""))
            continue
        want = {i: run.states[i] for i in td_relevant_set(a, run)}
        if jr.mapping != want:
            extra = sorted(set(jr.mapping) - set(want))
            missing = sorted(set(want) - set(jr.mapping))
            res.fail(f"extra {extra} missing {missing}", (str(t), dump_sta(a), ""))
    res.details.insert(0, f"{count} instances, {rejected} rejecting")
    return res


def _closure_ok(t: BinaryTree, rel: set) -> bool:
    # relevance is closed upwards; equivalently non-relevance is closed downwards
    for i in range(1, len(t)):
        if i in rel and t.parent[i] not in rel:
            return False
    for i in range(len(t)):
        if i not in rel and t.labels[i] != LEAF:
            if t.left[i] in rel or t.right[i] in rel:
                return False
    return True


@_timed
def check_relevance(count: int = 300, max_internal: int = 15, seed: int = 0) -> SuiteResult:
    """Syntactic relevant sets against the membership-context oracle.

    The literal comparison is reported separately as ``literal_mismatches``
    and does not decide the suite: the oracle only sees membership, so it
    cannot see selection or state changes that leave membership intact.
    The suite checks the closure properties of the oracle and the agreement
    of the syntactic sets with their definition through sub-automaton
    equivalence.
    """
    res = SuiteResult("relevance")
    internal = syntactic_only = oracle_only = 0
    examples = []
    for k in range(count):
        s = seed * 1_000_003 + k
        bottom_up = k % 2 == 1
        raw = random_bu_sta(s, n_states=2 + s % 4) if bottom_up else random_td_sta(s, n_states=2 + s % 5)
        a = minimize(raw)
        t = random_tree(s, max_internal, a.alphabet)
        run = bu_run(a, t) if bottom_up else td_run(a, t)
        syntactic = bu_relevant_set(a, run) if bottom_up else td_relevant_set(a, run)
        cache: dict = {}
        sem = {i for i in range(len(t)) if semantic_relevance(a, t, i, cache)}
        res.checked += 1
        inner = [i for i, lab in enumerate(t.labels) if lab != LEAF]
        internal += len(inner)
        syntactic_only += sum(1 for i in inner if i in syntactic and i not in sem)
        oracle_only += sum(1 for i in inner if i in sem and i not in syntactic)
        if any((i in syntactic) != (i in sem) for i in inner) and len(examples) < 3:
            examples.append((str(t), dump_sta(a), ""))
        if not _closure_ok(t, sem):
            res.fail("closure broken for semantic relevance", (str(t), dump_sta(a), ""))
        if not bottom_up:
            raw_run = td_run(raw, t)
            by_def = definition_relevant_set(raw, raw_run, sub_automaton_classes(raw))
            if run.accepting and by_def != syntactic:
                res.fail(f"definition {sorted(by_def)} != syntactic {sorted(syntactic)}", (str(t), dump_sta(raw), ""))
    mismatch = syntactic_only + oracle_only
    res.data.update(internal=internal, literal_mismatches=mismatch, literal_examples=examples,
                    syntactic_only=syntactic_only, oracle_only=oracle_only)
    res.details.insert(0, f"{count} instances, {internal} internal nodes, {mismatch} syntactic/oracle "
                          f"disagreements ({syntactic_only} syntactic only, {oracle_only} oracle only; not gating)")
    return res


@_timed
def check_literal_relevance(count: int = 300, max_internal: int = 15, seed: int = 0) -> SuiteResult:
    """Literal reading: syntactic sets equal the membership oracle at every internal node."""
    base = check_relevance(count, max_internal, seed)
    res = SuiteResult("relevance-literal", checked=base.data["internal"])
    if base.data["literal_mismatches"]:
        res.passed = False
        res.details.append(f"{base.data['literal_mismatches']} of {base.data['internal']} internal nodes disagree "
                           f"({base.data['syntactic_only']} syntactic only, {base.data['oracle_only']} oracle only)")
        res.counterexamples.extend(base.data["literal_examples"])
    return res


@_timed
def check_recognizer(count: int = 100, trees: int = 200, max_internal: int = 12, seed: int = 0) -> SuiteResult:
    """Recognizer encoding and decoding preserve behaviour."""
    res = SuiteResult("recognizer")
    for k in range(count):
        s = seed * 1_000_003 + k
        a = random_bu_sta(s, n_states=2 + s % 4) if k % 2 else random_td_sta(s, n_states=2 + s % 5)
        r = to_recognizer(a)
        if not is_selecting_unambiguous(r):
            res.fail("recognizer is not selecting-unambiguous", ("", dump_sta(a), ""))
            continue
        back = from_recognizer(r)
        for j in range(trees):
            t = random_tree(s * 1000 + j, max_internal, a.alphabet)
            res.checked += 1
            if behaviour(a, t) != behaviour(back, t):
                res.fail("round trip changes behaviour", (str(t), dump_sta(a), ""))
                break
    res.details.insert(0, f"{count} automata, {res.checked} trees compared")
    return res


def _bounded_equal(a: STA, b: STA, max_internal: int) -> Optional[BinaryTree]:
    for t in all_trees(a.alphabet | b.alphabet, max_internal):
        if behaviour(a, t) != behaviour(b, t):
            return t
    return None


@_timed
def check_minimize(count: int = 100, max_internal: int = 3, witness_depth: int = 6, seed: int = 0) -> SuiteResult:
    """Minimization is idempotent, preserves behaviour and leaves only separable states."""
    res = SuiteResult("minimize")
    for k in range(count):
        s = seed * 1_000_003 + k
        a = random_bu_sta(s, n_states=2 + s % 4) if k % 2 else random_td_sta(s, n_states=2 + s % 5)
        m = minimize(a)
        res.checked += 1
        if len(minimize(m).states) != len(m.states):
            res.fail("not idempotent", ("", dump_sta(a), ""))
        bad = _bounded_equal(a, m, max_internal)
        if bad is not None:
            res.fail("behaviour changed", (str(bad), dump_sta(a), ""))
        for q1, q2 in itertools.combinations(m.states, 2):
            if separating_witness(m, q1, q2, witness_depth) is None:
                res.fail(f"no witness separates {q1} and {q2}", ("", dump_sta(m), ""))
    res.details.insert(0, f"{count} automata, trees up to {max_internal} internal nodes, "
                          f"witness depth {witness_depth}")
    return res


# rows of the top-down approximation for //a//b[c]; "z" is a label the query does not name
TDA_ROWS = [
    ({"q0"}, "a", {"q0", "q1"}, {"q0"}),
    ({"q0"}, "z", {"q0"}, {"q0"}),
    ({"q0", "q1"}, "b", {"q0", "q1", "q2"}, {"q0", "q1"}),
    ({"q0", "q1"}, "z", {"q0", "q1"}, {"q0", "q1"}),
    ({"q0", "q1", "q2"}, "b", {"q0", "q1", "q2"}, {"q0", "q1", "q2"}),
    ({"q0", "q1", "q2"}, "c", {"q0", "q1"}, {"q0", "q1"}),
    ({"q0", "q1", "q2"}, "a", {"q0", "q1"}, {"q0", "q1", "q2"}),
]


def _restricted_eval(a: A.ASTA, t: BinaryTree) -> tuple:
    """Bottom-up naive evaluation computing at each node only its approximation states."""
    approx = [frozenset()] * len(t)
    approx[0] = frozenset(a.top)
    for i, lab in enumerate(t.labels):
        if lab != LEAF:
            approx[t.left[i]], approx[t.right[i]] = A.tda_step(a, approx[i], lab)
    gamma = [dict() for _ in range(len(t))]
    for i in range(len(t) - 1, -1, -1):
        lab = t.labels[i]
        if lab == LEAF or not approx[i]:
            continue
        trs = [tr for tr in a.transitions if tr.state in approx[i] and lab in tr.labels]
        gamma[i] = A.eval_trans(gamma[t.left[i]], gamma[t.right[i]], i, trs)
    return gamma[0], sum(1 for i, lab in enumerate(t.labels) if lab != LEAF and not approx[i])


@_timed
def check_tda(count: int = 500, max_nodes: int = 40, seed: int = 0) -> SuiteResult:
    """Approximation rows for //a//b[c], then soundness of pruned subtrees."""
    res = SuiteResult("tda")
    a = compile_to_asta("//a//b[c]")
    for s, lab, w1, w2 in TDA_ROWS:
        got = A.tda_step(a, s, lab)
        res.checked += 1
        if got != (frozenset(w1), frozenset(w2)):
            res.fail(f"row ({sorted(s)}, {lab}): {tuple(sorted(x) for x in got)}", ("", str(a), "//a//b[c]"))
    pruned = 0
    for k in range(count):
        s = seed * 1_000_003 + k
        query = random_query(s)
        doc = random_doc(s, max_nodes)
        t = to_binary(doc)
        q = compile_to_asta(query, alphabet=t.alphabet())
        full = A.eval_asta_naive(q, t)
        restricted, skipped = _restricted_eval(q, t)
        pruned += skipped
        res.checked += 1
        want = {p: full.get(p, ()) for p in q.top}
        got = {p: tuple(sorted(restricted.get(p, ()))) for p in q.top}
        ok_want = {p for p in q.top if p in full}
        ok_got = {p for p in q.top if p in restricted}
        if want != got or ok_want != ok_got:
            res.fail(f"pruned evaluation differs on {query!r}", (str(t), str(q), query))
    res.details.insert(0, f"7 rows, {count} soundness instances, {pruned} pruned internal nodes")
    return res


def xml_topmost_counts(doc: Element, upper: str, lower: str) -> tuple:
    """Elements ``upper`` with no ``upper`` ancestor, and ``lower`` elements below them."""
    k = m = 0
    stack = [(doc, False)]
    while stack:
        e, inside = stack.pop()
        if e.tag == upper and not inside:
            k += 1
        elif e.tag == lower and inside:
            m += 1
        for c in e.children:
            stack.append((c, inside or e.tag == upper))
    return k, m


@_timed
def check_counts(count: int = 20, seed: int = 0) -> SuiteResult:
    """//listitem//keyword touches the top-most listitems and the keywords below them.

    Extra visits are allowed up to two per jump chain; without nested
    listitems the count must be exact.
    """
    res = SuiteResult("relevance-counts")
    a = compile_to_asta("//listitem//keyword")
    rows = []
    for k in range(count):
        s = seed * 1_000_003 + k
        nested = 0.0 if k % 2 == 0 else 0.3
        cfg = XMarkConfig(listitems=40, keywords_in_listitems=25, nested_listitem_prob=nested)
        doc = xmark_doc(s, cfg)
        t = to_binary(doc)
        top, below = xml_topmost_counts(doc, "listitem", "keyword")
        got, st = A.evaluate(a, t, "opt", build_index(t))
        overhead = st.visited - (top + below)
        rows.append((s, nested, top, below, st.visited, st.jumps, overhead))
        res.checked += 1
        ok = 0 <= overhead <= 2 * st.jumps and (nested or overhead == 0)
        if not ok:
            res.fail(f"seed {s}: visited {st.visited}, k+m {top + below}, jumps {st.jumps}",
                     (str(t), str(a), "//listitem//keyword"))
    res.data["rows"] = rows
    exact = sum(1 for r in rows if r[6] == 0)
    worst = max((r[6] / r[5] for r in rows if r[5]), default=0.0)
    res.details.insert(0, f"{count} documents, visited = k + m on {exact}, "
                          f"largest overhead {worst:.2f} per jump (bound 2)")
    res.details.insert(1, "seed nested k m visited jumps overhead")
    res.details[2:2] = [" ".join(str(x) for x in r) for r in rows[:6]]
    return res


XMARK_QUERIES = [
    "/site/regions",
    "/site/regions/europe/item/mailbox/mail/text/keyword",
    "/site/closed_auctions/closed_auction/annotation/description/parlist/listitem",
    "/site/regions/*/item",
    "//listitem//keyword",
    "/site/regions/*/item//keyword",
    "/site/people/person[ address and (phone or homepage) ]",
    "//listitem[ .//keyword and .//emph]//parlist",
    "/site/regions/*/item[ mailbox/mail/date ]/mailbox/mail",
    "/site[ .//keyword]",
    "/site//keyword",
    "/site[ .//keyword ]//keyword",
    "/site[ .//keyword or .//keyword/emph ]//keyword",
    "/site[ .//keyword//emph ]/descendant::keyword",
    "/site[ .//*//* ]//keyword",
]

MEMO_BOUND = 64


@_timed
def check_memo(docs: int = 5, seed: int = 0) -> SuiteResult:
    """Re-running adds no memo entries and table sizes stay small."""
    res = SuiteResult("memo")
    rows = []
    for k in range(docs):
        doc = xmark_doc(seed * 1_000_003 + k)
        t = to_binary(doc)
        idx = build_index(t)
        for n, query in enumerate(XMARK_QUERIES, 1):
            ev = A.Evaluator.for_engine(compile_to_asta(query), "opt")
            got, st = ev.run(t, idx)
            first = ev.memo_entries
            again, _ = ev.run(t, idx)
            added = ev.memo_entries - first
            rows.append((f"Q{n:02d}", k, st.selected, st.visited, first, added))
            res.checked += 1
            if added or again != got:
                res.fail(f"Q{n:02d} doc {k}: re-run added {added} entries", (str(t), "", query))
            if first >= MEMO_BOUND:
                res.fail(f"Q{n:02d} doc {k}: {first} entries", (str(t), "", query))
    res.data["rows"] = rows
    res.details.insert(0, f"largest table {max(r[4] for r in rows)} entries (bound {MEMO_BOUND})")
    return res


def compact_query(n: int) -> str:
    return "//x[" + " and ".join(f"(a{2 * i + 1} or a{2 * i + 2})" for i in range(n)) + "]"


@_timed
def check_compact(max_n: int = 6) -> SuiteResult:
    """Size of //x[(a1 or a2) and ...] automata."""
    res = SuiteResult("compact")
    rows = []
    for n in range(1, max_n + 1):
        a = compile_to_asta(compact_query(n))
        rows.append((n, len(a.states), len(a.transitions)))
        res.checked += 1
        if len(a.states) != 2 * n + 1 or len(a.transitions) > 4 * n + 2:
            res.fail(f"n={n}: {len(a.states)} states, {len(a.transitions)} transitions", ("", str(a), compact_query(n)))
    res.data["rows"] = rows
    res.details.insert(0, "n states transitions: " + ", ".join(" ".join(map(str, r)) for r in rows))
    return res


TRACE_TREE = "a(b(#,b(c(#,#),#)),#)"


def trace_steps() -> list:
    """Result sets at c, inner b, outer b and the root when running //a//b[c] on the trace tree."""
    a = compile_to_asta("//a//b[c]")
    t = BinaryTree.parse(TRACE_TREE)
    approx = {0: frozenset(a.top)}
    for i, lab in enumerate(t.labels):
        if lab != LEAF:
            approx[t.left[i]], approx[t.right[i]] = A.tda_step(a, approx[i], lab)
    # nodes in the order the results flow upwards: c, inner b, outer b, a
    order = [i for i in range(len(t) - 1, -1, -1) if t.labels[i] != LEAF]
    out = []
    for i in order:
        gamma = A.eval_asta_naive(a, t, i, approx[i])
        out.append((i, t.labels[i], {q: v for q, v in sorted(gamma.items())}))
    return out


@_timed
def check_trace() -> SuiteResult:
    res = SuiteResult("trace")
    steps = trace_steps()
    inner_b = 3
    want = [{"q2": ()}, {"q1": (inner_b,)}, {"q1": (inner_b,)}, {"q0": (inner_b,)}]
    got = [g for _, _, g in steps]
    res.checked = len(want)
    for k, (i, lab, g) in enumerate(steps):
        res.details.append(f"Gamma{k + 1} at {lab}{i}: {g}")
    if got != want:
        res.fail(f"trace {got} != {want}", (TRACE_TREE, str(compile_to_asta('//a//b[c]')), "//a//b[c]"))
    return res


@_timed
def check_hybrid(seed: int = 0) -> SuiteResult:
    """//listitem//keyword//emph on the four placements; hybrid visits far fewer nodes on A."""
    res = SuiteResult("hybrid")
    query = "//listitem//keyword//emph"
    a = compile_to_asta(query)
    rows = []
    for name, cfg in CONFIGS.items():
        doc = xmark_doc(seed, cfg)
        t = to_binary(doc)
        idx = build_index(t)
        expected = oracle_binary_ids(query, doc, t)
        hy, hs = A.evaluate(a, t, "hybrid", idx)
        op, os_ = A.evaluate(a, t, "opt", idx)
        rows.append((name, len(t), hs.selected, hs.visited, os_.visited))
        res.checked += 1
        if hy != expected or op != expected:
            res.fail(f"config {name}: wrong result", (str(t), str(a), query))
    if rows[0][3] * 4 > rows[0][4]:
        res.fail(f"config A: hybrid visited {rows[0][3]}, top-down {rows[0][4]}")
    res.data["rows"] = rows
    res.details.insert(0, "config nodes selected hybrid-visited topdown-visited")
    res.details[1:1] = [" ".join(map(str, r)) for r in rows]
    return res


SUITES = {
    "engines": check_engines,
    "jump": check_topdown_jump,
    "relevance": check_relevance,
    "relevance-literal": check_literal_relevance,
    "recognizer": check_recognizer,
    "minimize": check_minimize,
    "tda": check_tda,
    "counts": check_counts,
    "memo": check_memo,
    "compact": check_compact,
    "trace": check_trace,
    "hybrid": check_hybrid,
}
