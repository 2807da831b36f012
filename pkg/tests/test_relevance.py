import random

import pytest
from hypothesis import given, settings, strategies as st

from staxpath.gen import random_bu_sta, random_doc, random_td_sta
from staxpath.labels import LEAF
from staxpath.relevance import (CHANGING, SELECTED, SKIP_PATH, SKIP_SUBTREE, Rejected, bottomup_eval,
                                bu_relevant_set, bu_universal_state, definition_relevant_set, format_report,
                                relevance_report, semantic_relevance, semantic_relevant_set, sub_automaton_classes,
                                td_relevant_set, topdown_jump, universal_state)
from staxpath.sta import bu_run, descendant_pair_sta, has_descendant_sta, minimize, root_label_sta, td_run
from staxpath.tree import BinaryTree, random_tree, substitute, to_binary

seeds = st.integers(min_value=0, max_value=10**9)
A0 = descendant_pair_sta()
A1 = minimize(has_descendant_sta())
DTD = root_label_sta()


def T(text):
    return BinaryTree.parse(text)


def internal(t):
    return [i for i, lab in enumerate(t.labels) if lab != LEAF]


def rooted_at_a(seed, n):
    t = to_binary(random_doc(seed, n, ("a", "b", "c")))
    return BinaryTree(("a",) + t.labels[1:])


class TestExamples:
    def test_dtd_semantic(self):
        t = T("a(b(#,#),#)")
        assert not semantic_relevance(DTD, t, 1)
        assert semantic_relevance(DTD, t, 0)

    @given(seeds)
    def test_dtd_only_root(self, seed):
        t = rooted_at_a(seed, 30)
        assert td_relevant_set(DTD, td_run(DTD, t)) == {0}

    def test_dtd_jump_visits_root_only(self):
        t = rooted_at_a(5, 40)
        assert len(t) >= 60
        assert topdown_jump(DTD, t).visited() == {0}

    def test_a0(self):
        run = td_run(A0, T("a(b(#,#),#)"))
        assert td_relevant_set(A0, run) >= {0, 1}
        assert td_relevant_set(A0, run) == {0, 1}

    def test_a0_all_c(self):
        t = T("c(c(#,c(#,#)),c(#,#))")
        assert td_relevant_set(A0, td_run(A0, t)) == {0}

    def test_universal(self):
        assert universal_state(DTD) == "q_top"
        assert universal_state(A0) is None

    def test_a1(self):
        run = bu_run(A1, T("a(b(#,#),#)"))
        assert 0 in run.selected and 0 in bu_relevant_set(A1, run)

    @given(seeds)
    def test_a1_bottom_subtrees(self, seed):
        t = random_tree(seed, 25, "abc")
        run = bu_run(A1, t)
        (q0,) = A1.bottom
        rel = bu_relevant_set(A1, run)
        below_q0 = [i for i in internal(t) if all(run.states[j] == q0 for j in range(i, i + t.size[i]))]
        assert not any(j in rel for i in below_q0 for j in range(i, i + t.size[i]) if j != 0)

    def test_a1_top_state(self):
        top = bu_universal_state(A1)
        t = random_tree(11, 25, "abc")
        run = bu_run(A1, t)
        rel = bu_relevant_set(A1, run)
        for i in internal(t):
            if i and run.states[i] == top and i not in run.selected:
                assert i not in rel


class TestJump:
    @settings(max_examples=150)
    @given(seeds, st.integers(2, 6))
    def test_jump_is_relevant_restriction(self, seed, n_states):
        a = minimize(random_td_sta(seed, n_states=n_states))
        t = random_tree(seed, 39, a.alphabet)
        run = td_run(a, t)
        jr = topdown_jump(a, t)
        if run.accepting:
            assert jr.accepted
            assert jr.mapping == {i: run.states[i] for i in td_relevant_set(a, run)}
        else:
            assert not jr.accepted and jr.mapping == {}

    def test_a0_t1(self):
        t = T("a(a(b(#,#),#),c(#,b(#,#)))")
        run = td_run(A0, t)
        assert topdown_jump(A0, t).visited() == td_relevant_set(A0, run)

    @settings(max_examples=40)
    @given(seeds, seeds)
    def test_skips_are_sound(self, seed, seed2):
        a = minimize(random_td_sta(seed, n_states=4))
        t = random_tree(seed, 20, a.alphabet)
        run = td_run(a, t)
        if not run.accepting:
            return
        jr = topdown_jump(a, t)
        rng = random.Random(seed2)
        skipped = [i for i in internal(t) if t.parent[i] in jr.mapping and i not in jr.mapping]
        for i in skipped[:3]:
            if run.states[i] != universal_state(a):
                continue
            for _ in range(20):
                t2 = random_tree(rng.randrange(10**9), 6, a.alphabet)
                t3 = substitute(t, t.path(i), t2)
                run3 = td_run(a, t3)
                assert run3.accepting
                assert run3.selected == {t3.node_at(t.path(j)) for j in run.selected}


class TestBottomUp:
    @given(seeds, seeds)
    def test_matches_bu_run(self, aseed, tseed):
        a = random_bu_sta(aseed, 3, ("a", "b", "c"), 0.3)
        t = random_tree(tseed, 40, "abc")
        run = bu_run(a, t)
        if run.accepting:
            assert bottomup_eval(a, t) == run
        else:
            with pytest.raises(Rejected):
                bottomup_eval(a, t)

    def test_a1(self):
        t = T("a(a(b(#,#),#),c(#,b(#,#)))")
        assert bottomup_eval(A1, t).selected == bu_run(A1, t).selected == {0, 1}


def closed(t, rel):
    parents_ok = all(t.parent[i] in rel for i in rel if i)
    kids_ok = all(t.left[i] not in rel and t.right[i] not in rel for i in internal(t) if i not in rel)
    return parents_ok and kids_ok


class TestSemantic:
    @settings(max_examples=60)
    @given(seeds)
    def test_closure_td(self, seed):
        a = minimize(random_td_sta(seed))
        t = random_tree(seed, 15, a.alphabet)
        assert closed(t, semantic_relevant_set(a, t))

    @settings(max_examples=60)
    @given(seeds)
    def test_closure_bu(self, seed):
        a = minimize(random_bu_sta(seed, 3, ("a", "b", "c"), 0.2))
        t = random_tree(seed, 15, a.alphabet)
        assert closed(t, semantic_relevant_set(a, t))

    @settings(max_examples=40)
    @given(seeds, seeds)
    def test_irrelevant_means_membership_fixed(self, seed, seed2):
        a = minimize(random_td_sta(seed, n_states=3))
        t = random_tree(seed, 8, a.alphabet)
        ok = td_run(a, t).accepting
        rng = random.Random(seed2)
        for i in range(len(t)):
            if semantic_relevance(a, t, i):
                continue
            for _ in range(5):
                t2 = random_tree(rng.randrange(10**9), 5, a.alphabet)
                assert td_run(a, substitute(t, t.path(i), t2)).accepting == ok

    def test_needs_determinism(self):
        from staxpath.sta import STA, Transition
        from staxpath.labels import LabelSet
        nd = STA("a", ["p", "q"], ["p", "q"], ["p", "q"], [], [Transition("p", LabelSet.of("a"), "p", "p")])
        with pytest.raises(ValueError):
            semantic_relevance(nd, T("a(#,#)"), 0)


class TestDefinition:
    @settings(max_examples=60)
    @given(seeds)
    def test_raw_definition_matches_minimal_syntactic(self, seed):
        raw = random_td_sta(seed)
        a = minimize(raw)
        t = random_tree(seed, 15, a.alphabet)
        run = td_run(a, t)
        if run.accepting:
            assert definition_relevant_set(raw, td_run(raw, t)) == td_relevant_set(a, run)

    def test_classes_of_a0(self):
        class_of, trivial = sub_automaton_classes(A0)
        assert class_of["q0"] != class_of["q1"] and not trivial
        assert sub_automaton_classes(DTD)[1] == {"q_top"}


class TestReport:
    def test_a0(self):
        t = T("a(b(#,#),c(#,#))")
        run = td_run(A0, t)
        rows = relevance_report(A0, run, td_relevant_set(A0, run))
        kinds = {i: k for i, k, _ in rows}
        assert kinds[0] == CHANGING and kinds[1] == SELECTED
        assert kinds[4] == SKIP_PATH and kinds[2] == SKIP_SUBTREE
        assert len(rows) == len(t)

    def test_dtd_format(self):
        run = td_run(DTD, T("a(b(#,#),#)"))
        text = format_report(relevance_report(DTD, run, td_relevant_set(DTD, run)))
        assert text.splitlines() == [
            f"0\t{CHANGING}\tq0",
            f"1\t{SKIP_SUBTREE}\tq_top",
            f"2\t{SKIP_SUBTREE}\tq_top",
            f"3\t{SKIP_SUBTREE}\tq_top",
            f"4\t{SKIP_SUBTREE}\tq_top",
        ]
