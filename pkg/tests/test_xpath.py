import pytest
from hypothesis import given, settings, strategies as st

from staxpath.asta import evaluate
from staxpath.gen import random_doc, random_query
from staxpath.tree import parse_doc, to_binary
from staxpath.verify import compact_query
from staxpath.xpath import PAnd, PNot, POr, PPath, Step, XPathError, compile_to_asta, oracle_eval, parse_xpath

seeds = st.integers(min_value=0, max_value=10**9)

# elements in document order: 0 a, 1 b, 2 c, 3 b, 4 d, 5 b, 6 c
DOC = parse_doc("<a><b><c/></b><b/><d><b><c/></b></d></a>")


class TestParse:
    def test_descendant_chain(self):
        q = parse_xpath("//a//b[c]")
        assert q.absolute
        assert q.steps == (Step("descendant", "a"), Step("descendant", "b", PPath((Step("child", "c"),))))

    def test_absolute(self):
        q = parse_xpath("/site/regions")
        assert q.absolute and q.steps == (Step("child", "site"), Step("child", "regions"))

    def test_long_forms(self):
        assert parse_xpath("/descendant::a/child::*") == parse_xpath("//a/*")
        assert parse_xpath("//a/following-sibling::b").steps[1].axis == "following-sibling"

    def test_boolean_predicates(self):
        (step,) = parse_xpath("//a[b and not(c or .//d)]").steps
        p = step.predicate
        assert isinstance(p, PAnd) and isinstance(p.right, PNot) and isinstance(p.right.body, POr)

    def test_dot(self):
        (step,) = parse_xpath("//a[.]").steps
        assert step.predicate == PPath(())

    @pytest.mark.parametrize("text", ["//a[", "", "a//", "//a]", "//a[b", "///a", "//a[b and]",
                                      "//following-sibling::a"])
    def test_syntax_errors(self, text):
        with pytest.raises(XPathError) as err:
            parse_xpath(text)
        assert err.value.pos >= 0

    @pytest.mark.parametrize("text", ["//a/@x", "//a/text()", "//a/parent::b", "//a/attribute::x"])
    def test_unsupported(self, text):
        with pytest.raises(XPathError) as err:
            parse_xpath(text)
        assert "not supported" in str(err.value)


class TestCompile:
    def test_a2_shape(self):
        a = compile_to_asta("//a//b[c]")
        assert a.states == ("q0", "q1", "q2") and a.top == {"q0"}
        assert {str(tr) for tr in a.transitions} == {
            "q0, {a} → ↓1q1",
            "q0, ~{} → (↓1q0 ∨ ↓2q0)",
            "q1, {b} ⇒ ↓1q2",
            "q1, ~{} → (↓1q1 ∨ ↓2q1)",
            "q2, {c} → ⊤",
            "q2, ~{} → ↓2q2",
        }

    def test_single_step(self):
        a = compile_to_asta("//a")
        assert {str(tr) for tr in a.transitions} == {"q0, {a} ⇒ ⊤", "q0, ~{} → (↓1q0 ∨ ↓2q0)"}

    def test_disjunctions(self):
        a = compile_to_asta("//x[(a1 or a2) and (a3 or a4)]")
        assert len(a.states) == 5
        (prog,) = [tr for tr in a.transitions if tr.state == "q0" and tr.select]
        assert str(prog.formula) == "((↓1q1 ∨ ↓1q2) ∧ (↓1q3 ∨ ↓1q4))"

    @pytest.mark.parametrize("n", range(1, 7))
    def test_compactness(self, n):
        a = compile_to_asta(compact_query(n))
        assert len(a.states) <= 2 * n + 1 and len(a.transitions) <= 4 * n + 2

    @given(seeds)
    def test_linear_size(self, seed):
        q = parse_xpath(random_query(seed, "abcd"))
        a = compile_to_asta(q)
        assert len(a.transitions) <= 2 * len(a.states)

    def test_alphabet(self):
        assert compile_to_asta("//a//*", ("z",)).alphabet == {"a", "z"}


class TestOracle:
    @pytest.mark.parametrize("query, want", [
        ("//a//b[c]", [1, 5]),
        ("//b", [1, 3, 5]),
        ("/a/b", [1, 3]),
        ("/b", []),
        ("/a/b/following-sibling::d", [4]),
        ("//b[not(c)]", [3]),
        ("//*[c]", [1, 5]),
        ("/a/d//c", [6]),
        ("//c/following-sibling::*", []),
        ("//b/following-sibling::b", [3]),
        ("//a[b and d]", [0]),
        ("//*[.//c or not(*)]", [0, 1, 2, 3, 4, 5, 6]),
    ])
    def test_hand_cases(self, query, want):
        assert oracle_eval(query, DOC) == want
        t = to_binary(DOC)
        ids = [i for i, lab in enumerate(t.labels) if lab != "#"]
        got = evaluate(compile_to_asta(query, t.alphabet()), t, "naive")[0]
        assert [ids.index(i) for i in got] == want

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_opt_matches_oracle(self, seed):
        doc = random_doc(seed, 80)
        t = to_binary(doc)
        ids = [i for i, lab in enumerate(t.labels) if lab != "#"]
        query = random_query(seed ^ 0x5A5A, ("a", "b", "c", "d"))
        got = evaluate(compile_to_asta(query, t.alphabet()), t, "opt")[0]
        assert [ids.index(i) for i in got] == oracle_eval(query, doc)
