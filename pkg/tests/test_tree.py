import pytest
from hypothesis import given, strategies as st

from staxpath.gen import random_doc
from staxpath.labels import LEAF
from staxpath.tree import (BinaryTree, Element, ParseError, all_trees, doc_order_cmp, from_binary, parse_doc,
                           random_tree, substitute, to_binary)

seeds = st.integers(min_value=0, max_value=10**9)


def E(tag, *children):
    return Element(tag, tuple(children))


class TestParseDoc:
    def test_nesting(self):
        assert parse_doc(b"<a><b/><c/></a>") == E("a", E("b"), E("c"))

    def test_single(self):
        assert parse_doc("<a/>") == E("a")

    def test_whitespace_between_tags(self):
        assert parse_doc("<a>\n  <b/>\n</a>\n") == E("a", E("b"))

    @pytest.mark.parametrize("text, needle", [
        ("<a><b></a></b>", "mismatched tag"),
        ("<a>hello</a>", "text"),
        ('<a x="1"/>', "attributes"),
        ("<a><!-- c --></a>", "comment"),
        ("<a/><b/>", "junk"),
        ("", "no element"),
    ])
    def test_rejects(self, text, needle):
        with pytest.raises(ParseError) as err:
            parse_doc(text)
        assert needle in str(err.value)
        assert err.value.offset >= 0

    def test_error_offset(self):
        with pytest.raises(ParseError) as err:
            parse_doc("<a><b>text</b></a>")
        assert err.value.offset == 6


class TestEncoding:
    def test_two_children(self):
        assert str(to_binary(E("a", E("b"), E("c")))) == "a(b(#,c(#,#)),#)"

    def test_single_node(self):
        assert str(to_binary(E("a"))) == "a(#,#)"

    def test_grandchild(self):
        assert str(to_binary(E("a", E("b", E("d")), E("c")))) == "a(b(d(#,#),c(#,#)),#)"

    def test_decode_rejects_forest(self):
        with pytest.raises(ValueError):
            from_binary(BinaryTree.parse("a(#,b(#,#))"))

    @given(seeds, st.integers(1, 80))
    def test_round_trip(self, seed, n):
        doc = random_doc(seed, n)
        t = to_binary(doc)
        assert from_binary(t) == doc
        assert t.internal_count() == doc.size()

    def test_deep_document(self):
        doc = E("a")
        for _ in range(5000):
            doc = E("a", doc)
        back = from_binary(to_binary(doc))
        assert back.size() == 5001 and to_binary(back) == to_binary(doc)


class TestBinaryTree:
    def test_term_round_trip(self):
        for text in ("#", "a(#,#)", "a(b(#,#),c(#,b(#,#)))"):
            assert str(BinaryTree.parse(text)) == text

    def test_paths(self):
        t = BinaryTree.parse("a(a(b(#,#),#),c(#,b(#,#)))")
        assert t.path(0) == ()
        assert t.path(2) == (1, 1)
        assert t.node_at((2, 2)) == 8
        with pytest.raises(KeyError):
            t.node_at((1, 1, 1, 1))

    def test_internal_leaf_label(self):
        with pytest.raises(ValueError):
            BinaryTree.node(LEAF, BinaryTree.leaf(), BinaryTree.leaf())

    @pytest.mark.parametrize("bad", ["", "a(#)", "a(#,#", "a(#,#),#"])
    def test_bad_terms(self, bad):
        with pytest.raises(ValueError):
            BinaryTree.parse(bad)

    def test_all_trees_counts(self):
        # Catalan numbers times |alphabet|^n
        assert sum(1 for _ in all_trees("ab", 3)) == 1 + 2 + 2 * 4 + 5 * 8


class TestSubstitute:
    def test_root(self):
        t = BinaryTree.parse("a(b(#,#),#)")
        assert str(substitute(t, (), BinaryTree.parse("c(#,#)"))) == "c(#,#)"

    def test_left(self):
        t = BinaryTree.parse("a(b(#,#),#)")
        assert str(substitute(t, (1,), BinaryTree.parse("c(#,#)"))) == "a(c(#,#),#)"

    def test_outside_domain(self):
        with pytest.raises(KeyError):
            substitute(BinaryTree.parse("a(#,#)"), (1, 1), BinaryTree.leaf())

    @given(seeds, st.data())
    def test_identity(self, seed, data):
        t = random_tree(seed, 20, "abc")
        i = data.draw(st.integers(0, len(t) - 1))
        assert substitute(t, t.path(i), t.subtree(i)) == t

    @given(seeds, seeds, st.data())
    def test_composition(self, seed, seed2, data):
        t = random_tree(seed, 15, "abc")
        t2 = random_tree(seed2, 5, "abc")
        i = data.draw(st.integers(0, len(t) - 1))
        inner = t.subtree(i)
        j = data.draw(st.integers(0, len(inner) - 1))
        lhs = substitute(t, t.path(i), substitute(inner, inner.path(j), t2))
        rhs = substitute(t, t.path(i) + inner.path(j), t2)
        assert lhs == rhs


class TestDocOrder:
    def test_examples(self):
        assert doc_order_cmp((), (1,)) < 0
        assert doc_order_cmp((1, 2), (2,)) < 0
        assert doc_order_cmp((1, 2), (1, 2)) == 0

    @given(seeds)
    def test_matches_preorder(self, seed):
        t = random_tree(seed, 15, "ab")
        paths = [t.path(i) for i in range(len(t))]
        for i in range(len(t)):
            for j in range(len(t)):
                c = doc_order_cmp(paths[i], paths[j])
                assert (c < 0) == (i < j) and (c == 0) == (i == j)


class TestRandomTree:
    def test_deterministic(self):
        assert random_tree(7, 30, "abc") == random_tree(7, 30, "abc")

    @given(seeds, st.integers(1, 60))
    def test_bound(self, seed, n):
        assert random_tree(seed, n, "abc").internal_count() <= n

    def test_errors(self):
        with pytest.raises(ValueError):
            random_tree(0, 0, "abc")
        with pytest.raises(ValueError):
            random_tree(0, 5, "")
