import pytest
from hypothesis import given, strategies as st

from staxpath.index import build_index
from staxpath.labels import LEAF, LabelSet
from staxpath.tree import BinaryTree, random_tree

# a(a(b,#),c(#,b)); ids: 0 a, 1 a, 2 b, 3-5 #, 6 c, 7 #, 8 b, 9-10 #
T1 = BinaryTree.parse("a(a(b(#,#),#),c(#,b(#,#)))")
seeds = st.integers(min_value=0, max_value=10**9)


@pytest.fixture
def idx():
    return build_index(T1)


def node(path):
    return T1.node_at(path)


class TestT1:
    def test_label_lists(self):
        i = build_index(BinaryTree.parse("a(b(#,#),#)"))
        assert i.by_label["a"] == [0] and i.by_label["b"] == [1]

    def test_leaf_only(self):
        i = build_index(BinaryTree.leaf())
        assert i.jump_desc(0, {"a"}) is None
        assert i.leaves_in_order() == [0]

    def test_jump_desc(self, idx):
        assert idx.jump_desc(0, {"b"}) == node((1, 1))
        assert idx.jump_desc(node((1, 1)), {"b"}) is None
        assert idx.jump_desc(0, set()) is None

    def test_jump_foll(self, idx):
        assert idx.jump_foll(node((1, 1)), {"b"}, 0) == node((2, 2))
        assert idx.jump_foll(node((2, 2)), {"b"}, 0) is None
        assert idx.jump_foll(node((2,)), {"a", "b", "c"}, node((2,))) is None
        with pytest.raises(ValueError):
            idx.jump_foll(0, {"b"}, node((1,)))

    def test_leftmost_rightmost(self, idx):
        assert idx.jump_leftmost(0, {"b"}) == node((1, 1))
        assert idx.jump_leftmost(0, {"c"}) is None
        assert idx.jump_rightmost(0, {"b"}) == node((2, 2))
        assert idx.jump_rightmost(0, {"a"}) is None
        assert idx.jump_leftmost(3, {"a", "b"}) is None
        assert idx.jump_rightmost(3, {"a", "b"}) is None

    def test_topmost(self, idx):
        assert idx.topmost_matches(0, {"b"}) == [node((1, 1)), node((2, 2))]
        assert idx.topmost_matches(0, {"a"}) == [node((1,))]
        assert idx.topmost_matches(0, set()) == []

    def test_counts(self, idx):
        assert idx.label_count({"b"}) == 2
        # six leaves: the tree has five internal nodes
        assert idx.label_count({LEAF}) == 6
        assert idx.label_count({"z"}) == 0
        assert idx.label_count(LabelSet.every()) == 5

    def test_leaves(self, idx):
        want = [(1, 1, 1), (1, 1, 2), (1, 2), (2, 1), (2, 2, 1), (2, 2, 2)]
        assert idx.leaves_in_order() == [node(p) for p in want]
        assert build_index(BinaryTree.parse("a(#,#)")).leaves_in_order() == [1, 2]


# linear-scan definitions
def scan_desc(t, i, labels):
    return next((j for j in range(i + 1, i + t.size[i]) if t.labels[j] in labels), None)


def scan_foll(t, i, labels, ctx):
    return next((j for j in range(i + t.size[i], ctx + t.size[ctx]) if t.labels[j] in labels), None)


def scan_chain(t, chain, i, labels):
    j = chain[i]
    while j != -1:
        if t.labels[j] in labels:
            return j
        j = chain[j]
    return None


labelsets = st.sets(st.sampled_from("abcz"), max_size=3)


@given(seeds, labelsets, st.data())
def test_jumps_match_scan(seed, labels, data):
    t = random_tree(seed, 40, "abc")
    idx = build_index(t)
    i = data.draw(st.integers(0, len(t) - 1))
    assert idx.jump_desc(i, labels) == scan_desc(t, i, labels)
    assert idx.jump_leftmost(i, labels) == scan_chain(t, t.left, i, labels)
    assert idx.jump_rightmost(i, labels) == scan_chain(t, t.right, i, labels)
    ancestors = [i]
    while t.parent[ancestors[-1]] != -1:
        ancestors.append(t.parent[ancestors[-1]])
    ctx = data.draw(st.sampled_from(ancestors))
    assert idx.jump_foll(i, labels, ctx) == scan_foll(t, i, labels, ctx)
    assert idx.label_count(labels) == sum(1 for lab in t.labels if lab in labels)


@given(seeds, labelsets)
def test_topmost_is_antichain_of_all_top_matches(seed, labels):
    t = random_tree(seed, 40, "abc")
    idx = build_index(t)
    got = idx.topmost_matches(0, labels)
    assert got == sorted(got)
    for x in got:
        assert 0 < x < t.size[0]
        assert not any(t.is_ancestor_or_self(y, x) for y in got if y != x)
    # every strict match below the root lies under some returned node
    matches = [j for j in range(1, len(t)) if t.labels[j] in labels]
    assert all(any(t.is_ancestor_or_self(x, j) for x in got) for j in matches)


@given(seeds)
def test_xml_parent(seed):
    t = random_tree(seed, 30, "abc")
    idx = build_index(t)
    for i in range(1, len(t)):
        if t.labels[i] == LEAF:
            continue
        # the XML parent is the first ancestor reached through a left edge
        j = i
        while t.parent[j] != -1 and t.left[t.parent[j]] != j:
            j = t.parent[j]
        want = None if t.parent[j] == -1 else t.parent[j]
        assert idx.xml_parent(i) == want
