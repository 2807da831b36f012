import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from staxpath.gen import CONFIGS, XMarkConfig, random_bu_sta, random_doc, random_query, random_td_sta, xmark_doc
from staxpath.index import build_index
from staxpath.sta import BU_COMPLETE, BU_DET, TD_COMPLETE, TD_DET, check_kind
from staxpath.tree import to_binary
from staxpath.xpath import parse_xpath

seeds = st.integers(min_value=0, max_value=10**9)


def tag_counts(doc):
    """(tag, ancestor tags) counts by walking the tree."""
    out = {}
    stack = [(doc, frozenset())]
    while stack:
        e, above = stack.pop()
        for key in [(e.tag, None)] + [(e.tag, a) for a in above]:
            out[key] = out.get(key, 0) + 1
        stack.extend((c, above | {e.tag}) for c in e.children)
    return out


class TestRandomDoc:
    @given(seeds, st.integers(1, 200))
    def test_bound(self, seed, n):
        doc = random_doc(seed, n)
        assert 1 <= doc.size() <= n

    def test_deterministic(self):
        assert random_doc(5, 100).to_xml() == random_doc(5, 100).to_xml()

    def test_alphabet(self):
        doc = random_doc(1, 100, ("x", "y"))
        assert set(to_binary(doc).alphabet()) <= {"x", "y"}

    @pytest.mark.parametrize("n, alphabet", [(0, "ab"), (5, ())])
    def test_errors(self, n, alphabet):
        with pytest.raises(ValueError):
            random_doc(0, n, alphabet)


class TestXMark:
    @pytest.mark.parametrize("name", sorted(CONFIGS))
    def test_config_counts(self, name):
        cfg = CONFIGS[name]
        c = tag_counts(xmark_doc(0, cfg))
        assert c.get(("listitem", None), 0) == cfg.listitems
        assert c.get(("keyword", "listitem"), 0) == cfg.keywords_in_listitems
        assert c.get(("keyword", None), 0) == cfg.keywords_in_listitems + cfg.keywords_elsewhere
        assert c.get(("emph", "keyword"), 0) == cfg.emphs_in_keywords

    def test_config_a_keywords(self):
        t = to_binary(xmark_doc(3, CONFIGS["A"]))
        assert build_index(t).label_count({"keyword"}) == 3

    def test_deterministic(self):
        assert xmark_doc(2).to_xml() == xmark_doc(2).to_xml()
        assert xmark_doc(2).to_xml() != xmark_doc(3).to_xml()

    def test_nesting(self):
        flat = tag_counts(xmark_doc(0, dataclasses.replace(XMarkConfig(), nested_listitem_prob=0.0)))
        deep = tag_counts(xmark_doc(0, dataclasses.replace(XMarkConfig(), nested_listitem_prob=0.9)))
        assert flat.get(("listitem", "listitem"), 0) == 0 < deep.get(("listitem", "listitem"), 0)

    def test_inconsistent(self):
        with pytest.raises(ValueError):
            xmark_doc(0, dataclasses.replace(XMarkConfig(), listitems=0))

    def test_vocabulary(self):
        doc = xmark_doc(0)
        assert doc.tag == "site" and [c.tag for c in doc.children][:1] == ["regions"]


class TestRandomAutomata:
    @given(seeds, st.integers(1, 6))
    def test_td(self, seed, n):
        a = random_td_sta(seed, n_states=n)
        assert {TD_DET, TD_COMPLETE} <= check_kind(a) and len(a.states) == n

    @given(seeds, st.integers(1, 5))
    def test_bu(self, seed, n):
        a = random_bu_sta(seed, n, ("a", "b"), 0.3)
        assert {BU_DET, BU_COMPLETE} <= check_kind(a)
        assert a.bottom == {"q0"}

    @settings(max_examples=200)
    @given(seeds)
    def test_queries_parse(self, seed):
        q = random_query(seed)
        assert str(parse_xpath(q))
        assert random_query(seed) == q
