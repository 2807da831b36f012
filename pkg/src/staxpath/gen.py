"""Deterministic generators: documents, queries and random automata."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .labels import LabelSet
from .sta import STA, Transition
from .tree import Element

DEFAULT_ALPHABET = ("a", "b", "c", "d")


class _Node:
    __slots__ = ("tag", "children")

    def __init__(self, tag: str):
        self.tag = tag
        self.children: list = []

    def add(self, tag: str) -> "_Node":
        child = _Node(tag)
        self.children.append(child)
        return child

    def freeze(self) -> Element:
        # post-order without recursion
        done: dict = {}
        stack = [(self, False)]
        while stack:
            n, ready = stack.pop()
            if ready:
                done[id(n)] = Element(n.tag, tuple(done.pop(id(c)) for c in n.children))
            else:
                stack.append((n, True))
                stack.extend((c, False) for c in n.children)
        return done[id(self)]


def random_doc(seed, max_nodes: int, alphabet: Sequence[str] = DEFAULT_ALPHABET,
               depth_bias: float = 0.6) -> Element:
    """Random unranked document with between 1 and ``max_nodes`` elements.

    Each new element picks a parent: with probability ``depth_bias`` the
    most recently created element, otherwise a uniformly chosen one.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    if not alphabet:
        raise ValueError("empty alphabet")
    rng = random.Random(seed)
    alphabet = sorted(alphabet)
    n = rng.randint(1, max_nodes)
    nodes = [_Node(rng.choice(alphabet))]
    for _ in range(n - 1):
        parent = nodes[-1] if rng.random() < depth_bias else rng.choice(nodes)
        nodes.append(parent.add(rng.choice(alphabet)))
    return nodes[0].freeze()


# ---------------------------------------------------------------------------
# XMark-like documents
# ---------------------------------------------------------------------------

REGIONS = ("africa", "asia", "australia", "europe", "namerica", "samerica")


@dataclass(frozen=True)
class XMarkConfig:
    """Shape knobs; the listitem, keyword and emph counts are met exactly."""

    items: int = 12
    people: int = 6
    open_auctions: int = 4
    closed_auctions: int = 4
    categories: int = 3
    listitems: int = 20
    keywords_in_listitems: int = 10
    keywords_elsewhere: int = 10
    emphs_in_keywords: int = 4
    emphs_elsewhere: int = 4
    nested_listitem_prob: float = 0.15
    keyword_hosts: int = 0  # listitems receiving keywords; 0 means any
    emph_hosts: int = 0     # keywords receiving emphs; 0 means any


# desk-scale analogues of the four listitem/keyword/emph placements
CONFIGS = {
    "A": XMarkConfig(listitems=300, keywords_in_listitems=3, keywords_elsewhere=0,
                     emphs_in_keywords=4, emphs_elsewhere=20),
    "B": XMarkConfig(listitems=300, keywords_in_listitems=240, keywords_elsewhere=0,
                     emphs_in_keywords=4, emphs_elsewhere=20),
    "C": XMarkConfig(listitems=36, keywords_in_listitems=1, keywords_elsewhere=161,
                     emphs_in_keywords=263, emphs_elsewhere=20, emph_hosts=1),
    "D": XMarkConfig(listitems=81, keywords_in_listitems=41, keywords_elsewhere=0,
                     emphs_in_keywords=60, emphs_elsewhere=20, keyword_hosts=1, emph_hosts=1),
}


def xmark_doc(seed, cfg: XMarkConfig = XMarkConfig()) -> Element:
    """A small document with the element vocabulary of the XMark benchmark."""
    if cfg.keywords_in_listitems and not cfg.listitems:
        raise ValueError("keywords below listitems need at least one listitem")
    if cfg.emphs_in_keywords and not (cfg.keywords_in_listitems or cfg.keywords_elsewhere):
        raise ValueError("emphs below keywords need at least one keyword")
    rng = random.Random(seed)
    site = _Node("site")
    regions = site.add("regions")
    areas = [regions.add(r) for r in REGIONS]
    texts = []       # text containers outside listitems
    parlists = []    # top-level parlist slots
    for k in range(cfg.items):
        item = rng.choice(areas).add("item")
        item.add("location")
        item.add("name")
        item.add("payment")
        desc = item.add("description")
        if k % 2:
            parlists.append(desc.add("parlist"))
        else:
            texts.append(desc.add("text"))
        mailbox = item.add("mailbox")
        for _ in range(rng.randint(0, 2)):
            mail = mailbox.add("mail")
            for tag in ("from", "to", "date"):
                mail.add(tag)
            texts.append(mail.add("text"))
    cats = site.add("categories")
    for _ in range(cfg.categories):
        cat = cats.add("category")
        cat.add("name")
        texts.append(cat.add("description").add("text"))
    people = site.add("people")
    for _ in range(cfg.people):
        person = people.add("person")
        person.add("name")
        person.add("emailaddress")
        for tag in ("address", "phone", "homepage"):
            if rng.random() < 0.5:
                person.add(tag)
    opened = site.add("open_auctions")
    for _ in range(cfg.open_auctions):
        auction = opened.add("open_auction")
        auction.add("initial")
        for _ in range(rng.randint(0, 3)):
            auction.add("bidder")
        texts.append(auction.add("annotation").add("description").add("text"))
    closed = site.add("closed_auctions")
    for _ in range(cfg.closed_auctions):
        auction = closed.add("closed_auction")
        for tag in ("seller", "buyer", "price"):
            auction.add(tag)
        parlists.append(auction.add("annotation").add("description").add("parlist"))
    if not parlists:
        parlists.append(site.add("parlist"))
    # listitems: top-level ones go into parlists, nested ones under an earlier listitem
    listitems = []
    item_texts = []
    for _ in range(cfg.listitems):
        if listitems and rng.random() < cfg.nested_listitem_prob:
            host = rng.choice(listitems)
            inner = next((c for c in host.children if c.tag == "parlist"), None) or host.add("parlist")
            li = inner.add("listitem")
        else:
            li = rng.choice(parlists).add("listitem")
        listitems.append(li)
        item_texts.append(li.add("text"))
    if not texts:
        texts.append(site.add("text"))
    if cfg.keyword_hosts:
        item_texts = rng.sample(item_texts, min(cfg.keyword_hosts, len(item_texts)))
    inside = [rng.choice(item_texts).add("keyword") for _ in range(cfg.keywords_in_listitems)]
    outside = [rng.choice(texts).add("keyword") for _ in range(cfg.keywords_elsewhere)]
    hosts = inside or outside
    if cfg.emph_hosts:
        hosts = rng.sample(hosts, min(cfg.emph_hosts, len(hosts)))
    for _ in range(cfg.emphs_in_keywords):
        rng.choice(hosts).add("emph")
    for _ in range(cfg.emphs_elsewhere):
        rng.choice(texts).add("bold" if rng.random() < 0.3 else "emph")
    return site.freeze()


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

def random_query(seed, alphabet: Sequence[str] = DEFAULT_ALPHABET, max_steps: int = 3,
                 pred_prob: float = 0.35, max_pred_depth: int = 2) -> str:
    """Random query of the supported fragment, as text."""
    rng = random.Random(seed)
    alphabet = sorted(alphabet)

    def test() -> str:
        return "*" if rng.random() < 0.12 else rng.choice(alphabet)

    def pred(depth: int) -> str:
        r = rng.random()
        if depth < max_pred_depth and r < 0.2:
            return f"{pred(depth + 1)} and {pred(depth + 1)}"
        if depth < max_pred_depth and r < 0.35:
            return f"({pred(depth + 1)} or {pred(depth + 1)})"
        if depth < max_pred_depth and r < 0.45:
            return f"not({pred(depth + 1)})"
        return rel_path(depth + 1)

    def step(depth: int) -> str:
        s = test()
        if depth <= max_pred_depth and rng.random() < pred_prob:
            s += f"[{pred(depth)}]"
        return s

    def rel_path(depth: int) -> str:
        lead = rng.choice(["", ".//", "following-sibling::"])
        out = lead + step(depth)
        for _ in range(rng.randint(0, 1)):
            out += rng.choice(["/", "//"]) + step(depth)
        return out

    out = ""
    for _ in range(rng.randint(1, max_steps)):
        r = rng.random()
        sep = "/" if r < 0.3 else "//"
        out += sep + step(0)
        if out.count("/") > 1 and rng.random() < 0.1:
            out += "/following-sibling::" + step(0)
    return out


# ---------------------------------------------------------------------------
# Random automata
# ---------------------------------------------------------------------------

def _label_groups(table: dict, alphabet) -> list:
    groups: dict = {}
    for lab in sorted(table):
        groups.setdefault(table[lab], set()).add(lab)
    return [(value, LabelSet(frozenset(labs)).relative_to(alphabet)) for value, labs in groups.items()]


def random_td_sta(seed, n_states: int = 4, alphabet: Sequence[str] = ("a", "b", "c"),
                  select_prob: float = 0.2, loop_prob: float = 0.4) -> STA:
    """Top-down deterministic and complete automaton.

    ``loop_prob`` biases transitions towards ``(q, q)`` loops and moves
    into a universal state so that relevance has something to skip.
    """
    rng = random.Random(seed)
    alphabet = sorted(alphabet)
    states = [f"q{i}" for i in range(n_states)]
    top_state = states[-1] if n_states > 1 and rng.random() < 0.5 else None
    transitions = []
    select = set()
    for q in states:
        table = {}
        for lab in alphabet:
            r = rng.random()
            if q == top_state:
                table[lab] = (q, q)
            elif r < loop_prob:
                table[lab] = (q, q)
            elif top_state is not None and r < loop_prob + 0.15:
                table[lab] = rng.choice([(q, top_state), (top_state, q)])
            else:
                table[lab] = (rng.choice(states), rng.choice(states))
            if q != top_state and rng.random() < select_prob:
                select.add((q, lab))
        for (q1, q2), labels in _label_groups(table, alphabet):
            transitions.append(Transition(q, labels, q1, q2))
    bottom = {q for q in states if rng.random() < 0.6} | ({top_state} if top_state else set())
    if not bottom:
        bottom = {rng.choice(states)}
    return STA(alphabet, states, [states[0]], bottom, select, transitions)


def random_bu_sta(seed, n_states: int = 4, alphabet: Sequence[str] = ("a", "b", "c"),
                  select_prob: float = 0.2) -> STA:
    """Bottom-up deterministic and complete automaton."""
    rng = random.Random(seed)
    alphabet = sorted(alphabet)
    states = [f"q{i}" for i in range(n_states)]
    transitions = []
    for q1 in states:
        for q2 in states:
            table = {lab: rng.choice(states) for lab in alphabet}
            for q, labels in _label_groups(table, alphabet):
                transitions.append(Transition(q, labels, q1, q2))
    top = {q for q in states if rng.random() < 0.5} or {rng.choice(states)}
    select = {(q, lab) for q in states for lab in alphabet if rng.random() < select_prob}
    return STA(alphabet, states, top, [states[0]], select, transitions)
