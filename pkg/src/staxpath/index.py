"""Label-jump index over a binary tree.

All queries take and return pre-order node ids.  ``None`` plays the role of
the "no such node" answer.  Jumps binary-search the sorted per-label id
lists inside subtree intervals, so each costs O(|L| log n).
"""
from __future__ import annotations

from bisect import bisect_left
from collections import Counter
from typing import Iterable, Optional

from .labels import LEAF, LabelSet
from .tree import BinaryTree


class JumpIndex:
    def __init__(self, tree: BinaryTree):
        self.tree = tree
        by_label: dict = {}
        for i, lab in enumerate(tree.labels):
            by_label.setdefault(lab, []).append(i)
        self.by_label = by_label
        self.histogram = Counter({lab: len(ids) for lab, ids in by_label.items()})

    # label sets may be LabelSet objects or plain iterables of names
    def _labels(self, labels) -> list:
        if isinstance(labels, LabelSet):
            if labels.cofinite:
                return [lab for lab in self.by_label if lab != LEAF and lab in labels]
            return [lab for lab in labels.names if lab in self.by_label and lab != LEAF]
        return [lab for lab in labels if lab in self.by_label and lab != LEAF]

    def first_in(self, lo: int, hi: int, labels) -> Optional[int]:
        """Smallest id in ``[lo, hi)`` whose label is in ``labels``."""
        best = None
        for lab in self._labels(labels):
            ids = self.by_label[lab]
            k = bisect_left(ids, lo)
            if k < len(ids) and ids[k] < hi and (best is None or ids[k] < best):
                best = ids[k]
        return best

    def jump_desc(self, node: int, labels) -> Optional[int]:
        """First strict descendant of ``node`` in document order with a label in ``labels``."""
        return self.first_in(node + 1, node + self.tree.size[node], labels)

    def jump_foll(self, node: int, labels, context: int) -> Optional[int]:
        """First node after the subtree of ``node`` that lies inside ``context``."""
        size = self.tree.size
        if not (context <= node < context + size[context]):
            raise ValueError("context must be an ancestor-or-self of node")
        return self.first_in(node + size[node], context + size[context], labels)

    def jump_leftmost(self, node: int, labels) -> Optional[int]:
        """First node strictly below ``node`` on its left-most path with a label in ``labels``."""
        return self._walk(self.tree.left, node, labels)

    def jump_rightmost(self, node: int, labels) -> Optional[int]:
        return self._walk(self.tree.right, node, labels)

    def _walk(self, chain, node: int, labels) -> Optional[int]:
        i = chain[node]
        while i != -1:
            lab = self.tree.labels[i]
            if lab != LEAF and lab in labels:
                return i
            i = chain[i]
        return None

    def topmost_matches(self, node: int, labels) -> list:
        """Top-most strict descendants of ``node`` with a label in ``labels``, in order."""
        out = []
        m = self.jump_desc(node, labels)
        while m is not None:
            out.append(m)
            m = self.jump_foll(m, labels, node)
        return out

    def label_count(self, labels: Iterable[str]) -> int:
        if isinstance(labels, LabelSet):
            return sum(self.histogram[lab] for lab in self._labels(labels))
        return sum(self.histogram[lab] for lab in set(labels))

    def leaves_in_order(self) -> list:
        return list(self.by_label.get(LEAF, []))

    def xml_parent(self, node: int) -> Optional[int]:
        """Parent of ``node`` in the encoded XML document."""
        t = self.tree
        while True:
            p = t.parent[node]
            if p == -1:
                return None
            if t.left[p] == node:
                return p
            node = p


def build_index(tree: BinaryTree) -> JumpIndex:
    return JumpIndex(tree)
