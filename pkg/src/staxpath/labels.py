"""Finite and co-finite label sets.

Transitions of tree automata are guarded by sets of labels.  Writing
"every label except b" is common, so a set is stored either as a finite
collection of names or as the complement of one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

LEAF = "#"
HAT = "^"


def hat(label: str) -> str:
    """Return the hatted copy of ``label`` used by recognizer automata."""
    return HAT + label


def unhat(label: str) -> str:
    return label[len(HAT):] if label.startswith(HAT) else label


def is_hatted(label: str) -> bool:
    return label.startswith(HAT)


@dataclass(frozen=True)
class LabelSet:
    """A finite set of labels, or the complement of one when ``cofinite``."""

    names: frozenset = frozenset()
    cofinite: bool = False

    @classmethod
    def of(cls, *labels: str) -> "LabelSet":
        return cls(frozenset(labels))

    @classmethod
    def every(cls) -> "LabelSet":
        return cls(frozenset(), True)

    @classmethod
    def but(cls, *labels: str) -> "LabelSet":
        return cls(frozenset(labels), True)

    def __contains__(self, label: str) -> bool:
        return (label in self.names) != self.cofinite

    def complement(self) -> "LabelSet":
        return LabelSet(self.names, not self.cofinite)

    def __and__(self, other: "LabelSet") -> "LabelSet":
        if not self.cofinite and not other.cofinite:
            return LabelSet(self.names & other.names)
        if self.cofinite and other.cofinite:
            return LabelSet(self.names | other.names, True)
        finite, co = (self, other) if other.cofinite else (other, self)
        return LabelSet(finite.names - co.names)

    def __or__(self, other: "LabelSet") -> "LabelSet":
        return (self.complement() & other.complement()).complement()

    def __sub__(self, other: "LabelSet") -> "LabelSet":
        return self & other.complement()

    def is_empty(self) -> bool:
        return not self.cofinite and not self.names

    def members(self, alphabet: Iterable[str]) -> frozenset:
        """The labels of ``alphabet`` that belong to this set."""
        return frozenset(a for a in alphabet if a in self)

    def relative_to(self, alphabet: Iterable[str]) -> "LabelSet":
        """Shortest equivalent form once the universe is ``alphabet``."""
        alphabet = frozenset(alphabet)
        inside = self.members(alphabet)
        outside = alphabet - inside
        if inside and len(outside) < len(inside):
            return LabelSet(frozenset(outside), True)
        return LabelSet(inside)

    def __str__(self) -> str:
        body = "{" + ",".join(sorted(self.names)) + "}"
        return "~" + body if self.cofinite else body

    def __repr__(self) -> str:
        return f"LabelSet({self})"

    @classmethod
    def parse(cls, text: str) -> "LabelSet":
        text = text.strip()
        m = re.fullmatch(r"(~?)\{([^{}]*)\}", text)
        if not m:
            raise ValueError(f"bad label set: {text!r}")
        names = frozenset(n.strip() for n in m.group(2).split(",") if n.strip())
        return cls(names, bool(m.group(1)))
