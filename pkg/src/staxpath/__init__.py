"""Selecting tree automata, relevant-node traversal and forward XPath evaluation."""
from .asta import ASTA, ATransition, Stats, evaluate, eval_asta_naive, eval_asta_opt, hybrid_eval, tda_step, jump_plan
from .index import JumpIndex, build_index
from .labels import LEAF, LabelSet
from .relevance import (bottomup_eval, bu_relevant_set, semantic_relevance, td_relevant_set, topdown_jump)
from .sta import (STA, Transition, bu_run, dump_sta, from_recognizer, minimize, parse_sta, sta_equiv,
                  to_recognizer, td_run)
from .tree import BinaryTree, Element, parse_doc, to_binary, from_binary
from .xpath import XPathError, compile_to_asta, oracle_eval, parse_xpath

__all__ = [
    "ASTA", "ATransition", "BinaryTree", "Element", "JumpIndex", "LEAF", "LabelSet", "STA", "Stats",
    "Transition", "XPathError", "bottomup_eval", "bu_relevant_set", "bu_run", "build_index",
    "compile_to_asta", "dump_sta", "eval_asta_naive", "eval_asta_opt", "evaluate", "from_binary",
    "from_recognizer", "hybrid_eval", "jump_plan", "minimize", "oracle_eval", "parse_doc", "parse_sta",
    "parse_xpath", "semantic_relevance", "sta_equiv", "tda_step", "td_relevant_set", "td_run",
    "to_binary", "to_recognizer", "topdown_jump",
]
