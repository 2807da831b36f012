"""Command-line front end: query, explain, gen and verify."""
from __future__ import annotations

import argparse
import inspect
import sys
from typing import Optional

from . import asta as A
from .gen import CONFIGS, XMarkConfig, random_doc, xmark_doc
from .index import build_index
from .labels import LEAF
from .tree import BinaryTree, Element, ParseError, from_binary, parse_doc, to_binary
from .xpath import XPathError, compile_to_asta, oracle_binary_ids, parse_xpath

EXIT_OK, EXIT_FAIL, EXIT_QUERY, EXIT_PARSE = 0, 1, 2, 3
ENGINES = ("naive", "jump", "memo", "opt", "hybrid", "oracle")
DEFAULT_ORACLE_BOUND = 5000
SUITE_NAMES = ("engines", "jump", "relevance", "relevance-literal", "recognizer", "minimize",
               "tda", "counts", "memo", "compact", "trace", "hybrid")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def read_document(path: str) -> Element:
    """XML file, or a binary tree term such as ``a(b(#,#),#)``; ``-`` reads stdin."""
    try:
        data = sys.stdin.buffer.read() if path == "-" else open(path, "rb").read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from None
    text = data.decode("utf-8", errors="replace").strip()
    if text.startswith("<"):
        try:
            return parse_doc(data)
        except ParseError as exc:
            raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    try:
        return from_binary(BinaryTree.parse(text))
    except ValueError as exc:
        raise CliError(f"{path}: not XML and not a tree term ({exc})", EXIT_PARSE) from None


def element_paths(doc: Element) -> list:
    """Slash path with per-tag positions for every element, in document order."""
    out = []
    stack = [(doc, f"/{doc.tag}[1]")]
    while stack:
        e, prefix = stack.pop()
        out.append(prefix)
        seen: dict = {}
        kids = []
        for c in e.children:
            seen[c.tag] = seen.get(c.tag, 0) + 1
            kids.append((c, f"{prefix}/{c.tag}[{seen[c.tag]}]"))
        stack.extend(reversed(kids))
    return out


def _compile(query: str, alphabet=()) -> A.ASTA:
    try:
        return compile_to_asta(parse_xpath(query), alphabet)
    except XPathError as exc:
        raise CliError(f"query error: {exc}", EXIT_QUERY) from None


def cmd_query(args) -> int:
    doc = read_document(args.document)
    t = to_binary(doc)
    a = _compile(args.query, t.alphabet())
    if args.dump_automaton:
        sys.stdout.write(str(a))
    idx = build_index(t)
    engine = args.engine
    if engine == "oracle":
        if len(t) > args.oracle_bound:
            raise CliError(f"document has {len(t)} nodes, oracle bound is {args.oracle_bound}", EXIT_QUERY)
        ids = oracle_binary_ids(args.query, doc, t)
        stats = A.Stats(selected=len(ids), engine="oracle")
    else:
        try:
            ids, stats = A.evaluate(a, t, engine, idx)
        except A.Unsupported as exc:
            print(f"hybrid: {exc}; falling back to opt", file=sys.stderr)
            ids, stats = A.evaluate(a, t, "opt", idx)
    print(len(ids))
    if args.paths:
        elements = [i for i, lab in enumerate(t.labels) if lab != LEAF]
        rank = {node: k for k, node in enumerate(elements)}
        paths = element_paths(doc)
        for i in ids:
            print(f"{i}\t{paths[rank[i]]}")
    if args.stats:
        sys.stderr.write(stats.record())
    return EXIT_OK


def cmd_explain(args) -> int:
    a = _compile(args.query, args.alphabet.split(",") if args.alphabet else ())
    sys.stdout.write(str(a))
    plans, rows = A.reachable_plans(a)
    name = {s: f"S{k}" for k, (s, _) in enumerate(plans)}
    print()
    print("tda state\tstates\tplan")
    for s, plan in plans:
        print(f"{name[s]}\t{{{','.join(sorted(s))}}}\t{plan}")
    print()
    print("from\tlabel\tleft\tright")
    for s, lab, s1, s2 in rows:
        label = "other" if lab == A.OTHER else lab
        print(f"{name[s]}\t{label}\t{{{','.join(sorted(s1))}}}\t{{{','.join(sorted(s2))}}}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.max_nodes is not None and args.max_nodes < 1:
        raise CliError("--max-nodes must be at least 1", EXIT_QUERY)
    if args.kind == "random":
        alphabet = args.alphabet.split(",") if args.alphabet else ("a", "b", "c", "d")
        doc = random_doc(args.seed, args.max_nodes or 100, alphabet)
    else:
        cfg = CONFIGS[args.config] if args.config else XMarkConfig()
        overrides = {k: v for k, v in (("listitems", args.listitems),
                                        ("keywords_in_listitems", args.keywords_in_listitems),
                                        ("keywords_elsewhere", args.keywords_elsewhere),
                                        ("emphs_in_keywords", args.emphs_in_keywords),
                                        ("emphs_elsewhere", args.emphs_elsewhere),
                                        ("nested_listitem_prob", args.nested)) if v is not None}
        if overrides:
            cfg = XMarkConfig(**{**cfg.__dict__, **overrides})
        try:
            doc = xmark_doc(args.seed, cfg)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_QUERY) from None
        if args.max_nodes is not None and doc.size() > args.max_nodes:
            raise CliError(f"document has {doc.size()} elements, above --max-nodes {args.max_nodes}", EXIT_QUERY)
    xml = doc.to_xml() + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(xml)
    else:
        sys.stdout.write(xml)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    for name in names:
        fn = SUITES[name]
        kwargs = {"seed": args.seed} if "seed" in inspect.signature(fn).parameters else {}
        results[name] = fn(**kwargs)
        print(results[name].render())
        sys.stdout.flush()
    if args.figures:
        from .report import render
        for path in render(results, args.figures, args.seed):
            print(f"wrote {path}")
    return EXIT_OK if all(r.passed for r in results.values()) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="staxpath", description="Selecting tree automata and XPath evaluation.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="evaluate a query over a document")
    q.add_argument("document", help="XML file, tree term file, or - for stdin")
    q.add_argument("query")
    q.add_argument("--engine", choices=ENGINES, default="opt")
    q.add_argument("--stats", action="store_true", help="counters on stderr, one key=value per line")
    q.add_argument("--paths", action="store_true", help="print id and slash path of each selected node")
    q.add_argument("--dump-automaton", action="store_true")
    q.add_argument("--oracle-bound", type=int, default=DEFAULT_ORACLE_BOUND)
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("explain", help="print the automaton, its approximation states and jump plans")
    e.add_argument("query")
    e.add_argument("--alphabet", help="comma-separated extra labels")
    e.set_defaults(func=cmd_explain)

    g = sub.add_parser("gen", help="generate a document")
    g.add_argument("--kind", choices=("random", "xmark"), default="xmark")
    g.add_argument("--config", choices=sorted(CONFIGS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-nodes", type=int)
    g.add_argument("--alphabet", help="labels of random documents, comma-separated")
    g.add_argument("--listitems", type=int)
    g.add_argument("--keywords-in-listitems", type=int)
    g.add_argument("--keywords-elsewhere", type=int)
    g.add_argument("--emphs-in-keywords", type=int)
    g.add_argument("--emphs-elsewhere", type=int)
    g.add_argument("--nested", type=float, help="probability of nesting a listitem in another")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=("all",) + SUITE_NAMES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--figures", metavar="DIR", help="write tables and figures to DIR")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"staxpath: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
