"""Tables and figures for verification runs.

Each figure is written next to a tab-delimited table holding its data,
so the numbers stay greppable when the images are not looked at.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import asta as A  # noqa: E402
from .gen import xmark_doc  # noqa: E402
from .index import build_index  # noqa: E402
from .tree import to_binary  # noqa: E402
from .verify import MEMO_BOUND, XMARK_QUERIES  # noqa: E402
from .xpath import compile_to_asta  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "axes.axisbelow": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}
COLORS = ("#3498db", "#e74c3c", "#2ecc71", "#9b59b6", "#34495e")


def write_table(path: str, header: tuple, rows: list) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for r in rows:
            fh.write("\t".join(str(x) for x in r) + "\n")
    return path


def _bars(ax, labels: list, series: dict, log: bool = False) -> None:
    width = 0.8 / len(series)
    for k, (name, values) in enumerate(series.items()):
        xs = [i + (k - (len(series) - 1) / 2) * width for i in range(len(labels))]
        ax.bar(xs, values, width, label=name, color=COLORS[k % len(COLORS)])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=0 if len(labels) < 8 else 60)
    if log:
        ax.set_yscale("log")
    ax.legend()


def engine_rows(seed: int = 0) -> list:
    """Visited nodes of each engine on the XMark-style queries over one document."""
    t = to_binary(xmark_doc(seed))
    idx = build_index(t)
    rows = []
    for n, query in enumerate(XMARK_QUERIES, 1):
        a = compile_to_asta(query)
        counts = []
        selected = memo = 0
        for engine in ("naive", "jump", "memo", "opt"):
            _, st = A.evaluate(a, t, engine, idx)
            counts.append(st.visited)
            selected = st.selected
            if engine == "opt":
                memo = st.memo_entries
        rows.append((f"Q{n:02d}", len(t), selected, *counts, memo))
    return rows


def figure_engines(rows: list, out_dir: str) -> list:
    header = ("query", "nodes", "selected", "naive", "jump", "memo", "opt", "memo_entries")
    table = write_table(os.path.join(out_dir, "engines.tsv"), header, rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        labels = [r[0] for r in rows]
        _bars(ax, labels, {"selected": [r[2] for r in rows], "naive": [r[3] for r in rows],
                           "jump": [r[4] for r in rows], "opt": [r[6] for r in rows]}, log=True)
        ax.set_ylabel("nodes")
        ax.set_title("selected and visited nodes per engine")
        png = os.path.join(out_dir, "engines.png")
        fig.savefig(png)
        plt.close(fig)
    return [table, png]


def figure_hybrid(rows: list, out_dir: str) -> list:
    header = ("config", "nodes", "selected", "hybrid_visited", "topdown_visited")
    table = write_table(os.path.join(out_dir, "hybrid.tsv"), header, rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        _bars(ax, [r[0] for r in rows], {"selected": [r[2] for r in rows], "hybrid": [r[3] for r in rows],
                                         "top-down": [r[4] for r in rows]}, log=True)
        ax.set_ylabel("nodes")
        ax.set_title("//listitem//keyword//emph")
        png = os.path.join(out_dir, "hybrid.png")
        fig.savefig(png)
        plt.close(fig)
    return [table, png]


def figure_counts(rows: list, out_dir: str) -> list:
    header = ("seed", "nested_prob", "topmost_listitems", "keywords_below", "visited", "jumps", "overhead")
    table = write_table(os.path.join(out_dir, "counts.tsv"), header, rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for nested, color, name in ((0.0, COLORS[0], "no nesting"), (0.3, COLORS[1], "nested listitems")):
            pts = [(r[2] + r[3], r[4]) for r in rows if r[1] == nested]
            if pts:
                ax.scatter(*zip(*pts), color=color, label=name)
        lo = min(r[2] + r[3] for r in rows)
        hi = max(r[4] for r in rows)
        ax.plot([lo, hi], [lo, hi], color="gray", lw=0.8, ls="--", label="visited = k + m")
        ax.set_xlabel("top-most listitems + keywords below them")
        ax.set_ylabel("visited (opt)")
        ax.legend()
        png = os.path.join(out_dir, "counts.png")
        fig.savefig(png)
        plt.close(fig)
    return [table, png]


def figure_memo(rows: list, out_dir: str, bound: int) -> list:
    header = ("query", "doc", "selected", "visited", "memo_entries", "added_on_rerun")
    table = write_table(os.path.join(out_dir, "memo.tsv"), header, rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        queries = sorted({r[0] for r in rows})
        worst = [max(r[4] for r in rows if r[0] == q) for q in queries]
        ax.bar(range(len(queries)), worst, color=COLORS[3])
        ax.axhline(bound, color="gray", ls="--", lw=0.8)
        ax.set_xticks(range(len(queries)))
        ax.set_xticklabels(queries, rotation=60)
        ax.set_ylabel("memo entries (max over docs)")
        png = os.path.join(out_dir, "memo.png")
        fig.savefig(png)
        plt.close(fig)
    return [table, png]


def figure_compact(rows: list, out_dir: str) -> list:
    header = ("n", "states", "transitions")
    table = write_table(os.path.join(out_dir, "compact.tsv"), header, rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ns = [r[0] for r in rows]
        ax.plot(ns, [r[1] for r in rows], "o-", color=COLORS[0], label="states")
        ax.plot(ns, [r[2] for r in rows], "s-", color=COLORS[1], label="transitions")
        ax.plot(ns, [2 * n + 1 for n in ns], ":", color="gray", label="2n+1")
        ax.plot(ns, [4 * n + 2 for n in ns], "--", color="gray", label="4n+2")
        ax.set_xlabel("n")
        ax.legend()
        png = os.path.join(out_dir, "compact.png")
        fig.savefig(png)
        plt.close(fig)
    return [table, png]


def render(results: dict, out_dir: str, seed: int = 0) -> list:
    """Write every table and figure the given suite results support."""
    os.makedirs(out_dir, exist_ok=True)
    written = figure_engines(engine_rows(seed), out_dir)
    if "hybrid" in results:
        written += figure_hybrid(results["hybrid"].data["rows"], out_dir)
    if "counts" in results:
        written += figure_counts(results["counts"].data["rows"], out_dir)
    if "memo" in results:
        written += figure_memo(results["memo"].data["rows"], out_dir, MEMO_BOUND)
    if "compact" in results:
        written += figure_compact(results["compact"].data["rows"], out_dir)
    summary = [(name, "PASS" if r.passed else "FAIL", r.checked, f"{r.seconds:.2f}") for name, r in results.items()]
    written.append(write_table(os.path.join(out_dir, "summary.tsv"), ("suite", "status", "checks", "seconds"), summary))
    return written
