import os
import subprocess
import sys

import pytest

from staxpath.cli import EXIT_FAIL, EXIT_OK, EXIT_PARSE, EXIT_QUERY, element_paths, main
from staxpath.tree import parse_doc

XML = "<a><b><c/></b><b/><d><b><c/></b></d></a>"


@pytest.fixture
def doc(tmp_path):
    p = tmp_path / "doc.xml"
    p.write_text(XML)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def stats_of(err):
    return dict(line.split("=", 1) for line in err.splitlines() if "=" in line)


class TestQuery:
    def test_count_and_paths(self, capsys, doc):
        code, out, _ = run(capsys, "query", doc, "//a//b[c]", "--paths")
        assert code == EXIT_OK
        assert out.splitlines() == ["2", "1\t/a[1]/b[1]", "8\t/a[1]/d[1]/b[1]"]

    def test_stats_on_stderr(self, capsys, doc):
        code, out, err = run(capsys, "query", doc, "//b", "--stats")
        assert out == "3\n"
        s = stats_of(err)
        assert set(s) == {"visited", "selected", "memo_entries", "jumps", "engine"}
        assert s["selected"] == "3" and s["engine"] == "opt"

    @pytest.mark.parametrize("engine", ["naive", "jump", "memo", "opt", "hybrid", "oracle"])
    def test_engines_agree(self, capsys, doc, engine):
        code, out, _ = run(capsys, "query", doc, "//a//b[c]", "--paths", "--engine", engine)
        assert code == EXIT_OK and out.splitlines()[0] == "2"

    def test_deterministic(self, capsys, doc):
        first = run(capsys, "query", doc, "//b[not(c)]", "--paths", "--stats")
        assert run(capsys, "query", doc, "//b[not(c)]", "--paths", "--stats") == first

    def test_hybrid_fallback(self, capsys, doc):
        code, out, err = run(capsys, "query", doc, "/a/b", "--engine", "hybrid")
        assert code == EXIT_OK and out == "2\n" and "falling back" in err

    def test_term_input(self, capsys, tmp_path):
        p = tmp_path / "t.txt"
        p.write_text("a(b(#,#),#)\n")
        assert run(capsys, "query", str(p), "//b")[:2] == (EXIT_OK, "1\n")

    def test_dump(self, capsys, doc):
        _, out, _ = run(capsys, "query", doc, "//a", "--dump-automaton")
        assert out.startswith("states: q0\n") and out.endswith("1\n")

    def test_query_error(self, capsys, doc):
        code, _, err = run(capsys, "query", doc, "//a[")
        assert code == EXIT_QUERY and "query error" in err

    def test_parse_error(self, capsys, tmp_path):
        p = tmp_path / "bad.xml"
        p.write_text("<a><b></a>")
        assert run(capsys, "query", str(p), "//a")[0] == EXIT_PARSE

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "query", str(tmp_path / "none.xml"), "//a")[0] == EXIT_PARSE

    def test_oracle_bound(self, capsys, doc):
        code, _, err = run(capsys, "query", doc, "//a", "--engine", "oracle", "--oracle-bound", "5")
        assert code == EXIT_QUERY and "oracle bound" in err

    def test_usage_error(self, capsys, doc):
        with pytest.raises(SystemExit) as exc:
            main(["query", doc, "//a", "--engine", "fast"])
        assert exc.value.code == 2


class TestExplain:
    def test_a2(self, capsys):
        code, out, _ = run(capsys, "explain", "//a//b[c]")
        assert code == EXIT_OK
        assert "S0\t{q0}\tjump-topmost {a}" in out
        assert "S2\t{q0,q1,q2}\tstay" in out
        assert "S1\tb\t{q0,q1,q2}\t{q0,q1}" in out

    def test_single_step(self, capsys):
        out = run(capsys, "explain", "//a")[1]
        plans = out.split("tda state\tstates\tplan\n")[1].split("\n\n")[0]
        assert plans.splitlines() == ["S0\t{q0}\tjump-topmost {a}"]

    def test_unsupported(self, capsys):
        assert run(capsys, "explain", "//a/@x")[0] == EXIT_QUERY


class TestGen:
    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.xml", tmp_path / "b.xml"
        assert run(capsys, "gen", "--config", "A", "--seed", "4", "-o", str(a))[0] == EXIT_OK
        run(capsys, "gen", "--config", "A", "--seed", "4", "-o", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().count("<keyword") == 3

    def test_random(self, capsys):
        code, out, _ = run(capsys, "gen", "--kind", "random", "--max-nodes", "20", "--alphabet", "x,y")
        assert code == EXIT_OK and parse_doc(out).size() <= 20

    def test_overrides(self, capsys):
        out = run(capsys, "gen", "--listitems", "7", "--keywords-in-listitems", "2", "--nested", "0")[1]
        assert out.count("<listitem") == 7

    def test_zero_nodes(self, capsys):
        assert run(capsys, "gen", "--kind", "random", "--max-nodes", "0")[0] == EXIT_QUERY

    def test_inconsistent(self, capsys):
        assert run(capsys, "gen", "--listitems", "0", "--keywords-in-listitems", "3")[0] == EXIT_QUERY


class TestVerify:
    def test_trace(self, capsys):
        code, out, _ = run(capsys, "verify", "trace")
        assert code == EXIT_OK and "PASS" in out

    def test_literal_fails(self, capsys):
        assert run(capsys, "verify", "relevance-literal")[0] == EXIT_FAIL

    def test_unknown_suite(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "nope"])
        assert exc.value.code == 2

    def test_figures(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        code, out, _ = run(capsys, "verify", "compact", "--figures", str(out_dir))
        assert code == EXIT_OK
        names = set(os.listdir(out_dir))
        assert {"engines.png", "engines.tsv", "compact.png", "compact.tsv", "summary.tsv"} <= names
        rows = (out_dir / "compact.tsv").read_text().splitlines()
        assert rows[0] == "n\tstates\ttransitions" and len(rows) == 7


def test_element_paths():
    assert element_paths(parse_doc(XML)) == [
        "/a[1]", "/a[1]/b[1]", "/a[1]/b[1]/c[1]", "/a[1]/b[2]", "/a[1]/d[1]", "/a[1]/d[1]/b[1]",
        "/a[1]/d[1]/b[1]/c[1]"]


def test_console_entry(doc):
    proc = subprocess.run([sys.executable, "-m", "staxpath.cli", "query", doc, "//c"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "2\n"
