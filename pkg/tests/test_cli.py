import subprocess
import sys

import numpy as np
import pytest

from cases import K2_CW, K2_NLC, P4_NLC
from vwapsp import cli
from vwapsp.expressions import parse_expr
from vwapsp.graph import INF, load_graph, load_weights, parse_matrix
from vwapsp.modular import modular_decomposition, modular_width

K2_GRAPH = "2 1\n2\n3\n0 1\n"
P4_GRAPH = "4 3\n1\n1\n1\n1\n0 1\n1 2\n2 3\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- apsp -------------------------------------------------------------------

def test_apsp_mw(capsys, files):
    code, out, _ = run(capsys, "apsp", "--alg", "mw", "--input", files("k2.graph", K2_GRAPH))
    assert code == 0 and out == "2\t5\n5\t3\n"


@pytest.mark.parametrize("expr", [K2_NLC, K2_CW])
def test_apsp_cw_verify(capsys, files, expr):
    code, out, err = run(capsys, "apsp", "--alg", "cw", "--expr", files("k2.expr", expr),
                         "--weights", files("k2.w", "2\n3\n"), "--verify")
    assert code == 0 and out == "2\t5\n5\t3\n" and "verification passed" in err


def test_apsp_oracle_p4(capsys, files):
    code, out, _ = run(capsys, "apsp", "--input", files("p4.graph", P4_GRAPH))
    m = parse_matrix(out)
    assert code == 0 and m.max(axis=1).max() == 4 and m[0].tolist() == [1, 2, 3, 4]


def test_apsp_expr_with_other_algorithms(capsys, files):
    e, w = files("p4.nlc", P4_NLC), files("p4.w", "1\n1\n1\n1\n")
    outs = {run(capsys, "apsp", "--alg", alg, "--expr", e, "--weights", w)[1] for alg in ("cw", "mw", "oracle")}
    assert len(outs) == 1


def test_apsp_output_file_and_inf(capsys, files, tmp_path):
    target = tmp_path / "out.tsv"
    code, out, _ = run(capsys, "apsp", "--alg", "mw", "--input", files("i2.graph", "2 0\n1\n1\n"),
                       "--output", str(target), "--verify")
    assert code == 0 and out == ""
    assert target.read_text() == "1\tinf\ninf\t1\n"
    assert parse_matrix(target.read_text())[0, 1] == INF


def test_apsp_verify_mismatch(capsys, files, monkeypatch):
    import vwapsp.mw_apsp as mw

    def broken(g, tree=None):
        out = np.array([[2, 5], [5, 3]])
        out[0, 1] = 4
        return out

    monkeypatch.setattr(mw, "apsp_mw", broken)
    code, _, err = run(capsys, "apsp", "--alg", "mw", "--input", files("k2.graph", K2_GRAPH), "--verify")
    assert code == 2 and "(0, 1)" in err and "got 4, expected 5" in err


@pytest.mark.parametrize("argv", [
    ["apsp", "--input", "/nonexistent/file.graph"],
    ["md", "--input", "/nonexistent/file.graph"],
])
def test_io_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_parse_errors_exit_1(capsys, files):
    code, _, err = run(capsys, "apsp", "--input", files("bad.graph", "2 1\n2\n3\n0 7\n"))
    assert code == 1 and "line 4" in err
    code, _, _ = run(capsys, "apsp", "--alg", "cw", "--expr", files("bad.nlc", "nlc 1\n(vert 2)"),
                     "--weights", files("w", "1\n"))
    assert code == 1
    code, _, _ = run(capsys, "apsp", "--alg", "cw", "--expr", files("k2.nlc", K2_NLC), "--weights", files("w1", "1\n"))
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["apsp", "--alg", "fast"],
    ["apsp"],
    ["apsp", "--alg", "cw", "--input", "x.graph"],
    ["apsp", "--input", "a", "--expr", "b"],
    ["apsp", "--expr", "b"],
    ["gen", "--kind", "clique"],
    ["gen", "--kind", "clique", "--n", "0"],
    ["gen", "--kind", "cycle", "--n", "2"],
    ["gen", "--kind", "nlc-expr", "--n", "5"],
    ["gen", "--kind", "md-substitution", "--n", "5"],
    ["gen", "--kind", "gnp", "--n", "5", "--p", "1.5"],
    ["gen", "--kind", "path", "--n", "5", "--wmin", "9", "--wmax", "1"],
    ["gen", "--kind", "nope", "--n", "5"],
    ["md"],
    ["bench", "--alg", "cw,quick"],
    ["bench", "--alg", "cw", "--family", "md"],
    ["bench", "--n", "10,x"],
    ["bench", "--n", "0", "--repeats", "1"],
    ["bench", "--threads", "0", "--n", "10", "--repeats", "1"],
])
def test_bad_flags_exit_3(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = cli.main(argv)
        raise SystemExit(code)
    assert info.value.code == 3


# --- gen ------------------------------------------------------------------------

def test_gen_clique(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "clique", "--n", "5", "--seed", "1")
    g = load_graph(out)
    assert code == 0 and g.n == 5 and g.m == 10


def test_gen_nlc_expr(capsys, tmp_path):
    wpath = tmp_path / "w"
    code, out, _ = run(capsys, "gen", "--kind", "nlc-expr", "--k", "4", "--n", "50", "--seed", "7",
                       "--weights-output", str(wpath))
    t = parse_expr(out)
    assert code == 0 and t.n == 50 and t.k == 4
    assert len(load_weights(wpath.read_text())) == 50


def test_gen_cw_expr(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "cw-expr", "--k", "3", "--n", "20", "--shape", "linear")
    assert code == 0 and parse_expr(out).kind == "cw"


def test_gen_md_substitution(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "md-substitution", "--mw", "6", "--n", "100", "--seed", "3")
    assert code == 0 and modular_width(modular_decomposition(load_graph(out))) <= 6


@pytest.mark.parametrize("argv", [
    ["--kind", "gnp", "--n", "30", "--p", "0.2"],
    ["--kind", "cograph", "--n", "30"],
    ["--kind", "path", "--n", "8"],
    ["--kind", "cycle", "--n", "8"],
    ["--kind", "nlc-expr", "--n", "30", "--k", "3", "--density", "0.5", "--shape", "balanced"],
])
def test_gen_byte_identical(capsys, argv):
    first = run(capsys, "gen", *argv, "--seed", "11")
    second = run(capsys, "gen", *argv, "--seed", "11")
    assert first[0] == 0 and first == second


# --- md ---------------------------------------------------------------------------

@pytest.mark.parametrize("text, expect", [
    ("3 3\n1\n1\n1\n0 1\n0 2\n1 2\n", "series(3 leaves), mw=2"),
    (P4_GRAPH, "prime(4 leaves), mw=4"),
    ("2 0\n1\n1\n", "parallel(2 leaves), mw=2"),
])
def test_md_summary(capsys, files, text, expect):
    code, out, _ = run(capsys, "md", "--input", files("g", text))
    assert code == 0 and out == expect + "\n"


def test_md_tree_and_dot(capsys, files, tmp_path):
    dot = tmp_path / "t.dot"
    code, out, _ = run(capsys, "md", "--input", files("p4", P4_GRAPH), "--tree", "--dot", str(dot))
    assert code == 0 and "prime: 4 children" in out
    assert dot.read_text().startswith("digraph md {")


# --- bench -----------------------------------------------------------------------

def test_bench_csv(capsys):
    argv = ["bench", "--alg", "cw,mw,oracle", "--n", "20,40", "--k", "2", "--repeats", "1", "--seed", "2"]
    code, out, err = run(capsys, *argv)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "alg,n,m,param,ns,checksum" and len(lines) == 7
    rows = [line.split(",") for line in lines[1:]]
    for n in ("20", "40"):
        assert len({r[5] for r in rows if r[1] == n}) == 1
    assert "cw param=2: n-exponent" in err
    _, again, _ = run(capsys, *argv)
    assert [r[5] for r in rows] == [line.split(",")[5] for line in again.splitlines()[1:]]


def test_bench_md_family(capsys, tmp_path):
    target = tmp_path / "b.csv"
    code, _, err = run(capsys, "bench", "--alg", "mw", "--n", "30", "--mw", "4,8", "--repeats", "1",
                       "--output", str(target), "--threads", "1")
    assert code == 0 and len(target.read_text().splitlines()) == 3
    assert "mw n=30: param-exponent" in err


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0 and "vwapsp" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    p = tmp_path / "k2.graph"
    p.write_text(K2_GRAPH)
    res = subprocess.run([sys.executable, "-m", "vwapsp.cli", "apsp", "--alg", "mw", "--input", str(p)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "2\t5\n5\t3\n"
    res = subprocess.run([sys.executable, "-m", "vwapsp.cli", "apsp", "--bogus"], capture_output=True, text=True)
    assert res.returncode == 3
