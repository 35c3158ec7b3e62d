"""Command-line interface: ``vwapsp {apsp,gen,md,bench}``.

Exit codes: 0 success, 1 I/O or parse error, 2 verification mismatch,
3 bad flags.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import VwapspError

EXIT_IO, EXIT_MISMATCH, EXIT_FLAGS = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


class FlagError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise FlagError("--threads must be positive")
    import warnings

    import numba
    # the kernels are sequential; this only caps numba's pool
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _cell(x):
    from .graph import INF
    return "inf" if x >= INF else str(int(x))


# ---------------------------------------------------------------------------

def cmd_apsp(args) -> int:
    from .cw_apsp import apsp_cw
    from .expressions import evaluate, parse_expr
    from .graph import format_matrix, load_graph, load_weights, oracle_apsp
    from .mw_apsp import apsp_mw

    if args.input and args.expr:
        raise FlagError("give either --input or --expr, not both")
    if args.expr:
        if not args.weights:
            raise FlagError("--expr needs --weights")
        expr = parse_expr(_read(args.expr))
        weights = load_weights(_read(args.weights))
        graph = evaluate(expr).to_graph(weights)
    elif args.input:
        if args.alg == "cw":
            raise FlagError("--alg cw needs --expr and --weights")
        expr = None
        graph = load_graph(_read(args.input))
    else:
        raise FlagError("give --input or --expr")

    if args.alg == "cw":
        result = apsp_cw(expr, graph.weights)
    elif args.alg == "mw":
        result = apsp_mw(graph)
    else:
        result = oracle_apsp(graph)
    _emit(format_matrix(result), args.output)

    if args.verify:
        truth = oracle_apsp(graph)
        diff = np.argwhere(truth != result)
        if diff.shape[0]:
            u, v = (int(x) for x in diff[0])
            got, want = (_cell(x) for x in (result[u, v], truth[u, v]))
            print(f"verification failed at ({u}, {v}): got {got}, expected {want}", file=sys.stderr)
            return EXIT_MISMATCH
        print("verification passed", file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    from . import generators as gen
    from .expressions import format_expr, random_cw_expr, random_nlc_expr
    from .graph import dump_graph

    if args.n is None or args.n < 1:
        raise FlagError("--n must be a positive integer")
    if args.wmin < 0 or args.wmax < args.wmin:
        raise FlagError("need 0 <= --wmin <= --wmax")
    wkw = dict(wmin=args.wmin, wmax=args.wmax)
    kind = args.kind
    if kind in ("nlc-expr", "cw-expr"):
        if args.k is None or args.k < 1:
            raise FlagError(f"--kind {kind} needs --k >= 1")
        if kind == "nlc-expr":
            expr = random_nlc_expr(args.k, args.n, args.density, args.seed, shape=args.shape)
        else:
            expr = random_cw_expr(args.k, args.n, args.seed, shape=args.shape)
        _emit(format_expr(expr), args.output)
        if args.weights_output:
            rng = np.random.default_rng(args.seed)
            w = rng.integers(args.wmin, args.wmax + 1, size=args.n)
            _emit("".join(f"{int(x)}\n" for x in w), args.weights_output)
        return 0
    if kind == "md-substitution":
        if args.mw is None or args.mw < 2:
            raise FlagError("--kind md-substitution needs --mw >= 2")
        g = gen.md_substitution(args.n, args.mw, args.seed, **wkw)
    elif kind == "gnp":
        if not 0.0 <= args.p <= 1.0:
            raise FlagError("--p must lie in [0, 1]")
        g = gen.gnp(args.n, args.p, args.seed, **wkw)
    elif kind == "cograph":
        g = gen.cograph(args.n, args.seed, **wkw)
    elif kind == "cycle":
        if args.n < 3:
            raise FlagError("--kind cycle needs --n >= 3")
        g = gen.cycle(args.n, args.seed, **wkw)
    else:
        g = getattr(gen, kind)(args.n, args.seed, **wkw)
    _emit(dump_graph(g), args.output)
    return 0


def cmd_md(args) -> int:
    from .graph import load_graph
    from .modular import format_tree, modular_decomposition, summary, to_dot

    if not args.input:
        raise FlagError("md needs --input")
    tree = modular_decomposition(load_graph(_read(args.input)))
    text = summary(tree) + "\n"
    if args.tree:
        text += format_tree(tree)
    _emit(text, args.output)
    if args.dot:
        _emit(to_dot(tree), args.dot)
    return 0


def cmd_bench(args) -> int:
    import io

    from .bench import ALGORITHMS, fits, run_grid, write_csv

    algs = [a for a in args.alg.split(",") if a]
    bad = [a for a in algs if a not in ALGORITHMS]
    if not algs or bad:
        raise FlagError(f"unknown algorithm(s): {', '.join(bad) or '(none)'}")
    family = args.family or ("nlc" if "cw" in algs else "md")
    if family == "md" and "cw" in algs:
        raise FlagError("--alg cw needs --family nlc")
    params = args.k if family == "nlc" else args.mw
    if not params:
        raise FlagError("--family nlc needs --k, --family md needs --mw")
    if any(x < 1 for x in args.n + params) or not args.n:
        raise FlagError("sizes and parameters must be positive")
    _set_threads(args.threads if args.threads is not None else 1)

    records = run_grid(algs, family, args.n, params, args.seed, repeats=args.repeats, shape=args.shape)
    buf = io.StringIO()
    write_csv(records, buf)
    _emit(buf.getvalue(), args.output)
    for line in fits(records):
        print(line, file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, help="numba worker threads")

    p = _Parser(prog="vwapsp", description="Vertex-weighted all-pairs shortest paths on structured graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("apsp", parents=[common], help="compute the distance matrix")
    a.add_argument("--alg", choices=["cw", "mw", "oracle"], default="oracle")
    a.add_argument("--input", help="graph file")
    a.add_argument("--expr", help="expression file (cw or nlc DSL)")
    a.add_argument("--weights", help="weights file, one per leaf in leaf order")
    a.add_argument("--verify", action="store_true", help="compare against the oracle (exit 2 on mismatch)")
    a.set_defaults(func=cmd_apsp)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("--kind", required=True,
                   choices=["nlc-expr", "cw-expr", "md-substitution", "gnp", "clique", "path", "cycle", "cograph"])
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--mw", type=int)
    g.add_argument("--p", type=float, default=0.1, help="edge probability for gnp")
    g.add_argument("--density", type=float, default=0.3, help="join pair density for nlc-expr")
    g.add_argument("--shape", choices=["random", "balanced", "linear"], default="random")
    g.add_argument("--wmin", type=int, default=0)
    g.add_argument("--wmax", type=int, default=100)
    g.add_argument("--weights-output", help="also write leaf weights (expression kinds)")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("md", parents=[common], help="modular decomposition summary")
    m.add_argument("--input", help="graph file")
    m.add_argument("--tree", action="store_true", help="also print the indented tree")
    m.add_argument("--dot", help="write a Graphviz rendering here")
    m.set_defaults(func=cmd_md)

    b = sub.add_parser("bench", parents=[common], help="timing grid as CSV")
    b.add_argument("--alg", default="cw", help="comma-separated subset of cw,mw,oracle")
    b.add_argument("--family", choices=["nlc", "md"])
    b.add_argument("--n", type=_int_list, default=[250, 500, 1000, 2000])
    b.add_argument("--k", type=_int_list, default=[4])
    b.add_argument("--mw", type=_int_list, default=[4])
    b.add_argument("--shape", choices=["random", "balanced", "linear"], default="linear")
    b.add_argument("--repeats", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "threads", None) is not None and args.command != "bench":
            _set_threads(args.threads)
        return args.func(args)
    except FlagError as exc:
        print(f"vwapsp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except (OSError, VwapspError) as exc:
        print(f"vwapsp {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
