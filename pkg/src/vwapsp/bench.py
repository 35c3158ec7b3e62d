"""Timing harness: instance families, best-of-r timings, log-log fits."""

from __future__ import annotations

import csv
import time
from dataclasses import astuple, dataclass

import numpy as np

from .cw_apsp import apsp_cw
from .expressions import eval_nlc, random_nlc_expr
from .generators import md_substitution
from .graph import VertexWeightedGraph, checksum, oracle_apsp
from .mw_apsp import apsp_mw

CSV_COLUMNS = ("alg", "n", "m", "param", "ns", "checksum")
ALGORITHMS = ("cw", "mw", "oracle")


@dataclass
class BenchRecord:
    alg: str
    n: int
    m: int
    param: int
    ns: int
    checksum: int


@dataclass
class Instance:
    graph: VertexWeightedGraph
    param: int
    expr: object = None  # NlcExpr when the instance comes from an expression


def nlc_instance(n: int, k: int, seed: int, density: float = 0.3, shape: str = "linear",
                 wmax: int = 10**6) -> Instance:
    expr = random_nlc_expr(k, n, density, seed, shape=shape)
    w = np.random.default_rng(seed).integers(0, wmax + 1, size=n, dtype=np.int64)
    return Instance(eval_nlc(expr).to_graph(w), k, expr)


def md_instance(n: int, mw: int, seed: int, wmax: int = 10**6) -> Instance:
    return Instance(md_substitution(n, mw, seed, wmax=wmax), mw)


def run_algorithm(alg: str, inst: Instance) -> np.ndarray:
    if alg == "cw":
        if inst.expr is None:
            raise ValueError("the cw algorithm needs an expression instance")
        return apsp_cw(inst.expr, inst.graph.weights)
    if alg == "mw":
        return apsp_mw(inst.graph)
    if alg == "oracle":
        return oracle_apsp(inst.graph)
    raise ValueError(f"unknown algorithm {alg!r}")


def time_best(fn, repeats: int = 3):
    """(minimum wall time in ns, last result) over ``repeats`` calls."""
    best = None
    result = None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter_ns()
        result = fn()
        dt = time.perf_counter_ns() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def warm_up():
    """Trigger JIT compilation so it is not billed to the first measurement."""
    inst = nlc_instance(8, 2, 0)
    apsp_cw(inst.expr, inst.graph.weights)


def bench(alg: str, inst: Instance, repeats: int = 3) -> BenchRecord:
    ns, out = time_best(lambda: run_algorithm(alg, inst), repeats)
    return BenchRecord(alg, inst.graph.n, inst.graph.m, inst.param, ns, checksum(out))


def run_grid(algs, family: str, ns, params, seed: int, repeats: int = 3,
             shape: str = "linear", density: float = 0.3) -> list[BenchRecord]:
    """Every algorithm on every (n, param) instance of the family.

    ``family`` is ``"nlc"`` (param = k, random expression of the given
    shape) or ``"md"`` (param = mw, module-substitution graph).
    """
    warm_up()
    records = []
    for param in params:
        for n in ns:
            if family == "nlc":
                inst = nlc_instance(n, param, seed, density=density, shape=shape)
            elif family == "md":
                inst = md_instance(n, param, seed)
            else:
                raise ValueError(f"unknown family {family!r}")
            for alg in algs:
                if alg == "cw" and inst.expr is None:
                    continue
                records.append(bench(alg, inst, repeats))
    return records


def fit_exponent(xs, ts) -> float:
    """Slope of the least-squares line through (log x, log t)."""
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if xs.shape[0] < 2:
        raise ValueError("need at least two points")
    return float(np.polyfit(np.log(xs), np.log(ts), 1)[0])


def fits(records: list[BenchRecord]) -> list[str]:
    """Fitted exponents along each axis that varies, per algorithm."""
    lines = []
    for alg in sorted({r.alg for r in records}):
        rows = [r for r in records if r.alg == alg]
        for param in sorted({r.param for r in rows}):
            sel = sorted((r for r in rows if r.param == param), key=lambda r: r.n)
            if len({r.n for r in sel}) >= 2:
                lines.append(f"{alg} param={param}: n-exponent {fit_exponent([r.n for r in sel], [r.ns for r in sel]):.3f}")
        for n in sorted({r.n for r in rows}):
            sel = sorted((r for r in rows if r.n == n), key=lambda r: r.param)
            if len({r.param for r in sel}) >= 2:
                lines.append(f"{alg} n={n}: param-exponent {fit_exponent([r.param for r in sel], [r.ns for r in sel]):.3f}")
    return lines


def write_csv(records: list[BenchRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(astuple(r))
