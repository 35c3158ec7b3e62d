"""Vertex-weighted APSP over the modular decomposition in O(mw^2 n + n^2).

Vertices are renumbered in leaf order of the decomposition tree so that every
module is an interval.  The tree is processed top-down.  Each module M
carries a hop value ``h``: the weight of the lightest vertex outside M that
is adjacent to M (INF if there is none), so any walk that leaves M and comes
back costs at least ``w(u) + h + w(v)`` and that much is always achievable.

For u in child M_i and v in child M_j (i != j) of M::

    dist(u, v) = w(u) + w(v) + min(qd[i, j] - w*_i - w*_j, h)

where qd is the vertex-weighted distance in the quotient with weights
w*_i = min weight in M_i.  Child M_i then inherits ``min(h, k_i)``, k_i being
the lightest w* among its quotient neighbours.  Each unordered pair is written
exactly once, at its lowest common module.
"""

from __future__ import annotations

import numpy as np

from .graph import INF, VertexWeightedGraph
from .modular import PARALLEL, SERIES, MdNode, iter_nodes, leaf_order, modular_decomposition


def quotient_apsp(adjacency: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Vertex-weighted Floyd-Warshall on a small graph, O(l^3)."""
    w = np.asarray(weights, dtype=np.int64)
    adj = np.asarray(adjacency, dtype=bool)
    d = np.where(adj, w[:, None] + w[None, :], INF).astype(np.int64)
    np.fill_diagonal(d, w)
    for b in range(w.shape[0]):
        # d[a, b] + d[b, c] - w[b]; d[b, c] >= w[b] keeps INF terms >= INF
        d = np.minimum(d, np.minimum(d[:, b:b + 1] + d[b:b + 1, :] - w[b], INF))
    return d


def cross_module_dist(qdist: np.ndarray, i: int, j: int, wu: int, wv: int, wi: int, wj: int) -> int:
    """``qdist[i, j] - w*_i + w(u) - w*_j + w(v)``; INF stays INF."""
    q = int(qdist[i, j])
    if q >= INF:
        return INF
    return q - wi + wu - wj + wv


def _node_tables(node: MdNode, wstar: np.ndarray):
    """(interior offsets between children, lightest quotient neighbour per child)."""
    ell = wstar.shape[0]
    if node.kind == SERIES:
        interior = np.zeros((ell, ell), dtype=np.int64)
        order = np.argsort(wstar, kind="stable")
        hop = np.full(ell, wstar[order[0]], dtype=np.int64)
        hop[order[0]] = wstar[order[1]]
    elif node.kind == PARALLEL:
        interior = np.full((ell, ell), INF, dtype=np.int64)
        hop = np.full(ell, INF, dtype=np.int64)
    else:
        qd = quotient_apsp(node.quotient, wstar)
        interior = np.where(qd >= INF, INF, qd - wstar[:, None] - wstar[None, :])
        hop = np.where(node.quotient, wstar[None, :], INF).min(axis=1)
    return interior, hop


def _fill(root: MdNode, wp: np.ndarray, pos: np.ndarray, out: np.ndarray, hop0: int):
    # pos maps vertex id -> row in out; modules are contiguous in that order
    stack = [(root, hop0)]
    while stack:
        node, h = stack.pop()
        if node.is_leaf():
            continue
        lo = int(pos[node.vertices[0]])
        sizes = np.array([c.size for c in node.children], dtype=np.int64)
        starts = lo + np.concatenate([[0], np.cumsum(sizes)[:-1]])
        hi = lo + node.size
        wstar = np.minimum.reduceat(wp[lo:hi], starts - lo)
        interior, khop = _node_tables(node, wstar)
        interior = np.minimum(interior, h)
        owner = np.repeat(np.arange(len(sizes)), sizes)
        wcol = wp[lo:hi]
        for i, child in enumerate(node.children):
            a, b = int(starts[i]), int(starts[i] + sizes[i])
            off = interior[i][owner]
            rows = wp[a:b, None]
            out[a:b, lo:a] = np.minimum(rows + (wcol[:a - lo] + off[:a - lo])[None, :], INF)
            out[a:b, b:hi] = np.minimum(rows + (wcol[b - lo:] + off[b - lo:])[None, :], INF)
            if not child.is_leaf():
                stack.append((child, int(min(h, khop[i]))))


def _layout(tree: MdNode, n: int):
    order = leaf_order(tree)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    return order, pos


def apsp_mw(g: VertexWeightedGraph, tree: MdNode | None = None) -> np.ndarray:
    """All-pairs vertex-weighted distances via the modular decomposition.

    ``tree`` may be passed to reuse a decomposition of ``g``.
    """
    n = g.n
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if tree is None:
        tree = modular_decomposition(g)
    order, pos = _layout(tree, n)
    wp = g.weights[order]
    out = np.empty((n, n), dtype=np.int64)
    np.fill_diagonal(out, wp)
    _fill(tree, wp, pos, out, INF)
    return out[np.ix_(pos, pos)]


def capped_apsp(g: VertexWeightedGraph, node: MdNode, cap: int, out: np.ndarray | None = None) -> np.ndarray:
    """``min(dist_{G[M]}(u, v), cap)`` for all u, v in the module M of ``node``.

    Rows and columns follow ``node.vertices``.  If ``out`` (n x n) is given,
    the values are also written into its M x M block.
    """
    verts = node.vertices
    # relabel the subtree onto 0..|M|-1 in leaf order
    order = leaf_order(node)
    pos = np.empty(g.n, dtype=np.int64)
    pos[order] = np.arange(order.shape[0])
    wp = g.weights[order]
    block = np.empty((verts.shape[0], verts.shape[0]), dtype=np.int64)
    np.fill_diagonal(block, wp)
    _fill(node, wp, pos, block, INF)
    back = pos[verts]
    res = np.minimum(block[np.ix_(back, back)], cap)
    if out is not None:
        out[np.ix_(verts, verts)] = res
    return res


def module_hops(g: VertexWeightedGraph, tree: MdNode) -> dict:
    """Hop value of every node (keyed by ``id(node)``), as used by ``apsp_mw``."""
    hops = {id(tree): INF}
    for node in iter_nodes(tree):
        if node.is_leaf():
            continue
        wstar = np.array([g.weights[c.vertices].min() for c in node.children], dtype=np.int64)
        _, khop = _node_tables(node, wstar)
        for c, kh in zip(node.children, khop):
            hops[id(c)] = int(min(hops[id(node)], kh))
    return hops
