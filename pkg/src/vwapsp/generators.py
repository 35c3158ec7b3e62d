"""Deterministic random instances.

Every generator takes an integer ``seed`` and draws vertex weights uniformly
from ``[wmin, wmax]``.
"""

from __future__ import annotations

import numpy as np

from .graph import VertexWeightedGraph
from .modular import PRIME, modular_decomposition


def _weights(rng, n, wmin, wmax):
    return rng.integers(wmin, wmax + 1, size=n, dtype=np.int64)


def gnp(n: int, p: float, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, 1)
    return VertexWeightedGraph.from_adjacency_matrix(upper | upper.T, _weights(rng, n, wmin, wmax))


def clique(n: int, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    rng = np.random.default_rng(seed)
    return VertexWeightedGraph.from_adjacency_matrix(~np.eye(n, dtype=bool), _weights(rng, n, wmin, wmax))


def path(n: int, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    rng = np.random.default_rng(seed)
    edges = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1) if n > 1 else np.empty((0, 2))
    return VertexWeightedGraph(n, edges, _weights(rng, n, wmin, wmax))


def cycle(n: int, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    rng = np.random.default_rng(seed)
    edges = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1)
    return VertexWeightedGraph(n, edges, _weights(rng, n, wmin, wmax))


def random_prime_graph(size: int, rng: np.random.Generator) -> np.ndarray:
    """Adjacency matrix of a random prime graph on ``size >= 4`` vertices (rejection sampling)."""
    if size < 4:
        raise ValueError("prime graphs need at least 4 vertices")
    while True:
        upper = np.triu(rng.random((size, size)) < 0.5, 1)
        adj = upper | upper.T
        g = VertexWeightedGraph.from_adjacency_matrix(adj, np.zeros(size, dtype=np.int64))
        tree = modular_decomposition(g)
        if tree.kind == PRIME and len(tree.children) == size:
            return adj


def _split(rng, total, parts):
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [total]]))


def md_substitution(n: int, mw: int, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    """Random graph whose modular decomposition has prime nodes of size <= mw.

    Built top-down: each module of size s is either a prime skeleton with
    between max(4, ceil(mw/2)) and mw parts, or a series or parallel
    composition of 2..4 parts; each part is expanded recursively.  With
    mw < 4 (or s < 4) only series/parallel compositions occur, which gives
    a cograph.  When n >= mw >= 4 the root is a prime skeleton with exactly
    mw parts, so the modular-width is exactly mw.  Vertex ids are shuffled
    at the end.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    adj = np.zeros((n, n), dtype=bool)
    lo_size = max(4, -(-mw // 2))
    stack = [(0, n)]
    while stack:
        lo, s = stack.pop()
        if s == 1:
            continue
        if mw >= 4 and s == n and n >= mw:
            ell = mw
            skel = random_prime_graph(ell, rng)
        elif mw >= 4 and s >= lo_size and rng.random() < 0.6:
            ell = int(rng.integers(lo_size, min(mw, s) + 1))
            skel = random_prime_graph(ell, rng)
        else:
            ell = int(rng.integers(2, min(4, s) + 1))
            skel = np.full((ell, ell), rng.random() < 0.5)
            np.fill_diagonal(skel, False)
        sizes = _split(rng, s, ell)
        starts = lo + np.concatenate([[0], np.cumsum(sizes)[:-1]])
        for a in range(ell):
            for b in range(a + 1, ell):
                if skel[a, b]:
                    ra = slice(starts[a], starts[a] + sizes[a])
                    rb = slice(starts[b], starts[b] + sizes[b])
                    adj[ra, rb] = True
                    adj[rb, ra] = True
        stack.extend((int(starts[a]), int(sizes[a])) for a in range(ell))
    perm = rng.permutation(n)
    adj = adj[np.ix_(perm, perm)]
    return VertexWeightedGraph.from_adjacency_matrix(adj, _weights(rng, n, wmin, wmax))


def cograph(n: int, seed: int, wmin: int = 0, wmax: int = 100) -> VertexWeightedGraph:
    """Random cograph (no prime nodes)."""
    return md_substitution(n, 2, seed, wmin, wmax)
