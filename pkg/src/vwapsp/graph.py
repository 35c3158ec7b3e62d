"""Vertex-weighted graphs, shortest-path oracles and the text formats.

The weight of a path is the sum of the weights of all of its vertices,
endpoints included, so ``dist(v, v) == w(v)``.  Weights are non-negative
integers; ``INF`` is a sentinel for "no path" that saturates under addition.
Distance matrices are ``numpy.int64`` arrays using the same sentinel.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ParseError, ValidationError

# Two INF values still add up without overflowing int64.
INF = (2**63 - 1) // 2
WEIGHT_LIMIT = 2**61
# float64 represents every integer below this exactly.
_FLOAT_EXACT = 2**53


def wadd(a: int, b: int) -> int:
    """Saturating addition of two weights."""
    s = a + b
    return INF if s >= INF else s


class VertexWeightedGraph:
    """Undirected simple graph on vertices ``0..n-1`` with integer vertex weights.

    Adjacency is stored in CSR form (``indptr``/``indices``), neighbor lists
    sorted.  Instances are treated as immutable.
    """

    __slots__ = ("n", "indptr", "indices", "weights", "_matrix")

    def __init__(self, n: int, edges, weights):
        if n < 0:
            raise ValidationError("vertex count must be non-negative")
        weights = np.asarray(weights, dtype=np.int64).reshape(-1)
        if weights.shape[0] != n:
            raise ValidationError(f"expected {n} weights, got {weights.shape[0]}")
        if n and weights.min() < 0:
            raise ValidationError("negative vertex weight")
        if sum(int(w) for w in weights) >= WEIGHT_LIMIT:
            raise ValidationError("total vertex weight must stay below 2**61")

        if not isinstance(edges, np.ndarray):
            edges = list(edges)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValidationError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            v = int(e[e[:, 0] == e[:, 1]][0, 0])
            raise ValidationError(f"self-loop at vertex {v}")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = np.unique(lo * max(n, 1) + hi)
        if keys.shape[0] != e.shape[0]:
            raise ValidationError("duplicate edge")

        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        self.n = n
        self.weights = weights
        self._matrix = None

    @property
    def m(self) -> int:
        return int(self.indices.shape[0] // 2)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.shape[0] and nb[i] == v)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix (cached, do not modify)."""
        if self._matrix is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            src = np.repeat(np.arange(self.n), np.diff(self.indptr))
            a[src, self.indices] = True
            a.flags.writeable = False
            self._matrix = a
        return self._matrix

    def induced_subgraph(self, vertices) -> VertexWeightedGraph:
        """Subgraph induced by ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        vs = np.asarray(vertices, dtype=np.int64)
        sub = self.adjacency_matrix()[np.ix_(vs, vs)]
        iu, ju = np.nonzero(np.triu(sub, 1))
        return VertexWeightedGraph(len(vs), np.stack([iu, ju], axis=1), self.weights[vs])

    @classmethod
    def from_adjacency_matrix(cls, matrix, weights) -> VertexWeightedGraph:
        matrix = np.asarray(matrix, dtype=bool)
        iu, ju = np.nonzero(np.triu(matrix, 1))
        return cls(matrix.shape[0], np.stack([iu, ju], axis=1), weights)

    def __repr__(self):
        return f"VertexWeightedGraph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# text formats

def _content_lines(text):
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _ints(line, lineno, count):
    parts = line.split()
    if len(parts) != count:
        raise ParseError(f"expected {count} integer(s), got {line!r}", lineno)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"not an integer in {line!r}", lineno) from None


def load_graph(text: str | bytes) -> VertexWeightedGraph:
    """Parse the graph file format.

    Line 1 is ``n m``, then ``n`` weight lines, then ``m`` edge lines
    ``u v``.  Lines starting with ``#`` are comments.
    """
    lines = _content_lines(text)
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise ParseError("empty graph file") from None
    n, m = _ints(line, lineno, 2)
    if n < 0 or m < 0:
        raise ParseError("negative vertex or edge count", lineno)

    weights = []
    edges = []
    for lineno, line in lines:
        if len(weights) < n:
            (w,) = _ints(line, lineno, 1)
            if w < 0:
                raise ValidationError(f"line {lineno}: negative weight {w}")
            weights.append(w)
        elif len(edges) < m:
            u, v = _ints(line, lineno, 2)
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"vertex index out of range in {line!r}", lineno)
            edges.append((u, v))
        else:
            raise ParseError("unexpected trailing content", lineno)
    if len(weights) < n:
        raise ParseError(f"expected {n} weights, found {len(weights)}")
    if len(edges) < m:
        raise ParseError(f"expected {m} edges, found {len(edges)}")
    return VertexWeightedGraph(n, edges, weights)


def dump_graph(g: VertexWeightedGraph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(str(int(w)) for w in g.weights)
    out.extend(f"{u} {v}" for u, v in g.edges().tolist())
    return "\n".join(out) + "\n"


def load_weights(text: str | bytes) -> np.ndarray:
    """One non-negative integer per line (``#`` comments allowed)."""
    weights = []
    for lineno, line in _content_lines(text):
        for tok in line.split():
            try:
                w = int(tok)
            except ValueError:
                raise ParseError(f"not an integer: {tok!r}", lineno) from None
            if w < 0:
                raise ValidationError(f"line {lineno}: negative weight {w}")
            weights.append(w)
    return np.array(weights, dtype=np.int64)


def format_matrix(matrix: np.ndarray) -> str:
    """n lines of n tab-separated entries, ``inf`` for INF."""
    rows = []
    for row in np.asarray(matrix).tolist():
        rows.append("\t".join("inf" if x >= INF else str(x) for x in row))
    return "\n".join(rows) + ("\n" if rows else "")


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for lineno, line in _content_lines(text):
        try:
            rows.append([INF if tok == "inf" else int(tok) for tok in line.split("\t")])
        except ValueError:
            raise ParseError(f"bad matrix entry in {line!r}", lineno) from None
    if any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix is not square")
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(rows))


# ---------------------------------------------------------------------------
# oracles

def oracle_sssp(g: VertexWeightedGraph, source: int) -> list[int]:
    """Vertex-weighted Dijkstra from ``source``.

    Entering vertex ``v`` costs ``w(v)``; the source itself costs ``w(source)``.
    """
    if not 0 <= source < g.n:
        raise IndexError(f"source {source} out of range")
    w = g.weights.tolist()
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    dist = [INF] * g.n
    dist[source] = w[source]
    heap = [(dist[source], source)]
    done = [False] * g.n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in indices[indptr[u]:indptr[u + 1]]:
            nd = d + w[v]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _reduction_csgraph(g: VertexWeightedGraph) -> csr_matrix:
    # Arc u->v costs w(v).  Explicit zeros are kept by csgraph as real arcs.
    data = g.weights[g.indices].astype(np.float64)
    return csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))


def reduction_apsp(g: VertexWeightedGraph, sources: Iterable[int] | None = None) -> np.ndarray:
    """APSP through the directed edge-weighted reduction (scipy Dijkstra).

    Only exact while the total vertex weight is below 2**53.
    """
    if g.n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if int(g.weights.sum()) >= _FLOAT_EXACT:
        raise ValidationError("total weight too large for the floating-point reduction")
    idx = None if sources is None else np.asarray(list(sources), dtype=np.int64)
    d = dijkstra(_reduction_csgraph(g), directed=True, indices=idx)
    d = np.atleast_2d(d)
    rows = np.arange(g.n) if idx is None else idx
    out = np.full(d.shape, INF, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    out[finite] += np.broadcast_to(g.weights[rows][:, None], d.shape)[finite]
    return out


def oracle_apsp(g: VertexWeightedGraph) -> np.ndarray:
    """Ground-truth APSP matrix.

    Uses the edge-weighted reduction when it is exact, otherwise one
    ``oracle_sssp`` per source.
    """
    if g.n and int(g.weights.sum()) < _FLOAT_EXACT:
        return reduction_apsp(g)
    return np.array([oracle_sssp(g, s) for s in range(g.n)], dtype=np.int64).reshape(g.n, g.n)


def diameter(matrix: np.ndarray) -> int:
    """Largest off-diagonal entry; INF when disconnected, 0 when n <= 1."""
    m = np.asarray(matrix)
    n = m.shape[0]
    if n <= 1:
        return 0
    off = m[~np.eye(n, dtype=bool)]
    return int(off.max())


def checksum(matrix: np.ndarray) -> int:
    """Sum of finite entries modulo 2**64."""
    m = np.asarray(matrix, dtype=np.int64)
    return int(m[m < INF].astype(np.uint64).sum(dtype=np.uint64))
