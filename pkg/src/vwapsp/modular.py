"""Modular decomposition and weighted quotient graphs.

The decomposition follows the classical top-down characterization: a module
inducing a disconnected graph splits into its components (parallel node),
one whose complement is disconnected splits into the co-components (series
node), and otherwise its maximal proper modules form the children of a
prime node.  The prime case uses vertex-partition refinement around the
smallest vertex v followed by a forcing-graph argument to find the maximal
strong module containing v.  Worst case O(n^3); fine for the sizes used
here and isolated behind ``modular_decomposition``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidPartition
from .graph import VertexWeightedGraph

LEAF, PARALLEL, SERIES, PRIME = "leaf", "parallel", "series", "prime"


@dataclass(eq=False)
class MdNode:
    kind: str
    vertices: np.ndarray                   # sorted vertex ids of the module
    children: list = field(default_factory=list)
    quotient: np.ndarray | None = None     # (l, l) bool adjacency between children

    @property
    def size(self) -> int:
        return int(self.vertices.shape[0])

    def is_leaf(self) -> bool:
        return self.kind == LEAF

    def __repr__(self):
        if self.is_leaf():
            return f"MdNode(leaf {int(self.vertices[0])})"
        return f"MdNode({self.kind}, size={self.size}, children={len(self.children)})"


def iter_nodes(root: MdNode):
    """Pre-order iteration, children in stored order."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def leaf_order(root: MdNode) -> np.ndarray:
    """Vertices in left-to-right leaf order; every module is contiguous in it."""
    return np.array([int(nd.vertices[0]) for nd in iter_nodes(root) if nd.is_leaf()], dtype=np.int64)


def _components(adj):
    ncomp, labels = connected_components(csr_matrix(adj), directed=False)
    if ncomp == 1:
        return None
    # scipy numbers components by their smallest index, so this is min-id order
    return [np.nonzero(labels == c)[0] for c in range(ncomp)]


def _refine(adj, first):
    """Maximal modules of the graph ``adj`` that avoid vertex ``first``.

    Start from one part holding everything but ``first`` and split parts by
    their members' adjacency towards the rest until every part is a module.
    A split never separates two vertices of a common module avoiding
    ``first``, so the stable parts are the maximal ones.
    """
    m = adj.shape[0]
    parts = [np.setdiff1d(np.arange(m), [first])]
    changed = True
    while changed:
        changed = False
        nxt = []
        for part in parts:
            if part.shape[0] > 1:
                outside = np.ones(m, dtype=bool)
                outside[part] = False
                rows = np.packbits(adj[np.ix_(part, np.nonzero(outside)[0])], axis=1)
                _, groups = np.unique(rows, axis=0, return_inverse=True)
                groups = groups.reshape(-1)
                if groups.max() > 0:
                    changed = True
                    nxt.extend(part[groups == g] for g in range(groups.max() + 1))
                    continue
            nxt.append(part)
        parts = nxt
    return parts


def _prime_children(adj):
    """Maximal strong modules of a graph whose graph and complement are connected."""
    v = 0
    parts = _refine(adj, v)
    reps = np.array([int(p[0]) for p in parts])
    # part X forces Y when Y distinguishes X from v
    h = adj[np.ix_(reps, reps)]
    hv = adj[reps, v]
    force = (h != hv[:, None]).T
    np.fill_diagonal(force, False)
    ncomp, labels = connected_components(csr_matrix(force), directed=True, connection="strong")
    into = np.zeros(ncomp, dtype=bool)
    src, dst = np.nonzero(force)
    into[labels[dst][labels[src] != labels[dst]]] = True
    sources = np.nonzero(~into)[0]
    if sources.shape[0] != 1:
        raise RuntimeError("prime split found no unique source component")
    outer = labels == sources[0]
    children = [parts[i] for i in np.nonzero(outer)[0]]
    inner = [parts[i] for i in np.nonzero(~outer)[0]]
    children.append(np.concatenate([[v]] + inner).astype(np.int64))
    return children


def modular_decomposition(g: VertexWeightedGraph) -> MdNode:
    """Modular decomposition tree; children ordered by smallest vertex id."""
    if g.n < 1:
        raise ValueError("modular decomposition needs at least one vertex")
    adj = g.adjacency_matrix()
    root = MdNode(LEAF, np.arange(g.n, dtype=np.int64))
    stack = [root]
    while stack:
        node = stack.pop()
        verts = node.vertices
        if verts.shape[0] == 1:
            node.kind = LEAF
            continue
        sub = adj[np.ix_(verts, verts)]
        comps = _components(sub)
        if comps is not None:
            node.kind = PARALLEL
        else:
            co = ~sub
            np.fill_diagonal(co, False)
            comps = _components(co)
            if comps is not None:
                node.kind = SERIES
            else:
                node.kind = PRIME
                comps = _prime_children(sub)
        groups = sorted((np.sort(verts[c]) for c in comps), key=lambda a: int(a[0]))
        node.children = [MdNode(LEAF, grp) for grp in groups]
        reps = np.array([int(grp[0]) for grp in groups])
        node.quotient = adj[np.ix_(reps, reps)].copy()
        stack.extend(node.children)
    return root


def modular_width(tree: MdNode) -> int:
    """max(2, largest number of children of a prime node)."""
    widths = [len(nd.children) for nd in iter_nodes(tree) if nd.kind == PRIME]
    return max([2] + widths)


def is_module(g: VertexWeightedGraph, vertices) -> bool:
    """True iff every vertex outside the set sees all of it or none of it."""
    vs = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if vs.shape[0] <= 1:
        return True
    outside = np.ones(g.n, dtype=bool)
    outside[vs] = False
    seen = g.adjacency_matrix()[np.ix_(np.nonzero(outside)[0], vs)].sum(axis=1)
    return bool(np.all((seen == 0) | (seen == vs.shape[0])))


@dataclass
class WeightedQuotientGraph:
    parts: list             # sorted vertex arrays, one per quotient vertex
    adjacency: np.ndarray   # (l, l) bool
    weights: np.ndarray     # min weight inside each part
    reps: np.ndarray        # a minimum-weight vertex per part (smallest id on ties)

    @property
    def size(self) -> int:
        return len(self.parts)


def weighted_quotient(g: VertexWeightedGraph, partition) -> WeightedQuotientGraph:
    """Quotient over a modular partition, each part weighted by its minimum.

    Raises ``InvalidPartition`` when a part is empty, parts overlap, or a
    part is not a module of ``g``.
    """
    parts = [np.unique(np.asarray(list(p), dtype=np.int64)) for p in partition]
    if any(p.shape[0] == 0 for p in parts):
        raise InvalidPartition("empty part")
    allv = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    if np.unique(allv).shape[0] != allv.shape[0]:
        raise InvalidPartition("parts overlap")
    if allv.size and (allv.min() < 0 or allv.max() >= g.n):
        raise InvalidPartition("vertex out of range")
    for p in parts:
        if not is_module(g, p):
            raise InvalidPartition(f"{p.tolist()} is not a module")
    reps = np.array([int(p[np.argmin(g.weights[p])]) for p in parts], dtype=np.int64)
    weights = g.weights[reps].copy()
    adjacency = g.adjacency_matrix()[np.ix_(reps, reps)].copy()
    return WeightedQuotientGraph(parts, adjacency, weights, reps)


def node_quotient(g: VertexWeightedGraph, node: MdNode) -> WeightedQuotientGraph:
    """Weighted quotient of an internal decomposition node over its children."""
    return weighted_quotient(g, [c.vertices for c in node.children])


def summary(tree: MdNode) -> str:
    """One-line description such as ``series(3 leaves), mw=2``."""
    return f"{tree.kind}({tree.size} leaves), mw={modular_width(tree)}"


def format_tree(tree: MdNode) -> str:
    """Indented listing of internal nodes with child counts."""
    lines = []
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        if node.is_leaf():
            lines.append("  " * depth + f"leaf {int(node.vertices[0])}")
            continue
        lines.append("  " * depth + f"{node.kind}: {len(node.children)} children, {node.size} leaves")
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(lines) + "\n"


_SHAPES = {LEAF: "point", PARALLEL: "box", SERIES: "ellipse", PRIME: "doubleoctagon"}


def to_dot(tree: MdNode) -> str:
    """Graphviz rendering: shape by node kind, label = module size."""
    lines = ["digraph md {"]
    ids = {}
    for node in iter_nodes(tree):
        ids[id(node)] = len(ids)
        label = str(int(node.vertices[0])) if node.is_leaf() else f"{node.kind} {node.size}"
        lines.append(f'  n{ids[id(node)]} [shape={_SHAPES[node.kind]}, label="{label}"];')
    for node in iter_nodes(tree):
        for c in node.children:
            lines.append(f"  n{ids[id(node)]} -> n{ids[id(c)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
