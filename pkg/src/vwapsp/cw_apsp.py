"""Vertex-weighted APSP over an NLC k-expression in O(k^2 n^2).

Three passes over the (normalized) expression tree:

1. bottom-up: for every node x the label-set distance matrix ``c`` (k x k)
   and the vertex-to-label-set table ``a`` (|V(G^x)| x k), both inside G^x.
   At a join the 4k-vertex auxiliary digraph H is solved by Floyd-Warshall.
2. top-down: tables ``d`` giving, for v in G^x, the cheapest walk in the
   whole graph G that ends right before entering label set i of a child
   from outside that child (the entered vertex's weight is excluded).
3. at every join, distances between the two sides: ``min_i d[u,i] + a_z[v,i]``.

Labels are 0-based internally.  Aux-graph vertex indices: ``v^y_i = i``,
``u^y_i = k + i``, ``v^z_i = 2k + i``, ``u^z_i = 3k + i``.

``apsp_cw`` runs the numba engine.  The ``phase*`` functions are readable
numpy versions of the individual steps; ``apsp_cw_reference`` composes them
and can record every intermediate table for testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numba.typed import List

from .errors import ValidationError
from .expressions import CwExpr, Join, NlcExpr, Rel, Vert, cw_to_nlc, normalize_nlc, postorder
from .graph import INF, WEIGHT_LIMIT

VERT, REL, JOIN = 0, 1, 2


# ---------------------------------------------------------------------------
# public step functions (numpy)

@dataclass
class Phase1State:
    c: np.ndarray  # (k, k)
    a: np.ndarray  # (|V(G^x)|, k)


@dataclass
class AuxJoinGraph:
    k: int
    cy: np.ndarray
    cz: np.ndarray
    pairs: frozenset
    arcs: np.ndarray  # (4k, 4k) arc costs, INF where no arc, 0 diagonal
    dist: np.ndarray  # (4k, 4k) all-pairs distances, 0 diagonal

    def v(self, side: str, i: int) -> int:
        return (0 if side == "y" else 2 * self.k) + i

    def u(self, side: str, i: int) -> int:
        return (self.k if side == "y" else 3 * self.k) + i


@dataclass
class Phase2State:
    """``to_y[v, i]`` and ``to_z[v, i]`` for every v of G^x in leaf order."""
    to_y: np.ndarray
    to_z: np.ndarray


def _sat(m):
    return np.minimum(m, INF)


def _minplus(a, b):
    """(a (x) b)[r, i] = min_j a[r, j] + b[j, i], saturating."""
    if a.shape[0] == 0:
        return np.empty((0, b.shape[1]), dtype=np.int64)
    return _sat((a[:, :, None] + b[None, :, :]).min(axis=1))


def _map0(mapping) -> np.ndarray:
    return np.asarray(mapping, dtype=np.int64) - 1


def phase1_leaf(label: int, weight: int, k: int) -> Phase1State:
    c = np.full((k, k), INF, dtype=np.int64)
    a = np.full((1, k), INF, dtype=np.int64)
    c[label - 1, label - 1] = weight
    a[0, label - 1] = weight
    return Phase1State(c, a)


def phase1_relabel(child: Phase1State, mapping) -> Phase1State:
    """Relabel by the total map ``i -> mapping[i - 1]``: minima over preimages."""
    r = _map0(mapping)
    k = r.shape[0]
    c = np.full((k, k), INF, dtype=np.int64)
    np.minimum.at(c, (r[:, None], r[None, :]), child.c)
    a = np.full(child.a.shape, INF, dtype=np.int64)
    for j in range(k):
        np.minimum(a[:, r[j]], child.a[:, j], out=a[:, r[j]])
    return Phase1State(c, a)


def build_aux_graph(cy: np.ndarray, cz: np.ndarray, pairs) -> AuxJoinGraph:
    k = cy.shape[0]
    h = np.full((4 * k, 4 * k), INF, dtype=np.int64)
    h[0:k, k:2 * k] = cy
    h[2 * k:3 * k, 3 * k:4 * k] = cz
    for a, b in pairs:
        h[k + a - 1, 2 * k + b - 1] = 0
        h[3 * k + b - 1, a - 1] = 0
    np.fill_diagonal(h, 0)
    arcs = h.copy()
    for p in range(4 * k):
        h = np.minimum(h, _sat(h[:, p:p + 1] + h[p:p + 1, :]))
    return AuxJoinGraph(k, cy.copy(), cz.copy(), frozenset(pairs), arcs, h)


def _blocks(aux):
    k = aux.k
    d = aux.dist
    vy, uy, vz, uz = (slice(s * k, (s + 1) * k) for s in range(4))
    return d, vy, uy, vz, uz


def phase1_join(aux: AuxJoinGraph, ay: np.ndarray, az: np.ndarray) -> Phase1State:
    d, vy, uy, vz, uz = _blocks(aux)
    c = np.minimum.reduce([d[vy, uy], d[vy, uz], d[vz, uy], d[vz, uz]])
    my = np.minimum(d[uy, uy], d[uy, uz])
    mz = np.minimum(d[uz, uz], d[uz, uy])
    return Phase1State(c, np.vstack([_minplus(ay, my), _minplus(az, mz)]))


def _empty_labels(c):
    return np.diagonal(c) >= INF


def phase2_join(parent: np.ndarray | None, aux: AuxJoinGraph, ay: np.ndarray, az: np.ndarray) -> Phase2State:
    """Distances into the label sets of both children for every vertex of G^x.

    ``parent[v, i]`` holds the parent's value for this node's label i, or
    ``None`` at the root.  Entries for empty label sets are INF.
    """
    d, vy, uy, vz, uz = _blocks(aux)
    ny, nz = ay.shape[0], az.shape[0]
    if parent is None:
        parent = np.full((ny + nz, aux.k), INF, dtype=np.int64)
    py, pz = parent[:ny], parent[ny:]
    out = []
    for beta, vb, empty in (("y", vy, _empty_labels(aux.cy)), ("z", vz, _empty_labels(aux.cz))):
        via = np.minimum(d[vy, vb], d[vz, vb])
        rows_y = np.minimum.reduce([py, _minplus(ay, d[uy, vb]), _minplus(py, via)])
        rows_z = np.minimum.reduce([pz, _minplus(az, d[uz, vb]), _minplus(pz, via)])
        t = np.vstack([rows_y, rows_z])
        t[:, empty] = INF
        out.append(t)
    return Phase2State(out[0], out[1])


def phase2_root(aux: AuxJoinGraph, ay: np.ndarray, az: np.ndarray) -> Phase2State:
    return phase2_join(None, aux, ay, az)


def phase2_relabel(parent: np.ndarray, mapping) -> np.ndarray:
    """``d[v, i] = parent[v, R(i)]``."""
    return parent[:, _map0(mapping)]


def phase3_pairs(to_z: np.ndarray, ny: int, az: np.ndarray) -> np.ndarray:
    """Distance block between the left side (rows) and the right side (columns)."""
    return _minplus(to_z[:ny], az.T)


# ---------------------------------------------------------------------------
# reference driver (composes the public steps)

@dataclass
class JoinTrace:
    node: Join
    lo: int
    ny: int
    nz: int
    aux: AuxJoinGraph
    ay: np.ndarray
    az: np.ndarray
    parent: np.ndarray  # parent d values over G^x (INF at the root)
    state: Phase2State


@dataclass
class CwTrace:
    expr: NlcExpr  # the normalized expression the trace refers to
    phase1: dict = field(default_factory=dict)  # id(node) -> (lo, Phase1State)
    joins: list = field(default_factory=list)   # JoinTrace, top-down order


def _check_weights(n, weights):
    w = np.asarray(weights, dtype=np.int64).reshape(-1)
    if w.shape[0] != n:
        raise ValidationError(f"expression has {n} leaves but {w.shape[0]} weights were given")
    if n and w.min() < 0:
        raise ValidationError("negative vertex weight")
    if sum(int(x) for x in w) >= WEIGHT_LIMIT:
        raise ValidationError("total vertex weight must stay below 2**61")
    return w


def _as_nlc(t):
    if isinstance(t, CwExpr):
        return cw_to_nlc(t)
    if not isinstance(t, NlcExpr):
        raise ValidationError(f"expected an expression, got {type(t).__name__}")
    return t


def apsp_cw_reference(t, weights, trace: CwTrace | None = None) -> np.ndarray:
    """Same result as ``apsp_cw``, built from the numpy step functions.

    Slow; meant for testing.  When ``trace`` is given, it receives the
    normalized expression, every node's phase-1 tables and every join's
    auxiliary graph and phase-2 tables.
    """
    t = normalize_nlc(_as_nlc(t))
    n = t.n
    w = _check_weights(n, weights)
    k = t.k
    if trace is not None:
        trace.expr = t

    # phase 1 (post-order).  Rel and Join objects of a normalized tree are
    # never shared, so their ids are safe keys.
    p1 = {}
    aux_of = {}
    vals = []
    nxt = 0
    for node in postorder(t.root):
        if isinstance(node, Vert):
            st = phase1_leaf(node.label, int(w[nxt]), k)
            lo = nxt
            nxt += 1
        elif isinstance(node, Rel):
            lo, child = vals.pop()
            st = phase1_relabel(child, node.mapping)
        else:
            _, sz = vals.pop()
            lo, sy = vals.pop()
            aux = build_aux_graph(sy.c, sz.c, node.pairs)
            st = phase1_join(aux, sy.a, sz.a)
            aux_of[id(node)] = aux
        vals.append((lo, st))
        if not isinstance(node, Vert):
            p1[id(node)] = st
            if trace is not None:
                trace.phase1[id(node)] = (lo, st)

    # phases 2 and 3 (pre-order); stack of (Rel node, lo, d over its vertices)
    out = np.full((n, n), INF, dtype=np.int64)
    stack = [(t.root, 0, np.full((n, k), INF, dtype=np.int64))]
    while stack:
        rel, lo, d_rel = stack.pop()
        x = rel.child
        if isinstance(x, Vert):
            continue
        parent = phase2_relabel(d_rel, rel.mapping)
        y, z = x.left, x.right
        aux = aux_of[id(x)]
        ay, az = p1[id(y)].a, p1[id(z)].a
        ny = ay.shape[0]
        st = phase2_join(parent, aux, ay, az)
        out[lo:lo + ny, lo + ny:lo + ny + az.shape[0]] = phase3_pairs(st.to_z, ny, az)
        if trace is not None:
            trace.joins.append(JoinTrace(x, lo, ny, az.shape[0], aux, ay, az, parent, st))
        stack.append((z, lo + ny, st.to_z[ny:]))
        stack.append((y, lo, st.to_y[:ny]))
    iu = np.triu_indices(n, 1)
    out.T[iu] = out[iu]
    out[np.arange(n), np.arange(n)] = w
    return out


# ---------------------------------------------------------------------------
# numba engine

def _flatten(t: NlcExpr):
    """Normalize and flatten into post-order arrays in a single pass.

    Every join operand and the root become exactly one REL entry whose map
    is the composition of the relabelings in between.
    """
    k = t.k
    ident = tuple(range(k))
    kind, ch0, ch1, lab, lo, sz, maps, pairs = [], [], [], [], [], [], [], []
    rows = (kind, ch0, ch1, lab, lo, sz, maps)

    vals = []
    nxt = 0
    for node in postorder(t.root):
        tp = type(node)
        if tp is Vert:
            for col, x in zip(rows, (VERT, -1, -1, node.label - 1, nxt, 1, ident)):
                col.append(x)
            vals.append((len(kind) - 1, ident))
            nxt += 1
        elif tp is Rel:
            core, r = vals[-1]
            m = node.mapping
            vals[-1] = (core, tuple([m[i] - 1 for i in r]))
        else:
            rcore, rmap = vals.pop()
            lcore, lmap = vals.pop()
            base = len(kind)
            first = lo[lcore]
            total = sz[lcore] + sz[rcore]
            kind += (REL, REL, JOIN)
            ch0 += (lcore, rcore, base)
            ch1 += (-1, -1, base + 1)
            lab += (-1, -1, len(pairs))
            lo += (first, lo[rcore], first)
            sz += (sz[lcore], sz[rcore], total)
            maps += (lmap, rmap, ident)
            pairs.append(node.pairs)
            vals.append((base + 2, ident))
    core, r = vals.pop()
    for col, x in zip(rows, (REL, core, -1, -1, lo[core], sz[core], r)):
        col.append(x)

    kind = np.array(kind, dtype=np.int64)
    size = np.array(sz, dtype=np.int64)
    smat = np.zeros((max(len(pairs), 1), k, k), dtype=np.bool_)
    for j, s in enumerate(pairs):
        for a, b in s:
            smat[j, a - 1, b - 1] = True
    alen = np.where(kind == REL, size * k, 0)
    aoff = np.zeros(len(kind), dtype=np.int64)
    np.cumsum(alen[:-1], out=aoff[1:])
    return (kind, np.array(ch0, dtype=np.int64), np.array(ch1, dtype=np.int64),
            np.array(lab, dtype=np.int64), np.array(lo, dtype=np.int64), size,
            np.array(maps, dtype=np.int64).reshape(len(kind), k), smat, aoff, int(alen.sum()))


@njit(cache=True)
def _floyd_warshall(h):
    m = h.shape[0]
    for p in range(m):
        for i in range(m):
            hip = h[i, p]
            if hip >= INF:
                continue
            for j in range(m):
                s = hip + h[p, j]
                if s < h[i, j]:
                    h[i, j] = s


@njit(cache=True)
def _fold_rows(src, m, r, dst):
    # dst[v, r[i]] = min(dst[v, r[i]], min_j src[v, j] + m[j, i])
    k = m.shape[0]
    row = np.empty(k, dtype=np.int64)
    for v in range(src.shape[0]):
        for i in range(k):
            best = INF
            for j in range(k):
                s = src[v, j] + m[j, i]
                if s < best:
                    best = s
            row[i] = best
        for i in range(k):
            if row[i] < dst[v, r[i]]:
                dst[v, r[i]] = row[i]


@njit(cache=True)
def _phase1(kind, ch0, ch1, lab, lo, size, relmap, smat, aoff, alen, w, k):
    nn = kind.shape[0]
    c = np.full((nn, k, k), INF, dtype=np.int64)
    hd = np.full((smat.shape[0], 4 * k, 4 * k), INF, dtype=np.int64)
    abuf = np.full(alen, INF, dtype=np.int64)
    my = np.empty((k, k), dtype=np.int64)
    mz = np.empty((k, k), dtype=np.int64)
    for x in range(nn):
        kd = kind[x]
        if kd == VERT:
            c[x, lab[x], lab[x]] = w[lo[x]]
        elif kd == REL:
            y = ch0[x]
            r = relmap[x]
            for i in range(k):
                for j in range(k):
                    if c[y, i, j] < c[x, r[i], r[j]]:
                        c[x, r[i], r[j]] = c[y, i, j]
            ax = abuf[aoff[x]:aoff[x] + size[x] * k].reshape((size[x], k))
            if kind[y] == VERT:
                ax[0, r[lab[y]]] = w[lo[y]]
            else:
                # the join's a-table is produced row by row and folded through r
                h = hd[lab[y]]
                ly, rz = ch0[y], ch1[y]
                for j in range(k):
                    for i in range(k):
                        my[j, i] = min(h[k + j, k + i], h[k + j, 3 * k + i])
                        mz[j, i] = min(h[3 * k + j, 3 * k + i], h[3 * k + j, k + i])
                ay = abuf[aoff[ly]:aoff[ly] + size[ly] * k].reshape((size[ly], k))
                az = abuf[aoff[rz]:aoff[rz] + size[rz] * k].reshape((size[rz], k))
                _fold_rows(ay, my, r, ax[:size[ly]])
                _fold_rows(az, mz, r, ax[size[ly]:])
        else:
            y, z = ch0[x], ch1[x]
            h = hd[lab[x]]
            s = smat[lab[x]]
            for i in range(k):
                for j in range(k):
                    h[i, k + j] = c[y, i, j]
                    h[2 * k + i, 3 * k + j] = c[z, i, j]
                    if s[i, j]:
                        h[k + i, 2 * k + j] = 0
                        h[3 * k + j, i] = 0
            for p in range(4 * k):
                h[p, p] = 0
            _floyd_warshall(h)
            for i in range(k):
                for j in range(k):
                    c[x, i, j] = min(min(h[i, k + j], h[i, 3 * k + j]),
                                     min(h[2 * k + i, k + j], h[2 * k + i, 3 * k + j]))
    return c, hd, abuf


@njit(cache=True)
def _down_rows(par, a, ua, via, empty, out):
    # out[v, i] = min(par[v, i], min_j a[v, j] + ua[j, i], min_j par[v, j] + via[j, i])
    k = ua.shape[0]
    for v in range(a.shape[0]):
        for i in range(k):
            if empty[i]:
                out[v, i] = INF
                continue
            best = par[v, i]
            for j in range(k):
                s = a[v, j] + ua[j, i]
                if s < best:
                    best = s
                s = par[v, j] + via[j, i]
                if s < best:
                    best = s
            out[v, i] = best


@njit(cache=True)
def _phase23(kind, ch0, ch1, lab, lo, size, relmap, c, hd, abuf, aoff, w, n, k):
    nn = kind.shape[0]
    out = np.full((n, n), INF, dtype=np.int64)
    dtab = List()
    for _ in range(nn):
        dtab.append(np.empty((0, k), dtype=np.int64))
    dtab[nn - 1] = np.full((n, k), INF, dtype=np.int64)
    uyy = np.empty((k, k), dtype=np.int64)
    uyz = np.empty((k, k), dtype=np.int64)
    uzz = np.empty((k, k), dtype=np.int64)
    vy = np.empty((k, k), dtype=np.int64)
    vz = np.empty((k, k), dtype=np.int64)
    ey = np.empty(k, dtype=np.bool_)
    ez = np.empty(k, dtype=np.bool_)
    # parents have larger indices than children, so descending order is top-down
    for x in range(nn - 1, -1, -1):
        kd = kind[x]
        if kd == REL:
            y = ch0[x]
            if kind[y] == JOIN:
                par = dtab[x]
                r = relmap[x]
                q = np.empty((size[x], k), dtype=np.int64)
                for v in range(size[x]):
                    for i in range(k):
                        q[v, i] = par[v, r[i]]
                dtab[y] = q
            dtab[x] = np.empty((0, k), dtype=np.int64)
        elif kd == JOIN:
            par = dtab[x]
            y, z = ch0[x], ch1[x]
            ny, nz = size[y], size[z]
            h = hd[lab[x]]
            for j in range(k):
                for i in range(k):
                    uyy[j, i] = h[k + j, i]
                    uyz[j, i] = h[k + j, 2 * k + i]
                    uzz[j, i] = h[3 * k + j, 2 * k + i]
                    vy[j, i] = min(h[j, i], h[2 * k + j, i])
                    vz[j, i] = min(h[j, 2 * k + i], h[2 * k + j, 2 * k + i])
            for i in range(k):
                ey[i] = c[y, i, i] >= INF
                ez[i] = c[z, i, i] >= INF
            ay = abuf[aoff[y]:aoff[y] + ny * k].reshape((ny, k))
            az = abuf[aoff[z]:aoff[z] + nz * k].reshape((nz, k))
            dy = np.empty((ny, k), dtype=np.int64)
            e = np.empty((ny, k), dtype=np.int64)
            dz = np.empty((nz, k), dtype=np.int64)
            _down_rows(par[:ny], ay, uyy, vy, ey, dy)
            _down_rows(par[:ny], ay, uyz, vz, ez, e)
            _down_rows(par[ny:], az, uzz, vz, ez, dz)
            base = lo[x]
            for u in range(ny):
                for v in range(nz):
                    best = INF
                    for i in range(k):
                        s = e[u, i] + az[v, i]
                        if s < best:
                            best = s
                    out[base + u, base + ny + v] = best
                    out[base + ny + v, base + u] = best
            dtab[y] = dy
            dtab[z] = dz
            dtab[x] = np.empty((0, k), dtype=np.int64)
    for v in range(n):
        out[v, v] = w[v]
    return out


def apsp_cw(t, weights) -> np.ndarray:
    """All-pairs vertex-weighted distances of the graph built by ``t``.

    ``t`` is an ``NlcExpr`` (normalized or not) or a ``CwExpr``, which is
    converted first.  ``weights[v]`` belongs to the v-th leaf in
    left-to-right order.  Returns an ``(n, n)`` int64 matrix with INF for
    disconnected pairs.
    """
    t = _as_nlc(t)
    kind, ch0, ch1, lab, lo, size, relmap, smat, aoff, alen = _flatten(t)
    n = int(size[-1])
    w = _check_weights(n, weights)
    c, hd, abuf = _phase1(kind, ch0, ch1, lab, lo, size, relmap, smat, aoff, alen, w, t.k)
    return _phase23(kind, ch0, ch1, lab, lo, size, relmap, c, hd, abuf, aoff, w, n, t.k)
