import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import BIG, path_apsp, path_dist, random_graph
from vwapsp.generators import cograph, gnp, md_substitution
from vwapsp.graph import INF, VertexWeightedGraph, oracle_apsp
from vwapsp.modular import PRIME, iter_nodes, modular_decomposition
from vwapsp.mw_apsp import apsp_mw, capped_apsp, cross_module_dist, module_hops, quotient_apsp

seeds = st.integers(0, 2**32 - 1)


def small_graph(seed, n, p, wmax=9):
    rng = np.random.default_rng(seed)
    adj = random_graph(rng, n, p)
    return VertexWeightedGraph.from_adjacency_matrix(adj, rng.integers(0, wmax + 1, n)), adj


def mask_of(n, vertices):
    m = np.zeros(n, dtype=bool)
    m[vertices] = True
    return m


# --- examples ------------------------------------------------------------------

def test_apsp_examples():
    assert apsp_mw(VertexWeightedGraph(1, [], [5])).tolist() == [[5]]
    assert apsp_mw(VertexWeightedGraph(2, [(0, 1)], [2, 3])).tolist() == [[2, 5], [5, 3]]
    assert apsp_mw(VertexWeightedGraph(0, [], [])).shape == (0, 0)


def test_two_edge_detour():
    # {a, b} is a module seen by c; without the a-b edge the detour through c is forced
    g = VertexWeightedGraph(3, [(0, 2), (1, 2)], [1, 1, 5])
    assert apsp_mw(g)[0, 1] == 7
    g = VertexWeightedGraph(3, [(0, 1), (0, 2), (1, 2)], [1, 1, 5])
    assert apsp_mw(g)[0, 1] == 2


def test_cross_module_dist_examples():
    q = np.array([[2, 5], [5, 3]])
    assert cross_module_dist(q, 0, 1, 2, 3, 2, 3) == 5
    assert cross_module_dist(np.array([[1, INF], [INF, 1]]), 0, 1, 1, 1, 1, 1) == INF
    # quotient path q_i - q_mid - q_j with weights (1, 5, 1), endpoints of weight 4
    adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
    qd = quotient_apsp(adj, np.array([1, 5, 1]))
    assert qd[0, 2] == 7
    assert cross_module_dist(qd, 0, 2, 4, 4, 1, 1) == 13
    # expanded graph: modules {0, 1} (weights 1, 4), {2} (5), {3, 4} (1, 4)
    g = VertexWeightedGraph(5, [(0, 2), (1, 2), (2, 3), (2, 4)], [1, 4, 5, 1, 4])
    assert oracle_apsp(g)[1, 4] == 13 == apsp_mw(g)[1, 4]


def test_quotient_apsp_examples():
    assert quotient_apsp(np.zeros((2, 2), dtype=bool), np.array([3, 4])).tolist() == [[3, INF], [INF, 4]]
    tri = ~np.eye(3, dtype=bool)
    assert quotient_apsp(tri, np.array([1, 2, 3])).tolist() == [[1, 3, 4], [3, 2, 5], [4, 5, 3]]


def test_capped_examples():
    g = gnp(12, 0.4, 1)
    tree = modular_decomposition(g)
    zero = capped_apsp(g, tree, 0)
    assert np.all(zero == 0)
    full = capped_apsp(g, tree, INF)
    assert np.array_equal(full, oracle_apsp(g))


# --- against brute force -----------------------------------------------------------

@given(seeds, st.integers(1, 8), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_quotient_apsp_matches_paths(seed, n, p):
    rng = np.random.default_rng(seed)
    adj = random_graph(rng, n, p)
    w = rng.integers(0, 20, n)
    assert np.array_equal(quotient_apsp(adj, w), path_apsp(adj, w))


@given(seeds, st.integers(1, 9), st.floats(0, 1), st.data())
@settings(max_examples=100, deadline=None)
def test_capped_apsp_per_module(seed, n, p, data):
    g, adj = small_graph(seed, n, p)
    tree = modular_decomposition(g)
    nodes = list(iter_nodes(tree))
    node = nodes[data.draw(st.integers(0, len(nodes) - 1))]
    cap = data.draw(st.integers(0, 40))
    inside = path_apsp(adj, g.weights, allowed=mask_of(n, node.vertices))
    want = np.minimum(inside[np.ix_(node.vertices, node.vertices)], cap)
    out = np.full((n, n), -1, dtype=np.int64)
    got = capped_apsp(g, node, cap, out=out)
    assert np.array_equal(got, want)
    assert np.array_equal(out[np.ix_(node.vertices, node.vertices)], want)
    # cap monotonicity
    low = data.draw(st.integers(0, cap))
    assert np.array_equal(capped_apsp(g, node, low), np.minimum(got, low))


@given(seeds, st.integers(1, 9), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_hops_are_lightest_outside_neighbours(seed, n, p):
    g, adj = small_graph(seed, n, p)
    tree = modular_decomposition(g)
    hops = module_hops(g, tree)
    for node in iter_nodes(tree):
        inside = mask_of(n, node.vertices)
        seen = adj[node.vertices].any(axis=0) & ~inside
        want = int(g.weights[seen].min()) if seen.any() else INF
        assert hops[id(node)] == want


def _walk_nodes(g, adj, check):
    tree = modular_decomposition(g)
    for node in iter_nodes(tree):
        if node.children:
            check(node)


@given(seeds, st.integers(2, 10), st.floats(0.1, 0.9))
@settings(max_examples=80, deadline=None)
def test_witness_paths_visit_each_child_once(seed, n, p):
    g, adj = small_graph(seed, n, p)
    w = g.weights

    def check(node):
        group = np.full(n, -1)
        for i, c in enumerate(node.children):
            group[c.vertices] = i
        allowed = mask_of(n, node.vertices)
        for ci in range(len(node.children)):
            for cj in range(ci + 1, len(node.children)):
                for u in node.children[ci].vertices:
                    for v in node.children[cj].vertices:
                        free = path_dist(adj, w, u, v, allowed)
                        once = path_dist(adj, w, u, v, allowed, group=group)
                        assert free == once

    _walk_nodes(g, adj, check)


@given(seeds, st.integers(2, 7), st.floats(0.1, 0.9))
@settings(max_examples=80, deadline=None)
def test_cross_module_formula(seed, n, p):
    g, adj = small_graph(seed, n, p)
    w = g.weights

    def check(node):
        kids = node.children
        wstar = np.array([w[c.vertices].min() for c in kids])
        qd = path_apsp(node.quotient, wstar)
        inside = path_apsp(adj, w, allowed=mask_of(n, node.vertices))
        for i, ci in enumerate(kids):
            for j, cj in enumerate(kids):
                if i != j:
                    for u in ci.vertices:
                        for v in cj.vertices:
                            assert cross_module_dist(qd, i, j, w[u], w[v], wstar[i], wstar[j]) == inside[u, v]

    _walk_nodes(g, adj, check)


@given(seeds, st.integers(2, 10), st.floats(0.1, 0.9))
@settings(max_examples=80, deadline=None)
def test_same_module_dichotomy(seed, n, p):
    g, adj = small_graph(seed, n, p)
    w = g.weights

    def check(node):
        kids = node.children
        wstar = np.array([w[c.vertices].min() for c in kids])
        inside = path_apsp(adj, w, allowed=mask_of(n, node.vertices))
        for i, ci in enumerate(kids):
            nbrs = node.quotient[i]
            k_i = int(wstar[nbrs].min()) if nbrs.any() else BIG
            deeper = path_apsp(adj, w, allowed=mask_of(n, ci.vertices))
            for u in ci.vertices:
                for v in ci.vertices:
                    if u != v:
                        assert inside[u, v] == min(deeper[u, v], int(w[u]) + k_i + int(w[v]))

    _walk_nodes(g, adj, check)


@given(seeds, st.integers(1, 40), st.floats(0, 1), st.sampled_from([0, 1, 100, 10**6]))
@settings(max_examples=100, deadline=None)
def test_matches_oracle_on_gnp(seed, n, p, wmax):
    g = gnp(n, p, seed, wmax=wmax)
    assert np.array_equal(apsp_mw(g), oracle_apsp(g))


@given(seeds, st.integers(1, 80), st.integers(2, 12))
@settings(max_examples=80, deadline=None)
def test_matches_oracle_on_substitution_graphs(seed, n, mw):
    g = md_substitution(n, mw, seed, wmax=10**6)
    tree = modular_decomposition(g)
    assert np.array_equal(apsp_mw(g, tree), oracle_apsp(g))
    assert np.array_equal(apsp_mw(g), apsp_mw(g, tree))


@given(seeds, st.integers(1, 80))
@settings(max_examples=50, deadline=None)
def test_matches_oracle_on_cographs(seed, n):
    g = cograph(n, seed)
    tree = modular_decomposition(g)
    assert all(nd.kind != PRIME for nd in iter_nodes(tree))
    assert np.array_equal(apsp_mw(g), oracle_apsp(g))
