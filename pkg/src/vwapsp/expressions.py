"""Clique-width and NLC-width k-expression trees.

Labels are 1-based integers in ``[1, k]``.  Vertices of the evaluated graph
are numbered by leaf order (left-to-right), so a tree and any tree derived
from it by conversion or normalization evaluate to directly comparable
graphs.

All traversals are iterative; linear expressions thousands of levels deep
are fine.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Union as _U

import numpy as np

from .errors import ParseError, ValidationError
from .graph import VertexWeightedGraph


@dataclass(frozen=True, eq=False)
class Vert:
    label: int


# NLC-width operations

@dataclass(frozen=True, eq=False)
class Rel:
    """Relabel every vertex by the total map ``i -> mapping[i - 1]``."""
    mapping: tuple[int, ...]
    child: object


@dataclass(frozen=True, eq=False)
class Join:
    """Disjoint union plus all edges ``{u, v}``, u left, v right, ``(lab u, lab v) in pairs``."""
    pairs: frozenset
    left: object
    right: object


# clique-width operations

@dataclass(frozen=True, eq=False)
class Relabel:
    """Move label ``a`` to ``b``."""
    a: int
    b: int
    child: object


@dataclass(frozen=True, eq=False)
class Union:
    left: object
    right: object


@dataclass(frozen=True, eq=False)
class Eta:
    """Add all edges between labels ``a`` and ``b`` (``a != b``)."""
    a: int
    b: int
    child: object


NlcNode = _U[Vert, Rel, Join]
CwNode = _U[Vert, Relabel, Union, Eta]


def children(node) -> tuple:
    if isinstance(node, Vert):
        return ()
    if isinstance(node, (Rel, Relabel, Eta)):
        return (node.child,)
    return (node.left, node.right)


def postorder(root):
    """Yield nodes children-first, left subtree before right."""
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        stack.append((node, True))
        for c in reversed(children(node)):
            stack.append((c, False))


def count_leaves(root) -> int:
    return sum(1 for node in postorder(root) if isinstance(node, Vert))


class _Expr:
    kind = ""

    def __init__(self, k: int, root):
        if k < 1:
            raise ValidationError("width must be at least 1")
        self.k = k
        self.root = root
        self._validate()

    def __eq__(self, other):
        if not isinstance(other, _Expr):
            return NotImplemented
        return format_expr(self) == format_expr(other)

    def __hash__(self):
        return hash(format_expr(self))

    def __repr__(self):
        text = format_expr(self)
        if len(text) > 120:
            text = text[:117] + "..."
        return f"{type(self).__name__}({text!r})"

    @property
    def n(self) -> int:
        return count_leaves(self.root)

    def _check_label(self, label, what):
        if not isinstance(label, (int, np.integer)) or not 1 <= label <= self.k:
            raise ValidationError(f"{what} label {label!r} outside [1, {self.k}]")


class NlcExpr(_Expr):
    """NLC-width k-expression tree."""
    kind = "nlc"

    def _validate(self):
        for node in postorder(self.root):
            if isinstance(node, Vert):
                self._check_label(node.label, "vert")
            elif isinstance(node, Rel):
                if len(node.mapping) != self.k:
                    raise ValidationError(f"relabel map must be total on [1, {self.k}]")
                for r in node.mapping:
                    self._check_label(r, "rel target")
            elif isinstance(node, Join):
                for a, b in node.pairs:
                    self._check_label(a, "join")
                    self._check_label(b, "join")
            else:
                raise ValidationError(f"{type(node).__name__} is not an NLC operation")


class CwExpr(_Expr):
    """Clique-width k-expression tree."""
    kind = "cw"

    def _validate(self):
        for node in postorder(self.root):
            if isinstance(node, Vert):
                self._check_label(node.label, "vert")
            elif isinstance(node, (Relabel, Eta)):
                self._check_label(node.a, "operation")
                self._check_label(node.b, "operation")
                if isinstance(node, Eta) and node.a == node.b:
                    raise ValidationError(f"eta needs two distinct labels, got {node.a} twice")
            elif not isinstance(node, Union):
                raise ValidationError(f"{type(node).__name__} is not a clique-width operation")


def identity_map(k: int) -> tuple[int, ...]:
    return tuple(range(1, k + 1))


def compose(outer: tuple[int, ...], inner: tuple[int, ...]) -> tuple[int, ...]:
    """The map ``i -> outer(inner(i))``."""
    return tuple(outer[r - 1] for r in inner)


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class LabeledGraph:
    n: int
    edges: np.ndarray   # (m, 2), u < v, sorted
    labels: np.ndarray  # (n,), 1-based

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def label_sets(self, k: int) -> list[np.ndarray]:
        return [np.nonzero(self.labels == i)[0] for i in range(1, k + 1)]

    def to_graph(self, weights) -> VertexWeightedGraph:
        return VertexWeightedGraph(self.n, self.edges, weights)


def _finish_edges(parts, n, dedupe):
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    e = np.concatenate(parts)
    e = np.stack([e.min(axis=1), e.max(axis=1)], axis=1)
    keys = e[:, 0] * max(n, 1) + e[:, 1]
    if dedupe:
        keys = np.unique(keys)
    else:
        keys = np.sort(keys)
    return np.stack([keys // max(n, 1), keys % max(n, 1)], axis=1)


def _cross(us, vs):
    if us.size == 0 or vs.size == 0:
        return None
    return np.stack(np.meshgrid(us, vs, indexing="ij"), axis=-1).reshape(-1, 2)


def eval_nlc(expr: NlcExpr, on_join=None) -> LabeledGraph:
    """Evaluate an NLC expression to its labeled graph.

    ``on_join(node, lo, mid, hi, labels, new_edges)`` is called after each
    join with the leaf ranges of both operands, the labels in effect at the
    join and the edges it created (used for instrumented checks).
    """
    n = count_leaves(expr.root)
    lab = np.zeros(n, dtype=np.int64)
    parts = []
    ranges = []
    nxt = 0
    for node in postorder(expr.root):
        if isinstance(node, Vert):
            lab[nxt] = node.label
            ranges.append((nxt, nxt + 1))
            nxt += 1
        elif isinstance(node, Rel):
            lo, hi = ranges[-1]
            lab[lo:hi] = np.array((0,) + node.mapping)[lab[lo:hi]]
        else:
            mid, hi = ranges.pop()
            lo, _ = ranges.pop()
            ranges.append((lo, hi))
            created = []
            for a, b in node.pairs:
                e = _cross(np.nonzero(lab[lo:mid] == a)[0] + lo, np.nonzero(lab[mid:hi] == b)[0] + mid)
                if e is not None:
                    created.append(e)
            parts.extend(created)
            if on_join is not None:
                new = np.concatenate(created) if created else np.empty((0, 2), np.int64)
                on_join(node, lo, mid, hi, lab.copy(), new)
    return LabeledGraph(n, _finish_edges(parts, n, dedupe=False), lab)


def eval_cw(expr: CwExpr) -> LabeledGraph:
    """Evaluate a clique-width expression to its labeled graph."""
    n = count_leaves(expr.root)
    lab = np.zeros(n, dtype=np.int64)
    parts = []
    ranges = []
    nxt = 0
    for node in postorder(expr.root):
        if isinstance(node, Vert):
            lab[nxt] = node.label
            ranges.append((nxt, nxt + 1))
            nxt += 1
        elif isinstance(node, Relabel):
            lo, hi = ranges[-1]
            seg = lab[lo:hi]
            seg[seg == node.a] = node.b
        elif isinstance(node, Eta):
            lo, hi = ranges[-1]
            e = _cross(np.nonzero(lab[lo:hi] == node.a)[0] + lo, np.nonzero(lab[lo:hi] == node.b)[0] + lo)
            if e is not None:
                parts.append(e)
        else:
            mid, hi = ranges.pop()
            lo, _ = ranges.pop()
            ranges.append((lo, hi))
    return LabeledGraph(n, _finish_edges(parts, n, dedupe=True), lab)


def evaluate(expr) -> LabeledGraph:
    return eval_cw(expr) if isinstance(expr, CwExpr) else eval_nlc(expr)


# ---------------------------------------------------------------------------
# transformations

def cw_to_nlc(expr: CwExpr) -> NlcExpr:
    """Convert a clique-width expression into an NLC expression of the same width.

    Each union becomes a join whose pair set collects every label pair that
    some eta above it (seen through the relabelings in between) connects.
    Runs in O(k^2) per node.
    """
    k = expr.k
    out = []
    stack = [(expr.root, np.zeros((k, k), dtype=bool), False)]
    while stack:
        node, q, expanded = stack.pop()
        if isinstance(node, Vert):
            out.append(Vert(node.label))
            continue
        if not expanded:
            stack.append((node, q, True))
            if isinstance(node, Relabel):
                f = np.arange(k)
                f[node.a - 1] = node.b - 1
                stack.append((node.child, q[np.ix_(f, f)], False))
            elif isinstance(node, Eta):
                qc = q.copy()
                qc[node.a - 1, node.b - 1] = qc[node.b - 1, node.a - 1] = True
                stack.append((node.child, qc, False))
            else:
                stack.append((node.right, q, False))
                stack.append((node.left, q, False))
            continue
        if isinstance(node, Relabel):
            mapping = list(range(1, k + 1))
            mapping[node.a - 1] = node.b
            out.append(Rel(tuple(mapping), out.pop()))
        elif isinstance(node, Union):
            right = out.pop()
            left = out.pop()
            pairs = frozenset((int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(q)))
            out.append(Join(pairs, left, right))
        # eta nodes vanish; their edges live in the joins below
    return NlcExpr(k, out.pop())


def normalize_nlc(expr: NlcExpr) -> NlcExpr:
    """Rewrite so that the root and every join operand is exactly one Rel.

    Consecutive relabelings are fused by composition and identity maps are
    inserted where none was present.  The labeled evaluation is unchanged.
    """
    k = expr.k
    ident = identity_map(k)
    vals = []
    for node in postorder(expr.root):
        if isinstance(node, Vert):
            vals.append((node, ident))
        elif isinstance(node, Rel):
            core, r = vals.pop()
            vals.append((core, compose(node.mapping, r)))
        else:
            rcore, rmap = vals.pop()
            lcore, lmap = vals.pop()
            vals.append((Join(node.pairs, Rel(lmap, lcore), Rel(rmap, rcore)), ident))
    core, r = vals.pop()
    return NlcExpr(k, Rel(r, core))


def is_normalized(expr: NlcExpr) -> bool:
    if not isinstance(expr.root, Rel):
        return False
    for node in postorder(expr.root):
        if isinstance(node, Rel) and isinstance(node.child, Rel):
            return False
        if isinstance(node, Join) and not (isinstance(node.left, Rel) and isinstance(node.right, Rel)):
            return False
    return True


def expr_width(expr) -> int:
    """Largest label actually used (not the declared width).

    Counts leaf labels, join pairs, clique-width operation labels and the
    non-fixed points of NLC relabel maps.
    """
    used = {1}
    for node in postorder(expr.root):
        if isinstance(node, Vert):
            used.add(node.label)
        elif isinstance(node, Rel):
            for i, r in enumerate(node.mapping, start=1):
                if i != r:
                    used.update((i, r))
        elif isinstance(node, Join):
            for a, b in node.pairs:
                used.update((a, b))
        elif isinstance(node, (Relabel, Eta)):
            used.update((node.a, node.b))
    return max(used)


# ---------------------------------------------------------------------------
# random generation

def _split(rng, s, shape):
    if shape == "linear":
        return s - 1
    if shape == "balanced":
        return s // 2
    return rng.randint(1, s - 1)


def _random_map(rng, k):
    return tuple(i if rng.random() < 0.5 else rng.randint(1, k) for i in range(1, k + 1))


def random_nlc_expr(k: int, n: int, join_density: float, seed: int,
                    shape: str = "random", relabel_prob: float = 0.5) -> NlcExpr:
    """Random NLC expression with exactly ``n`` leaves.

    ``shape`` picks the split of leaves at each join: ``"random"`` (uniform
    split point), ``"balanced"`` or ``"linear"`` (every right operand is a
    single vertex).  Every join gets a non-empty pair set in which each of
    the ``k*k`` pairs appears with probability ``join_density``.  Operands
    are wrapped in a random relabeling with probability ``relabel_prob``.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    if shape not in ("random", "balanced", "linear"):
        raise ValueError(f"unknown shape {shape!r}")
    rng = random.Random(seed)

    def maybe_rel(node):
        if rng.random() < relabel_prob:
            return Rel(_random_map(rng, k), node)
        return node

    def random_pairs():
        pairs = {(a, b) for a in range(1, k + 1) for b in range(1, k + 1) if rng.random() < join_density}
        if not pairs:
            pairs.add((rng.randint(1, k), rng.randint(1, k)))
        return frozenset(pairs)

    out = []
    stack = [(n, 0, False)]
    while stack:
        s, left, expanded = stack.pop()
        if s == 1:
            out.append(maybe_rel(Vert(rng.randint(1, k))))
        elif not expanded:
            left = _split(rng, s, shape)
            stack.append((s, left, True))
            stack.append((s - left, 0, False))
            stack.append((left, 0, False))
        else:
            right = out.pop()
            lnode = out.pop()
            out.append(maybe_rel(Join(random_pairs(), lnode, right)))
    return NlcExpr(k, out.pop())


def random_cw_expr(k: int, n: int, seed: int, shape: str = "random", op_prob: float = 0.6) -> CwExpr:
    """Random clique-width expression with ``n`` leaves.

    Above every union (and leaf) a short random run of eta and relabel
    operations is inserted; each run step happens with probability ``op_prob``.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    rng = random.Random(seed)

    def decorate(node):
        while rng.random() < op_prob:
            a = rng.randint(1, k)
            b = rng.randint(1, k)
            if k >= 2 and a != b and rng.random() < 0.6:
                node = Eta(a, b, node)
            else:
                node = Relabel(a, b, node)
        return node

    out = []
    stack = [(n, 0, False)]
    while stack:
        s, left, expanded = stack.pop()
        if s == 1:
            out.append(decorate(Vert(rng.randint(1, k))))
        elif not expanded:
            left = _split(rng, s, shape)
            stack.append((s, left, True))
            stack.append((s - left, 0, False))
            stack.append((left, 0, False))
        else:
            right = out.pop()
            lnode = out.pop()
            out.append(decorate(Union(lnode, right)))
    return CwExpr(k, out.pop())


# ---------------------------------------------------------------------------
# DSL

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def format_expr(expr) -> str:
    """Serialize to the s-expression DSL (header line plus one expression line)."""
    parts = []
    stack = [expr.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, Vert):
            parts.append(f"(vert {item.label})")
        elif isinstance(item, Rel):
            mapping = " ".join(f"({i} {r})" for i, r in enumerate(item.mapping, start=1))
            parts.append(f"(rel ({mapping}) ")
            stack.extend((")", item.child))
        elif isinstance(item, Join):
            pairs = " ".join(f"({a} {b})" for a, b in sorted(item.pairs))
            parts.append(f"(join ({pairs}) ")
            stack.extend((")", item.right, " ", item.left))
        elif isinstance(item, Relabel):
            parts.append(f"(rel {item.a} {item.b} ")
            stack.extend((")", item.child))
        elif isinstance(item, Eta):
            parts.append(f"(eta {item.a} {item.b} ")
            stack.extend((")", item.child))
        else:
            parts.append("(union ")
            stack.extend((")", item.right, " ", item.left))
    return f"{expr.kind} {expr.k}\n" + "".join(parts) + "\n"


def _read_sexpr(tokens):
    stack = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ParseError("unbalanced '('")
    top = stack[0]
    if len(top) != 1 or not isinstance(top[0], list):
        raise ParseError("expected exactly one parenthesized expression")
    return top[0]


def _int(tok):
    if isinstance(tok, list):
        raise ParseError(f"expected an integer, got a list")
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}") from None


def _int_pair(item):
    if not isinstance(item, list) or len(item) != 2:
        raise ParseError(f"expected a pair (A B), got {item!r}")
    return _int(item[0]), _int(item[1])


# head -> (arity, indices of subexpressions)
_NLC_FORMS = {"vert": (2, ()), "rel": (3, (2,)), "join": (4, (2, 3))}
_CW_FORMS = {"vert": (2, ()), "rel": (4, (3,)), "union": (3, (1, 2)), "eta": (4, (3,))}


def _build(form, kind, k, subs):
    head = form[0]
    if head == "vert":
        return Vert(_int(form[1]))
    if kind == "nlc":
        if head == "rel":
            if not isinstance(form[1], list):
                raise ParseError("rel needs a list of (label target) pairs")
            entries = dict(_int_pair(p) for p in form[1])
            if len(entries) != len(form[1]) or sorted(entries) != list(range(1, k + 1)):
                raise ValidationError(f"relabel map must list every label 1..{k} exactly once")
            return Rel(tuple(entries[i] for i in range(1, k + 1)), subs[0])
        if not isinstance(form[1], list):
            raise ParseError("join needs a list of label pairs")
        return Join(frozenset(_int_pair(p) for p in form[1]), subs[0], subs[1])
    if head == "rel":
        return Relabel(_int(form[1]), _int(form[2]), subs[0])
    if head == "eta":
        return Eta(_int(form[1]), _int(form[2]), subs[0])
    return Union(subs[0], subs[1])


def parse_expr(text: str | bytes):
    """Parse the expression DSL into a ``CwExpr`` or ``NlcExpr``."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    tokens = _TOKEN.findall(body)
    if len(tokens) < 2 or tokens[0] not in ("cw", "nlc"):
        raise ParseError("expected header 'cw K' or 'nlc K'")
    kind = tokens[0]
    k = _int(tokens[1])
    if k < 1:
        raise ValidationError("width must be at least 1")
    forms = _NLC_FORMS if kind == "nlc" else _CW_FORMS
    tree = _read_sexpr(tokens[2:])

    out = []
    stack = [(tree, False)]
    while stack:
        form, expanded = stack.pop()
        if not isinstance(form, list) or not form or not isinstance(form[0], str):
            raise ParseError(f"expected an operation, got {form!r}")
        head = form[0]
        if head not in forms:
            raise ParseError(f"unknown {kind} operation {head!r}")
        arity, sub_idx = forms[head]
        if len(form) != arity:
            raise ParseError(f"{head} takes {arity - 1} argument(s), got {len(form) - 1}")
        if not expanded and sub_idx:
            stack.append((form, True))
            for i in reversed(sub_idx):
                stack.append((form[i], False))
            continue
        subs = out[len(out) - len(sub_idx):] if sub_idx else []
        del out[len(out) - len(sub_idx):]
        out.append(_build(form, kind, k, subs))
    root = out.pop()
    return NlcExpr(k, root) if kind == "nlc" else CwExpr(k, root)
