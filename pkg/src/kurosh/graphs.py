"""Graphs with an edge involution, the graph of groups Psi, ranks,
label-preserving isomorphism and DOT export."""

from __future__ import annotations

import sys
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field

from .finite import cyclic


class GraphError(ValueError):
    pass


class Graph:
    """Vertices plus oriented edges; ``inv`` is a fixed-point free involution and
    ``init`` gives the initial vertex. A geometric edge is an ``inv`` orbit."""

    def __init__(self):
        self.vertices = {}  # id -> label, insertion ordered
        self.init = {}
        self.inv = {}
        self.elabel = {}
        self._next_edge = 0

    def add_vertex(self, v, label=None):
        if v not in self.vertices:
            self.vertices[v] = label
        elif label is not None:
            self.vertices[v] = label
        return v

    def add_edge(self, u, v, label=None, inv_label=None):
        """Add the geometric edge u -> v; returns the pair of oriented edges."""
        if u not in self.vertices or v not in self.vertices:
            raise GraphError("edge endpoints must be vertices")
        e, f = self._next_edge, self._next_edge + 1
        self._next_edge += 2
        self.init[e], self.init[f] = u, v
        self.inv[e], self.inv[f] = f, e
        self.elabel[e] = label
        self.elabel[f] = inv_label if inv_label is not None else label
        return e, f

    def terminal(self, e):
        return self.init[self.inv[e]]

    def star(self, v):
        return [e for e, u in self.init.items() if u == v]

    def stars(self):
        res = {v: [] for v in self.vertices}
        for e, u in self.init.items():
            res[u].append(e)
        return res

    def degree(self, v) -> int:
        return sum(1 for u in self.init.values() if u == v)

    def degrees(self) -> dict:
        d = dict.fromkeys(self.vertices, 0)
        for u in self.init.values():
            d[u] += 1
        return d

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        """Number of geometric edges."""
        return len(self.init) // 2

    def geometric_edges(self):
        return [e for e in self.init if e < self.inv[e]]

    def components(self) -> list:
        adj = defaultdict(list)
        for e, u in self.init.items():
            adj[u].append(self.terminal(e))
        seen, comps = set(), []
        for v in self.vertices:
            if v in seen:
                continue
            comp, queue = [v], deque([v])
            seen.add(v)
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.append(y)
                        queue.append(y)
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def check(self):
        for e, f in self.inv.items():
            if e == f or self.inv[f] != e:
                raise GraphError("inv is not a fixed-point free involution")
            if self.init[e] not in self.vertices:
                raise GraphError("dangling edge")

    def copy(self) -> "Graph":
        g = Graph()
        g.vertices = dict(self.vertices)
        g.init = dict(self.init)
        g.inv = dict(self.inv)
        g.elabel = dict(self.elabel)
        g._next_edge = self._next_edge
        return g

    def subdivide(self, e, label=None):
        """Replace geometric edge e by a path of length two through a new vertex."""
        f = self.inv[e]
        u, v = self.init[e], self.init[f]
        mid = ("sub", e)
        while mid in self.vertices:
            mid = ("sub", mid)
        self.add_vertex(mid, label)
        le, lf = self.elabel[e], self.elabel[f]
        for x in (e, f):
            del self.init[x], self.inv[x], self.elabel[x]
        self.add_edge(u, mid, le, lf)
        self.add_edge(mid, v, le, lf)
        return mid

    def relabeled(self, perm: dict) -> "Graph":
        g = Graph()
        for v, lab in self.vertices.items():
            g.add_vertex(perm[v], lab)
        for e in self.geometric_edges():
            f = self.inv[e]
            g.add_edge(perm[self.init[e]], perm[self.init[f]], self.elabel[e], self.elabel[f])
        return g


def rank(X: Graph) -> int:
    """Rank of the fundamental group (summed over components)."""
    return X.n_edges - X.n_vertices + len(X.components())


def reduced_rank(X: Graph) -> int:
    if not X.is_connected():
        raise GraphError("reduced_rank needs a connected graph")
    return X.n_edges - X.n_vertices


# -- graph of groups ---------------------------------------------------------

@dataclass
class GraphOfGroups:
    graph: Graph
    vertex_groups: dict = field(default_factory=dict)  # vertex -> FiniteGroup
    edge_groups: dict = field(default_factory=dict)    # oriented edge -> FiniteGroup


def build_psi(spec) -> GraphOfGroups:
    """Wedge of open edges u0 - u_i (one per factor) and loops at u0 (one per
    free generator). u0 and the open edges carry A, loops the trivial group."""
    g = Graph()
    A = spec.A
    g.add_vertex("u0", ("base", A.order))
    gog = GraphOfGroups(g)
    gog.vertex_groups["u0"] = A
    for i, G in enumerate(spec.factors):
        u = f"u{i + 1}"
        g.add_vertex(u, ("factor", i, G.order))
        gog.vertex_groups[u] = G
        e, f = g.add_edge("u0", u, ("f", i), ("F", i))
        gog.edge_groups[e] = gog.edge_groups[f] = A
    one = cyclic(1)
    for j in range(spec.free_rank):
        e, f = g.add_edge("u0", "u0", ("x", j), ("X", j))
        gog.edge_groups[e] = gog.edge_groups[f] = one
    return gog


# -- isomorphism -------------------------------------------------------------

def _signature(X: Graph):
    counts = defaultdict(Counter)  # (u, v) -> Counter of edge labels
    for e, u in X.init.items():
        counts[(u, X.terminal(e))][X.elabel[e]] += 1
    nbrs = defaultdict(set)
    for (u, v) in counts:
        nbrs[u].add(v)
    return counts, nbrs


def _refine(X: Graph, counts, rounds=3):
    colour = {v: repr(X.vertices[v]) for v in X.vertices}
    for _ in range(rounds):
        new = {}
        for v in X.vertices:
            around = sorted((repr(sorted(c.items(), key=repr)), colour[w])
                            for (u, w), c in counts.items() if u == v)
            new[v] = repr((colour[v], around))
        colour = new
    return colour


def graphs_isomorphic(X: Graph, Y: Graph):
    """Label-preserving isomorphism test by backtracking. Returns
    ``(True, vertex_map)`` or ``(False, None)``."""
    if X.n_vertices != Y.n_vertices or len(X.init) != len(Y.init):
        return False, None
    if sorted(map(repr, X.vertices.values())) != sorted(map(repr, Y.vertices.values())):
        return False, None
    if sorted(map(repr, X.elabel.values())) != sorted(map(repr, Y.elabel.values())):
        return False, None
    cx, nx = _signature(X)
    cy, ny = _signature(Y)
    colx = _refine(X, cx)
    coly = _refine(Y, cy)
    if sorted(colx.values()) != sorted(coly.values()):
        return False, None
    by_colour = defaultdict(list)
    for v, c in coly.items():
        by_colour[c].append(v)

    # order X's vertices so that each (after the first of its component) has a mapped neighbour
    order = []
    seen = set()
    for comp_root in sorted(X.vertices, key=lambda v: (len(by_colour[colx[v]]), repr(v))):
        if comp_root in seen:
            continue
        queue = deque([comp_root])
        seen.add(comp_root)
        while queue:
            x = queue.popleft()
            order.append(x)
            for y in sorted(nx[x], key=repr):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)

    mapping, used = {}, set()
    empty = Counter()

    def consistent(x, y):
        if cx.get((x, x), empty) != cy.get((y, y), empty):
            return False
        for w in nx[x]:
            if w in mapping and cx[(x, w)] != cy.get((y, mapping[w]), empty):
                return False
        for w2 in ny[y]:
            pre = inverse.get(w2)
            if pre is not None and (x, pre) not in cx:
                return False
        return True

    inverse = {}

    def candidates(x):
        for w in nx[x]:
            if w in mapping:
                return [y for y in ny[mapping[w]] if y not in used and coly[y] == colx[x]]
        return [y for y in by_colour[colx[x]] if y not in used]

    def search(k):
        if k == len(order):
            return True
        x = order[k]
        for y in candidates(x):
            if consistent(x, y):
                mapping[x] = y
                inverse[y] = x
                used.add(y)
                if search(k + 1):
                    return True
                del mapping[x], inverse[y]
                used.discard(y)
        return False

    limit = sys.getrecursionlimit()
    if limit < len(order) + 100:
        sys.setrecursionlimit(len(order) + 100)
    ok = search(0)
    return (True, dict(mapping)) if ok else (False, None)


# -- DOT ---------------------------------------------------------------------

def _fmt(label):
    if label is None:
        return ""
    if isinstance(label, tuple):
        return " ".join(str(x) for x in label)
    return str(label)


def to_dot(X: Graph, name="G", vertex_text=None, edge_text=None) -> str:
    """Undirected DOT rendering; one line per geometric edge, vertices in
    insertion order."""
    vertex_text = vertex_text or (lambda v, lab: f"{v}\\n{_fmt(lab)}")
    edge_text = edge_text or (lambda e, lab: _fmt(lab))
    ids = {v: k for k, v in enumerate(X.vertices)}
    lines = [f"graph {_dot_id(name)} {{"]
    for v, lab in X.vertices.items():
        lines.append(f'  n{ids[v]} [label="{_esc(vertex_text(v, lab))}"];')
    for e in sorted(X.geometric_edges()):
        u, w = X.init[e], X.terminal(e)
        lines.append(f'  n{ids[u]} -- n{ids[w]} [label="{_esc(edge_text(e, X.elabel[e]))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return s.replace('"', '\\"')


def _dot_id(name: str) -> str:
    return '"' + _esc(name) + '"'
