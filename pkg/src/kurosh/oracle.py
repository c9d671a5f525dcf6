"""Brute-force ground truth built on ambient arithmetic alone: bounded
enumeration of subgroup elements, tree-ball quotients, and fiber counts."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .ambient import AMALGAMATED, AmbientSpec, Word, invert, product
from .config import BALL_CAP, MAX_L
from .graphs import Graph

YES = "YES"
NO_AT_BUDGET = "NO_AT_BUDGET"
UNVERIFIED = "UNVERIFIED"


class OracleError(ValueError):
    pass


@dataclass
class BallEnumeration:
    spec: AmbientSpec
    gens: list
    L: int
    elements: set = field(default_factory=set)
    truncated: bool = False

    def __contains__(self, g):
        return tuple(g) in self.elements

    def __len__(self):
        return len(self.elements)


def bfs_subgroup(spec: AmbientSpec, gens, L: int, cap: int = BALL_CAP) -> BallEnumeration:
    """Subgroup elements reachable from 1 by right multiplication with
    generators and their inverses, never leaving syllable length ``L``."""
    if L > MAX_L:
        raise OracleError(f"budget L={L} exceeds the configured maximum {MAX_L}")
    steps = []
    for g in gens:
        g = tuple(g)
        if g:
            steps.append(g)
            steps.append(invert(spec, g))
    ball = BallEnumeration(spec, list(gens), L, {()})
    queue = deque([()])
    while queue:
        w = queue.popleft()
        for s in steps:
            v = product(spec, w, s)
            if len(v) <= L and v not in ball.elements:
                if len(ball.elements) >= cap:
                    ball.truncated = True
                    return ball
                ball.elements.add(v)
                queue.append(v)
    return ball


def oracle_member(spec, gens, g: Word, L: int, ball: BallEnumeration | None = None,
                  meet_in_middle: bool = False) -> str:
    """YES iff g lies in the bounded ball. With ``meet_in_middle`` also YES when
    g = u v with u, v in the ball (still a certain positive)."""
    ball = ball or bfs_subgroup(spec, gens, L)
    g = tuple(g)
    if g in ball.elements:
        return YES
    if meet_in_middle:
        for u in ball.elements:
            if product(spec, invert(spec, u), g) in ball.elements:
                return YES
    return NO_AT_BUDGET


# -- tree cells ---------------------------------------------------------------

def _key(w):
    return (len(w), w)


class TreeCells:
    """Cells of the Bass-Serre tree named by canonical coset representatives:
    ``('u0', g)`` base vertex gA, ``('u', i, g)`` factor vertex gG_i,
    ``('e', i, g)`` factor edge gA, ``('l', j, g)`` loop edge g."""

    def __init__(self, spec: AmbientSpec):
        self.spec = spec
        A = spec.A
        self.a_letters = [(("a", a),) if a else () for a in range(A.order)]
        self.transversal = []
        for i, G in enumerate(spec.factors):
            reps = sorted({spec.rep[i][g] for g in range(G.order)})
            self.transversal.append(reps)

    def canon_a(self, g):
        return min((product(self.spec, g, s) for s in self.a_letters), key=_key)

    def canon_g(self, g, i):
        G = self.spec.factors[i]
        return min((product(self.spec, g, (("f", i, y),)) for y in range(G.order)), key=_key)

    def local_letters(self, typ):
        """Words for the stabilizer of the standard cell of type ``typ``."""
        kind = typ[0]
        if kind in ("u0", "e"):
            return self.a_letters
        if kind == "u":
            i = typ[1]
            return [(("f", i, y),) if y else () for y in range(self.spec.factors[i].order)]
        return [()]

    def act(self, h, cell):
        spec = self.spec
        kind = cell[0]
        g = product(spec, h, cell[-1])
        if kind == "u0":
            return ("u0", self.canon_a(g))
        if kind == "u":
            return ("u", cell[1], self.canon_g(g, cell[1]))
        if kind == "e":
            return ("e", cell[1], self.canon_a(g))
        return ("l", cell[1], g)

    def ends(self, edge):
        """(base end, other end) of an edge cell."""
        spec = self.spec
        kind, idx, g = edge
        if kind == "e":
            return ("u0", g), ("u", idx, self.canon_g(g, idx))
        return ("u0", self.canon_a(g)), ("u0", self.canon_a(product(spec, g, (("x", idx, 1),))))

    def star(self, v):
        """Edge cells incident to vertex ``v``."""
        spec = self.spec
        out = []
        if v[0] == "u0":
            g = v[1]
            for i in range(len(spec.factors)):
                out.append(("e", i, g))
            for j in range(spec.free_rank):
                for s in self.a_letters:
                    ga = product(spec, g, s)
                    out.append(("l", j, ga))
                    out.append(("l", j, product(spec, ga, (("x", j, -1),))))
        else:
            _, i, g = v
            for y in self.transversal[i]:
                out.append(("e", i, self.canon_a(product(spec, g, (("f", i, y),)))))
        return out


@dataclass
class TreeBall:
    vertices: dict   # cell -> distance from the base vertex
    edges: list      # edge cells with both ends in the ball


def tree_ball(spec: AmbientSpec, R: int) -> TreeBall:
    cells = TreeCells(spec)
    root = ("u0", ())
    dist = {root: 0}
    edges = set()
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e in cells.star(v):
            a, b = cells.ends(e)
            w = b if a == v else a
            if w not in dist:
                if dist[v] == R:
                    continue
                dist[w] = dist[v] + 1
                queue.append(w)
            edges.add(e)
    return TreeBall(dist, sorted(edges, key=repr))


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if repr(ry) < repr(rx):
                rx, ry = ry, rx
            self.parent[ry] = rx


@dataclass
class BallQuotient:
    graph: Graph
    classes: dict       # cell -> class representative
    stabilizers: dict   # class representative -> number of ball elements fixing it
    ball: TreeBall
    truncated: bool
    R: int
    L: int


def tree_ball_quotient(spec: AmbientSpec, gens, R: int, L: int) -> BallQuotient:
    """Radius-R ball of the tree with cells identified by the bounded subgroup
    ball; vertices carry stabilizer orders as seen through that ball."""
    cells = TreeCells(spec)
    tb = tree_ball(spec, R)
    sub = bfs_subgroup(spec, gens, L)
    every = list(tb.vertices) + tb.edges
    uf = _UnionFind(every)
    # h c = d for cells of one type with reps g, g' iff h lies in g' X g^-1,
    # X the stabilizer of the standard cell of that type
    by_type = {}
    for c in every:
        by_type.setdefault(c[:-1], []).append(c)
    stab = {}
    for typ, group in by_type.items():
        X = cells.local_letters(typ)
        inverses = {c: invert(spec, c[-1]) for c in group}
        for c in group:
            stab[c] = sum(1 for x in X if product(spec, c[-1], x, inverses[c]) in sub.elements)
        for n, c in enumerate(group):
            for d in group[n + 1:]:
                if any(product(spec, d[-1], x, inverses[c]) in sub.elements for x in X):
                    uf.union(c, d)
    classes = {c: uf.find(c) for c in every}
    rep_stab = {}
    for c, r in classes.items():
        rep_stab[r] = max(rep_stab.get(r, 0), stab[c])
    g = Graph()
    for v in tb.vertices:
        r = classes[v]
        if r not in g.vertices:
            lab = ("base", rep_stab[r]) if v[0] == "u0" else ("factor", v[1], rep_stab[r])
            g.add_vertex(r, lab)
    seen = set()
    for e in tb.edges:
        r = classes[e]
        if r in seen:
            continue
        seen.add(r)
        a, b = cells.ends(r)
        if e[0] == "e":
            g.add_edge(classes[a], classes[b], ("f", e[1]), ("F", e[1]))
        else:
            g.add_edge(classes[a], classes[b], ("x", e[1]), ("X", e[1]))
    return BallQuotient(g, classes, rep_stab, tb, sub.truncated, R, L)


# -- fibers -------------------------------------------------------------------

@dataclass
class FiberCount:
    """Elements of the local group G_x = w X w^-1 (X = A, or a factor) found
    inside HK, H and K, as indices of X. Every listed element is a certain
    positive; absence is only at budget."""
    hk: frozenset
    h: frozenset
    k: frozenset
    L: int
    truncated: bool
    group: object = None

    def count(self) -> int:
        X = self.group
        orbits = set()
        for a in self.hk:
            orbits.add(min(X.mult[X.mult[p][a]][q] for p in self.h for q in self.k))
        return len(orbits)


def oracle_fiber_count(spec: AmbientSpec, hgens, kgens, w: Word, L: int,
                       balls: tuple | None = None, factor: int | None = None) -> FiberCount:
    """Double cosets H_x \\ (G_x ∩ HK) / K_x for the cell stabilized by
    w A w^-1 (or w G_factor w^-1), pairing bounded enumerations of H and K."""
    bh, bk = balls or (bfs_subgroup(spec, hgens, L), bfs_subgroup(spec, kgens, L))
    X = spec.A if factor is None else spec.factors[factor]
    winv = invert(spec, w)
    hk, hs, ks = set(), set(), set()
    inv_h = [invert(spec, h) for h in bh.elements]
    for a in range(X.order):
        letter = () if a == 0 else ((("a", a),) if factor is None else (("f", factor, a),))
        g = product(spec, w, letter, winv)
        if g in bh.elements:
            hs.add(a)
        if g in bk.elements:
            ks.add(a)
        if g in bh.elements or g in bk.elements:
            hk.add(a)
            continue
        for hi in inv_h:
            if product(spec, hi, g) in bk.elements:
                hk.add(a)
                break
    return FiberCount(frozenset(hk), frozenset(hs), frozenset(ks), L,
                      bh.truncated or bk.truncated, X)


def compare_fiber(found: FiberCount, hk_pred, h_pred, k_pred) -> str:
    """'verified' when the bounded search reproduces the predicted sets,
    'contradiction' when it finds an element outside them, else UNVERIFIED."""
    if not (found.hk <= hk_pred and found.h <= h_pred and found.k <= k_pred):
        return "contradiction"
    if found.hk == hk_pred and found.h == h_pred and found.k == k_pred:
        return "verified"
    return UNVERIFIED
