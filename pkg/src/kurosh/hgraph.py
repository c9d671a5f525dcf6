"""Folded subgroup graphs modelling the quotient of the Bass-Serre tree.

Frames. Every base vertex ``b`` stands for a tree vertex ``w_b u0`` and every
factor vertex ``v`` for ``g_v u_i``; the chosen elements ``w_b``, ``g_v`` are
implicit. With that convention

* ``P_b = w_b^-1 H w_b  ∩ A``  (indices of A),
* ``S_v = g_v^-1 H g_v ∩ G_i`` (indices of G_i),
* a factor edge ``(b, v, c)`` records ``H w_b = H g_v c``,
* a free edge ``(b, j, a, b2, d)`` records ``H w_b a x_j = H w_b2 d``.

A *state* ``(b, a)`` is the coset ``H w_b a``; states of ``b`` are indexed by
``P_b \\ A``. In the plain setting A is trivial and every base vertex has one
state. Membership is read deterministically through states of a folded graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .ambient import AMALGAMATED, AmbientSpec, Word, invert, product
from .finite import conjugacy_class_key
from .graphs import Graph, rank, reduced_rank, to_dot


class HGraphError(ValueError):
    pass


class HGraph:
    def __init__(self, spec: AmbientSpec):
        self.spec = spec
        self.P = {}       # base vertex -> frozenset of A
        self.ffac = {}    # factor vertex -> factor index
        self.S = {}       # factor vertex -> frozenset of G_i
        self.fedge = {}   # id -> [b, v, c]
        self.xedge = {}   # id -> [b, j, a_src, b2, a_dst]
        self.basepoint = None
        self.marked = True
        self.folded = False
        self._next = 0

    # -- construction ------------------------------------------------------
    def _id(self):
        self._next += 1
        return self._next

    def add_base(self, P=frozenset({0})):
        b = self._id()
        self.P[b] = frozenset(P)
        return b

    def add_factor_vertex(self, i, S=frozenset({0})):
        v = self._id()
        self.ffac[v] = i
        self.S[v] = frozenset(S)
        return v

    def add_factor_edge(self, b, v, c):
        e = self._id()
        self.fedge[e] = [b, v, c]
        return e

    def add_free_edge(self, b, j, a_src, b2, a_dst):
        e = self._id()
        self.xedge[e] = [b, j, a_src, b2, a_dst]
        return e

    def copy(self) -> "HGraph":
        g = HGraph(self.spec)
        g.P = dict(self.P)
        g.ffac = dict(self.ffac)
        g.S = dict(self.S)
        g.fedge = {e: list(x) for e, x in self.fedge.items()}
        g.xedge = {e: list(x) for e, x in self.xedge.items()}
        g.basepoint = self.basepoint
        g.marked = self.marked
        g.folded = self.folded
        g._next = self._next
        return g

    # -- basic queries -----------------------------------------------------
    @property
    def vertices(self):
        return list(self.P) + list(self.S)

    @property
    def n_vertices(self):
        return len(self.P) + len(self.S)

    @property
    def n_edges(self):
        return len(self.fedge) + len(self.xedge)

    def is_base(self, x) -> bool:
        return x in self.P

    def valence(self) -> dict:
        val = dict.fromkeys(self.P, 0)
        val.update(dict.fromkeys(self.S, 0))
        for b, v, _ in self.fedge.values():
            val[b] += 1
            val[v] += 1
        for b, _, _, b2, _ in self.xedge.values():
            val[b] += 1
            val[b2] += 1
        return val

    def degenerate(self, x) -> bool:
        """Base vertices are always degenerate (their stabilizer equals that of
        every incident factor edge); a factor vertex is degenerate iff its
        subgroup lies in the image of A."""
        if x in self.P:
            return True
        return self.S[x] <= self.spec.img_set[self.ffac[x]]

    def degeneracy_flags(self) -> dict:
        return {x: self.degenerate(x) for x in self.vertices}

    def stabilizer_order(self, x) -> int:
        return len(self.P[x]) if x in self.P else len(self.S[x])

    def is_edge_free(self) -> bool:
        """True iff H meets every edge stabilizer trivially."""
        if any(len(p) > 1 for p in self.P.values()):
            return False
        img = self.spec.img_set
        return all(len(s & img[self.ffac[v]]) == 1 for v, s in self.S.items())

    def is_free_subgroup(self) -> bool:
        """All vertex groups trivial."""
        return all(len(p) == 1 for p in self.P.values()) and all(len(s) == 1 for s in self.S.values())

    # -- canonical representatives -----------------------------------------
    def canon_state(self, b, a) -> int:
        mult = self.spec.A.mult
        return min(mult[p][a] for p in self.P[b])

    def canon_label(self, v, c) -> int:
        G = self.spec.factors[self.ffac[v]]
        return min(G.mult[s][c] for s in self.S[v])

    def block(self, v, c) -> int:
        i = self.ffac[v]
        G = self.spec.factors[i]
        img = self.spec.img[i]
        return min(G.mult[G.mult[s][c]][y] for s in self.S[v] for y in img)

    def canonicalize(self):
        for e, (b, v, c) in self.fedge.items():
            self.fedge[e][2] = self.canon_label(v, c)
        for e, (b, j, a, b2, d) in self.xedge.items():
            self.xedge[e][2] = self.canon_state(b, a)
            self.xedge[e][4] = self.canon_state(b2, d)

    # -- elementary transformations ----------------------------------------
    def merge_base(self, keep, drop, shift):
        """Identify base vertices given ``w_drop = w_keep * shift`` modulo H."""
        A = self.spec.A
        if keep == drop:
            self.P[keep] = A.join(self.P[keep], (shift,))
            return
        if drop == self.basepoint:
            keep, drop, shift = drop, keep, A.inv[shift]
        self.P[keep] = A.join(self.P[keep], A.conj_set(shift, self.P[drop]))
        inv_shift = A.inv[shift]
        for rec in self.fedge.values():
            if rec[0] == drop:
                i = self.ffac[rec[1]]
                G = self.spec.factors[i]
                rec[0] = keep
                rec[2] = G.mult[rec[2]][self.spec.img[i][inv_shift]]
        for rec in self.xedge.values():
            if rec[0] == drop:
                rec[0] = keep
                rec[2] = A.mult[shift][rec[2]]
            if rec[3] == drop:
                rec[3] = keep
                rec[4] = A.mult[shift][rec[4]]
        del self.P[drop]

    def merge_factor(self, keep, drop, t):
        """Identify factor vertices given ``g_drop = g_keep * t`` modulo H."""
        if keep == drop:
            raise HGraphError("merge_factor needs distinct vertices")
        G = self.spec.factors[self.ffac[keep]]
        self.S[keep] = G.join(self.S[keep], G.conj_set(t, self.S[drop]))
        for rec in self.fedge.values():
            if rec[1] == drop:
                rec[1] = keep
                rec[2] = G.mult[t][rec[2]]
        del self.S[drop], self.ffac[drop]

    # -- folding -----------------------------------------------------------
    def _moves(self, want_all: bool):
        spec = self.spec
        A = spec.A
        moves = []

        for e, (b, v, c) in self.fedge.items():
            i = self.ffac[v]
            G = spec.factors[i]
            img, pre = spec.img[i], spec.pre[i]
            cinv = G.inv[c]
            need = frozenset(pre[G.conj(cinv, y)] for y in self.S[v] if y in pre)
            Pb = self.P[b]
            if need != Pb:
                moves.append(("psync", e))
                if not want_all:
                    return moves
            elif any(G.conj(c, img[p]) not in self.S[v] for p in Pb):
                moves.append(("psync", e))
                if not want_all:
                    return moves

        at_base = {}
        at_factor = {}
        for e, (b, v, c) in self.fedge.items():
            at_base.setdefault((b, self.ffac[v]), []).append(e)
            at_factor.setdefault(v, []).append(e)
        for key, es in at_base.items():
            if len(es) > 1:
                e1, e2 = es[0], es[1]
                if self.fedge[e1][1] == self.fedge[e2][1]:
                    moves.append(("fself", e1, e2))
                else:
                    moves.append(("fmerge", e1, e2))
                if not want_all:
                    return moves
        for v, es in at_factor.items():
            if len(es) > 1:
                seen = {}
                for e in es:
                    blk = self.block(v, self.fedge[e][2])
                    if blk in seen:
                        moves.append(("collide", seen[blk], e))
                        if not want_all:
                            return moves
                    else:
                        seen[blk] = e

        out_seen = {}
        in_seen = {}
        for e, (b, j, a, b2, d) in self.xedge.items():
            k1 = (b, j, self.canon_state(b, a))
            if k1 in out_seen:
                moves.append(("fb_out", out_seen[k1], e))
                if not want_all:
                    return moves
            else:
                out_seen[k1] = e
            k2 = (b2, j, self.canon_state(b2, d))
            if k2 in in_seen:
                moves.append(("fb_in", in_seen[k2], e))
                if not want_all:
                    return moves
            else:
                in_seen[k2] = e
        return moves

    def _apply(self, move):
        spec = self.spec
        A = spec.A
        kind = move[0]
        if kind == "psync":
            b, v, c = self.fedge[move[1]]
            i = self.ffac[v]
            G = spec.factors[i]
            img, pre = spec.img[i], spec.pre[i]
            cinv = G.inv[c]
            need = frozenset(pre[G.conj(cinv, y)] for y in self.S[v] if y in pre)
            newP = A.join(self.P[b], need)
            self.P[b] = newP
            self.S[v] = G.join(self.S[v], (G.conj(c, img[p]) for p in newP))
        elif kind == "fself":
            e1, e2 = move[1], move[2]
            b, v, c1 = self.fedge[e1]
            c2 = self.fedge[e2][2]
            G = spec.factors[self.ffac[v]]
            self.S[v] = G.join(self.S[v], (G.mult[c1][G.inv[c2]],))
            del self.fedge[e2]
        elif kind == "fmerge":
            e1, e2 = move[1], move[2]
            _, v1, c1 = self.fedge[e1]
            _, v2, c2 = self.fedge[e2]
            G = spec.factors[self.ffac[v1]]
            self.merge_factor(v1, v2, G.mult[c1][G.inv[c2]])
        elif kind == "collide":
            e1, e2 = move[1], move[2]
            b1, v, c1 = self.fedge[e1]
            b2, _, c2 = self.fedge[e2]
            i = self.ffac[v]
            G = spec.factors[i]
            target = self.canon_label(v, c2)
            for a in range(A.order):
                if self.canon_label(v, G.mult[c1][spec.img[i][a]]) == target:
                    break
            else:
                raise HGraphError("collide: edges are not in a common block")
            self.merge_base(b1, b2, a)
        elif kind == "fb_out":
            e1, e2 = move[1], move[2]
            _, _, _, t1, d1 = self.xedge[e1]
            _, _, _, t2, d2 = self.xedge[e2]
            del self.xedge[e2]
            self.merge_base(t1, t2, A.mult[d1][A.inv[d2]])
        elif kind == "fb_in":
            e1, e2 = move[1], move[2]
            s1, _, a1, _, _ = self.xedge[e1]
            s2, _, a2, _, _ = self.xedge[e2]
            del self.xedge[e2]
            self.merge_base(s1, s2, A.mult[a1][A.inv[a2]])
        else:
            raise HGraphError(f"unknown move {kind}")

    def fold(self, rng: random.Random | None = None, max_steps: int = 10**6) -> "HGraph":
        """Fold in place to exhaustion. With ``rng`` the next move is drawn at
        random among all applicable ones."""
        for _ in range(max_steps):
            moves = self._moves(want_all=rng is not None)
            if not moves:
                break
            self._apply(rng.choice(moves) if rng is not None else moves[0])
        else:
            raise HGraphError("folding did not terminate")
        self.canonicalize()
        self.folded = True
        return self

    def is_folded(self) -> bool:
        return not self._moves(want_all=False)

    # -- reading -----------------------------------------------------------
    def reader(self) -> "Reader":
        if not self.folded:
            raise HGraphError("graph must be folded before reading")
        return Reader(self)

    def accepts(self, g: Word) -> bool:
        if not self.folded or not self.marked or self.basepoint is None:
            raise HGraphError("accepts needs a folded, marked graph")
        return self.reader().accepts(g)

    # -- derived graphs ----------------------------------------------------
    def to_graph(self, frame_free: bool = True) -> Graph:
        """Labelled graph. With ``frame_free`` vertex subgroups are labelled by
        conjugacy class, which does not depend on the implicit frames."""
        g = Graph()
        spec = self.spec
        for b, P in self.P.items():
            lab = ("base", conjugacy_class_key(spec.A, P) if frame_free else tuple(sorted(P)))
            if self.marked and b == self.basepoint:
                lab = lab + ("*",)
            g.add_vertex(b, lab)
        for v, S in self.S.items():
            i = self.ffac[v]
            key = conjugacy_class_key(spec.factors[i], S) if frame_free else tuple(sorted(S))
            g.add_vertex(v, ("factor", i, key))
        for e in sorted(self.fedge):
            b, v, c = self.fedge[e]
            i = self.ffac[v]
            g.add_edge(b, v, ("f", i), ("F", i))
        for e in sorted(self.xedge):
            b, j, a, b2, d = self.xedge[e]
            g.add_edge(b, b2, ("x", j), ("X", j))
        return g

    def to_dot(self, name="H", edge_notes=None) -> str:
        """``edge_notes`` maps edge ids to extra label text."""
        notes = edge_notes or {}
        g = Graph()
        spec = self.spec
        for b, P in self.P.items():
            star = " *" if self.marked and b == self.basepoint else ""
            g.add_vertex(b, f"base{star}" + (f" |P|={len(P)}" if spec.setting == AMALGAMATED else ""))
        for v, S in self.S.items():
            g.add_vertex(v, f"f{self.ffac[v] + 1} |S|={len(S)}")
        edge_text = {}
        for e in sorted(self.fedge):
            b, v, c = self.fedge[e]
            edge_text[g.add_edge(b, v)[0]] = f"S{c}" + notes.get(e, "")
        for e in sorted(self.xedge):
            b, j, a, b2, d = self.xedge[e]
            dec = f" [{a}>{d}]" if spec.setting == AMALGAMATED else ""
            edge_text[g.add_edge(b, b2)[0]] = f"x{j + 1}{dec}" + notes.get(e, "")
        return to_dot(g, name, vertex_text=lambda v, lab: f"{v}: {lab}",
                      edge_text=lambda e, lab: edge_text.get(e, ""))


class Reader:
    """Deterministic state transitions of a folded graph."""

    def __init__(self, gamma: HGraph):
        self.g = gamma
        spec = gamma.spec
        A = spec.A
        self.spec = spec
        self.canon = {b: tuple(min(A.mult[p][a] for p in P) for a in range(A.order))
                      for b, P in gamma.P.items()}
        self.fat = {}     # (b, i) -> (v, c, edge id)
        self.fstate = {v: {} for v in gamma.S}  # v -> {y: (b, a)}
        for e, (b, v, c) in gamma.fedge.items():
            i = gamma.ffac[v]
            self.fat[(b, i)] = (v, c, e)
            G = spec.factors[i]
            img = spec.img[i]
            table = self.fstate[v]
            canon_b = self.canon[b]
            for s in gamma.S[v]:
                sc = G.mult[s][c]
                for a in range(A.order):
                    table[G.mult[sc][img[a]]] = (b, canon_b[a])
        self.xout = {}    # (b, j, canonical a) -> (b2, canonical d, edge id)
        self.xin = {}
        for e, (b, j, a, b2, d) in gamma.xedge.items():
            ca, cd = self.canon[b][a], self.canon[b2][d]
            self.xout[(b, j, ca)] = (b2, cd, e)
            self.xin[(b2, j, cd)] = (b, ca, e)

    def step(self, state, letter):
        """Next state after reading ``letter``, or None."""
        b, a = state
        kind = letter[0]
        spec = self.spec
        if kind == "a":
            return b, self.canon[b][spec.A.mult[a][letter[1]]]
        if kind == "f":
            i, t = letter[1], letter[2]
            hit = self.fat.get((b, i))
            if hit is None:
                return None
            v, c, _ = hit
            G = spec.factors[i]
            y = G.mult[G.mult[c][spec.img[i][a]]][t]
            return self.fstate[v].get(y)
        j, s = letter[1], letter[2]
        if s > 0:
            hit = self.xout.get((b, j, a))
        else:
            hit = self.xin.get((b, j, a))
        return None if hit is None else hit[:2]

    def factor_state(self, b, a, i):
        """(v, y) with H w_b a = H g_v y, or None if b has no factor-i edge."""
        hit = self.fat.get((b, i))
        if hit is None:
            return None
        v, c, _ = hit
        G = self.spec.factors[i]
        return v, G.mult[c][self.spec.img[i][a]]

    def read(self, g: Word, start=None):
        state = start if start is not None else (self.g.basepoint, 0)
        for letter in g:
            state = self.step(state, letter)
            if state is None:
                return None
        return state

    def accepts(self, g: Word) -> bool:
        end = self.read(g)
        return end is not None and end[0] == self.g.basepoint and end[1] == 0


# -- building, trimming, complexity -----------------------------------------

def add_path(g: HGraph, w: Word):
    """Attach a closed path reading ``w`` at the basepoint."""
    spec = g.spec
    A = spec.A
    beta = g.basepoint
    cur, a = beta, 0
    for letter in w:
        kind = letter[0]
        if kind == "a":
            a = A.mult[a][letter[1]]
        elif kind == "f":
            i, t = letter[1], letter[2]
            G = spec.factors[i]
            v = g.add_factor_vertex(i)
            g.add_factor_edge(cur, v, 0)
            nxt = g.add_base()
            g.add_factor_edge(nxt, v, G.mult[spec.img[i][a]][t])
            cur, a = nxt, 0
        else:
            j, s = letter[1], letter[2]
            nxt = g.add_base()
            if s > 0:
                g.add_free_edge(cur, j, a, nxt, 0)
            else:
                g.add_free_edge(nxt, j, 0, cur, a)
            cur, a = nxt, 0
    g.merge_base(beta, cur, A.inv[a])
    g.folded = False


def wedge_of_paths(spec: AmbientSpec, gens) -> HGraph:
    """Unfolded graph: one closed path at the basepoint per generator."""
    g = HGraph(spec)
    g.basepoint = g.add_base()
    for w in gens:
        add_path(g, w)
    return g


def build_from_generators(spec: AmbientSpec, gens, rng: random.Random | None = None) -> HGraph:
    """With ``rng`` the whole wedge is folded in random move order; otherwise
    generators are added one at a time, folding after each, which keeps the
    graph small for long generator lists."""
    if rng is not None:
        return wedge_of_paths(spec, gens).fold(rng=rng)
    g = HGraph(spec)
    g.basepoint = g.add_base()
    g.fold()
    for w in gens:
        add_path(g, w)
        g.fold()
    return g


@dataclass
class Core:
    """Trimmed core. ``graph`` is an unmarked HGraph sharing vertex ids with the
    folded graph it came from; ``elliptic`` when no edges survive."""
    graph: HGraph
    elliptic: bool
    residual: object = None  # surviving single vertex for elliptic cores


def trim_core(gamma: HGraph) -> Core:
    g = gamma.copy()
    g.marked = False
    last = None
    while True:
        val = g.valence()
        doomed = [x for x, d in val.items() if d <= 1 and g.degenerate(x)]
        if not doomed:
            break
        for x in doomed:
            last = x
            if x in g.P:
                del g.P[x]
            else:
                del g.S[x], g.ffac[x]
        dead = set(doomed)
        g.fedge = {e: r for e, r in g.fedge.items() if r[0] not in dead and r[1] not in dead}
        g.xedge = {e: r for e, r in g.xedge.items() if r[0] not in dead and r[3] not in dead}
    if g.n_edges == 0:
        if g.n_vertices == 0:
            return Core(g, True, last)
        return Core(g, True, g.vertices[0])
    return Core(g, False, None)


@dataclass
class ComplexityReport:
    elliptic: bool
    rank_r: int
    n_nondegenerate: int
    C: int
    C_bar: int
    kurosh_rank: int | None
    edge_free: bool
    trivial: bool

    def as_dict(self):
        return dict(elliptic=self.elliptic, rank_r=self.rank_r, n_nondegenerate=self.n_nondegenerate,
                    C=self.C, C_bar=self.C_bar, kurosh_rank=self.kurosh_rank,
                    edge_free=self.edge_free, trivial=self.trivial)


def complexity(core: Core, edge_free: bool, trivial: bool = False) -> ComplexityReport:
    """``edge_free`` comes from the folded (marked) graph; ``trivial`` flags the
    trivial subgroup, whose Kurosh rank is 0."""
    g = core.graph
    if core.elliptic:
        kr = (0 if trivial else 1) if edge_free else None
        return ComplexityReport(True, 0, 0, 1, 0, kr, edge_free, trivial)
    r = g.n_edges - g.n_vertices + 1
    nd = sum(1 for x in g.vertices if not g.degenerate(x))
    C = r + nd
    return ComplexityReport(False, r, nd, C, max(C - 1, 0), C if edge_free else None, edge_free, False)


def is_trivial_subgroup(gamma: HGraph) -> bool:
    """Trivial subgroup iff the folded marked graph is a tree with trivial
    vertex groups."""
    return gamma.is_free_subgroup() and gamma.n_edges == gamma.n_vertices - 1


@dataclass
class SubgroupData:
    """Folded graph, core and complexity of one subgroup."""
    gens: list
    folded: HGraph
    core: Core
    report: ComplexityReport

    @property
    def elliptic(self):
        return self.core.elliptic


def analyse(spec: AmbientSpec, gens, rng=None) -> SubgroupData:
    gamma = build_from_generators(spec, gens, rng=rng)
    return analyse_folded(gamma, list(gens))


def analyse_folded(gamma: HGraph, gens=None) -> SubgroupData:
    core = trim_core(gamma)
    rep = complexity(core, gamma.is_edge_free(), is_trivial_subgroup(gamma))
    return SubgroupData(list(gens or []), gamma, core, rep)


def tilde_graph(core: Core) -> Graph:
    """Core with a loop attached at every non-degenerate vertex."""
    if core.elliptic:
        raise HGraphError("tilde graph of an elliptic subgroup is undefined")
    g = core.graph
    X = g.to_graph()
    for x in g.vertices:
        if not g.degenerate(x):
            X.add_edge(x, x, ("loop",), ("loop",))
    return X


def lemma1_check(core: Core) -> bool:
    """Reduced complexity = reduced rank of the tilde graph = half the sum of
    (degree - 2) over its vertices."""
    X = tilde_graph(core)
    rep = complexity(core, False)
    deg = X.degrees()
    twice = sum(d - 2 for d in deg.values())
    return twice % 2 == 0 and rep.C_bar == reduced_rank(X) == twice // 2


def frames(gamma: HGraph) -> tuple:
    """Representative elements ``w_b`` and ``g_v`` as normal forms, plus the
    spanning tree used: ``(base_frames, factor_frames, tree_edges)``."""
    spec = gamma.spec
    A = spec.A
    wb = {gamma.basepoint: ()}
    gv = {}
    tree = set()
    fe_at_b, fe_at_v, xo, xi = {}, {}, {}, {}
    for e, (b, v, c) in gamma.fedge.items():
        fe_at_b.setdefault(b, []).append(e)
        fe_at_v.setdefault(v, []).append(e)
    for e, (b, j, a, b2, d) in gamma.xedge.items():
        xo.setdefault(b, []).append(e)
        xi.setdefault(b2, []).append(e)

    def aw(a):
        return (("a", a),) if a else ()

    queue = [gamma.basepoint]
    while queue:
        b = queue.pop(0)
        w = wb[b]
        for e in sorted(fe_at_b.get(b, ())):
            _, v, c = gamma.fedge[e]
            if v in gv:
                continue
            i = gamma.ffac[v]
            G = spec.factors[i]
            gv[v] = product(spec, w, (("f", i, G.inv[c]),))
            tree.add(("f", e))
            for e2 in sorted(fe_at_v[v]):
                b2, _, c2 = gamma.fedge[e2]
                if b2 not in wb:
                    wb[b2] = product(spec, gv[v], (("f", i, c2),))
                    tree.add(("f", e2))
                    queue.append(b2)
        for e in sorted(xo.get(b, ())):
            _, j, a, b2, d = gamma.xedge[e]
            if b2 not in wb:
                wb[b2] = product(spec, w, aw(a), (("x", j, 1),), aw(A.inv[d]))
                tree.add(("x", e))
                queue.append(b2)
        for e in sorted(xi.get(b, ())):
            b1, j, a, _, d = gamma.xedge[e]
            if b1 not in wb:
                wb[b1] = product(spec, w, aw(d), (("x", j, -1),), aw(A.inv[a]))
                tree.add(("x", e))
                queue.append(b1)
    return wb, gv, tree


def _small_generating_set(G, S):
    gens, cur = [], frozenset({0})
    for s in sorted(S):
        if s not in cur:
            gens.append(s)
            cur = G.closure(cur | {s})
    return gens


def generators_of(gamma: HGraph) -> list:
    """Generating set read off a folded marked graph: vertex-group generators
    conjugated by frames, plus one loop word per edge outside the spanning tree."""
    if gamma.basepoint is None:
        raise HGraphError("generators need a marked graph")
    spec = gamma.spec
    A = spec.A
    wb, gv, tree = frames(gamma)
    inv = lambda w: invert(spec, w)
    out = []
    for b in sorted(gamma.P):
        for p in _small_generating_set(A, gamma.P[b]):
            out.append(product(spec, wb[b], (("a", p),), inv(wb[b])))
    for v in sorted(gamma.S):
        i = gamma.ffac[v]
        for s in _small_generating_set(spec.factors[i], gamma.S[v]):
            out.append(product(spec, gv[v], (("f", i, s),), inv(gv[v])))
    for e in sorted(gamma.fedge):
        if ("f", e) in tree:
            continue
        b, v, c = gamma.fedge[e]
        i = gamma.ffac[v]
        out.append(product(spec, wb[b], inv(product(spec, gv[v], (("f", i, c),)))))
    for e in sorted(gamma.xedge):
        if ("x", e) in tree:
            continue
        b, j, a, b2, d = gamma.xedge[e]
        w = product(spec, wb[b], (("a", a),) if a else (), (("x", j, 1),), (("a", A.inv[d]),) if d else ())
        out.append(product(spec, w, inv(wb[b2])))
    return [w for w in out if w]


def saturated(gamma: HGraph) -> bool:
    """Every vertex carries its complete star in the tree quotient."""
    spec = gamma.spec
    A = spec.A
    val = {b: 0 for b in gamma.P}
    fcount = {}
    for b, v, c in gamma.fedge.values():
        fcount[b] = fcount.get(b, 0) + 1
    for b in gamma.P:
        if fcount.get(b, 0) != len(spec.factors):
            return False
    outs, ins = {}, {}
    for b, j, a, b2, d in gamma.xedge.values():
        outs[b] = outs.get(b, 0) + 1
        ins[b2] = ins.get(b2, 0) + 1
    for b, P in gamma.P.items():
        per = spec.free_rank * (A.order // len(P))
        if outs.get(b, 0) != per or ins.get(b, 0) != per:
            return False
    per_v = {}
    for b, v, c in gamma.fedge.values():
        per_v[v] = per_v.get(v, 0) + 1
    for v, S in gamma.S.items():
        i = gamma.ffac[v]
        G = spec.factors[i]
        blocks = G.order // len(G.closure(S | spec.img_set[i]))
        if per_v.get(v, 0) != blocks:
            return False
    return True


def quotient_ball(gamma: HGraph, R: int) -> Graph:
    """Radius-R ball around the basepoint in the full tree quotient: the folded
    graph completed by the free trees hanging off it. Edges are kept when one
    end lies within distance R - 1. Plain setting only."""
    spec = gamma.spec
    if spec.setting == AMALGAMATED:
        raise HGraphError("quotient_ball supports the plain setting only")
    rd = gamma.reader()
    nf = len(spec.factors)

    def base_star(x):
        """(edge key, neighbour, edge label oriented from x)"""
        out = []
        inside = x[0] == "b"
        for i in range(nf):
            hit = rd.fat.get((x[1], i)) if inside else None
            if hit is not None:
                out.append((("fe", hit[2]), ("v", hit[0]), ("f", i)))
            elif not (x[0] == "o" and x[-1][:2] == ("F", i)):
                y = x + (("f", i),) if not inside else ("o", x, ("f", i))
                out.append((("oe", y), y, ("f", i)))
        for j in range(spec.free_rank):
            for sign, lab in ((1, ("x", j)), (-1, ("X", j))):
                hit = None
                if inside:
                    hit = (rd.xout if sign > 0 else rd.xin).get((x[1], j, 0))
                if hit is not None:
                    out.append((("xe", hit[2]), ("b", hit[0]), lab))
                elif not (x[0] == "o" and x[-1] == ("x", j, -sign)):
                    y = ("o", x, ("x", j, sign)) if inside else x + (("x", j, sign),)
                    out.append((("oe", y), y, lab))
        return out

    def factor_star(x, i):
        out = []
        G = spec.factors[i]
        if x[0] == "v":
            v = x[1]
            blocks = sorted({gamma.block(v, y) for y in range(G.order)})
            for blk in blocks:
                st = rd.fstate[v].get(blk)
                if st is not None:
                    e = rd.fat[(st[0], i)][2]
                    out.append((("fe", e), ("b", st[0]), ("F", i)))
                else:
                    y = ("o", x, ("F", i, blk))
                    out.append((("oe", y), y, ("F", i)))
        else:
            for t in range(1, G.order):
                y = x + (("F", i, t),)
                out.append((("oe", y), y, ("F", i)))
        return out

    def kind(x):
        if x[0] == "b":
            return None
        if x[0] == "v":
            return gamma.ffac[x[1]]
        step = x[-1]
        return step[1] if step[0] == "f" else None

    def star(x):
        i = kind(x)
        return base_star(x) if i is None else factor_star(x, i)

    def label(x):
        i = kind(x)
        if x[0] == "b":
            return ("base", len(gamma.P[x[1]]))
        if x[0] == "v":
            return ("factor", i, len(gamma.S[x[1]]))
        return ("base", 1) if i is None else ("factor", i, 1)

    root = ("b", gamma.basepoint)
    dist = {root: 0}
    queue = [root]
    edges = {}
    k = 0
    while k < len(queue):
        x = queue[k]
        k += 1
        if dist[x] >= R:
            continue
        for ekey, y, lab in star(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
            edges.setdefault(ekey, (x, y, lab))
    X = Graph()
    for x in queue:
        X.add_vertex(x, label(x))
    for ekey in sorted(edges, key=repr):
        x, y, lab = edges[ekey]
        if lab[0] in ("F", "X"):
            x, y, lab = y, x, (lab[0].lower(), lab[1])
        X.add_edge(x, y, lab, (lab[0].upper(), lab[1]))
    return X
