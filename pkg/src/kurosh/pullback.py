"""Fiber product of two folded subgroup graphs and the H∩K core.

A pullback base vertex is a key ``(b, b2, d)`` with ``d`` a representative of a
double coset ``P_b \\ A / P_b2``; its frame is the pair of states
``((b, d), (b2, 1))``. A pullback factor vertex is ``(v, v2, d)`` with ``d`` in
``S_v \\ G_i / S_v2`` and frame ``(g_v d, g_v2)``. Vertex subgroups are the
intersections ``P_b2 ∩ d^-1 P_b d`` and ``S_v2 ∩ d^-1 S_v d``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .ambient import AMALGAMATED
from .hgraph import (Core, HGraph, HGraphError, analyse_folded, generators_of, trim_core)


class PullbackError(ValueError):
    pass


@dataclass
class PullbackGraph:
    left: HGraph
    right: HGraph
    graph: HGraph                                  # marked, folded
    base_key: dict = field(default_factory=dict)   # pullback base vertex -> (b, b2, d)
    factor_key: dict = field(default_factory=dict)  # pullback factor vertex -> (v, v2, d)
    edge_proj: dict = field(default_factory=dict)  # ("f"|"x", e) -> (edge in left, edge in right)
    components: str = "basepoint"

    def pi_left(self, x):
        key = self.base_key.get(x) or self.factor_key[x]
        return key[0]

    def pi_right(self, x):
        key = self.base_key.get(x) or self.factor_key[x]
        return key[1]


def _dc_rep(G, S, T, g):
    return min(G.mult[G.mult[s][g]][t] for s in S for t in T)


class _Builder:
    def __init__(self, gh: HGraph, gk: HGraph):
        if gh.spec != gk.spec:
            raise PullbackError("subgroup graphs live in different ambient groups")
        if not (gh.folded and gk.folded):
            raise PullbackError("pullback needs folded graphs")
        self.spec = gh.spec
        self.gh, self.gk = gh, gk
        self.rh, self.rk = gh.reader(), gk.reader()
        self.out = HGraph(self.spec)
        self.bases = {}    # key -> vertex
        self.factors = {}  # key -> vertex
        self.queue = deque()
        self.edges_f = {}  # (pullback base vertex, factor index) -> edge
        self.edges_x = {}  # (src vertex, j, canonical decoration) -> edge
        self.proj = {}

    # keys -------------------------------------------------------------------
    def base_vertex(self, b, b2, d):
        key = (b, b2, d)
        x = self.bases.get(key)
        if x is None:
            A = self.spec.A
            Pb, Pb2 = self.gh.P[b], self.gk.P[b2]
            conj = A.conj_set(A.inv[d], Pb)
            x = self.out.add_base(Pb2 & conj)
            self.bases[key] = x
            self.queue.append(("b", x, key))
        return x

    def factor_vertex(self, v, v2, d):
        key = (v, v2, d)
        x = self.factors.get(key)
        if x is None:
            i = self.gh.ffac[v]
            G = self.spec.factors[i]
            conj = G.conj_set(G.inv[d], self.gh.S[v])
            x = self.out.add_factor_vertex(i, self.gk.S[v2] & conj)
            self.factors[key] = x
            self.queue.append(("v", x, key))
        return x

    def locate_base(self, sh, sk):
        """Product state ((b, α), (b2, α2)) -> (pullback vertex, y) with the
        vertex frame times y equal to the pair of cosets."""
        A = self.spec.A
        (b, al), (b2, al2) = sh, sk
        Pb, Pb2 = self.gh.P[b], self.gk.P[b2]
        d = _dc_rep(A, Pb, Pb2, A.mult[al][A.inv[al2]])
        canon_h = self.rh.canon[b]
        for p in Pb2:
            y = A.mult[p][al2]
            if canon_h[A.mult[d][y]] == canon_h[al]:
                x = self.base_vertex(b, b2, d)
                return x, self.out.canon_state(x, y)
        raise PullbackError("inconsistent product state")

    def locate_factor(self, v, yh, v2, yk):
        i = self.gh.ffac[v]
        G = self.spec.factors[i]
        Sv, Sv2 = self.gh.S[v], self.gk.S[v2]
        d = _dc_rep(G, Sv, Sv2, G.mult[yh][G.inv[yk]])
        target = self.gh.canon_label(v, yh)
        for s in Sv2:
            y = G.mult[s][yk]
            if self.gh.canon_label(v, G.mult[d][y]) == target:
                return self.factor_vertex(v, v2, d), y
        raise PullbackError("inconsistent product factor state")

    # exploration --------------------------------------------------------------
    def expand_base(self, x, key):
        spec = self.spec
        A = spec.A
        b, b2, d = key
        for i in range(len(spec.factors)):
            fh = self.rh.factor_state(b, d, i)
            fk = self.rk.factor_state(b2, 0, i)
            if fh is None or fk is None:
                continue
            self.locate_factor(fh[0], fh[1], fk[0], fk[1])
        seen = set()
        for y in range(A.order):
            cy = self.out.canon_state(x, y)
            if cy in seen:
                continue
            seen.add(cy)
            sh = (b, self.rh.canon[b][A.mult[d][y]])
            sk = (b2, self.rk.canon[b2][y])
            for j in range(spec.free_rank):
                for sign in (1, -1):
                    th = self.rh.step(sh, ("x", j, sign))
                    tk = self.rk.step(sk, ("x", j, sign))
                    if th is None or tk is None:
                        continue
                    x2, y2 = self.locate_base(th, tk)
                    if sign > 0:
                        rec = (x, j, cy, x2, y2)
                        eh = self.rh.xout[(sh[0], j, sh[1])][2]
                        ek = self.rk.xout[(sk[0], j, sk[1])][2]
                    else:
                        rec = (x2, j, y2, x, cy)
                        eh = self.rh.xin[(sh[0], j, sh[1])][2]
                        ek = self.rk.xin[(sk[0], j, sk[1])][2]
                    k = (rec[0], j, self.out.canon_state(rec[0], rec[2]))
                    if k not in self.edges_x:
                        e = self.out.add_free_edge(*rec)
                        self.edges_x[k] = e
                        self.proj[("x", e)] = (eh, ek)

    def expand_factor(self, x, key):
        spec = self.spec
        v, v2, d = key
        i = self.gh.ffac[v]
        G = spec.factors[i]
        img = spec.img[i]
        done = set()
        for y in range(G.order):
            blk = self.out.block(x, y)
            if blk in done:
                continue
            done.add(blk)
            sh = self.rh.fstate[v].get(G.mult[d][y])
            sk = self.rk.fstate[v2].get(y)
            if sh is None or sk is None:
                continue
            xb, y2 = self.locate_base(sh, sk)
            if (xb, i) in self.edges_f:
                continue
            label = G.mult[y][img[spec.A.inv[y2]]]
            e = self.out.add_factor_edge(xb, x, label)
            self.edges_f[(xb, i)] = e
            self.proj[("f", e)] = (self.rh.fat[(sh[0], i)][2], self.rk.fat[(sk[0], i)][2])

    def run(self):
        while self.queue:
            kind, x, key = self.queue.popleft()
            if kind == "b":
                self.expand_base(x, key)
            else:
                self.expand_factor(x, key)


def pullback(gh: HGraph, gk: HGraph, components: str = "basepoint") -> PullbackGraph:
    """Fiber product. ``components='all'`` also materializes the components
    not containing the basepoint."""
    if gh.basepoint is None or gk.basepoint is None:
        raise PullbackError("pullback needs marked graphs")
    bl = _Builder(gh, gk)
    beta = bl.base_vertex(gh.basepoint, gk.basepoint, 0)
    bl.out.basepoint = beta
    bl.run()
    if components == "all":
        A = bl.spec.A
        for b in sorted(gh.P):
            for b2 in sorted(gk.P):
                for d in sorted({_dc_rep(A, gh.P[b], gk.P[b2], a) for a in range(A.order)}):
                    bl.base_vertex(b, b2, d)
                    bl.run()
    elif components != "basepoint":
        raise PullbackError(f"unknown components option {components!r}")
    out = bl.out
    out.canonicalize()
    out.folded = True
    pb = PullbackGraph(gh, gk, out, components=components)
    pb.base_key = {x: k for k, x in bl.bases.items()}
    pb.factor_key = {x: k for k, x in bl.factors.items()}
    pb.edge_proj = bl.proj
    return pb


def basepoint_component(pb: PullbackGraph) -> HGraph:
    g = pb.graph.copy()
    keep = {g.basepoint}
    changed = True
    while changed:
        changed = False
        for b, v, c in g.fedge.values():
            if (b in keep) != (v in keep):
                keep |= {b, v}
                changed = True
        for b, j, a, b2, d in g.xedge.values():
            if (b in keep) != (b2 in keep):
                keep |= {b, b2}
                changed = True
    g.P = {b: p for b, p in g.P.items() if b in keep}
    g.S = {v: s for v, s in g.S.items() if v in keep}
    g.ffac = {v: i for v, i in g.ffac.items() if v in keep}
    g.fedge = {e: r for e, r in g.fedge.items() if r[0] in keep}
    g.xedge = {e: r for e, r in g.xedge.items() if r[0] in keep}
    return g


def other_components(pb: PullbackGraph) -> list:
    """Non-basepoint components as marked graphs (each rooted at its smallest
    base vertex)."""
    g = pb.graph
    main = set(basepoint_component(pb).vertices)
    rest = [x for x in g.vertices if x not in main]
    comps, seen = [], set()
    for root in sorted(x for x in rest if x in g.P):
        if root in seen:
            continue
        h = g.copy()
        h.basepoint = root
        pb_tmp = PullbackGraph(pb.left, pb.right, h)
        c = basepoint_component(pb_tmp)
        seen |= set(c.vertices)
        comps.append(c)
    return comps


@dataclass
class Intersection:
    pullback: PullbackGraph
    folded: HGraph   # basepoint component
    core: Core
    generators: list
    data: object     # SubgroupData


def intersection_core(pb: PullbackGraph) -> Intersection:
    g = basepoint_component(pb)
    if not g.is_folded():
        raise HGraphError("pullback component is not folded")
    gens = generators_of(g)
    data = analyse_folded(g, gens)
    return Intersection(pb, g, trim_core(g), gens, data)


# -- fibers -------------------------------------------------------------------

@dataclass
class FiberReport:
    vertex_fibers: dict     # (b, b2) or (v, v2) -> count
    edge_fibers: dict       # (edge left, edge right) -> count
    N_eff: int
    M_H: int
    M_K: int
    A_cap_HK: int           # |A ∩ HK|, from the double cosets over the basepoint pair
    checks: list = field(default_factory=list)  # oracle cross-checks, filled in by the oracle

    @property
    def M(self):
        return max(self.M_H, self.M_K)

    def as_dict(self):
        return dict(N_eff=self.N_eff, M_H=self.M_H, M_K=self.M_K, A_cap_HK=self.A_cap_HK,
                    vertex_fibers={repr(k): v for k, v in sorted(self.vertex_fibers.items(), key=repr)},
                    edge_fibers={repr(k): v for k, v in sorted(self.edge_fibers.items(), key=repr)},
                    checks=list(self.checks))


def degenerate_max_order(g: HGraph) -> int:
    """Largest stabilizer among degenerate vertices of the quotient."""
    best = 1
    for x in g.vertices:
        if g.degenerate(x):
            best = max(best, g.stabilizer_order(x))
    return best


def fiber_report(pb: PullbackGraph) -> FiberReport:
    A = pb.graph.spec.A
    vf, ef = {}, {}
    for x, (b, b2, d) in pb.base_key.items():
        vf[(b, b2)] = vf.get((b, b2), 0) + 1
    for x, (v, v2, d) in pb.factor_key.items():
        vf[(v, v2)] = vf.get((v, v2), 0) + 1
    for k, pair in pb.edge_proj.items():
        ef[pair] = ef.get(pair, 0) + 1
    base_cells = [c for k, c in vf.items() if k[0] in pb.left.P]
    N = max(list(ef.values()) + base_cells + [1])
    bh, bk = pb.left.basepoint, pb.right.basepoint
    Ph, Pk = pb.left.P[bh], pb.right.P[bk]
    size = 0
    for x, (b, b2, d) in pb.base_key.items():
        if (b, b2) == (bh, bk):
            size += len({A.mult[A.mult[p][d]][q] for p in Ph for q in Pk})
    return FiberReport(vf, ef, N, degenerate_max_order(pb.left), degenerate_max_order(pb.right), size)


def to_dot(pb: PullbackGraph, name="pullback") -> str:
    rep = fiber_report(pb)
    notes = {key[1]: f" fiber={rep.edge_fibers[pair]}" for key, pair in pb.edge_proj.items()}
    txt = pb.graph.to_dot(name, edge_notes=notes)
    return txt.rstrip("}\n") + f'\n  label="N_eff={rep.N_eff} M={rep.M}";\n}}\n'
