"""Comparisons between the graph machinery and the brute-force oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ambient import AMALGAMATED, all_words, format_word
from .config import DEFAULT_L, WORD_CAP
from .graphs import graphs_isomorphic
from .hgraph import analyse, frames, quotient_ball, saturated
from .oracle import (UNVERIFIED, YES, bfs_subgroup, compare_fiber, oracle_fiber_count,
                     oracle_member, tree_ball_quotient)
from .pullback import basepoint_component


def word_budget(spec, max_len=8, cap=WORD_CAP):
    """Largest length <= max_len whose ball of normal forms stays under cap."""
    n = 0
    for k in range(1, max_len + 1):
        if len(all_words(spec, k, cap)) > cap:
            break
        n = k
    return n


@dataclass
class MembershipAgreement:
    words: int
    max_len: int
    accepted: int
    sound_failures: list = field(default_factory=list)   # accepted, oracle did not confirm
    oracle_only: list = field(default_factory=list)      # oracle confirmed, graph rejected

    @property
    def ok(self):
        return not self.sound_failures and not self.oracle_only


def membership_agreement(spec, gens, gamma=None, max_len=None, L=DEFAULT_L) -> MembershipAgreement:
    gamma = gamma or analyse(spec, gens).folded
    max_len = word_budget(spec) if max_len is None else max_len
    words = all_words(spec, max_len)
    ball = bfs_subgroup(spec, gens, L)
    rd = gamma.reader()
    rep = MembershipAgreement(len(words), max_len, 0)
    for w in words:
        acc = rd.accepts(w)
        rep.accepted += acc
        if w in ball.elements:
            if not acc:
                rep.oracle_only.append(format_word(w))
        elif acc and oracle_member(spec, gens, w, L, ball=ball, meet_in_middle=True) != YES:
            rep.sound_failures.append(format_word(w))
    return rep


def oracle_intersection(spec, hgens, kgens, L=DEFAULT_L):
    """Common elements of the two bounded balls."""
    bh = bfs_subgroup(spec, hgens, L)
    bk = bfs_subgroup(spec, kgens, L)
    return sorted(bh.elements & bk.elements, key=lambda w: (len(w), w))


def ball_comparison(spec, gens, gamma, R, L=DEFAULT_L) -> dict:
    """Tree-ball quotient against the folded side. In the plain setting the
    ball is compared with the radius-R ball of the completed quotient; when the
    graph is saturated and fits in the ball the trimmed graph itself is used."""
    q = tree_ball_quotient(spec, gens, R, L)
    out = dict(R=R, L=L, truncated=q.truncated)
    if spec.setting == AMALGAMATED:
        if not saturated(gamma):
            out.update(status="not-compared", reason="amalgamated quotient outside the hull")
            return out
        target = _labelled_by_order(gamma)
    else:
        target = quotient_ball(gamma, R)
    ok, _ = graphs_isomorphic(q.graph, target)
    out.update(status="agree" if ok else "disagree", vertices=[q.graph.n_vertices, target.n_vertices],
               edges=[q.graph.n_edges, target.n_edges])
    return out


def _labelled_by_order(gamma):
    from .graphs import Graph
    g = Graph()
    for b, P in gamma.P.items():
        g.add_vertex(b, ("base", len(P)))
    for v, S in gamma.S.items():
        g.add_vertex(v, ("factor", gamma.ffac[v], len(S)))
    for b, v, c in gamma.fedge.values():
        i = gamma.ffac[v]
        g.add_edge(b, v, ("f", i), ("F", i))
    for b, j, a, b2, d in gamma.xedge.values():
        g.add_edge(b, b2, ("x", j), ("X", j))
    return g


def fiber_crosscheck(spec, hgens, kgens, pb, L=6) -> list:
    """Oracle double-coset counts over every vertex cell of the pullback
    basepoint component (base cells double as factor-edge cells), compared
    with the pullback prediction."""
    g = basepoint_component(pb)
    wb, gv, _ = frames(g)
    bh = bfs_subgroup(spec, hgens, L)
    bk = bfs_subgroup(spec, kgens, L)
    bkeys = {pb.base_key[x] for x in g.P}
    fkeys = {pb.factor_key[x] for x in g.S}
    results = []
    for x in sorted(g.vertices):
        if x in g.P:
            u, u2, d0 = pb.base_key[x]
            X, S1, S2, factor, w, keys = spec.A, pb.left.P[u], pb.right.P[u2], None, wb[x], bkeys
        else:
            u, u2, d0 = pb.factor_key[x]
            factor = pb.left.ffac[u]
            X, S1, S2, w, keys = spec.factors[factor], pb.left.S[u], pb.right.S[u2], gv[x], fkeys
        def key_of(a):
            alpha = X.mult[d0][a]
            return (u, u2, min(X.mult[X.mult[p][alpha]][q] for p in S1 for q in S2))
        hk_pred = frozenset(a for a in range(X.order) if key_of(a) in keys)
        h_pred = frozenset(a for a in range(X.order) if X.mult[X.mult[d0][a]][X.inv[d0]] in S1)
        found = oracle_fiber_count(spec, hgens, kgens, w, L, balls=(bh, bk), factor=factor)
        predicted = sum(1 for k in keys if k[:2] == (u, u2))
        status = compare_fiber(found, hk_pred, h_pred, frozenset(S2))
        results.append(dict(cell=[u, u2], kind="base" if factor is None else "factor",
                            predicted=predicted, oracle=found.count(), status=status))
    return results


def fiber_summary(results) -> dict:
    n = len(results)
    unver = sum(r["status"] == UNVERIFIED for r in results)
    contra = sum(r["status"] == "contradiction" for r in results)
    mism = sum(r["status"] == "verified" and r["predicted"] != r["oracle"] for r in results)
    return dict(cells=n, unverified=unver, contradictions=contra, count_mismatch=mism)


def intersection_crosscheck(spec, hgens, kgens, inter, L=DEFAULT_L) -> dict:
    """Complexity of H∩K from the pullback against the subgroup generated by
    oracle-certified intersection elements: common elements of the two balls
    plus every pullback generator the oracle confirms in H and in K."""
    bh = bfs_subgroup(spec, hgens, L)
    bk = bfs_subgroup(spec, kgens, L)
    common = [w for w in bh.elements & bk.elements if w]
    uncertified = []
    for g in inter.generators:
        if (oracle_member(spec, hgens, g, L, ball=bh, meet_in_middle=True) == YES
                and oracle_member(spec, kgens, g, L, ball=bk, meet_in_middle=True) == YES):
            common.append(g)
        else:
            uncertified.append(format_word(g))
    common.sort(key=lambda w: (len(w), w))
    oracle_side = analyse(spec, common)
    c_pb, c_or = inter.data.report, oracle_side.report
    same = (c_pb.C, c_pb.elliptic, c_pb.trivial) == (c_or.C, c_or.elliptic, c_or.trivial)
    status = "uncertified" if uncertified else ("agree" if same else "disagree")
    return dict(status=status, C_pullback=c_pb.C, C_oracle=c_or.C, elements=len(common),
                uncertified=uncertified, truncated=bh.truncated or bk.truncated)
