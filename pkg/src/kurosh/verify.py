"""Hypothesis filters and inequality checks for one pair of subgroups."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .ambient import AMALGAMATED, PLAIN, AmbientSpec, format_word, normalize, plain
from .finite import a3_theta, quotient_group
from .hgraph import analyse, tilde_graph
from .pullback import fiber_report, intersection_core, pullback

FINITE_INDEX_REASON = "no infinite vertex stabilizers"


@dataclass
class Check:
    name: str
    applicable: bool
    lhs: object = None
    rhs: object = None
    ok: bool | None = None
    reason: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def ratio(self):
        if not self.applicable:
            return None
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else float("inf")
        return float(Fraction(self.lhs) / Fraction(self.rhs))

    def as_dict(self):
        d = dict(name=self.name, applicable=self.applicable, ok=self.ok, reason=self.reason)
        if self.applicable:
            d.update(lhs=_num(self.lhs), rhs=_num(self.rhs), ratio=_num(self.ratio))
        if self.detail:
            d["detail"] = self.detail
        return d


def _num(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else round(float(x), 6)
    if isinstance(x, float):
        return round(x, 6) if x != float("inf") else "inf"
    return x


def skip(name, reason) -> Check:
    return Check(name, False, reason=reason)


def bound(name, lhs, rhs, **detail) -> Check:
    return Check(name, True, lhs, rhs, Fraction(lhs) <= Fraction(rhs), detail=detail)


# -- theta --------------------------------------------------------------------

def theta_plain(spec: AmbientSpec) -> Fraction:
    """Every finite subgroup of a free product is conjugate into a factor, so
    the largest factor value is the value for the whole group."""
    return max((a3_theta(G)[1] for G in spec.factors), default=Fraction(1))


def theta_amalgam(spec: AmbientSpec) -> Fraction:
    best = Fraction(1)
    for i, G in enumerate(spec.factors):
        Q, _ = quotient_group(G, spec.img_set[i])
        best = max(best, a3_theta(Q)[1])
    return best


def quotient_spec(spec: AmbientSpec):
    """Plain spec over the factor quotients G_i/A plus the word map. Requires
    free rank 0 so that A is normal in G and acts trivially on the tree."""
    if spec.setting != AMALGAMATED or spec.free_rank:
        raise ValueError("quotient reduction needs an amalgamated spec without free part")
    maps = [quotient_group(G, spec.img_set[i]) for i, G in enumerate(spec.factors)]
    if any(Q.order < 2 for Q, _ in maps):
        raise ValueError("a factor equals the amalgam")
    qs = plain([Q for Q, _ in maps])

    def push(word):
        return normalize(qs, [("f", l[1], maps[l[1]][1](l[2])) for l in word if l[0] == "f"])

    return qs, push


# -- analysis of a pair -------------------------------------------------------

class PairAnalysis:
    def __init__(self, spec: AmbientSpec, hgens, kgens, rng=None):
        self.spec = spec
        self.H = analyse(spec, hgens, rng=rng)
        self.K = analyse(spec, kgens, rng=rng)
        self.pb = pullback(self.H.folded, self.K.folded)
        self.inter = intersection_core(self.pb)
        self.I = self.inter.data
        self.fib = fiber_report(self.pb)

    @property
    def N(self):
        return self.fib.N_eff

    @property
    def M(self):
        return self.fib.M


def degenerate_valence_two(data) -> bool:
    if data.core.elliptic:
        return False
    g = data.core.graph
    val = g.valence()
    return any(val[x] == 2 and g.degenerate(x) for x in g.vertices)


def star_hypothesis(spec, data) -> bool:
    """Stabilizers of degenerate vertices fix their whole star. Degenerate
    factor vertices always do (A is normal in each factor); base vertices do
    iff they have no free edges or a trivial stabilizer."""
    if spec.free_rank == 0:
        return True
    return all(len(p) == 1 for p in data.folded.P.values())


def kbar(rep):
    return max(rep.kurosh_rank - 1, 0) if rep.kurosh_rank is not None else None


# -- theorem checks -----------------------------------------------------------

def check_thm1_part1(pa: PairAnalysis) -> Check:
    name = "thm1_part1"
    if pa.I.elliptic:
        return skip(name, "intersection fixes a vertex")
    if degenerate_valence_two(pa.H) or degenerate_valence_two(pa.K):
        return skip(name, "degenerate vertex of valence two in a core")
    N, M = pa.N, pa.M
    coeff = 6 * N * M + 12 * (M - 1) * N
    return bound(name, pa.I.report.C_bar, coeff * pa.H.report.C_bar * pa.K.report.C_bar,
                 coefficient=coeff, N_eff=N, M=M)


def check_thm1_part2(pa: PairAnalysis) -> list:
    if pa.I.elliptic:
        return [skip("thm1_part2", "intersection fixes a vertex"),
                skip("thm1_part2_kurosh", "intersection fixes a vertex")]
    if not (star_hypothesis(pa.spec, pa.H) and star_hypothesis(pa.spec, pa.K)):
        return [skip("thm1_part2", "a degenerate stabilizer moves an edge of its star"),
                skip("thm1_part2_kurosh", "a degenerate stabilizer moves an edge of its star")]
    N = pa.N
    out = [bound("thm1_part2", pa.I.report.C_bar, 6 * N * pa.H.report.C_bar * pa.K.report.C_bar,
                 coefficient=6 * N, N_eff=N)]
    if pa.H.report.edge_free and pa.K.report.edge_free:
        out.append(bound("thm1_part2_kurosh", kbar(pa.I.report),
                         6 * N * kbar(pa.H.report) * kbar(pa.K.report), coefficient=6 * N))
    else:
        out.append(skip("thm1_part2_kurosh", "H or K meets an edge stabilizer"))
    return out


def check_thm2(pa: PairAnalysis) -> list:
    names = ("thm2", "thm2_A")
    spec = pa.spec
    if spec.setting != AMALGAMATED:
        return [skip(n, "plain setting") for n in names]
    if not (pa.H.report.edge_free and pa.K.report.edge_free):
        return [skip(n, "H or K meets an edge stabilizer") for n in names]
    if pa.I.elliptic:
        return [skip(n, "intersection fixes a vertex") for n in names]
    th = theta_amalgam(spec)
    prod = kbar(pa.H.report) * kbar(pa.K.report)
    lhs = kbar(pa.I.report)
    return [bound("thm2", lhs, 2 * th * pa.N * prod, theta=_num(th), N_eff=pa.N),
            bound("thm2_A", lhs, 2 * th * spec.A.order * prod, theta=_num(th))]


def check_thm3(pa: PairAnalysis) -> list:
    names = ("thm3", "thm3_A", "thm3_reduction")
    spec = pa.spec
    if spec.setting != AMALGAMATED or spec.free_rank:
        return [skip(n, "needs an amalgamated spec without free part") for n in names]
    if pa.I.elliptic:
        return [skip(n, "intersection fixes a vertex") for n in names]
    th = theta_amalgam(spec)
    prod = pa.H.report.C_bar * pa.K.report.C_bar
    lhs = pa.I.report.C_bar
    out = [bound("thm3", lhs, 2 * th * pa.fib.A_cap_HK * prod, theta=_num(th), A_cap_HK=pa.fib.A_cap_HK),
           bound("thm3_A", lhs, 2 * th * spec.A.order * prod, theta=_num(th))]
    try:
        qs, push = quotient_spec(spec)
    except ValueError as exc:
        out.append(skip("thm3_reduction", str(exc)))
        return out
    mismatch = 0
    values = {}
    for tag, data in (("H", pa.H), ("K", pa.K), ("HK", pa.I)):
        q = analyse(qs, [w for w in map(push, data.gens) if w])
        values[tag] = [data.report.C, q.report.C]
        mismatch += data.report.C != q.report.C
    out.append(bound("thm3_reduction", mismatch, 0, complexities=values))
    return out


def check_ivanov(pa: PairAnalysis) -> Check:
    name = "ivanov"
    if pa.spec.setting != PLAIN:
        return skip(name, "amalgamated setting")
    if pa.I.elliptic:
        return skip(name, "intersection fixes a vertex")
    th = theta_plain(pa.spec)
    return bound(name, kbar(pa.I.report), 2 * th * kbar(pa.H.report) * kbar(pa.K.report), theta=_num(th))


def check_corollaries(pa: PairAnalysis) -> list:
    out = []
    if pa.I.elliptic:
        out.append(skip("zakharov", "intersection fixes a vertex"))
    elif not (pa.H.folded.is_free_subgroup() and pa.K.folded.is_free_subgroup()):
        out.append(skip("zakharov", "H or K meets a vertex stabilizer"))
    else:
        out.append(bound("zakharov", pa.I.report.C_bar,
                         6 * pa.N * pa.H.report.C_bar * pa.K.report.C_bar, coefficient=6 * pa.N))
    out.append(skip("finite_index", FINITE_INDEX_REASON))
    return out


def check_trivial_elliptic(pa: PairAnalysis) -> Check:
    if not pa.I.elliptic:
        return skip("elliptic_trivial", "intersection contains a hyperbolic element")
    return bound("elliptic_trivial", pa.I.report.C_bar, pa.H.report.C_bar * pa.K.report.C_bar)


# -- local inequalities --------------------------------------------------------

def _pairs(pa: PairAnalysis):
    """Fibers of the core of H∩K over pairs of core vertices of H and K."""
    X = pa.inter.core.graph
    fib = {}
    for p in X.vertices:
        key = pa.pb.base_key.get(p) or pa.pb.factor_key[p]
        fib.setdefault((key[0], key[1]), []).append(p)
    return fib


def check_local_degree_inequality(pa: PairAnalysis) -> list:
    names = ("local_fiber_degree", "local_case1", "local_part1", "local_part2")
    if pa.I.elliptic:
        return [skip(n, "intersection fixes a vertex") for n in names]
    Xc, Yc, Zc = pa.inter.core, pa.H.core, pa.K.core
    dX, dY, dZ = (tilde_graph(c).degrees() for c in (Xc, Yc, Zc))
    vX, vY, vZ = Xc.graph.valence(), Yc.graph.valence(), Zc.graph.valence()
    N, M = pa.N, pa.M
    part1 = not (degenerate_valence_two(pa.H) or degenerate_valence_two(pa.K))
    part2 = star_hypothesis(pa.spec, pa.H) and star_hypothesis(pa.spec, pa.K)
    coeffs = {"local_part1": 3 * N * M + 6 * N * (M - 1), "local_part2": 3 * N}
    stats = {n: dict(pairs=0, violations=0, worst=None) for n in names}

    def record(n, lhs, rhs, pair):
        st = stats[n]
        st["pairs"] += 1
        c = bound(n, lhs, rhs)
        if not c.ok:
            st["violations"] += 1
        if st["worst"] is None or (c.ratio or 0) > (st["worst"].ratio or 0) or not c.ok:
            c.detail = dict(pair=[str(pair[0]), str(pair[1])])
            st["worst"] = c

    for (a, b), fiber in sorted(_pairs(pa).items(), key=repr):
        if a not in dY or b not in dZ:
            # an image outside the cores would contradict T_{H∩K} ⊆ T_H ∩ T_K
            stats["local_fiber_degree"]["violations"] += 1
            continue
        record("local_fiber_degree", sum(vX[p] for p in fiber), N * vY[a] * vZ[b], (a, b))
        lhs = sum(dX[p] - 2 for p in fiber)
        rhs0 = (dY[a] - 2) * (dZ[b] - 2)
        if not Yc.graph.degenerate(a) and not Zc.graph.degenerate(b):
            record("local_case1", lhs, N * rhs0, (a, b))
        if part1:
            record("local_part1", lhs, coeffs["local_part1"] * rhs0, (a, b))
        if part2:
            record("local_part2", lhs, coeffs["local_part2"] * rhs0, (a, b))

    out = []
    for n in names:
        st = stats[n]
        if n == "local_part1" and not part1:
            out.append(skip(n, "degenerate vertex of valence two in a core"))
            continue
        if n == "local_part2" and not part2:
            out.append(skip(n, "a degenerate stabilizer moves an edge of its star"))
            continue
        w = st["worst"]
        if w is None:
            c = Check(n, True, 0, 0, st["violations"] == 0)
        else:
            c = Check(n, True, w.lhs, w.rhs, st["violations"] == 0, detail=dict(w.detail))
        c.detail.update(pairs=st["pairs"], violations=st["violations"])
        if n in coeffs:
            c.detail["coefficient"] = coeffs[n]
        out.append(c)
    return out


def _star_ends(g, x):
    ends = []
    for e, (b, v, c) in g.fedge.items():
        if b == x or v == x:
            ends.append(("f", e))
    for e, (b, j, a, b2, d) in g.xedge.items():
        if b == x:
            ends.append(("xo", e))
        if b2 == x:
            ends.append(("xi", e))
    return ends


def _fixes_star(g, y) -> bool:
    """The stabilizer of core vertex y fixes every edge of its core star."""
    if y in g.P:
        return len(g.P[y]) == 1 or not any(b == y or b2 == y for b, _, _, b2, _ in g.xedge.values())
    return g.degenerate(y)


def check_lemma2(pa: PairAnalysis) -> list:
    if pa.I.elliptic:
        return [skip("lemma2_star", "intersection fixes a vertex"),
                skip("lemma2_embedding", "intersection fixes a vertex")]
    X = pa.inter.core.graph
    vX = X.valence()
    star_bad = star_n = emb_bad = emb_n = 0
    worst = None
    for side, sup in ((0, pa.H), (1, pa.K)):
        Y = sup.core.graph
        vY = Y.valence()
        for p in X.vertices:
            key = pa.pb.base_key.get(p) or pa.pb.factor_key[p]
            y = key[side]
            if y not in vY:
                star_bad += 1
                continue
            lhs, rhs = vX[p], sup.folded.stabilizer_order(y) * vY[y]
            star_n += 1
            if lhs > rhs:
                star_bad += 1
            if worst is None or lhs * (worst[1] or 1) > worst[0] * (rhs or 1):
                worst = (lhs, rhs)
            if _fixes_star(Y, y):
                emb_n += 1
                images = [(kind, pa.pb.edge_proj[("f" if kind == "f" else "x", e)][side])
                          for kind, e in _star_ends(X, p)]
                if len(set(images)) != len(images):
                    emb_bad += 1
    return [Check("lemma2_star", True, worst[0] if worst else 0, worst[1] if worst else 0,
                  star_bad == 0, detail=dict(vertices=star_n, violations=star_bad)),
            Check("lemma2_embedding", True, emb_bad, 0, emb_bad == 0,
                  detail=dict(vertices=emb_n, violations=emb_bad))]


def all_checks(pa: PairAnalysis) -> list:
    out = [check_thm1_part1(pa)]
    out += check_thm1_part2(pa)
    out += check_thm2(pa)
    out += check_thm3(pa)
    out.append(check_ivanov(pa))
    out += check_corollaries(pa)
    out.append(check_trivial_elliptic(pa))
    out += check_local_degree_inequality(pa)
    out += check_lemma2(pa)
    return out


# -- records ------------------------------------------------------------------

@dataclass
class VerificationRecord:
    instance_id: str
    spec: str
    gens_H: list
    gens_K: list
    elliptic: dict
    hypotheses: dict
    measured: dict
    checks: list
    oracle: dict = field(default_factory=dict)
    intersection_gens: list = field(default_factory=list)

    @property
    def violations(self):
        return [c for c in self.checks if c.applicable and not c.ok]

    def as_dict(self):
        return dict(instance_id=self.instance_id, spec=self.spec, gens_H=self.gens_H, gens_K=self.gens_K,
                    intersection_gens=self.intersection_gens, elliptic=self.elliptic,
                    hypotheses=self.hypotheses, measured=self.measured,
                    checks=[c.as_dict() for c in self.checks], oracle=self.oracle)


def verify_pair(spec: AmbientSpec, hgens, kgens, instance_id="0", pa: PairAnalysis | None = None) -> VerificationRecord:
    pa = pa or PairAnalysis(spec, hgens, kgens)
    checks = all_checks(pa)
    th = theta_amalgam(spec) if spec.setting == AMALGAMATED else theta_plain(spec)
    measured = dict(
        H=pa.H.report.as_dict(), K=pa.K.report.as_dict(), HK=pa.I.report.as_dict(),
        N_eff=pa.N, M_H=pa.fib.M_H, M_K=pa.fib.M_K, theta=_num(th), A_cap_HK=pa.fib.A_cap_HK,
        N_note="N_eff: largest realized fiber over pullback edge cells and base-vertex cells",
    )
    hyp = dict(
        no_degenerate_valence_two=not (degenerate_valence_two(pa.H) or degenerate_valence_two(pa.K)),
        star_stabilization=star_hypothesis(spec, pa.H) and star_hypothesis(spec, pa.K),
        edge_free_H=pa.H.report.edge_free, edge_free_K=pa.K.report.edge_free,
        free_H=pa.H.folded.is_free_subgroup(), free_K=pa.K.folded.is_free_subgroup(),
    )
    return VerificationRecord(
        instance_id, spec.describe(), [format_word(w) for w in hgens], [format_word(w) for w in kgens],
        dict(H=pa.H.elliptic, K=pa.K.elliptic, HK=pa.I.elliptic), hyp, measured, checks,
        oracle=dict(status="not-run"), intersection_gens=[format_word(w) for w in pa.inter.generators])
