"""Randomized campaigns: instance profiles, generation, and aggregate statistics."""

from __future__ import annotations

import csv
import json
import os
import random
import time
from dataclasses import asdict, dataclass, field

from .ambient import AMALGAMATED, PLAIN, amalgamated, conjugate, invert, plain, product, random_word
from .finite import central_embedding, make_group
from .hgraph import analyse
from .instance import Instance, format_instance
from .config import DEFAULT_L
from .crosscheck import intersection_crosscheck
from .verify import PairAnalysis, degenerate_valence_two, verify_pair


class ProfileError(ValueError):
    pass


@dataclass
class InstanceProfile:
    name: str
    setting: str = PLAIN
    factor_kinds: tuple = ("cyclic:2", "cyclic:3")
    n_factors: tuple = (2, 2)
    free_rank: tuple = (0, 0)
    amalgams: tuple = ()          # amalgam descriptors; factors embed A centrally
    h_gens: tuple = (1, 3)
    k_gens: tuple = (0, 2)
    syllables: tuple = (1, 4)
    require: tuple = ()           # any of "edge_free", "free", "non_elliptic", "no_valence_two"
    max_attempts: int = 40
    mode: str = "words"           # "words", or "finite_index" (plain only)
    index: tuple = (2, 5)         # coset counts for finite_index mode
    seed: int = 0

    def __post_init__(self):
        for name in ("n_factors", "free_rank", "h_gens", "k_gens", "syllables"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ProfileError(f"{self.name}: empty range {name}={lo, hi}")
        if not self.factor_kinds and self.n_factors[1] > 0:
            raise ProfileError(f"{self.name}: no factor kinds to draw from")
        if self.setting == AMALGAMATED and not self.amalgams:
            raise ProfileError(f"{self.name}: amalgamated profiles need amalgam descriptors")
        if self.mode not in ("words", "finite_index"):
            raise ProfileError(f"{self.name}: unknown mode {self.mode!r}")
        if self.mode == "finite_index" and (self.setting != PLAIN or self.index[0] < 1
                                            or self.index[0] > self.index[1]):
            raise ProfileError(f"{self.name}: finite_index mode needs a plain setting and a valid index range")
        if self.h_gens[1] < 1:
            raise ProfileError(f"{self.name}: H needs at least one generator")

    def with_seed(self, seed):
        d = asdict(self)
        d["seed"] = seed
        return InstanceProfile(**d)


def _central_hosts(A, kinds):
    out = []
    for k in kinds:
        try:
            central_embedding(A, make_group(k))
            out.append(k)
        except ValueError:
            pass
    return out


PROFILES = {
    "plain": InstanceProfile(
        "plain", factor_kinds=("cyclic:2", "cyclic:3", "cyclic:4", "sym:3"),
        n_factors=(1, 3), free_rank=(0, 2), h_gens=(1, 4), k_gens=(0, 3), syllables=(1, 6)),
    "plain-wide": InstanceProfile(
        "plain-wide", factor_kinds=("cyclic:2", "cyclic:3", "cyclic:4", "sym:3"),
        n_factors=(3, 4), free_rank=(1, 2), h_gens=(2, 4), k_gens=(1, 3), syllables=(2, 5)),
    "tiny": InstanceProfile(
        "tiny", factor_kinds=("cyclic:2", "cyclic:3"),
        n_factors=(0, 2), free_rank=(0, 1), h_gens=(1, 2), k_gens=(0, 1), syllables=(1, 3)),
    "free": InstanceProfile(
        "free", factor_kinds=("cyclic:2", "cyclic:3", "sym:3"),
        n_factors=(0, 2), free_rank=(0, 2), h_gens=(1, 3), k_gens=(0, 2), syllables=(2, 5),
        require=("free",)),
    "amalgam-edge-free": InstanceProfile(
        "amalgam-edge-free", setting=AMALGAMATED,
        factor_kinds=("cyclic:4", "cyclic:6", "dihedral:4", "cyclic:9"), amalgams=("cyclic:2", "cyclic:3"),
        n_factors=(2, 3), free_rank=(0, 1), h_gens=(1, 3), k_gens=(0, 2), syllables=(2, 5),
        require=("edge_free", "non_elliptic")),
    "amalgam": InstanceProfile(
        "amalgam", setting=AMALGAMATED,
        factor_kinds=("cyclic:4", "cyclic:6", "dihedral:4", "cyclic:9"), amalgams=("cyclic:2", "cyclic:3"),
        n_factors=(2, 3), free_rank=(0, 0), h_gens=(1, 3), k_gens=(0, 2), syllables=(1, 5),
        require=("non_elliptic",)),
    # random finite-index subgroups: full stars everywhere, so no degenerate
    # vertex of valence two once factors have order >= 3 and base stars have >= 3 edges
    "valence": InstanceProfile(
        "valence", factor_kinds=("cyclic:3", "cyclic:4", "sym:3"),
        n_factors=(3, 4), free_rank=(0, 1), mode="finite_index", index=(1, 4),
        require=("no_valence_two", "non_elliptic")),
}


def load_profile(name_or_path, seed=None) -> InstanceProfile:
    """A built-in profile name, or a JSON file of InstanceProfile fields."""
    if name_or_path in PROFILES:
        prof = PROFILES[name_or_path]
    else:
        try:
            with open(name_or_path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ProfileError(f"no built-in profile or file named {name_or_path!r}") from None
        except json.JSONDecodeError as exc:
            raise ProfileError(f"{name_or_path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ProfileError(f"{name_or_path}: expected a JSON object")
        known = set(InstanceProfile.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ProfileError(f"{name_or_path}: unknown profile keys {unknown}")
        raw.setdefault("name", os.path.basename(str(name_or_path)))
        try:
            prof = InstanceProfile(**{k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()})
        except TypeError as exc:
            raise ProfileError(f"{name_or_path}: {exc}") from None
    return prof if seed is None else prof.with_seed(seed)


# -- generation ---------------------------------------------------------------

def _spec(profile, rng):
    nf = rng.randint(*profile.n_factors)
    fr = rng.randint(*profile.free_rank)
    if profile.setting == PLAIN:
        if nf + fr < 2:                 # keep the ambient group infinite
            fr = 2 - nf
        return plain([make_group(rng.choice(profile.factor_kinds)) for _ in range(nf)], fr)
    a_kind = rng.choice(profile.amalgams)
    A = make_group(a_kind)
    hosts = _central_hosts(A, profile.factor_kinds)
    if not hosts:
        raise ProfileError(f"{profile.name}: no factor kind has central {a_kind}")
    nf = max(2, nf) if fr == 0 else max(1, nf)
    factors = [make_group(rng.choice(hosts)) for _ in range(nf)]
    return amalgamated(factors, A, [central_embedding(A, G) for G in factors], fr)


def _gens(spec, profile, rng):
    lo, hi = profile.syllables
    hg = [random_word(spec, rng.randint(lo, hi), rng=rng) for _ in range(rng.randint(*profile.h_gens))]
    kg = [random_word(spec, rng.randint(lo, hi), rng=rng) for _ in range(rng.randint(*profile.k_gens))]
    # tie K to H so that intersections are often nontrivial
    pick = rng.random()
    if pick < 0.4:
        kg.append(product(spec, rng.choice(hg), rng.choice(hg)))
    elif pick < 0.7:
        kg.append(conjugate(spec, random_word(spec, 2, rng=rng), rng.choice(hg)))
    elif pick < 0.85:
        kg.append(product(spec, rng.choice(hg), rng.choice(hg), rng.choice(hg)))
    kg = [w for w in kg if w] or [rng.choice(hg)]
    return hg, kg


def _satisfies(spec, gens, require):
    if not require:
        return True
    d = analyse(spec, gens)
    if "edge_free" in require and not d.report.edge_free:
        return False
    if "free" in require and not d.folded.is_free_subgroup():
        return False
    if "non_elliptic" in require and d.elliptic:
        return False
    if "no_valence_two" in require and degenerate_valence_two(d):
        return False
    return True


def generate_instance(profile: InstanceProfile, index: int) -> Instance:
    """Instance ``index`` of the profile; depends only on (seed, index)."""
    rng = random.Random(f"{profile.seed}:{index}")
    spec = _spec(profile, rng)
    for _ in range(profile.max_attempts):
        if profile.mode == "finite_index":
            try:
                hg = finite_index_gens(spec, rng.randint(*profile.index), rng)
                kg = finite_index_gens(spec, rng.randint(*profile.index), rng)
            except ProfileError:        # no transitive action of that degree
                continue
        else:
            hg, kg = _gens(spec, profile, rng)
        if _satisfies(spec, hg, profile.require) and _satisfies(spec, kg, profile.require):
            break
    else:
        # fall back to hyperbolic powers, which meet no vertex stabilizer
        hg, kg = _fallback(spec, rng, profile.require)
    return Instance(spec, hg, kg, seed=profile.seed, has_K=True)


def _random_action(G, n, rng):
    """Right action of G on n points (list of permutations indexed by element),
    assembled from orbits G acting on right cosets of random subgroups."""
    subs = sorted({G.closure([g, h]) for g in range(G.order) for h in range(G.order)}, key=sorted)
    perm = [[None] * n for _ in range(G.order)]
    points = list(range(n))
    rng.shuffle(points)
    left = n
    while left:
        S = rng.choice([S for S in subs if G.order // len(S) <= left])
        cosets = []
        for g in range(G.order):
            c = frozenset(G.mult[s][g] for s in S)
            if c not in cosets:
                cosets.append(c)
        pts = [points.pop() for _ in cosets]
        where = {c: p for c, p in zip(cosets, pts)}
        for c, p in where.items():
            rep = min(c)
            for g in range(G.order):
                target = frozenset(G.mult[s][G.mult[rep][g]] for s in S)
                perm[g][p] = where[target]
        left -= len(cosets)
    return perm


def finite_index_gens(spec, n, rng, tries=20):
    """Schreier generators of the stabilizer of point 0 under a random
    transitive action of a plain free product on n points."""
    letters = [(("f", i, y),) for i, G in enumerate(spec.factors) for y in range(1, G.order)]
    letters += [(("x", j, e),) for j in range(spec.free_rank) for e in (1, -1)]
    for _ in range(tries):
        acts = {}
        for i, G in enumerate(spec.factors):
            perm = _random_action(G, n, rng)
            for y in range(1, G.order):
                acts[("f", i, y)] = perm[y]
        for j in range(spec.free_rank):
            p = list(range(n))
            rng.shuffle(p)
            acts[("x", j, 1)] = p
            acts[("x", j, -1)] = [p.index(k) for k in range(n)]
        tree = {0: ()}
        queue = [0]
        for p in queue:
            for s in letters:
                q = acts[s[0]][p]
                if q not in tree:
                    tree[q] = product(spec, tree[p], s)
                    queue.append(q)
        if len(tree) < n:
            continue
        gens = []
        for p in range(n):
            for s in letters:
                w = product(spec, tree[p], s, invert(spec, tree[acts[s[0]][p]]))
                if w and w not in gens and invert(spec, w) not in gens:
                    gens.append(w)
        return gens
    raise ProfileError(f"no transitive action on {n} points found")


def _fallback(spec, rng, require):
    for _ in range(200):
        u = random_word(spec, 4, rng=rng)
        hg = [product(spec, u, u)]
        kg = [product(spec, u, u, u, u)]
        if _satisfies(spec, hg, require) and _satisfies(spec, kg, require):
            return hg, kg
    raise ProfileError("could not satisfy the profile requirements")


# -- campaigns ----------------------------------------------------------------

SHARP_RATIO = 0.75          # ratios at or above this are reported as sharpness candidates
EXIT_CLEAN, EXIT_VIOLATION, EXIT_ORACLE = 0, 3, 4


@dataclass
class CheckStats:
    applicable: int = 0
    not_applicable: int = 0
    violations: int = 0
    max_ratio: float = 0.0
    reasons: dict = field(default_factory=dict)

    def add(self, check):
        if not check.applicable:
            self.not_applicable += 1
            self.reasons[check.reason] = self.reasons.get(check.reason, 0) + 1
            return
        self.applicable += 1
        self.violations += not check.ok
        r = check.ratio
        if r is not None and r > self.max_ratio:
            self.max_ratio = r


@dataclass
class CampaignSummary:
    profile: str
    seed: int
    n: int = 0
    elliptic_intersections: int = 0
    checks: dict = field(default_factory=dict)
    sharpness: list = field(default_factory=list)
    oracle: dict = field(default_factory=lambda: dict(compared=0, agree=0, disagree=0, uncertified=0))
    reproducers: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)

    @property
    def violations(self):
        return sum(s.violations for s in self.checks.values())

    @property
    def exit_code(self):
        if self.violations:
            return EXIT_VIOLATION
        if self.oracle["disagree"]:
            return EXIT_ORACLE
        return EXIT_CLEAN

    def as_dict(self):
        return dict(profile=self.profile, seed=self.seed, n=self.n, violations=self.violations,
                    elliptic_intersections=self.elliptic_intersections,
                    checks={k: asdict(v) for k, v in sorted(self.checks.items())},
                    sharpness=self.sharpness, oracle=self.oracle, reproducers=self.reproducers,
                    runtime=self.runtime, exit_code=self.exit_code)

    def csv_rows(self):
        rows = [["check", "applicable", "not_applicable", "violations", "max_ratio"]]
        for name, s in sorted(self.checks.items()):
            rows.append([name, s.applicable, s.not_applicable, s.violations, f"{s.max_ratio:.6f}"])
        return rows


def record_line(record) -> str:
    return json.dumps(record.as_dict(), sort_keys=True, separators=(",", ":"))


def _violating(spec, hg, kg, names):
    if not hg or not kg:
        return False
    return any(c.name in names for c in verify_pair(spec, hg, kg).violations)


def minimize(inst: Instance, names) -> Instance:
    """Greedily drop generators while some check in ``names`` still fails."""
    hg, kg = list(inst.H), list(inst.K)
    changed = True
    while changed:
        changed = False
        for side in (hg, kg):
            for i in range(len(side)):
                trial = side[:i] + side[i + 1:]
                pair = (trial, kg) if side is hg else (hg, trial)
                if _violating(inst.spec, *pair, names):
                    side[:] = trial
                    changed = True
                    break
    return Instance(inst.spec, hg, kg, dict(inst.budgets), inst.seed, True)


def run_campaign(profile: InstanceProfile, n: int, out=None, oracle_every=0, L=None,
                 sharp=SHARP_RATIO, keep_sharp=5, progress=None) -> CampaignSummary:
    """Generate and verify ``n`` instances. With ``out`` set, writes
    records.jsonl, summary.csv and summary.json there, plus one reproducer
    file per violating instance."""
    if n < 1:
        raise ProfileError("a campaign needs at least one instance")
    L = DEFAULT_L if L is None else L
    summary = CampaignSummary(profile.name, profile.seed)
    jsonl = None
    if out is not None:
        os.makedirs(out, exist_ok=True)
        jsonl = open(os.path.join(out, "records.jsonl"), "w", encoding="utf-8", newline="\n")
    t0 = time.perf_counter()
    try:
        for i in range(n):
            inst = generate_instance(profile, i)
            pa = PairAnalysis(inst.spec, inst.H, inst.K)
            rec = verify_pair(inst.spec, inst.H, inst.K, f"{profile.name}-{profile.seed}-{i}", pa=pa)
            if oracle_every and i % oracle_every == 0:
                rec.oracle = intersection_crosscheck(inst.spec, inst.H, inst.K, pa.inter, L)
                summary.oracle["compared"] += 1
                summary.oracle[rec.oracle["status"]] += 1
            summary.n += 1
            summary.elliptic_intersections += rec.elliptic["HK"]
            for c in rec.checks:
                summary.checks.setdefault(c.name, CheckStats()).add(c)
                r = c.ratio
                if c.applicable and r is not None and r >= sharp:
                    summary.sharpness.append(dict(check=c.name, ratio=round(r, 6), instance=rec.instance_id,
                                                  lhs=c.lhs if isinstance(c.lhs, int) else str(c.lhs),
                                                  rhs=c.rhs if isinstance(c.rhs, int) else str(c.rhs)))
            if rec.violations and out is not None:
                small = minimize(inst, {c.name for c in rec.violations})
                path = os.path.join(out, f"reproducer-{rec.instance_id}.inst")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(format_instance(small))
                summary.reproducers.append(path)
            if jsonl is not None:
                jsonl.write(record_line(rec) + "\n")
            if progress is not None:
                progress(i, rec)
    finally:
        if jsonl is not None:
            jsonl.close()
    elapsed = time.perf_counter() - t0
    summary.runtime = dict(seconds=round(elapsed, 3), per_instance=round(elapsed / max(1, summary.n), 5))
    summary.sharpness = _top_sharp(summary.sharpness, keep_sharp)
    if out is not None:
        with open(os.path.join(out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(summary.csv_rows())
        with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary.as_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return summary


def _top_sharp(cands, keep):
    by_check = {}
    for c in sorted(cands, key=lambda c: (-c["ratio"], c["check"], c["instance"])):
        lst = by_check.setdefault(c["check"], [])
        if len(lst) < keep:
            lst.append(c)
    return [c for name in sorted(by_check) for c in by_check[name]]
