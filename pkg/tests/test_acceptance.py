"""End-to-end acceptance runs. Each test prints one PASS/FAIL line."""

import json
import os
import random
import time

import pytest

from kurosh.ambient import PLAIN, syllable_length
from kurosh.campaign import PROFILES, generate_instance, run_campaign
from kurosh.cli import main
from kurosh.crosscheck import (ball_comparison, fiber_crosscheck, fiber_summary, intersection_crosscheck,
                               membership_agreement, word_budget)
from kurosh.finite import a3_theta, cyclic, symmetric
from kurosh.graphs import graphs_isomorphic
from kurosh.hgraph import analyse, build_from_generators, lemma1_check
from kurosh.verify import PairAnalysis

HERE = os.path.dirname(__file__)
L = 8


def report(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})")


def instances(profile, seed, count):
    p = PROFILES[profile].with_seed(seed)
    return (generate_instance(p, i) for i in range(count))


def subgroups(profile, seed, count):
    for inst in instances(profile, seed, count):
        yield inst.spec, inst.H
        if inst.K:
            yield inst.spec, inst.K


def test_lemma1_identity_on_random_plain_subgroups(capsys):
    t0 = time.perf_counter()
    tested = failures = 0
    for spec, gens in subgroups("plain", 101, 2000):
        d = analyse(spec, gens)
        if d.elliptic:
            continue
        tested += 1
        failures += not lemma1_check(d.core)
        if tested == 1000:
            break
    dt = time.perf_counter() - t0
    ok = tested >= 1000 and failures == 0 and dt <= 120
    report(capsys, 1, "reduced complexity matches tilde-graph rank", ok,
           f"{tested} subgroups, {failures} failures, {dt:.1f}s")
    assert ok


def test_fold_order_confluence(capsys):
    tested = failures = 0
    pools = [subgroups("plain", 102, 200), subgroups("amalgam", 102, 200)]
    for pool in pools:
        for k, (spec, gens) in enumerate(pool):
            if k == 100:
                break
            ref = build_from_generators(spec, gens).to_graph()
            for order in range(20):
                alt = build_from_generators(spec, gens, rng=random.Random(1000 * k + order)).to_graph()
                failures += not graphs_isomorphic(ref, alt)[0]
            tested += 1
    ok = tested >= 200 and failures == 0
    report(capsys, 2, "random fold orders give isomorphic graphs", ok,
           f"{tested} instances x 20 orders, {failures} failures")
    assert ok


def test_acceptance_matches_oracle_membership(capsys):
    tested = sound = budget_notes = skipped = words = 0
    for inst in instances("tiny", 103, 400):
        if word_budget(inst.spec) < L:
            skipped += 1
            continue
        rep = membership_agreement(inst.spec, inst.H, max_len=L, L=L)
        tested += 1
        words += rep.words
        sound += len(rep.sound_failures)
        budget_notes += len(rep.oracle_only)
        if tested == 100:
            break
    ok = tested >= 100 and sound == 0 and budget_notes == 0
    report(capsys, 3, "graph acceptance agrees with brute membership up to length 8", ok,
           f"{tested} instances, {words} words, {sound} sound failures, "
           f"{budget_notes} oracle-only, {skipped} skipped for ball size")
    assert ok


def test_pullback_matches_oracle_intersection(capsys):
    tested = failures = balls = skipped = 0
    for inst in instances("tiny", 104, 200):
        if max(map(syllable_length, inst.H + inst.K)) > L:
            skipped += 1
            continue
        pa = PairAnalysis(inst.spec, inst.H, inst.K)
        res = intersection_crosscheck(inst.spec, inst.H, inst.K, pa.inter, L)
        failures += res["status"] != "agree"
        for gens, d in ((inst.H, pa.H), (inst.K, pa.K)):
            if gens:
                balls += 1
                failures += ball_comparison(inst.spec, gens, d.folded, 3, L)["status"] != "agree"
        tested += 1
        if tested == 60:
            break
    ok = tested >= 50 and failures == 0
    report(capsys, 4, "intersection core and tree-ball quotients match the oracle", ok,
           f"{tested} instances, {balls} ball comparisons, {failures} failures, "
           f"{skipped} skipped with generators longer than {L}")
    assert ok


def test_fiber_counts_match_double_cosets(capsys):
    tested = cells = unverified = bad = plain_bad = 0
    for inst in instances("tiny", 105, 60):
        pa = PairAnalysis(inst.spec, inst.H, inst.K)
        s = fiber_summary(fiber_crosscheck(inst.spec, inst.H, inst.K, pa.pb, L=L))
        cells += s["cells"]
        unverified += s["unverified"]
        bad += s["contradictions"] + s["count_mismatch"]
        if inst.spec.setting == PLAIN:
            plain_bad += pa.fib.N_eff != 1 or any(v > 1 for v in pa.fib.edge_fibers.values())
        tested += 1
    rate = unverified / max(cells, 1)
    ok = tested >= 50 and bad == 0 and plain_bad == 0 and rate < 0.05
    report(capsys, 5, "pullback fibers equal enumerated double cosets", ok,
           f"{tested} instances, {cells} cells, unverified {rate:.1%}, {bad} contradictions or mismatches, "
           f"{plain_bad} plain instances with a fiber above 1")
    assert ok


CAMPAIGNS = {"plain": 1500, "valence": 300, "amalgam-edge-free": 500, "amalgam": 400, "free": 300}
SEED = 106


@pytest.fixture(scope="module")
def campaigns(tmp_path_factory):
    out = {}
    for name, n in CAMPAIGNS.items():
        out[name] = run_campaign(PROFILES[name].with_seed(SEED), n,
                                 out=str(tmp_path_factory.mktemp(name)))
    return out


def _stats(summary, check):
    s = summary.checks.get(check)
    return (s.applicable, s.violations) if s else (0, 0)


# (description, profile, check, minimum applicable)
THEOREMS = [
    ("part 2 and Kurosh variant, 6 N_eff", "plain", "thm1_part2", 1000),
    ("part 2 Kurosh variant", "plain", "thm1_part2_kurosh", 1),
    ("part 1 under the valence hypothesis", "valence", "thm1_part1", 1),
    ("edge-free amalgams, 2 theta N_eff", "amalgam-edge-free", "thm2", 300),
    ("amalgams, 2 theta |A cap HK|", "amalgam", "thm3", 300),
    ("amalgams, 2 theta |A|", "amalgam", "thm3_A", 300),
    ("Ivanov bound on free products", "plain", "ivanov", 1),
    ("Zakharov bound on free subgroups", "free", "zakharov", 1),
]


def test_theorem_bounds_hold(capsys, campaigns):
    lines, ok = [], True
    for desc, prof, check, need in THEOREMS:
        app, viol = _stats(campaigns[prof], check)
        good = app >= need and viol == 0
        ok &= good
        lines.append(f"{check}: {app} applicable, {viol} violations{'' if good else ' <-'}")
    total = sum(s.violations for s in campaigns.values())
    runtime = sum(s.runtime["seconds"] for s in campaigns.values())
    ok &= total == 0 and runtime <= 600
    report(capsys, 6, "theorem inequalities", ok,
           "; ".join(lines) + f"; all checks {total} violations; {runtime:.1f}s")
    assert ok


LOCAL = ["local_fiber_degree", "local_case1", "local_part1", "local_part2", "lemma2_star", "lemma2_embedding"]


def test_local_inequalities_hold(capsys, campaigns):
    parts, ok = [], True
    for check in LOCAL:
        app = viol = 0
        for s in campaigns.values():
            a, v = _stats(s, check)
            app, viol = app + a, viol + v
        ok &= app > 0 and viol == 0
        parts.append(f"{check}: {app}/{viol}")
    report(capsys, 7, "per-pair local and star inequalities (applicable/violations)", ok, "; ".join(parts))
    assert ok


def _rank(capsys, name):
    code = main(["rank", os.path.join(HERE, "..", "instances", name), "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)["report"]


def test_spot_values(capsys):
    values = [a3_theta(cyclic(2))[1], a3_theta(symmetric(3))[1], a3_theta(cyclic(4))[1]]
    c1, whole = _rank(capsys, "z2_z3_whole.inst")
    c2, circle = _rank(capsys, "z2_z2_circle.inst")
    ok = (values == [1, 3, 2] and c1 == c2 == 0 and whole["kurosh_rank"] == 2
          and circle["C_bar"] == 0 and circle["C"] == 1)
    report(capsys, 8, "spot values", ok,
           f"theta {[str(v) for v in values]}, Kr(Z2*Z3)={whole['kurosh_rank']}, "
           f"C_bar(<ac>)={circle['C_bar']}")
    assert ok


def test_campaign_jsonl_is_reproducible(capsys, tmp_path):
    same = True
    for name in ("plain", "amalgam", "valence"):
        blobs = []
        for run in ("a", "b"):
            d = tmp_path / f"{name}-{run}"
            run_campaign(PROFILES[name].with_seed(SEED), 150, out=str(d))
            blobs.append((d / "records.jsonl").read_bytes())
        same &= blobs[0] == blobs[1] and len(blobs[0]) > 0
    report(capsys, 9, "identical seeds give byte-identical JSONL", same, "plain, amalgam, valence x 150")
    assert same
