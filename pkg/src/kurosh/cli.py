"""Command-line front end. JSON is the primary output; text is a rendering of it."""

from __future__ import annotations

import argparse
import json
import sys

from .ambient import WordError, format_word, parse_word
from .campaign import EXIT_CLEAN, EXIT_ORACLE, EXIT_VIOLATION, ProfileError, load_profile, run_campaign
from .config import MAX_L, MAX_R
from .crosscheck import (ball_comparison, fiber_crosscheck, fiber_summary, intersection_crosscheck,
                         membership_agreement, word_budget)
from .graphs import to_dot
from .hgraph import analyse, tilde_graph
from .instance import InstanceError, load_instance
from .oracle import bfs_subgroup, oracle_member
from .pullback import to_dot as pullback_dot
from . import verify

EXIT_USAGE = 2

CHECKS = {
    "thm1-part1": verify.check_thm1_part1,
    "thm1-part2": verify.check_thm1_part2,
    "thm2": verify.check_thm2,
    "thm3": verify.check_thm3,
    "ivanov": verify.check_ivanov,
    "corollaries": verify.check_corollaries,
    "local": verify.check_local_degree_inequality,
    "lemma2": verify.check_lemma2,
    "elliptic-trivial": verify.check_trivial_elliptic,
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


# -- shared helpers -----------------------------------------------------------

def _load(args, need_K=False):
    inst = load_instance(args.file)
    if args.budget_L is not None:
        inst.budgets["L"] = args.budget_L
    if args.budget_R is not None:
        inst.budgets["R"] = args.budget_R
    if args.seed is not None:
        inst.seed = args.seed
    if inst.budgets["L"] > MAX_L or inst.budgets["L"] < 1:
        raise CliError(f"budget L must lie in 1..{MAX_L}")
    if inst.budgets["R"] > MAX_R or inst.budgets["R"] < 1:
        raise CliError(f"budget R must lie in 1..{MAX_R}")
    if not inst.H:
        raise CliError(f"{args.file}: subgroup H has no generators")
    if need_K and not inst.has_K:
        raise CliError(f"{args.file}: this command needs a [subgroup.K] section")
    return inst


def _gens(inst, which):
    if which == "K":
        if not inst.has_K:
            raise CliError("instance has no subgroup K")
        return inst.K
    return inst.H


def _emit(args, payload, text):
    out = json.dumps(payload, sort_keys=True, indent=2) + "\n" if args.json else text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _check_lines(checks):
    lines = []
    for c in checks:
        if c["applicable"]:
            mark = "ok" if c["ok"] else "VIOLATED"
            lines.append(f"  {c['name']}: {c['lhs']} <= {c['rhs']}  {mark}")
        else:
            lines.append(f"  {c['name']}: not applicable ({c['reason']})")
    return lines


def render_report(rep: dict, label="H") -> str:
    kr = rep["kurosh_rank"] if rep["edge_free"] else "undefined (not edge-free)"
    if rep["elliptic"]:
        kind = "trivial" if rep["trivial"] else "elliptic"
        return f"{label}: {kind}, C = 1, C_bar = 0, Kurosh rank = {kr}\n"
    return (f"{label}: C = {rep['C']}, C_bar = {rep['C_bar']}, rank = {rep['rank_r']}, "
            f"non-degenerate vertices = {rep['n_nondegenerate']}, Kurosh rank = {kr}\n")


# -- commands -----------------------------------------------------------------

def cmd_rank(args):
    inst = _load(args)
    rep = analyse(inst.spec, _gens(inst, args.subgroup)).report.as_dict()
    _emit(args, dict(subgroup=args.subgroup, spec=inst.spec.describe(), report=rep),
          render_report(rep, args.subgroup))
    return EXIT_CLEAN


def cmd_member(args):
    inst = _load(args)
    gens = _gens(inst, args.subgroup)
    try:
        w = parse_word(inst.spec, args.word)
    except WordError as exc:
        raise CliError(f"word: {exc}") from None
    data = analyse(inst.spec, gens)
    member = data.folded.accepts(w)
    L = inst.budgets["L"]
    status = oracle_member(inst.spec, gens, w, L, ball=bfs_subgroup(inst.spec, gens, L), meet_in_middle=True)
    payload = dict(subgroup=args.subgroup, word=format_word(w), member=member, oracle=status, L=L)
    text = f"{format_word(w) or '1'} in {args.subgroup}: {'yes' if member else 'no'} (oracle at L={L}: {status})\n"
    _emit(args, payload, text)
    # the oracle only produces certain positives: a rejected oracle hit is a disagreement
    return EXIT_ORACLE if status == "YES" and not member else EXIT_CLEAN


def _record_text(rec: dict) -> str:
    lines = [f"ambient: {rec['spec']}",
             "H = <" + ", ".join(rec["gens_H"]) + ">",
             "K = <" + ", ".join(rec["gens_K"]) + ">",
             "H ∩ K = <" + (", ".join(rec["intersection_gens"]) or "1") + ">"]
    m = rec["measured"]
    for tag in ("H", "K", "HK"):
        lines.append(render_report(m[tag], "H∩K" if tag == "HK" else tag).rstrip())
    lines.append(f"fibers: N_eff = {m['N_eff']}, M_H = {m['M_H']}, M_K = {m['M_K']}, "
                 f"|A ∩ HK| = {m['A_cap_HK']}, theta = {m['theta']}")
    if rec["elliptic"]["HK"]:
        lines.append("H ∩ K is elliptic: theorem checks excluded, trivial bound asserted instead")
    lines.append("checks:")
    lines += _check_lines(rec["checks"])
    return "\n".join(lines) + "\n"


def cmd_intersect(args):
    inst = _load(args, need_K=True)
    rec = verify.verify_pair(inst.spec, inst.H, inst.K)
    d = rec.as_dict()
    if args.fibers:
        d["fibers"] = verify.PairAnalysis(inst.spec, inst.H, inst.K).fib.as_dict()
    _emit(args, d, _record_text(d))
    return EXIT_VIOLATION if rec.violations else EXIT_CLEAN


def cmd_check(args):
    inst = _load(args, need_K=True)
    fn = CHECKS[args.theorem]
    pa = verify.PairAnalysis(inst.spec, inst.H, inst.K)
    res = fn(pa)
    res = res if isinstance(res, list) else [res]
    dicts = [c.as_dict() for c in res]
    _emit(args, dict(theorem=args.theorem, checks=dicts),
          f"{args.theorem}:\n" + "\n".join(_check_lines(dicts)) + "\n")
    return EXIT_VIOLATION if any(c.applicable and not c.ok for c in res) else EXIT_CLEAN


def cmd_campaign(args):
    try:
        prof = load_profile(args.profile, seed=args.seed)
    except ProfileError as exc:
        raise CliError(str(exc)) from None
    if args.n < 1:
        raise CliError("-n must be at least 1")
    summary = run_campaign(prof, args.n, out=args.out_dir, oracle_every=args.oracle_every,
                           L=args.budget_L)
    d = summary.as_dict()
    runtime = d.pop("runtime")
    if args.json:
        sys.stdout.write(json.dumps(d, sort_keys=True, indent=2) + "\n")
    else:
        lines = [f"profile {d['profile']} seed {d['seed']}: {d['n']} instances, "
                 f"{d['elliptic_intersections']} elliptic intersections, {d['violations']} violations"]
        for row in summary.csv_rows()[1:]:
            lines.append("  {:<20} applicable {:>5}  skipped {:>5}  violations {:>3}  max ratio {}".format(*row))
        if d["oracle"]["compared"]:
            lines.append("oracle: " + ", ".join(f"{k} {v}" for k, v in sorted(d["oracle"].items())))
        for c in d["sharpness"]:
            lines.append(f"  sharpness candidate {c['check']}: ratio {c['ratio']} ({c['instance']})")
        for p in d["reproducers"]:
            lines.append(f"  reproducer written to {p}")
        sys.stdout.write("\n".join(lines) + "\n")
    print(f"runtime {runtime['seconds']} s", file=sys.stderr)
    return summary.exit_code


def cmd_oracle_compare(args):
    inst = _load(args)
    spec, L, R = inst.spec, inst.budgets["L"], inst.budgets["R"]
    max_len = min(word_budget(spec), L)
    out, lines, bad = {}, [], False
    for tag in ("H", "K") if inst.has_K else ("H",):
        gens = _gens(inst, tag)
        data = analyse(spec, gens)
        ma = membership_agreement(spec, gens, data.folded, max_len=max_len, L=L)
        ball = ball_comparison(spec, gens, data.folded, R, L)
        out[tag] = dict(membership=dict(words=ma.words, max_len=ma.max_len, accepted=ma.accepted,
                                        sound_failures=ma.sound_failures, oracle_only=ma.oracle_only,
                                        ok=ma.ok), tree_ball=ball)
        bad |= not ma.ok or ball["status"] == "disagree"
        lines.append(f"{tag} membership: {'agree' if ma.ok else 'DISAGREE'} over {ma.words} words "
                     f"of length <= {ma.max_len} ({ma.accepted} accepted, "
                     f"{len(ma.sound_failures)} unconfirmed, {len(ma.oracle_only)} missed)")
        lines.append(f"{tag} tree ball R={R}: {ball['status']}")
    if inst.has_K:
        pa = verify.PairAnalysis(spec, inst.H, inst.K)
        ix = intersection_crosscheck(spec, inst.H, inst.K, pa.inter, L)
        fib = fiber_summary(fiber_crosscheck(spec, inst.H, inst.K, pa.pb, L=min(L, 6)))
        out["intersection"], out["fibers"] = ix, fib
        bad |= ix["status"] == "disagree" or fib["contradictions"] > 0 or fib["count_mismatch"] > 0
        lines.append(f"intersection complexity: {ix['status']} (pullback C = {ix['C_pullback']}, "
                     f"oracle C = {ix['C_oracle']})")
        lines.append(f"fiber counts: {fib['cells']} cells, {fib['unverified']} unverified, "
                     f"{fib['contradictions']} contradictions, {fib['count_mismatch']} mismatches")
    out["agreement"] = not bad
    _emit(args, out, "\n".join(lines) + "\n")
    return EXIT_ORACLE if bad else EXIT_CLEAN


def cmd_export_dot(args):
    need_K = args.target in ("K", "pullback") or args.of in ("K", "HK")
    inst = _load(args, need_K=need_K)
    if args.target in ("H", "K"):
        text = analyse(inst.spec, _gens(inst, args.target)).folded.to_dot(args.target)
    elif args.target == "pullback":
        text = pullback_dot(verify.PairAnalysis(inst.spec, inst.H, inst.K).pb)
    else:
        if args.of == "HK":
            core = verify.PairAnalysis(inst.spec, inst.H, inst.K).I.core
        else:
            core = analyse(inst.spec, _gens(inst, args.of)).core
        if core.elliptic:
            raise CliError(f"{args.of} is elliptic; its tilde graph is undefined")
        text = to_dot(tilde_graph(core), f"tilde {args.of}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_CLEAN


# -- parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the instance or profile seed")
    common.add_argument("--budget-L", type=int, default=None, help="oracle syllable budget")
    common.add_argument("--budget-R", type=int, default=None, help="tree-ball radius")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", default=None, help="write output to this path")

    p = argparse.ArgumentParser(prog="kurosh", description="Subgroup graphs, intersections and "
                                "complexity bounds in free products of finite groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_, needs_file=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if needs_file:
            sp.add_argument("file", help="instance file")
        sp.set_defaults(func=fn)
        return sp

    sp = cmd("rank", cmd_rank, "complexity report of a subgroup")
    sp.add_argument("--subgroup", choices=("H", "K"), default="H")
    sp = cmd("member", cmd_member, "membership of a word")
    sp.add_argument("word")
    sp.add_argument("--subgroup", choices=("H", "K"), default="H")
    sp = cmd("intersect", cmd_intersect, "intersection report with all checks")
    sp.add_argument("--fibers", action="store_true", help="include per-cell fiber counts")
    sp = cmd("check", cmd_check, "run one family of checks")
    sp.add_argument("theorem", choices=sorted(CHECKS))
    sp = cmd("campaign", cmd_campaign, "randomized verification campaign", needs_file=False)
    sp.add_argument("profile", help="built-in profile name or JSON profile file")
    sp.add_argument("-n", type=int, default=100, help="number of instances")
    sp.add_argument("--oracle-every", type=int, default=0, help="oracle cross-check every k-th instance")
    sp.set_defaults(out_dir=None)
    cmd("oracle-compare", cmd_oracle_compare, "compare graph answers with the brute-force oracle")
    sp = cmd("export-dot", cmd_export_dot, "write a DOT rendering")
    sp.add_argument("--target", choices=("H", "K", "pullback", "tilde"), default="H")
    sp.add_argument("--of", choices=("H", "K", "HK"), default="H", help="subgroup for --target tilde")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "campaign":
        args.out_dir, args.out = args.out, None
    try:
        return args.func(args)
    except (CliError, InstanceError, ProfileError, OSError) as exc:
        print(f"kurosh {args.command}: error: {exc}", file=sys.stderr)
        return getattr(exc, "code", EXIT_USAGE) if isinstance(exc, CliError) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
