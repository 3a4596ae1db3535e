"""Command-line interface and experiment harness.

Subcommands: lp, cuts, reroute, sample, round, exact, gap-demo, experiment.
Exit codes: 0 success, 2 validation failure, 3 infeasibility.
Instance arguments take a file path, '-' for stdin, or the generator
shorthands ``fr:<r>`` and ``random:<model>:<n>:<seed>``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import exact, lp, narrowcuts, patch, retree, sampler
from .instance import (DirectedMetric, InstanceError, format_instance,
                       gap_instance, metric_completion, parse_instance,
                       random_instance)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3

CSV_HEADER = "instance,n,seed,lp_value,opt,path_cost,ratio_path_lp,ratio_opt_lp,alpha_obs,tries,wall_ms"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_instance(spec: str, complete: bool = False) -> DirectedMetric:
    if spec.startswith("fr:"):
        return gap_instance(int(spec[3:]))[0]
    if spec.startswith("random:"):
        _, model, n, seed = spec.split(":")
        return random_instance(int(n), int(seed), model)
    text = sys.stdin.read() if spec == "-" else open(spec).read()
    try:
        if complete:
            raw = parse_instance(text, require_metric=False)
            arcs = {(u, v): float(raw.cost[u, v])
                    for u in range(raw.n) for v in range(raw.n) if u != v}
            return metric_completion(raw.n, arcs, raw.s, raw.t)
        return parse_instance(text)
    except InstanceError as exc:
        raise CliError(f"invalid instance: {exc}", EXIT_VALIDATION) from exc


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def cmd_lp(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    try:
        sol = lp.solve_subtour_lp(inst, tol=args.tol, rational=args.rational)
    except lp.LpIterationLimit as exc:
        print(f"no convergence; last value {_fmt(exc.solution.value)}, "
              f"violated cut {exc.violated_cut.members()}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"value {_fmt(sol.value)}")
    for (u, v), w in sol.x.items():
        print(f"{u} {v} {_fmt(w)}")
    return EXIT_OK


def cmd_cuts(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    sol = lp.solve_subtour_lp(inst, tol=args.tol)
    chain = narrowcuts.find_narrow_cuts(sol.x, inst.n, inst.s, inst.t, args.tau, args.tol)
    print(f"narrow cuts (tau={args.tau}): k={chain.k}")
    for cut in chain.cuts:
        members = " ".join(str(v) for v in cut.members())
        print(f"cut {members}  out={_fmt(sol.x.out_of(cut.mask))}")
    print("layers:")
    for i, layer in enumerate(chain.layers):
        members = " ".join(str(v) for v in layer.members())
        print(f"layer {i + 1}: {members}")
    report = narrowcuts.verify_structure(sol.x, chain)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_reroute(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    sol = lp.solve_subtour_lp(inst, tol=args.tol)
    chain = narrowcuts.find_narrow_cuts(sol.x, inst.n, inst.s, inst.t, args.tau, args.tol)
    zv = retree.build_z(sol.x, chain)
    comb = retree.decompose_trees(zv)
    report = retree.verify_z(zv, sol.x, comb)
    print("rerouted vector:")
    for (u, v), w in zv.z.items():
        print(f"{u} {v} {_fmt(w)}")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_sample(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    sol = lp.solve_subtour_lp(inst, tol=args.tol)
    chain = narrowcuts.find_narrow_cuts(sol.x, inst.n, inst.s, inst.t, args.tau, args.tol)
    zv = retree.build_z(sol.x, chain)
    comb = retree.decompose_trees(zv)
    mode = "exhaustive" if inst.n <= 16 else "narrow+sampled"
    for k in range(args.samples):
        cfg = sampler.SampleConfig(seed=args.seed + k, tau=args.tau, n=inst.n)
        arcs = sampler.sample_tree(comb, cfg)
        alpha_obs, _ = sampler.thinness(arcs, sol.x, inst.n, mode,
                                        chain=chain, seed=args.seed)
        crossings_ok = all(
            sum(1 for u, v in arcs if cut.contains(u) and not cut.contains(v)) == 1
            and sum(1 for u, v in arcs if not cut.contains(u) and cut.contains(v)) == 0
            for cut in chain.cuts)
        print(f"seed {args.seed + k} cost {_fmt(sampler.cost_of(arcs, inst))} "
              f"alpha_obs {_fmt(alpha_obs)} narrow_cuts_ok {crossings_ok}")
        if not crossings_ok:
            return EXIT_VALIDATION
    return EXIT_OK


def cmd_round(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    report = patch.round(inst, tau=args.tau, seed=args.seed, max_tries=args.tries)
    if args.json:
        print(json.dumps(report.to_json_dict(), sort_keys=True, indent=2))
    else:
        walk = report.walk
        print(f"path {' '.join(str(v) for v in walk.path)}")
        print(f"cost {_fmt(walk.cost)} lp {_fmt(walk.lp_value)} ratio {_fmt(walk.ratio)}")
        print(f"tree {_fmt(walk.tree_cost)} circulation {_fmt(walk.circulation_cost)} "
              f"alpha_obs {_fmt(report.alpha_obs)} tries {report.tries}")
    return EXIT_OK


def cmd_exact(args) -> int:
    inst = _load_instance(args.instance, args.complete)
    result = exact.held_karp(inst)
    print(f"cost {_fmt(result.cost)}")
    print(f"path {' '.join(str(v) for v in result.path)}")
    return EXIT_OK


def cmd_gap_demo(args) -> int:
    print("r n lp_value opt ratio note")
    for r in args.r:
        if r < 2:
            raise CliError("gap-demo needs r >= 2", EXIT_VALIDATION)
        met, _ = gap_instance(r)
        sol = lp.solve_subtour_lp(met, tol=args.tol)
        if r <= 7:
            opt = exact.held_karp(met).cost
            ratio = opt / sol.value
            note = ""
            expected = (2 * r - 1) / (r + 1)
            if ratio < expected - 1e-6:
                raise CliError(f"gap ratio {ratio} below {expected}", EXIT_VALIDATION)
            print(f"{r} {met.n} {_fmt(sol.value)} {_fmt(opt)} {_fmt(ratio)} {note}")
        else:
            print(f"{r} {met.n} {_fmt(sol.value)} - - exact-skipped-n-too-large")
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ".." in piece:
            lo, hi = piece.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(piece))
    return out


def _parse_config(text: str) -> dict:
    config = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"bad config line: {line!r}", EXIT_VALIDATION)
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def cmd_experiment(args) -> int:
    config = _parse_config(open(args.config).read())
    family = config.get("family", "random")
    tau = float(config.get("tau", "0.25"))
    tries = int(config.get("tries", "64"))
    timing = config.get("timing", "off") == "on"
    seeds = _parse_range(config.get("seeds", "0"))
    rows = []
    if family in ("fr", "F_r", "gap"):
        rs = _parse_range(config.get("r", "2..5"))
        jobs = [(f"F_{r}", gap_instance(r)[0], seed) for r in rs for seed in (seeds or [0])]
    elif family == "random":
        ns = _parse_range(config.get("n", "10"))
        model = config.get("model", "closure")
        jobs = [(f"{model}-{n}-{seed}", random_instance(n, seed, model), seed)
                for n in ns for seed in seeds]
    else:
        raise CliError(f"unknown family {family!r}", EXIT_VALIDATION)

    for name, inst, seed in jobs:
        start = time.perf_counter()
        report = patch.round(inst, tau=tau, seed=seed, max_tries=tries)
        walk = report.walk
        walk.validate(inst)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        opt = ""
        ratio_opt = ""
        if inst.n <= 16:
            opt_cost = exact.held_karp(inst).cost
            opt = _fmt(opt_cost)
            ratio_opt = _fmt(opt_cost / walk.lp_value)
        rows.append((name, inst.n, seed, walk.lp_value, opt, walk.cost,
                     walk.ratio, ratio_opt, report.alpha_obs, report.tries,
                     f"{elapsed_ms:.0f}" if timing else ""))

    print(CSV_HEADER)
    for row in rows:
        name, n, seed, lp_value, opt, cost, ratio, ratio_opt, alpha_obs, tries_used, wall = row
        print(f"{name},{n},{seed},{_fmt(lp_value)},{opt},{_fmt(cost)},"
              f"{_fmt(ratio)},{ratio_opt},{_fmt(alpha_obs)},{tries_used},{wall}")
    if rows:
        max_ratio = max(r[6] for r in rows)
        print(f"summary: {len(rows)} rows, max path/lp ratio {_fmt(max_ratio)}",
              file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atspp",
                                     description="Asymmetric TSP path LP rounding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance_command(name, fn, **extra):
        p = sub.add_parser(name, **extra)
        p.add_argument("instance", help="path, '-', fr:<r> or random:<model>:<n>:<seed>")
        p.add_argument("--complete", action="store_true",
                       help="run the metric completion on a non-metric matrix")
        p.add_argument("--tol", type=float, default=1e-7)
        p.set_defaults(fn=fn)
        return p

    p = add_instance_command("lp", cmd_lp, help="solve the subtour LP")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")

    p = add_instance_command("cuts", cmd_cuts, help="narrow-cut chain and structure checks")
    p.add_argument("--tau", type=float, default=0.25)

    p = add_instance_command("reroute", cmd_reroute, help="rerouted vector and tree decomposition")
    p.add_argument("--tau", type=float, default=0.25)

    p = add_instance_command("sample", cmd_sample, help="sample trees from the combination")
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1)

    p = add_instance_command("round", cmd_round, help="full rounding pipeline")
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tries", type=int, default=64)
    p.add_argument("--json", action="store_true")

    add_instance_command("exact", cmd_exact, help="exact optimum (n <= 22)")

    p = sub.add_parser("gap-demo", help="LP vs exact optimum on the gap family")
    p.add_argument("--r", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7])
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(fn=cmd_gap_demo)

    p = sub.add_parser("experiment", help="batch runs from a key=value config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (retree.ZeroBoundaryMass, retree.LayerDecompositionError,
            sampler.DrawFailure, lp.LpIterationLimit) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
