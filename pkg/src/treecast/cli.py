"""Command-line surface: reproducible experiments with machine-readable output.

Subcommands
-----------
bounds
    Closed-form bound report for a channel family.
evolve
    Diagnostic-vs-depth curve (exact or population engine), CSV or JSON.
threshold
    Bisection estimate of the reconstruction threshold with history.
couple
    Materialize the diagonal-plus-crossing coupling at a depth.
hardcore-check
    Single-site conditional residuals and the adjacent-occupancy scan.
verify
    Run the built-in invariant suite; optionally focus on one channel.

Every output embeds the resolved run configuration including the seed, and
re-running an emitted configuration reproduces the file byte for byte.
Exit codes: 0 success, 2 validation error, 3 resource limit, 4 bad
bisection bracket.  The only environment variable honored is
``TREECAST_OUT_DIR``, the base directory for relative ``--out`` paths.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .errors import (AtomExplosion, BadBracket, DegenerateChannel,
                     DegenerateEvent, InvalidParameter, NotInterior,
                     PreconditionViolation, ResourceLimit, TreecastError,
                     UndefinedLimit)
from .channels import (BinaryChannel, make_channel, symmetric_channel,
                       hardcore_channel, w_of_lambda, lambda_of_w,
                       kelly_threshold, gap_kernel, gap_kernel_peak,
                       mossel_peres_lhs, geometric_mean_bound_lhs)
from .atoms import ConditionalPair
from .evolution import (PruningPolicy, deep_policy, exact_policy, base_pair,
                        evolve, diagnostics, mean_gap, gap_identity_residual)
from .conditioning import build_coupling, verify_sandwich
from .sampling import (population_from_pair, population_evolve,
                       estimate_diagnostics)
from .hardcore import (HardCoreParams, gibbs_conditional_sweep,
                       brw_independence_check)
from .threshold import ChannelFamily, bisect_threshold, bounds_report
from . import serialize

# non-string sentinel: argparse type-converts a str const for nargs="?"
_FAMILY_ONLY = object()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treecast",
        description="Broadcasting on k-ary trees: density evolution, "
                    "couplings, and reconstruction thresholds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_channel_flags(sp):
        sp.add_argument("--symmetric", nargs="?", type=float, const=_FAMILY_ONLY,
                        metavar="EPS", help="symmetric channel with flip "
                        "probability EPS (bare flag selects the family only)")
        sp.add_argument("--hardcore", action="store_true",
                        help="select the hard-core family without a parameter")
        sp.add_argument("--hardcore-w", type=float, metavar="W",
                        help="hard-core channel with occupation weight W")
        sp.add_argument("--hardcore-lambda", type=float, metavar="L",
                        help="hard-core channel with activity L")
        sp.add_argument("--matrix", nargs=2, type=float, metavar=("P00", "P10"),
                        help="explicit channel from its first column")

    def add_run_flags(sp, depth_default=None):
        sp.add_argument("--k", type=int, default=2, help="branching number")
        sp.add_argument("--depth", type=int, default=depth_default)
        sp.add_argument("--engine", choices=["exact", "population"], default=None)
        sp.add_argument("--pop-size", type=int, default=100_000,
                        help="population size / sample count")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None,
                        help="output path ('-' or omitted: stdout); relative "
                             "paths resolve under $TREECAST_OUT_DIR")
        sp.add_argument("--format", choices=["json", "csv"], default=None)

    sp = sub.add_parser("bounds", help="closed-form bound report for a family")
    add_channel_flags(sp)
    add_run_flags(sp)

    sp = sub.add_parser("evolve", help="diagnostic-vs-depth curve")
    add_channel_flags(sp)
    add_run_flags(sp, depth_default=8)

    sp = sub.add_parser("threshold", help="bisection threshold estimate")
    add_channel_flags(sp)
    add_run_flags(sp)
    sp.add_argument("--bracket", nargs=2, type=float, metavar=("LO", "HI"))
    sp.add_argument("--tol", type=float, default=None)

    sp = sub.add_parser("couple", help="emit the coupling at a depth")
    add_channel_flags(sp)
    add_run_flags(sp, depth_default=4)

    sp = sub.add_parser("hardcore-check",
                        help="single-site conditionals and occupancy scan")
    add_channel_flags(sp)
    add_run_flags(sp, depth_default=3)

    sp = sub.add_parser("verify", help="run the built-in invariant suite")
    add_channel_flags(sp)
    add_run_flags(sp)
    return parser


def _parse_channel(args, k: int, allow_family_only: bool):
    """Resolve the channel flags to (description dict, channel or None).

    Exactly one spec must be present; a bare family selector yields a
    description without a concrete channel (allowed only where a family
    suffices).
    """
    given = []
    if args.symmetric is not None:
        given.append("symmetric")
    if args.hardcore:
        given.append("hardcore")
    if args.hardcore_w is not None:
        given.append("hardcore_w")
    if args.hardcore_lambda is not None:
        given.append("hardcore_lambda")
    if args.matrix is not None:
        given.append("matrix")
    if len(given) != 1:
        raise InvalidParameter(
            "exactly one channel spec is required "
            "(--symmetric | --hardcore | --hardcore-w | --hardcore-lambda | --matrix); "
            f"got {len(given)}")

    kind = given[0]
    if kind == "symmetric":
        if args.symmetric is _FAMILY_ONLY:
            if not allow_family_only:
                raise InvalidParameter("--symmetric needs a value EPS here")
            return {"kind": "symmetric"}, None
        eps = float(args.symmetric)
        return {"kind": "symmetric", "eps": eps}, symmetric_channel(eps)
    if kind == "hardcore":
        if not allow_family_only:
            raise InvalidParameter(
                "--hardcore selects a family; use --hardcore-w or --hardcore-lambda here")
        return {"kind": "hardcore"}, None
    if kind == "hardcore_w":
        c, params = hardcore_channel(args.hardcore_w, k)
        return {"kind": "hardcore", "w": params.w, "lambda": params.lam}, c
    if kind == "hardcore_lambda":
        w = w_of_lambda(args.hardcore_lambda, k)
        c, params = hardcore_channel(w, k)
        return {"kind": "hardcore", "w": params.w, "lambda": params.lam}, c
    p00, p10 = args.matrix
    return {"kind": "matrix", "p00": p00, "p10": p10}, make_channel(p00, p10)


def _run_config(args, channel_desc: dict, depth, engine, fmt) -> dict:
    return {"command": args.command, "channel": channel_desc, "k": args.k,
            "depth": depth, "engine": engine, "pop_size": args.pop_size,
            "seed": args.seed, "out": args.out, "format": fmt}


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    path = args.out
    if not os.path.isabs(path):
        path = os.path.join(os.environ.get("TREECAST_OUT_DIR", "."), path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def cmd_bounds(args) -> int:
    desc, _ = _parse_channel(args, args.k, allow_family_only=True)
    if desc["kind"] not in ("symmetric", "hardcore"):
        raise InvalidParameter("bounds requires a family (--symmetric or --hardcore)")
    if args.format == "csv":
        raise InvalidParameter("bounds only supports --format json")
    if desc["kind"] == "hardcore" and args.k < 2:
        raise InvalidParameter(
            "kelly_threshold requires k >= 2; the hard-core bound report "
            "is undefined at k = 1")
    report = bounds_report(args.k, desc["kind"])
    config = _run_config(args, desc, depth=None, engine=None, fmt="json")
    payload = {"config": config, "report": report.as_dict()}
    _emit(args, serialize.report_json(payload))
    return 0


def cmd_evolve(args) -> int:
    desc, c = _parse_channel(args, args.k, allow_family_only=False)
    engine = args.engine or "exact"
    depth = args.depth
    fmt = args.format or "csv"
    config = _run_config(args, desc, depth=depth, engine=engine, fmt=fmt)

    rows = []
    if engine == "exact":
        pair = base_pair(c, args.k)
        rows.append({"depth": 1, **diagnostics(pair, c)})
        for _ in range(depth - 1):
            pair = evolve(pair, c, args.k, deep_policy())
            rows.append({"depth": pair.depth, **diagnostics(pair, c)})
    else:
        pop = population_from_pair(base_pair(c, args.k), args.pop_size, args.seed)
        rows.append({"depth": 1, **estimate_diagnostics(pop, c)})
        for _ in range(depth - 1):
            pop = population_evolve(pop, c, args.k)
            rows.append({"depth": pop.depth, **estimate_diagnostics(pop, c)})

    if fmt == "csv":
        _emit(args, serialize.curve_csv(rows, config))
    else:
        _emit(args, serialize.report_json({"config": config, "rows": rows}))
    return 0


def cmd_threshold(args) -> int:
    desc, _ = _parse_channel(args, args.k, allow_family_only=True)
    if desc["kind"] not in ("symmetric", "hardcore"):
        raise InvalidParameter("threshold requires a family (--symmetric or --hardcore)")
    family = ChannelFamily(kind=desc["kind"], k=args.k)
    bracket = tuple(args.bracket) if args.bracket else None
    estimate = bisect_threshold(family, depth=args.depth, engine=args.engine,
                                tol=args.tol, seed=args.seed, bracket=bracket,
                                pop_size=args.pop_size)
    config = _run_config(args, desc, depth=estimate.depth,
                         engine=estimate.engine, fmt="json")
    payload = {"config": config, "estimate": {
        "family_kind": estimate.family_kind, "k": estimate.k,
        "depth": estimate.depth, "engine": estimate.engine,
        "diagnostic": estimate.diagnostic, "estimate": estimate.estimate,
        "bracket_initial": list(estimate.bracket_initial),
        "bracket_final": list(estimate.bracket_final), "tol": estimate.tol,
        "seed": estimate.seed, "pop_size": estimate.pop_size,
        "inconclusive_count": estimate.inconclusive_count,
        "history": list(estimate.history)}}
    _emit(args, serialize.report_json(payload))
    return 0


def cmd_couple(args) -> int:
    desc, c = _parse_channel(args, args.k, allow_family_only=False)
    depth = args.depth
    fmt = args.format or "csv"
    pair = base_pair(c, args.k)
    for _ in range(depth - 1):
        pair = evolve(pair, c, args.k, deep_policy())
    coupling = build_coupling(pair, c)
    config = _run_config(args, desc, depth=depth, engine="exact", fmt=fmt)
    if fmt == "csv":
        _emit(args, serialize.coupling_csv(coupling, config))
    else:
        res0, res1 = coupling.marginal_residuals(pair)
        payload = {"config": config,
                   "pairs": [[float(a), float(b), float(w)] for a, b, w in
                             zip(coupling.y0, coupling.y1, coupling.weight)],
                   "marginal_residual0": res0, "marginal_residual1": res1,
                   "crossing_ok": coupling.crossing_ok(),
                   "mean_difference": coupling.mean_difference()}
        _emit(args, serialize.report_json(payload))
    return 0


def cmd_hardcore_check(args) -> int:
    desc, c = _parse_channel(args, args.k, allow_family_only=False)
    if desc["kind"] != "hardcore":
        raise InvalidParameter("hardcore-check requires --hardcore-w or --hardcore-lambda")
    params = HardCoreParams(k=args.k, w=desc["w"], lam=desc["lambda"])
    depth = args.depth
    config = _run_config(args, desc, depth=depth, engine=None, fmt="json")

    # sampler first: its node cap rejects oversized depths before the
    # exhaustive conditional sweep starts
    occupancy = brw_independence_check(c, args.k, depth, args.pop_size, seed=args.seed)
    res_rooted = gibbs_conditional_sweep(params, depth, center_root=False)
    res_center = gibbs_conditional_sweep(params, depth, center_root=True)
    checks = [
        {"name": "single_site_conditional_rooted", "residual": res_rooted,
         "passed": res_rooted <= 1e-12},
        {"name": "single_site_conditional_center_root", "residual": res_center,
         "passed": res_center <= 1e-12},
        {"name": "no_adjacent_occupied", "violations": occupancy.violations,
         "samples": occupancy.samples, "passed": occupancy.passed},
    ]
    ok = all(chk["passed"] for chk in checks)
    payload = {"config": config, "checks": checks, "all_passed": ok}
    _emit(args, serialize.report_json(payload))
    return 0 if ok else 1


def _verify_suite(seed: int) -> list:
    """Fast built-in invariant suite shared by ``verify``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    checks = []

    def record(name, residual, passed):
        checks.append({"name": name, "residual": float(residual),
                       "passed": bool(passed)})

    # depth-recursion mean identity on random interior channels
    worst = 0.0
    for _ in range(20):
        c = make_channel(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
        for k in (1, 2):
            pair = base_pair(c, k)
            for _ in range(2):
                nxt = evolve(pair, c, k, exact_policy())
                worst = max(worst, gap_identity_residual(nxt, pair, c, k))
                pair = nxt
    record("mean_gap_identity", worst, worst <= 1e-9)

    # coupling marginals and crossing
    worst = 0.0
    crossing = True
    cases = [(symmetric_channel(0.2), 2), (symmetric_channel(0.35), 2),
             (hardcore_channel(1.0, 1)[0], 1), (hardcore_channel(1.0, 2)[0], 2)]
    for c, k in cases:
        pair = base_pair(c, k)
        for _ in range(3):
            pair = evolve(pair, c, k, deep_policy())
        coupling = build_coupling(pair, c)
        r0, r1 = coupling.marginal_residuals(pair)
        worst = max(worst, r0, r1)
        crossing = crossing and coupling.crossing_ok()
    record("coupling_marginals", worst, worst <= 1e-12 and crossing)

    # conditional-probability sandwich on random finite spaces
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(4, 17))
        probs = rng.dirichlet(np.ones(n))
        b = rng.random(n) < 0.5
        if not 0 < probs[b].sum() < 1:
            continue
        labels = rng.integers(0, max(2, n // 3), size=n)
        cells = np.unique(labels)
        chosen = cells[rng.random(len(cells)) < 0.6]
        d = np.isin(labels, chosen)
        conds = []
        for cell in chosen:
            mask = labels == cell
            mass = probs[mask].sum()
            if mass > 0:
                conds.append(probs[mask & b].sum() / mass)
        if not conds:
            continue
        verdict = verify_sandwich(probs, b, labels, d,
                                  p0=max(0.0, min(conds) - 1e-9),
                                  p1=min(1.0, max(conds) + 1e-9))
        if not verdict.passed:
            violations += 1
    record("sandwich_inequality", violations, violations == 0)

    # hard-core single-site conditionals
    params = HardCoreParams(k=2, w=1.0, lam=lambda_of_w(1.0, 2))
    res = max(gibbs_conditional_sweep(params, 3, center_root=False),
              gibbs_conditional_sweep(params, 3, center_root=True))
    record("single_site_conditional", res, res <= 1e-12)

    # bound ordering plus the three equality classes
    worst_order = 0.0
    for _ in range(1000):
        c = make_channel(rng.uniform(0, 1), rng.uniform(0, 1))
        try:
            worst_order = max(worst_order,
                              geometric_mean_bound_lhs(c) - mossel_peres_lhs(c))
        except DegenerateChannel:
            continue
    worst_eq = 0.0
    for _ in range(100):
        eps = rng.uniform(0.01, 0.99)
        c = symmetric_channel(eps)
        worst_eq = max(worst_eq, abs(geometric_mean_bound_lhs(c) - mossel_peres_lhs(c)))
        c, _p = hardcore_channel(rng.uniform(0.1, 5.0), 2)
        worst_eq = max(worst_eq, abs(geometric_mean_bound_lhs(c) - mossel_peres_lhs(c)))
        p = rng.uniform(0.05, 0.95)
        c = make_channel(p, p)
        worst_eq = max(worst_eq, abs(geometric_mean_bound_lhs(c) - mossel_peres_lhs(c)))
    record("bound_ordering", max(worst_order, worst_eq),
           worst_order <= 1e-12 and worst_eq <= 1e-12)

    # kernel-peak closed form vs finite differences
    xs = np.linspace(-20.0, 20.0, 10_001)
    worst = 0.0
    for _ in range(100):
        c = make_channel(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
        _, value = gap_kernel_peak(c)
        fx = gap_kernel(c, xs)
        grid_max = float(np.max(np.diff(fx) / np.diff(xs)))
        worst = max(worst, abs(value - grid_max))
    record("kernel_peak", worst, worst <= 1e-6)
    return checks


def _verify_channel(c: BinaryChannel) -> list:
    """Channel-specific checks for ``verify --matrix``."""
    checks = []
    pair1 = base_pair(c, 2)
    pair2 = evolve(pair1, c, 2, exact_policy())
    pair3 = evolve(pair2, c, 2, exact_policy())
    res = max(gap_identity_residual(pair2, pair1, c, 2),
              gap_identity_residual(pair3, pair2, c, 2))
    checks.append({"name": "mean_gap_identity", "residual": float(res),
                   "passed": bool(res <= 1e-9)})
    coupling = build_coupling(pair3, c)
    r0, r1 = coupling.marginal_residuals(pair3)
    checks.append({"name": "coupling_marginals", "residual": float(max(r0, r1)),
                   "passed": bool(max(r0, r1) <= 1e-12 and coupling.crossing_ok())})
    if c.p01 == c.p11:
        gap = mean_gap(pair3)
        checks.append({"name": "rows_equal_mean_gap", "residual": float(abs(gap)),
                       "passed": bool(abs(gap) <= 1e-10)})
    if min(c.p00, c.p01, c.p10, c.p11) > 0:
        _, value = gap_kernel_peak(c)
        diff = abs(value - geometric_mean_bound_lhs(c))
        checks.append({"name": "kernel_peak_closed_form", "residual": float(diff),
                       "passed": bool(diff <= 1e-12)})
    return checks


def cmd_verify(args) -> int:
    channel = None
    desc: dict = {"kind": "suite"}
    any_flag = (args.symmetric is not None or args.hardcore or
                args.hardcore_w is not None or args.hardcore_lambda is not None or
                args.matrix is not None)
    if any_flag:
        desc, channel = _parse_channel(args, args.k, allow_family_only=False)
    config = _run_config(args, desc, depth=None, engine=None, fmt="json")
    checks = _verify_channel(channel) if channel is not None else _verify_suite(args.seed)
    ok = all(chk["passed"] for chk in checks)
    payload = {"config": config, "checks": checks, "all_passed": ok}
    _emit(args, serialize.report_json(payload))
    return 0 if ok else 1


_DISPATCH = {
    "bounds": cmd_bounds,
    "evolve": cmd_evolve,
    "threshold": cmd_threshold,
    "couple": cmd_couple,
    "hardcore-check": cmd_hardcore_check,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _DISPATCH[args.command](args)
    except (InvalidParameter, DegenerateChannel, UndefinedLimit,
            PreconditionViolation, DegenerateEvent, NotInterior) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (AtomExplosion, ResourceLimit) as err:
        print(f"error: {err}", file=sys.stderr)
        print("hint: the population engine (--engine population) sidesteps "
              "atom blowup", file=sys.stderr)
        return 3
    except BadBracket as err:
        print(f"error: {err}", file=sys.stderr)
        return 4


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
