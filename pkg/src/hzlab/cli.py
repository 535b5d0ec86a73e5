"""Command-line surface: verification, search, demand queries, reductions.

Exit codes: 0 success / verification passed, 1 verification failed,
2 input or usage error.  All numeric options are rationals written "a/b".
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import demand, equilibrium, formats, reductions
from .formats import ParseError
from .market import rat, rat_str, social_welfare, validate_market
from .threshold import ThresholdGame, threshold_game

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write_out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _load_market(path: str):
    m, meta = formats.market_from_doc(formats.loads(_read(path)))
    violations = validate_market(m)
    if violations:
        details = "; ".join(f"{v.invariant}({v.subject}): {v.message}" for v in violations)
        raise ParseError(f"invalid market: {details}")
    return m, meta


def _verdict_text(verdict) -> str:
    if verdict.passed:
        return "PASS\n"
    lines = ["FAIL"]
    for v in verdict.violations:
        subject = v.subject if v.subject is not None else "-"
        lines.append(f"  {v.condition} {subject} magnitude={rat_str(Fraction(v.magnitude))}")
    return "\n".join(lines) + "\n"


def _emit_verdict(verdict, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(formats.dumps(formats.verdict_to_doc(verdict)))
    else:
        sys.stdout.write(_verdict_text(verdict))
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    m, _ = _load_market(args.market)
    p = formats.prices_from_doc(formats.loads(_read(args.prices)))
    x = formats.allocation_from_doc(formats.loads(_read(args.allocation)))
    if args.mode == "exact":
        verdict = equilibrium.verify_exact(m, x, p)
    elif args.mode == "approx":
        verdict = equilibrium.verify_approx(m, x, p, rat(args.epsilon))
    else:
        verdict = equilibrium.verify_relaxed(m, x, p, rat(args.epsilon))
    return _emit_verdict(verdict, args.format)


def cmd_solve(args) -> int:
    m, _ = _load_market(args.market)
    clusters = equilibrium.find_equilibria(
        m, rat(args.grid), rat(args.epsilon), refine_steps=args.refine_steps
    )
    if args.format == "json":
        sys.stdout.write(formats.dumps(formats.clusters_to_doc(clusters)))
    else:
        order = m.good_ids
        lines = [f"clusters: {len(clusters)}"]
        for i, c in enumerate(clusters):
            rep = ", ".join(f"{g}={rat_str(c.representative.of(g))}" for g in order)
            lines.append(
                f"  cluster {i}: representative ({rep}) "
                f"members={len(c.members)} diameter={rat_str(c.diameter)}"
            )
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_demand(args) -> int:
    m, _ = _load_market(args.market)
    p = formats.prices_from_doc(formats.loads(_read(args.prices)))
    bundle = demand.optimal_bundle(m, args.agent_group, p, tie_break=args.tie_break)
    cert = demand.dual_optimum(m, args.agent_group, p)
    if args.format == "json":
        doc = {
            "agent_group": args.agent_group,
            "bundle": {g: rat_str(s) for g, s in bundle.shares.items()},
            "value": rat_str(bundle.value),
            "cost": rat_str(bundle.cost),
            "alpha": rat_str(cert.alpha),
            "mu": rat_str(cert.mu),
        }
        sys.stdout.write(formats.dumps(doc))
    else:
        shares = ", ".join(
            f"{g}={rat_str(s)}" for g, s in sorted(bundle.shares.items())
        )
        sys.stdout.write(
            f"agent group {args.agent_group}\n"
            f"  bundle: {shares}\n"
            f"  value: {rat_str(bundle.value)}  cost: {rat_str(bundle.cost)}\n"
            f"  dual: alpha={rat_str(cert.alpha)} mu={rat_str(cert.mu)}\n"
        )
    return EXIT_OK


def _game_meta(g: ThresholdGame, m: int) -> dict:
    return {
        "kind": "threshold",
        "m": m,
        "kappa": rat_str(g.kappa),
        "nodes": list(g.nodes),
        "edges": [[u, v] for (u, v) in g.edges],
    }


def cmd_reduce_threshold(args) -> int:
    game = formats.parse_threshold_game(_read(args.game))
    inst = reductions.build_ppad_market(game, args.m)
    doc = formats.market_to_doc(inst.market, meta=_game_meta(game, args.m))
    _write_out(formats.dumps(doc), args.out)
    return EXIT_OK


def cmd_reduce_sat(args) -> int:
    clauses, _ = formats.parse_dimacs(_read(args.cnf))
    inst = reductions.build_sat_market(clauses, args.K)
    meta = {
        "kind": "sat",
        "K": args.K,
        "n_vars": inst.n_vars,
        "clauses": [list(c) for c in inst.clauses],
    }
    _write_out(formats.dumps(formats.market_to_doc(inst.market, meta=meta)), args.out)
    return EXIT_OK


def _parse_assignment(text: str, n_vars: int) -> tuple[bool, ...]:
    bits = text.strip()
    if len(bits) != n_vars or any(b not in "01" for b in bits):
        raise ParseError(
            f"assignment must be a string of {n_vars} characters over 0/1"
        )
    return tuple(b == "1" for b in bits)


def cmd_complete_sat(args) -> int:
    clauses, _ = formats.parse_dimacs(_read(args.cnf))
    inst = reductions.build_sat_market(clauses, args.K)
    assignment = _parse_assignment(args.assignment, inst.n_vars)
    x, p = reductions.completeness_equilibrium(inst, assignment)
    verdict = equilibrium.verify_exact(inst.market, x, p)
    if args.out_prices:
        _write_out(formats.dumps(formats.prices_to_doc(p)), args.out_prices)
    if args.out_allocation:
        _write_out(formats.dumps(formats.allocation_to_doc(x)), args.out_allocation)
    return _emit_verdict(verdict, args.format)


def cmd_extract(args) -> int:
    m, meta = _load_market(args.market)
    p = formats.prices_from_doc(formats.loads(_read(args.prices)))
    kind = meta.get("kind")
    if kind == "threshold":
        game = threshold_game(
            meta["nodes"], [tuple(e) for e in meta["edges"]], rat(meta["kappa"])
        )
        inst = reductions.PpadInstance(game, int(meta["m"]), m)
        profile = reductions.extract_threshold_profile(inst, p)
        if args.format == "json":
            sys.stdout.write(formats.dumps(formats.profile_to_doc(profile)))
        else:
            lines = [f"{v} {rat_str(profile.of(v))}" for v in game.nodes]
            sys.stdout.write("\n".join(lines) + "\n")
        return EXIT_OK
    if kind == "sat":
        inst = reductions.build_sat_market(
            [tuple(c) for c in meta["clauses"]], int(meta["K"])
        )
        tol = rat(args.tol)
        if args.allocation:
            x = formats.allocation_from_doc(formats.loads(_read(args.allocation)))
            report = reductions.extract_assignment(inst, x, p, tol)
            assignment = report.assignment
            clause_lines = [
                f"clause {c.clause}: value {rat_str(c.value)}"
                + (" near-satisfied" if c.near_satisfied_center else "")
                + (" near-unsatisfied" if c.near_unsatisfied_center else "")
                for c in report.clauses
            ]
        else:
            assignment = {}
            for i in range(1, inst.n_vars + 1):
                case = reductions.classify_variable_gadget(
                    p.of(inst.variable_good(i, 1)),
                    p.of(inst.variable_good(i, 2)),
                    p.of(inst.variable_good(i, 3)),
                    tol,
                )
                assignment[i] = {
                    reductions.TRUE_LIKE: True,
                    reductions.FALSE_LIKE: False,
                }.get(case)
            clause_lines = []
        if args.format == "json":
            doc = {
                "assignment": {
                    str(i): (None if v is None else v) for i, v in assignment.items()
                }
            }
            sys.stdout.write(formats.dumps(doc))
        else:
            lines = [
                f"x{i} = " + ("?" if v is None else ("1" if v else "0"))
                for i, v in sorted(assignment.items())
            ]
            sys.stdout.write("\n".join(lines + clause_lines) + "\n")
        return EXIT_OK
    raise ParseError("market document carries no extraction metadata")


def cmd_pad(args) -> int:
    m, meta = _load_market(args.market)
    padded = reductions.pad_market(m, args.n)
    doc = formats.market_to_doc(padded, meta=meta or None)
    _write_out(formats.dumps(doc), args.out)
    return EXIT_OK


def cmd_welfare(args) -> int:
    m, _ = _load_market(args.market)
    x = formats.allocation_from_doc(formats.loads(_read(args.allocation)))
    sys.stdout.write(rat_str(social_welfare(m, x)) + "\n")
    return EXIT_OK


def cmd_report_gadgets(args) -> int:
    """Sweep the edge-gadget families and print worst-case scaled errors."""
    m_values = [int(t) for t in args.m_list.split(",") if t]
    rng = random.Random(args.seed)
    lines = ["family m worst_scaled_error"]
    for m in m_values:
        worst = {
            "link_m4": Fraction(0),
            "step_v_total": Fraction(0),
            "step_u_total": Fraction(0),
            "cross_total": Fraction(0),
            "grand_total_v": Fraction(0),
            "grand_total_u": Fraction(0),
        }
        denom = 997
        for _ in range(args.pairs):
            p_u = Fraction(rng.randint(0, denom), denom * m * m)
            p_v = Fraction(rng.randint(0, denom), denom * m * m)
            pred = reductions.predict_edge_gadget(p_u, p_v, m)
            meas = reductions.measure_edge_gadget(p_u, p_v, m)
            a1 = reductions.edge_family_share(
                p_u, p_v, m, reductions.EDGE_FAMILY_LINK, "G_v1"
            )
            worst["link_m4"] = max(worst["link_m4"], m**4 * abs(a1 - pred.a1_share_v))
            worst["step_v_total"] = max(
                worst["step_v_total"], abs(meas.a2_total_v - pred.a2_total_v)
            )
            worst["step_u_total"] = max(
                worst["step_u_total"], abs(meas.a3_total_u - pred.a3_total_u)
            )
            worst["cross_total"] = max(
                worst["cross_total"], abs(meas.a4_total_v - pred.a4_total_v)
            )
            worst["grand_total_v"] = max(
                worst["grand_total_v"], abs(meas.total_v - pred.total_v)
            )
            worst["grand_total_u"] = max(
                worst["grand_total_u"], abs(meas.total_u - pred.total_u)
            )
        for key in sorted(worst):
            lines.append(f"{key} {m} {float(worst[key]):.6f}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hzlab",
        description="Matching-market equilibrium verification, search, and "
        "hardness-gadget construction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("verify", help="verify an (allocation, prices) pair")
    p.add_argument("--market", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--mode", choices=("exact", "approx", "relaxed"), default="exact")
    p.add_argument("--epsilon", default="0")
    add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="grid search for equilibrium price clusters")
    p.add_argument("--market", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--epsilon", default="0")
    p.add_argument("--refine-steps", type=int, default=30)
    add_format(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("demand", help="optimal bundle and dual certificate")
    p.add_argument("--market", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--agent-group", required=True)
    p.add_argument(
        "--tie-break", choices=(demand.LEXICOGRAPHIC, demand.MIN_COST),
        default=demand.LEXICOGRAPHIC,
    )
    add_format(p)
    p.set_defaults(func=cmd_demand)

    p = sub.add_parser("reduce-threshold", help="threshold game to market")
    p.add_argument("--game", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce_threshold)

    p = sub.add_parser("reduce-sat", help="3SAT formula to market")
    p.add_argument("--cnf", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce_sat)

    p = sub.add_parser("complete-sat", help="equilibrium from a satisfying assignment")
    p.add_argument("--cnf", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--assignment", required=True, help="bit string, one per variable")
    p.add_argument("--out-prices")
    p.add_argument("--out-allocation")
    add_format(p)
    p.set_defaults(func=cmd_complete_sat)

    p = sub.add_parser("extract", help="profile/assignment from equilibrium prices")
    p.add_argument("--market", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--allocation")
    p.add_argument("--tol", default="1/100")
    add_format(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pad", help="replicate all groups N times")
    p.add_argument("--market", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pad)

    p = sub.add_parser("report-gadgets", help="edge-gadget prediction sweep")
    p.add_argument("--m-list", default="4,8")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report_gadgets)

    p = sub.add_parser("welfare", help="total utility of an allocation")
    p.add_argument("--market", required=True)
    p.add_argument("--allocation", required=True)
    p.set_defaults(func=cmd_welfare)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError, KeyError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
