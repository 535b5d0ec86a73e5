"""Serialization: JSON documents for markets/prices/allocations/verdicts,
DIMACS CNF input, and the threshold-game text format.

All rationals travel as decimal-free "a/b" strings ("0" and "1" included),
and every emitter sorts keys, so identical data produces identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional

from .equilibrium import EquilibriumCluster, Verdict
from .market import (
    AgentGroup,
    Allocation,
    GoodGroup,
    GroupedMarket,
    PriceVector,
    price_vector,
    rat,
    rat_str,
)
from .threshold import Profile, ThresholdGame, threshold_game


class ParseError(ValueError):
    pass


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid document: {e}") from None


# ---------------------------------------------------------------------------
# markets


def market_to_doc(m: GroupedMarket, meta: Optional[dict] = None) -> dict:
    doc = {
        "label": m.label,
        "good_groups": [{"id": g.id, "count": g.count} for g in m.good_groups],
        "agent_groups": [
            {
                "id": a.id,
                "count": a.count,
                "utilities": {gid: rat_str(Fraction(u)) for gid, u in a.utilities.items()},
            }
            for a in m.agent_groups
        ],
    }
    if m.max_utility_one:
        doc["max_utility_one"] = True
    if meta is not None:
        doc["meta"] = meta
    return doc


def market_from_doc(doc: dict) -> tuple[GroupedMarket, dict]:
    try:
        goods = tuple(
            GoodGroup(str(g["id"]), int(g["count"])) for g in doc["good_groups"]
        )
        agents = tuple(
            AgentGroup(
                str(a["id"]),
                int(a["count"]),
                {str(gid): rat(u) for gid, u in a.get("utilities", {}).items()},
            )
            for a in doc["agent_groups"]
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed market document: {e}") from None
    m = GroupedMarket(
        agents,
        goods,
        label=str(doc.get("label", "")),
        max_utility_one=bool(doc.get("max_utility_one", False)),
    )
    return m, doc.get("meta", {})


# ---------------------------------------------------------------------------
# prices and allocations


def prices_to_doc(p: PriceVector) -> dict:
    return {"prices": {gid: rat_str(v) for gid, v in p.prices.items()}}


def prices_from_doc(doc: dict) -> PriceVector:
    try:
        return price_vector({str(g): rat(v) for g, v in doc["prices"].items()})
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed price document: {e}") from None


def allocation_to_doc(x: Allocation) -> dict:
    rows: dict[str, dict[str, str]] = {}
    for (aid, gid), v in x.entries.items():
        rows.setdefault(aid, {})[gid] = rat_str(v)
    return {"allocation": rows}


def allocation_from_doc(doc: dict) -> Allocation:
    try:
        entries = {}
        for aid, row in doc["allocation"].items():
            for gid, v in row.items():
                entries[(str(aid), str(gid))] = rat(v)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ParseError(f"malformed allocation document: {e}") from None
    return Allocation(entries)


# ---------------------------------------------------------------------------
# verdicts and clusters


def verdict_to_doc(v: Verdict) -> dict:
    return {
        "passed": v.passed,
        "violations": [
            {
                "condition": viol.condition,
                "subject": viol.subject,
                "magnitude": rat_str(Fraction(viol.magnitude)),
            }
            for viol in v.violations
        ],
    }


def cluster_to_doc(c: EquilibriumCluster) -> dict:
    return {
        "representative": {g: rat_str(v) for g, v in c.representative.prices.items()},
        "members": [
            {g: rat_str(v) for g, v in m.prices.items()} for m in c.members
        ],
        "diameter": rat_str(c.diameter),
        "bounds": {
            g: [rat_str(lo), rat_str(hi)] for g, (lo, hi) in sorted(c.bounds.items())
        },
    }


def clusters_to_doc(clusters) -> dict:
    return {"clusters": [cluster_to_doc(c) for c in clusters]}


def profile_to_doc(x: Profile) -> dict:
    return {"profile": {v: rat_str(val) for v, val in x.values.items()}}


# ---------------------------------------------------------------------------
# DIMACS CNF


def parse_dimacs(text: str) -> tuple[list[tuple[int, ...]], int]:
    """Parse DIMACS CNF into (clauses, variable count)."""
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    declared: Optional[tuple[int, int]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: bad problem line {line!r}")
            declared = (int(parts[2]), int(parts[3]))
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if current:
                    clauses.append(tuple(current))
                    current = []
            else:
                current.append(lit)
    if current:
        raise ParseError(f"clause {tuple(current)} is not 0-terminated")
    if declared is None:
        raise ParseError("missing `p cnf <vars> <clauses>` problem line")
    n_vars, n_clauses = declared
    if len(clauses) != n_clauses:
        raise ParseError(f"header declares {n_clauses} clauses, found {len(clauses)}")
    for c in clauses:
        if any(abs(l) > n_vars for l in c):
            raise ParseError(f"clause {c} exceeds declared variable count")
    return clauses, n_vars


def write_dimacs(clauses, n_vars: Optional[int] = None) -> str:
    if n_vars is None:
        n_vars = max((abs(l) for c in clauses for l in c), default=0)
    lines = [f"p cnf {n_vars} {len(clauses)}"]
    for c in clauses:
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# threshold games


def parse_threshold_game(text: str, degree_bounded: bool = False) -> ThresholdGame:
    """First line: `<node count> <kappa as a/b>`; then one `u v` edge per line."""
    lines = [l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not lines:
        raise ParseError("empty threshold-game document")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"bad header line {lines[0]!r}")
    try:
        n = int(head[0])
        kappa = rat(head[1])
    except ValueError as e:
        raise ParseError(f"bad header line {lines[0]!r}: {e}") from None
    nodes = [str(i) for i in range(1, n + 1)]
    edges = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"bad edge line {line!r}")
        edges.append((parts[0], parts[1]))
    try:
        return threshold_game(nodes, edges, kappa, degree_bounded)
    except ValueError as e:
        raise ParseError(str(e)) from None


def write_threshold_game(g: ThresholdGame) -> str:
    lines = [f"{len(g.nodes)} {rat_str(g.kappa)}"]
    for (u, v) in g.edges:
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"
