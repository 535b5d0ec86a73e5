"""Agent demand oracle for HZ markets.

An agent's bundle problem is a two-constraint LP (unit mass, unit budget),
so optimal vertex bundles are supported on at most two good groups.  Both
the primal optimum and the two-variable dual optimum are computed by exact
closed-form enumeration; the simplex engine serves as cross-validation in
the test suite, never as the production path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .market import (
    Allocation,
    Bundle,
    GroupedMarket,
    PriceVector,
    bundle_of,
    rat_str,
)

LEXICOGRAPHIC = "lexicographic"
MIN_COST = "min_cost"


class InfeasibleDemandError(ValueError):
    """Raised when no unit bundle fits in the unit budget (min price > 1)."""


def _require_affordable(p: PriceVector) -> None:
    if p.min_price() > 1:
        raise InfeasibleDemandError(
            f"minimum price {rat_str(p.min_price())} exceeds the unit budget"
        )


def _rows(m: GroupedMarket, aid: str, p: PriceVector) -> list[tuple[str, Fraction, Fraction]]:
    a = m.agent(aid)
    return [(g.id, Fraction(a.utilities.get(g.id, 0)), p.of(g.id)) for g in m.good_groups]


def _candidate_bundles(m: GroupedMarket, aid: str, p: PriceVector):
    """Yield (shares, value, cost) for every vertex of the bundle polytope.

    Vertices are single goods with price <= 1 (budget slack) and pairs with
    the budget exactly spent.
    """
    rows = _rows(m, aid, p)
    for gid, u, price in rows:
        if price <= 1:
            yield {gid: Fraction(1)}, u, price
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            gi, ui, pi = rows[i]
            gj, uj, pj = rows[j]
            if pi == pj:
                continue
            xi = (1 - pj) / (pi - pj)
            if 0 < xi < 1:
                xj = 1 - xi
                yield {gi: xi, gj: xj}, ui * xi + uj * xj, Fraction(1)


def optimal_bundle(
    m: GroupedMarket, agent_group: str, p: PriceVector, tie_break: str = LEXICOGRAPHIC
) -> Bundle:
    """An optimal vertex bundle (support <= 2 good groups) for one agent."""
    _require_affordable(p)
    if tie_break not in (LEXICOGRAPHIC, MIN_COST):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    best: Optional[tuple[dict, Fraction, Fraction]] = None
    for shares, value, cost in _candidate_bundles(m, agent_group, p):
        if best is None or value > best[1]:
            best = (shares, value, cost)
        elif value == best[1] and tie_break == MIN_COST and cost < best[2]:
            best = (shares, value, cost)
    assert best is not None  # at least one singleton is affordable
    return Bundle(best[0], best[1], best[2])


def optimal_value(m: GroupedMarket, agent_group: str, p: PriceVector) -> Fraction:
    """Optimal bundle value subject to unit mass and unit budget."""
    return optimal_bundle(m, agent_group, p).value


@dataclass(frozen=True)
class DualCertificate:
    """Optimal (alpha, mu) with alpha*p_j + mu >= u_j for all j, alpha >= 0."""

    alpha: Fraction
    mu: Fraction

    @property
    def value(self) -> Fraction:
        return self.alpha + self.mu


def dual_optimum(m: GroupedMarket, agent_group: str, p: PriceVector) -> DualCertificate:
    """Exact optimum of the two-variable dual by breakpoint enumeration.

    Minimizing alpha + max_j(u_j - alpha*p_j) over alpha >= 0 is piecewise
    linear and convex, so the optimum sits at alpha = 0 or at a crossing of
    two constraint lines.
    """
    _require_affordable(p)
    rows = _rows(m, agent_group, p)

    def envelope(alpha: Fraction) -> Fraction:
        return max(u - alpha * price for _, u, price in rows)

    candidates = [Fraction(0)]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            _, ui, pi = rows[i]
            _, uj, pj = rows[j]
            if pi != pj:
                alpha = (ui - uj) / (pi - pj)
                if alpha > 0:
                    candidates.append(alpha)
    best_alpha = None
    best_obj = None
    for alpha in sorted(set(candidates)):
        obj = alpha + envelope(alpha)
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_alpha = alpha
    mu = best_obj - best_alpha
    cert = DualCertificate(best_alpha, mu)
    assert cert.value == optimal_value(m, agent_group, p)
    return cert


@dataclass(frozen=True)
class SuboptimalityReport:
    """Dual slack per good group: gap_j = alpha*p_j + mu - u_j >= 0."""

    agent_group: str
    certificate: DualCertificate
    gaps: dict[str, Fraction]


def suboptimality(m: GroupedMarket, agent_group: str, p: PriceVector) -> SuboptimalityReport:
    cert = dual_optimum(m, agent_group, p)
    a = m.agent(agent_group)
    gaps = {}
    for g in m.good_groups:
        u = Fraction(a.utilities.get(g.id, 0))
        gap = cert.alpha * p.of(g.id) + cert.mu - u
        assert gap >= 0
        gaps[g.id] = gap
    return SuboptimalityReport(agent_group, cert, gaps)


@dataclass(frozen=True)
class FactCheck:
    check: str
    subject: Optional[str]
    passed: bool
    detail: str


@dataclass(frozen=True)
class BasicFactsReport:
    checks: tuple[FactCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[FactCheck]:
        return [c for c in self.checks if not c.passed]


def check_basic_facts(
    m: GroupedMarket,
    x: Allocation,
    p: PriceVector,
    epsilon: Fraction,
    delta: Fraction = Fraction(1, 10),
) -> BasicFactsReport:
    """Structural diagnostics every approximate equilibrium must satisfy.

    (a) total unit price mass at most 2n;
    (b) per agent group: mu* >= 0 and alpha* <= 1;
    (c) agents with a utility-1 good and optimal value <= 0.9:
        alpha* >= 1/(20n) and spend >= 1 - 20n*epsilon;
    (d) mass on delta-suboptimal goods at most 2*epsilon/delta;
    (e) agents as in (c): spend on positively-valued goods within
        [1 - 20n*epsilon - 1/n^2, 1 + epsilon].

    (c) and (e) are gated per agent on max utility exactly 1; they do not
    hold for agents whose best utility is bounded away from 1.
    """
    epsilon = Fraction(epsilon)
    delta = Fraction(delta)
    n = m.n_agents
    checks: list[FactCheck] = []

    price_mass = sum(p.of(g.id) * g.count for g in m.good_groups)
    checks.append(
        FactCheck(
            "a_price_mass",
            None,
            price_mass <= 2 * n,
            f"sum of unit prices {rat_str(price_mass)} vs bound {2 * n}",
        )
    )

    for a in m.agent_groups:
        rep = suboptimality(m, a.id, p)
        cert = rep.certificate
        checks.append(
            FactCheck(
                "b_dual_bounds",
                a.id,
                cert.mu >= 0 and cert.alpha <= 1,
                f"alpha*={rat_str(cert.alpha)}, mu*={rat_str(cert.mu)}",
            )
        )
        bundle = bundle_of(m, a.id, x, p)
        has_top_good = any(Fraction(u) == 1 for u in a.utilities.values())
        opt = cert.value
        if has_top_good and opt <= Fraction(9, 10):
            ok = cert.alpha >= Fraction(1, 20 * n) and bundle.cost >= 1 - 20 * n * epsilon
            checks.append(
                FactCheck(
                    "c_low_value_spend",
                    a.id,
                    ok,
                    f"alpha*={rat_str(cert.alpha)} vs 1/{20 * n}, "
                    f"spend={rat_str(bundle.cost)}",
                )
            )
            pos_spend = sum(
                p.of(gid) * s
                for gid, s in bundle.shares.items()
                if Fraction(a.utilities.get(gid, 0)) > 0
            )
            lo = 1 - 20 * n * epsilon - Fraction(1, n * n)
            hi = 1 + epsilon
            checks.append(
                FactCheck(
                    "e_positive_utility_spend",
                    a.id,
                    lo <= pos_spend <= hi,
                    f"spend on valued goods {rat_str(Fraction(pos_spend))} "
                    f"in [{rat_str(lo)}, {rat_str(hi)}]",
                )
            )
        subopt_mass = sum(
            s for gid, s in bundle.shares.items() if rep.gaps[gid] >= delta
        )
        bound = 2 * epsilon / delta
        checks.append(
            FactCheck(
                "d_suboptimal_mass",
                a.id,
                subopt_mass <= bound,
                f"mass {rat_str(Fraction(subopt_mass))} on {rat_str(delta)}-suboptimal "
                f"goods vs bound {rat_str(Fraction(bound))}",
            )
        )
    return BasicFactsReport(tuple(checks))
