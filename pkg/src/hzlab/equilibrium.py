"""Equilibrium verification and small-instance equilibrium search.

Verification is exact rational arithmetic end to end.  The grid finder
screens candidate price vectors in floating point (vectorized over the
grid) and promotes survivors to an exact feasibility LP, so every reported
point carries an exact witness allocation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import demand
from .lp import GE, LE, EQ, check_feasible, linear_program
from .market import (
    Allocation,
    GroupedMarket,
    PriceVector,
    bundle_of,
    rat,
    rat_str,
)

CLEAR_GOODS = "clear_goods"
UNIT_MASS = "unit_mass"
BUDGET = "budget"
OPTIMALITY = "optimality"
NORMALIZED = "normalized"

_SCREEN_TOL = 1e-9


class NormalizationError(ValueError):
    """Approximate verification requires a normalized price vector."""


class MarketTooLargeError(ValueError):
    """The grid finder is guarded to small markets."""


@dataclass(frozen=True)
class VerdictViolation:
    condition: str
    subject: Optional[str]
    magnitude: Fraction


@dataclass(frozen=True)
class Verdict:
    violations: tuple[VerdictViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _check_references(m: GroupedMarket, x: Allocation, p: PriceVector) -> None:
    good_ids = set(m.good_ids)
    agent_ids = set(m.agent_ids)
    for (aid, gid) in x.entries:
        if aid not in agent_ids:
            raise KeyError(f"allocation references unknown agent group {aid!r}")
        if gid not in good_ids:
            raise KeyError(f"allocation references unknown good group {gid!r}")
    for gid in good_ids:
        p.of(gid)


def _structural_violations(
    m: GroupedMarket,
    x: Allocation,
    p: PriceVector,
    budget_slack: Fraction,
    clearing_slack: Fraction,
) -> list[VerdictViolation]:
    """Clearing, unit-mass and budget conditions, shared by all verifiers."""
    out: list[VerdictViolation] = []
    for g in m.good_groups:
        total = sum(a.count * x.get(a.id, g.id) for a in m.agent_groups)
        per_unit_gap = abs(total - g.count) / g.count
        if per_unit_gap > clearing_slack:
            out.append(VerdictViolation(CLEAR_GOODS, g.id, per_unit_gap))
    for a in m.agent_groups:
        mass = sum(x.get(a.id, g.id) for g in m.good_groups)
        if mass != 1:
            out.append(VerdictViolation(UNIT_MASS, a.id, abs(mass - 1)))
        cost = sum(p.of(g.id) * x.get(a.id, g.id) for g in m.good_groups)
        if cost > 1 + budget_slack:
            out.append(VerdictViolation(BUDGET, a.id, cost - 1))
    return out


def _optimality_violations(
    m: GroupedMarket, x: Allocation, p: PriceVector, slack: Fraction
) -> list[VerdictViolation]:
    out = []
    for a in m.agent_groups:
        opt = demand.optimal_value(m, a.id, p)
        value = bundle_of(m, a.id, x).value
        if value < opt - slack:
            out.append(VerdictViolation(OPTIMALITY, a.id, opt - value))
    return out


def verify_exact(m: GroupedMarket, x: Allocation, p: PriceVector) -> Verdict:
    """Zero-tolerance check of clearing, unit mass, budget and optimality."""
    _check_references(m, x, p)
    zero = Fraction(0)
    violations = _structural_violations(m, x, p, zero, zero)
    violations += _optimality_violations(m, x, p, zero)
    return Verdict(tuple(violations))


def verify_approx(m: GroupedMarket, x: Allocation, p: PriceVector, epsilon) -> Verdict:
    """Clearing and mass exact; cost <= 1+eps; value >= optimum - eps.

    Requires normalized prices: scaling moves the additive slack, so the
    approximate notion is only meaningful with the minimum price pinned to 0.
    """
    if not p.normalized:
        raise NormalizationError("approximate verification needs min price == 0")
    epsilon = rat(epsilon)
    _check_references(m, x, p)
    violations = _structural_violations(m, x, p, epsilon, Fraction(0))
    violations += _optimality_violations(m, x, p, epsilon)
    return Verdict(tuple(violations))


def verify_relaxed(m: GroupedMarket, x: Allocation, p: PriceVector, epsilon) -> Verdict:
    """As verify_approx, with per-unit clearing relaxed to |total/count - 1| <= eps."""
    if not p.normalized:
        raise NormalizationError("approximate verification needs min price == 0")
    epsilon = rat(epsilon)
    _check_references(m, x, p)
    violations = _structural_violations(m, x, p, epsilon, epsilon)
    violations += _optimality_violations(m, x, p, epsilon)
    return Verdict(tuple(violations))


def bundle_feasibility(m: GroupedMarket, p: PriceVector, epsilon) -> Optional[Allocation]:
    """Exact witness allocation clearing all goods with every agent within
    epsilon of its optimal value and budget, or None if none exists."""
    if not p.normalized:
        raise NormalizationError("bundle feasibility needs normalized prices")
    epsilon = rat(epsilon)
    agents = m.agent_groups
    goods = m.good_groups
    k = len(goods)
    nv = len(agents) * k

    def var(i: int, j: int) -> int:
        return i * k + j

    constraints = []
    for i, a in enumerate(agents):
        row = [Fraction(0)] * nv
        for j in range(k):
            row[var(i, j)] = Fraction(1)
        constraints.append((row, EQ, Fraction(1)))
    for j, g in enumerate(goods):
        row = [Fraction(0)] * nv
        for i, a in enumerate(agents):
            row[var(i, j)] = Fraction(a.count)
        constraints.append((row, EQ, Fraction(g.count)))
    for i, a in enumerate(agents):
        row = [Fraction(0)] * nv
        for j, g in enumerate(goods):
            row[var(i, j)] = p.of(g.id)
        constraints.append((row, LE, 1 + epsilon))
        urow = [Fraction(0)] * nv
        for j, g in enumerate(goods):
            urow[var(i, j)] = Fraction(a.utilities.get(g.id, 0))
        opt = demand.optimal_value(m, a.id, p)
        constraints.append((urow, GE, opt - epsilon))

    lp = linear_program([Fraction(0)] * nv, constraints)
    feasible, witness = check_feasible(lp)
    if not feasible:
        return None
    entries = {}
    for i, a in enumerate(agents):
        for j, g in enumerate(goods):
            v = witness[var(i, j)]
            if v:
                entries[(a.id, g.id)] = v
    return Allocation(entries)


@dataclass(frozen=True)
class EquilibriumCluster:
    representative: PriceVector
    members: tuple[PriceVector, ...]
    diameter: Fraction
    bounds: dict


def _worker_count() -> int:
    env = os.environ.get("HZLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _grid_points(counts: list[int], h: Fraction, budget: Fraction) -> list[tuple[int, ...]]:
    """Integer grid vectors t with min(t)=0 and sum(count_j * t_j * h) <= budget."""
    k = len(counts)
    ratio = budget / h
    limit = ratio.numerator // ratio.denominator  # integer budget in h units
    out: list[tuple[int, ...]] = []

    def rec(idx: int, prefix: list[int], used: int, has_zero: bool) -> None:
        if idx == k:
            out.append(tuple(prefix))
            return
        c = counts[idx]
        # the normalized constraint (some coordinate 0) makes the space a
        # union of faces; force the last coordinate to 0 when none is yet
        top = 0 if (idx == k - 1 and not has_zero) else (limit - used) // c
        for t in range(top + 1):
            prefix.append(t)
            rec(idx + 1, prefix, used + c * t, has_zero or t == 0)
            prefix.pop()

    rec(0, [], 0, False)
    return out


def _screen_chunk(
    m: GroupedMarket, pts: np.ndarray, epsilon: float
) -> np.ndarray:
    """Float necessary-condition screen over a chunk of price vectors.

    Each agent's admissible bundles form a polytope whose vertices are
    singleton goods and budget-tight pairs; summing per-good vertex share
    extrema over agents bounds attainable demand, which must bracket supply.
    """
    C, k = pts.shape
    goods = m.good_groups
    counts = np.array([g.count for g in goods], dtype=float)
    alive = np.ones(C, dtype=bool)
    s_max = np.zeros((C, k))
    s_min = np.zeros((C, k))
    budget = 1.0 + epsilon
    for a in m.agent_groups:
        u = np.array([float(Fraction(a.utilities.get(g.id, 0))) for g in goods])
        cands = []  # (valid mask, value, dense share array descriptor)
        for j in range(k):
            valid = pts[:, j] <= budget + _SCREEN_TOL
            value = np.where(valid, u[j], -np.inf)
            cands.append((valid, value, ("single", j, None)))
        for j in range(k):
            for l in range(j + 1, k):
                denom = pts[:, j] - pts[:, l]
                with np.errstate(divide="ignore", invalid="ignore"):
                    xj = (budget - pts[:, l]) / denom
                valid = (np.abs(denom) > _SCREEN_TOL) & (xj > -_SCREEN_TOL) & (
                    xj < 1 + _SCREEN_TOL
                )
                xj = np.clip(xj, 0.0, 1.0)
                value = np.where(valid, u[j] * xj + u[l] * (1 - xj), -np.inf)
                cands.append((valid, value, ("pair", j, (l, xj))))
        values = np.stack([c[1] for c in cands])
        if epsilon == 0:
            opt = values.max(axis=0)
            threshold = opt - _SCREEN_TOL
        else:
            # with slack the value cut is unreliable at vertex level; keep
            # all affordable vertices (pure supply-vs-affordability screen)
            threshold = np.full(C, -np.inf)
        amax = np.full((C, k), -np.inf)
        amin = np.full((C, k), np.inf)
        for (valid, value, desc) in cands:
            allowed = valid & (value >= threshold)
            if not allowed.any():
                continue
            share = np.zeros((C, k))
            kind, j, extra = desc
            if kind == "single":
                share[:, j] = 1.0
            else:
                l, xj = extra
                share[:, j] = xj
                share[:, l] = 1 - xj
            for g in range(k):
                amax[:, g] = np.where(
                    allowed, np.maximum(amax[:, g], share[:, g]), amax[:, g]
                )
                amin[:, g] = np.where(
                    allowed, np.minimum(amin[:, g], share[:, g]), amin[:, g]
                )
        # an agent with no admissible vertex kills the point outright
        any_allowed = np.isfinite(amax).any(axis=1)
        alive &= any_allowed
        amax = np.where(np.isfinite(amax), amax, 0.0)
        amin = np.where(np.isfinite(amin), amin, 0.0)
        s_max += a.count * amax
        s_min += a.count * amin
    slack = _SCREEN_TOL * max(1, m.n_agents)
    alive &= (s_max >= counts[None, :] - slack).all(axis=1)
    alive &= (s_min <= counts[None, :] + slack).all(axis=1)
    return alive


def _cluster_indices(coords: list[tuple[int, ...]]) -> list[list[int]]:
    """Union points within Chebyshev distance 2 on the integer grid."""
    parent = list(range(len(coords)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            if max(abs(a - b) for a, b in zip(coords[i], coords[j])) <= 2:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(len(coords)):
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in groups.values()]


def _refine_axis(
    m: GroupedMarket,
    base: dict[str, Fraction],
    gid: str,
    inside: Fraction,
    outside: Fraction,
    epsilon: Fraction,
    steps: int,
) -> Fraction:
    """Bisect along one price axis for the feasibility boundary.

    Returns the furthest value towards `outside` still feasible, snapping
    to a small-denominator rational when that snap is itself feasible.
    """

    def feasible_at(v: Fraction) -> bool:
        prices = dict(base)
        prices[gid] = v
        if v < 0 or min(prices.values()) != 0:
            return False
        pv = PriceVector(prices, True)
        return bundle_feasibility(m, pv, epsilon) is not None

    lo, hi = inside, outside
    for _ in range(steps):
        mid = (lo + hi) / 2
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    snapped = Fraction(float(lo)).limit_denominator(10**4)
    if snapped != lo and inside <= snapped <= hi or hi <= snapped <= inside:
        if feasible_at(snapped) and abs(snapped - lo) <= abs(hi - lo):
            return snapped
    return lo


def find_equilibria(
    m: GroupedMarket,
    grid_resolution,
    epsilon,
    refine_steps: int = 30,
) -> list[EquilibriumCluster]:
    """Enumerate normalized price grids, keep feasible points, cluster them.

    Candidate vectors are multiples of the resolution with minimum price 0
    and total good-weighted price at most the economy's total budget; a
    vectorized float screen discards most points before exact feasibility.
    """
    goods = m.good_groups
    if len(goods) > 6:
        raise MarketTooLargeError(f"{len(goods)} good groups exceeds the guard of 6")
    h = rat(grid_resolution)
    if h <= 0:
        raise ValueError("grid resolution must be positive")
    epsilon = rat(epsilon)
    counts = [g.count for g in goods]
    budget = m.n_agents * (1 + epsilon)
    coords = _grid_points(counts, h, budget)
    if not coords:
        return []

    hf = float(h)
    survivors: list[tuple[int, ...]] = []
    chunk = 65536
    for start in range(0, len(coords), chunk):
        block = coords[start : start + chunk]
        pts = np.array(block, dtype=float) * hf
        alive = _screen_chunk(m, pts, float(epsilon))
        for t, ok in zip(block, alive):
            if ok:
                survivors.append(t)

    passing: list[tuple[int, ...]] = []
    for t in survivors:
        prices = {g.id: h * t[j] for j, g in enumerate(goods)}
        pv = PriceVector(prices, True)
        if bundle_feasibility(m, pv, epsilon) is not None:
            passing.append(t)
    passing.sort()

    clusters = []
    for idxs in _cluster_indices(passing):
        member_coords = [passing[i] for i in idxs]
        members = []
        for t in member_coords:
            prices = {g.id: h * t[j] for j, g in enumerate(goods)}
            members.append(PriceVector(prices, True))
        rep = members[0]
        diameter = Fraction(0)
        for i in range(len(member_coords)):
            for j in range(i + 1, len(member_coords)):
                d = max(
                    abs(a - b) * h
                    for a, b in zip(member_coords[i], member_coords[j])
                )
                diameter = max(diameter, d)
        bounds = {}
        if refine_steps > 0:
            for j, g in enumerate(goods):
                ts = [t[j] for t in member_coords]
                lo_t, hi_t = min(ts), max(ts)
                lo_member = min(t for t in member_coords if t[j] == lo_t)
                hi_member = min(t for t in member_coords if t[j] == hi_t)
                lo_base = {gg.id: h * lo_member[jj] for jj, gg in enumerate(goods)}
                hi_base = {gg.id: h * hi_member[jj] for jj, gg in enumerate(goods)}
                lo_v = _refine_axis(
                    m, lo_base, g.id, h * lo_t, h * max(lo_t - 1, 0) if lo_t > 0 else Fraction(0),
                    epsilon, refine_steps if lo_t > 0 else 0,
                )
                hi_v = _refine_axis(
                    m, hi_base, g.id, h * hi_t, h * (hi_t + 1), epsilon, refine_steps
                )
                bounds[g.id] = (lo_v, hi_v)
        clusters.append(EquilibriumCluster(rep, tuple(members), diameter, bounds))

    order = tuple(g.id for g in goods)
    clusters.sort(key=lambda c: tuple(c.representative.of(gid) for gid in order))
    return clusters
