"""Core data model for group-compressed HZ matching markets.

A market consists of agent groups and good groups with integer
multiplicities.  Every agent in a group shares the same utility row and
every good in a group shares the same price, so all quantities here are
group-level.  Arithmetic is exact rational throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

Rat = Fraction
RatLike = Union[Fraction, int, str]


def rat(x: RatLike) -> Fraction:
    """Coerce ints and 'a/b' strings to Fraction. Decimal strings are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if "." in x or "e" in x or "E" in x:
            raise ValueError(f"decimal notation not accepted for rationals: {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def rat_str(x: Fraction) -> str:
    """Serialize a rational as 'a/b' (or plain integer)."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class AgentGroup:
    id: str
    count: int
    utilities: Mapping[str, Fraction]  # good-group id -> utility; missing keys mean 0


@dataclass(frozen=True)
class GoodGroup:
    id: str
    count: int


@dataclass(frozen=True)
class GroupedMarket:
    agent_groups: tuple[AgentGroup, ...]
    good_groups: tuple[GoodGroup, ...]
    label: str = ""
    max_utility_one: bool = False

    @property
    def n_agents(self) -> int:
        return sum(a.count for a in self.agent_groups)

    @property
    def n_goods(self) -> int:
        return sum(g.count for g in self.good_groups)

    @property
    def good_ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.good_groups)

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.agent_groups)

    def good(self, gid: str) -> GoodGroup:
        for g in self.good_groups:
            if g.id == gid:
                return g
        raise KeyError(f"unknown good group {gid!r}")

    def agent(self, aid: str) -> AgentGroup:
        for a in self.agent_groups:
            if a.id == aid:
                return a
        raise KeyError(f"unknown agent group {aid!r}")

    def utility(self, aid: str, gid: str) -> Fraction:
        a = self.agent(aid)
        if gid not in {g.id for g in self.good_groups}:
            raise KeyError(f"unknown good group {gid!r}")
        return Fraction(a.utilities.get(gid, 0))


def make_market(
    agent_groups: Iterable[tuple[str, int, Mapping[str, RatLike]]],
    good_groups: Iterable[tuple[str, int]],
    label: str = "",
    max_utility_one: bool = False,
) -> GroupedMarket:
    """Convenience constructor accepting ints / 'a/b' strings for utilities."""
    ags = tuple(
        AgentGroup(aid, int(c), {g: rat(u) for g, u in us.items()})
        for aid, c, us in agent_groups
    )
    ggs = tuple(GoodGroup(gid, int(c)) for gid, c in good_groups)
    return GroupedMarket(ags, ggs, label=label, max_utility_one=max_utility_one)


@dataclass(frozen=True)
class PriceVector:
    """One exact rational price per good group."""

    prices: Mapping[str, Fraction]
    normalized: bool = False

    def of(self, gid: str) -> Fraction:
        try:
            return self.prices[gid]
        except KeyError:
            raise KeyError(f"no price for good group {gid!r}") from None

    def min_price(self) -> Fraction:
        return min(self.prices.values())


class InvalidPriceError(ValueError):
    pass


def price_vector(prices: Mapping[str, RatLike]) -> PriceVector:
    """Build a PriceVector; the normalized flag is computed, not trusted."""
    pv = {g: rat(p) for g, p in prices.items()}
    for g, p in pv.items():
        if p < 0:
            raise InvalidPriceError(f"negative price {rat_str(p)} for {g!r}")
    normalized = bool(pv) and min(pv.values()) == 0
    return PriceVector(pv, normalized)


@dataclass(frozen=True)
class Allocation:
    """Per-member allocation x[agent_group, good_group], uniform within group."""

    entries: Mapping[tuple[str, str], Fraction]

    def get(self, aid: str, gid: str) -> Fraction:
        return self.entries.get((aid, gid), Fraction(0))

    def row(self, aid: str) -> dict[str, Fraction]:
        return {g: v for (a, g), v in self.entries.items() if a == aid}


def allocation(entries: Mapping[tuple[str, str], RatLike]) -> Allocation:
    alloc = {}
    for (aid, gid), v in entries.items():
        value = rat(v)
        if value < 0:
            raise ValueError(f"negative allocation for ({aid!r}, {gid!r})")
        if value != 0:
            alloc[(aid, gid)] = value
    return Allocation(alloc)


@dataclass(frozen=True)
class Bundle:
    """A single agent's bundle: shares per good group, with value and cost."""

    shares: Mapping[str, Fraction]
    value: Fraction
    cost: Fraction


@dataclass(frozen=True)
class Violation:
    invariant: str
    subject: Optional[str]
    message: str


def validate_market(m: GroupedMarket) -> list[Violation]:
    """Check all structural invariants; violations are data, not exceptions."""
    out: list[Violation] = []
    good_ids = [g.id for g in m.good_groups]
    agent_ids = [a.id for a in m.agent_groups]
    if len(set(good_ids)) != len(good_ids):
        out.append(Violation("unique_ids", None, "duplicate good group id"))
    if len(set(agent_ids)) != len(agent_ids):
        out.append(Violation("unique_ids", None, "duplicate agent group id"))
    good_set = set(good_ids)
    for g in m.good_groups:
        if g.count <= 0:
            out.append(Violation("positive_count", g.id, f"good count {g.count}"))
    for a in m.agent_groups:
        if a.count <= 0:
            out.append(Violation("positive_count", a.id, f"agent count {a.count}"))
        for gid, u in a.utilities.items():
            if gid not in good_set:
                out.append(
                    Violation("utility_key", a.id, f"utility references unknown good {gid!r}")
                )
            if not (0 <= u <= 1):
                out.append(
                    Violation("utility_range", a.id, f"utility {rat_str(Fraction(u))} for {gid!r} outside [0,1]")
                )
        if m.max_utility_one and not any(Fraction(u) == 1 for u in a.utilities.values()):
            out.append(Violation("max_utility_one", a.id, "no good group with utility 1"))
    if m.n_agents != m.n_goods:
        out.append(
            Violation("count_identity", None, f"{m.n_agents} agents vs {m.n_goods} goods")
        )
    return out


INFINITE_SCALE = float("inf")


def normalize_prices(p: PriceVector) -> tuple[PriceVector, Union[Fraction, float]]:
    """Rescale price distances from 1 so the minimum price becomes 0.

    Uses p'_j = 1 + r*(p_j - 1) with r = 1/(1 - min price).  If every price
    is at least 1, the scaling degenerates: the only consistent equilibrium
    prices are all-1, and the all-zero vector is returned with an infinite
    scale sentinel.
    """
    for g, v in p.prices.items():
        if v < 0:
            raise InvalidPriceError(f"negative price for {g!r}")
    if not p.prices:
        return p, Fraction(1)
    pmin = p.min_price()
    if pmin >= 1:
        zero = {g: Fraction(0) for g in p.prices}
        return PriceVector(zero, True), INFINITE_SCALE
    r = Fraction(1) / (1 - pmin)
    scaled = {g: 1 + r * (v - 1) for g, v in p.prices.items()}
    return PriceVector(scaled, True), r


def bundle_of(m: GroupedMarket, aid: str, x: Allocation, p: Optional[PriceVector] = None) -> Bundle:
    """Assemble the per-member bundle of an agent group from an allocation."""
    shares = {}
    value = Fraction(0)
    cost = Fraction(0)
    a = m.agent(aid)
    for g in m.good_groups:
        s = x.get(aid, g.id)
        if s:
            shares[g.id] = s
            value += Fraction(a.utilities.get(g.id, 0)) * s
            if p is not None:
                cost += p.of(g.id) * s
    return Bundle(shares, value, cost)


def social_welfare(m: GroupedMarket, x: Allocation) -> Fraction:
    """Total utility over all agents: sum of count * per-member bundle value."""
    for (aid, gid) in x.entries:
        m.agent(aid)
        m.good(gid)
    total = Fraction(0)
    for a in m.agent_groups:
        total += a.count * bundle_of(m, a.id, x).value
    return total


def agent_values(m: GroupedMarket, x: Allocation) -> dict[str, Fraction]:
    return {a.id: bundle_of(m, a.id, x).value for a in m.agent_groups}


def pareto_dominates(m: GroupedMarket, x_a: Allocation, x_b: Allocation) -> bool:
    """True iff x_a is at least as good for every agent group and better for one."""
    va = agent_values(m, x_a)
    vb = agent_values(m, x_b)
    if any(va[i] < vb[i] for i in va):
        return False
    return any(va[i] > vb[i] for i in va)


def expand_units(m: GroupedMarket) -> GroupedMarket:
    """Per-unit expansion (testing only): one singleton group per agent/good."""
    goods = []
    for g in m.good_groups:
        for k in range(g.count):
            goods.append(GoodGroup(f"{g.id}#{k}", 1))
    agents = []
    for a in m.agent_groups:
        for k in range(a.count):
            utilities = {}
            for gid, u in a.utilities.items():
                c = m.good(gid).count
                for j in range(c):
                    utilities[f"{gid}#{j}"] = Fraction(u)
            agents.append(AgentGroup(f"{a.id}#{k}", 1, utilities))
    return GroupedMarket(tuple(agents), tuple(goods), label=m.label,
                         max_utility_one=m.max_utility_one)


def compact_units(m: GroupedMarket) -> GroupedMarket:
    """Reverse of expand_units: merge '#k'-suffixed unit groups by base id."""
    def base(gid: str) -> str:
        return gid.rsplit("#", 1)[0]

    good_counts: dict[str, int] = {}
    for g in m.good_groups:
        good_counts[base(g.id)] = good_counts.get(base(g.id), 0) + g.count
    agent_rows: dict[str, tuple[int, dict[str, Fraction]]] = {}
    for a in m.agent_groups:
        utilities: dict[str, Fraction] = {}
        for gid, u in a.utilities.items():
            utilities[base(gid)] = Fraction(u)
        b = base(a.id)
        if b in agent_rows:
            count, existing = agent_rows[b]
            if existing != utilities:
                raise ValueError(f"agent units of {b!r} have differing utility rows")
            agent_rows[b] = (count + a.count, existing)
        else:
            agent_rows[b] = (a.count, utilities)
    goods = tuple(GoodGroup(gid, c) for gid, c in good_counts.items())
    agents = tuple(AgentGroup(aid, c, us) for aid, (c, us) in agent_rows.items())
    return GroupedMarket(agents, goods, label=m.label, max_utility_one=m.max_utility_one)
