"""Gadget-market constructions, extraction maps, and prediction formulas.

Three families of constructions live here:
  * threshold-game markets whose equilibrium prices encode game profiles,
  * 3SAT markets whose equilibria encode satisfying assignments,
  * small teaching markets (the two-good toy with a free filler good).
Also: closed-form predictions for the edge-gadget demand patterns, single
agent test environments to measure them against the exact demand oracle,
and the count-preserving padding transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import demand
from .equilibrium import verify_approx
from .market import (
    AgentGroup,
    Allocation,
    GoodGroup,
    GroupedMarket,
    PriceVector,
    bundle_of,
    price_vector,
    rat,
    rat_str,
    validate_market,
)
from .threshold import Profile, ThresholdGame

DUMMY_GOOD = "Gdummy"

TRUE_LIKE = "TRUE_LIKE"
FALSE_LIKE = "FALSE_LIKE"
MIXED = "MIXED"
UNKNOWN = "UNKNOWN"

EDGE_FAMILY_LINK = "a1"      # bridges G_{u,3} and G_{v,1}
EDGE_FAMILY_STEP_V = "a2"    # step response in p(G_{v,1})
EDGE_FAMILY_STEP_U = "a3"    # step response in p(G_{u,1})
EDGE_FAMILY_CROSS = "a4"     # competes G_{v,1} against G_{u,2}
EDGE_FAMILIES = (
    EDGE_FAMILY_LINK,
    EDGE_FAMILY_STEP_V,
    EDGE_FAMILY_STEP_U,
    EDGE_FAMILY_CROSS,
)

PROBE_AGENT = "probe"


class KTooSmallError(ValueError):
    """The scale parameter cannot absorb the clause load on some variable."""


class OutOfBandError(ValueError):
    """Price outside the range the prediction formulas are valid for."""


# ---------------------------------------------------------------------------
# toy two-good market with a free filler good


def toy_utility(delta: Fraction) -> Fraction:
    """Low-good utility chosen so equilibria exist exactly for p <= delta."""
    delta = rat(delta)
    if not (0 < delta < 1):
        raise ValueError(f"delta {rat_str(delta)} outside (0, 1)")
    return 1 / (2 / delta - 1)


def build_toy_submarket(delta) -> GroupedMarket:
    """Two buyers over a cheap low-utility good and an expensive top good.

    A free filler good (held by a zero-utility agent in equilibrium) gives
    buyers an outside option: the split bundle over g1 and g2 stays optimal
    exactly while p(g1) <= delta, so the equilibrium prices are the segment
    (p, 2-p, 0) for p in [0, delta].
    """
    u1 = toy_utility(delta)
    return GroupedMarket(
        agent_groups=(
            AgentGroup("A", 2, {"g1": u1, "g2": Fraction(1)}),
            AgentGroup("Z", 1, {}),
        ),
        good_groups=(GoodGroup("g1", 1), GoodGroup("g2", 1), GoodGroup("g3", 1)),
        label=f"toy-submarket-delta-{rat_str(rat(delta))}",
    )


def toy_submarket_equilibrium(delta, p0) -> tuple[Allocation, PriceVector]:
    """The canonical equilibrium pair at prices (p0, 2-p0, 0)."""
    p0 = rat(p0)
    delta = rat(delta)
    if not (0 <= p0 <= delta):
        raise ValueError(f"p0 {rat_str(p0)} outside [0, {rat_str(delta)}]")
    prices = price_vector({"g1": p0, "g2": 2 - p0, "g3": Fraction(0)})
    alloc = Allocation(
        {
            ("A", "g1"): Fraction(1, 2),
            ("A", "g2"): Fraction(1, 2),
            ("Z", "g3"): Fraction(1),
        }
    )
    return alloc, prices


# ---------------------------------------------------------------------------
# threshold-game market construction


def _node_good(v: str, idx: int) -> str:
    return f"Gn_{v}_{idx}"


def _node_agent(v: str) -> str:
    return f"An_{v}"


def _edge_tag(e: tuple[str, str]) -> str:
    return f"{e[0]}__{e[1]}"


def _edge_good(e: tuple[str, str]) -> str:
    return f"Ge_{_edge_tag(e)}"


@dataclass(frozen=True)
class PpadInstance:
    """Threshold-game market with its construction parameters and id map."""

    game: ThresholdGame
    m: int
    market: GroupedMarket

    def node_good(self, v: str, idx: int) -> str:
        return _node_good(v, idx)

    def node_agent(self, v: str) -> str:
        return _node_agent(v)

    def edge_good(self, e: tuple[str, str]) -> str:
        return _edge_good(e)


def node_surplus(g: ThresholdGame, m: int, v: str) -> int:
    """Extra copies of the node's cheap good absorbing edge-agent demand."""
    return (
        (24 * m**3 + 12 * m) * g.out_degree(v)
        + (24 * m**3 + 15 * m) * g.in_degree(v)
        - 3 * m
    )


def build_ppad_market(g: ThresholdGame, m: int) -> PpadInstance:
    """Market whose normalized equilibrium prices encode a game profile.

    Each node gets three good groups and one agent group; each edge gets a
    bridging good and four agent families whose aggregate demand on the
    endpoint gadgets realizes the threshold response.  A dummy good group
    balances the agent and good counts exactly.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    for v in g.nodes:
        if g.in_degree(v) > 3 or g.out_degree(v) > 3:
            raise ValueError(f"node {v!r} exceeds degree bound 3")

    goods: list[GoodGroup] = []
    agents: list[AgentGroup] = []
    m3 = m**3
    m5 = m**5
    m10 = m**10

    for v in g.nodes:
        c1 = m10 + node_surplus(g, m, v)
        assert c1 > 0, f"cheap-good count for node {v!r} not positive"
        goods.append(GoodGroup(_node_good(v, 1), c1))
        goods.append(GoodGroup(_node_good(v, 2), 2 * m10))
        goods.append(GoodGroup(_node_good(v, 3), 2 * m10))
        agents.append(
            AgentGroup(
                _node_agent(v),
                5 * m10,
                {
                    _node_good(v, 1): Fraction(1, 2 * m**2 - 1),
                    _node_good(v, 2): Fraction(m**2 + 1, 4 * m**2 - 2),
                    _node_good(v, 3): Fraction(1),
                },
            )
        )

    for e in g.edges:
        u, v = e
        tag = _edge_tag(e)
        goods.append(GoodGroup(_edge_good(e), 32 * m5))
        agents.append(AgentGroup(f"Ae_{tag}_star", 64 * m5, {_edge_good(e): Fraction(1)}))
        agents.append(
            AgentGroup(
                f"Ae_{tag}_1",
                48 * m3,
                {_node_good(u, 3): Fraction(1), _node_good(v, 1): Fraction(1, 2)},
            )
        )
        for ell in range(1, m + 1):
            agents.append(
                AgentGroup(
                    f"Ae_{tag}_2_{ell}",
                    6,
                    {_edge_good(e): Fraction(1), _node_good(v, 1): Fraction(ell, 2 * m3)},
                )
            )
        for ell in range(1, m + 1):
            agents.append(
                AgentGroup(
                    f"Ae_{tag}_3_{ell}",
                    8,
                    {_edge_good(e): Fraction(1), _node_good(u, 1): Fraction(ell, 2 * m3)},
                )
            )
        cross_u = Fraction(1, 4) + Fraction(1, 4 * m**2) + Fraction(1, m3)
        for ell in range(1, 2 * m + 1):
            agents.append(
                AgentGroup(
                    f"Ae_{tag}_4_{ell}",
                    18,
                    {
                        _edge_good(e): Fraction(1),
                        _node_good(v, 1): Fraction(ell, 2 * m3),
                        _node_good(u, 2): cross_u,
                    },
                )
            )

    n_dummy = 3 * m * len(g.nodes) + (32 * m5 + 23 * m) * len(g.edges)
    goods.append(GoodGroup(DUMMY_GOOD, n_dummy))

    market = GroupedMarket(
        tuple(agents),
        tuple(goods),
        label=f"threshold-market-m{m}",
        max_utility_one=True,
    )
    expected_agents = 5 * m10 * len(g.nodes) + (64 * m5 + 48 * m3 + 50 * m) * len(g.edges)
    assert market.n_agents == expected_agents, "agent-count formula violated"
    assert market.n_agents == market.n_goods, "agent/good balance violated"
    assert not validate_market(market)
    return PpadInstance(g, m, market)


def extract_threshold_profile(inst: PpadInstance, p: PriceVector) -> Profile:
    """Read the game profile off the prices: x_v = min(1, m^2 * p(G_{v,1}))."""
    values = {}
    for v in inst.game.nodes:
        values[v] = min(Fraction(1), inst.m**2 * p.of(inst.node_good(v, 1)))
    return Profile(values)


# ---------------------------------------------------------------------------
# edge-gadget predictions and measurement environments


def _check_band(p_u, p_v, m: int) -> tuple[Fraction, Fraction]:
    p_u, p_v = rat(p_u), rat(p_v)
    hi = Fraction(1, m**2) + Fraction(1, m**6)
    for name, p in (("p_u", p_u), ("p_v", p_v)):
        if not (0 <= p <= hi):
            raise OutOfBandError(
                f"{name}={rat_str(p)} outside [0, {rat_str(hi)}] for m={m}"
            )
    return p_u, p_v


def predict_variable_prices(p1, m: int) -> tuple[Fraction, Fraction]:
    """Central predictions for the two remaining node-gadget prices."""
    p1 = rat(p1)
    return (1 + p1) / 2, 2 - p1


@dataclass(frozen=True)
class GadgetPrediction:
    """Central (error-band-free) values of the edge-family allocations."""

    p_u: Fraction
    p_v: Fraction
    m: int
    a1_share_v: Fraction        # per-agent share of G_{v,1} in family a1
    a1_share_u3: Fraction       # per-agent share of G_{u,3} in family a1
    a2_plateau_share: Fraction  # per-agent G_{v,1} share above the step
    a2_total_v: Fraction        # family-a2 total mass on G_{v,1}
    a3_plateau_share: Fraction  # per-agent G_{u,1} share above the step
    a3_total_u: Fraction        # family-a3 total mass on G_{u,1}
    a4_share_v: Fraction        # per-agent G_{v,1} share above the step
    a4_share_u2: Fraction       # per-agent G_{u,2} share below the step
    a4_total_v: Fraction        # family-a4 total mass on G_{v,1}
    total_v: Fraction           # all-family mass on G_{v,1}
    total_u: Fraction           # all-family mass on u's gadget goods


def predict_edge_gadget(p_u, p_v, m: int) -> GadgetPrediction:
    p_u, p_v = _check_band(p_u, p_v, m)
    m2, m3 = m**2, m**3
    a1_share_v = (2 + p_v - p_u) / 4
    a2_total_v = 3 * m * (1 - m2 * p_v)
    a3_total_u = 4 * m * (1 - m2 * p_u)
    a4_total_v = 18 * m * (Fraction(2, 3) + Fraction(m2, 3) * p_u - Fraction(m2, 2) * p_v)
    return GadgetPrediction(
        p_u=p_u,
        p_v=p_v,
        m=m,
        a1_share_v=a1_share_v,
        a1_share_u3=1 - a1_share_v,
        a2_plateau_share=1 / (2 - p_v),
        a2_total_v=a2_total_v,
        a3_plateau_share=1 / (2 - p_u),
        a3_total_u=a3_total_u,
        a4_share_v=1 / (2 - p_v),
        a4_share_u2=2 / (3 - p_u),
        a4_total_v=a4_total_v,
        total_v=24 * m3 + 15 * m - 6 * m3 * p_u,
        total_u=Fraction(24 * m3 + 12 * m),
    )


def build_edge_environment(
    p_u, p_v, m: int, family: str, ell: Optional[int] = None
) -> tuple[GroupedMarket, PriceVector]:
    """Single-agent slice with the surrounding prices pinned at their centers.

    Fixes p(G_e) = 2, p(G_{u,3}) = 2 - p_u, p(G_{u,2}) = (1 + p_u)/2 and a
    free dummy, so the probe agent's exact demand is directly comparable to
    predict_edge_gadget.
    """
    p_u, p_v = _check_band(p_u, p_v, m)
    m3 = m**3
    if family == EDGE_FAMILY_LINK:
        utilities = {"G_u3": Fraction(1), "G_v1": Fraction(1, 2)}
        prices = {"G_u3": 2 - p_u, "G_v1": p_v, "dummy": Fraction(0)}
    elif family == EDGE_FAMILY_STEP_V:
        if not (ell and 1 <= ell <= m):
            raise ValueError(f"family {family!r} needs ell in [1, {m}]")
        utilities = {"G_e": Fraction(1), "G_v1": Fraction(ell, 2 * m3)}
        prices = {"G_e": Fraction(2), "G_v1": p_v, "dummy": Fraction(0)}
    elif family == EDGE_FAMILY_STEP_U:
        if not (ell and 1 <= ell <= m):
            raise ValueError(f"family {family!r} needs ell in [1, {m}]")
        utilities = {"G_e": Fraction(1), "G_u1": Fraction(ell, 2 * m3)}
        prices = {"G_e": Fraction(2), "G_u1": p_u, "dummy": Fraction(0)}
    elif family == EDGE_FAMILY_CROSS:
        if not (ell and 1 <= ell <= 2 * m):
            raise ValueError(f"family {family!r} needs ell in [1, {2 * m}]")
        utilities = {
            "G_e": Fraction(1),
            "G_v1": Fraction(ell, 2 * m3),
            "G_u2": Fraction(1, 4) + Fraction(1, 4 * m**2) + Fraction(1, m3),
        }
        prices = {
            "G_e": Fraction(2),
            "G_v1": p_v,
            "G_u2": (1 + p_u) / 2,
            "dummy": Fraction(0),
        }
    else:
        raise ValueError(f"unknown edge family {family!r}")
    goods = tuple(GoodGroup(gid, 1) for gid in sorted(prices))
    market = GroupedMarket(
        (AgentGroup(PROBE_AGENT, 1, utilities),), goods, label=f"edge-env-{family}"
    )
    return market, price_vector(prices)


def edge_family_share(p_u, p_v, m: int, family: str, good: str, ell=None) -> Fraction:
    """Exact per-agent demand share of one good in an edge environment."""
    env, prices = build_edge_environment(p_u, p_v, m, family, ell)
    bundle = demand.optimal_bundle(env, PROBE_AGENT, prices)
    return Fraction(bundle.shares.get(good, 0))


@dataclass(frozen=True)
class EdgeGadgetTotals:
    """Aggregate edge-family demand measured with the exact oracle."""

    a2_total_v: Fraction
    a3_total_u: Fraction
    a4_total_v: Fraction
    a4_total_u2: Fraction
    total_v: Fraction
    total_u: Fraction


def measure_edge_gadget(p_u, p_v, m: int) -> EdgeGadgetTotals:
    a1_v = edge_family_share(p_u, p_v, m, EDGE_FAMILY_LINK, "G_v1")
    a1_u3 = edge_family_share(p_u, p_v, m, EDGE_FAMILY_LINK, "G_u3")
    a2 = sum(
        6 * edge_family_share(p_u, p_v, m, EDGE_FAMILY_STEP_V, "G_v1", ell)
        for ell in range(1, m + 1)
    )
    a3 = sum(
        8 * edge_family_share(p_u, p_v, m, EDGE_FAMILY_STEP_U, "G_u1", ell)
        for ell in range(1, m + 1)
    )
    a4_v = Fraction(0)
    a4_u2 = Fraction(0)
    for ell in range(1, 2 * m + 1):
        env, prices = build_edge_environment(p_u, p_v, m, EDGE_FAMILY_CROSS, ell)
        bundle = demand.optimal_bundle(env, PROBE_AGENT, prices)
        a4_v += 18 * Fraction(bundle.shares.get("G_v1", 0))
        a4_u2 += 18 * Fraction(bundle.shares.get("G_u2", 0))
    m3 = m**3
    return EdgeGadgetTotals(
        a2_total_v=Fraction(a2),
        a3_total_u=Fraction(a3),
        a4_total_v=a4_v,
        a4_total_u2=a4_u2,
        total_v=48 * m3 * a1_v + a2 + a4_v,
        total_u=48 * m3 * a1_u3 + a3 + a4_u2,
    )


# ---------------------------------------------------------------------------
# 3SAT market construction


def _var_good(i: int, idx: int) -> str:
    return f"Gv{i}_{idx}"


def _clause_good(j: int) -> str:
    return f"Gc{j}"


@dataclass(frozen=True)
class SatInstance:
    """3SAT market with its construction parameters and id map."""

    clauses: tuple[tuple[int, int, int], ...]
    n_vars: int
    K: int
    market: GroupedMarket

    def variable_good(self, i: int, idx: int) -> str:
        return _var_good(i, idx)

    def clause_good(self, j: int) -> str:
        return _clause_good(j)

    def clause_agent(self, j: int) -> str:
        return f"Ac{j}"


def s_load_cap(K: int) -> int:
    """Most clauses one variable gadget can absorb: K/4 >= s(K+1)/(2K+1)."""
    return (K * (2 * K + 1)) // (4 * (K + 1))


def build_sat_market(clauses: Sequence[Sequence[int]], K: int) -> SatInstance:
    """Market whose exact equilibria encode satisfying assignments.

    Each variable gets a three-good gadget (K, 2K, K copies) priced at one
    of two mirror patterns in equilibrium; each clause gets a scarce good
    that only its single designated clause agent can pair with a satisfied
    literal's free good.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    norm: list[tuple[int, int, int]] = []
    n_vars = 0
    for c in clauses:
        lits = tuple(int(l) for l in c)
        if len(lits) != 3 or any(l == 0 for l in lits):
            raise ValueError(f"clause {lits} must have exactly 3 nonzero literals")
        if len({abs(l) for l in lits}) != 3:
            raise ValueError(f"clause {lits} repeats a variable")
        n_vars = max(n_vars, max(abs(l) for l in lits))
        norm.append(lits)
    if not norm:
        raise ValueError("formula has no clauses")
    n_clauses = len(norm)

    goods: list[GoodGroup] = []
    agents: list[AgentGroup] = []
    K2 = K * K
    for i in range(1, n_vars + 1):
        goods.append(GoodGroup(_var_good(i, 1), K))
        goods.append(GoodGroup(_var_good(i, 2), 2 * K))
        goods.append(GoodGroup(_var_good(i, 3), K))
        agents.append(
            AgentGroup(
                f"Av{i}_1",
                2 * K,
                {_var_good(i, 1): Fraction(1, 2 * K2), _var_good(i, 2): Fraction(1, K2)},
            )
        )
        agents.append(
            AgentGroup(
                f"Av{i}_2",
                2 * K,
                {_var_good(i, 3): Fraction(1, 2 * K2), _var_good(i, 2): Fraction(1, K2)},
            )
        )
    for j, lits in enumerate(norm, start=1):
        goods.append(GoodGroup(_clause_good(j), K))
        agents.append(
            AgentGroup(f"Ac{j}_star", 2 * K, {_clause_good(j): Fraction(1, K2)})
        )
        utilities = {_clause_good(j): Fraction(1)}
        for l in lits:
            i = abs(l)
            utilities[_var_good(i, 1 if l > 0 else 3)] = Fraction(5, 6)
        agents.append(AgentGroup(f"Ac{j}", 1, utilities))
    goods.append(GoodGroup(DUMMY_GOOD, (K + 1) * n_clauses))

    market = GroupedMarket(
        tuple(agents), tuple(goods), label=f"sat-market-K{K}"
    )
    assert market.n_agents == 4 * K * n_vars + (2 * K + 1) * n_clauses
    assert market.n_agents == market.n_goods
    assert not validate_market(market)
    return SatInstance(tuple(norm), n_vars, K, market)


def _assign_clauses(
    inst: SatInstance, assignment: Sequence[bool]
) -> tuple[dict[int, int], dict[int, int]]:
    """Map each clause to one satisfying variable, balancing gadget load.

    Returns (clause -> variable, variable -> load).  Raises if some clause
    is unsatisfied or a gadget's load exceeds what K can absorb.
    """
    cap = s_load_cap(inst.K)
    load: dict[int, int] = {}
    phi: dict[int, int] = {}
    for j, lits in enumerate(inst.clauses, start=1):
        sat_vars = sorted(
            abs(l) for l in lits if (l > 0) == bool(assignment[abs(l) - 1])
        )
        if not sat_vars:
            raise ValueError(f"clause {j} is not satisfied by the assignment")
        pick = min(sat_vars, key=lambda i: (load.get(i, 0), i))
        phi[j] = pick
        load[pick] = load.get(pick, 0) + 1
    for i, s in load.items():
        if s > cap:
            raise KTooSmallError(
                f"variable {i} absorbs {s} clauses but K={inst.K} allows {cap}; "
                "increase K"
            )
    return phi, load


def completeness_equilibrium(
    inst: SatInstance, assignment: Sequence[bool]
) -> tuple[Allocation, PriceVector]:
    """The exact equilibrium encoding a satisfying assignment.

    Satisfied-literal goods are free; clause agents pair the scarce clause
    good with them; gadget agents split the middle good; the leftover cheap
    goods and dummies absorb all remaining mass at price zero.
    """
    if len(assignment) < inst.n_vars:
        raise ValueError("assignment shorter than the variable count")
    phi, load = _assign_clauses(inst, assignment)
    K = inst.K
    prices: dict[str, Fraction] = {DUMMY_GOOD: Fraction(0)}
    entries: dict[tuple[str, str], Fraction] = {}

    for i in range(1, inst.n_vars + 1):
        s_i = load.get(i, 0)
        if assignment[i - 1]:
            free_idx, dear_idx = 1, 3       # satisfied literal good is G_{i,1}
            free_agent, dear_agent = f"Av{i}_1", f"Av{i}_2"
        else:
            free_idx, dear_idx = 3, 1
            free_agent, dear_agent = f"Av{i}_2", f"Av{i}_1"
        prices[_var_good(i, free_idx)] = Fraction(0)
        prices[_var_good(i, 2)] = Fraction(8, 5)
        prices[_var_good(i, dear_idx)] = Fraction(4, 5)
        # agents valuing the free good ride it with the middle good
        entries[(free_agent, _var_good(i, free_idx))] = Fraction(3, 8)
        entries[(free_agent, _var_good(i, 2))] = Fraction(5, 8)
        # the mirror agents split middle and dear goods, then soak up the
        # free good's remaining supply (worthless to them, but also free)
        entries[(dear_agent, _var_good(i, 2))] = Fraction(3, 8)
        entries[(dear_agent, _var_good(i, dear_idx))] = Fraction(1, 2)
        residual = Fraction(K, 4) - Fraction(s_i * (K + 1), 2 * K + 1)
        assert residual >= 0
        if residual:
            entries[(dear_agent, _var_good(i, free_idx))] = residual / (2 * K)
        filler = Fraction(1, 8) - residual / (2 * K)
        if filler:
            entries[(dear_agent, DUMMY_GOOD)] = filler

    for j, lits in enumerate(inst.clauses, start=1):
        prices[_clause_good(j)] = Fraction(2 * K + 1, K)
        entries[(f"Ac{j}_star", _clause_good(j))] = Fraction(K, 2 * K + 1)
        entries[(f"Ac{j}_star", DUMMY_GOOD)] = Fraction(K + 1, 2 * K + 1)
        i = phi[j]
        lit_idx = 1 if assignment[i - 1] else 3
        entries[(f"Ac{j}", _clause_good(j))] = Fraction(K, 2 * K + 1)
        entries[(f"Ac{j}", _var_good(i, lit_idx))] = Fraction(K + 1, 2 * K + 1)

    return Allocation(entries), PriceVector(prices, True)


TRUE_CENTER = (Fraction(0), Fraction(8, 5), Fraction(4, 5))
FALSE_CENTER = (Fraction(4, 5), Fraction(8, 5), Fraction(0))
MIXED_CENTER = (Fraction(2, 3), Fraction(4, 3), Fraction(2, 3))


def classify_variable_gadget(p1, p2, p3, tol) -> str:
    """Match gadget prices (G_{i,1}, G_{i,2}, G_{i,3}) to the known centers."""
    p = (rat(p1), rat(p2), rat(p3))
    tol = rat(tol)
    for center, name in (
        (TRUE_CENTER, TRUE_LIKE),
        (FALSE_CENTER, FALSE_LIKE),
        (MIXED_CENTER, MIXED),
    ):
        if max(abs(a - b) for a, b in zip(p, center)) <= tol:
            return name
    return UNKNOWN


@dataclass(frozen=True)
class ClauseReport:
    clause: int
    value: Fraction
    near_satisfied_center: bool    # within tol of 11/12
    near_unsatisfied_center: bool  # within tol of 7/8


@dataclass(frozen=True)
class ExtractionReport:
    assignment: dict[int, Optional[bool]]
    clauses: tuple[ClauseReport, ...]

    def full_assignment(self) -> tuple[bool, ...]:
        out = []
        for i in sorted(self.assignment):
            v = self.assignment[i]
            if v is None:
                raise ValueError(f"variable {i} not classified")
            out.append(v)
        return tuple(out)


def extract_assignment(
    inst: SatInstance, x: Allocation, p: PriceVector, tol
) -> ExtractionReport:
    """Read an assignment off equilibrium prices and audit clause values."""
    tol = rat(tol)
    assignment: dict[int, Optional[bool]] = {}
    for i in range(1, inst.n_vars + 1):
        case = classify_variable_gadget(
            p.of(_var_good(i, 1)), p.of(_var_good(i, 2)), p.of(_var_good(i, 3)), tol
        )
        assignment[i] = {TRUE_LIKE: True, FALSE_LIKE: False}.get(case)
    reports = []
    for j in range(1, len(inst.clauses) + 1):
        value = bundle_of(inst.market, f"Ac{j}", x).value
        reports.append(
            ClauseReport(
                clause=j,
                value=value,
                near_satisfied_center=abs(value - Fraction(11, 12)) <= tol,
                near_unsatisfied_center=abs(value - Fraction(7, 8)) <= tol,
            )
        )
    return ExtractionReport(assignment, tuple(reports))


# ---------------------------------------------------------------------------
# padding


def pad_market(m: GroupedMarket, N: int) -> GroupedMarket:
    """Replicate every agent and good N times (counts scale, utilities don't)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    agents = tuple(
        AgentGroup(a.id, a.count * N, dict(a.utilities)) for a in m.agent_groups
    )
    goods = tuple(GoodGroup(g.id, g.count * N) for g in m.good_groups)
    return GroupedMarket(agents, goods, label=m.label, max_utility_one=m.max_utility_one)


def unpad_equilibrium(
    m: GroupedMarket, N: int, x_star: Allocation, p_star: PriceVector, epsilon=0
) -> tuple[Allocation, PriceVector]:
    """Pull a padded equilibrium back to the base market.

    In group-compressed form all N replicas of a group share one price and
    one per-member allocation, so the min-price / averaged-allocation pull
    back is the identity on the group-level data; the input is verified on
    the padded market and the output on the base market.
    """
    padded = pad_market(m, N)
    epsilon = rat(epsilon)
    verdict = verify_approx(padded, x_star, p_star, epsilon)
    if not verdict.passed:
        raise ValueError(
            "input pair is not an approximate equilibrium of the padded market: "
            + "; ".join(f"{v.condition}:{v.subject}" for v in verdict.violations)
        )
    assert verify_approx(m, x_star, p_star, epsilon).passed
    return x_star, p_star
