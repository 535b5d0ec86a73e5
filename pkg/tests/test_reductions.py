import random
from fractions import Fraction as F

import pytest

from hzlab import (
    build_edge_environment,
    build_ppad_market,
    build_sat_market,
    build_toy_submarket,
    bundle_feasibility,
    classify_variable_gadget,
    completeness_equilibrium,
    extract_assignment,
    extract_threshold_profile,
    pad_market,
    predict_edge_gadget,
    predict_variable_prices,
    price_vector,
    threshold_game,
    unpad_equilibrium,
    validate_market,
    verify_exact,
)
from hzlab.demand import optimal_bundle
from hzlab.market import bundle_of, social_welfare
from hzlab.reductions import (
    EDGE_FAMILY_CROSS,
    EDGE_FAMILY_LINK,
    EDGE_FAMILY_STEP_V,
    FALSE_LIKE,
    KTooSmallError,
    MIXED,
    OutOfBandError,
    PROBE_AGENT,
    TRUE_LIKE,
    UNKNOWN,
    edge_family_share,
    s_load_cap,
    toy_submarket_equilibrium,
    toy_utility,
)

from conftest import four_agent_equilibria

KAPPA = F(1, 10)


# ---------------------------------------------------------------------------
# toy submarket


def test_toy_utility_value():
    assert toy_utility(F(1, 2)) == F(1, 3)
    assert toy_utility(F(1, 100)) == F(1, 199)


def test_toy_submarket_equilibrium_family():
    delta = F(1, 100)
    toy = build_toy_submarket(delta)
    assert validate_market(toy) == []
    for p0 in (F(0), F(1, 200), F(1, 100)):
        x, p = toy_submarket_equilibrium(delta, p0)
        assert verify_exact(toy, x, p).passed


def test_toy_submarket_infeasible_beyond_delta():
    toy = build_toy_submarket(F(1, 100))
    p = price_vector({"g1": F(1, 50), "g2": F(99, 50), "g3": 0})
    assert bundle_feasibility(toy, p, 0) is None


def test_toy_delta_range_enforced():
    with pytest.raises(ValueError):
        build_toy_submarket(0)
    with pytest.raises(ValueError):
        build_toy_submarket(1)


# ---------------------------------------------------------------------------
# threshold-game market


def _all_digraphs(nodes):
    arcs = [(u, v) for u in nodes for v in nodes if u != v]
    for mask in range(1 << len(arcs)):
        yield [arcs[i] for i in range(len(arcs)) if mask >> i & 1]


def test_single_node_counts_m2():
    g = threshold_game(["v"], [], KAPPA)
    inst = build_ppad_market(g, 2)
    assert inst.market.n_agents == 5120
    assert inst.market.n_goods == 5120


def test_single_edge_counts_m2():
    g = threshold_game(["u", "v"], [("u", "v")], KAPPA)
    inst = build_ppad_market(g, 2)
    assert inst.market.n_agents == 12772


def test_counts_match_closed_form_on_small_digraphs():
    nodes = ["a", "b", "c"]
    rng = random.Random(3)
    graphs = [e for e in _all_digraphs(nodes)]
    for edges in rng.sample(graphs, 12):
        try:
            g = threshold_game(nodes, edges, KAPPA, degree_bounded=True)
        except ValueError:
            continue
        for m in (2, 3):
            inst = build_ppad_market(g, m)
            expected = 5 * m**10 * len(nodes) + (
                64 * m**5 + 48 * m**3 + 50 * m
            ) * len(edges)
            assert inst.market.n_agents == expected
            assert inst.market.n_agents == inst.market.n_goods
            assert validate_market(inst.market) == []


def test_build_rejects_small_m_and_big_degree():
    g = threshold_game(["v"], [], KAPPA)
    with pytest.raises(ValueError):
        build_ppad_market(g, 1)
    star = threshold_game(
        ["c", "1", "2", "3", "4"], [(str(i), "c") for i in range(1, 5)], KAPPA
    )
    with pytest.raises(ValueError):
        build_ppad_market(star, 2)


def test_extract_threshold_profile_formula():
    g = threshold_game(["u", "v"], [("u", "v")], KAPPA)
    inst = build_ppad_market(g, 2)
    base = {gid: F(0) for gid in inst.market.good_ids}
    cases = [(F(0), F(0)), (F(1, 4), F(1)), (F(1, 2), F(1)), (F(1, 8), F(1, 2))]
    for p1, expected in cases:
        prices = dict(base)
        prices[inst.node_good("u", 1)] = p1
        assert extract_threshold_profile(inst, price_vector(prices)).of("u") == expected


def test_extract_threshold_profile_random_prices():
    g = threshold_game(["u", "v", "w"], [("u", "v")], KAPPA)
    m = 3
    inst = build_ppad_market(g, m)
    rng = random.Random(5)
    base = {gid: F(0) for gid in inst.market.good_ids}
    for _ in range(100):
        prices = dict(base)
        vals = {}
        for node in g.nodes:
            p1 = F(rng.randint(0, 50), 50 * m**2 // 2)
            prices[inst.node_good(node, 1)] = p1
            vals[node] = min(F(1), m**2 * p1)
        prof = extract_threshold_profile(inst, price_vector(prices))
        for node in g.nodes:
            assert prof.of(node) == vals[node]


# ---------------------------------------------------------------------------
# gadget predictions


def test_variable_price_predictions():
    assert predict_variable_prices(0, 4) == (F(1, 2), 2)
    m = 4
    p1 = F(1, m**2)
    assert predict_variable_prices(p1, m) == ((1 + p1) / 2, 2 - p1)


def test_prediction_band_guard():
    with pytest.raises(OutOfBandError):
        predict_edge_gadget(F(1, 2), 0, 4)


def test_link_family_at_zero_prices():
    for m in (4, 8):
        pred = predict_edge_gadget(0, 0, m)
        assert pred.a1_share_v == F(1, 2)
        assert pred.total_u == 24 * m**3 + 12 * m
        assert pred.total_v == 24 * m**3 + 15 * m
        assert edge_family_share(0, 0, m, EDGE_FAMILY_LINK, "G_v1") == F(1, 2)


def test_link_family_symmetric_prices():
    m = 8
    p = F(1, 2 * m**2)
    assert edge_family_share(p, p, m, EDGE_FAMILY_LINK, "G_v1") == F(1, 2)


def test_total_v_slope_in_p_u():
    m = 8
    pred0 = predict_edge_gadget(0, 0, m)
    pred1 = predict_edge_gadget(F(1, m**2), 0, m)
    assert pred0.total_v - pred1.total_v == 6 * m


def test_step_family_plateau_and_floor():
    m = 8
    p_v = F(1, 2 * m**2)  # step threshold at ell = m^3 * p_v = m/2
    for ell in range(1, m + 1):
        share = edge_family_share(0, p_v, m, EDGE_FAMILY_STEP_V, "G_v1", ell)
        if F(ell, m**3) > p_v:
            assert share == 1 / (2 - p_v)
        elif F(ell, m**3) < p_v:
            assert share == 0
    # exactly one transition in ell
    shares = [
        edge_family_share(0, p_v, m, EDGE_FAMILY_STEP_V, "G_v1", ell)
        for ell in range(1, m + 1)
    ]
    jumps = sum(1 for a, b in zip(shares, shares[1:]) if a != b)
    assert jumps <= 2


def test_cross_family_single_transition():
    m = 8
    p_u, p_v = F(1, 2 * m**2), F(3, 4 * m**2)
    shares = [
        edge_family_share(p_u, p_v, m, EDGE_FAMILY_CROSS, "G_v1", ell)
        for ell in range(1, 2 * m + 1)
    ]
    # below the switch the agent buys G_{u,2} instead of G_{v,1}
    jumps = sum(1 for a, b in zip(shares, shares[1:]) if (a == 0) != (b == 0))
    assert jumps <= 1
    env, prices = build_edge_environment(p_u, p_v, m, EDGE_FAMILY_CROSS, 2 * m)
    top = optimal_bundle(env, PROBE_AGENT, prices)
    assert top.shares.get("G_v1", 0) == 1 / (2 - p_v)


# ---------------------------------------------------------------------------
# 3SAT market


def test_sat_counts_small():
    inst = build_sat_market([(1, 2, 3)], 1)
    assert inst.market.n_goods == 15
    assert inst.market.n_agents == 15


def test_sat_counts_k27():
    inst = build_sat_market([(1, 2, 3)], 27)
    assert inst.market.n_agents == 4 * 27 * 3 + (2 * 27 + 1) * 1 == 379
    assert inst.market.n_goods == 379


def test_sat_clause_utilities_follow_literal_signs():
    inst = build_sat_market([(1, -2, 3)], 8)
    a = inst.market.agent("Ac1")
    assert a.utilities[inst.variable_good(1, 1)] == F(5, 6)
    assert a.utilities[inst.variable_good(2, 3)] == F(5, 6)
    assert a.utilities[inst.variable_good(3, 1)] == F(5, 6)
    assert a.utilities[inst.clause_good(1)] == 1


def test_sat_rejects_malformed_clauses():
    with pytest.raises(ValueError):
        build_sat_market([(1, 1, 2)], 8)
    with pytest.raises(ValueError):
        build_sat_market([(1, -1, 2)], 8)
    with pytest.raises(ValueError):
        build_sat_market([(1, 2)], 8)
    with pytest.raises(ValueError):
        build_sat_market([], 8)


def test_completeness_equilibrium_verifies_exactly():
    inst = build_sat_market([(1, -2, 3), (-1, 2, 4), (2, 3, -4)], 8)
    sigma = (True, False, True, True)
    x, p = completeness_equilibrium(inst, sigma)
    verdict = verify_exact(inst.market, x, p)
    assert verdict.passed, verdict.violations
    K = 8
    for j in (1, 2, 3):
        assert bundle_of(inst.market, f"Ac{j}", x).value == F(11 * K + 5, 12 * K + 6)
    assert social_welfare(inst.market, x) >= 3 * F(11 * K + 5, 12 * K + 6)


def test_completeness_rejects_unsatisfying_assignment():
    inst = build_sat_market([(1, 2, 3)], 8)
    with pytest.raises(ValueError):
        completeness_equilibrium(inst, (False, False, False))


def test_k_too_small_raises():
    # five clauses whose only satisfied literal is x1, at K=1 (cap 0)
    clauses = [(1, 2, 3), (1, 2, 4), (1, 3, 4), (1, 2, 5), (1, 3, 5)]
    inst = build_sat_market(clauses, 1)
    sigma = (True, False, False, False, False)
    with pytest.raises(KTooSmallError):
        completeness_equilibrium(inst, sigma)
    assert s_load_cap(1) == 0
    assert s_load_cap(8) == 3
    assert s_load_cap(27) == 13


def test_classify_centers():
    assert classify_variable_gadget(0, "8/5", "4/5", F(1, 100)) == TRUE_LIKE
    assert classify_variable_gadget("4/5", "8/5", 0, F(1, 100)) == FALSE_LIKE
    assert classify_variable_gadget("2/3", "4/3", "2/3", F(1, 100)) == MIXED
    assert classify_variable_gadget("1/2", 1, "1/2", F(1, 100)) == UNKNOWN


def test_classify_tolerance_band():
    assert classify_variable_gadget(F(1, 200), "8/5", "4/5", F(1, 100)) == TRUE_LIKE
    assert classify_variable_gadget(F(1, 50), "8/5", "4/5", F(1, 100)) == UNKNOWN


def test_extract_assignment_round_trip():
    inst = build_sat_market([(1, -2, 3), (-1, 2, 4), (2, 3, -4)], 27)
    sigma = (False, False, True, False)
    x, p = completeness_equilibrium(inst, sigma)
    report = extract_assignment(inst, x, p, F(1, 100))
    assert report.full_assignment() == sigma
    K = 27
    for c in report.clauses:
        assert c.value == F(11 * K + 5, 12 * K + 6)
        assert c.near_satisfied_center
        assert not c.near_unsatisfied_center
        assert abs(c.value - F(11, 12)) == F(1, 24 * K + 12)


# ---------------------------------------------------------------------------
# padding


def test_pad_scales_counts(four_agent_market):
    padded = pad_market(four_agent_market, 3)
    assert padded.n_agents == 12
    assert {g.id: g.count for g in padded.good_groups} == {"G1": 3, "G2": 6, "G3": 3}
    assert pad_market(four_agent_market, 1).n_agents == four_agent_market.n_agents


def test_pad_rejects_bad_n(four_agent_market):
    with pytest.raises(ValueError):
        pad_market(four_agent_market, 0)


def test_unpad_round_trip(four_agent_market):
    for N in (1, 2, 3):
        for p, x in four_agent_equilibria():
            x_back, p_back = unpad_equilibrium(four_agent_market, N, x, p)
            assert verify_exact(four_agent_market, x_back, p_back).passed


def test_unpad_rejects_non_equilibrium(four_agent_market):
    p = price_vector({"G1": 0, "G2": 1, "G3": 0})
    _, x = four_agent_equilibria()[0]
    with pytest.raises(ValueError):
        unpad_equilibrium(four_agent_market, 2, x, p)
