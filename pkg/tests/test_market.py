from fractions import Fraction as F

import pytest

from hzlab import (
    allocation,
    make_market,
    normalize_prices,
    pareto_dominates,
    price_vector,
    rat,
    rat_str,
    social_welfare,
    validate_market,
)
from hzlab.market import (
    INFINITE_SCALE,
    InvalidPriceError,
    bundle_of,
    compact_units,
    expand_units,
)


def test_rat_parses_fraction_strings():
    assert rat("3/4") == F(3, 4)
    assert rat(2) == F(2)
    assert rat("0") == 0


def test_rat_rejects_decimals():
    with pytest.raises(ValueError):
        rat("0.5")
    with pytest.raises(ValueError):
        rat("1e-3")


def test_rat_str_round_trip():
    for v in (F(0), F(1), F(-3, 7), F(22, 7)):
        assert rat(rat_str(v)) == v


def test_validate_passes_on_balanced_market(four_agent_market):
    assert validate_market(four_agent_market) == []


def test_validate_flags_count_mismatch():
    m = make_market([("A", 3, {"G": 1})], [("G", 2)])
    violations = validate_market(m)
    assert any(v.invariant == "count_identity" for v in violations)


def test_validate_flags_utility_range():
    m = make_market([("A", 2, {"G": F(3, 2)})], [("G", 2)])
    violations = validate_market(m)
    assert any(v.invariant == "utility_range" for v in violations)


def test_validate_flags_unknown_good_reference():
    m = make_market([("A", 1, {"nope": 1})], [("G", 1)])
    assert any(v.invariant == "utility_key" for v in validate_market(m))


def test_validate_max_utility_one_flag():
    m = make_market([("A", 1, {"G": "1/2"})], [("G", 1)], max_utility_one=True)
    assert any(v.invariant == "max_utility_one" for v in validate_market(m))


def test_normalize_prices_scales_distance_from_one():
    p, r = normalize_prices(price_vector({"a": "1/2", "b": "3/2"}))
    assert r == 2
    assert p.of("a") == 0 and p.of("b") == 2
    assert p.normalized


def test_normalize_all_ones_degenerates_to_zero():
    p, r = normalize_prices(price_vector({"a": 1, "b": 1}))
    assert r == INFINITE_SCALE
    assert p.of("a") == 0 and p.of("b") == 0


def test_normalize_is_idempotent():
    p0 = price_vector({"a": 0, "b": "8/5", "c": "4/5"})
    p1, r = normalize_prices(p0)
    assert r == 1
    assert p1.prices == p0.prices
    p2, _ = normalize_prices(p1)
    assert p2.prices == p1.prices


def test_negative_price_rejected():
    with pytest.raises(InvalidPriceError):
        price_vector({"a": F(-1, 2)})


def test_social_welfare_uniform_thirds(intro_market):
    x = allocation(
        {(a, g): F(1, 3) for a in ("B1", "B2", "B3") for g in ("H1", "H2", "H3")}
    )
    assert social_welfare(intro_market, x) == F(4, 3)


def test_social_welfare_split(intro_market):
    x = allocation(
        {("B1", "H1"): "1/2", ("B1", "H3"): "1/2",
         ("B2", "H1"): "1/2", ("B2", "H3"): "1/2",
         ("B3", "H2"): 1}
    )
    assert social_welfare(intro_market, x) == F(9, 5)


def test_social_welfare_zero_on_worthless_goods(intro_market):
    x = allocation({(a, "H3"): 1 for a in ("B1", "B2", "B3")})
    assert social_welfare(intro_market, x) == 0


def test_social_welfare_is_linear(intro_market):
    xa = allocation({(a, "H1"): 1 for a in ("B1", "B2", "B3")})
    xb = allocation({(a, "H2"): 1 for a in ("B1", "B2", "B3")})
    mid = allocation(
        {(a, g): F(1, 2) for a in ("B1", "B2", "B3") for g in ("H1", "H2")}
    )
    assert social_welfare(intro_market, mid) == (
        social_welfare(intro_market, xa) + social_welfare(intro_market, xb)
    ) / 2


def test_pareto_dominance(intro_market):
    uniform = allocation(
        {(a, g): F(1, 3) for a in ("B1", "B2", "B3") for g in ("H1", "H2", "H3")}
    )
    split = allocation(
        {("B1", "H1"): "1/2", ("B1", "H3"): "1/2",
         ("B2", "H1"): "1/2", ("B2", "H3"): "1/2",
         ("B3", "H2"): 1}
    )
    assert pareto_dominates(intro_market, split, uniform)
    assert not pareto_dominates(intro_market, uniform, split)
    assert not pareto_dominates(intro_market, uniform, uniform)


def test_expand_compact_round_trip(four_agent_market):
    back = compact_units(expand_units(four_agent_market))
    assert {g.id: g.count for g in back.good_groups} == {
        g.id: g.count for g in four_agent_market.good_groups
    }
    for a in four_agent_market.agent_groups:
        b = back.agent(a.id)
        assert b.count == a.count
        assert dict(b.utilities) == dict(a.utilities)


def test_bundle_of_computes_value_and_cost(four_agent_market):
    x = allocation({("A1", "G1"): "3/8", ("A1", "G2"): "5/8"})
    p = price_vector({"G1": 0, "G2": "8/5", "G3": "4/5"})
    b = bundle_of(four_agent_market, "A1", x, p)
    assert b.value == F(3, 8) * F(1, 2) + F(5, 8)
    assert b.cost == F(5, 8) * F(8, 5)
