import pathlib

import pytest

from hzlab import allocation, make_market, price_vector
from hzlab import formats

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def four_agent_market():
    """Two agent pairs over three good groups; has three isolated equilibria."""
    return make_market(
        [("A1", 2, {"G1": "1/2", "G2": 1}), ("A2", 2, {"G2": 1, "G3": "1/2"})],
        [("G1", 1), ("G2", 2), ("G3", 1)],
        label="four-agent-three-good",
    )


def four_agent_equilibria():
    """The three known (prices, per-member allocation) pairs."""
    return [
        (
            price_vector({"G1": 0, "G2": 2, "G3": 0}),
            allocation(
                {("A1", "G1"): "1/2", ("A1", "G2"): "1/2",
                 ("A2", "G2"): "1/2", ("A2", "G3"): "1/2"}
            ),
        ),
        (
            price_vector({"G1": 0, "G2": "8/5", "G3": "4/5"}),
            allocation(
                {("A1", "G1"): "3/8", ("A1", "G2"): "5/8",
                 ("A2", "G1"): "1/8", ("A2", "G2"): "3/8", ("A2", "G3"): "1/2"}
            ),
        ),
        (
            price_vector({"G1": "4/5", "G2": "8/5", "G3": 0}),
            allocation(
                {("A1", "G1"): "1/2", ("A1", "G2"): "3/8", ("A1", "G3"): "1/8",
                 ("A2", "G2"): "5/8", ("A2", "G3"): "3/8"}
            ),
        ),
    ]


@pytest.fixture
def intro_market():
    """Three agents, three goods; split allocation Pareto-dominates uniform."""
    return make_market(
        [("B1", 1, {"H1": 1, "H2": "1/10"}),
         ("B2", 1, {"H1": 1, "H2": "1/10"}),
         ("B3", 1, {"H1": 1, "H2": "4/5"})],
        [("H1", 1), ("H2", 1), ("H3", 1)],
        label="three-agent-motivating",
    )


def load_market(name):
    m, meta = formats.market_from_doc(formats.loads((FIXTURES / name).read_text()))
    return m
