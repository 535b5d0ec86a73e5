import json

import pytest

from hzlab.cli import run


@pytest.fixture
def fx(fixtures_dir):
    def path(name):
        return str(fixtures_dir / name)

    return path


def test_verify_pass(fx, capsys):
    code = run(
        [
            "verify",
            "--market", fx("four_agent_market.json"),
            "--prices", fx("four_agent_prices_1.json"),
            "--allocation", fx("four_agent_allocation_1.json"),
        ]
    )
    assert code == 0
    assert capsys.readouterr().out == "PASS\n"


def test_verify_fail_on_mismatched_pair(fx, capsys):
    code = run(
        [
            "verify",
            "--market", fx("four_agent_market.json"),
            "--prices", fx("four_agent_prices_2.json"),
            "--allocation", fx("four_agent_allocation_1.json"),
        ]
    )
    assert code == 1
    assert capsys.readouterr().out.startswith("FAIL")


def test_verify_json_output(fx, capsys):
    code = run(
        [
            "verify", "--format", "json",
            "--market", fx("four_agent_market.json"),
            "--prices", fx("four_agent_prices_3.json"),
            "--allocation", fx("four_agent_allocation_3.json"),
        ]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"passed": True, "violations": []}


def test_verify_garbage_input(tmp_path, fx, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = run(
        [
            "verify",
            "--market", str(bad),
            "--prices", fx("four_agent_prices_1.json"),
            "--allocation", fx("four_agent_allocation_1.json"),
        ]
    )
    assert code == 2


def test_missing_file_is_input_error(fx):
    code = run(
        [
            "verify",
            "--market", "/nonexistent/market.json",
            "--prices", fx("four_agent_prices_1.json"),
            "--allocation", fx("four_agent_allocation_1.json"),
        ]
    )
    assert code == 2


def test_unknown_subcommand_is_input_error(capsys):
    assert run(["frobnicate"]) == 2


def test_solve_finds_three_clusters(fx, capsys):
    code = run(
        [
            "solve",
            "--market", fx("four_agent_market.json"),
            "--grid", "1/10",
            "--refine-steps", "0",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("clusters: 3")


def test_solve_json_deterministic(fx, capsys):
    args = [
        "solve", "--format", "json",
        "--market", fx("four_agent_market.json"),
        "--grid", "1/10",
        "--refine-steps", "0",
    ]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first
    assert len(json.loads(first)["clusters"]) == 3


def test_demand_text(fx, capsys):
    code = run(
        [
            "demand",
            "--market", fx("four_agent_market.json"),
            "--prices", fx("four_agent_prices_2.json"),
            "--agent-group", "A1",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "value: 13/16" in out


def test_reduce_threshold_round_trip(fx, tmp_path, capsys):
    out = tmp_path / "market.json"
    code = run(
        ["reduce-threshold", "--game", fx("sample_game.txt"), "--m", "2",
         "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["kind"] == "threshold"
    assert len(doc["agent_groups"]) >= 3  # grouped representation

    # prices putting every node's level good at 1/m^2 extract profile all-ones
    prices = {g["id"]: "0" for g in doc["good_groups"]}
    for v in ("1", "2", "3"):
        prices[f"Gn_{v}_1"] = "1/4"
    pfile = tmp_path / "prices.json"
    pfile.write_text(json.dumps({"prices": prices}))
    code = run(["extract", "--market", str(out), "--prices", str(pfile)])
    assert code == 0
    text = capsys.readouterr().out
    assert text.splitlines() == ["1 1", "2 1", "3 1"]


def test_reduce_sat_and_complete_and_extract(fx, tmp_path, capsys):
    market = tmp_path / "sat_market.json"
    assert run(["reduce-sat", "--cnf", fx("sample.cnf"), "--K", "8",
                "--out", str(market)]) == 0
    doc = json.loads(market.read_text())
    assert doc["meta"] == {
        "kind": "sat", "K": 8, "n_vars": 4,
        "clauses": [[1, -2, 3], [-1, 2, 4], [2, 3, -4]],
    }

    prices = tmp_path / "p.json"
    alloc = tmp_path / "x.json"
    code = run(
        ["complete-sat", "--cnf", fx("sample.cnf"), "--K", "8",
         "--assignment", "1011",
         "--out-prices", str(prices), "--out-allocation", str(alloc)]
    )
    assert code == 0
    assert capsys.readouterr().out == "PASS\n"

    code = run(
        ["verify", "--market", str(market), "--prices", str(prices),
         "--allocation", str(alloc)]
    )
    assert code == 0
    capsys.readouterr()

    code = run(["extract", "--market", str(market), "--prices", str(prices),
                "--allocation", str(alloc)])
    assert code == 0
    out = capsys.readouterr().out
    assert "x1 = 1" in out and "x2 = 0" in out
    assert "x3 = 1" in out and "x4 = 1" in out


def test_complete_sat_rejects_bad_assignment(fx, capsys):
    code = run(["complete-sat", "--cnf", fx("sample.cnf"), "--K", "8",
                "--assignment", "10"])
    assert code == 2


def test_pad(fx, tmp_path):
    out = tmp_path / "padded.json"
    assert run(["pad", "--market", fx("four_agent_market.json"), "--n", "2",
                "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert sum(a["count"] for a in doc["agent_groups"]) == 8


def test_welfare(fx, capsys):
    code = run(
        ["welfare", "--market", fx("four_agent_market.json"),
         "--allocation", fx("four_agent_allocation_1.json")]
    )
    assert code == 0
    # each of the four unit agents gets value 3/4
    assert capsys.readouterr().out == "3\n"


def test_report_gadgets_runs(capsys):
    code = run(["report-gadgets", "--m-list", "4", "--pairs", "2", "--seed", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "family m worst_scaled_error"
    assert any(line.startswith("link_m4 4 ") for line in out.splitlines())
