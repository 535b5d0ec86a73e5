"""Threshold games on directed graphs and a brute-force grid solver.

A profile assigns each node a value in [0,1].  A node whose in-neighbour
sum exceeds 1/2 + kappa must play at most kappa; below 1/2 - kappa it must
play at least 1 - kappa; in the middle band (inclusive at both edges) it is
unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .equilibrium import Verdict, VerdictViolation
from .market import rat, rat_str

DEFAULT_KAPPA = Fraction(1, 10)  # convenience default; not canonical

THRESHOLD_LOW = "threshold_low"
THRESHOLD_HIGH = "threshold_high"


class NoGridSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdGame:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    kappa: Fraction
    degree_bounded: bool = False

    def in_neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(u for (u, w) in self.edges if w == v)

    def out_degree(self, v: str) -> int:
        return sum(1 for (u, _) in self.edges if u == v)

    def in_degree(self, v: str) -> int:
        return sum(1 for (_, w) in self.edges if w == v)


def threshold_game(nodes, edges, kappa, degree_bounded: bool = False) -> ThresholdGame:
    nodes = tuple(str(n) for n in nodes)
    if len(set(nodes)) != len(nodes):
        raise ValueError("duplicate node id")
    node_set = set(nodes)
    edge_list = []
    for (u, v) in edges:
        u, v = str(u), str(v)
        if u not in node_set or v not in node_set:
            raise ValueError(f"edge ({u!r}, {v!r}) references unknown node")
        edge_list.append((u, v))
    if len(set(edge_list)) != len(edge_list):
        raise ValueError("duplicate edge")
    kappa = rat(kappa)
    if not (0 < kappa < Fraction(1, 2)):
        raise ValueError(f"kappa {rat_str(kappa)} outside (0, 1/2)")
    g = ThresholdGame(nodes, tuple(edge_list), kappa, degree_bounded)
    if degree_bounded:
        for v in nodes:
            if g.in_degree(v) > 3 or g.out_degree(v) > 3:
                raise ValueError(f"node {v!r} exceeds degree bound 3")
    return g


@dataclass(frozen=True)
class Profile:
    values: dict[str, Fraction]

    def of(self, v: str) -> Fraction:
        try:
            return self.values[v]
        except KeyError:
            raise KeyError(f"no value for node {v!r}") from None


def profile(values) -> Profile:
    vals = {str(k): rat(v) for k, v in values.items()}
    for k, v in vals.items():
        if not (0 <= v <= 1):
            raise ValueError(f"value {rat_str(v)} for node {k!r} outside [0,1]")
    return Profile(vals)


def verify_profile(g: ThresholdGame, x: Profile) -> Verdict:
    """Best-response check; outer-band comparisons are strict inequalities."""
    violations = []
    half = Fraction(1, 2)
    for v in g.nodes:
        xv = x.of(v)
        s = sum(x.of(u) for u in g.in_neighbors(v))
        if s > half + g.kappa and xv > g.kappa:
            violations.append(VerdictViolation(THRESHOLD_HIGH, v, xv - g.kappa))
        elif s < half - g.kappa and xv < 1 - g.kappa:
            violations.append(VerdictViolation(THRESHOLD_LOW, v, (1 - g.kappa) - xv))
    return Verdict(tuple(violations))


def solve_brute_force(g: ThresholdGame, grid_resolution) -> Profile:
    """First grid profile (lexicographic over node order) passing verification."""
    if len(g.nodes) > 8:
        raise ValueError(f"{len(g.nodes)} nodes exceeds the brute-force guard of 8")
    h = rat(grid_resolution)
    if not (0 < h <= 1):
        raise ValueError("grid resolution must lie in (0, 1]")
    steps = int(1 / h)
    levels = [h * t for t in range(steps + 1)]
    if levels[-1] != 1:
        levels.append(Fraction(1))

    nodes = g.nodes
    pos = {v: i for i, v in enumerate(nodes)}
    # nodes fully decided once the first i+1 values are fixed, for pruning
    checkable_at = [
        [v for v in nodes if pos[v] <= i and all(pos[u] <= i for u in g.in_neighbors(v))]
        for i in range(len(nodes))
    ]
    half = Fraction(1, 2)

    def consistent(v: str, values: dict[str, Fraction]) -> bool:
        xv = values[v]
        s = sum(values[u] for u in g.in_neighbors(v))
        if s > half + g.kappa:
            return xv <= g.kappa
        if s < half - g.kappa:
            return xv >= 1 - g.kappa
        return True

    values: dict[str, Fraction] = {}

    def rec(i: int) -> Optional[Profile]:
        if i == len(nodes):
            return Profile(dict(values))
        prev = set(checkable_at[i - 1]) if i else set()
        fresh = [v for v in checkable_at[i] if v not in prev]
        for level in levels:
            values[nodes[i]] = level
            if all(consistent(v, values) for v in fresh):
                found = rec(i + 1)
                if found is not None:
                    return found
        del values[nodes[i]]
        return None

    found = rec(0)
    if found is None:
        raise NoGridSolutionError(
            f"no profile on the {rat_str(h)}-grid passes; refine the grid"
        )
    assert verify_profile(g, found).passed
    return found
