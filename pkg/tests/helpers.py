"""Random graphs and platforms shared by planner tests."""

from __future__ import annotations

import random
from fractions import Fraction

from memaccel.model import BlockGraph, Edge, FunctionalBlock, LatencyTier, Platform, TableBoundary


def small_platform(M: int = 1 << 30) -> Platform:
    return Platform(
        W=Fraction(1),
        M=M,
        x=Fraction(1, 100),
        sigma=Fraction(1, 100),
        latency=(LatencyTier(256, Fraction(1, 10)), LatencyTier(4096, Fraction(1, 4)), LatencyTier(None, Fraction(1, 2))),
    )


def random_graph(rng: random.Random, max_blocks: int = 5) -> BlockGraph:
    n = rng.randint(1, max_blocks)
    blocks = [
        FunctionalBlock(
            f"b{i}",
            Fraction(rng.randint(0, 40), rng.choice((1, 2, 4, 10))),
            l=rng.randint(1, 6),
            A=rng.randint(2, 4),
            S=rng.randint(1, 4),
        )
        for i in range(n)
    ]
    edges = set()
    for i in range(1, n):
        edges.add((rng.randrange(i), i))
    for _ in range(rng.randint(0, n)):
        a, b = sorted(rng.sample(range(n), 2)) if n > 1 else (0, 0)
        if a != b:
            edges.add((a, b))
    lanes = []
    for a, b in sorted(edges):
        if rng.random() < 0.3:
            lanes.append(Edge(f"b{a}", f"b{b}", A=rng.randint(2, 4), l=rng.randint(1, 4)))
        else:
            lanes.append(Edge(f"b{a}", f"b{b}"))
    return BlockGraph.build(blocks, lanes)


def random_tables(rng: random.Random, count: int):
    out = []
    for i in range(count):
        out.append(
            TableBoundary(
                members=(f"t{i}",),
                crossing_inputs=(),
                i_m=rng.randint(1, 4),
                C_i=1,
                S_m=1,
                M_m=rng.randint(1, 10_000),
                W_TB=Fraction(rng.randint(0, 500), rng.randint(1, 50)),
                Wm_m=Fraction(rng.randint(1, 500), rng.randint(1, 50)),
            )
        )
    return out
