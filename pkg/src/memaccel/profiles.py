"""Ready-made block graphs.

``dvbt_profile`` is the measured receiver profile: a K=7 Viterbi decoder at
7.71 times realtime behind a front end that costs 0.5 times realtime in
total (cpu-time convention, unthrottled).  The Viterbi block carries a
segmentation into distance, branch-sum, compare/select, metric update,
path-bitset update and likeliest-state selection.  Cardinalities follow the
decoder in this package: with the distance, sum and select segments in one
table the key is ``dibit (4) x group id + four 4-bit metrics (16**5)``.
"""

from __future__ import annotations

from fractions import Fraction

from memaccel.model import (
    BlockGraph,
    Edge,
    FunctionalBlock,
    GraphSpec,
    LatencyTier,
    Platform,
    SegmentationRule,
)

MiB = 1 << 20
GiB = 1 << 30


def viterbi_segmentation() -> SegmentationRule:
    subs = (
        FunctionalBlock("vit.dist", Fraction("1.50"), l=1, A=4, S=1),
        FunctionalBlock("vit.bsum", Fraction("1.60"), l=2, A=4, S=2),
        FunctionalBlock("vit.cs", Fraction("2.40"), l=4, A=16, S=4),
        FunctionalBlock("vit.pmu", Fraction("0.60"), l=4, A=16, S=4),
        FunctionalBlock("vit.pbu", Fraction("1.21"), l=4096, A=2, S=8),
        FunctionalBlock("vit.sel", Fraction("0.40"), l=64, A=16, S=1),
    )
    edges = (
        Edge("vit.dist", "vit.bsum"),
        Edge(None, "vit.bsum", A=16, l=5),  # four metrics + group id
        Edge("vit.bsum", "vit.cs"),
        Edge("vit.cs", "vit.pmu"),
        Edge("vit.cs", "vit.pbu", A=2, l=4),
        Edge(None, "vit.pbu", A=2, l=4096),  # path bitsets
        Edge("vit.pmu", "vit.sel"),
    )
    return SegmentationRule(
        target="viterbi",
        blocks=subs,
        edges=edges,
        inputs=("vit.dist",),
        outputs=("vit.pbu", "vit.sel"),
    )


def dvbt_graph() -> BlockGraph:
    front = FunctionalBlock("front", Fraction("0.5"), l=4096, A=2, S=1)
    viterbi = FunctionalBlock(
        "viterbi", Fraction("7.71"), l=4096, A=4, S=1, segmentation=viterbi_segmentation()
    )
    return BlockGraph.build([front, viterbi], [("front", "viterbi")], "cpu-time")


def dvbt_platform() -> Platform:
    # reference host: 4 GiB; latencies in the same realtime units as W
    return Platform(
        W=Fraction(1),
        M=4 * GiB,
        x=Fraction(1, 1000),
        sigma=Fraction(1, 1000),
        latency=(
            LatencyTier(32 << 10, Fraction(1, 100)),
            LatencyTier(8 << 20, Fraction(3, 100)),
            LatencyTier(None, Fraction(8, 100)),
        ),
    )


def dvbt_profile(budget: int = 64 * MiB) -> GraphSpec:
    return GraphSpec(dvbt_graph(), dvbt_platform(), budget)
