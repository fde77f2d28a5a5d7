from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from helpers import random_tables, small_platform
from memaccel.errors import InvalidGraph, ZeroDenominator, ZeroMemory
from memaccel.model import (
    BlockGraph,
    Edge,
    FunctionalBlock,
    SegmentationRule,
    TableBoundary,
    accel_factor,
    accel_factor_max,
    accel_metrics,
    eta,
    eta_m,
    graph_spec_from_dict,
    graph_spec_to_dict,
    input_cardinality,
    is_peripheral,
    make_boundary,
    merit,
    merit_unthrottled,
    quotient_is_acyclic,
)
from memaccel.profiles import dvbt_graph, dvbt_profile


def _table(W, Wm, M, i_m=1):
    return TableBoundary(("x",), (), i_m, 1, 1, M, Fraction(W), Fraction(Wm))


def test_block_cardinality():
    assert input_cardinality(FunctionalBlock("a", 1, l=4, A=2, S=1)) == 16
    assert input_cardinality(FunctionalBlock("a", 1, l=3, A=4, S=1)) == 64


def test_boundary_cardinality_is_product_of_crossing_lanes():
    g = BlockGraph.build(
        [FunctionalBlock(n, 1, l=1, A=2, S=1) for n in ("p", "q", "c")],
        [Edge("p", "c", A=2, l=4), Edge("q", "c", A=4, l=3)],
    )
    tb = make_boundary(g, ["c"], small_platform())
    joint = list(itertools.product(range(16), range(64)))
    assert tb.C_i == len(joint) == 1024
    assert tb.i_m == 2 and tb.M_m == 1024


def test_default_lane_carries_consumer_mids():
    g = BlockGraph.build([FunctionalBlock("a", 1, l=2, A=3, S=1), FunctionalBlock("b", 1, l=5, A=2, S=2)], [("a", "b")])
    assert make_boundary(g, ["b"], small_platform()).C_i == 32
    both = make_boundary(g, ["a", "b"], small_platform())
    assert (both.C_i, both.S_m, both.M_m) == (9, 2, 18)


def _chain(n=3):
    return BlockGraph.build(
        [FunctionalBlock(f"b{i}", 1, l=1, A=2, S=1) for i in range(n)], [(f"b{i}", f"b{i+1}") for i in range(n - 1)]
    )


def test_peripheral():
    g = _chain()
    members = ["b0", "b1", "b2"]
    assert is_peripheral(g, "b0", members) and is_peripheral(g, "b2", members)
    assert not is_peripheral(g, "b1", members)


def test_mixed_inputs_not_peripheral():
    g = BlockGraph.build(
        [FunctionalBlock(n, 1, l=1, A=2, S=1) for n in ("x", "y", "m", "z")],
        [("x", "m"), ("y", "m"), ("m", "z")],
    )
    assert not is_peripheral(g, "m", ["x", "m", "z"])
    with pytest.raises(ValueError):
        is_peripheral(g, "y", ["x", "m"])


def test_quotient_acyclicity():
    g = _chain()
    assert quotient_is_acyclic(g, [["b0", "b1"]])
    assert not quotient_is_acyclic(g, [["b0", "b2"]])
    assert quotient_is_acyclic(g, [["b0"], ["b2"]])


def test_eta_single_table():
    assert eta([_table(100, 10, 1000)]) == Fraction(9, 100)


def test_negative_eta_flagged():
    m = accel_metrics([_table(5, 10, 100)], 0, small_platform())
    assert m.eta < 0 and m.eta_negative
    assert not accel_metrics([_table(50, 10, 100)], 0, small_platform()).eta_negative


def test_eta_two_tables():
    t1, t2 = _table(100, 10, 1000), _table(30, 20, 500)
    assert eta([t1, t2]) == Fraction(100 + 30 - 10 - 20, 1500)
    # memory-weighted mean of the per-table efficiencies
    assert eta([t1, t2]) == (eta_m(t1) * 1000 + eta_m(t2) * 500) / 1500


def test_accel_factor_examples():
    a = accel_factor(0, [Fraction("7.71")], [Fraction("0.74")])
    assert abs(float(a) - 10.42) <= 0.01 and f"{float(a):.3g}" == "10.4"
    b = accel_factor(Fraction("0.5"), [Fraction("7.71")], [Fraction("0.74")])
    assert b == Fraction("8.21") / Fraction("1.24") and f"{float(b):.3g}" == "6.62"
    assert accel_factor(3, [Fraction(5)], [Fraction(5)]) == 1


def test_accel_factor_max_examples():
    assert accel_factor_max([20], [2], [1], Fraction(1, 10), Fraction(1, 10)) == 10
    assert accel_factor_max([12], [2], [3], 1, 1) == Fraction(12, 6)


def test_merit_examples():
    p = small_platform(M=1000)
    t = [_table(100, 10, 1000)]
    assert merit_unthrottled(t, p) == Fraction(9, 100)
    assert merit(t, p) == eta(t)
    assert merit(t, p, W_impl=Fraction(1, 2)) == eta(t) / 2


def test_degenerate_analytics():
    with pytest.raises(ZeroMemory):
        eta([])
    with pytest.raises(ZeroDenominator):
        accel_factor(0, [], [])
    with pytest.raises(ZeroMemory):
        eta_m(_table(1, 1, 0))


@given(st.integers(0, 10_000))
def test_a_bounded_by_a_max(seed):
    rng = random.Random(seed)
    tables = random_tables(rng, rng.randint(1, 4))
    p = small_platform()
    # give every table the management cost the platform would assign it
    tables = [
        TableBoundary(t.members, t.crossing_inputs, t.i_m, t.C_i, t.S_m, t.M_m, t.W_TB, p.management_cost(t.M_m, t.i_m))
        for t in tables
    ]
    W_r = Fraction(rng.randint(0, 100), 7)
    m = accel_metrics(tables, W_r, p)
    if sum(t.Wm_m for t in tables) <= sum(t.W_TB for t in tables):
        assert m.a <= m.a_max
    if W_r == 0:
        assert m.a == m.a_max


def test_unthrottled_merit_identity():
    rng = random.Random(1)
    p = small_platform(M=10**6)
    for _ in range(200):
        t = random_tables(rng, rng.randint(1, 5))
        assert merit(t, p) == merit_unthrottled(t, p)


def test_cost_conservation_enforced():
    rule = SegmentationRule("v", (FunctionalBlock("v.a", 1, l=1, A=2, S=1),), inputs=("v.a",), outputs=("v.a",))
    with pytest.raises(InvalidGraph):
        FunctionalBlock("v", 2, l=1, A=2, S=1, segmentation=rule)
    assert FunctionalBlock("v", 1, l=1, A=2, S=1, segmentation=rule).segmentation is rule


def test_invalid_graphs():
    b = [FunctionalBlock(n, 1, l=1, A=2, S=1) for n in ("a", "b", "c")]
    with pytest.raises(InvalidGraph):
        BlockGraph.build(b, [("a", "b"), ("b", "a"), ("b", "c")])
    with pytest.raises(InvalidGraph):
        BlockGraph.build(b, [("a", "b")])
    with pytest.raises(InvalidGraph):
        BlockGraph.build(b[:1], [("a", "zz")])
    with pytest.raises(InvalidGraph):
        BlockGraph.build(b[:1] * 2)
    with pytest.raises(ValueError):
        FunctionalBlock("a", -1, l=1, A=2, S=1)


def test_segmentation_wiring():
    g = dvbt_graph().segment("viterbi")
    assert "viterbi" not in g and "vit.dist" in g
    assert g.consumers("front") == ["vit.dist"]
    assert g.total_cost == dvbt_graph().total_cost
    outs = {e.src for e in g.edges if e.dst is None}
    assert outs == {"vit.pbu", "vit.sel"}


def test_viterbi_front_table_cardinality():
    g = dvbt_graph().segment("viterbi")
    tb = make_boundary(g, ["vit.dist", "vit.bsum", "vit.cs"], dvbt_profile().platform)
    assert tb.C_i == 1 << 22 and tb.M_m == 16 << 20


def test_graph_spec_json_round_trip():
    d = graph_spec_to_dict(dvbt_profile())
    again = graph_spec_to_dict(graph_spec_from_dict(json.loads(json.dumps(d))))
    assert again == d
    assert again["blocks"][1]["W"] == "771/100"
