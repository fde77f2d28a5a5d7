"""Recursive table aggregation planner and an exhaustive reference planner.

The recursive planner encloses everything still computational in one table
boundary, releases the lightest block (and, when that block is not
peripheral, everything downstream of it inside the boundary) until the
boundary fits the remaining memory, segments a block when it is the only
one left and still does not fit, and commits each fitting boundary as a
table.  A block with no segmentation rule that cannot fit alone stays
computational.

A boundary is committed only when it fits and the committed tables can
still be evaluated one lookup at a time (the graph with every table
collapsed to a node is acyclic).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Set, Tuple

from memaccel.errors import TooLarge
from memaccel.model import (
    AccelMetrics,
    BlockGraph,
    Platform,
    SegmentationRule,
    TableBoundary,
    accel_factor,
    accel_metrics,
    is_peripheral,
    make_boundary,
    quotient_is_acyclic,
)

__all__ = ["Plan", "SegmentationRule", "exhaustive_plan", "plan", "plan_report", "format_plan_report"]

FULLY_TABLED = "fully-tabled"
MEMORY_EXHAUSTED = "memory-exhausted"
EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True, eq=False)
class Plan:
    tables: Tuple[TableBoundary, ...]
    residual: Tuple[str, ...]
    W_r: Fraction
    termination: str
    budget: int
    graph: BlockGraph
    trace: Tuple[str, ...] = ()

    @property
    def memory_used(self) -> int:
        return sum(t.M_m for t in self.tables)

    @property
    def a(self) -> Fraction:
        return accel_factor(self.W_r, [t.W_TB for t in self.tables], [t.Wm_m for t in self.tables])

    def metrics(self, platform: Platform, W_impl=None) -> AccelMetrics:
        return accel_metrics(self.tables, self.W_r, platform, W_impl)


def _downstream(graph: BlockGraph, start: str, inside: Set[str]) -> Set[str]:
    found: Set[str] = set()
    stack = [start]
    while stack:
        for c in graph.consumers(stack.pop()):
            if c in inside and c not in found:
                found.add(c)
                stack.append(c)
    return found


def _finish(graph: BlockGraph, tables: List[TableBoundary], budget: int, trace: List[str]) -> Plan:
    tabled = {b for t in tables for b in t.members}
    residual = tuple(b for b in graph.order if b not in tabled)
    W_r = sum((graph.blocks[b].W for b in residual), Fraction(0))
    return Plan(
        tables=tuple(tables),
        residual=residual,
        W_r=W_r,
        termination=MEMORY_EXHAUSTED if residual else FULLY_TABLED,
        budget=budget,
        graph=graph,
        trace=tuple(trace),
    )


def plan(graph: BlockGraph, platform: Platform, budget: Optional[int] = None) -> Plan:
    if budget is None:
        budget = platform.M
    if not 0 <= budget <= platform.M:
        raise ValueError(f"budget {budget} must be within 0..{platform.M}")
    g = graph
    remaining = budget
    tables: List[TableBoundary] = []
    tabled: Set[str] = set()
    skipped: Set[str] = set()
    trace: List[str] = []
    sub_blocks: Set[str] = set()

    def pool() -> List[str]:
        return [b for b in g.order if b not in tabled and b not in skipped]

    def try_fit(members: Set[str]) -> Optional[TableBoundary]:
        tb = make_boundary(g, members, platform)
        if tb.M_m > remaining:
            return None
        if not quotient_is_acyclic(g, [t.members for t in tables] + [members]):
            return None
        return tb

    trace.append("enclose the whole system in the table boundary")
    first = True
    while remaining > 0:
        boundary = set(pool())
        if not boundary:
            break
        tb = try_fit(boundary)
        if tb is None and first:
            trace.append("whole-system table does not fit: block-level view")
        first = False
        around_segments = False
        while tb is None:
            if len(boundary) == 1:
                (b,) = boundary
                rule = g.blocks[b].segmentation
                if rule is None:
                    skipped.add(b)
                    trace.append(f"atomicity limit at {b} with no segmentation: left computational")
                    break
                g = g.segment(b)
                boundary = {s.id for s in rule.blocks}
                sub_blocks |= boundary
                around_segments = True
                trace.append(f"atomicity limit at {b}: segmented into {sorted(boundary)}")
                tb = try_fit(boundary)
                continue
            lightest = min(boundary, key=lambda x: (g.blocks[x].W, x))
            released = {lightest}
            if not is_peripheral(g, lightest, boundary):
                released |= _downstream(g, lightest, boundary)
            boundary -= released
            trace.append(f"release {sorted(released)}")
            if around_segments and released & sub_blocks:
                w_tb = sum((g.blocks[x].W for x in boundary), Fraction(0))
                outside = [g.blocks[x].W for x in pool() if x not in boundary]
                if outside and not w_tb > max(outside):
                    boundary = set(pool())
                    around_segments = False
                    trace.append("boundary no longer heaviest: re-enclose the remaining system")
            tb = try_fit(boundary)
        if tb is not None:
            tables.append(tb)
            tabled |= set(tb.members)
            remaining -= tb.M_m
            assert remaining >= 0
            trace.append(f"commit table {list(tb.members)} ({tb.M_m} B, {remaining} B left)")
    if remaining == 0 and pool():
        trace.append("memory exhausted")
    return _finish(g, tables, budget, trace)


def exhaustive_plan(
    graph: BlockGraph, platform: Platform, budget: Optional[int] = None, *, limit: int = EXHAUSTIVE_LIMIT
) -> Plan:
    """Best disjoint set of tables by acceleration factor, by enumeration.

    Blocks carrying segmentation rules are segmented first.  Every block
    subset whose collapse keeps the graph acyclic is a candidate table
    (this includes all consumer-closed connected aggregates).
    """
    if budget is None:
        budget = platform.M
    g = graph.fully_segmented()
    ids = list(g.order)
    if len(ids) > limit:
        raise TooLarge(f"{len(ids)} blocks exceeds the exhaustive limit of {limit}")

    by_first: List[List[Tuple[int, TableBoundary]]] = [[] for _ in ids]
    for mask in range(1, 1 << len(ids)):
        members = [ids[i] for i in range(len(ids)) if mask >> i & 1]
        if not quotient_is_acyclic(g, [members]):
            continue
        tb = make_boundary(g, members, platform)
        if tb.M_m <= budget:
            first = (mask & -mask).bit_length() - 1
            by_first[first].append((mask, tb))

    weights = [g.blocks[b].W for b in ids]
    best: dict = {"cost": None, "tables": []}
    full = (1 << len(ids)) - 1

    def search(covered: int, cost: Fraction, memory: int, chosen: List[TableBoundary]) -> None:
        if best["cost"] is not None and cost >= best["cost"]:
            return
        if covered == full:
            if quotient_is_acyclic(g, [t.members for t in chosen]):
                best["cost"], best["tables"] = cost, list(chosen)
            return
        i = (~covered & full & -(~covered & full)).bit_length() - 1
        search(covered | (1 << i), cost + weights[i], memory, chosen)
        for mask, tb in by_first[i]:
            if mask & covered or memory + tb.M_m > budget:
                continue
            chosen.append(tb)
            search(covered | mask, cost + tb.Wm_m, memory + tb.M_m, chosen)
            chosen.pop()

    # cost = W_r + sum Wm_m, the denominator of the acceleration factor
    search(0, Fraction(0), 0, [])
    return _finish(g, best["tables"], budget, ["exhaustive enumeration"])


# --- reports -------------------------------------------------------------


def _num(x: Optional[Fraction]):
    if x is None:
        return None
    return {"exact": str(x), "value": float(x)}


def plan_report(p: Plan, platform: Platform, W_impl=None) -> dict:
    m = p.metrics(platform, W_impl)
    return {
        "termination": p.termination,
        "budget": p.budget,
        "memory_used": p.memory_used,
        "tables": [
            {
                "members": list(t.members),
                "C_i": t.C_i,
                "i_m": t.i_m,
                "S_m": t.S_m,
                "M_m": t.M_m,
                "W_TB": _num(t.W_TB),
                "Wm_m": _num(t.Wm_m),
                "eta_m": _num(e),
            }
            for t, e in zip(p.tables, m.eta_m)
        ],
        "residual": list(p.residual),
        "W_r": _num(p.W_r),
        "a": _num(m.a),
        "a_max": _num(m.a_max),
        "eta": _num(m.eta),
        "eta_negative": m.eta_negative,
        "I": _num(m.I),
        "trace": list(p.trace),
    }


def _fmt(x) -> str:
    return "-" if x is None else f"{x['value']:.6g}"


def format_plan_report(report: dict) -> str:
    lines = [f"termination: {report['termination']}",
             f"memory: {report['memory_used']} of {report['budget']} B"]
    for i, t in enumerate(report["tables"]):
        lines.append(
            f"table {i}: members={','.join(t['members'])} C_i={t['C_i']} M_m={t['M_m']} "
            f"Wm_m={_fmt(t['Wm_m'])} eta_m={_fmt(t['eta_m'])}"
        )
    lines.append(f"residual: {','.join(report['residual']) or '-'} (W_r={_fmt(report['W_r'])})")
    flag = "  [negative eta]" if report["eta_negative"] else ""
    lines.append(
        f"a={_fmt(report['a'])} a_max={_fmt(report['a_max'])} eta={_fmt(report['eta'])}"
        f" I={_fmt(report['I'])}{flag}"
    )
    return "\n".join(lines)
