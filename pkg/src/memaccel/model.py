"""Cost/cardinality model of a radio as a web of functional blocks, and the
memory-acceleration analytics computed over a set of tables.

All costs are exact :class:`~fractions.Fraction` values and all cardinalities
are Python ints; floats appear only when reports are rendered.

Input lanes.  Every edge is a data lane.  A lane may carry its own ``(A, l)``;
otherwise it carries the consumer's MIDS, ``A ** l``.  A table boundary's key
space is the product of the cardinalities of the lanes entering it, and its
item size is the sum of ``S`` over member blocks with an output leaving it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from memaccel.errors import InvalidGraph, ZeroDenominator, ZeroMemory

COST_CONVENTIONS = ("ops-per-second", "cpu-time")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Edge:
    """A lane ``src -> dst``; ``src=None`` is an external input and
    ``dst=None`` an external output."""

    src: Optional[str]
    dst: Optional[str]
    A: Optional[int] = None
    l: Optional[int] = None

    def __post_init__(self):
        if self.src is None and self.dst is None:
            raise InvalidGraph("an edge needs at least one endpoint")
        if (self.A is None) != (self.l is None):
            raise InvalidGraph("lane cardinality needs both A and l")


@dataclass(frozen=True)
class SegmentationRule:
    """Replacement of block ``target`` by a web of sub-blocks.

    Every input lane of the target is fanned out to each block in
    ``inputs``; every output lane of the target is driven by each block in
    ``outputs``.  ``edges`` wires the sub-blocks together and may add
    external lanes of their own (``src=None`` / ``dst=None``), e.g. state
    memories that only a sub-block reads.
    """

    target: str
    blocks: Tuple["FunctionalBlock", ...]
    edges: Tuple[Edge, ...] = ()
    inputs: Tuple[str, ...] = ()
    outputs: Tuple[str, ...] = ()

    def __post_init__(self):
        ids = [b.id for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise InvalidGraph(f"segmentation of {self.target}: duplicate sub-block ids")
        if not self.inputs or not self.outputs:
            raise InvalidGraph(f"segmentation of {self.target}: needs entry and exit sub-blocks")
        for name in (*self.inputs, *self.outputs):
            if name not in ids:
                raise InvalidGraph(f"segmentation of {self.target}: unknown sub-block {name!r}")
        for e in self.edges:
            for end in (e.src, e.dst):
                if end is not None and end not in ids:
                    raise InvalidGraph(f"segmentation of {self.target}: edge {e} leaves the rule")

    @property
    def total_cost(self) -> Fraction:
        return sum((b.W for b in self.blocks), Fraction(0))


@dataclass(frozen=True)
class FunctionalBlock:
    id: str
    W: Fraction
    l: int
    A: int
    S: int
    C_o: Optional[int] = None
    segmentation: Optional[SegmentationRule] = None

    def __post_init__(self):
        object.__setattr__(self, "W", as_fraction(self.W))
        if self.W < 0:
            raise ValueError(f"block {self.id}: W must be >= 0")
        if self.l < 1 or self.A < 2 or self.S < 1:
            raise ValueError(f"block {self.id}: need l >= 1, A >= 2, S >= 1")
        seg = self.segmentation
        if seg is not None:
            if seg.target != self.id:
                raise InvalidGraph(f"segmentation target {seg.target!r} != block {self.id!r}")
            if seg.total_cost != self.W:
                raise InvalidGraph(
                    f"segmentation of {self.id} does not conserve cost: "
                    f"{seg.total_cost} != {self.W}"
                )

    @property
    def C_i(self) -> int:
        return self.A ** self.l


@dataclass(frozen=True, eq=False)
class BlockGraph:
    blocks: Mapping[str, FunctionalBlock]
    edges: Tuple[Edge, ...]
    cost_convention: str = "cpu-time"
    _topo: Tuple[str, ...] = field(default=(), repr=False)

    @classmethod
    def build(
        cls,
        blocks: Iterable[FunctionalBlock],
        edges: Iterable[Union[Edge, Tuple[Optional[str], Optional[str]]]] = (),
        cost_convention: str = "cpu-time",
    ) -> "BlockGraph":
        """Validate and complete a graph.

        Blocks with no incoming lane get an external input lane and blocks
        with no outgoing lane get an external output lane.
        """
        if cost_convention not in COST_CONVENTIONS:
            raise InvalidGraph(f"cost_convention must be one of {COST_CONVENTIONS}")
        by_id: Dict[str, FunctionalBlock] = {}
        for b in blocks:
            if b.id in by_id:
                raise InvalidGraph(f"duplicate block id {b.id!r}")
            by_id[b.id] = b
        if not by_id:
            raise InvalidGraph("graph has no blocks")
        lanes = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        for e in lanes:
            for end in (e.src, e.dst):
                if end is not None and end not in by_id:
                    raise InvalidGraph(f"edge {e} references unknown block {end!r}")
        has_in = {e.dst for e in lanes}
        has_out = {e.src for e in lanes}
        lanes += [Edge(None, b) for b in by_id if b not in has_in]
        lanes += [Edge(b, None) for b in by_id if b not in has_out]
        topo = _topological_order(by_id, lanes)
        _check_connected(by_id, lanes)
        return cls(dict(by_id), tuple(lanes), cost_convention, topo)

    def __contains__(self, block_id) -> bool:
        return block_id in self.blocks

    @property
    def order(self) -> Tuple[str, ...]:
        return self._topo

    def in_edges(self, block_id: str) -> List[Edge]:
        return [e for e in self.edges if e.dst == block_id]

    def out_edges(self, block_id: str) -> List[Edge]:
        return [e for e in self.edges if e.src == block_id]

    def consumers(self, block_id: str) -> List[str]:
        return [e.dst for e in self.out_edges(block_id) if e.dst is not None]

    def producers(self, block_id: str) -> List[str]:
        return [e.src for e in self.in_edges(block_id) if e.src is not None]

    @property
    def total_cost(self) -> Fraction:
        return sum((b.W for b in self.blocks.values()), Fraction(0))

    def lane_cardinality(self, edge: Edge) -> int:
        if edge.A is not None:
            return edge.A ** edge.l
        return self.blocks[edge.dst].C_i

    def segment(self, block_id: str) -> "BlockGraph":
        """Replace ``block_id`` by its segmentation rule's sub-graph."""
        target = self.blocks[block_id]
        rule = target.segmentation
        if rule is None:
            raise InvalidGraph(f"block {block_id!r} has no segmentation rule")
        clash = {b.id for b in rule.blocks} & (set(self.blocks) - {block_id})
        if clash:
            raise InvalidGraph(f"sub-block ids {sorted(clash)} already exist")
        blocks = [b for b in self.blocks.values() if b.id != block_id] + list(rule.blocks)
        lanes: List[Edge] = []
        for e in self.edges:
            if e.dst == block_id:
                lanes += [Edge(e.src, entry, e.A, e.l) for entry in rule.inputs]
            elif e.src == block_id:
                lanes += [Edge(exit_, e.dst, e.A, e.l) for exit_ in rule.outputs]
            else:
                lanes.append(e)
        lanes += list(rule.edges)
        return BlockGraph.build(blocks, lanes, self.cost_convention)

    def fully_segmented(self) -> "BlockGraph":
        g = self
        while True:
            pending = [b for b in g.order if g.blocks[b].segmentation is not None]
            if not pending:
                return g
            g = g.segment(pending[0])


def _topological_order(blocks: Mapping[str, FunctionalBlock], lanes: Sequence[Edge]) -> Tuple[str, ...]:
    indeg = {b: 0 for b in blocks}
    succ: Dict[str, List[str]] = {b: [] for b in blocks}
    for e in lanes:
        if e.src is not None and e.dst is not None:
            indeg[e.dst] += 1
            succ[e.src].append(e.dst)
    ready = sorted(b for b, d in indeg.items() if d == 0)
    order = []
    while ready:
        b = ready.pop(0)
        order.append(b)
        for c in succ[b]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort()
    if len(order) != len(blocks):
        raise InvalidGraph("graph contains a cycle")
    return tuple(order)


def _check_connected(blocks: Mapping[str, FunctionalBlock], lanes: Sequence[Edge]) -> None:
    adj: Dict[str, set] = {b: set() for b in blocks}
    for e in lanes:
        if e.src is not None and e.dst is not None:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    start = next(iter(blocks))
    seen, stack = {start}, [start]
    while stack:
        for n in adj[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    if len(seen) != len(blocks):
        raise InvalidGraph(f"graph is disconnected: {sorted(set(blocks) - seen)} unreachable")


# --- platform ------------------------------------------------------------


@dataclass(frozen=True)
class LatencyTier:
    max_bytes: Optional[int]
    L: Fraction

    def __post_init__(self):
        object.__setattr__(self, "L", as_fraction(self.L))


def cache_tiers(l1=Fraction(1), l2=Fraction(4), l3=Fraction(12), ram=Fraction(60)) -> Tuple[LatencyTier, ...]:
    """Step-function latency: 32 KiB / 256 KiB / 8 MiB / unbounded."""
    return (
        LatencyTier(32 << 10, l1),
        LatencyTier(256 << 10, l2),
        LatencyTier(8 << 20, l3),
        LatencyTier(None, ram),
    )


@dataclass(frozen=True)
class Platform:
    W: Fraction
    M: int
    x: Fraction
    sigma: Fraction
    latency: Tuple[LatencyTier, ...] = field(default_factory=cache_tiers)

    def __post_init__(self):
        for name in ("W", "x", "sigma"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.W <= 0 or self.M <= 0 or self.x <= 0 or self.sigma <= 0:
            raise ValueError("platform parameters must be positive")
        if not self.latency or self.latency[-1].max_bytes is not None:
            raise ValueError("latency tiers must end with an unbounded tier")
        if any(t.L <= 0 for t in self.latency):
            raise ValueError("latencies must be positive")

    def latency_model(self, table_bytes: int) -> Fraction:
        for tier in self.latency:
            if tier.max_bytes is None or table_bytes <= tier.max_bytes:
                return tier.L
        raise AssertionError("unreachable")

    def management_cost(self, table_bytes: int, n_inputs: int) -> Fraction:
        """Estimated per-use cost of a table: ``L + (i - 1)(x + sigma)``."""
        return self.latency_model(table_bytes) + (n_inputs - 1) * (self.x + self.sigma)


# --- table boundaries ----------------------------------------------------


@dataclass(frozen=True)
class TableBoundary:
    members: Tuple[str, ...]
    crossing_inputs: Tuple[Edge, ...]
    i_m: int
    C_i: int
    S_m: int
    M_m: int
    W_TB: Fraction
    Wm_m: Fraction


def boundary_inputs(graph: BlockGraph, members: Iterable[str]) -> List[Edge]:
    inside = set(members)
    return [e for e in graph.edges if e.dst in inside and e.src not in inside]


def boundary_outputs(graph: BlockGraph, members: Iterable[str]) -> List[Edge]:
    inside = set(members)
    return [e for e in graph.edges if e.src in inside and e.dst not in inside]


def make_boundary(graph: BlockGraph, members: Iterable[str], platform: Platform) -> TableBoundary:
    inside = sorted(set(members))
    if not inside:
        raise ValueError("a table boundary needs at least one block")
    crossing = boundary_inputs(graph, inside)
    c_i = 1
    for e in crossing:
        c_i *= graph.lane_cardinality(e)
    emitters = {e.src for e in boundary_outputs(graph, inside)}
    s_m = sum(graph.blocks[b].S for b in emitters)
    m_m = c_i * s_m
    return TableBoundary(
        members=tuple(inside),
        crossing_inputs=tuple(crossing),
        i_m=len(crossing),
        C_i=c_i,
        S_m=s_m,
        M_m=m_m,
        W_TB=sum((graph.blocks[b].W for b in inside), Fraction(0)),
        Wm_m=platform.management_cost(m_m, len(crossing)),
    )


def input_cardinality(obj: Union[FunctionalBlock, TableBoundary]) -> int:
    """``A ** l`` for a block; product of crossing-lane cardinalities for a boundary."""
    return obj.C_i


def is_peripheral(graph: BlockGraph, block_id: str, members: Iterable[str]) -> bool:
    """True iff all input lanes or all output lanes of the block cross the boundary."""
    inside = set(members)
    if block_id not in inside:
        raise ValueError(f"{block_id!r} is not inside the boundary")
    ins = graph.in_edges(block_id)
    outs = graph.out_edges(block_id)
    return all(e.src not in inside for e in ins) or all(e.dst not in inside for e in outs)


def quotient_is_acyclic(graph: BlockGraph, groups: Iterable[Iterable[str]]) -> bool:
    """Whether collapsing each group to one node leaves the graph acyclic.

    This is the condition for a set of tables to be evaluable one lookup at a
    time; for a single group it is equivalent to the group being convex (no
    path leaves it and re-enters).
    """
    owner = {b: b for b in graph.blocks}
    for i, g in enumerate(groups):
        for b in g:
            owner[b] = ("table", i)
    nodes = set(owner.values())
    succ: Dict[object, set] = {n: set() for n in nodes}
    indeg = {n: 0 for n in nodes}
    for e in graph.edges:
        if e.src is None or e.dst is None:
            continue
        a, b = owner[e.src], owner[e.dst]
        if a != b and b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return seen == len(nodes)


# --- analytics -----------------------------------------------------------


def _tables(plan_or_tables) -> Sequence[TableBoundary]:
    return getattr(plan_or_tables, "tables", plan_or_tables)


def eta(plan_or_tables) -> Fraction:
    """Acceleration efficiency: saved cost net of table handling, per byte."""
    tables = _tables(plan_or_tables)
    memory = sum(t.M_m for t in tables)
    if memory == 0:
        raise ZeroMemory("eta is undefined without table memory")
    saved = sum((t.W_TB for t in tables), Fraction(0)) - sum((t.Wm_m for t in tables), Fraction(0))
    return saved / memory


def eta_m(table: TableBoundary) -> Fraction:
    if table.M_m == 0:
        raise ZeroMemory("eta_m is undefined for an empty table")
    return (table.W_TB - table.Wm_m) / table.M_m


def accel_factor(W_r, tabled_costs: Iterable, table_mgmt_costs: Iterable) -> Fraction:
    """``(W_r + sum W_n) / (W_r + sum Wm_m)``."""
    W_r = as_fraction(W_r)
    num = W_r + sum((as_fraction(w) for w in tabled_costs), Fraction(0))
    den = W_r + sum((as_fraction(w) for w in table_mgmt_costs), Fraction(0))
    if den <= 0:
        raise ZeroDenominator("acceleration factor denominator is not positive")
    return num / den


def accel_factor_max(segment_costs: Iterable, latencies: Sequence, input_counts: Sequence[int], x, sigma) -> Fraction:
    """Estimated ceiling: ``sum W_n / sum (L_m + (i_m - 1)(x + sigma))``."""
    if len(latencies) != len(input_counts):
        raise ValueError("one latency and one input count per table")
    if not latencies:
        raise ValueError("at least one table is required")
    x, sigma = as_fraction(x), as_fraction(sigma)
    den = sum((as_fraction(L) + (i - 1) * (x + sigma) for L, i in zip(latencies, input_counts)), Fraction(0))
    if den <= 0:
        raise ZeroDenominator("a_max denominator is not positive")
    return sum((as_fraction(w) for w in segment_costs), Fraction(0)) / den


def merit(plan_or_tables, platform: Platform, W_impl=None) -> Fraction:
    """Overall merit ``(sum M_m / M) (W_impl / W) eta``.

    ``W_impl=None`` declares the unthrottled convention ``W_impl = W``.
    """
    tables = _tables(plan_or_tables)
    if platform.M <= 0:
        raise ZeroMemory("platform memory must be positive")
    W_impl = platform.W if W_impl is None else as_fraction(W_impl)
    memory = sum(t.M_m for t in tables)
    return Fraction(memory, platform.M) * (W_impl / platform.W) * eta(tables)


def merit_unthrottled(plan_or_tables, platform: Platform) -> Fraction:
    """Simplified merit ``(sum W_n - sum Wm_m) / M`` for ``W_impl = W``."""
    tables = _tables(plan_or_tables)
    if platform.M <= 0:
        raise ZeroMemory("platform memory must be positive")
    saved = sum((t.W_TB for t in tables), Fraction(0)) - sum((t.Wm_m for t in tables), Fraction(0))
    return saved / platform.M


@dataclass(frozen=True)
class AccelMetrics:
    a: Fraction
    a_max: Optional[Fraction]
    eta: Optional[Fraction]
    eta_m: Tuple[Fraction, ...]
    I: Optional[Fraction]
    W_r: Fraction
    W_impl: Fraction

    @property
    def eta_negative(self) -> bool:
        """Set when the design costs more in table handling than it saves."""
        return self.eta is not None and self.eta < 0


def accel_metrics(tables: Sequence[TableBoundary], W_r, platform: Platform, W_impl=None) -> AccelMetrics:
    W_r = as_fraction(W_r)
    W_impl = platform.W if W_impl is None else as_fraction(W_impl)
    a = accel_factor(W_r, [t.W_TB for t in tables], [t.Wm_m for t in tables])
    if not tables:
        return AccelMetrics(a, None, None, (), None, W_r, W_impl)
    a_max = accel_factor_max(
        [t.W_TB for t in tables],
        [platform.latency_model(t.M_m) for t in tables],
        [t.i_m for t in tables],
        platform.x,
        platform.sigma,
    )
    return AccelMetrics(
        a=a,
        a_max=a_max,
        eta=eta(tables),
        eta_m=tuple(eta_m(t) for t in tables),
        I=merit(tables, platform, W_impl),
        W_r=W_r,
        W_impl=W_impl,
    )


# --- graph files --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GraphSpec:
    graph: BlockGraph
    platform: Optional[Platform] = None
    budget: Optional[int] = None


def _frac_out(x: Fraction) -> Union[int, str]:
    return x.numerator if x.denominator == 1 else str(x)


def _edge_from(d) -> Edge:
    if isinstance(d, (list, tuple)):
        return Edge(*d)
    return Edge(d.get("src"), d.get("dst"), d.get("A"), d.get("l"))


def _edge_to(e: Edge) -> dict:
    d = {"src": e.src, "dst": e.dst}
    if e.A is not None:
        d.update(A=e.A, l=e.l)
    return d


def _block_from(d: dict) -> FunctionalBlock:
    seg = d.get("segmentation")
    rule = None
    if seg is not None:
        rule = SegmentationRule(
            target=d["id"],
            blocks=tuple(_block_from(b) for b in seg["blocks"]),
            edges=tuple(_edge_from(e) for e in seg.get("edges", ())),
            inputs=tuple(seg["inputs"]),
            outputs=tuple(seg["outputs"]),
        )
    return FunctionalBlock(
        id=d["id"], W=as_fraction(d["W"]), l=int(d["l"]), A=int(d["A"]), S=int(d["S"]),
        C_o=d.get("C_o"), segmentation=rule,
    )


def _block_to(b: FunctionalBlock) -> dict:
    d = {"id": b.id, "W": _frac_out(b.W), "l": b.l, "A": b.A, "S": b.S}
    if b.C_o is not None:
        d["C_o"] = b.C_o
    if b.segmentation is not None:
        s = b.segmentation
        d["segmentation"] = {
            "blocks": [_block_to(x) for x in s.blocks],
            "edges": [_edge_to(e) for e in s.edges],
            "inputs": list(s.inputs),
            "outputs": list(s.outputs),
        }
    return d


def platform_from_dict(d: dict) -> Platform:
    tiers = d.get("latency")
    return Platform(
        W=as_fraction(d["W"]),
        M=int(d["M"]),
        x=as_fraction(d["x"]),
        sigma=as_fraction(d["sigma"]),
        latency=cache_tiers() if tiers is None else tuple(
            LatencyTier(t.get("max_bytes"), as_fraction(t["L"])) for t in tiers
        ),
    )


def platform_to_dict(p: Platform) -> dict:
    return {
        "W": _frac_out(p.W), "M": p.M, "x": _frac_out(p.x), "sigma": _frac_out(p.sigma),
        "latency": [{"max_bytes": t.max_bytes, "L": _frac_out(t.L)} for t in p.latency],
    }


def graph_spec_from_dict(d: dict) -> GraphSpec:
    graph = BlockGraph.build(
        [_block_from(b) for b in d["blocks"]],
        [_edge_from(e) for e in d.get("edges", ())],
        d.get("cost_convention", "cpu-time"),
    )
    platform = platform_from_dict(d["platform"]) if d.get("platform") else None
    budget = d.get("budget")
    return GraphSpec(graph, platform, None if budget is None else int(budget))


def graph_spec_to_dict(spec: GraphSpec) -> dict:
    g = spec.graph
    d = {
        "cost_convention": g.cost_convention,
        "blocks": [_block_to(g.blocks[b]) for b in g.blocks],
        "edges": [_edge_to(e) for e in g.edges],
    }
    if spec.platform is not None:
        d["platform"] = platform_to_dict(spec.platform)
    if spec.budget is not None:
        d["budget"] = spec.budget
    return d


def load_graph_spec(path: Union[str, Path]) -> GraphSpec:
    with open(path) as fh:
        return graph_spec_from_dict(json.load(fh))


def dump_graph_spec(spec: GraphSpec, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(graph_spec_to_dict(spec), fh, indent=2)
        fh.write("\n")
