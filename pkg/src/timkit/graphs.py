"""Topology matrices, directed message conflict graphs, and structural transforms.

Node ids are dense integers 1..K everywhere; an edge (i, j) means source i
interferes destination j. All graph objects are immutable after construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property


class GraphError(ValueError):
    """Invalid graph or topology input."""


@dataclass(frozen=True)
class TopologyMatrix:
    """K x K binary connectivity; entry [j][i] covers the source-i to destination-j link.

    The diagonal must be all ones: every demanded link is non-trivial.
    """

    k: int
    entries: tuple[tuple[int, ...], ...]
    m: int = 1
    n: int = 1

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise GraphError("k must be positive")
        if self.m < 1 or self.n < 1:
            raise GraphError("antenna counts must be >= 1")
        if len(self.entries) != self.k or any(len(r) != self.k for r in self.entries):
            raise GraphError("topology matrix must be K x K")
        for j, row in enumerate(self.entries):
            for i, t in enumerate(row):
                if t not in (0, 1):
                    raise GraphError(f"entry [{j + 1}][{i + 1}] not binary")
            if row[j] != 1:
                raise GraphError(f"demanded link missing: zero diagonal at {j + 1}")

    @staticmethod
    def from_rows(rows: list[list[int]], m: int = 1, n: int = 1) -> "TopologyMatrix":
        return TopologyMatrix(len(rows), tuple(tuple(r) for r in rows), m, n)


@dataclass(frozen=True)
class ConflictGraph:
    """Directed graph over message nodes 1..k, no self-loops."""

    k: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.k < 0:
            raise GraphError("node count must be non-negative")
        for (i, j) in self.edges:
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (1 <= i <= self.k and 1 <= j <= self.k):
                raise GraphError(f"edge ({i}, {j}) out of range 1..{self.k}")

    @staticmethod
    def from_edges(k: int, edges) -> "ConflictGraph":
        return ConflictGraph(k, frozenset((int(i), int(j)) for i, j in edges))

    @property
    def nodes(self) -> range:
        return range(1, self.k + 1)

    @cached_property
    def in_adj(self) -> dict[int, frozenset[int]]:
        acc: dict[int, set[int]] = {v: set() for v in self.nodes}
        for (i, j) in self.edges:
            acc[j].add(i)
        return {v: frozenset(s) for v, s in acc.items()}

    @cached_property
    def out_adj(self) -> dict[int, frozenset[int]]:
        acc: dict[int, set[int]] = {v: set() for v in self.nodes}
        for (i, j) in self.edges:
            acc[i].add(j)
        return {v: frozenset(s) for v, s in acc.items()}

    def reversed_edges(self) -> "ConflictGraph":
        return ConflictGraph(self.k, frozenset((j, i) for (i, j) in self.edges))


@dataclass(frozen=True)
class UndirectedGraph:
    """Undirected simple graph on 1..k; edges stored as (u, v) with u < v."""

    k: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for (u, v) in self.edges:
            if not (1 <= u < v <= self.k):
                raise GraphError(f"bad undirected edge ({u}, {v})")

    @property
    def nodes(self) -> range:
        return range(1, self.k + 1)

    @cached_property
    def adj(self) -> dict[int, frozenset[int]]:
        acc: dict[int, set[int]] = {v: set() for v in self.nodes}
        for (u, v) in self.edges:
            acc[u].add(v)
            acc[v].add(u)
        return {v: frozenset(s) for v, s in acc.items()}

    def degree(self, v: int) -> int:
        return len(self.adj[v])


@dataclass(frozen=True)
class SplitGraph:
    """b-order node splitting of a conflict graph.

    Split node ids are renumbered 1..b*K; pair (v, r) maps to id (v-1)*b + r.
    back_map is carried explicitly so merging never depends on the numbering.
    """

    base: ConflictGraph
    b: int
    graph: ConflictGraph
    back_map: dict[int, int]

    def split_node(self, v: int, r: int) -> int:
        if not (1 <= v <= self.base.k and 1 <= r <= self.b):
            raise GraphError(f"no split node ({v}, {r})")
        return (v - 1) * self.b + r

    def split_pair(self, node: int) -> tuple[int, int]:
        v = self.back_map[node]
        return v, node - (v - 1) * self.b


def build_conflict_graph(t: TopologyMatrix) -> ConflictGraph:
    """Edge (i, j) present iff i != j and t[j][i] = 1."""
    edges = set()
    for j in range(t.k):
        for i in range(t.k):
            if i != j and t.entries[j][i] == 1:
                edges.add((i + 1, j + 1))
    return ConflictGraph(t.k, frozenset(edges))


def in_neighborhood(g: ConflictGraph, j: int, closed: bool = False) -> frozenset[int]:
    """Open in-neighborhood of j, or the closed variant including j itself."""
    if not (1 <= j <= g.k):
        raise GraphError(f"unknown node {j}")
    nbrs = g.in_adj[j]
    return nbrs | {j} if closed else nbrs


def complement(g: ConflictGraph) -> ConflictGraph:
    edges = frozenset(
        (i, j)
        for i in g.nodes
        for j in g.nodes
        if i != j and (i, j) not in g.edges
    )
    return ConflictGraph(g.k, edges)


def node_split(g: ConflictGraph, b: int) -> SplitGraph:
    """Split each node into b mutually bidirected copies; lift every base edge to b^2 copies."""
    if b < 1:
        raise GraphError("split order must be >= 1")
    back: dict[int, int] = {}
    for v in g.nodes:
        for r in range(1, b + 1):
            back[(v - 1) * b + r] = v
    edges: set[tuple[int, int]] = set()
    for (u, v) in g.edges:
        for i in range(1, b + 1):
            for j in range(1, b + 1):
                edges.add(((u - 1) * b + i, (v - 1) * b + j))
    for v in g.nodes:
        for i in range(1, b + 1):
            for j in range(1, b + 1):
                if i != j:
                    edges.add(((v - 1) * b + i, (v - 1) * b + j))
    return SplitGraph(g, b, ConflictGraph(g.k * b, frozenset(edges)), back)


def merge_split_assignment(sg: SplitGraph, split_assign: dict[int, int]) -> dict[int, list[int]]:
    """Collect each base node's b split assignments, ordered by split index r."""
    merged: dict[int, list[int]] = {}
    for v in sg.base.nodes:
        vals = []
        for r in range(1, sg.b + 1):
            node = sg.split_node(v, r)
            if node not in split_assign:
                raise GraphError(f"unassigned split node ({v}, {r})")
            vals.append(split_assign[node])
        merged[v] = vals
    return merged


def underlying_undirected(g: ConflictGraph) -> UndirectedGraph:
    edges = frozenset((min(i, j), max(i, j)) for (i, j) in g.edges)
    return UndirectedGraph(g.k, edges)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def topology_to_json(t: TopologyMatrix) -> str:
    return json.dumps(
        {"k": t.k, "topology": [list(r) for r in t.entries], "m": t.m, "n": t.n}
    )


def topology_from_json(text: str) -> TopologyMatrix:
    obj = json.loads(text)
    return TopologyMatrix.from_rows(obj["topology"], obj.get("m", 1), obj.get("n", 1))


def graph_to_json(g: ConflictGraph) -> str:
    return json.dumps({"nodes": g.k, "edges": sorted([i, j] for (i, j) in g.edges)})


def graph_from_json(text: str) -> ConflictGraph:
    obj = json.loads(text)
    if "topology" in obj:
        return build_conflict_graph(topology_from_json(text))
    return ConflictGraph.from_edges(obj["nodes"], obj["edges"])


def to_dot(g: ConflictGraph, labels: dict[int, str] | None = None) -> str:
    """Deterministic DOT export; labels (e.g. vector/color indices) become node labels."""
    lines = ["digraph conflict {"]
    for v in g.nodes:
        if labels and v in labels:
            lines.append(f'  {v} [label="{v}: {labels[v]}"];')
        else:
            lines.append(f"  {v};")
    for (i, j) in sorted(g.edges):
        lines.append(f"  {i} -> {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
