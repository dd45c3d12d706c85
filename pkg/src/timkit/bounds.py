"""MAIS outer bound on symmetric DoF and the initial coding-dimension selector."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graphs import ConflictGraph, complement

MAIS_CAP = 30


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class DofBound:
    mais_size: int
    bound: Fraction
    witness: tuple[int, ...]


def _induced_out(g: ConflictGraph, nodes: frozenset[int]) -> dict[int, list[int]]:
    return {v: [w for w in g.out_adj[v] if w in nodes] for v in nodes}


def find_cycle(g: ConflictGraph, nodes: frozenset[int]) -> list[int] | None:
    """Some directed cycle in the induced subgraph, or None if acyclic.

    Nodes with zero in- or out-degree are peeled repeatedly; the remainder is
    nonempty iff a cycle exists, and each of its nodes keeps an out-edge
    inside the remainder, so a walk along minimum out-neighbors closes a cycle.
    """
    out = _induced_out(g, nodes)
    indeg = {v: 0 for v in nodes}
    for v in nodes:
        for w in out[v]:
            indeg[w] += 1
    outdeg = {v: len(out[v]) for v in nodes}
    queue = [v for v in nodes if indeg[v] == 0 or outdeg[v] == 0]
    remainder = set(nodes)
    while queue:
        v = queue.pop()
        if v not in remainder:
            continue
        remainder.discard(v)
        for w in out[v]:
            if w in remainder:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        for u in g.in_adj[v]:
            if u in remainder:
                outdeg[u] -= 1
                if outdeg[u] == 0:
                    queue.append(u)
    if not remainder:
        return None
    for u in sorted(remainder):
        for w in out[u]:
            if w in remainder and w > u and u in g.out_adj[w]:
                return [u, w]  # 2-cycles give the smallest branching factor
    start = min(remainder)
    seen: dict[int, int] = {}
    path: list[int] = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = min(w for w in out[v] if w in remainder)
    return path[seen[v]:]


def is_acyclic_induced(g: ConflictGraph, nodes) -> bool:
    return find_cycle(g, frozenset(nodes)) is None


def _matching_bound(g: ConflictGraph, nodes: frozenset[int]) -> int:
    """Greedy matching over 2-cycles: each matched pair costs at least one node."""
    used: set[int] = set()
    m = 0
    for u in sorted(nodes):
        if u in used:
            continue
        for w in sorted(g.out_adj[u]):
            if w > u and w in nodes and w not in used and u in g.out_adj[w]:
                used.add(u)
                used.add(w)
                m += 1
                break
    return m


def _max_acyclic_size(g: ConflictGraph, nodes: frozenset[int]) -> int:
    best = 0
    seen: set[frozenset[int]] = set()

    def search(cand: frozenset[int]) -> None:
        nonlocal best
        if len(cand) <= best or cand in seen:
            return
        seen.add(cand)
        if len(cand) - _matching_bound(g, cand) <= best:
            return
        cyc = find_cycle(g, cand)
        if cyc is None:
            best = len(cand)
            return
        for v in cyc:
            search(cand - {v})

    search(nodes)
    return best


def _exists_acyclic(g: ConflictGraph, forced: frozenset[int], cand: frozenset[int], target: int) -> bool:
    """Is there an acyclic induced set of size >= target containing forced, inside forced|cand?"""
    # a 2-cycle against a forced node decides its partner; inside forced it decides everything
    drop: set[int] = set()
    for u in forced:
        for w in g.out_adj[u]:
            if u in g.out_adj[w]:
                if w in forced:
                    return False
                if w in cand:
                    drop.add(w)
    cand = cand - drop
    total = len(forced) + len(cand)
    if total < target or total - _matching_bound(g, cand) < target:
        return False
    cyc = find_cycle(g, forced | cand)
    if cyc is None:
        return True
    branch = [v for v in cyc if v not in forced]
    if not branch:
        return False
    return any(_exists_acyclic(g, forced, cand - {v}, target) for v in branch)


def mais(g: ConflictGraph, cap: int = MAIS_CAP) -> DofBound:
    """Exact maximum acyclic induced subgraph of the complement, with witness.

    Branch and bound: branch on the nodes of a found cycle, bound by the best
    size so far. Ties among maximum witnesses are broken by returning the
    lexicographically smallest node set.
    """
    if g.k > cap:
        raise BoundError(f"instance size {g.k} exceeds exact-search cap {cap}")
    if g.k == 0:
        raise BoundError("empty instance")
    gc = complement(g)
    all_nodes = frozenset(gc.nodes)
    size = _max_acyclic_size(gc, all_nodes)
    witness: list[int] = []
    rejected: set[int] = set()
    for v in sorted(all_nodes):
        if len(witness) == size:
            break
        later = frozenset(u for u in all_nodes if u > v and u not in rejected)
        if _exists_acyclic(gc, frozenset(witness) | {v}, later, size):
            witness.append(v)
        else:
            rejected.add(v)
    return DofBound(size, Fraction(1, size), tuple(witness))


def select_initial_c(g: ConflictGraph, b: int) -> int:
    """Smallest C >= b with b/C <= the MAIS bound, i.e. max(b, b * mais_size)."""
    if b < 1:
        raise BoundError("streams per message must be >= 1")
    return max(b, b * mais(g).mais_size)
