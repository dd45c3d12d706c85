"""Coloring machinery: SLI and TabuCol heuristics, exact chromatic number,
exact local coloring, and fractional local coloring via node splitting."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .graphs import ConflictGraph, SplitGraph, UndirectedGraph, merge_split_assignment, node_split, underlying_undirected

CHROMATIC_CAP = 40


class ColoringError(ValueError):
    pass


@dataclass(frozen=True)
class Coloring:
    colors: dict[int, int]
    palette_size: int
    local_width: int | None = None


def compute_local_width(g: ConflictGraph, colors: dict[int, int]) -> int:
    """Max distinct colors over closed in-neighborhoods."""
    width = 0
    for j in g.nodes:
        seen = {colors[j]} | {colors[i] for i in g.in_adj[j]}
        width = max(width, len(seen))
    return width


def is_proper(g: UndirectedGraph, colors: dict[int, int]) -> bool:
    return all(colors[u] != colors[v] for (u, v) in g.edges)


def check_coloring(g: ConflictGraph, coloring: Coloring, c_target: int | None = None) -> bool:
    """Independent validity check: properness, palette range, local width."""
    und = underlying_undirected(g)
    if set(coloring.colors) != set(g.nodes):
        return False
    if not all(1 <= c <= coloring.palette_size for c in coloring.colors.values()):
        return False
    if not is_proper(und, coloring.colors):
        return False
    if c_target is not None and compute_local_width(g, coloring.colors) > c_target:
        return False
    return True


# ---------------------------------------------------------------------------
# heuristics
# ---------------------------------------------------------------------------

def _smallest_last_order(g: UndirectedGraph, rng: random.Random) -> list[int]:
    deg = {v: g.degree(v) for v in g.nodes}
    alive = set(g.nodes)
    removal: list[int] = []
    while alive:
        dmin = min(deg[v] for v in alive)
        pick = rng.choice(sorted(v for v in alive if deg[v] == dmin))
        removal.append(pick)
        alive.discard(pick)
        for u in g.adj[pick]:
            if u in alive:
                deg[u] -= 1
    removal.reverse()
    return removal


def _try_interchange(g: UndirectedGraph, colors: dict[int, int], v: int) -> bool:
    """Standard two-color Kempe interchange freeing some color for v.

    For a color pair (a, b): if no component of the {a, b}-induced subgraph
    touches both an a-colored and a b-colored neighbor of v, recolor the
    components holding a-colored neighbors, freeing a for v.
    """
    nbr_by_color: dict[int, list[int]] = {}
    for u in g.adj[v]:
        if u in colors:
            nbr_by_color.setdefault(colors[u], []).append(u)
    used = sorted(nbr_by_color)
    for a in used:
        for b in used:
            if a >= b:
                continue
            two = {u for u, c in colors.items() if c in (a, b)}
            comp_id: dict[int, int] = {}
            for u in two:
                if u in comp_id:
                    continue
                cid = len(comp_id)
                stack = [u]
                while stack:
                    x = stack.pop()
                    if x in comp_id:
                        continue
                    comp_id[x] = cid
                    stack.extend(y for y in g.adj[x] if y in two and y not in comp_id)
            comps_a = {comp_id[u] for u in nbr_by_color[a]}
            comps_b = {comp_id[u] for u in nbr_by_color[b]}
            if comps_a & comps_b:
                continue
            swap = {a: b, b: a}
            for u in two:
                if comp_id[u] in comps_a:
                    colors[u] = swap[colors[u]]
            colors[v] = a
            return True
    return False


def sli_greedy(g: UndirectedGraph, seed: int = 0) -> Coloring:
    """Smallest-last sequential coloring with two-color interchange."""
    rng = random.Random(seed)
    order = _smallest_last_order(g, rng)
    colors: dict[int, int] = {}
    palette = 0
    for v in order:
        taken = {colors[u] for u in g.adj[v] if u in colors}
        free = next((c for c in range(1, palette + 1) if c not in taken), None)
        if free is not None:
            colors[v] = free
            continue
        if palette >= 2 and _try_interchange(g, colors, v):
            continue
        palette += 1
        colors[v] = palette
    return Coloring(colors, palette)


def tabucol(g: UndirectedGraph, k: int, max_iter: int = 1000, seed: int = 0) -> Coloring | None:
    """Tabu local search over k-colorings; returns None when the budget runs out.

    Moves recolor one endpoint of a conflicting edge; the reverse move is tabu
    for 0.6 * conflicts + uniform{0..9} iterations, with aspiration on new bests.
    """
    if k < 1:
        raise ColoringError("palette size must be >= 1")
    rng = random.Random(seed)
    colors = {v: rng.randint(1, k) for v in g.nodes}

    def conflicts(cols: dict[int, int]) -> int:
        return sum(1 for (u, v) in g.edges if cols[u] == cols[v])

    current = conflicts(colors)
    best = current
    tabu: dict[tuple[int, int], int] = {}
    for it in range(max_iter):
        if current == 0:
            return Coloring(dict(colors), k)
        conflicted = sorted({x for (u, v) in g.edges if colors[u] == colors[v] for x in (u, v)})
        best_move = None
        best_delta = None
        for v in conflicted:
            old = colors[v]
            same = {c: 0 for c in range(1, k + 1)}
            for u in g.adj[v]:
                same[colors[u]] += 1
            for c in range(1, k + 1):
                if c == old:
                    continue
                delta = same[c] - same[old]
                is_tabu = tabu.get((v, c), -1) >= it
                if is_tabu and current + delta >= best:
                    continue
                if best_delta is None or delta < best_delta:
                    best_delta = delta
                    best_move = (v, c)
        if best_move is None:
            continue
        v, c = best_move
        tabu[(v, colors[v])] = it + int(0.6 * current) + rng.randint(0, 9)
        colors[v] = c
        current += best_delta
        best = min(best, current)
    if current == 0:
        return Coloring(dict(colors), k)
    return None


# ---------------------------------------------------------------------------
# exact solvers
# ---------------------------------------------------------------------------

def _greedy_clique(g: UndirectedGraph, seed: int = 0) -> list[int]:
    best: list[int] = []
    rng = random.Random(seed)
    starts = sorted(g.nodes, key=lambda v: -g.degree(v))[:8]
    for start in starts:
        clique = [start]
        cand = set(g.adj[start])
        while cand:
            pool = sorted(cand, key=lambda v: (-len(g.adj[v] & cand), v))
            v = pool[0] if rng.random() < 0.9 else rng.choice(pool)
            clique.append(v)
            cand &= g.adj[v]
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def _k_colorable(g: UndirectedGraph, k: int) -> dict[int, int] | None:
    """DSATUR-ordered backtracking k-colorability decision with symmetry breaking."""
    colors: dict[int, int] = {}
    sat: dict[int, set[int]] = {v: set() for v in g.nodes}

    def pick() -> int | None:
        cand = [v for v in g.nodes if v not in colors]
        if not cand:
            return None
        return max(cand, key=lambda v: (len(sat[v]), g.degree(v), -v))

    def assign(v: int, used_max: int) -> bool:
        if v is None:
            return True
        limit = min(k, used_max + 1)
        for c in range(1, limit + 1):
            if c in sat[v]:
                continue
            colors[v] = c
            touched = [u for u in g.adj[v] if u not in colors and c not in sat[u]]
            for u in touched:
                sat[u].add(c)
            if assign(pick(), max(used_max, c)):
                return True
            for u in touched:
                sat[u].discard(c)
            del colors[v]
        return False

    if assign(pick(), 0):
        return colors
    return None


def chromatic_number(g: UndirectedGraph, cap: int = CHROMATIC_CAP) -> int:
    if g.k > cap:
        raise ColoringError(f"instance size {g.k} exceeds exact cap {cap}")
    if g.k == 0:
        raise ColoringError("empty graph")
    lb = max(1, len(_greedy_clique(g)))
    ub = sli_greedy(g).palette_size
    for k in range(lb, ub):
        if _k_colorable(g, k) is not None:
            return k
    return ub


def optimal_coloring(g: UndirectedGraph, cap: int = CHROMATIC_CAP) -> Coloring:
    chi = chromatic_number(g, cap)
    colors = _k_colorable(g, chi)
    assert colors is not None
    return Coloring(colors, chi)


def local_coloring_exact(g: ConflictGraph, c_target: int, cap: int = CHROMATIC_CAP) -> Coloring | None:
    """Proper coloring of the underlying graph with local width <= c_target.

    Exhaustive DSATUR-ordered backtracking over palettes up to K, pruning any
    partial assignment whose closed in-neighborhood already shows more than
    c_target distinct colors. None means a proof of infeasibility.
    """
    if c_target < 1:
        raise ColoringError("width target must be >= 1")
    if g.k > cap:
        raise ColoringError(f"instance size {g.k} exceeds exact cap {cap}")
    und = underlying_undirected(g)
    colors: dict[int, int] = {}
    sat: dict[int, set[int]] = {v: set() for v in g.nodes}
    # width prune touches node v itself and every node v points to
    watchers = {v: (v,) + tuple(sorted(g.out_adj[v])) for v in g.nodes}

    def width_ok(j: int) -> bool:
        seen = set()
        if j in colors:
            seen.add(colors[j])
        for i in g.in_adj[j]:
            if i in colors:
                seen.add(colors[i])
        return len(seen) <= c_target

    def pick() -> int | None:
        cand = [v for v in g.nodes if v not in colors]
        if not cand:
            return None
        return max(cand, key=lambda v: (len(sat[v]), und.degree(v), -v))

    def assign(v: int | None, used_max: int) -> bool:
        if v is None:
            return True
        limit = min(g.k, used_max + 1)
        for c in range(1, limit + 1):
            if c in sat[v]:
                continue
            colors[v] = c
            if all(width_ok(j) for j in watchers[v]):
                touched = [u for u in und.adj[v] if u not in colors and c not in sat[u]]
                for u in touched:
                    sat[u].add(c)
                if assign(pick(), max(used_max, c)):
                    return True
                for u in touched:
                    sat[u].discard(c)
            del colors[v]
        return False

    if not assign(pick(), 0):
        return None
    palette = max(colors.values())
    return Coloring(dict(colors), palette, compute_local_width(g, colors))


def fractional_local_coloring(
    g: ConflictGraph, b: int, c_target: int, cap: int = CHROMATIC_CAP
) -> dict[int, list[int]] | None:
    """b colors per node with local width <= c_target, via b-order node splitting.

    The intra-split bidirected cliques force the b colors of a node to be
    pairwise distinct, and no two adjacent base nodes share any color.
    """
    if b < 1:
        raise ColoringError("b must be >= 1")
    sg: SplitGraph = node_split(g, b)
    sol = local_coloring_exact(sg.graph, c_target, cap)
    if sol is None:
        return None
    return merge_split_assignment(sg, sol.colors)
