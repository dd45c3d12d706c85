"""Interference-alignment engine.

Verifies coding schemes against the rank condition rank(S_j) - rank(I_j) = b
at every node (exact for single-antenna receivers, Kronecker-lifted generic
ranks otherwise), synthesizes schemes from (fractional) local colorings,
searches subspace schemes over binary candidate vectors, and runs the method
ladder TDMA -> OSIA -> OVIA -> SSIA -> SVIA with simplest-method attribution.

Combining matrices are never materialized: a scheme whose precoders satisfy
the rank condition is zero-forcing decodable, so the per-node rank identities
are the whole verification.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .bounds import DofBound, mais
from .coloring import (
    CHROMATIC_CAP,
    compute_local_width,
    fractional_local_coloring,
    is_proper,
    local_coloring_exact,
    optimal_coloring,
)
from .graphs import ConflictGraph, node_split, underlying_undirected
from .linalg import (
    BINARY_CAP,
    IntSpan,
    Vector,
    VectorSet,
    gen_binary_vectors,
    gen_generic_vectors,
    kron_lift,
    rank_of_columns,
    sample_channel,
)

METHOD_SIMPLICITY = ("TDMA", "OSIA", "OVIA", "SSIA", "SVIA", "SIMO_SCALAR", "SIMO_VECTOR")


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class CodingScheme:
    c: int
    b: int
    n: int
    assignment: dict[int, tuple[Vector, ...]]
    method: str

    @property
    def dof(self) -> Fraction:
        return Fraction(self.b, self.c)


@dataclass(frozen=True)
class VerifyReport:
    valid: bool
    per_node: tuple[tuple[int, int, int], ...]  # (node, rank_S, rank_I)
    dof: Fraction


def _check_shape(g: ConflictGraph, scheme: CodingScheme) -> None:
    if scheme.b > scheme.c:
        raise SchemeError(f"b={scheme.b} exceeds coding dimension c={scheme.c}")
    if set(scheme.assignment) != set(g.nodes):
        raise SchemeError("assignment does not cover the node set")
    for v, vecs in scheme.assignment.items():
        if len(vecs) != scheme.b:
            raise SchemeError(f"node {v} carries {len(vecs)} vectors, expected b={scheme.b}")
        for vec in vecs:
            if len(vec) != scheme.c:
                raise SchemeError(f"node {v} vector dimension != c={scheme.c}")


def verify(g: ConflictGraph, scheme: CodingScheme, trials: int = 3, seed: int = 0) -> VerifyReport:
    """Check rank(S_j) - rank(I_j) = b at every node.

    Single-antenna ranks are exact; for n > 1 each trial draws one integer
    channel per source in the closed in-neighborhood and the generic rank is
    the maximum over trials.
    """
    _check_shape(g, scheme)
    per_node = []
    valid = True
    rng = random.Random(seed)
    for j in sorted(g.nodes):
        own = list(scheme.assignment[j])
        if rank_of_columns(own) != scheme.b:
            valid = False
        nbrs = sorted(g.in_adj[j])
        if scheme.n == 1:
            interference = [v for i in nbrs for v in scheme.assignment[i]]
            rank_i = rank_of_columns(interference)
            rank_s = rank_of_columns(interference + own)
        else:
            rank_i = 0
            rank_s = 0
            for _ in range(trials):
                chans = {i: sample_channel(scheme.n, rng) for i in nbrs + [j]}
                cols_i = [kron_lift(chans[i], v) for i in nbrs for v in scheme.assignment[i]]
                cols_s = cols_i + [kron_lift(chans[j], v) for v in own]
                rank_i = max(rank_i, rank_of_columns(cols_i))
                rank_s = max(rank_s, rank_of_columns(cols_s))
        per_node.append((j, rank_s, rank_i))
        if rank_s - rank_i != scheme.b:
            valid = False
    return VerifyReport(valid, tuple(per_node), scheme.dof)


def report_to_dict(report: VerifyReport) -> dict:
    return {
        "valid": report.valid,
        "dof": str(report.dof),
        "per_node": [
            {"node": j, "rank_S": rs, "rank_I": ri} for (j, rs, ri) in report.per_node
        ],
    }


def scheme_to_dict(scheme: CodingScheme) -> dict:
    return {
        "c": scheme.c,
        "b": scheme.b,
        "n": scheme.n,
        "method": scheme.method,
        "assignment": {str(v): [list(vec) for vec in vecs] for v, vecs in sorted(scheme.assignment.items())},
        "dof": str(scheme.dof),
    }


def scheme_from_dict(obj: dict) -> CodingScheme:
    assignment = {
        int(v): tuple(tuple(int(x) for x in vec) for vec in vecs)
        for v, vecs in obj["assignment"].items()
    }
    return CodingScheme(obj["c"], obj["b"], obj.get("n", 1), assignment, obj.get("method", "SSIA"))


# ---------------------------------------------------------------------------
# synthesis from colorings
# ---------------------------------------------------------------------------

def scheme_from_coloring(
    coloring: dict[int, int] | dict[int, list[int]],
    c: int,
    b: int,
    n: int = 1,
    g: ConflictGraph | None = None,
    method: str | None = None,
) -> CodingScheme:
    """Map colors to generic (MDS) vectors: color i becomes vector i.

    Validity is inherited from the coloring: a node's vector is distinct and
    linearly independent from everything assigned in its in-neighborhood as
    long as the local width stays within c. When g is given, properness and
    width are checked up front.
    """
    lists = {v: list(cs) if isinstance(cs, (list, tuple)) else [cs] for v, cs in coloring.items()}
    for v, cs in lists.items():
        if len(cs) != b or len(set(cs)) != b:
            raise SchemeError(f"node {v} needs {b} distinct colors, got {cs}")
    if g is not None:
        flat = {v: set(cs) for v, cs in lists.items()}
        for (i, j) in g.edges:
            if flat[i] & flat[j]:
                raise SchemeError(f"adjacent nodes {i}, {j} share a color")
        width = 0
        for j in g.nodes:
            seen = set(flat[j])
            for i in g.in_adj[j]:
                seen |= flat[i]
            width = max(width, len(seen))
        if width > c:
            raise SchemeError(f"local width {width} exceeds c={c}")
    palette = sorted({col for cs in lists.values() for col in cs})
    vectors = gen_generic_vectors(c, max(len(palette), c))
    index = {col: i for i, col in enumerate(palette)}
    assignment = {v: tuple(vectors[index[col]] for col in cs) for v, cs in lists.items()}
    if method is None:
        method = "OSIA" if b == 1 else "OVIA"
    return CodingScheme(c, b, n, assignment, method)


def scheme_from_assignment(
    assignment: dict[int, int], palette: VectorSet, n: int, method: str
) -> CodingScheme:
    """Scalar scheme from a node -> palette-index map (1-based indices)."""
    vecs = {v: (palette[idx - 1],) for v, idx in assignment.items()}
    return CodingScheme(palette.dim, 1, n, vecs, method)


def tdma_scheme(g: ConflictGraph, cap: int = CHROMATIC_CAP) -> CodingScheme:
    """Orthogonal access: chi slots, node colored i transmits on basis vector e_i."""
    col = optimal_coloring(underlying_undirected(g), cap)
    chi = col.palette_size
    basis = [tuple(1 if p == i else 0 for p in range(chi)) for i in range(chi)]
    assignment = {v: (basis[col.colors[v] - 1],) for v in g.nodes}
    return CodingScheme(chi, 1, 1, assignment, "TDMA")


# ---------------------------------------------------------------------------
# subspace search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchOutcome:
    scheme: CodingScheme | None
    exhausted: bool  # True: the whole space was searched (failure is a proof)
    expansions: int


class _Budget(Exception):
    pass


def subspace_search(
    g: ConflictGraph,
    b: int,
    c: int,
    n: int = 1,
    budget: int = 25_000,
    trials: int = 2,
    seed: int = 0,
) -> SearchOutcome:
    """Backtracking assignment of binary vectors satisfying the rank condition.

    Vector IA is reduced to scalar assignment on the b-order split graph, with
    split copies of one source sharing that source's channel. Nodes are filled
    in decreasing in-degree order, candidates in increasing bit-pattern order,
    and any partial assignment in which some assigned node already fails
    rank(S) - rank(I) = 1 is pruned: its deficiency can only worsen as more
    in-neighbors commit. A None scheme with exhausted=True is therefore an
    infeasibility proof; exhausted=False means the node-expansion budget ran out.
    """
    if c > BINARY_CAP:
        raise SchemeError(f"c={c} exceeds binary enumeration cap {BINARY_CAP}")
    if b < 1:
        raise SchemeError("b must be >= 1")
    if b > 1:
        sg = node_split(g, b)
        work = sg.graph
        group = sg.back_map
    else:
        sg = None
        work = g
        group = {v: v for v in g.nodes}
    cands = gen_binary_vectors(c).vectors
    order = sorted(work.nodes, key=lambda v: (-len(work.in_adj[v]), v))
    lift = n > 1
    if lift:
        # small channel entries keep the exact elimination cheap during the
        # search; completed assignments are re-verified at full range below
        rng = random.Random(seed)
        chans = [
            {grp: tuple(rng.randrange(1, 10_001) for _ in range(n)) for grp in set(group.values())}
            for _ in range(trials)
        ]

    assign: dict[int, Vector] = {}
    expansions = 0

    def node_ok(j: int) -> bool:
        nbrs = [i for i in work.in_adj[j] if i in assign]
        if not lift:
            span = IntSpan(c)
            for i in sorted(nbrs):
                span.add(assign[i])
            return not span.contains(assign[j])
        rank_i = 0
        rank_s = 0
        for t in range(trials):
            ch = chans[t]
            cols = [kron_lift(ch[group[i]], assign[i]) for i in sorted(nbrs)]
            rank_i = max(rank_i, rank_of_columns(cols))
            cols.append(kron_lift(ch[group[j]], assign[j]))
            rank_s = max(rank_s, rank_of_columns(cols))
        return rank_s - rank_i == 1

    def to_scheme() -> CodingScheme:
        if sg is not None:
            merged = {
                v: tuple(assign[sg.split_node(v, r)] for r in range(1, b + 1))
                for v in g.nodes
            }
            method = "SVIA" if n == 1 else "SIMO_VECTOR"
        else:
            merged = {v: (assign[v],) for v in g.nodes}
            method = "SSIA" if n == 1 else "SIMO_SCALAR"
        return CodingScheme(c, b, n, merged, method)

    solution: list[CodingScheme] = []

    def extend(depth: int) -> bool:
        nonlocal expansions
        if depth == len(order):
            candidate = to_scheme()
            if not lift or verify(g, candidate, trials=3, seed=seed).valid:
                solution.append(candidate)
                return True
            return False
        v = order[depth]
        watchers = [v] + [w for w in sorted(work.out_adj[v]) if w in assign]
        for vec in cands:
            expansions += 1
            if expansions > budget:
                raise _Budget
            assign[v] = vec
            if all(node_ok(j) for j in watchers):
                if extend(depth + 1):
                    return True
            del assign[v]
        return False

    try:
        found = extend(0)
    except _Budget:
        return SearchOutcome(None, False, expansions)
    if not found:
        return SearchOutcome(None, True, expansions)
    return SearchOutcome(solution[0], True, expansions)


# ---------------------------------------------------------------------------
# SIMO combinatorial check
# ---------------------------------------------------------------------------

def simo_scalar_check(g: ConflictGraph, assignment: dict[int, int], c: int, n: int) -> bool:
    """One-to-one SIMO validity over a generic palette.

    Each node may be pointed to by at most n-1 nodes carrying its own vector,
    and each closed in-neighborhood may hold at most c distinct vectors.
    """
    for j in g.nodes:
        own = assignment[j]
        same = sum(1 for i in g.in_adj[j] if assignment[i] == own)
        if same > n - 1:
            return False
        distinct = {own} | {assignment[i] for i in g.in_adj[j]}
        if len(distinct) > c:
            return False
    return True


# ---------------------------------------------------------------------------
# method ladder
# ---------------------------------------------------------------------------

@dataclass
class LadderConfig:
    max_b: int = 2
    budget: int = 25_000
    trials: int = 3
    seed: int = 0
    chromatic_cap: int = CHROMATIC_CAP
    binary_cap: int = BINARY_CAP
    simo_vector: bool = False


@dataclass(frozen=True)
class LadderResult:
    scheme: CodingScheme
    method: str
    bound: DofBound

    @property
    def dof(self) -> Fraction:
        return self.scheme.dof


def best_scheme(g: ConflictGraph, n: int = 1, config: LadderConfig | None = None) -> LadderResult:
    """Run the method ladder and return the best scheme, attributed to the
    simplest method achieving its DoF (TDMA < OSIA < OVIA < SSIA < SVIA).

    Each stage starts at the C-selector value (smallest C with b/C within the
    MAIS bound) and raises C until it succeeds or b/C sinks to the DoF already
    achieved by a simpler stage. Later stages therefore only ever claim strict
    improvements. With n > 1 the single-antenna result is inherited (any valid
    scheme stays valid with extra receive antennas) and a SIMO scalar search
    runs on top.
    """
    cfg = config or LadderConfig()
    if n < 1:
        raise SchemeError("antenna count must be >= 1")
    bound = mais(g)
    base = tdma_scheme(g, cfg.chromatic_cap)
    best: CodingScheme = base
    method = "TDMA"

    # OSIA: exact local coloring, C from the selector upward
    c0 = bound.mais_size
    c_val = max(1, c0)
    while Fraction(1, c_val) > best.dof:
        col = local_coloring_exact(g, c_val, cfg.chromatic_cap)
        if col is not None:
            best = scheme_from_coloring(col.colors, c_val, 1, 1, g=g, method="OSIA")
            method = "OSIA"
            break
        c_val += 1

    # OVIA: fractional local coloring on the split graph
    for b in range(2, cfg.max_b + 1):
        if g.k * b > cfg.chromatic_cap:
            break
        c_val = max(b, b * bound.mais_size)
        while Fraction(b, c_val) > best.dof:
            frac = fractional_local_coloring(g, b, c_val, cfg.chromatic_cap)
            if frac is not None:
                best = scheme_from_coloring(frac, c_val, b, 1, g=g, method="OVIA")
                method = "OVIA"
                break
            c_val += 1

    # SSIA: subspace search over binary vectors
    c_val = max(1, bound.mais_size)
    while Fraction(1, c_val) > best.dof and c_val <= cfg.binary_cap:
        out = subspace_search(g, 1, c_val, 1, cfg.budget, seed=cfg.seed)
        if out.scheme is not None:
            best = out.scheme
            method = "SSIA"
            break
        c_val += 1

    # SVIA: subspace search on the split graph
    for b in range(2, cfg.max_b + 1):
        c_val = max(b, b * bound.mais_size)
        while Fraction(b, c_val) > best.dof and c_val <= cfg.binary_cap:
            out = subspace_search(g, b, c_val, 1, cfg.budget, seed=cfg.seed)
            if out.scheme is not None:
                best = out.scheme
                method = "SVIA"
                break
            c_val += 1

    if n > 1:
        c_val = 1
        while Fraction(1, c_val) > best.dof and c_val <= cfg.binary_cap:
            out = subspace_search(g, 1, c_val, n, cfg.budget, seed=cfg.seed)
            if out.scheme is not None:
                best = out.scheme
                method = "SIMO_SCALAR"
                break
            c_val += 1
        if cfg.simo_vector:
            for b in range(2, cfg.max_b + 1):
                c_val = b
                while Fraction(b, c_val) > best.dof and c_val <= cfg.binary_cap:
                    out = subspace_search(g, b, c_val, n, cfg.budget, seed=cfg.seed)
                    if out.scheme is not None:
                        best = out.scheme
                        method = "SIMO_VECTOR"
                        break
                    c_val += 1

    return LadderResult(best, method, bound)
