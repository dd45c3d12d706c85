"""Exact integer linear algebra for coding-scheme verification.

All ranks are taken over the rationals and computed with fraction-free
(integer-preserving) elimination on arbitrary-precision integers, so every
rank statement is exact. No floating point appears on any rank path.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

BINARY_CAP = 16

Vector = tuple[int, ...]


class LinalgError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise LinalgError("entries shape does not match rows x cols")

    @staticmethod
    def from_rows(rows) -> "IntMatrix":
        rows = [tuple(int(x) for x in r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        return IntMatrix(len(rows), ncols, tuple(rows))

    @staticmethod
    def from_columns(cols) -> "IntMatrix":
        cols = [tuple(int(x) for x in c) for c in cols]
        if not cols:
            return IntMatrix(0, 0, ())
        dim = len(cols[0])
        rows = tuple(tuple(c[r] for c in cols) for r in range(dim))
        return IntMatrix(dim, len(cols), rows)

    def transpose(self) -> "IntMatrix":
        rows = tuple(tuple(self.entries[r][c] for r in range(self.rows)) for c in range(self.cols))
        return IntMatrix(self.cols, self.rows, rows)

    def columns(self) -> list[Vector]:
        return [tuple(self.entries[r][c] for r in range(self.rows)) for c in range(self.cols)]


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination (Bareiss); divisions are exact."""
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    r = 0
    prev = 1
    for c in range(nc):
        piv = None
        for i in range(r, nr):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nr):
            fi = rows[i]
            fr = rows[r]
            mic = fi[c]
            mrc = fr[c]
            for j in range(c + 1, nc):
                fi[j] = (fi[j] * mrc - mic * fr[j]) // prev
            fi[c] = 0
        prev = rows[r][c]
        r += 1
        if r == nr:
            break
    return r


def rank(m: IntMatrix) -> int:
    """Exact rank over the rationals."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return _bareiss_rank([list(r) for r in m.entries])


def rank_of_columns(cols) -> int:
    cols = [list(c) for c in cols]
    if not cols:
        return 0
    return _bareiss_rank(cols)  # rank(A) == rank(A^T)


class IntSpan:
    """Incremental exact span of integer vectors, kept in fraction-free row-echelon form."""

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: list[list[int]] = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, v) -> list[int]:
        w = list(v)
        for row, p in zip(self._rows, self._pivots):
            if w[p] != 0:
                wp = w[p]
                rp = row[p]
                w = [wi * rp - ri * wp for wi, ri in zip(w, row)]
        return w

    def contains(self, v) -> bool:
        return all(x == 0 for x in self._reduce(v))

    def add(self, v) -> bool:
        """Insert v; returns True iff the rank grew."""
        if len(v) != self.dim:
            raise LinalgError(f"vector dimension {len(v)} != {self.dim}")
        w = self._reduce(v)
        for p, x in enumerate(w):
            if x != 0:
                self._rows.append(w)
                self._pivots.append(p)
                return True
        return False

    def copy(self) -> "IntSpan":
        s = IntSpan(self.dim)
        s._rows = [r[:] for r in self._rows]
        s._pivots = self._pivots[:]
        return s


def span_contains(basis: IntMatrix, v) -> bool:
    """True iff v lies in the column span of basis: rank([basis | v]) == rank(basis)."""
    v = tuple(int(x) for x in v)
    if len(v) != basis.rows:
        raise LinalgError(f"vector dimension {len(v)} != basis rows {basis.rows}")
    cols = basis.columns()
    r0 = rank_of_columns(cols)
    return rank_of_columns(cols + [v]) == r0


@dataclass(frozen=True)
class VectorSet:
    dim: int
    vectors: tuple[Vector, ...]
    kind: str  # "binary_all" | "generic_mds"

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, idx: int) -> Vector:
        return self.vectors[idx]


def gen_binary_vectors(c: int, cap: int = BINARY_CAP) -> VectorSet:
    """All 2^c - 1 nonzero 0-1 vectors, ordered by the integer value of the bit pattern."""
    if c < 1:
        raise LinalgError("dimension must be >= 1")
    if c > cap:
        raise LinalgError(f"dimension {c} exceeds cap {cap}")
    vectors = tuple(
        tuple((mask >> bit) & 1 for bit in range(c)) for mask in range(1, 1 << c)
    )
    return VectorSet(c, vectors, "binary_all")


def _verify_mds(vectors: tuple[Vector, ...], c: int, seed: int | None) -> None:
    s = len(vectors)
    if s <= 12:
        subsets = combinations(range(s), c)
    else:
        rng = random.Random(0 if seed is None else seed)
        subsets = (tuple(rng.sample(range(s), c)) for _ in range(200))
    for idx in subsets:
        if rank_of_columns([vectors[i] for i in idx]) != c:
            raise LinalgError(f"MDS verification failed on subset {idx}")


def gen_generic_vectors(c: int, s: int, seed: int | None = None) -> VectorSet:
    """s Vandermonde columns [1, a, a^2, ..., a^(c-1)] with distinct positive nodes a.

    Every c-subset is linearly independent; the property is re-verified at
    construction (exhaustively for s <= 12, on sampled subsets otherwise).
    """
    if s < c:
        raise LinalgError("need at least c vectors")
    if seed is None:
        nodes = list(range(1, s + 1))
    else:
        rng = random.Random(seed)
        nodes = rng.sample(range(1, max(10 * s, 100)), s)
    vectors = tuple(tuple(a**p for p in range(c)) for a in nodes)
    _verify_mds(vectors, c, seed)
    return VectorSet(c, vectors, "generic_mds")


def kron_lift(channel: Vector, v: Vector) -> Vector:
    """Kronecker product channel (n x 1) with vector (c x 1), stacked to length n*c."""
    return tuple(h * x for h in channel for x in v)


def sample_channel(n: int, rng: random.Random) -> Vector:
    return tuple(rng.randrange(1, 2**31) for _ in range(n))


def generic_rank_lifted(
    assignments: list[tuple[int, list[Vector]]],
    c: int,
    trials: int = 3,
    seed: int = 0,
) -> int:
    """Generic rank of the concatenated Kronecker-lifted blocks H_i (x) V_i.

    Each listed interferer gets an independent random integer channel per
    trial; the maximum exact rank over trials equals the generic rank except
    with probability vanishing in the sampling range (Schwartz-Zippel).
    """
    if trials < 1:
        raise LinalgError("trials must be >= 1")
    if not assignments:
        return 0
    ns = {n for n, _ in assignments}
    if len(ns) != 1:
        raise LinalgError("all interferers must share one receive-antenna count")
    n = ns.pop()
    if n < 1:
        raise LinalgError("antenna count must be >= 1")
    for _, vecs in assignments:
        for v in vecs:
            if len(v) != c:
                raise LinalgError("vector dimension mismatch")
    if n == 1:
        # scalar channels only rescale columns; rank is deterministic
        return rank_of_columns([v for _, vecs in assignments for v in vecs])
    rng = random.Random(seed)
    best = 0
    for _ in range(trials):
        cols = []
        for _, vecs in assignments:
            h = sample_channel(n, rng)
            for v in vecs:
                cols.append(kron_lift(h, v))
        best = max(best, rank_of_columns(cols))
    return best
