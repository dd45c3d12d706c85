"""Learn-to-defer Markov decision process for vector/color assignment.

State holds one entry per node: 0 means deferred, 1..S picks a palette vector
or color. A step first overwrites the deferred entries with the action, then
cleans up: any node whose constraint is violated drags its closed
in-neighborhood (IA mode) or the conflicting edge endpoints (coloring mode)
back to deferred, cascading inside the same step until a fixed point.
Previously fixed nodes are not protected from rollback.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .graphs import ConflictGraph
from .linalg import IntSpan, VectorSet, kron_lift, rank_of_columns, sample_channel

DEFAULT_ITERATION_LIMIT = 32


class EnvError(ValueError):
    pass


@dataclass(frozen=True)
class EnvMode:
    kind: str  # "ia" | "coloring"
    b: int = 1
    c: int = 0
    n: int = 1

    @staticmethod
    def coloring() -> "EnvMode":
        return EnvMode("coloring")

    @staticmethod
    def ia(b: int, c: int, n: int = 1) -> "EnvMode":
        return EnvMode("ia", b, c, n)


@dataclass(frozen=True)
class EnvState:
    graph: ConflictGraph
    s: int  # palette size
    node_state: tuple[int, ...]  # index 0 holds node 1; 0 = deferred
    t: int
    limit: int
    mode: EnvMode
    palette: VectorSet | None = None
    channel_groups: dict[int, int] | None = None  # split graphs: group by base node
    channels: tuple[dict[int, tuple[int, ...]], ...] = ()
    beta: float = 1.0

    def value(self, v: int) -> int:
        return self.node_state[v - 1]

    @property
    def deferred(self) -> tuple[int, ...]:
        return tuple(v for v in self.graph.nodes if self.value(v) == 0)

    @property
    def fixed_count(self) -> int:
        return sum(1 for x in self.node_state if x != 0)

    @property
    def terminal(self) -> bool:
        return self.t >= self.limit or all(x != 0 for x in self.node_state)


@dataclass(frozen=True)
class StepOutcome:
    next: EnvState
    reward: float
    done: bool
    rolled_back: frozenset[int]
    newly_fixed: frozenset[int]


def reset(
    g: ConflictGraph,
    s: int,
    mode: EnvMode,
    limit: int = DEFAULT_ITERATION_LIMIT,
    palette: VectorSet | None = None,
    channel_groups: dict[int, int] | None = None,
    beta: float = 1.0,
    seed: int = 0,
) -> EnvState:
    """All-deferred initial state.

    Lifted-rank channels (n > 1) are drawn once per episode so that step is a
    pure function of (state, action).
    """
    if s < 1:
        raise EnvError("palette size must be >= 1")
    channels: tuple = ()
    if mode.kind == "ia":
        if palette is None:
            raise EnvError("IA mode needs a vector palette")
        if len(palette) < s:
            raise EnvError("palette smaller than declared size")
        if mode.n > 1:
            rng = random.Random(seed)
            groups = sorted(set((channel_groups or {v: v for v in g.nodes}).values()))
            channels = tuple(
                {grp: sample_channel(mode.n, rng) for grp in groups} for _ in range(2)
            )
    return EnvState(g, s, (0,) * g.k, 0, limit, mode, palette, channel_groups, channels, float(beta))


def _violated_ia(state: EnvState, values: dict[int, int]) -> list[int]:
    """Nodes whose closed in-neighborhood is fully assigned and fails the rank test."""
    g = state.graph
    mode = state.mode
    palette = state.palette
    groups = state.channel_groups or {}
    bad = []
    for j in sorted(g.nodes):
        if values[j] == 0:
            continue
        nbrs = sorted(g.in_adj[j])
        if any(values[i] == 0 for i in nbrs):
            continue
        own = palette[values[j] - 1]
        if mode.n == 1:
            span = IntSpan(palette.dim)
            for i in nbrs:
                span.add(palette[values[i] - 1])
            rank_i = span.rank
            rank_s = rank_i + (0 if span.contains(own) else 1)
        else:
            rank_i = 0
            rank_s = 0
            for ch in state.channels:
                cols = [kron_lift(ch[groups.get(i, i)], palette[values[i] - 1]) for i in nbrs]
                rank_i = max(rank_i, rank_of_columns(cols))
                cols.append(kron_lift(ch[groups.get(j, j)], own))
                rank_s = max(rank_s, rank_of_columns(cols))
        if rank_s - rank_i != mode.b:
            bad.append(j)
    return bad


def _cleanup(state: EnvState, values: dict[int, int]) -> frozenset[int]:
    """Roll violated assignments back to deferred until a fixed point; returns rolled nodes."""
    g = state.graph
    rolled: set[int] = set()
    while True:
        if state.mode.kind == "coloring":
            hit: set[int] = set()
            for (u, v) in sorted(g.edges):
                if values[u] != 0 and values[u] == values[v]:
                    hit.add(u)
                    hit.add(v)
        else:
            hit = set()
            for j in _violated_ia(state, values):
                hit.add(j)
                hit |= set(g.in_adj[j])
        hit = {v for v in hit if values[v] != 0}
        if not hit:
            return frozenset(rolled)
        for v in hit:
            values[v] = 0
        rolled |= hit


def reward_cardinality(prev: EnvState, nxt: EnvState) -> float:
    """(fixed after - fixed before) / K."""
    if prev.graph != nxt.graph:
        raise EnvError("states belong to different graphs")
    return (nxt.fixed_count - prev.fixed_count) / prev.graph.k


def reward_terminal(t: int, limit: int, beta: float = 1.0) -> float:
    """beta * (L - t) / L."""
    if not 0 <= t <= limit:
        raise EnvError("iteration index out of range")
    return beta * (limit - t) / limit


def step(state: EnvState, action: dict[int, int]) -> StepOutcome:
    """Update deferred entries with the action, then clean up violations."""
    if state.terminal:
        raise EnvError("step on a terminal state")
    deferred = set(state.deferred)
    if set(action) != deferred:
        raise EnvError("action keys must be exactly the deferred nodes")
    for v, a in action.items():
        if not 0 <= a <= state.s:
            raise EnvError(f"action value {a} out of range 0..{state.s}")
    values = {v: state.value(v) for v in state.graph.nodes}
    for v, a in action.items():
        values[v] = a
    before_fixed = {v for v in state.graph.nodes if state.value(v) != 0}
    rolled = _cleanup(state, values)
    nxt = replace(
        state,
        node_state=tuple(values[v] for v in state.graph.nodes),
        t=state.t + 1,
    )
    newly = frozenset(
        v for v in state.graph.nodes if values[v] != 0 and v not in before_fixed
    )
    reward = reward_cardinality(state, nxt)
    done = nxt.terminal
    if done:
        reward += reward_terminal(nxt.t, nxt.limit, state.beta)
    return StepOutcome(nxt, reward, done, rolled, newly)


def assignment_of(state: EnvState) -> dict[int, int]:
    """Node -> palette index for a fully assigned state."""
    if any(x == 0 for x in state.node_state):
        raise EnvError("state still has deferred nodes")
    return {v: state.value(v) for v in state.graph.nodes}


def trace_record(action: dict[int, int], outcome: StepOutcome) -> str:
    """One JSON line per step, for debugging and replay."""
    return json.dumps(
        {
            "t": outcome.next.t,
            "action": {str(k): v for k, v in sorted(action.items())},
            "rolled_back": sorted(outcome.rolled_back),
            "newly_fixed": sorted(outcome.newly_fixed),
            "reward": outcome.reward,
            "done": outcome.done,
        }
    )
