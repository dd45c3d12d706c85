"""Policy and value networks plus the PPO trainer for learn-to-defer assignment.

Both networks are 4-layer message-passing stacks with the GCN-normalized
update h(H) = ReLU(H W1 + A_hat H W2) over the deferred-induced subgraph,
followed by a per-node softmax head (policy) and a sum-pooled linear head
(value). Everything runs in float64 on CPU; the parameter count is tiny and
exact gradients matter more than throughput here.
"""
from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field

import torch

from .env import DEFAULT_ITERATION_LIMIT, EnvMode, EnvState, assignment_of, reset, step
from .graphs import ConflictGraph
from .linalg import VectorSet

torch.set_default_dtype(torch.float64)


class AgentError(RuntimeError):
    pass


@dataclass
class AgentConfig:
    hidden: int = 128
    layers: int = 4
    lr: float = 1e-3
    clip_ratio: float = 0.2
    grad_clip: float = 0.2
    value_coef: float = 0.5
    gae_lambda: float = 0.95
    epochs: int = 4
    episodes_per_iter: int = 8
    iterations: int = 300
    limit: int = DEFAULT_ITERATION_LIMIT
    beta: float = 1.0
    seed: int = 0


# ---------------------------------------------------------------------------
# featurization
# ---------------------------------------------------------------------------

def featurize(state: EnvState) -> tuple[torch.Tensor, torch.Tensor, list[int]]:
    """Features and normalized adjacency for the deferred-induced subgraph.

    Each deferred node gets [t/L] ++ sum of one-hot neighbor states over all
    in- and out-neighbors (fixed ones included), S+2 numbers total. The
    adjacency is symmetrized, gains self-loops, and is D^-1/2 B D^-1/2
    normalized.
    """
    if state.terminal:
        raise AgentError("featurize on a terminal state")
    g = state.graph
    s = state.s
    deferred = list(state.deferred)
    feats = torch.zeros(len(deferred), 1 + (s + 1))
    for row, v in enumerate(deferred):
        feats[row, 0] = state.t / state.limit
        for u in sorted(g.in_adj[v] | g.out_adj[v]):
            feats[row, 1 + state.value(u)] += 1.0
    index = {v: i for i, v in enumerate(deferred)}
    b = torch.eye(len(deferred))
    for (i, j) in g.edges:
        if i in index and j in index:
            b[index[i], index[j]] = 1.0
            b[index[j], index[i]] = 1.0
    dinv = torch.diag(b.sum(dim=1).rsqrt())
    return feats, dinv @ b @ dinv, deferred


# ---------------------------------------------------------------------------
# networks
# ---------------------------------------------------------------------------

def _init_weight(rows: int, cols: int, gen: torch.Generator) -> torch.nn.Parameter:
    bound = 1.0 / math.sqrt(rows)
    w = torch.empty(rows, cols)
    w.uniform_(-bound, bound, generator=gen)
    return torch.nn.Parameter(w)


class _Trunk(torch.nn.Module):
    def __init__(self, in_dim: int, hidden: int, layers: int, gen: torch.Generator):
        super().__init__()
        self.w1 = torch.nn.ParameterList()
        self.w2 = torch.nn.ParameterList()
        dim = in_dim
        for _ in range(layers):
            self.w1.append(_init_weight(dim, hidden, gen))
            self.w2.append(_init_weight(dim, hidden, gen))
            dim = hidden

    def forward(self, h: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        for w1, w2 in zip(self.w1, self.w2):
            h = torch.relu(h @ w1 + adj @ (h @ w2))
        return h


class PolicyValueNet(torch.nn.Module):
    """Separate policy and value trunks over the same featurization."""

    def __init__(self, s: int, hidden: int = 128, layers: int = 4, seed: int = 0):
        super().__init__()
        self.s = s
        self.hidden = hidden
        self.layers = layers
        gen = torch.Generator().manual_seed(seed)
        in_dim = 1 + (s + 1)
        self.policy_trunk = _Trunk(in_dim, hidden, layers, gen)
        self.policy_head = _init_weight(hidden, s + 1, gen)
        self.value_trunk = _Trunk(in_dim, hidden, layers, gen)
        self.value_head = _init_weight(hidden, 1, gen)

    def policy_forward(self, feats: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        """Per-node distribution over actions {0..S}; rows sum to one."""
        h = self.policy_trunk(feats, adj)
        return torch.softmax(h @ self.policy_head, dim=1)

    def value_forward(self, feats: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        """Permutation-invariant scalar state value (sum-pooled readout)."""
        if feats.shape[0] == 0:
            return torch.zeros(())
        h = self.value_trunk(feats, adj)
        return (h.sum(dim=0) @ self.value_head).squeeze()


def policy_forward(net: PolicyValueNet, feats: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
    return net.policy_forward(feats, adj)


def value_forward(net: PolicyValueNet, feats: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
    return net.value_forward(feats, adj)


def save_checkpoint(net: PolicyValueNet, path: str, extra: dict | None = None) -> None:
    torch.save(
        {
            "version": 1,
            "s": net.s,
            "hidden": net.hidden,
            "layers": net.layers,
            "state": net.state_dict(),
            "extra": extra or {},
        },
        path,
    )


def load_checkpoint(path: str) -> PolicyValueNet:
    obj = torch.load(path, weights_only=False)
    if obj.get("version") != 1:
        raise AgentError(f"unsupported checkpoint version {obj.get('version')}")
    net = PolicyValueNet(obj["s"], obj["hidden"], obj["layers"])
    net.load_state_dict(obj["state"])
    return net


# ---------------------------------------------------------------------------
# rollouts
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    feats: list[torch.Tensor] = field(default_factory=list)
    adjs: list[torch.Tensor] = field(default_factory=list)
    nodes: list[list[int]] = field(default_factory=list)
    actions: list[torch.Tensor] = field(default_factory=list)
    log_probs: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    final_state: EnvState | None = None

    @property
    def episode_return(self) -> float:
        return sum(self.rewards)

    def advantages(self, lam: float) -> tuple[list[float], list[float]]:
        """GAE with gamma = 1 (episodes are short and undiscounted)."""
        adv: list[float] = [0.0] * len(self.rewards)
        running = 0.0
        next_value = 0.0
        for i in reversed(range(len(self.rewards))):
            delta = self.rewards[i] + next_value - self.values[i]
            running = delta + lam * running
            adv[i] = running
            next_value = self.values[i]
        returns = [a + v for a, v in zip(adv, self.values)]
        return adv, returns


def run_episode(
    g: ConflictGraph,
    net: PolicyValueNet,
    s: int,
    mode: EnvMode,
    seed: int = 0,
    limit: int = DEFAULT_ITERATION_LIMIT,
    palette: VectorSet | None = None,
    channel_groups: dict[int, int] | None = None,
    beta: float = 1.0,
    greedy: bool = False,
) -> Trajectory:
    """One sampled (or greedy) episode under the current policy."""
    gen = torch.Generator().manual_seed(seed)
    state = reset(g, s, mode, limit, palette, channel_groups, beta, seed=seed)
    traj = Trajectory()
    while not state.terminal:
        feats, adj, nodes = featurize(state)
        with torch.no_grad():
            probs = net.policy_forward(feats, adj)
            value = float(net.value_forward(feats, adj))
        if greedy:
            acts = probs.argmax(dim=1)
        else:
            acts = torch.multinomial(probs, 1, generator=gen).squeeze(1)
        logp = float(torch.log(probs[torch.arange(len(nodes)), acts]).sum())
        action = {v: int(a) for v, a in zip(nodes, acts)}
        outcome = step(state, action)
        traj.feats.append(feats)
        traj.adjs.append(adj)
        traj.nodes.append(nodes)
        traj.actions.append(acts)
        traj.log_probs.append(logp)
        traj.rewards.append(outcome.reward)
        traj.values.append(value)
        state = outcome.next
    traj.final_state = state
    return traj


def rollout_best_of(
    g: ConflictGraph,
    net: PolicyValueNet,
    k: int,
    s: int,
    mode: EnvMode,
    seed: int = 0,
    limit: int = DEFAULT_ITERATION_LIMIT,
    palette: VectorSet | None = None,
    channel_groups: dict[int, int] | None = None,
) -> dict[int, int] | None:
    """k independent sampled episodes; best completed assignment wins.

    Ties break toward fewer iterations, then the lowest episode index. None
    when no episode completes.
    """
    if k < 1:
        raise AgentError("k must be >= 1")
    best: tuple[int, int, int] | None = None  # (-fixed, iterations, index)
    best_assign: dict[int, int] | None = None
    for i in range(k):
        traj = run_episode(g, net, s, mode, seed=seed + i, limit=limit,
                           palette=palette, channel_groups=channel_groups)
        final = traj.final_state
        key = (-final.fixed_count, final.t, i)
        if best is None or key < best:
            best = key
            if final.fixed_count == g.k:
                best_assign = assignment_of(final)
            else:
                best_assign = None
    return best_assign


# ---------------------------------------------------------------------------
# PPO
# ---------------------------------------------------------------------------

def ppo_loss(
    net: PolicyValueNet,
    batch: list[Trajectory],
    clip_ratio: float = 0.2,
    value_coef: float = 0.5,
    gae_lambda: float = 0.95,
) -> torch.Tensor:
    """Clipped-surrogate policy loss plus squared-error value loss.

    Advantages are GAE(gamma=1, lambda) estimates, normalized across the whole
    batch.
    """
    all_adv: list[float] = []
    all_ret: list[float] = []
    for traj in batch:
        adv, ret = traj.advantages(gae_lambda)
        all_adv.extend(adv)
        all_ret.extend(ret)
    adv_t = torch.tensor(all_adv)
    if len(all_adv) > 1:
        adv_t = (adv_t - adv_t.mean()) / (adv_t.std() + 1e-8)
    policy_terms = []
    value_terms = []
    i = 0
    for traj in batch:
        for t in range(len(traj.rewards)):
            probs = net.policy_forward(traj.feats[t], traj.adjs[t])
            acts = traj.actions[t]
            logp = torch.log(probs[torch.arange(len(acts)), acts]).sum()
            ratio = torch.exp(logp - traj.log_probs[t])
            surr1 = ratio * adv_t[i]
            surr2 = torch.clamp(ratio, 1 - clip_ratio, 1 + clip_ratio) * adv_t[i]
            policy_terms.append(-torch.min(surr1, surr2))
            value = net.value_forward(traj.feats[t], traj.adjs[t])
            value_terms.append((value - all_ret[i]) ** 2)
            i += 1
    policy_loss = torch.stack(policy_terms).mean()
    value_loss = torch.stack(value_terms).mean()
    return policy_loss + value_coef * value_loss


def ppo_update(
    net: PolicyValueNet,
    batch: list[Trajectory],
    config: AgentConfig,
    optimizer: torch.optim.Optimizer | None = None,
) -> torch.optim.Optimizer:
    """One PPO update over the batch; returns the (possibly fresh) optimizer."""
    if not batch:
        raise AgentError("empty trajectory batch")
    if optimizer is None:
        optimizer = torch.optim.Adam(net.parameters(), lr=config.lr)
    for _ in range(config.epochs):
        loss = ppo_loss(net, batch, config.clip_ratio, config.value_coef, config.gae_lambda)
        if not torch.isfinite(loss):
            raise AgentError(
                f"non-finite PPO loss {loss.item()}; batch returns "
                f"{[traj.episode_return for traj in batch]}"
            )
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(net.parameters(), config.grad_clip)
        optimizer.step()
    return optimizer


@dataclass
class TrainLogRow:
    iteration: int
    mean_return: float
    mean_length: float
    completed_frac: float


def train(
    graphs: list[ConflictGraph],
    s: int,
    mode: EnvMode,
    config: AgentConfig | None = None,
    net: PolicyValueNet | None = None,
) -> tuple[PolicyValueNet, list[TrainLogRow]]:
    """PPO training loop over a graph corpus; returns the net and the curve log."""
    cfg = config or AgentConfig()
    if not graphs:
        raise AgentError("empty training set")
    if net is None:
        net = PolicyValueNet(s, cfg.hidden, cfg.layers, seed=cfg.seed)
    rng = random.Random(cfg.seed)
    optimizer: torch.optim.Optimizer | None = None
    log: list[TrainLogRow] = []
    episode_seed = cfg.seed
    for it in range(cfg.iterations):
        batch = []
        for _ in range(cfg.episodes_per_iter):
            g = rng.choice(graphs)
            episode_seed += 1
            batch.append(
                run_episode(g, net, s, mode, seed=episode_seed, limit=cfg.limit, beta=cfg.beta)
            )
        optimizer = ppo_update(net, batch, cfg, optimizer)
        log.append(
            TrainLogRow(
                it,
                sum(t.episode_return for t in batch) / len(batch),
                sum(len(t.rewards) for t in batch) / len(batch),
                sum(1 for t in batch if t.final_state.fixed_count == t.final_state.graph.k)
                / len(batch),
            )
        )
    return net, log


def write_training_log(log: list[TrainLogRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "mean_return", "mean_length", "completed_frac"])
        for row in log:
            writer.writerow([row.iteration, row.mean_return, row.mean_length, row.completed_frac])
