"""Instance generators: directed Erdos-Renyi conflict graphs and device-to-device
wireless layouts with line-of-sight path loss, thresholded to topology matrices."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .coloring import CHROMATIC_CAP, chromatic_number
from .graphs import ConflictGraph, TopologyMatrix, build_conflict_graph, underlying_undirected

CARRIER_HZ = 2.4e9
ANTENNA_HEIGHT_M = 1.5
ANTENNA_GAIN_DB = -2.5
NOISE_DENSITY_DBM_HZ = -174.0
NOISE_FIGURE_DB = 7.0
BANDWIDTH_HZ = 10e6
TX_POWER_DBM = 30.0
PAIR_DIST_MIN_M = 2.0
PAIR_DIST_MAX_M = 65.0
AREA_M = 1000.0
LIGHT_SPEED = 2.998e8


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class WirelessLayout:
    pairs: tuple[tuple[tuple[float, float], tuple[float, float]], ...]  # (tx, rx) positions
    channel_gain: tuple[tuple[float, ...], ...]  # [j][i] linear-scale gain, source i -> dest j

    def __post_init__(self) -> None:
        for tx, rx in self.pairs:
            for (x, y) in (tx, rx):
                if not (0.0 <= x <= AREA_M and 0.0 <= y <= AREA_M):
                    raise DatasetError("position outside the deployment area")
            d = math.dist(tx, rx)
            if not (PAIR_DIST_MIN_M - 1e-9 <= d <= PAIR_DIST_MAX_M + 1e-9):
                raise DatasetError(f"pair distance {d:.2f} outside [2, 65] m")


def gen_er(k: int, p: float, seed: int = 0) -> ConflictGraph:
    """Directed ER conflict graph: every ordered pair is an edge independently with prob p."""
    if not 0.0 <= p <= 1.0:
        raise DatasetError("edge probability must lie in [0, 1]")
    rng = random.Random(seed)
    edges = set()
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j and rng.random() < p:
                edges.add((i, j))
    return ConflictGraph(k, frozenset(edges))


def los_path_loss_db(distance_m: float) -> float:
    """ITU-R P.1411 line-of-sight lower-bound loss with breakpoint 4 h_tx h_rx / lambda."""
    lam = LIGHT_SPEED / CARRIER_HZ
    rbp = 4.0 * ANTENNA_HEIGHT_M * ANTENNA_HEIGHT_M / lam
    lbp = abs(20.0 * math.log10(lam * lam / (8.0 * math.pi * ANTENNA_HEIGHT_M * ANTENNA_HEIGHT_M)))
    d = max(distance_m, 1e-3)
    if d <= rbp:
        return lbp + 6.0 + 20.0 * math.log10(d / rbp)
    return lbp + 6.0 + 40.0 * math.log10(d / rbp)


def channel_gain_db(distance_m: float) -> float:
    """Transmit power plus both antenna gains minus path loss, in dB(m) scale."""
    return TX_POWER_DBM + 2.0 * ANTENNA_GAIN_DB - los_path_loss_db(distance_m)


def gen_wireless(k: int, target_density: float, seed: int = 0) -> tuple[WirelessLayout, TopologyMatrix]:
    """k tx/rx pairs placed uniformly; cross links above the (1 - density) gain
    quantile become interference entries, so the off-diagonal density matches
    the target up to rounding."""
    if not 0.0 < target_density < 1.0:
        raise DatasetError("target density must lie strictly between 0 and 1")
    rng = random.Random(seed)
    pairs = []
    for _ in range(k):
        tx = (rng.uniform(0, AREA_M), rng.uniform(0, AREA_M))
        while True:
            d = rng.uniform(PAIR_DIST_MIN_M, PAIR_DIST_MAX_M)
            ang = rng.uniform(0, 2 * math.pi)
            rx = (tx[0] + d * math.cos(ang), tx[1] + d * math.sin(ang))
            if 0.0 <= rx[0] <= AREA_M and 0.0 <= rx[1] <= AREA_M:
                break
        pairs.append((tx, rx))
    gains_db = [
        [channel_gain_db(math.dist(pairs[i][0], pairs[j][1])) for i in range(k)]
        for j in range(k)
    ]
    cross = sorted(gains_db[j][i] for j in range(k) for i in range(k) if i != j)
    want = round(target_density * k * (k - 1))
    # threshold at the (1 - density) quantile keeps exactly `want` links on
    threshold = cross[len(cross) - want] if want > 0 else float("inf")
    rows = [
        [1 if (i == j or gains_db[j][i] >= threshold) else 0 for i in range(k)]
        for j in range(k)
    ]
    gains_linear = tuple(tuple(10.0 ** (g / 10.0) for g in row) for row in gains_db)
    layout = WirelessLayout(tuple(pairs), gains_linear)
    return layout, TopologyMatrix.from_rows(rows)


def partition_by_chromatic(
    graphs: list[ConflictGraph], bins: list[int] | None = None, cap: int = CHROMATIC_CAP
) -> dict[int, list[ConflictGraph]]:
    """Bucket graphs by the chromatic number of their underlying undirected graph."""
    out: dict[int, list[ConflictGraph]] = {}
    for g in graphs:
        chi = chromatic_number(underlying_undirected(g), cap)
        if bins is None or chi in bins:
            out.setdefault(chi, []).append(g)
    return out


# ---------------------------------------------------------------------------
# on-disk datasets
# ---------------------------------------------------------------------------

def write_dataset(
    directory: str | Path,
    generator: str,
    params: dict,
    seed: int,
    count: int,
) -> Path:
    """Manifest plus one instance file per graph; fully reproducible from the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"generator": generator, "params": params, "seed": seed, "count": count}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for idx in range(count):
        inst_seed = seed + idx
        if generator == "er":
            g = gen_er(params["k"], params["p"], inst_seed)
            payload = {"nodes": g.k, "edges": sorted([i, j] for (i, j) in g.edges)}
        elif generator == "wireless":
            layout, topo = gen_wireless(params["k"], params["density"], inst_seed)
            payload = {
                "k": topo.k,
                "topology": [list(r) for r in topo.entries],
                "m": topo.m,
                "n": topo.n,
                "layout": {
                    "pairs": [[list(tx), list(rx)] for tx, rx in layout.pairs],
                    "gain_db": [
                        [round(10.0 * math.log10(x), 6) for x in row]
                        for row in layout.channel_gain
                    ],
                },
            }
        else:
            raise DatasetError(f"unknown generator {generator!r}")
        (directory / f"instance_{idx:05d}.json").write_text(json.dumps(payload) + "\n")
    return directory


def read_dataset(directory: str | Path) -> list[ConflictGraph]:
    directory = Path(directory)
    graphs = []
    for path in sorted(directory.glob("instance_*.json")):
        obj = json.loads(path.read_text())
        if "topology" in obj:
            topo = TopologyMatrix.from_rows(obj["topology"], obj.get("m", 1), obj.get("n", 1))
            graphs.append(build_conflict_graph(topo))
        else:
            graphs.append(ConflictGraph.from_edges(obj["nodes"], obj["edges"]))
    return graphs
