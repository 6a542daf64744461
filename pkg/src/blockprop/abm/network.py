from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from ..params import ParameterError

RNG_ALGORITHM = "philox4x64-10 (numpy.random.Philox)"


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; identical seeds give identical streams everywhere."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class MinerNetwork:
    """Random k-regular miner graph; ``adjacency[j]`` lists j's neighbours in sorted order."""

    n: int
    k: int
    adjacency: np.ndarray  # (n, k) int64
    seed: int

    def degree_histogram(self) -> dict[int, int]:
        degrees = np.array([len(set(row.tolist())) for row in self.adjacency])
        values, counts = np.unique(degrees, return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))

    def neighbours(self, j: int) -> np.ndarray:
        return self.adjacency[j]


def build_network(n: int, k: int, seed: int) -> MinerNetwork:
    """Uniform random simple k-regular graph on ``n`` miners.

    The pairing is delegated to networkx; its seed is drawn from a Philox
    stream so the whole graph is a function of ``(n, k, seed)``.
    """
    if k < 1 or k >= n:
        raise ParameterError("k_adjacent", f"need 1 <= k < n, got k={k}, n={n}")
    if (n * k) % 2:
        raise ParameterError("k_adjacent", f"n*k must be even for a k-regular graph (n={n}, k={k})")
    nx_seed = int(make_rng(seed).integers(0, 2**31 - 1))
    try:
        g = nx.random_regular_graph(k, n, seed=nx_seed)
    except nx.NetworkXError as exc:
        raise ParameterError("seed", f"pairing failed ({exc}); try a different seed") from exc
    adjacency = np.array([sorted(g.adj[v]) for v in range(n)], dtype=np.int64).reshape(n, k)
    return MinerNetwork(n, k, adjacency, int(seed))
