"""
Artificial follower networks with power-law connection counts.

Every node draws two counts from the shifted power law
``P(k) ∝ (k + 1) ** -exponent`` on ``{0, ..., max_degree}``: how many nodes
follow it and how many nodes it follows. The shift lets ``k = 0`` occur, so
some nodes end up with no connection at all. Partners are chosen uniformly
without replacement among the other nodes, the two edge sets are merged, and
nodes without any connection are pruned.

Edges point in the direction messages travel: ``u -> v`` means ``v`` follows
``u`` and receives what ``u`` posts.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateNetworkError, InvalidDegreeError, InvalidNodeError

__all__ = [
    "NetworkConfig",
    "DirectedGraph",
    "NetworkStats",
    "degree_pmf",
    "sample_degree_sequence",
    "build_graph",
    "prune_isolated",
    "generate_network",
    "compute_stats",
    "reachable_set",
]


@dataclass(frozen=True)
class NetworkConfig:
    node_count: int = 250
    exponent: float = 2.4
    max_degree: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 2:
            raise ConfigError(f"node_count must be an integer >= 2, got {self.node_count!r}")
        if not self.exponent > 1:
            raise ConfigError(f"exponent must be > 1, got {self.exponent!r}")
        if self.max_degree is None:
            object.__setattr__(self, "max_degree", self.node_count - 1)
        if not 1 <= self.max_degree <= self.node_count - 1:
            raise ConfigError(
                f"max_degree must lie in [1, {self.node_count - 1}], got {self.max_degree!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable follower graph.

    ``out_edges[u]`` is the sorted tuple of followers of ``u``. ``seed`` and
    ``exponent`` are provenance metadata carried into the JSON export;
    ``original_ids`` maps retained ids back to pre-pruning ids.
    """

    out_edges: tuple
    seed: Optional[int] = None
    exponent: Optional[float] = None
    original_ids: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.out_edges)
        cleaned = []
        for u, followers in enumerate(self.out_edges):
            fs = tuple(sorted(int(v) for v in followers))
            if len(set(fs)) != len(fs):
                raise ValueError(f"duplicate edge from node {u}")
            for v in fs:
                if v == u:
                    raise ValueError(f"self-loop at node {u}")
                if not 0 <= v < n:
                    raise InvalidNodeError(f"edge {u}->{v} points outside [0, {n})")
            cleaned.append(fs)
        object.__setattr__(self, "out_edges", tuple(cleaned))

    @classmethod
    def from_edges(cls, node_count: int, edges, **meta) -> "DirectedGraph":
        out = [[] for _ in range(node_count)]
        for u, v in edges:
            out[int(u)].append(int(v))
        return cls(tuple(tuple(f) for f in out), **meta)

    @property
    def node_count(self) -> int:
        return len(self.out_edges)

    @property
    def node_ids(self) -> range:
        return range(self.node_count)

    @property
    def edge_count(self) -> int:
        return sum(len(f) for f in self.out_edges)

    def followers(self, node: int) -> tuple:
        self.check_node(node)
        return self.out_edges[node]

    def check_node(self, node) -> None:
        if not isinstance(node, (int, np.integer)) or not 0 <= node < self.node_count:
            raise InvalidNodeError(f"unknown node id {node!r} (graph has {self.node_count} nodes)")

    def out_degrees(self) -> np.ndarray:
        return np.array([len(f) for f in self.out_edges], dtype=np.int64)

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for followers in self.out_edges:
            for v in followers:
                deg[v] += 1
        return deg

    def edges(self) -> Iterator[tuple]:
        """Yield ``(u, v)`` pairs in lexicographic order."""
        for u, followers in enumerate(self.out_edges):
            for v in followers:
                yield (u, v)

    def to_dict(self) -> dict:
        return {
            "nodes": self.node_count,
            "edges": [[u, v] for u, v in self.edges()],
            "seed": self.seed,
            "exponent": self.exponent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "DirectedGraph":
        try:
            n = int(data["nodes"])
            edges = data["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed graph document: {exc}") from exc
        return cls.from_edges(n, edges, seed=data.get("seed"), exponent=data.get("exponent"))

    @classmethod
    def from_json(cls, text: str) -> "DirectedGraph":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """SHA-256 of the canonical JSON export."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


@dataclass(frozen=True)
class NetworkStats:
    retained_nodes: int
    edge_count: int
    mean_out_degree: float
    median_out_degree: float
    max_out_degree: int
    # None when no ordered pair (u, v) with v reachable from u exists.
    average_path_length: Optional[float]
    reachable_pairs: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def degree_pmf(exponent: float, max_degree: int) -> np.ndarray:
    """Probability mass of the shifted power law on ``0..max_degree``."""
    k = np.arange(max_degree + 1, dtype=np.float64)
    weights = (k + 1.0) ** -exponent
    return weights / weights.sum()


def sample_degree_sequence(config: NetworkConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ``config.node_count`` connection counts by inverse-CDF sampling."""
    cdf = np.cumsum(degree_pmf(config.exponent, config.max_degree))
    cdf[-1] = 1.0
    u = rng.random(config.node_count)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def _pick_partners(degrees, rng):
    n = len(degrees)
    picked = []
    for i, d in enumerate(degrees):
        if d < 0 or d > n - 1:
            raise InvalidDegreeError(f"node {i} asks for {d} partners among {n - 1} other nodes")
        if d == 0:
            picked.append(())
            continue
        picks = rng.choice(n - 1, size=d, replace=False)
        # skip over i itself
        picks = picks + (picks >= i)
        picked.append(picks.tolist())
    return picked


def build_graph(
    degrees: Sequence[int],
    rng: np.random.Generator,
    followee_degrees: Optional[Sequence[int]] = None,
) -> DirectedGraph:
    """Wire up a graph from sampled connection counts.

    Node ``i`` gets exactly ``degrees[i]`` distinct followers chosen uniformly
    from the other nodes. If ``followee_degrees`` is given, node ``i`` also
    follows ``followee_degrees[i]`` distinct uniformly chosen nodes; an edge
    picked from both sides is kept once.
    """
    degrees = [int(d) for d in degrees]
    n = len(degrees)
    out = [set(fs) for fs in _pick_partners(degrees, rng)]
    if followee_degrees is not None:
        followee_degrees = [int(d) for d in followee_degrees]
        if len(followee_degrees) != n:
            raise InvalidDegreeError("follower and followee sequences differ in length")
        for i, followees in enumerate(_pick_partners(followee_degrees, rng)):
            for u in followees:
                out[u].add(i)
    return DirectedGraph(tuple(tuple(sorted(fs)) for fs in out))


def prune_isolated(graph: DirectedGraph) -> DirectedGraph:
    """Drop nodes with neither in- nor out-edges and re-index the rest.

    Raises
    ------
    DegenerateNetworkError
        If every node is isolated.
    """
    touched = graph.out_degrees() + graph.in_degrees() > 0
    keep = np.flatnonzero(touched)
    if keep.size == 0:
        raise DegenerateNetworkError("every node is isolated; nothing left after pruning")
    old_ids = graph.original_ids or tuple(range(graph.node_count))
    remap = {int(old): new for new, old in enumerate(keep)}
    out = tuple(tuple(remap[v] for v in graph.out_edges[old]) for old in keep)
    return DirectedGraph(
        out,
        seed=graph.seed,
        exponent=graph.exponent,
        original_ids=tuple(old_ids[int(i)] for i in keep),
    )


def generate_network(config: NetworkConfig) -> DirectedGraph:
    """Sample, build and prune a network; fully determined by ``config``."""
    rng = np.random.default_rng(config.seed)
    followers = sample_degree_sequence(config, rng)
    followees = sample_degree_sequence(config, rng)
    raw = build_graph(followers, rng, followees)
    raw = DirectedGraph(raw.out_edges, seed=config.seed, exponent=config.exponent)
    return prune_isolated(raw)


def _bfs_depths(out_edges, source: int) -> dict:
    depth = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        d = depth[u] + 1
        for v in out_edges[u]:
            if v not in depth:
                depth[v] = d
                queue.append(v)
    return depth


def reachable_set(graph: DirectedGraph, source: int) -> frozenset:
    """Nodes reachable from ``source`` along directed edges, ``source`` excluded."""
    graph.check_node(source)
    reached = set(_bfs_depths(graph.out_edges, source))
    reached.discard(source)
    return frozenset(reached)


def compute_stats(graph: DirectedGraph) -> NetworkStats:
    """Out-degree summary plus the mean directed shortest-path length.

    The path length averages over ordered pairs ``(u, v)``, ``u != v``, with
    ``v`` reachable from ``u``; unreachable pairs are left out.
    """
    if graph.node_count == 0:
        raise DegenerateNetworkError("cannot compute statistics of an empty graph")
    deg = graph.out_degrees()
    total = 0
    pairs = 0
    for s in graph.node_ids:
        depth = _bfs_depths(graph.out_edges, s)
        total += sum(depth.values())
        pairs += len(depth) - 1
    return NetworkStats(
        retained_nodes=graph.node_count,
        edge_count=int(deg.sum()),
        mean_out_degree=float(deg.mean()),
        median_out_degree=float(np.median(deg)),
        max_out_degree=int(deg.max()),
        average_path_length=total / pairs if pairs else None,
        reachable_pairs=pairs,
    )
