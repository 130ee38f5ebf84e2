"""Undirected graphs, the synthetic families used in the experiments, and
degree statistics (including the average local maximum degree)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..p-1``.

    Edges are stored once as ``(i, j)`` with ``i < j``.
    """

    p: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"vertex count must be nonnegative, got {self.p}")
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"edge ({i}, {j}) out of range for p={self.p}")
            norm.add(_pair(i, j))
        object.__setattr__(self, "edges", frozenset(norm))
        adj = [set() for _ in range(self.p)]
        for i, j in norm:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(p, frozenset(edges))

    @classmethod
    def from_neighborhoods(cls, p: int, nbhds) -> "Graph":
        """OR-rule combination: ``{i, j}`` is an edge iff ``j in nbhds[i]`` or
        ``i in nbhds[j]``."""
        edges = set()
        for i, nb in enumerate(nbhds):
            for j in nb:
                if j != i:
                    edges.add(_pair(i, int(j)))
        return cls(p, frozenset(edges))

    def neighbors(self, i: int) -> frozenset:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def has_edge(self, i: int, j: int) -> bool:
        return _pair(i, j) in self.edges

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.p, self.p))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def separated(self, i: int, j: int, cond: Iterable[int]) -> bool:
        """True if every path between ``i`` and ``j`` passes through ``cond``."""
        blocked = set(cond)
        if i in blocked or j in blocked:
            raise ValueError("endpoints must not be in the separating set")
        seen = {i}
        stack = [i]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v == j:
                    return False
                if v not in seen and v not in blocked:
                    seen.add(v)
                    stack.append(v)
        return True


@dataclass(frozen=True)
class DegreeStats:
    degrees: tuple
    d_max: int
    local_max: tuple
    dbar_max: Fraction

    @property
    def dbar_max_float(self) -> float:
        return float(self.dbar_max)


def degree_stats(g: Graph) -> DegreeStats:
    """Degrees, maximum degree, per-vertex local maximum degree over the
    closed neighborhood, and their average ``dbar_max`` (exact rational)."""
    degrees = tuple(g.degree(i) for i in range(g.p))
    local = tuple(
        max([degrees[i]] + [degrees[j] for j in g.neighbors(i)]) for i in range(g.p)
    )
    d_max = max(degrees, default=0)
    dbar = Fraction(sum(local), g.p) if g.p else Fraction(0)
    return DegreeStats(degrees, d_max, local, dbar)


def hamming_distance(g1: Graph, g2: Graph) -> int:
    """Number of vertex pairs that are edges in exactly one of the graphs."""
    if g1.p != g2.p:
        raise ValueError(f"graphs have different vertex counts: {g1.p} vs {g2.p}")
    return len(g1.edges ^ g2.edges)


# --- generators -----------------------------------------------------------


def _clique_edges(vertices):
    return [(a, b) for a, b in itertools.combinations(vertices, 2)]


def _path_edges(vertices):
    return list(zip(vertices[:-1], vertices[1:]))


def gen_multi_clique_chain(p: int, clique_sizes) -> Graph:
    """Disjoint cliques on consecutive vertex blocks, with the leftover
    vertices joined into one disjoint path.

    No edge bridges a clique and the path.
    """
    sizes = [int(s) for s in clique_sizes]
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if any(s <= 0 for s in sizes):
        raise ValueError(f"clique sizes must be positive, got {sizes}")
    if sum(sizes) > p:
        raise ValueError(f"clique sizes {sizes} exceed p={p}")
    edges = []
    start = 0
    for s in sizes:
        edges += _clique_edges(range(start, start + s))
        start += s
    edges += _path_edges(list(range(start, p)))
    return Graph.from_edges(p, edges)


def gen_single_clique_chain(p: int, clique_size: int) -> Graph:
    if clique_size <= 0 or clique_size > p:
        raise ValueError(f"need 0 < clique_size <= p, got clique_size={clique_size}, p={p}")
    return gen_multi_clique_chain(p, [clique_size])


def gen_power_law(
    p: int,
    seed_size: int = 5,
    edges_per_step: int = 1,
    rng_seed: int = 0,
    seed_edge_prob: float = 0.5,
) -> Graph:
    """Barabasi-Albert preferential attachment grown from a random seed graph.

    The seed graph is Erdos-Renyi on ``seed_size`` vertices with edge
    probability ``seed_edge_prob``, redrawn until it has at least one edge.
    Each new vertex attaches to ``min(edges_per_step, current size)`` distinct
    existing vertices chosen with probability proportional to degree + 1.
    """
    if seed_size <= 0 or seed_size >= p:
        raise ValueError(f"need 0 < seed_size < p, got seed_size={seed_size}, p={p}")
    if edges_per_step < 1:
        raise ValueError(f"edges_per_step must be >= 1, got {edges_per_step}")
    rng = np.random.default_rng(rng_seed)
    pairs = list(itertools.combinations(range(seed_size), 2))
    while True:
        keep = rng.random(len(pairs)) < seed_edge_prob
        edges = [e for e, k in zip(pairs, keep) if k]
        if edges or not pairs:
            break
    deg = np.zeros(p)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    for v in range(seed_size, p):
        weights = deg[:v] + 1.0
        m = min(edges_per_step, v)
        targets = rng.choice(v, size=m, replace=False, p=weights / weights.sum())
        for t in sorted(int(t) for t in targets):
            edges.append((t, v))
            deg[t] += 1
            deg[v] += 1
    return Graph.from_edges(p, edges)


# --- edge-list text format --------------------------------------------------


def format_edge_list(g: Graph) -> str:
    lines = [f"p {g.p}"] + [f"{i} {j}" for i, j in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    p = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "p":
            p = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"malformed edge line: {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if p is None:
        raise ValueError("edge list is missing the 'p <count>' header")
    return Graph.from_edges(p, edges)


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())
