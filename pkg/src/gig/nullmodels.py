"""Random-graph controls for the topology ablations.

Two rewiring families plus the fully connected control. Both rewires are
pure functions of (graph, seed, factor): the Erdős–Rényi control resamples
exactly |E| edges uniformly over all unordered pairs, the degree-preserving
control applies seeded double-edge swaps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import isqrt
from typing import Iterable

from .errors import DataError
from .graph import MolecularGraph, canonical_edge


@dataclass(frozen=True)
class RewireConfig:
    seed: int
    swap_attempt_factor: int = 10  # attempted swaps = factor * |E|

    def __post_init__(self):
        if self.swap_attempt_factor < 1:
            raise DataError("swap_attempt_factor must be >= 1")


def _unrank_pair(t: int, n: int) -> tuple[int, int]:
    """Index -> (i, j), i<j, over the lexicographic enumeration of n-choose-2."""
    # pairs with first element < i occupy S(i) = i*(2n-i-1)/2 slots
    # solve the quadratic bound, then correct for integer rounding
    i = (2 * n - 1 - isqrt((2 * n - 1) * (2 * n - 1) - 8 * t)) // 2
    while i * (2 * n - i - 1) // 2 > t:
        i -= 1
    while (i + 1) * (2 * n - i - 2) // 2 <= t:
        i += 1
    j = t - i * (2 * n - i - 1) // 2 + i + 1
    return i, j


def er_rewire(g: MolecularGraph, cfg: RewireConfig) -> MolecularGraph:
    """Same node set, exactly |E| edges sampled uniformly without replacement."""
    n = g.n_nodes
    if n < 2:
        raise DataError("er_rewire needs at least 2 nodes")
    total = n * (n - 1) // 2
    m = g.n_edges
    if m > total:
        raise DataError("edge count exceeds the number of unordered pairs")
    rng = random.Random(cfg.seed)
    picks = rng.sample(range(total), m)
    nodes = g.nodes
    edges = []
    for t in picks:
        i, j = _unrank_pair(t, n)
        edges.append((nodes[i], nodes[j]))
    return MolecularGraph(nodes, edges)


def degree_preserving_rewire(g: MolecularGraph, cfg: RewireConfig) -> MolecularGraph:
    """Repeated double-edge swaps: (a,b),(c,d) -> (a,d),(c,b) when all four
    endpoints are distinct and neither new edge exists. Graphs with no valid
    swap come back unchanged."""
    edges = list(g.edges)
    m = len(edges)
    if m < 2:
        return g
    edge_set = set(edges)
    rng = random.Random(cfg.seed)
    attempts = cfg.swap_attempt_factor * m
    for _ in range(attempts):
        ia = rng.randrange(m)
        ib = rng.randrange(m)
        if ia == ib:
            continue
        a, b = edges[ia]
        c, d = edges[ib]
        # random orientation so both swap variants are reachable
        if rng.random() < 0.5:
            a, b = b, a
        if rng.random() < 0.5:
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        new1 = canonical_edge(a, d)
        new2 = canonical_edge(c, b)
        if new1 in edge_set or new2 in edge_set:
            continue
        edge_set.discard(edges[ia])
        edge_set.discard(edges[ib])
        edge_set.add(new1)
        edge_set.add(new2)
        edges[ia] = new1
        edges[ib] = new2
    return MolecularGraph(g.nodes, edges)


def fully_connected(nodes: Iterable[str]) -> MolecularGraph:
    """Complete graph over the given nodes."""
    node_list = sorted(set(nodes))
    if len(node_list) < 2:
        raise DataError("fully_connected needs at least 2 nodes")
    edges = [
        (node_list[i], node_list[j])
        for i in range(len(node_list))
        for j in range(i + 1, len(node_list))
    ]
    return MolecularGraph(node_list, edges)
