"""Node orbit counts for all connected graphlets on 2-4 nodes.

Orbit numbering (the standard ORCA scheme):

    o0        degree (edge endpoint)
    o1 / o2   3-path end / middle
    o3        triangle vertex
    o4 / o5   4-path end / middle
    o6 / o7   claw (star) leaf / center
    o8        4-cycle vertex
    o9 / o10 / o11   tailed triangle: tail end / far triangle pair / attachment
    o12 / o13 diamond degree-2 / degree-3 vertex
    o14       4-clique vertex

``count_orbits`` is the fast path: it counts triangles and 4-cliques directly
and recovers the remaining orbits by solving the ORCA system of linear
relations over per-edge triangle counts and common-neighbor sums.
``brute_force_orbits`` enumerates induced subgraphs and is the independent
correctness oracle; the two must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.stats import mannwhitneyu

from .errors import DataError
from .graph import MolecularGraph

N_ORBITS = 15

BRUTE_FORCE_CAP = 64

ZSCORE_EPSILON = 1e-8


@dataclass(frozen=True)
class OrbitVector:
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != N_ORBITS:
            raise DataError(f"orbit vector must have {N_ORBITS} entries")
        if any(c < 0 for c in self.counts):
            raise DataError("orbit counts must be non-negative")

    def __getitem__(self, orbit: int) -> int:
        return self.counts[orbit]


@dataclass(frozen=True)
class OrbitSignature:
    graph_id: str
    means: tuple[float, ...]  # per-orbit mean count over nodes


class GroupStats(NamedTuple):
    name: str
    n: int
    mean: float
    median: float


@dataclass(frozen=True)
class GroupComparison:
    orbit_id: int
    group_a: GroupStats
    group_b: GroupStats
    u_statistic: float
    p_value: float


def _index_graph(g: MolecularGraph):
    """Symbol graph -> integer adjacency structures."""
    nodes = g.nodes
    pos = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    adj_sets = [set() for _ in range(n)]
    edges = []
    for a, b in g.edges:
        ia, ib = pos[a], pos[b]
        adj_sets[ia].add(ib)
        adj_sets[ib].add(ia)
        edges.append((ia, ib) if ia < ib else (ib, ia))
    adj = [sorted(s) for s in adj_sets]
    return nodes, n, edges, adj, adj_sets


def count_orbits(g: MolecularGraph) -> dict[str, OrbitVector]:
    """Exact per-node orbit counts via the combinatorial relation solve."""
    nodes, n, edges, adj, adj_sets = _index_graph(g)
    m = len(edges)
    deg = [len(a) for a in adj]

    # incidence lists: (neighbor, edge id), neighbor-sorted
    inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(edges):
        inc[a].append((b, eid))
        inc[b].append((a, eid))
    for lst in inc:
        lst.sort()

    # triangles spanning each edge
    tri = [0] * m
    for eid, (a, b) in enumerate(edges):
        tri[eid] = len(adj_sets[a] & adj_sets[b])

    # 4-cliques per node: enumerate each K4 once with the largest node outermost
    k4 = [0] * n
    for x in range(n):
        for y in adj[x]:
            if y >= x:
                break
            shared = [z for z in adj[y] if z < y and z in adj_sets[x]]
            for i in range(len(shared)):
                for j in range(i + 1, len(shared)):
                    if shared[j] in adj_sets[shared[i]]:
                        for v in (x, y, shared[i], shared[j]):
                            k4[v] += 1

    orbits = [[0] * N_ORBITS for _ in range(n)]
    common = [0] * n
    touched: list[int] = []

    for x in range(n):
        for z in touched:
            common[z] = 0
        touched.clear()

        f_12_14 = f_10_13 = 0
        f_13_14 = f_11_13 = 0
        f_7_11 = f_5_8 = 0
        f_6_9 = f_9_12 = f_4_8 = f_8_12 = 0

        row = orbits[x]
        row[0] = deg[x]
        inc_x = inc[x]

        # x as the middle of wedges and triangles
        for nx1, (y, ey) in enumerate(inc_x):
            for z, ez in inc[y]:
                if z in adj_sets[x]:
                    if z < y:
                        f_12_14 += tri[ez] - 1
                        f_10_13 += (deg[y] - 1 - tri[ez]) + (deg[z] - 1 - tri[ez])
                else:
                    if common[z] == 0:
                        touched.append(z)
                    common[z] += 1
            for nx2 in range(nx1 + 1, len(inc_x)):
                z, ez = inc_x[nx2]
                if z in adj_sets[y]:
                    row[3] += 1
                    f_13_14 += (tri[ey] - 1) + (tri[ez] - 1)
                    f_11_13 += (deg[x] - 1 - tri[ey]) + (deg[x] - 1 - tri[ez])
                else:
                    row[2] += 1
                    f_7_11 += (deg[x] - 2 - tri[ey]) + (deg[x] - 2 - tri[ez])
                    f_5_8 += (deg[y] - 1 - tri[ey]) + (deg[z] - 1 - tri[ez])

        # x as a path end
        for y, ey in inc_x:
            for z, ez in inc[y]:
                if z == x:
                    continue
                if z not in adj_sets[x]:
                    row[1] += 1
                    f_6_9 += deg[y] - 2 - tri[ey]
                    f_9_12 += tri[ez]
                    f_4_8 += deg[z] - 1 - tri[ez]
                    f_8_12 += common[z] - 1

        f14 = k4[x]
        row[14] = f14
        row[13] = (f_13_14 - 6 * f14) // 2
        row[12] = f_12_14 - 3 * f14
        row[11] = (f_11_13 - f_13_14 + 6 * f14) // 2
        row[10] = f_10_13 - f_13_14 + 6 * f14
        row[9] = (f_9_12 - 2 * f_12_14 + 6 * f14) // 2
        row[8] = (f_8_12 - 2 * f_12_14 + 6 * f14) // 2
        row[7] = (f_13_14 + f_7_11 - f_11_13 - 6 * f14) // 6
        row[6] = (2 * f_12_14 + f_6_9 - f_9_12 - 6 * f14) // 2
        row[5] = 2 * f_12_14 + f_5_8 - f_8_12 - 6 * f14
        row[4] = 2 * f_12_14 + f_4_8 - f_8_12 - 6 * f14

    return {nodes[i]: OrbitVector(tuple(orbits[i])) for i in range(n)}


def brute_force_orbits(g: MolecularGraph, cap: int = BRUTE_FORCE_CAP) -> dict[str, OrbitVector]:
    """Oracle: enumerate all 3- and 4-node subsets, classify the induced
    subgraph, and assign orbits by within-graphlet degree. O(n^4)."""
    nodes, n, _edges, adj, adj_sets = _index_graph(g)
    if n > cap:
        raise DataError(f"brute force capped at {cap} nodes, graph has {n}")

    orbits = [[0] * N_ORBITS for _ in range(n)]
    for i in range(n):
        orbits[i][0] = len(adj[i])

    for trio in combinations(range(n), 3):
        sub_deg = [sum(1 for u in trio if u != v and u in adj_sets[v]) for v in trio]
        e = sum(sub_deg) // 2
        if e == 3:
            for v in trio:
                orbits[v][3] += 1
        elif e == 2 and min(sub_deg) >= 1:
            for v, d in zip(trio, sub_deg):
                orbits[v][2 if d == 2 else 1] += 1

    for quad in combinations(range(n), 4):
        sub_deg = [sum(1 for u in quad if u != v and u in adj_sets[v]) for v in quad]
        e = sum(sub_deg) // 2
        if e < 3 or min(sub_deg) == 0:
            continue  # disconnected (4 nodes need >= 3 edges and no isolate)
        if e == 3:
            if max(sub_deg) == 3:  # claw
                for v, d in zip(quad, sub_deg):
                    orbits[v][7 if d == 3 else 6] += 1
            else:  # 4-path
                for v, d in zip(quad, sub_deg):
                    orbits[v][5 if d == 2 else 4] += 1
        elif e == 4:
            if max(sub_deg) == 2:  # 4-cycle
                for v in quad:
                    orbits[v][8] += 1
            else:  # tailed triangle
                for v, d in zip(quad, sub_deg):
                    orbits[v][{1: 9, 2: 10, 3: 11}[d]] += 1
        elif e == 5:  # diamond
            for v, d in zip(quad, sub_deg):
                orbits[v][13 if d == 3 else 12] += 1
        else:  # 4-clique
            for v in quad:
                orbits[v][14] += 1

    return {nodes[i]: OrbitVector(tuple(orbits[i])) for i in range(n)}


def graph_signature(graph_id: str, orbits: Mapping[str, OrbitVector]) -> OrbitSignature:
    """Per-orbit arithmetic mean over all nodes (isolated nodes included)."""
    if not orbits:
        raise DataError(f"cannot summarize empty graph {graph_id}")
    matrix = np.array([v.counts for v in orbits.values()], dtype=np.float64)
    return OrbitSignature(graph_id=graph_id, means=tuple(float(v) for v in matrix.mean(axis=0)))


class GroupZScores(NamedTuple):
    groups: tuple[str, ...]  # sorted group names
    means: np.ndarray  # (n_groups, 15) group-mean signatures
    z: np.ndarray  # (n_groups, 15) each orbit column standardized across groups


def zscore_signatures(
    sigs: Sequence[OrbitSignature], groups: Mapping[str, str]
) -> GroupZScores:
    """Group-mean signatures, then each orbit column z-scored across groups."""
    by_group: dict[str, list[OrbitSignature]] = {}
    for sig in sigs:
        if sig.graph_id not in groups:
            continue
        by_group.setdefault(groups[sig.graph_id], []).append(sig)
    names = tuple(sorted(by_group))
    if len(names) < 2:
        raise DataError("zscore_signatures needs at least 2 groups")
    means = np.array(
        [np.mean([s.means for s in by_group[g]], axis=0) for g in names]
    )
    mu = means.mean(axis=0, keepdims=True)
    sigma = means.std(axis=0, keepdims=True)
    z = (means - mu) / (sigma + ZSCORE_EPSILON)
    return GroupZScores(groups=names, means=means, z=z)


def compare_groups(
    sigs: Sequence[OrbitSignature], labels: Mapping[str, str]
) -> list[GroupComparison]:
    """Per-orbit two-sided Mann-Whitney U on per-graph means between two
    groups, sorted ascending by p-value (orbit index breaks ties)."""
    by_group: dict[str, list[OrbitSignature]] = {}
    for sig in sigs:
        if sig.graph_id in labels:
            by_group.setdefault(labels[sig.graph_id], []).append(sig)
    names = sorted(by_group)
    if len(names) != 2:
        raise DataError(f"compare_groups needs exactly 2 groups, got {names}")
    name_a, name_b = names
    a = np.array([s.means for s in by_group[name_a]])
    b = np.array([s.means for s in by_group[name_b]])
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise DataError("both groups must be non-empty")

    results = []
    for orbit in range(N_ORBITS):
        va, vb = a[:, orbit], b[:, orbit]
        if np.all(va == va[0]) and np.all(vb == va[0]):
            # fully tied data: U sits at its null center and carries no signal
            u, p = len(va) * len(vb) / 2.0, 1.0
        else:
            res = mannwhitneyu(va, vb, alternative="two-sided", method="asymptotic")
            u, p = float(res.statistic), float(res.pvalue)
        results.append(
            GroupComparison(
                orbit_id=orbit,
                group_a=GroupStats(name_a, len(va), float(va.mean()), float(np.median(va))),
                group_b=GroupStats(name_b, len(vb), float(vb.mean()), float(np.median(vb))),
                u_statistic=u,
                p_value=p,
            )
        )
    return sorted(results, key=lambda r: (r.p_value, r.orbit_id))


def signature_table(sigs: Iterable[OrbitSignature]) -> str:
    """TSV rows: graph_id then the 15 orbit means."""
    lines = ["graph_id\t" + "\t".join(f"o{i}" for i in range(N_ORBITS))]
    for sig in sigs:
        lines.append(sig.graph_id + "\t" + "\t".join(repr(v) for v in sig.means))
    return "\n".join(lines) + "\n"


def parse_signature_table(text: str) -> list[OrbitSignature]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("graph_id"):
        raise DataError("signature table missing header")
    sigs = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != N_ORBITS + 1:
            raise DataError(f"signature row has {len(parts)} fields")
        sigs.append(
            OrbitSignature(graph_id=parts[0], means=tuple(float(v) for v in parts[1:]))
        )
    return sigs
