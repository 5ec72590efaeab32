"""Undirected simple graph over HGNC gene symbols.

MolecularGraph is the single graph currency of the pipeline: parsed pathway
graphs, merged patient graphs, and null-model controls are all instances.
Values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import DataError


def normalize_gene_symbol(symbol: str) -> str:
    """Trim and uppercase a gene symbol; empty symbols are invalid."""
    s = symbol.strip().upper()
    if not s:
        raise DataError("empty gene symbol")
    return s


def canonical_edge(a: str, b: str) -> tuple[str, str]:
    """Order an unordered gene pair so the lexicographically smaller symbol comes first."""
    return (a, b) if a <= b else (b, a)


class MolecularGraph:
    """Simple undirected graph with deterministic (lexicographic) node order.

    Node identity is the gene symbol string itself. Edges are stored as
    canonically ordered pairs, deduplicated. Self-loops are rejected unless
    ``allow_self_loops=True``, which exists only so construction buffers can
    be cleaned with :func:`strip_self_loops` afterwards.
    """

    def __init__(
        self,
        nodes: Iterable[str] = (),
        edges: Iterable[tuple[str, str]] = (),
        *,
        allow_self_loops: bool = False,
    ):
        node_set = set(nodes)
        edge_set = set()
        for a, b in edges:
            if a == b:
                if not allow_self_loops:
                    raise DataError(f"self-loop on {a!r} in simple graph")
            edge_set.add(canonical_edge(a, b))
            node_set.add(a)
            node_set.add(b)
        self.nodes: tuple[str, ...] = tuple(sorted(node_set))
        self.edges: tuple[tuple[str, str], ...] = tuple(sorted(edge_set))
        self._edge_set = frozenset(edge_set)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_node(self, symbol: str) -> bool:
        return symbol in self._node_set()

    def has_edge(self, a: str, b: str) -> bool:
        return canonical_edge(a, b) in self._edge_set

    def _node_set(self) -> frozenset:
        ns = getattr(self, "_nodes_frozen", None)
        if ns is None:
            ns = frozenset(self.nodes)
            self._nodes_frozen = ns
        return ns

    def adjacency(self) -> dict[str, tuple[str, ...]]:
        """Sorted neighbor lists; isolated nodes map to empty tuples."""
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def degrees(self) -> dict[str, int]:
        deg = dict.fromkeys(self.nodes, 0)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def __eq__(self, other) -> bool:
        if not isinstance(other, MolecularGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.nodes, self.edges))

    def __iter__(self) -> Iterator[str]:
        return iter(self.nodes)

    def __repr__(self) -> str:
        return f"MolecularGraph(nodes={self.n_nodes}, edges={self.n_edges})"


def merge_graphs(graphs: Iterable[MolecularGraph]) -> MolecularGraph:
    """Union of node and edge sets; shared symbols collapse to one node."""
    nodes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for g in graphs:
        nodes.update(g.nodes)
        edges.update(g.edges)
    return MolecularGraph(nodes, edges, allow_self_loops=True)


def strip_self_loops(g: MolecularGraph) -> MolecularGraph:
    """Drop (x, x) edges; everything else is preserved."""
    return MolecularGraph(g.nodes, (e for e in g.edges if e[0] != e[1]))


def restrict_to_genes(g: MolecularGraph, keep: Iterable[str]) -> MolecularGraph:
    """Induced subgraph on ``g.nodes`` ∩ ``keep``."""
    keep_set = set(keep)
    nodes = [v for v in g.nodes if v in keep_set]
    edges = [(a, b) for a, b in g.edges if a in keep_set and b in keep_set]
    return MolecularGraph(nodes, edges, allow_self_loops=True)


NODES_HEADER = "#nodes"


def write_edge_list(g: MolecularGraph, path) -> None:
    """Edge-list text format: one ``A<TAB>B`` line per edge, then a ``#nodes``
    section listing degree-0 nodes."""
    deg = g.degrees()
    lines = [f"{a}\t{b}" for a, b in g.edges]
    isolated = [v for v in g.nodes if deg[v] == 0]
    if isolated:
        lines.append(NODES_HEADER)
        lines.extend(isolated)
    text = "\n".join(lines)
    if text:
        text += "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_edge_list(path) -> MolecularGraph:
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    in_nodes = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line == NODES_HEADER:
                in_nodes = True
                continue
            if in_nodes:
                nodes.append(line)
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected GENE_A<TAB>GENE_B, got {line!r}")
            edges.append((parts[0], parts[1]))
    return MolecularGraph(nodes, edges)
