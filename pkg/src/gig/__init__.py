"""Patient-specific pathway graph pipeline.

Builds per-patient molecular interaction graphs from an expression matrix and
a cached WikiPathways knowledge base, derives node features, exports a
graph-level classification dataset, generates random-graph controls, counts
4-node graphlet orbits, and scores prediction files.
"""

from .graph import MolecularGraph, merge_graphs, restrict_to_genes, strip_self_loops

__all__ = [
    "MolecularGraph",
    "merge_graphs",
    "restrict_to_genes",
    "strip_self_loops",
]

__version__ = "0.1.0"
