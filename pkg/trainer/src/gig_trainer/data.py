"""Reader for the exported graph-level dataset layout.

The contract (produced by the pipeline's export stage):

    export/
      manifest.json        {"n_samples", "classes", "checksums": {...}}
      vocab.tsv            symbol<TAB>index, row "<unk>\t0" reserved
      split.json           {"seed", "train": [...], "test": [...]}
      class_weights.tsv    class<TAB>count<TAB>weight
      samples/<id>.nodes.tsv   gene<TAB>vocab_idx<TAB>z<TAB>c
      samples/<id>.edges.tsv   directed node-row-index pairs (each edge twice)
      samples/<id>.label       integer class code
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch


class DatasetError(Exception):
    """Missing or malformed export files."""


@dataclass(frozen=True)
class GraphSample:
    sample_id: str
    genes: tuple[str, ...]
    x: np.ndarray  # (V, 2) float32, [z, c]
    gene_idx: np.ndarray  # (V,) int64 vocabulary indices
    edge_index: np.ndarray  # (2, 2E) int64, both directions present
    label: int


class ExportDataset:
    def __init__(self, export_dir):
        self.root = Path(export_dir)
        manifest_path = self.root / "manifest.json"
        if not manifest_path.exists():
            raise DatasetError(f"no manifest.json under {self.root}")
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        self.classes: tuple[str, ...] = tuple(manifest["classes"])

        self.vocab = self._read_vocab(self.root / "vocab.tsv")
        split = json.loads((self.root / "split.json").read_text(encoding="utf-8"))
        self.train_ids: tuple[str, ...] = tuple(split["train"])
        self.test_ids: tuple[str, ...] = tuple(split["test"])
        self.split_seed: int = split["seed"]
        self.class_weights = self._read_weights(self.root / "class_weights.tsv")
        if len(self.class_weights) != len(self.classes):
            raise DatasetError("class weight count does not match class list")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab) + 1  # reserved unknown index 0

    @staticmethod
    def _read_vocab(path: Path) -> tuple[str, ...]:
        if not path.exists():
            raise DatasetError(f"missing vocabulary file {path}")
        symbols = []
        for line in path.read_text(encoding="utf-8").splitlines()[1:]:
            symbol, idx = line.split("\t")
            if symbol == "<unk>":
                continue
            symbols.append(symbol)
            if int(idx) != len(symbols):
                raise DatasetError(f"{path}: non-contiguous vocabulary index {idx}")
        return tuple(symbols)

    @staticmethod
    def _read_weights(path: Path) -> np.ndarray:
        if not path.exists():
            raise DatasetError(f"missing class weight file {path}")
        weights = []
        for line in path.read_text(encoding="utf-8").splitlines()[1:]:
            _name, _count, weight = line.split("\t")
            weights.append(float(weight))
        return np.asarray(weights, dtype=np.float64)

    def sample(self, sample_id: str) -> GraphSample:
        nodes_path = self.root / "samples" / f"{sample_id}.nodes.tsv"
        if not nodes_path.exists():
            raise DatasetError(f"missing sample files for {sample_id}")
        genes, gene_idx, feats = [], [], []
        for line in nodes_path.read_text(encoding="utf-8").splitlines()[1:]:
            gene, idx, z, c = line.split("\t")
            genes.append(gene)
            gene_idx.append(int(idx))
            feats.append((float(z), float(c)))
        edges = []
        edge_text = (self.root / "samples" / f"{sample_id}.edges.tsv").read_text(
            encoding="utf-8"
        )
        for line in edge_text.splitlines():
            src, dst = line.split("\t")
            edges.append((int(src), int(dst)))
        label = int(
            (self.root / "samples" / f"{sample_id}.label").read_text(encoding="utf-8")
        )
        edge_index = (
            np.asarray(edges, dtype=np.int64).T
            if edges
            else np.zeros((2, 0), dtype=np.int64)
        )
        return GraphSample(
            sample_id=sample_id,
            genes=tuple(genes),
            x=np.asarray(feats, dtype=np.float32),
            gene_idx=np.asarray(gene_idx, dtype=np.int64),
            edge_index=edge_index,
            label=label,
        )

    def samples(self, ids: Sequence[str]) -> list[GraphSample]:
        return [self.sample(i) for i in ids]


@dataclass
class Batch:
    x: torch.Tensor  # (N, 2)
    gene_idx: torch.Tensor  # (N,)
    edge_index: torch.Tensor  # (2, E) block-diagonal over graphs
    graph_index: torch.Tensor  # (N,) which graph each node belongs to
    labels: torch.Tensor  # (B,)
    n_graphs: int
    sample_ids: tuple[str, ...]

    def to(self, device) -> "Batch":
        return Batch(
            x=self.x.to(device),
            gene_idx=self.gene_idx.to(device),
            edge_index=self.edge_index.to(device),
            graph_index=self.graph_index.to(device),
            labels=self.labels.to(device),
            n_graphs=self.n_graphs,
            sample_ids=self.sample_ids,
        )


def collate(samples: Sequence[GraphSample], dtype=torch.float32) -> Batch:
    """Stack graphs block-diagonally with node offsets."""
    xs, idxs, edges, graph_index, labels = [], [], [], [], []
    offset = 0
    for gi, s in enumerate(samples):
        n = len(s.genes)
        xs.append(torch.as_tensor(s.x, dtype=dtype))
        idxs.append(torch.as_tensor(s.gene_idx))
        edges.append(torch.as_tensor(s.edge_index + offset))
        graph_index.append(torch.full((n,), gi, dtype=torch.int64))
        labels.append(s.label)
        offset += n
    return Batch(
        x=torch.cat(xs),
        gene_idx=torch.cat(idxs),
        edge_index=torch.cat(edges, dim=1),
        graph_index=torch.cat(graph_index),
        labels=torch.as_tensor(labels, dtype=torch.int64),
        n_graphs=len(samples),
        sample_ids=tuple(s.sample_id for s in samples),
    )
