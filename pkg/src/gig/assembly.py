"""Patient-graph assembly and graph-level dataset export.

A patient graph is the union of the processed pathway graphs selected by the
sample's dysregulated genes, restricted to measured genes, with self-loops
stripped. Samples whose graph has fewer than two nodes or no edges are
excluded with a recorded reason rather than silently dropped.

Export is plain TSV + JSON with sha256 checksums in the manifest so identical
inputs always produce byte-identical output trees.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .graph import MolecularGraph, merge_graphs, restrict_to_genes, strip_self_loops
from .pathways import PathwayStore


@dataclass(frozen=True)
class Excluded:
    """Marker for a sample removed by the graph size filter."""

    sample_id: str
    reason: str  # "no-pathways" | "too-small" | "no-edges"


def build_patient_graph(
    sample_id: str,
    dysregulated: Iterable[str],
    store: PathwayStore,
    measured: Iterable[str],
) -> MolecularGraph | Excluded:
    """Merge the pathway graphs selected by the sample's dysregulated genes."""
    query = store.patient_pathways(dysregulated)
    if not query.wpids:
        return Excluded(sample_id, "no-pathways")
    merged = merge_graphs(store.pathway_graph(w) for w in query.wpids)
    graph = strip_self_loops(restrict_to_genes(merged, set(measured)))
    if graph.n_nodes < 2:
        return Excluded(sample_id, "too-small")
    if graph.n_edges == 0:
        return Excluded(sample_id, "no-edges")
    return graph


class GeneVocabulary:
    """Gene symbol -> contiguous positive index; 0 is the reserved unknown."""

    UNKNOWN = 0

    def __init__(self, symbols: Sequence[str]):
        if len(set(symbols)) != len(symbols):
            raise DataError("duplicate symbols in vocabulary")
        self._index = {s: i + 1 for i, s in enumerate(symbols)}
        self.symbols = tuple(symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index_of(self, symbol: str) -> int:
        return self._index.get(symbol, self.UNKNOWN)

    def to_tsv(self) -> str:
        lines = ["symbol\tindex", "<unk>\t0"]
        lines.extend(f"{s}\t{i + 1}" for i, s in enumerate(self.symbols))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "GeneVocabulary":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        symbols = []
        for ln in lines[1:]:
            symbol, idx = ln.split("\t")
            if symbol == "<unk>":
                continue
            symbols.append(symbol)
            if int(idx) != len(symbols):
                raise DataError("vocabulary indices are not contiguous")
        return cls(symbols)


@dataclass(frozen=True)
class PatientGraphRecord:
    sample_id: str
    graph: MolecularGraph
    node_features: np.ndarray  # (|V|, 2): column 0 sample z-score, column 1 PCC feature
    gene_indices: np.ndarray  # (|V|,) vocabulary indices
    label: int

    def __post_init__(self):
        v = self.graph.n_nodes
        if v < 2 or self.graph.n_edges < 1:
            raise DataError(f"{self.sample_id}: record requires >=2 nodes and >=1 edge")
        if self.node_features.shape != (v, 2):
            raise DataError(f"{self.sample_id}: feature rows must align with node order")
        if self.gene_indices.shape != (v,):
            raise DataError(f"{self.sample_id}: gene index length mismatch")
        if not np.all(np.isfinite(self.node_features)):
            raise DataError(f"{self.sample_id}: non-finite node features")


def assemble_record(
    sample_id: str,
    graph: MolecularGraph,
    z_by_gene: Mapping[str, float],
    c_by_gene: Mapping[str, float],
    vocab: GeneVocabulary,
    label: int,
) -> PatientGraphRecord:
    """Attach features and vocabulary indices in the graph's node order."""
    features = np.zeros((graph.n_nodes, 2))
    indices = np.zeros(graph.n_nodes, dtype=np.int64)
    for row, gene in enumerate(graph.nodes):
        try:
            features[row, 0] = z_by_gene[gene]
            features[row, 1] = c_by_gene[gene]
        except KeyError:
            raise DataError(
                f"{sample_id}: internal consistency error, no feature for {gene}"
            )
        indices[row] = vocab.index_of(gene)
    return PatientGraphRecord(
        sample_id=sample_id,
        graph=graph,
        node_features=features,
        gene_indices=indices,
        label=label,
    )


@dataclass(frozen=True)
class SplitSpec:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {"seed": self.seed, "train": list(self.train_ids), "test": list(self.test_ids)},
            indent=0,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitSpec":
        raw = json.loads(text)
        return cls(
            train_ids=tuple(raw["train"]), test_ids=tuple(raw["test"]), seed=raw["seed"]
        )


def stratified_split(labels: Mapping[str, str], frac: float, seed: int) -> SplitSpec:
    """Per-class seeded shuffle; train count = round(frac * n_c) clamped to
    [1, n_c - 1]; singleton classes go entirely to train."""
    if not labels:
        raise DataError("no labeled samples to split")
    if not 0 < frac < 1:
        raise DataError("split fraction must be in (0, 1)")
    by_class: dict[str, list[str]] = {}
    for sid in sorted(labels):
        by_class.setdefault(labels[sid], []).append(sid)
    rng = random.Random(seed)
    train: list[str] = []
    test: list[str] = []
    for cls in sorted(by_class):
        members = sorted(by_class[cls])
        rng.shuffle(members)
        n = len(members)
        if n == 1:
            train.extend(members)
            continue
        n_train = int(frac * n + 0.5)  # round half up, not banker's
        n_train = max(1, min(n - 1, n_train))
        train.extend(members[:n_train])
        test.extend(members[n_train:])
    return SplitSpec(train_ids=tuple(sorted(train)), test_ids=tuple(sorted(test)), seed=seed)


@dataclass(frozen=True)
class ClassWeights:
    weights: tuple[float, ...]
    class_counts: tuple[int, ...]

    def to_tsv(self, class_names: Sequence[str]) -> str:
        lines = ["class\tcount\tweight"]
        for name, n, w in zip(class_names, self.class_counts, self.weights):
            lines.append(f"{name}\t{n}\t{repr(w)}")
        return "\n".join(lines) + "\n"


def class_weights(train_labels: Sequence[int], n_classes: int) -> ClassWeights:
    """w_c = (1/n_c) / (sum_j 1/n_j) * C, computed in exact rationals."""
    counts = [0] * n_classes
    for y in train_labels:
        if not 0 <= y < n_classes:
            raise DataError(f"label {y} outside 0..{n_classes - 1}")
        counts[y] += 1
    for c, n in enumerate(counts):
        if n == 0:
            raise DataError(f"class {c} has no training samples")
    inv_sum = sum(Fraction(1, n) for n in counts)
    weights = tuple(float(Fraction(1, n) / inv_sum * n_classes) for n in counts)
    return ClassWeights(weights=weights, class_counts=tuple(counts))


@dataclass(frozen=True)
class DatasetManifest:
    out_dir: Path
    n_samples: int
    classes: tuple[str, ...]
    checksums: dict[str, str]  # relative path -> sha256

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_samples": self.n_samples,
                "classes": list(self.classes),
                "checksums": self.checksums,
            },
            indent=0,
            sort_keys=True,
        )


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def export_dataset(
    records: Sequence[PatientGraphRecord],
    split: SplitSpec,
    weights: ClassWeights,
    vocab: GeneVocabulary,
    out_dir,
    class_names: Sequence[str],
) -> DatasetManifest:
    """Write the graph-level dataset: per-sample node/edge/label files plus
    vocabulary, split, class weights, and a checksummed manifest.

    Every undirected edge appears as two directed rows of node row-indices.
    """
    if not records:
        raise DataError("nothing to export: record list is empty")
    out = Path(out_dir)
    samples_dir = out / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)

    written: list[Path] = []
    for rec in sorted(records, key=lambda r: r.sample_id):
        node_path = samples_dir / f"{rec.sample_id}.nodes.tsv"
        lines = ["gene\tvocab_idx\tz\tc"]
        for row, gene in enumerate(rec.graph.nodes):
            z, c = rec.node_features[row]
            lines.append(f"{gene}\t{rec.gene_indices[row]}\t{repr(float(z))}\t{repr(float(c))}")
        node_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(node_path)

        pos = {gene: i for i, gene in enumerate(rec.graph.nodes)}
        directed = []
        for a, b in rec.graph.edges:
            directed.append((pos[a], pos[b]))
            directed.append((pos[b], pos[a]))
        directed.sort()
        edge_path = samples_dir / f"{rec.sample_id}.edges.tsv"
        edge_path.write_text(
            "".join(f"{i}\t{j}\n" for i, j in directed), encoding="utf-8"
        )
        written.append(edge_path)

        label_path = samples_dir / f"{rec.sample_id}.label"
        label_path.write_text(f"{rec.label}\n", encoding="utf-8")
        written.append(label_path)

    vocab_path = out / "vocab.tsv"
    vocab_path.write_text(vocab.to_tsv(), encoding="utf-8")
    written.append(vocab_path)

    split_path = out / "split.json"
    split_path.write_text(split.to_json() + "\n", encoding="utf-8")
    written.append(split_path)

    weights_path = out / "class_weights.tsv"
    weights_path.write_text(weights.to_tsv(class_names), encoding="utf-8")
    written.append(weights_path)

    checksums = {
        str(p.relative_to(out)): _sha256_file(p) for p in sorted(written)
    }
    manifest = DatasetManifest(
        out_dir=out,
        n_samples=len(records),
        classes=tuple(class_names),
        checksums=checksums,
    )
    (out / "manifest.json").write_text(manifest.to_json() + "\n", encoding="utf-8")
    return manifest
