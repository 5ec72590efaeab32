"""Expression-matrix ingestion and numeric derivations.

All standardizations use the population (divide-by-G) standard deviation with
an additive epsilon guard, and percentile thresholds use linear interpolation
between order statistics. Both choices are isolated here so alternates can be
A/B tested.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .graph import normalize_gene_symbol

DEFAULT_EPSILON = 1e-8
DEFAULT_TOP_K = 50


@dataclass(frozen=True)
class ExpressionMatrix:
    """Dense genes × samples matrix with row/column identifiers."""

    genes: tuple[str, ...]
    samples: tuple[str, ...]
    values: np.ndarray  # shape (G, N), float64

    def __post_init__(self):
        g, n = len(self.genes), len(self.samples)
        if g < 1 or n < 1:
            raise DataError("expression matrix needs at least one gene and one sample")
        if len(set(self.genes)) != g:
            raise DataError("duplicate gene symbols in expression matrix")
        if len(set(self.samples)) != n:
            raise DataError("duplicate sample ids in expression matrix")
        if self.values.shape != (g, n):
            raise DataError(
                f"value shape {self.values.shape} does not match {g} genes x {n} samples"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("expression matrix contains non-finite values")

    @property
    def n_genes(self) -> int:
        return len(self.genes)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def gene_row(self, gene: str) -> np.ndarray:
        return self.values[self.genes.index(gene)]

    def sample_column(self, sample: str) -> np.ndarray:
        return self.values[:, self.samples.index(sample)]


def load_matrix(path, genes_in_rows: bool = True, delimiter: str | None = None) -> ExpressionMatrix:
    """Load a TSV/CSV matrix: header row of sample ids, first column gene ids.

    ``genes_in_rows=False`` transposes the parsed table so rows always end up
    as genes internally.
    """
    path = str(path)
    if delimiter is None:
        delimiter = "," if path.endswith(".csv") else "\t"
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header:
            raise DataError(f"{path}: empty matrix file")
        col_ids = header.split(delimiter)[1:]
        row_ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, raw in enumerate(fh, 2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split(delimiter)
            if len(parts) != len(col_ids) + 1:
                raise DataError(
                    f"{path}:{lineno}: expected {len(col_ids) + 1} fields, got {len(parts)}"
                )
            row_ids.append(parts[0])
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}")
    values = np.asarray(rows, dtype=np.float64)
    if values.size == 0:
        raise DataError(f"{path}: no data rows")
    if not genes_in_rows:
        row_ids, col_ids = col_ids, row_ids
        values = values.T
    return ExpressionMatrix(genes=tuple(row_ids), samples=tuple(col_ids), values=values)


def rename_genes(m: ExpressionMatrix, renames: dict[str, str]) -> ExpressionMatrix:
    """Map raw row ids to canonical symbols, dropping rows that map to None
    and collapsing duplicates is NOT done here: duplicate targets raise."""
    keep_rows: list[int] = []
    new_names: list[str] = []
    for i, gene in enumerate(m.genes):
        target = renames.get(gene)
        if target is None:
            continue
        keep_rows.append(i)
        new_names.append(normalize_gene_symbol(target))
    if not keep_rows:
        raise DataError("no matrix genes survived identifier canonicalization")
    if len(set(new_names)) != len(new_names):
        dupes = sorted({g for g in new_names if new_names.count(g) > 1})
        raise DataError(f"canonicalization produced duplicate gene rows: {dupes}")
    return ExpressionMatrix(
        genes=tuple(new_names),
        samples=m.samples,
        values=m.values[keep_rows, :].copy(),
    )


def log1p_transform(m: ExpressionMatrix) -> ExpressionMatrix:
    """Replace each value by log(1 + value); negative inputs are a domain error."""
    if np.any(m.values < 0):
        gi, si = np.argwhere(m.values < 0)[0]
        raise DataError(
            f"negative expression value for gene {m.genes[gi]} in sample {m.samples[si]}"
        )
    return ExpressionMatrix(genes=m.genes, samples=m.samples, values=np.log1p(m.values))


def select_hvg(m: ExpressionMatrix, n: int) -> ExpressionMatrix:
    """Keep the top-n genes by across-sample variance, preserving row order.

    Ties break toward the earlier row (stable sort on descending variance).
    """
    if n < 1:
        raise DataError("hvg_n must be >= 1")
    if n >= m.n_genes:
        return m
    variances = m.values.var(axis=1)
    ranked = np.argsort(-variances, kind="stable")[:n]
    keep = np.sort(ranked)
    return ExpressionMatrix(
        genes=tuple(m.genes[i] for i in keep),
        samples=m.samples,
        values=m.values[keep, :].copy(),
    )


def samplewise_zscores(m: ExpressionMatrix, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """z_{gi} = (x_{gi} - mu_i) / (sigma_i + eps), per sample column over genes."""
    if epsilon <= 0:
        raise DataError("epsilon must be positive")
    mu = m.values.mean(axis=0, keepdims=True)
    sigma = m.values.std(axis=0, keepdims=True)  # population sd
    return (m.values - mu) / (sigma + epsilon)


def genewise_zscores(m: ExpressionMatrix, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Gene-wise standardization across samples (rows and columns exchanged)."""
    if epsilon <= 0:
        raise DataError("epsilon must be positive")
    mu = m.values.mean(axis=1, keepdims=True)
    sigma = m.values.std(axis=1, keepdims=True)
    return (m.values - mu) / (sigma + epsilon)


def pcc_matrix(zg: np.ndarray) -> np.ndarray:
    """r_{gh} = (1/N) sum_i zg_{gi} zg_{hi} over gene-wise z-scores.

    Uses the 1/N normalization; diagonal entries are ~1 for non-constant genes.
    """
    n = zg.shape[1]
    return (zg @ zg.T) / n


def pcc_node_feature(r: np.ndarray, k: int = DEFAULT_TOP_K) -> np.ndarray:
    """Mean absolute correlation of each gene with its top-k most correlated
    other genes; ties rank by row order; a single-gene matrix yields 0."""
    if k < 1:
        raise DataError("k must be >= 1")
    g = r.shape[0]
    if g == 1:
        return np.zeros(1)
    abs_r = np.abs(r).copy()
    np.fill_diagonal(abs_r, -np.inf)  # exclude self-correlation from ranking
    take = min(k, g - 1)
    order = np.argsort(-abs_r, axis=1, kind="stable")[:, :take]
    top = np.take_along_axis(abs_r, order, axis=1)
    return top.mean(axis=1)


@dataclass(frozen=True)
class FeatureBundle:
    """Per-sample z matrix and cohort-level co-expression feature vector."""

    z: np.ndarray  # (G, N) sample-wise z-scores
    c: np.ndarray  # (G,) top-k mean absolute correlation
    k: int
    epsilon: float


def feature_bundle(
    m: ExpressionMatrix, k: int = DEFAULT_TOP_K, epsilon: float = DEFAULT_EPSILON
) -> FeatureBundle:
    z = samplewise_zscores(m, epsilon)
    zg = genewise_zscores(m, epsilon)
    c = pcc_node_feature(pcc_matrix(zg), k)
    return FeatureBundle(z=z, c=c, k=k, epsilon=epsilon)


def dysregulated_genes(
    z_column: np.ndarray, genes: Sequence[str], tau: float
) -> set[str]:
    """Genes whose |z| meets the tau-th percentile of |z| in this sample.

    The threshold is the linear-interpolation percentile and the comparison
    is inclusive, so ties at the threshold only enlarge the set.
    """
    if not 0 <= tau <= 100:
        raise DataError("tau must be in [0, 100]")
    if len(genes) != len(z_column):
        raise DataError("z column and gene list lengths differ")
    magnitude = np.abs(np.asarray(z_column, dtype=np.float64))
    threshold = np.percentile(magnitude, tau)
    return {g for g, v in zip(genes, magnitude) if v >= threshold}
