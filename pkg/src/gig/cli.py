"""Command-line entry point.

Subcommands: preprocess, build-graphs, nullmodel, orbits, compare-orbits,
export, metrics. Pipeline stages communicate through files so any stage can
be re-run in isolation; a TOML config drives the cohort stages with full
flag-override parity. Exit codes: 0 ok, 1 data error, 2 usage error,
3 environment (cache/network) error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from . import assembly, expression, graphlets, metrics, nullmodels
from .errors import DataError, GigError, UsageError
from .geneid import (
    GeneIdMapping,
    _qualify,
    canonicalize,
    resolve_batch_online,
    strip_ensembl_version,
)
from .graph import MolecularGraph, read_edge_list, write_edge_list
from .pathways import PATHWAY_CACHE_ENV, GenePathwayIndex, PathwayStore


@dataclass
class PipelineConfig:
    matrix: Path
    genes_in_rows: bool
    mapping_table: Path
    pathway_index: Path
    labels: Path
    cache_dir: Path
    offline: bool
    require_protein_coding: bool
    hvg_n: int
    log1p: bool
    epsilon: float
    tau: float
    k: int
    split_fraction: float
    seed: int
    out_dir: Path

    def validate(self) -> None:
        for name in ("matrix", "mapping_table", "pathway_index", "labels"):
            path = getattr(self, name)
            if not path.exists():
                raise UsageError(f"config path {name} does not exist: {path}")
        if self.hvg_n < 1:
            raise UsageError("hvg_n must be >= 1")
        if not 0 <= self.tau <= 100:
            raise UsageError("tau must be in [0, 100]")
        if not 0 < self.split_fraction < 1:
            raise UsageError("split fraction must be in (0, 1)")
        if self.k < 1:
            raise UsageError("k must be >= 1")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be positive")


def load_config(path, overrides: argparse.Namespace | None = None) -> PipelineConfig:
    try:
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"unreadable config {path}: {exc}")

    base = Path(path).parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    inp = raw.get("input", {})
    pw = raw.get("pathways", {})
    pre = raw.get("preprocess", {})
    split = raw.get("split", {})
    outp = raw.get("output", {})

    cache_default = os.environ.get(PATHWAY_CACHE_ENV, "gpml")
    cfg = PipelineConfig(
        matrix=resolve(inp.get("matrix", "matrix.tsv")),
        genes_in_rows=bool(inp.get("genes_in_rows", True)),
        mapping_table=resolve(inp.get("mapping_table", "mapping.tsv")),
        pathway_index=resolve(inp.get("pathway_index", "gene_pathways.tsv")),
        labels=resolve(inp.get("labels", "labels.tsv")),
        cache_dir=resolve(pw.get("cache_dir", cache_default)),
        offline=bool(pw.get("offline", True)),
        require_protein_coding=bool(pw.get("require_protein_coding", True)),
        hvg_n=int(pre.get("hvg_n", 10000)),
        log1p=bool(pre.get("log1p", True)),
        epsilon=float(pre.get("epsilon", expression.DEFAULT_EPSILON)),
        tau=float(pre.get("tau", 80.0)),
        k=int(pre.get("k", expression.DEFAULT_TOP_K)),
        split_fraction=float(split.get("fraction", 0.8)),
        seed=int(split.get("seed", 0)),
        out_dir=resolve(outp.get("dir", "out")),
    )
    if overrides is not None:
        _apply_overrides(cfg, overrides)
    cfg.validate()
    return cfg


_OVERRIDE_FIELDS = (
    "matrix", "genes_in_rows", "mapping_table", "pathway_index", "labels",
    "cache_dir", "offline", "require_protein_coding", "hvg_n", "log1p",
    "epsilon", "tau", "k", "split_fraction", "seed", "out_dir",
)

_PATH_FIELDS = {"matrix", "mapping_table", "pathway_index", "labels", "cache_dir", "out_dir"}


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name in _PATH_FIELDS:
            value = Path(value)
        setattr(cfg, name, value)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config TOML")
    parser.add_argument("--matrix", help="expression matrix TSV/CSV")
    rows = parser.add_mutually_exclusive_group()
    rows.add_argument("--genes-in-rows", dest="genes_in_rows", action="store_const", const=True)
    rows.add_argument("--genes-in-cols", dest="genes_in_rows", action="store_const", const=False)
    parser.add_argument("--mapping-table", dest="mapping_table")
    parser.add_argument("--pathway-index", dest="pathway_index")
    parser.add_argument("--labels")
    parser.add_argument("--cache-dir", dest="cache_dir")
    onoff = parser.add_mutually_exclusive_group()
    onoff.add_argument("--offline", dest="offline", action="store_const", const=True)
    onoff.add_argument("--online", dest="offline", action="store_const", const=False)
    parser.add_argument("--hvg-n", dest="hvg_n", type=int)
    logf = parser.add_mutually_exclusive_group()
    logf.add_argument("--log1p", dest="log1p", action="store_const", const=True)
    logf.add_argument("--no-log1p", dest="log1p", action="store_const", const=False)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--k", type=int)
    parser.add_argument("--split-frac", dest="split_fraction", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", dest="out_dir")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def _write_tsv_matrix(path: Path, row_ids, col_ids, values: np.ndarray, corner: str) -> None:
    lines = [corner + "\t" + "\t".join(col_ids)]
    for rid, row in zip(row_ids, values):
        lines.append(rid + "\t" + "\t".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_labels(path) -> dict[str, str]:
    labels: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected sample_id<TAB>label")
            if parts[0] in labels:
                raise DataError(f"{path}:{lineno}: duplicate sample id {parts[0]}")
            labels[parts[0]] = parts[1]
    if not labels:
        raise DataError(f"{path}: no labels")
    return labels


def _canonical_matrix(cfg: PipelineConfig) -> tuple[expression.ExpressionMatrix, dict]:
    """Load, canonicalize row ids to HGNC, apply the configured transforms."""
    raw = expression.load_matrix(cfg.matrix, genes_in_rows=cfg.genes_in_rows)
    table = GeneIdMapping.load_tsv(cfg.mapping_table)
    if not cfg.offline:
        missing = [
            strip_ensembl_version(g)
            for g in raw.genes
            if canonicalize(_qualify(strip_ensembl_version(g)), table, False) is None
        ]
        if missing:
            table = table.merged_with(resolve_batch_online(missing))
    renames: dict[str, str] = {}
    dropped_unmapped: list[str] = []
    dropped_duplicates: list[str] = []
    seen: set[str] = set()
    for gene in raw.genes:
        qualified = _qualify(strip_ensembl_version(gene))
        symbol = canonicalize(qualified, table, cfg.require_protein_coding)
        if symbol is None:
            dropped_unmapped.append(gene)
            continue
        if symbol in seen:
            dropped_duplicates.append(gene)
            continue
        seen.add(symbol)
        renames[gene] = symbol
    matrix = expression.rename_genes(raw, renames)
    if cfg.log1p:
        matrix = expression.log1p_transform(matrix)
    matrix = expression.select_hvg(matrix, cfg.hvg_n)
    report = {
        "raw_genes": raw.n_genes,
        "canonical_genes": len(renames),
        "hvg_genes": matrix.n_genes,
        "dropped_unmapped": dropped_unmapped,
        "dropped_duplicates": dropped_duplicates,
    }
    return matrix, report


def cmd_preprocess(args) -> int:
    cfg = load_config(args.config, args)
    matrix, report = _canonical_matrix(cfg)
    bundle = expression.feature_bundle(matrix, k=cfg.k, epsilon=cfg.epsilon)
    dysregulated = {
        sample: sorted(
            expression.dysregulated_genes(bundle.z[:, i], matrix.genes, cfg.tau)
        )
        for i, sample in enumerate(matrix.samples)
    }

    out = cfg.out_dir / "preprocessed"
    out.mkdir(parents=True, exist_ok=True)
    _write_tsv_matrix(out / "matrix.tsv", matrix.genes, matrix.samples, matrix.values, "gene")
    _write_tsv_matrix(out / "zscores.tsv", matrix.genes, matrix.samples, bundle.z, "gene")
    (out / "pcc_feature.tsv").write_text(
        "gene\tc\n"
        + "".join(f"{g}\t{repr(float(v))}\n" for g, v in zip(matrix.genes, bundle.c)),
        encoding="utf-8",
    )
    (out / "dysregulated.json").write_text(
        json.dumps(dysregulated, indent=0, sort_keys=True) + "\n", encoding="utf-8"
    )
    report.update(
        {"tau": cfg.tau, "k": cfg.k, "epsilon": cfg.epsilon, "log1p": cfg.log1p,
         "hvg_n": cfg.hvg_n, "n_samples": matrix.n_samples}
    )
    (out / "meta.json").write_text(
        json.dumps(report, indent=0, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"preprocessed {matrix.n_genes} genes x {matrix.n_samples} samples -> {out}")
    return 0


def _load_preprocessed(cfg: PipelineConfig):
    pre = cfg.out_dir / "preprocessed"
    matrix = expression.load_matrix(pre / "matrix.tsv")
    z = expression.load_matrix(pre / "zscores.tsv")
    c_by_gene: dict[str, float] = {}
    with open(pre / "pcc_feature.tsv", "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            gene, value = line.rstrip("\n").split("\t")
            c_by_gene[gene] = float(value)
    dysregulated = json.loads((pre / "dysregulated.json").read_text(encoding="utf-8"))
    return matrix, z, c_by_gene, dysregulated


def cmd_build_graphs(args) -> int:
    cfg = load_config(args.config, args)
    matrix, _z, _c, dysregulated = _load_preprocessed(cfg)
    measured = set(matrix.genes)
    store = PathwayStore(
        index=GenePathwayIndex.load_tsv(cfg.pathway_index),
        cache_dir=cfg.cache_dir,
        mapping=GeneIdMapping.load_tsv(cfg.mapping_table),
        measured=measured,
        online=not cfg.offline,
        require_protein_coding=cfg.require_protein_coding,
    )
    graphs_dir = cfg.out_dir / "graphs"
    graphs_dir.mkdir(parents=True, exist_ok=True)

    def build(sample):
        genes = dysregulated[sample]
        query = store.patient_pathways(genes)
        result = assembly.build_patient_graph(sample, genes, store, measured)
        return sample, query, result

    samples = sorted(dysregulated)
    exclusions = {}
    pathway_report = {}
    n_built = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
        for sample, query, result in pool.map(build, samples):
            pathway_report[sample] = {
                "wpids": list(query.wpids),
                "unmatched_genes": list(query.unmatched),
            }
            if isinstance(result, assembly.Excluded):
                exclusions[sample] = result.reason
                continue
            write_edge_list(result, graphs_dir / f"{sample}.edges.txt")
            n_built += 1
    (graphs_dir / "exclusions.json").write_text(
        json.dumps(exclusions, indent=0, sort_keys=True) + "\n", encoding="utf-8"
    )
    (graphs_dir / "build_report.json").write_text(
        json.dumps(
            {
                "samples": pathway_report,
                "pathway_index_sha256": _sha256(cfg.pathway_index),
            },
            indent=0,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    if args.dump_pathways:
        pathway_dir = graphs_dir / "pathways"
        pathway_dir.mkdir(exist_ok=True)
        used = sorted({w for info in pathway_report.values() for w in info["wpids"]})
        for wpid in used:
            write_edge_list(store.pathway_graph(wpid), pathway_dir / f"{wpid}.edges.txt")
    print(f"built {n_built} graphs, excluded {len(exclusions)} -> {graphs_dir}")
    return 0


def cmd_export(args) -> int:
    cfg = load_config(args.config, args)
    matrix, z, c_by_gene, _dys = _load_preprocessed(cfg)
    labels = _read_labels(cfg.labels)
    graphs_dir = cfg.out_dir / "graphs"
    if not graphs_dir.is_dir():
        raise DataError(f"no graphs directory at {graphs_dir}; run build-graphs first")

    retained: dict[str, MolecularGraph] = {}
    for path in sorted(graphs_dir.glob("*.edges.txt")):
        sample = path.name[: -len(".edges.txt")]
        if sample in labels and sample in matrix.samples:
            retained[sample] = read_edge_list(path)
    if not retained:
        raise DataError("no samples with graph, label, and expression profile")

    class_names = tuple(sorted({labels[s] for s in retained}))
    class_code = {name: i for i, name in enumerate(class_names)}
    vocab = assembly.GeneVocabulary(matrix.genes)
    split = assembly.stratified_split(
        {s: labels[s] for s in retained}, cfg.split_fraction, cfg.seed
    )
    weights = assembly.class_weights(
        [class_code[labels[s]] for s in split.train_ids], len(class_names)
    )

    records = []
    for sample, graph in sorted(retained.items()):
        col = z.samples.index(sample)
        z_by_gene = {g: z.values[i, col] for i, g in enumerate(z.genes)}
        records.append(
            assembly.assemble_record(
                sample, graph, z_by_gene, c_by_gene, vocab, class_code[labels[sample]]
            )
        )
    manifest = assembly.export_dataset(
        records, split, weights, vocab, cfg.out_dir / "export", class_names
    )
    print(f"exported {manifest.n_samples} samples, {len(class_names)} classes -> {manifest.out_dir}")
    return 0


def _derive_seed(base: int, name: str) -> int:
    return (base * 1000003 + zlib.crc32(name.encode("utf-8"))) & 0x7FFFFFFF


def cmd_nullmodel(args) -> int:
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    if not in_dir.is_dir():
        raise UsageError(f"input directory not found: {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(in_dir.glob("*.edges.txt"))
    if not paths:
        raise DataError(f"no *.edges.txt graphs in {in_dir}")

    def rewire(path):
        g = read_edge_list(path)
        cfg = nullmodels.RewireConfig(
            seed=_derive_seed(args.seed, path.name), swap_attempt_factor=args.factor
        )
        if args.kind == "er":
            out = nullmodels.er_rewire(g, cfg)
        elif args.kind == "dp":
            out = nullmodels.degree_preserving_rewire(g, cfg)
        else:
            out = nullmodels.fully_connected(g.nodes)
        write_edge_list(out, out_dir / path.name)

    with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
        list(pool.map(rewire, paths))
    print(f"wrote {len(paths)} {args.kind} controls -> {out_dir}")
    return 0


def cmd_orbits(args) -> int:
    in_dir = Path(args.in_dir)
    paths = sorted(in_dir.glob("*.edges.txt"))
    if not paths:
        raise DataError(f"no *.edges.txt graphs in {in_dir}")

    def signature(path):
        graph_id = path.name[: -len(".edges.txt")]
        orbits = graphlets.count_orbits(read_edge_list(path))
        return graphlets.graph_signature(graph_id, orbits)

    with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
        sigs = sorted(pool.map(signature, paths), key=lambda s: s.graph_id)
    Path(args.out).write_text(graphlets.signature_table(sigs), encoding="utf-8")
    print(f"wrote {len(sigs)} orbit signatures -> {args.out}")
    return 0


def cmd_compare_orbits(args) -> int:
    sigs = graphlets.parse_signature_table(Path(args.orbits).read_text(encoding="utf-8"))
    labels = _read_labels(args.labels)
    results = graphlets.compare_groups(sigs, labels)
    lines = ["orbit\tgroup_a\tn_a\tmean_a\tgroup_b\tn_b\tmean_b\tu\tp_value"]
    for r in results:
        lines.append(
            f"o{r.orbit_id}\t{r.group_a.name}\t{r.group_a.n}\t{repr(r.group_a.mean)}"
            f"\t{r.group_b.name}\t{r.group_b.n}\t{repr(r.group_b.mean)}"
            f"\t{repr(r.u_statistic)}\t{repr(r.p_value)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_metrics(args) -> int:
    classes = None
    if args.labels:
        classes = tuple(sorted(set(_read_labels(args.labels).values())))
    scores = metrics.PredictionScores.load_tsv(args.scores, classes=classes)
    report = metrics.score_report(scores)
    out_dir = Path(args.out) if args.out else None
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.json").write_text(text + "\n", encoding="utf-8")
        try:
            roc = metrics.macro_roc(scores)
            (out_dir / "roc.tsv").write_text(
                "fpr\tmacro_tpr\n"
                + "".join(
                    f"{repr(float(x))}\t{repr(float(y))}\n"
                    for x, y in zip(roc.fpr_grid, roc.macro_tpr)
                ),
                encoding="utf-8",
            )
            pr = metrics.macro_pr(scores)
            (out_dir / "pr.tsv").write_text(
                "recall\tmacro_precision\n"
                + "".join(
                    f"{repr(float(x))}\t{repr(float(y))}\n"
                    for x, y in zip(pr.recall_grid, pr.macro_precision)
                ),
                encoding="utf-8",
            )
        except DataError:
            pass  # degenerate truth: scalar metrics only
    return 0


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _append_run_log(args, ok: bool, category: str | None) -> None:
    config = getattr(args, "config", None)
    out_dir = getattr(args, "out_dir", None)
    out_path = getattr(args, "out", None)
    log_dir = None
    if config and Path(config).exists():
        try:
            log_dir = load_config(config).out_dir
        except GigError:
            log_dir = None
    if out_dir:
        log_dir = Path(out_dir)
    elif log_dir is None and out_path:
        target = Path(out_path)
        log_dir = target if target.is_dir() else target.parent
    if log_dir is None:
        return
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        entry = {
            "subcommand": args.subcommand,
            "config_sha256": _sha256(config) if config and Path(config).exists() else None,
            "ok": ok,
            "error_category": category,
            "ts": time.time(),
        }
        with open(log_dir / "run.log", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    except OSError:
        pass  # logging must never mask the real outcome


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gig",
        description="patient-specific pathway graph pipeline",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("preprocess", help="canonicalize, transform, and derive features")
    _add_config_args(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("build-graphs", help="assemble per-sample pathway graphs")
    _add_config_args(p)
    p.add_argument(
        "--dump-pathways",
        dest="dump_pathways",
        action="store_true",
        help="also write each processed pathway graph for inspection",
    )
    p.set_defaults(func=cmd_build_graphs)

    p = sub.add_parser("export", help="write the graph-level dataset")
    _add_config_args(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("nullmodel", help="generate control graphs")
    p.add_argument("--kind", choices=("er", "dp", "full"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--factor", type=int, default=10)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_nullmodel)

    p = sub.add_parser("orbits", help="per-graph graphlet orbit signatures")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("compare-orbits", help="rank orbit differences between two groups")
    p.add_argument("--orbits", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_orbits)

    p = sub.add_parser("metrics", help="score a predictions file")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except GigError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        _append_run_log(args, ok=False, category=exc.category)
        return exc.exit_code
    except OSError as exc:
        print(f"error:data: {exc}", file=sys.stderr)
        _append_run_log(args, ok=False, category="data")
        return 1
    _append_run_log(args, ok=True, category=None)
    return code


if __name__ == "__main__":
    sys.exit(main())
