"""Gene→pathway index and the WPID→GPML cache.

The index is a local TSV (``gene<TAB>wpid``); live per-gene queries are not
on the tested path. GPML files live in a cache directory as ``<WPID>.gpml``;
cache writes go to a temp file first so concurrent runs never observe torn
documents. Parsed, canonicalized pathway graphs are memoized per store
instance (the measured gene set is fixed per instance, so the memo key is
effectively (wpid, measured-set)).
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Optional

from .errors import (
    CacheWriteError,
    DataError,
    MissingPathwayError,
    PathwayDownloadError,
)
from .geneid import GeneIdMapping, canonicalize
from .gpml import build_pathway_graph, parse_gpml
from .graph import MolecularGraph, normalize_gene_symbol

PATHWAY_CACHE_ENV = "GIG_PATHWAY_CACHE"

GPML_URL_TEMPLATE = (
    "https://www.wikipathways.org/wikipathways-assets/pathways/{wpid}/{wpid}.gpml"
)


class PathwayQuery(NamedTuple):
    wpids: tuple[str, ...]  # sorted union
    unmatched: tuple[str, ...]  # genes with no indexed pathway


class GenePathwayIndex:
    """Immutable map from gene symbol to the set of WPIDs containing it."""

    def __init__(self, mapping: dict[str, Iterable[str]] | None = None):
        self._map: dict[str, frozenset[str]] = {
            normalize_gene_symbol(g): frozenset(wpids)
            for g, wpids in (mapping or {}).items()
        }

    @classmethod
    def load_tsv(cls, path) -> "GenePathwayIndex":
        """``gene<TAB>wpid`` rows; a row with an empty wpid field records a
        gene known to have no pathways."""
        mapping: dict[str, set[str]] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected gene<TAB>wpid")
                gene = normalize_gene_symbol(parts[0])
                bucket = mapping.setdefault(gene, set())
                if parts[1]:
                    bucket.add(parts[1])
        return cls(mapping)

    def __len__(self) -> int:
        return len(self._map)

    def genes(self) -> tuple[str, ...]:
        return tuple(sorted(self._map))


def pathways_for_gene(gene: str, index: GenePathwayIndex) -> frozenset[str]:
    """Indexed pathway set; empty for unindexed genes."""
    return index._map.get(gene, frozenset())


def pathway_set_for_sample(
    dysregulated: Iterable[str], index: GenePathwayIndex
) -> PathwayQuery:
    """Union of per-gene pathway sets, plus the genes that matched nothing."""
    wpids: set[str] = set()
    unmatched: list[str] = []
    for gene in sorted(set(dysregulated)):
        hits = pathways_for_gene(gene, index)
        if hits:
            wpids.update(hits)
        else:
            unmatched.append(gene)
    return PathwayQuery(wpids=tuple(sorted(wpids)), unmatched=tuple(unmatched))


def default_pathway_cache() -> Path:
    env = os.environ.get(PATHWAY_CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "gig" / "gpml"


def _download_gpml(wpid: str) -> bytes:
    import urllib.request

    url = GPML_URL_TEMPLATE.format(wpid=wpid)
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def fetch_gpml(
    wpid: str,
    cache_dir,
    online: bool = False,
    fetcher: Callable[[str], bytes] | None = None,
) -> bytes:
    """Return the GPML bytes for a WPID, from cache or (when online) by
    downloading and caching atomically."""
    cache_dir = Path(cache_dir)
    cache_path = cache_dir / f"{wpid}.gpml"
    if cache_path.exists():
        return cache_path.read_bytes()
    if not online:
        raise MissingPathwayError(wpid)
    fetch = fetcher or _download_gpml
    try:
        data = fetch(wpid)
    except Exception as exc:
        raise PathwayDownloadError(wpid, str(exc))
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = cache_path.with_suffix(".gpml.tmp")
        tmp.write_bytes(data)
        os.replace(tmp, cache_path)
    except OSError as exc:
        raise CacheWriteError(str(cache_path), str(exc))
    return data


class PathwayStore:
    """Answers pathway queries and builds processed pathway graphs once per WPID."""

    def __init__(
        self,
        index: GenePathwayIndex,
        cache_dir,
        mapping: GeneIdMapping,
        measured: Iterable[str],
        online: bool = False,
        require_protein_coding: bool = True,
        fetcher: Callable[[str], bytes] | None = None,
    ):
        self.index = index
        self.cache_dir = Path(cache_dir)
        self.mapping = mapping
        self.measured = frozenset(measured)
        self.online = online
        self.require_protein_coding = require_protein_coding
        self._fetcher = fetcher
        self._memo: dict[str, MolecularGraph] = {}
        self._lock = threading.Lock()

    def _resolver(self, qualified_id: str) -> Optional[str]:
        return canonicalize(qualified_id, self.mapping, self.require_protein_coding)

    def pathway_graph(self, wpid: str) -> MolecularGraph:
        """Parsed, canonicalized, measured-restricted graph for one WPID."""
        with self._lock:
            cached = self._memo.get(wpid)
        if cached is not None:
            return cached
        xml_bytes = fetch_gpml(wpid, self.cache_dir, self.online, self._fetcher)
        doc = parse_gpml(xml_bytes, wpid)
        graph = build_pathway_graph(doc, self._resolver, self.measured)
        with self._lock:
            # insert-once: a racing builder computed the same value
            return self._memo.setdefault(wpid, graph)

    def patient_pathways(self, dysregulated: Iterable[str]) -> PathwayQuery:
        return pathway_set_for_sample(dysregulated, self.index)
