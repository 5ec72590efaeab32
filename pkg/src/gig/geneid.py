"""Gene identifier canonicalization to HGNC symbols.

The tested path is a static mapping table (TSV). Keys are namespace-qualified
source ids: ``ensembl:ENSG...``, ``uniprot:P04637``, ``entrez:7157``,
``label:TP53``. Label lookups are case-normalized; accession namespaces are
exact. An optional online client wraps the MyGene.info batch query endpoint
and persists responses so repeated runs are offline-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import CacheCorruptError, CacheWriteError, DataError, OnlineResolveError
from .graph import normalize_gene_symbol

_ENSEMBL_VERSIONED = re.compile(r"^(ENSG\d+)\.\d+$")

CACHE_DIR_ENV = "GIG_CACHE_DIR"

MYGENE_QUERY_URL = "https://mygene.info/v3/query"


def strip_ensembl_version(identifier: str) -> str:
    """Remove a trailing ``.<digits>`` version suffix from an Ensembl gene id.

    Anything that does not look like a versioned ENSG accession is returned
    unchanged, so plain symbols like ``TP53.1`` are never mangled.
    """
    m = _ENSEMBL_VERSIONED.match(identifier)
    return m.group(1) if m else identifier


@dataclass(frozen=True)
class MappingEntry:
    symbol: str
    protein_coding: bool


class GeneIdMapping:
    """Immutable source-id → (HGNC symbol, protein_coding) table."""

    def __init__(self, entries: dict[str, MappingEntry] | None = None):
        self._entries: dict[str, MappingEntry] = {}
        for key, entry in (entries or {}).items():
            self._entries[self._normalize_key(key)] = entry

    @staticmethod
    def _normalize_key(key: str) -> str:
        ns, sep, rest = key.partition(":")
        if not sep:
            raise DataError(f"mapping key {key!r} has no namespace prefix")
        ns = ns.strip().lower()
        rest = rest.strip()
        if ns == "label":
            rest = rest.upper()
        elif ns == "ensembl":
            rest = strip_ensembl_version(rest)
        return f"{ns}:{rest}"

    def lookup(self, qualified_id: str) -> Optional[MappingEntry]:
        try:
            key = self._normalize_key(qualified_id)
        except DataError:
            return None
        return self._entries.get(key)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, qualified_id: str) -> bool:
        return self.lookup(qualified_id) is not None

    def items(self):
        return self._entries.items()

    def merged_with(self, other: "GeneIdMapping") -> "GeneIdMapping":
        merged = dict(self._entries)
        merged.update(other._entries)
        return GeneIdMapping(merged)

    @classmethod
    def load_tsv(cls, path) -> "GeneIdMapping":
        """Load ``source_id<TAB>hgnc_symbol<TAB>protein_coding(0|1)`` rows."""
        entries: dict[str, MappingEntry] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
                source_id, symbol, coding = parts
                if coding not in ("0", "1"):
                    raise DataError(f"{path}:{lineno}: protein_coding must be 0 or 1")
                entries[source_id] = MappingEntry(
                    symbol=normalize_gene_symbol(symbol),
                    protein_coding=coding == "1",
                )
        return cls(entries)


def canonicalize(
    identifier: str, table: GeneIdMapping, require_protein_coding: bool
) -> Optional[str]:
    """Resolve a namespace-qualified id to its HGNC symbol, or None.

    Absence is a value: unmapped ids and (when required) non-coding genes
    return None rather than raising. A symbol is never invented.
    """
    entry = table.lookup(identifier)
    if entry is None:
        return None
    if require_protein_coding and not entry.protein_coding:
        return None
    return entry.symbol


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "gig" / "geneid"


def _batch_cache_path(cache_dir: Path, ids: list[str]) -> Path:
    digest = hashlib.sha256("\n".join(ids).encode("utf-8")).hexdigest()[:32]
    return cache_dir / f"batch_{digest}.json"


def _mygene_fetch(ids: list[str]) -> dict[str, dict]:
    """Query MyGene.info for a batch of ids. Returns id → raw hit dict."""
    import urllib.parse
    import urllib.request

    payload = urllib.parse.urlencode(
        {
            "q": ",".join(ids),
            "scopes": "ensembl.gene,uniprot,entrezgene,symbol",
            "fields": "symbol,type_of_gene",
            "species": "human",
        }
    ).encode("ascii")
    req = urllib.request.Request(MYGENE_QUERY_URL, data=payload, method="POST")
    with urllib.request.urlopen(req, timeout=60) as resp:
        hits = json.loads(resp.read().decode("utf-8"))
    resolved: dict[str, dict] = {}
    for hit in hits:
        query = hit.get("query")
        if query is None or hit.get("notfound"):
            continue
        resolved[query] = {
            "symbol": hit.get("symbol"),
            "type_of_gene": hit.get("type_of_gene"),
        }
    return resolved


def resolve_batch_online(
    ids: Iterable[str],
    cache_dir=None,
    fetcher: Callable[[list[str]], dict[str, dict]] | None = None,
) -> GeneIdMapping:
    """Resolve ids against the annotation service, caching one JSON document
    per id batch under ``cache_dir`` so repeated runs need no network."""
    id_list = sorted(set(ids))
    if not id_list:
        return GeneIdMapping()
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_path = _batch_cache_path(cache_dir, id_list)

    if cache_path.exists():
        try:
            raw = json.loads(cache_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as exc:
            raise CacheCorruptError(str(cache_path), str(exc))
    else:
        fetch = fetcher or _mygene_fetch
        try:
            raw = fetch(id_list)
        except Exception as exc:  # network and protocol failures alike
            raise OnlineResolveError(id_list, str(exc))
        missing = [i for i in id_list if i not in raw]
        if missing:
            # Absence is recorded, not fatal: unresolved ids simply get no entry.
            for i in missing:
                raw[i] = None
        try:
            tmp = cache_path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps(raw, sort_keys=True, indent=0), encoding="utf-8"
            )
            os.replace(tmp, cache_path)
        except OSError as exc:
            raise CacheWriteError(str(cache_path), str(exc))

    entries: dict[str, MappingEntry] = {}
    for source_id, hit in raw.items():
        if not hit or not hit.get("symbol"):
            continue
        entries[_qualify(source_id)] = MappingEntry(
            symbol=normalize_gene_symbol(hit["symbol"]),
            protein_coding=hit.get("type_of_gene") == "protein-coding",
        )
    return GeneIdMapping(entries)


def _qualify(source_id: str) -> str:
    """Namespace-qualify a bare id by shape, for cache-derived entries."""
    if ":" in source_id:
        return source_id
    if re.match(r"^ENSG\d+(\.\d+)?$", source_id):
        return f"ensembl:{source_id}"
    if source_id.isdigit():
        return f"entrez:{source_id}"
    if re.match(r"^[OPQ][0-9][A-Z0-9]{3}[0-9]$", source_id):
        return f"uniprot:{source_id}"
    return f"label:{source_id}"
