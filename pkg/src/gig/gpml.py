"""GPML (Graphical Pathway Markup Language) parsing.

Parsing is schema-lenient: elements are matched by local tag name so any GPML
namespace revision works, and unknown elements or attributes are skipped.
Only molecular DataNodes and the GraphRef targets of Interaction points are
retained; labels, shapes, groups, and anchors never become graph structure.
"""

from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import GpmlParseError, GpmlSchemaError
from .graph import MolecularGraph, strip_self_loops

# GPML Xref Database attribute values seen in the wild, mapped to namespaces.
_XREF_NAMESPACES = {
    "ensembl": "ensembl",
    "ensembl human": "ensembl",
    "entrez gene": "entrez",
    "ncbi gene": "entrez",
    "uniprot": "uniprot",
    "uniprotkb": "uniprot",
    "uniprot-trembl": "uniprot",
    "uniprot-swissprot": "uniprot",
}

# Resolution order per node: accession cross-references, then the label.
_RESOLUTION_ORDER = ("ensembl", "uniprot", "entrez", "label")


class NodeType(enum.Enum):
    GENE_PRODUCT = "GeneProduct"
    RNA = "Rna"
    PROTEIN = "Protein"
    OTHER = "Other"


_MOLECULAR_TYPES = {NodeType.GENE_PRODUCT, NodeType.RNA, NodeType.PROTEIN}


@dataclass(frozen=True)
class DataNode:
    graph_id: str
    label: str
    node_type: NodeType
    raw_type: str
    xrefs: tuple[str, ...] = ()  # namespace-qualified ids


@dataclass(frozen=True)
class InteractionElement:
    referenced_graph_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class PathwayDocument:
    wpid: str
    data_nodes: tuple[DataNode, ...] = ()
    interactions: tuple[InteractionElement, ...] = ()


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _classify(raw_type: str) -> NodeType:
    t = raw_type.strip().lower()
    if t == "geneproduct":
        return NodeType.GENE_PRODUCT
    if t in ("rna", "mirna", "ncrna"):
        return NodeType.RNA
    if t == "protein":
        return NodeType.PROTEIN
    return NodeType.OTHER


def _byte_offset(xml_bytes: bytes, line: int, column: int) -> int:
    """Offset of (line, column) in the raw bytes; lines are 1-based."""
    offset = 0
    for _ in range(line - 1):
        nl = xml_bytes.find(b"\n", offset)
        if nl < 0:
            break
        offset = nl + 1
    return offset + column


def parse_gpml(xml_bytes: bytes, wpid: str) -> PathwayDocument:
    """Parse one GPML document into its molecular nodes and interactions."""
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (1, 0))
        raise GpmlParseError(
            f"{wpid}: malformed GPML XML at line {line}, column {column}: {exc}",
            byte_offset=_byte_offset(xml_bytes, line, column),
        )
    if _local_name(root.tag) != "Pathway":
        raise GpmlSchemaError(
            f"{wpid}: root element is <{_local_name(root.tag)}>, expected <Pathway>"
        )

    data_nodes: list[DataNode] = []
    interactions: list[InteractionElement] = []
    seen_graph_ids: set[str] = set()

    for elem in root.iter():
        name = _local_name(elem.tag)
        if name == "DataNode":
            graph_id = elem.get("GraphId", "")
            if not graph_id or graph_id in seen_graph_ids:
                continue
            seen_graph_ids.add(graph_id)
            raw_type = elem.get("Type", "")
            xrefs = []
            for child in elem:
                if _local_name(child.tag) != "Xref":
                    continue
                db = (child.get("Database") or "").strip().lower()
                acc = (child.get("ID") or "").strip()
                ns = _XREF_NAMESPACES.get(db)
                if ns and acc:
                    xrefs.append(f"{ns}:{acc}")
            data_nodes.append(
                DataNode(
                    graph_id=graph_id,
                    label=(elem.get("TextLabel") or "").strip(),
                    node_type=_classify(raw_type),
                    raw_type=raw_type,
                    xrefs=tuple(xrefs),
                )
            )
        elif name == "Interaction":
            refs = []
            for point in elem.iter():
                if _local_name(point.tag) != "Point":
                    continue
                ref = point.get("GraphRef")
                if ref:
                    refs.append(ref)
            interactions.append(InteractionElement(referenced_graph_ids=tuple(refs)))

    return PathwayDocument(
        wpid=wpid,
        data_nodes=tuple(data_nodes),
        interactions=tuple(interactions),
    )


def is_mirna_node(node: DataNode) -> bool:
    """MicroRNA rule: an RNA node explicitly typed as miRNA, or a label with
    a MIR / hsa-miR prefix."""
    if "mirna" in node.raw_type.strip().lower():
        return True
    label = node.label
    return label.upper().startswith("MIR") or label.lower().startswith("hsa-mir")


def resolve_data_node(
    node: DataNode,
    resolver: Callable[[str], Optional[str]],
) -> Optional[str]:
    """Resolve a DataNode to an HGNC symbol: Ensembl xref first, then UniProt,
    then Entrez, then the text label. None when nothing resolves."""
    by_ns = {}
    for xref in node.xrefs:
        ns = xref.split(":", 1)[0]
        by_ns.setdefault(ns, xref)
    for ns in _RESOLUTION_ORDER:
        if ns == "label":
            if node.label:
                symbol = resolver(f"label:{node.label}")
                if symbol is not None:
                    return symbol
            continue
        qualified = by_ns.get(ns)
        if qualified is not None:
            symbol = resolver(qualified)
            if symbol is not None:
                return symbol
    return None


def build_pathway_graph(
    doc: PathwayDocument,
    resolver: Callable[[str], Optional[str]],
    measured: Iterable[str],
) -> MolecularGraph:
    """Apply the node-retention and edge-inference rules to a parsed document.

    Retained nodes are molecular (GeneProduct/Rna/Protein), non-miRNA,
    HGNC-resolvable, and present in the measured gene set. Each interaction
    contributes all pairwise edges among its retained referenced nodes;
    fewer than two retained references contribute nothing. Self-loops from
    identifier collapsing are removed.
    """
    measured_set = set(measured)
    symbol_by_graph_id: dict[str, str] = {}
    for node in doc.data_nodes:
        if node.node_type not in _MOLECULAR_TYPES or is_mirna_node(node):
            continue
        symbol = resolve_data_node(node, resolver)
        if symbol is None or symbol not in measured_set:
            continue
        symbol_by_graph_id[node.graph_id] = symbol

    edges: list[tuple[str, str]] = []
    for interaction in doc.interactions:
        retained = [
            symbol_by_graph_id[ref]
            for ref in interaction.referenced_graph_ids
            if ref in symbol_by_graph_id
        ]
        if len(retained) < 2:
            continue
        for i in range(len(retained)):
            for j in range(i + 1, len(retained)):
                edges.append((retained[i], retained[j]))

    raw = MolecularGraph(symbol_by_graph_id.values(), edges, allow_self_loops=True)
    return strip_self_loops(raw)
