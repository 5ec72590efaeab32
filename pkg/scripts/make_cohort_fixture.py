#!/usr/bin/env python3
"""Regenerate the desk-scale cohort fixture under tests/fixtures/cohort/.

The fixture is fully deterministic (fixed seed). Pathway topologies are
authored here as explicit structures: complex-style multi-reference
interactions produce cliques, ring modules produce 4-cycles, chains hang
tails off closed motifs. Two sample classes boost different pathway blocks
so group comparisons have signal.

Run from the repository root:  python scripts/make_cohort_fixture.py
"""

import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "fixtures" / "cohort"

N_GENES = 100  # canonical G001..G100; G091..G100 are near-constant HVG droppers
N_SAMPLES = 30
SEED = 20240817

GPML_HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<Pathway xmlns="http://pathvisio.org/GPML/2013a" Name="{name}" Version="20240101" '
    'Organism="Homo sapiens">\n'
)


def gene(i):
    return f"G{i:03d}"


def ensembl(i):
    return f"ENSG{100000 + i:011d}"


def block(lo, hi):
    return [gene(i) for i in range(lo, hi + 1)]


# pathway topologies: node spec is (symbol, resolve_via) where resolve_via is
# "label", "ensembl", "entrez", or "uniprot"; interactions list node symbols,
# >2 refs model complexes and expand to all pairwise edges downstream.
#
# Design constraints for the null-model contrasts: patient graphs (unions of
# 2 primary blocks plus overlay/crosslink pathways) must stay sparse (mean
# degree ~3.3) while packing closed motifs, because an Erdos-Renyi control at
# the same density grows induced squares like <d>^4. Bipartite complexes
# (K2,4: two regulators x four targets) are the square factories, protein
# complexes (K4) the clique factories, and each block has a hub so the degree
# sequence is heterogeneous enough that degree-preserving controls keep more
# triangles than ER ones.


def a_block(wpid_name, lo, via):
    """Clique-leaning 15-gene block: K4 complex, triangle with tail, K2,4."""
    g = lambda k: gene(lo + k)
    return {
        "name": wpid_name,
        "nodes": [(gene(i), via) for i in range(lo, lo + 15)],
        "interactions": [
            (g(0), g(1), g(2), g(3)),          # four-subunit complex -> K4
            (g(4), g(5), g(6)),                # ternary complex -> triangle
            (g(6), g(7)),                      # pendant tail -> paws
            # two regulators driving four targets -> K2,4, six squares
            (g(8), g(10)), (g(8), g(11)), (g(8), g(12)), (g(8), g(13)),
            (g(9), g(10)), (g(9), g(11)), (g(9), g(12)), (g(9), g(13)),
            (g(12), g(14)),                    # tail off a target
            (g(0), g(4)), (g(0), g(8)), (g(0), g(10)),  # hub wiring
        ],
    }


def b_block(wpid_name, lo, via):
    """Square-leaning 15-gene block: K2,4, ring, triangle chain, hub."""
    g = lambda k: gene(lo + k)
    return {
        "name": wpid_name,
        "nodes": [(gene(i), via) for i in range(lo, lo + 15)],
        "interactions": [
            # hub (g0) is one of the two regulators of the K2,4
            (g(0), g(2)), (g(0), g(3)), (g(0), g(4)), (g(0), g(5)),
            (g(1), g(2)), (g(1), g(3)), (g(1), g(4)), (g(1), g(5)),
            (g(2), g(3)),                      # co-target edge: two triangles
            (g(6), g(7)), (g(7), g(8)), (g(8), g(9)), (g(9), g(6)),  # ring
            (g(10), g(11), g(12)),             # ternary complex -> triangle
            (g(12), g(13)),                    # tail
            (g(0), g(6)), (g(0), g(8)), (g(0), g(10)),  # hub wiring
        ],
    }


PATHWAYS = {
    "WP9101": a_block("Kinase complex module A", 1, "ensembl"),
    "WP9102": a_block("Kinase complex module B", 16, "label"),
    "WP9103": a_block("Kinase complex module C", 31, "ensembl"),
    "WP9104": {
        # overlay over the three A blocks: master-regulator complex + ring
        "name": "Master regulator assembly",
        "nodes": [(s, "label") for s in
                  ("G001", "G002", "G016", "G017", "G031", "G032",
                   "G041", "G042", "G043", "G044", "G045")],
        "interactions": [
            ("G001", "G016", "G031", "G041"),  # regulator complex -> K4
            ("G002", "G017"), ("G017", "G032"), ("G032", "G042"), ("G042", "G002"),
            ("G043", "G044"), ("G044", "G045"), ("G043", "G045"),
            ("G041", "G043"),
        ],
    },
    "WP9105": b_block("Transport ring module A", 46, "entrez"),
    "WP9106": {
        # overlay over the three B blocks
        "name": "Secretion coupling assembly",
        "nodes": [(s, "label") for s in
                  ("G046", "G047", "G061", "G062", "G076", "G077",
                   "G055", "G070", "G085")],
        "interactions": [
            # two couplers x three effectors -> K2,3, three squares
            ("G046", "G076"), ("G046", "G055"), ("G046", "G070"),
            ("G061", "G076"), ("G061", "G055"), ("G061", "G070"),
            ("G047", "G062"), ("G062", "G077"), ("G077", "G085"), ("G085", "G047"),
        ],
    },
    "WP9107": b_block("Transport ring module B", 61, "label"),
    "WP9108": b_block("Transport ring module C", 76, "label"),
    "WP9109": {
        # crosslink across the A blocks, square-heavy
        "name": "Crosstalk axis alpha",
        "nodes": [(s, "label") for s in
                  ("G003", "G018", "G033", "G007", "G022", "G037")],
        "interactions": [
            ("G003", "G033"), ("G003", "G007"), ("G003", "G022"), ("G003", "G037"),
            ("G018", "G033"), ("G018", "G007"), ("G018", "G022"), ("G018", "G037"),
        ],
    },
    "WP9110": {
        # crosslink across the B blocks
        "name": "Crosstalk axis beta",
        "nodes": [(s, "label") for s in
                  ("G048", "G063", "G078", "G052", "G067", "G082")],
        "interactions": [
            ("G048", "G078"), ("G048", "G052"), ("G048", "G067"), ("G048", "G082"),
            ("G063", "G078"), ("G063", "G052"), ("G063", "G067"), ("G063", "G082"),
        ],
    },
}

# master regulators appear in the other same-class block pathways too, so
# merged patient graphs concentrate degree on them
PATHWAYS["WP9102"]["nodes"].append(("G001", "label"))
PATHWAYS["WP9102"]["interactions"] += [("G001", "G019"), ("G001", "G023"), ("G001", "G027")]
PATHWAYS["WP9103"]["nodes"].append(("G001", "label"))
PATHWAYS["WP9103"]["interactions"] += [("G001", "G034"), ("G001", "G038"), ("G001", "G044")]
PATHWAYS["WP9107"]["nodes"].append(("G046", "label"))
PATHWAYS["WP9107"]["interactions"] += [("G046", "G064"), ("G046", "G068"), ("G046", "G072")]
PATHWAYS["WP9108"]["nodes"].append(("G046", "label"))
PATHWAYS["WP9108"]["interactions"] += [("G046", "G079"), ("G046", "G083"), ("G046", "G087")]
# the uniprot-resolved node sits in block C of the B class
PATHWAYS["WP9108"]["nodes"] = [
    (s, "uniprot" if s == "G082" else via) for s, via in PATHWAYS["WP9108"]["nodes"]
]


ENTREZ = {gene(i): str(9000 + i) for i in range(46, 61)}
UNIPROT = {"G082": "Q90082"}

CLIQUE_BLOCKS = [block(1, 15), block(16, 30), block(31, 45)]
CYCLE_BLOCKS = [block(46, 60), block(61, 75), block(76, 90)]


def xref_for(symbol, via):
    if via == "ensembl":
        return ("Ensembl", ensembl(int(symbol[1:])))
    if via == "entrez":
        return ("Entrez Gene", ENTREZ[symbol])
    if via == "uniprot":
        return ("Uniprot-TrEMBL", UNIPROT[symbol])
    return None


def write_gpml(wpid, spec, out_dir):
    lines = [GPML_HEADER.format(name=spec["name"])]
    node_ids = {}
    for idx, (symbol, via) in enumerate(spec["nodes"]):
        graph_id = f"d{idx:03d}"
        node_ids[symbol] = graph_id
        # xref-resolved nodes carry an opaque display label on purpose:
        # only the cross-reference identifies them
        label = symbol if via == "label" else f"subunit-{idx:03d}"
        lines.append(
            f'  <DataNode TextLabel="{label}" GraphId="{graph_id}" Type="GeneProduct">\n'
            f'    <Graphics CenterX="{80 + 40 * (idx % 8)}.0" CenterY="{80 + 40 * (idx // 8)}.0" '
            'Width="80.0" Height="20.0" ZOrder="32768" />\n'
        )
        xref = xref_for(symbol, via)
        if xref:
            lines.append(f'    <Xref Database="{xref[0]}" ID="{xref[1]}" />\n')
        else:
            lines.append('    <Xref Database="" ID="" />\n')
        lines.append("  </DataNode>\n")

    if wpid == "WP9108":
        # distractors: a microRNA node, an unmappable protein, and decoration
        lines.append(
            '  <DataNode TextLabel="hsa-miR-9001" GraphId="mir1" Type="Rna">\n'
            '    <Graphics CenterX="400.0" CenterY="300.0" Width="80.0" Height="20.0" />\n'
            '    <Xref Database="" ID="" />\n'
            "  </DataNode>\n"
            '  <DataNode TextLabel="UNKNOWNP1" GraphId="unk1" Type="Protein">\n'
            '    <Graphics CenterX="440.0" CenterY="300.0" Width="80.0" Height="20.0" />\n'
            '    <Xref Database="" ID="" />\n'
            "  </DataNode>\n"
            '  <Label TextLabel="decorative caption" GraphId="lbl1">\n'
            '    <Graphics CenterX="10.0" CenterY="10.0" Width="120.0" Height="20.0" />\n'
            "  </Label>\n"
            '  <Shape GraphId="shp1">\n'
            '    <Graphics CenterX="20.0" CenterY="20.0" Width="200.0" Height="100.0" ShapeType="Rectangle" />\n'
            "  </Shape>\n"
        )

    for iidx, members in enumerate(spec["interactions"]):
        points = "".join(
            f'      <Point X="{10.0 + 5 * p}" Y="{10.0 + 5 * iidx}" GraphRef="{node_ids[m]}" />\n'
            for p, m in enumerate(members)
        )
        lines.append(
            f'  <Interaction GraphId="i{iidx:03d}">\n    <Graphics ZOrder="12288" LineThickness="1.0">\n'
            f"{points}    </Graphics>\n    <Xref Database=\"\" ID=\"\" />\n  </Interaction>\n"
        )

    if wpid == "WP9108":
        d = node_ids
        lines.append(
            "  <Interaction GraphId=\"ix90\">\n    <Graphics>\n"
            f'      <Point X="1.0" Y="1.0" GraphRef="mir1" />\n'
            f'      <Point X="2.0" Y="2.0" GraphRef="{d["G079"]}" />\n'
            "    </Graphics>\n  </Interaction>\n"
            "  <Interaction GraphId=\"ix91\">\n    <Graphics>\n"
            f'      <Point X="1.0" Y="1.0" GraphRef="unk1" />\n'
            f'      <Point X="2.0" Y="2.0" GraphRef="{d["G080"]}" />\n'
            "    </Graphics>\n  </Interaction>\n"
            "  <Interaction GraphId=\"ix92\">\n    <Graphics>\n"
            '      <Point X="1.0" Y="1.0" />\n'
            f'      <Point X="2.0" Y="2.0" GraphRef="{d["G090"]}" />\n'
            "    </Graphics>\n  </Interaction>\n"
        )

    lines.append('  <InfoBox CenterX="0.0" CenterY="0.0" />\n</Pathway>\n')
    (out_dir / f"{wpid}.gpml").write_text("".join(lines), encoding="utf-8")


def sample_blocks(i):
    """Boosted gene blocks for 0-based sample index i."""
    if i < 15:
        primary = CLIQUE_BLOCKS[i % 3]
        secondary = CLIQUE_BLOCKS[(i + 1) % 3]
    else:
        j = i - 15
        primary = CYCLE_BLOCKS[j % 3]
        secondary = CYCLE_BLOCKS[(j + 1) % 3]
    return primary, secondary, []


def make_matrix(rng):
    samples = [f"s{i + 1:02d}" for i in range(N_SAMPLES)]
    base = {gene(i): 8.0 + (i % 11) * 2.0 for i in range(1, 91)}
    rows = {}
    for i in range(1, 91):
        rows[gene(i)] = [0.0] * N_SAMPLES
    for si in range(N_SAMPLES):
        primary, secondary, extra = sample_blocks(si)
        boosted_up = set(primary) | set(extra)
        boosted_down = set(secondary) if si % 2 == 1 else set()
        if si % 2 == 0:
            boosted_up |= set(secondary)
        for i in range(1, 91):
            g = gene(i)
            b = base[g]
            jitter = 1.0 + rng.uniform(-0.05, 0.05)
            if g in boosted_up:
                value = b * rng.uniform(18.0, 26.0)
            elif g in boosted_down:
                value = b * rng.uniform(0.01, 0.03)
            else:
                value = b * jitter
            rows[g][si] = round(value, 4)
    # near-constant tail genes: variance too small to survive HVG selection
    for i in range(91, 101):
        rows[gene(i)] = [round(50.0 * (1.0 + rng.uniform(-0.001, 0.001)), 4)
                         for _ in range(N_SAMPLES)]
    return samples, rows


def main():
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    gpml_dir = OUT / "gpml"
    gpml_dir.mkdir(exist_ok=True)

    for wpid, spec in PATHWAYS.items():
        write_gpml(wpid, spec, gpml_dir)

    # mapping table: ensembl for all canonical genes, labels for GPML label
    # resolution, entrez/uniprot for the xref-carrying pathway nodes, plus a
    # non-coding decoy and nothing for the unmapped decoy
    mapping_lines = []
    for i in range(1, 101):
        mapping_lines.append(f"ensembl:{ensembl(i)}\t{gene(i)}\t1")
        mapping_lines.append(f"label:{gene(i)}\t{gene(i)}\t1")
    for symbol, acc in ENTREZ.items():
        mapping_lines.append(f"entrez:{acc}\t{symbol}\t1")
    for symbol, acc in UNIPROT.items():
        mapping_lines.append(f"uniprot:{acc}\t{symbol}\t1")
    mapping_lines.append(f"ensembl:{ensembl(101)}\tLNC9999\t0")
    mapping_lines.append(f"ensembl:{ensembl(103)}\t{gene(1)}\t1")  # duplicate target
    (OUT / "mapping.tsv").write_text("\n".join(mapping_lines) + "\n", encoding="utf-8")

    index_lines = []
    for wpid, spec in sorted(PATHWAYS.items()):
        for symbol, _via in spec["nodes"]:
            index_lines.append(f"{symbol}\t{wpid}")
    (OUT / "gene_pathways.tsv").write_text(
        "\n".join(sorted(set(index_lines))) + "\n", encoding="utf-8"
    )

    samples, rows = make_matrix(rng)
    matrix_lines = ["gene\t" + "\t".join(samples)]
    version = 0
    for i in range(1, 101):
        version = version % 9 + 1
        row = rows[gene(i)]
        matrix_lines.append(
            f"{ensembl(i)}.{version}\t" + "\t".join(f"{v:.4f}" for v in row)
        )
    # decoys: non-coding, unmapped, duplicate-of-G001
    decoy = ["\t".join(f"{rng.uniform(5, 15):.4f}" for _ in samples) for _ in range(3)]
    matrix_lines.append(f"{ensembl(101)}.1\t{decoy[0]}")
    matrix_lines.append(f"{ensembl(102)}.3\t{decoy[1]}")
    matrix_lines.append(f"{ensembl(103)}.7\t{decoy[2]}")
    (OUT / "matrix.tsv").write_text("\n".join(matrix_lines) + "\n", encoding="utf-8")

    label_lines = [
        f"s{i + 1:02d}\t{'classA' if i < 15 else 'classB'}" for i in range(N_SAMPLES)
    ]
    (OUT / "labels.tsv").write_text("\n".join(label_lines) + "\n", encoding="utf-8")

    print(f"fixture written to {OUT}")
    print(f"  pathways: {len(PATHWAYS)}, samples: {N_SAMPLES}, genes: {N_GENES}+3 decoys")


if __name__ == "__main__":
    main()
