import json

import pytest

from gig.cli import build_parser, main

from conftest import COHORT, write_cohort_config


def test_pipeline_stage_outputs(cohort_run):
    out = cohort_run["out"]
    pre = out / "preprocessed"
    assert (pre / "matrix.tsv").exists()
    assert (pre / "zscores.tsv").exists()
    assert (pre / "pcc_feature.tsv").exists()
    dys = json.loads((pre / "dysregulated.json").read_text())
    assert len(dys) == 30
    assert all(len(genes) >= 18 for genes in dys.values())  # tau=80 on 90 genes

    graphs = sorted((out / "graphs").glob("*.edges.txt"))
    assert len(graphs) == 30
    assert json.loads((out / "graphs" / "exclusions.json").read_text()) == {}

    manifest = json.loads((out / "export" / "manifest.json").read_text())
    assert manifest["n_samples"] == 30
    assert manifest["classes"] == ["classA", "classB"]
    assert (out / "run.log").exists()


def test_export_layout_complete(cohort_run):
    export = cohort_run["out"] / "export"
    manifest = json.loads((export / "manifest.json").read_text())
    for rel in manifest["checksums"]:
        assert (export / rel).exists()
    split = json.loads((export / "split.json").read_text())
    assert len(split["train"]) == 24 and len(split["test"]) == 6
    weights = (export / "class_weights.tsv").read_text().splitlines()
    assert weights[0] == "class\tcount\tweight"
    assert len(weights) == 3


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_help_exists_for_every_subcommand():
    for sub in ("preprocess", "build-graphs", "nullmodel", "orbits",
                "compare-orbits", "export", "metrics"):
        with pytest.raises(SystemExit) as exc:
            main([sub, "--help"])
        assert exc.value.code == 0


def test_config_validation_exit_2(tmp_path, capsys):
    config = tmp_path / "bad.toml"
    config.write_text('[input]\nmatrix = "/does/not/exist.tsv"\n')
    assert main(["preprocess", "--config", str(config)]) == 2
    assert "error:usage" in capsys.readouterr().err


def test_missing_pathway_offline_exit_3(tmp_path, capsys):
    (tmp_path / "cache").mkdir()
    (tmp_path / "index.tsv").write_text("G001\tWP404\n")
    config = write_cohort_config(tmp_path, tmp_path / "out")
    text = config.read_text().replace(
        f'pathway_index = "{COHORT}/gene_pathways.tsv"',
        f'pathway_index = "{tmp_path}/index.tsv"',
    ).replace(f'cache_dir = "{COHORT}/gpml"', f'cache_dir = "{tmp_path}/cache"')
    config.write_text(text)
    assert main(["preprocess", "--config", str(config)]) == 0
    assert main(["build-graphs", "--config", str(config)]) == 3
    assert "error:environment" in capsys.readouterr().err


def test_metrics_subcommand_hand_fixture(tmp_path, capsys):
    scores = tmp_path / "scores.tsv"
    scores.write_text(
        "sample_id\ttrue_class\tscore_0\tscore_1\n"
        "p1\tneg\t0.9\t0.1\n"
        "p2\tneg\t0.2\t0.8\n"
        "p3\tpos\t0.3\t0.7\n"
        "p4\tpos\t0.1\t0.9\n"
    )
    labels = tmp_path / "labels.tsv"
    labels.write_text("p1\tneg\np2\tneg\np3\tpos\np4\tpos\n")
    code = main([
        "metrics", "--scores", str(scores), "--labels", str(labels),
        "--out", str(tmp_path / "m"),
    ])
    assert code == 0
    report = json.loads((tmp_path / "m" / "metrics.json").read_text())
    assert report["accuracy"] == 0.75
    assert report["macro_f1"] == pytest.approx(11 / 15, abs=1e-9)
    assert (tmp_path / "m" / "roc.tsv").exists()
    assert (tmp_path / "m" / "pr.tsv").exists()
    stdout = capsys.readouterr().out
    assert '"accuracy": 0.75' in stdout


def test_metrics_missing_file_exit_1(tmp_path, capsys):
    assert main(["metrics", "--scores", str(tmp_path / "nope.tsv")]) == 1
    assert "error:data" in capsys.readouterr().err


def test_nullmodel_deterministic(cohort_run, tmp_path):
    graphs = str(cohort_run["out"] / "graphs")
    for run in ("a", "b"):
        code = main([
            "nullmodel", "--kind", "dp", "--seed", "7",
            "--in", graphs, "--out", str(tmp_path / run),
        ])
        assert code == 0
    for pa in sorted((tmp_path / "a").glob("*.edges.txt")):
        pb = tmp_path / "b" / pa.name
        assert pa.read_bytes() == pb.read_bytes()


def test_nullmodel_full_kind(cohort_run, tmp_path):
    graphs = str(cohort_run["out"] / "graphs")
    assert main(["nullmodel", "--kind", "full", "--in", graphs,
                 "--out", str(tmp_path / "full")]) == 0
    from gig.graph import read_edge_list
    g = read_edge_list(next((tmp_path / "full").glob("*.edges.txt")))
    assert g.n_edges == g.n_nodes * (g.n_nodes - 1) // 2


def test_orbits_and_compare_subcommands(cohort_run, tmp_path):
    graphs = str(cohort_run["out"] / "graphs")
    orbits_tsv = tmp_path / "orbits.tsv"
    assert main(["orbits", "--in", graphs, "--out", str(orbits_tsv)]) == 0
    lines = orbits_tsv.read_text().splitlines()
    assert len(lines) == 31 and lines[0].startswith("graph_id\to0")

    comparison = tmp_path / "comparison.tsv"
    assert main([
        "compare-orbits", "--orbits", str(orbits_tsv),
        "--labels", str(COHORT / "labels.tsv"), "--out", str(comparison),
    ]) == 0
    rows = comparison.read_text().splitlines()[1:]
    assert len(rows) == 15
    pvals = [float(r.split("\t")[-1]) for r in rows]
    assert pvals == sorted(pvals)
    # the two classes were designed with different motif profiles
    assert pvals[0] < 0.01


def test_run_determinism_same_config(tmp_path):
    results = []
    for run in ("r1", "r2"):
        out = tmp_path / run / "out"
        (tmp_path / run).mkdir()
        config = write_cohort_config(tmp_path / run, out)
        for cmd in ("preprocess", "build-graphs", "export"):
            assert main([cmd, "--config", str(config)]) == 0
        manifest = json.loads((out / "export" / "manifest.json").read_text())
        results.append(manifest["checksums"])
    assert results[0] == results[1]


def test_parser_flag_override(tmp_path):
    out = tmp_path / "out"
    config = write_cohort_config(tmp_path, out)
    # tau override changes the dysregulated sets
    assert main(["preprocess", "--config", str(config), "--tau", "90",
                 "--out", str(tmp_path / "out90")]) == 0
    dys = json.loads((tmp_path / "out90" / "preprocessed" / "dysregulated.json").read_text())
    assert all(len(genes) >= 9 for genes in dys.values())
    assert any(len(genes) < 18 for genes in dys.values())


def test_build_parser_smoke():
    parser = build_parser()
    args = parser.parse_args(["nullmodel", "--kind", "er", "--in", "x", "--out", "y"])
    assert args.kind == "er" and args.seed == 0 and args.factor == 10


def test_build_graphs_dump_pathways(tmp_path):
    out = tmp_path / "out"
    config = write_cohort_config(tmp_path, out)
    assert main(["preprocess", "--config", str(config)]) == 0
    assert main(["build-graphs", "--config", str(config), "--dump-pathways"]) == 0
    dumped = sorted(p.name for p in (out / "graphs" / "pathways").glob("*.edges.txt"))
    assert "WP9101.edges.txt" in dumped
    assert len(dumped) == 10  # every pathway in the fixture gets selected
    from gig.graph import read_edge_list
    g = read_edge_list(out / "graphs" / "pathways" / "WP9110.edges.txt")
    assert g.n_edges == 8


def test_preprocess_online_resolves_from_cache(tmp_path, monkeypatch):
    """--online consults the cached annotation client for unmapped matrix ids;
    with the batch already cached, no network is touched."""
    from gig.geneid import resolve_batch_online

    cache = tmp_path / "idcache"
    monkeypatch.setenv("GIG_CACHE_DIR", str(cache))
    resolve_batch_online(
        ["ENSG00000900001"],
        cache,
        fetcher=lambda ids: {
            "ENSG00000900001": {"symbol": "NEWGENE", "type_of_gene": "protein-coding"}
        },
    )

    (tmp_path / "matrix.tsv").write_text(
        "gene\ts1\ts2\ts3\n"
        "ENSG00000900000.1\t1.0\t2.0\t9.0\n"
        "ENSG00000900001.4\t5.0\t1.0\t7.0\n"
    )
    (tmp_path / "mapping.tsv").write_text("ensembl:ENSG00000900000\tOLDGENE\t1\n")
    (tmp_path / "index.tsv").write_text("OLDGENE\tWP1\nNEWGENE\tWP1\n")
    (tmp_path / "labels.tsv").write_text("s1\ta\ns2\ta\ns3\tb\n")
    (tmp_path / "gpml").mkdir()
    config = tmp_path / "config.toml"
    config.write_text(
        f"""
[input]
matrix = "matrix.tsv"
mapping_table = "mapping.tsv"
pathway_index = "index.tsv"
labels = "labels.tsv"
[pathways]
cache_dir = "gpml"
offline = false
[preprocess]
hvg_n = 5
tau = 50.0
k = 1
[output]
dir = "out"
"""
    )
    assert main(["preprocess", "--config", str(config)]) == 0
    meta = json.loads((tmp_path / "out" / "preprocessed" / "meta.json").read_text())
    assert meta["canonical_genes"] == 2
    assert meta["dropped_unmapped"] == []
    matrix = (tmp_path / "out" / "preprocessed" / "matrix.tsv").read_text()
    assert "NEWGENE" in matrix and "OLDGENE" in matrix
