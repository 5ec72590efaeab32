import random
from pathlib import Path

import pytest

from gig.graph import MolecularGraph

FIXTURES = Path(__file__).parent / "fixtures"
COHORT = FIXTURES / "cohort"

NULLMODEL_SEED = 101  # pinned: controls are matched per (sample, seed)


def write_cohort_config(target_dir: Path, out_dir: Path) -> Path:
    """Config pointing at the shipped cohort fixture, writing under out_dir."""
    config = target_dir / "config.toml"
    config.write_text(
        f"""
[input]
matrix = "{COHORT}/matrix.tsv"
genes_in_rows = true
mapping_table = "{COHORT}/mapping.tsv"
pathway_index = "{COHORT}/gene_pathways.tsv"
labels = "{COHORT}/labels.tsv"

[pathways]
cache_dir = "{COHORT}/gpml"
offline = true

[preprocess]
hvg_n = 90
log1p = true
epsilon = 1e-8
tau = 80.0
k = 50

[split]
fraction = 0.8
seed = 13

[output]
dir = "{out_dir}"
""",
        encoding="utf-8",
    )
    return config


@pytest.fixture(scope="session")
def cohort_run(tmp_path_factory):
    """One full preprocess -> build-graphs -> export run on the fixture cohort."""
    from gig.cli import main

    base = tmp_path_factory.mktemp("cohort")
    out = base / "out"
    config = write_cohort_config(base, out)
    for cmd in ("preprocess", "build-graphs", "export"):
        assert main([cmd, "--config", str(config)]) == 0
    return {"config": config, "out": out}


def path_graph(*names):
    return MolecularGraph(names, list(zip(names, names[1:])))


def cycle_graph(*names):
    edges = list(zip(names, names[1:])) + [(names[-1], names[0])]
    return MolecularGraph(names, edges)


def complete_graph(*names):
    edges = [
        (names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
    ]
    return MolecularGraph(names, edges)


def random_graph(n, density, seed):
    rng = random.Random(seed)
    names = [f"N{i:03d}" for i in range(n)]
    edges = [
        (names[i], names[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    return MolecularGraph(names, edges)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
