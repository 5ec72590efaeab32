import hashlib
import json
import random
from pathlib import Path

import pytest

# Fixture calibration: a compact gene pool and low feature noise keep the
# topology signal dominant; 150 training graphs per class give the optimizer
# enough steps at batch size 32 to separate the classes within 50 epochs.
GENE_POOL = [f"TG{i:02d}" for i in range(1, 9)]
N_TRAIN_PER_CLASS = 150
N_TEST_PER_CLASS = 25
FIXTURE_SEED = 3
TRAIN_SEED = 5
NOISE_SCALE = 0.2


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_synthetic_export(
    root: Path,
    n_train_per_class=N_TRAIN_PER_CLASS,
    n_test_per_class=N_TEST_PER_CLASS,
    seed=FIXTURE_SEED,
):
    """Export-layout cohort where topology encodes the class.

    Class "tri" samples are triangles, class "path" samples are 3-node paths,
    over genes drawn from a shared pool; expression features are
    non-informative noise, so only the graph structure separates the classes.
    """
    rng = random.Random(seed)
    samples_dir = root / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)
    classes = ["path", "tri"]  # sorted order; path=0, tri=1

    def make_sample(sid, label):
        genes = rng.sample(GENE_POOL, 3)
        lines = ["gene\tvocab_idx\tz\tc"]
        for g in genes:
            z = rng.uniform(-NOISE_SCALE, NOISE_SCALE)
            c = rng.uniform(0.0, NOISE_SCALE)
            lines.append(f"{g}\t{GENE_POOL.index(g) + 1}\t{z!r}\t{c!r}")
        (samples_dir / f"{sid}.nodes.tsv").write_text("\n".join(lines) + "\n")
        if label == 1:  # triangle
            undirected = [(0, 1), (1, 2), (0, 2)]
        else:  # path
            undirected = [(0, 1), (1, 2)]
        directed = sorted([(a, b) for a, b in undirected] + [(b, a) for a, b in undirected])
        (samples_dir / f"{sid}.edges.tsv").write_text(
            "".join(f"{a}\t{b}\n" for a, b in directed)
        )
        (samples_dir / f"{sid}.label").write_text(f"{label}\n")

    train_ids, test_ids = [], []
    counter = 0
    for label in (0, 1):
        for _ in range(n_train_per_class):
            sid = f"t{counter:03d}"
            make_sample(sid, label)
            train_ids.append(sid)
            counter += 1
        for _ in range(n_test_per_class):
            sid = f"t{counter:03d}"
            make_sample(sid, label)
            test_ids.append(sid)
            counter += 1

    vocab_lines = ["symbol\tindex", "<unk>\t0"]
    vocab_lines += [f"{g}\t{i + 1}" for i, g in enumerate(GENE_POOL)]
    (root / "vocab.tsv").write_text("\n".join(vocab_lines) + "\n")

    (root / "split.json").write_text(
        json.dumps({"seed": seed, "train": train_ids, "test": test_ids}) + "\n"
    )
    (root / "class_weights.tsv").write_text(
        "class\tcount\tweight\n"
        f"path\t{n_train_per_class}\t1.0\n"
        f"tri\t{n_train_per_class}\t1.0\n"
    )
    checksums = {
        str(p.relative_to(root)): _sha256(p)
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }
    (root / "manifest.json").write_text(
        json.dumps(
            {
                "n_samples": len(train_ids) + len(test_ids),
                "classes": classes,
                "checksums": checksums,
            },
            sort_keys=True,
        )
        + "\n"
    )
    return root


@pytest.fixture(scope="session")
def synthetic_export(tmp_path_factory):
    return write_synthetic_export(tmp_path_factory.mktemp("export"))


def write_expression_export(root: Path, n_train_per_class=60, n_test_per_class=20,
                            seed=FIXTURE_SEED):
    """Variant cohort where the z feature encodes the class.

    Used by the attribution tests: Integrated Gradients on the expression
    channel only makes sense against a model whose logits actually depend on
    expression, otherwise the logit gap to the zero-expression baseline
    degenerates and relative completeness is ill-conditioned.
    """
    rng = random.Random(seed + 1)
    samples_dir = root / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)

    def make_sample(sid, label):
        genes = rng.sample(GENE_POOL, 3)
        center = 1.2 if label == 1 else -1.2
        lines = ["gene\tvocab_idx\tz\tc"]
        for g in genes:
            z = rng.gauss(center, 0.3)
            c = rng.uniform(0.3, 0.7)
            lines.append(f"{g}\t{GENE_POOL.index(g) + 1}\t{z!r}\t{c!r}")
        (samples_dir / f"{sid}.nodes.tsv").write_text("\n".join(lines) + "\n")
        undirected = [(0, 1), (1, 2)] if rng.random() < 0.5 else [(0, 1), (1, 2), (0, 2)]
        directed = sorted([(a, b) for a, b in undirected] + [(b, a) for a, b in undirected])
        (samples_dir / f"{sid}.edges.tsv").write_text(
            "".join(f"{a}\t{b}\n" for a, b in directed)
        )
        (samples_dir / f"{sid}.label").write_text(f"{label}\n")

    train_ids, test_ids = [], []
    counter = 0
    for label in (0, 1):
        for _ in range(n_train_per_class):
            sid = f"e{counter:03d}"
            make_sample(sid, label)
            train_ids.append(sid)
            counter += 1
        for _ in range(n_test_per_class):
            sid = f"e{counter:03d}"
            make_sample(sid, label)
            test_ids.append(sid)
            counter += 1

    vocab_lines = ["symbol\tindex", "<unk>\t0"]
    vocab_lines += [f"{g}\t{i + 1}" for i, g in enumerate(GENE_POOL)]
    (root / "vocab.tsv").write_text("\n".join(vocab_lines) + "\n")
    (root / "split.json").write_text(
        json.dumps({"seed": seed, "train": train_ids, "test": test_ids}) + "\n"
    )
    (root / "class_weights.tsv").write_text(
        "class\tcount\tweight\n"
        f"neg\t{n_train_per_class}\t1.0\n"
        f"pos\t{n_train_per_class}\t1.0\n"
    )
    (root / "manifest.json").write_text(
        json.dumps(
            {
                "n_samples": len(train_ids) + len(test_ids),
                "classes": ["neg", "pos"],
                "checksums": {},
            },
            sort_keys=True,
        )
        + "\n"
    )
    return root


@pytest.fixture(scope="session")
def expression_export(tmp_path_factory):
    return write_expression_export(tmp_path_factory.mktemp("expr_export"))
