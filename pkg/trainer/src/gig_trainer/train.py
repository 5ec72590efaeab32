"""Training loop: AdamW, class-weighted cross-entropy, gradient clipping,
best-held-out checkpointing, and scores.tsv output in the metrics contract."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import torch

from .data import Batch, DatasetError, ExportDataset, collate
from .model import GigModel, weighted_cross_entropy


@dataclass
class TrainConfig:
    backbone: str = "gcn"
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 32
    grad_clip_norm: float = 5.0
    dropout: float = 0.2
    epochs: int = 50
    seed: int = 0
    device: str = "auto"  # cpu | cuda | auto

    def __post_init__(self):
        for field in ("learning_rate", "weight_decay", "batch_size", "grad_clip_norm", "epochs"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field} must be positive")

    def resolve_device(self) -> torch.device:
        if self.device == "auto":
            return torch.device("cuda" if torch.cuda.is_available() else "cpu")
        return torch.device(self.device)


def _seed_everything(seed: int):
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)


def macro_f1_from_predictions(y_true, y_pred, n_classes: int) -> float:
    """Unweighted mean of per-class F1 with the 0/0 -> 0 convention."""
    f1s = []
    for c in range(n_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return sum(f1s) / n_classes


@dataclass
class TrainResult:
    best_epoch: int
    best_macro_f1: float
    test_accuracy: float
    checkpoint_dir: Path
    scores_path: Path


def evaluate(model: GigModel, batch: Batch):
    model.eval()
    with torch.no_grad():
        logits = model.forward_batch(batch)
        probs = torch.softmax(logits, dim=1)
        preds = logits.argmax(dim=1)
    return probs.cpu().numpy(), preds.cpu().numpy()


def train(config: TrainConfig, export_dir, out_dir) -> TrainResult:
    dataset = ExportDataset(export_dir)
    if not dataset.test_ids:
        raise DatasetError("split has no held-out samples")
    device = config.resolve_device()
    _seed_everything(config.seed)

    train_samples = dataset.samples(dataset.train_ids)
    test_batch = collate(dataset.samples(dataset.test_ids)).to(device)
    weights = torch.as_tensor(dataset.class_weights, dtype=torch.float32, device=device)

    model = GigModel(
        vocab_size=dataset.vocab_size,
        n_classes=len(dataset.classes),
        backbone=config.backbone,
        dropout=config.dropout,
    ).to(device)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )

    rng = random.Random(config.seed)
    best_f1 = -1.0
    best_epoch = -1
    best_state = None
    y_true = test_batch.labels.cpu().tolist()

    for epoch in range(config.epochs):
        model.train()
        order = list(range(len(train_samples)))
        rng.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            chunk = [train_samples[i] for i in order[start : start + config.batch_size]]
            batch = collate(chunk).to(device)
            optimizer.zero_grad()
            logits = model.forward_batch(batch)
            loss = weighted_cross_entropy(logits, batch.labels, weights)
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip_norm)
            optimizer.step()

        _probs, preds = evaluate(model, test_batch)
        f1 = macro_f1_from_predictions(y_true, preds.tolist(), len(dataset.classes))
        if f1 > best_f1:
            best_f1 = f1
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}

    model.load_state_dict(best_state)
    probs, preds = evaluate(model, test_batch)
    accuracy = float(np.mean([p == t for p, t in zip(preds.tolist(), y_true)]))

    out = Path(out_dir)
    checkpoint_dir = out / "checkpoint"
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), checkpoint_dir / "weights.pt")
    bundle = {
        "hyperparameters": model.hyperparameters(),
        "train_config": asdict(config),
        "classes": list(dataset.classes),
        "vocabulary": list(dataset.vocab),
        "split": {
            "seed": dataset.split_seed,
            "train": list(dataset.train_ids),
            "test": list(dataset.test_ids),
        },
        "best_epoch": best_epoch,
        "best_held_out_macro_f1": best_f1,
    }
    (checkpoint_dir / "bundle.json").write_text(
        json.dumps(bundle, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    scores_path = out / "scores.tsv"
    _write_scores(scores_path, test_batch.sample_ids, y_true, probs, dataset.classes)
    return TrainResult(
        best_epoch=best_epoch,
        best_macro_f1=best_f1,
        test_accuracy=accuracy,
        checkpoint_dir=checkpoint_dir,
        scores_path=scores_path,
    )


def _write_scores(path, sample_ids, y_true, probs, classes):
    lines = ["sample_id\ttrue_class\t" + "\t".join(f"score_{i}" for i in range(len(classes)))]
    for sid, t, row in zip(sample_ids, y_true, probs):
        lines.append(
            f"{sid}\t{classes[int(t)]}\t" + "\t".join(repr(float(v)) for v in row)
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_checkpoint(checkpoint_dir, map_location="cpu"):
    """Rebuild the model and metadata saved by train()."""
    checkpoint_dir = Path(checkpoint_dir)
    bundle = json.loads((checkpoint_dir / "bundle.json").read_text(encoding="utf-8"))
    hp = bundle["hyperparameters"]
    model = GigModel(
        vocab_size=len(bundle["vocabulary"]) + 1,
        n_classes=len(bundle["classes"]),
        backbone=hp["backbone"],
        embed_dim=hp["embed_dim"],
        proj_dim=hp["proj_dim"],
        hidden_dim=hp["hidden_dim"],
        dropout=hp["dropout"],
    )
    state = torch.load(checkpoint_dir / "weights.pt", map_location=map_location, weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model, bundle
