"""Trainer CLI: `gig-train train` fits one backbone on an exported dataset
and writes the checkpoint bundle plus scores.tsv; `gig-train attribute`
produces the per-gene Integrated Gradients table from a saved checkpoint."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .attribution import attribution_table, integrated_gradients
from .data import DatasetError, ExportDataset
from .model import BACKBONES
from .train import TrainConfig, load_checkpoint, train


def cmd_train(args) -> int:
    config = TrainConfig(
        backbone=args.backbone,
        epochs=args.epochs,
        seed=args.seed,
        batch_size=args.batch_size,
        device=args.device,
    )
    result = train(config, args.export, args.out)
    print(
        f"best epoch {result.best_epoch}: held-out macro-F1 {result.best_macro_f1:.4f}, "
        f"accuracy {result.test_accuracy:.4f}"
    )
    print(f"checkpoint: {result.checkpoint_dir}")
    print(f"scores: {result.scores_path}")
    return 0


def cmd_attribute(args) -> int:
    model, bundle = load_checkpoint(args.checkpoint)
    dataset = ExportDataset(args.export)
    ids = bundle["split"]["test"] if args.split == "test" else bundle["split"]["train"]
    result = integrated_gradients(
        model, dataset.samples(ids), bundle["classes"], steps=args.steps
    )
    table = attribution_table(result)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    worst = float(result.completeness_residuals.max()) if len(result.completeness_residuals) else 0.0
    print(f"completeness: max relative residual {worst:.4%} over {len(ids)} samples",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gig-train")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train", help="fit a backbone on an exported dataset")
    p.add_argument("--export", required=True, help="export directory from the pipeline")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--backbone", choices=BACKBONES, default="gcn")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=32)
    p.add_argument("--device", default="auto")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attribute", help="Integrated Gradients attribution table")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--export", required=True)
    p.add_argument("--steps", type=int, default=128)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--out")
    p.set_defaults(func=cmd_attribute)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
