"""Reference graph-level classifier for exported patient pathway graph datasets."""

from .data import ExportDataset, GraphSample, collate
from .model import BACKBONES, GigModel, weighted_cross_entropy
from .train import TrainConfig, train

__all__ = [
    "BACKBONES",
    "ExportDataset",
    "GigModel",
    "GraphSample",
    "TrainConfig",
    "collate",
    "train",
    "weighted_cross_entropy",
]

__version__ = "0.1.0"
