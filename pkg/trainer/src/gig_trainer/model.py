"""Graph-level classifier: gene-identity embedding + projected expression
features, two message-passing layers (GCN, GraphSAGE, GIN, or GAT), global
mean pooling, and a two-layer head.

Message passing is implemented directly on the directed edge list (each
undirected edge is present in both directions), so no graph library is
needed. All aggregations use index_add, which is deterministic on CPU.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

BACKBONES = ("gcn", "sage", "gin", "gat")

EMBED_DIM = 64
PROJ_DIM = 64
HIDDEN_DIM = 128
DROPOUT = 0.2

GAT_HEADS = 4
GAT_LEAKY_SLOPE = 0.2
SAGE_AGGREGATOR = "mean"


def scatter_sum(src: torch.Tensor, index: torch.Tensor, dim_size: int) -> torch.Tensor:
    out = torch.zeros(dim_size, src.shape[1], dtype=src.dtype, device=src.device)
    return out.index_add(0, index, src)


def segment_mean(values: torch.Tensor, index: torch.Tensor, n_segments: int) -> torch.Tensor:
    total = scatter_sum(values, index, n_segments)
    counts = torch.zeros(n_segments, 1, dtype=values.dtype, device=values.device)
    counts = counts.index_add(0, index, torch.ones(len(index), 1, dtype=values.dtype, device=values.device))
    return total / counts.clamp(min=1.0)


class GCNLayer(nn.Module):
    """Symmetric-normalized convolution with self-loops."""

    def __init__(self, dim_in, dim_out):
        super().__init__()
        self.lin = nn.Linear(dim_in, dim_out)

    def forward(self, h, edge_index):
        n = h.shape[0]
        src, dst = edge_index
        deg = torch.ones(n, dtype=h.dtype, device=h.device)  # self-loop
        deg = deg.index_add(0, dst, torch.ones(len(dst), dtype=h.dtype, device=h.device))
        inv_sqrt = deg.rsqrt()
        norm = (inv_sqrt[src] * inv_sqrt[dst]).unsqueeze(1)
        agg = scatter_sum(h[src] * norm, dst, n)
        agg = agg + h * (inv_sqrt * inv_sqrt).unsqueeze(1)
        return self.lin(agg)


class SAGELayer(nn.Module):
    """Mean-aggregator GraphSAGE."""

    def __init__(self, dim_in, dim_out):
        super().__init__()
        self.lin_self = nn.Linear(dim_in, dim_out)
        self.lin_neigh = nn.Linear(dim_in, dim_out, bias=False)

    def forward(self, h, edge_index):
        n = h.shape[0]
        src, dst = edge_index
        neigh = segment_mean(h[src], dst, n)
        return self.lin_self(h) + self.lin_neigh(neigh)


class GINLayer(nn.Module):
    """Sum aggregation through a two-layer MLP; epsilon fixed at 0."""

    def __init__(self, dim_in, dim_out):
        super().__init__()
        self.mlp = nn.Sequential(
            nn.Linear(dim_in, dim_out), nn.ReLU(), nn.Linear(dim_out, dim_out)
        )

    def forward(self, h, edge_index):
        src, dst = edge_index
        agg = scatter_sum(h[src], dst, h.shape[0])
        return self.mlp(h + agg)


class GATLayer(nn.Module):
    """Multi-head additive attention with self-loops, heads concatenated."""

    def __init__(self, dim_in, dim_out, heads=GAT_HEADS):
        super().__init__()
        if dim_out % heads:
            raise ValueError(f"dim_out {dim_out} not divisible by heads {heads}")
        self.heads = heads
        self.dim_head = dim_out // heads
        self.lin = nn.Linear(dim_in, dim_out, bias=False)
        self.att_src = nn.Parameter(torch.empty(heads, self.dim_head))
        self.att_dst = nn.Parameter(torch.empty(heads, self.dim_head))
        self.bias = nn.Parameter(torch.zeros(dim_out))
        nn.init.xavier_uniform_(self.att_src)
        nn.init.xavier_uniform_(self.att_dst)

    def forward(self, h, edge_index):
        n = h.shape[0]
        loops = torch.arange(n, device=h.device)
        src = torch.cat([edge_index[0], loops])
        dst = torch.cat([edge_index[1], loops])

        hw = self.lin(h).view(n, self.heads, self.dim_head)
        alpha_src = (hw * self.att_src).sum(-1)  # (N, H)
        alpha_dst = (hw * self.att_dst).sum(-1)
        logits = F.leaky_relu(alpha_src[src] + alpha_dst[dst], GAT_LEAKY_SLOPE)

        # softmax over incoming edges per destination node, per head; a global
        # max shift is enough for overflow safety and keeps the ratios exact
        weight = torch.exp(logits - logits.detach().max())
        denom = torch.zeros(n, self.heads, dtype=h.dtype, device=h.device)
        denom = denom.index_add(0, dst, weight)
        alpha = weight / denom[dst].clamp(min=1e-16)

        messages = hw[src] * alpha.unsqueeze(-1)  # (E, H, D)
        out = torch.zeros(n, self.heads, self.dim_head, dtype=h.dtype, device=h.device)
        out = out.index_add(0, dst, messages)
        return out.reshape(n, self.heads * self.dim_head) + self.bias


_LAYERS = {"gcn": GCNLayer, "sage": SAGELayer, "gin": GINLayer, "gat": GATLayer}


class GigModel(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        n_classes: int,
        backbone: str = "gcn",
        embed_dim: int = EMBED_DIM,
        proj_dim: int = PROJ_DIM,
        hidden_dim: int = HIDDEN_DIM,
        dropout: float = DROPOUT,
    ):
        super().__init__()
        if backbone not in _LAYERS:
            raise ValueError(f"unknown backbone {backbone!r}, expected one of {BACKBONES}")
        self.backbone = backbone
        self.embedding = nn.Embedding(vocab_size, embed_dim)
        self.proj = nn.Linear(2, proj_dim)
        self.node_mlp = nn.Linear(embed_dim + proj_dim, hidden_dim)
        layer = _LAYERS[backbone]
        self.mp1 = layer(hidden_dim, hidden_dim)
        self.mp2 = layer(hidden_dim, hidden_dim)
        self.head_hidden = nn.Linear(hidden_dim, hidden_dim)
        self.dropout = nn.Dropout(dropout)
        self.head_out = nn.Linear(hidden_dim, n_classes)

    def node_embeddings(self, x, gene_idx):
        q = F.relu(self.proj(x))
        e = self.embedding(gene_idx)
        return F.relu(self.node_mlp(torch.cat([q, e], dim=1)))

    def forward(self, x, gene_idx, edge_index, graph_index, n_graphs):
        h = self.node_embeddings(x, gene_idx)
        h = F.relu(self.mp1(h, edge_index))
        h = F.relu(self.mp2(h, edge_index))
        pooled = segment_mean(h, graph_index, n_graphs)
        z = self.dropout(F.relu(self.head_hidden(pooled)))
        return self.head_out(z)

    def forward_batch(self, batch):
        return self.forward(
            batch.x, batch.gene_idx, batch.edge_index, batch.graph_index, batch.n_graphs
        )

    def hyperparameters(self) -> dict:
        hp = {
            "backbone": self.backbone,
            "embed_dim": self.embedding.embedding_dim,
            "proj_dim": self.proj.out_features,
            "hidden_dim": self.node_mlp.out_features,
            "dropout": self.dropout.p,
            "message_passing_layers": 2,
        }
        if self.backbone == "gat":
            hp["gat_heads"] = GAT_HEADS
        if self.backbone == "sage":
            hp["sage_aggregator"] = SAGE_AGGREGATOR
        if self.backbone == "gin":
            hp["gin_mlp_layers"] = 2
        return hp


def weighted_cross_entropy(
    logits: torch.Tensor, labels: torch.Tensor, class_weights: torch.Tensor
) -> torch.Tensor:
    """Mean over the batch of w_{y_i} * negative log-softmax at the true class.

    This divides by the batch size, not by the summed weights, so unit weights
    reduce exactly to unweighted cross-entropy.
    """
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ValueError("class index out of range")
    per_sample = F.cross_entropy(logits, labels, reduction="none")
    return (class_weights[labels] * per_sample).mean()
