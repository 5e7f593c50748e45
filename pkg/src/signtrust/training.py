"""Sign/status losses and the training loop."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .fextra import PartitionTable
from .graph import SignedDigraph, TriadStats
from .logreg import TrainingError
from .propagation import DTYPE, ModelParams, forward, sample_neighbors

log = logging.getLogger(__name__)

EPS = 1e-7


class DivergenceError(TrainingError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _clamped_log(p):
    return torch.log(torch.clamp(p, EPS, 1.0 - EPS))


def _edge_tensors(edges: SignedDigraph):
    src = torch.from_numpy(edges.src)
    dst = torch.from_numpy(edges.dst)
    y = torch.from_numpy((edges.sign > 0).astype(np.float64))
    return src, dst, y


def sign_loss(fused: torch.Tensor, edges: SignedDigraph) -> torch.Tensor:
    """Summed logistic loss of ``sigmoid(v_i . v_j)`` against the edge signs."""
    src, dst, y = _edge_tensors(edges)
    p = torch.sigmoid((fused[src] * fused[dst]).sum(dim=1))
    return (-y * _clamped_log(p) - (1.0 - y) * _clamped_log(1.0 - p)).sum()


def status_scores(fused: torch.Tensor, w: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    return torch.sigmoid(fused @ w + b)


def pairwise_status_loss(s_src: torch.Tensor, s_dst: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Per-edge loss from status scores: a positive edge should point up the order."""
    return (-y * _clamped_log(torch.sigmoid(s_dst - s_src))
            - (1.0 - y) * _clamped_log(torch.sigmoid(s_src - s_dst)))


def status_loss(fused: torch.Tensor, edges: SignedDigraph, w: torch.Tensor, b: torch.Tensor,
                per_edge: bool = False) -> torch.Tensor:
    """Positive edges should point up the status order, negative edges down."""
    src, dst, y = _edge_tensors(edges)
    s = status_scores(fused, w, b)
    loss = pairwise_status_loss(s[src], s[dst], y)
    return loss if per_edge else loss.sum()


def total_loss(fused, edges, w, b, lam: float) -> torch.Tensor:
    if lam < 0:
        raise ValueError("status weight must be non-negative")
    return sign_loss(fused, edges) + lam * status_loss(fused, edges, w, b)


@dataclass
class TrainConfig:
    lambda_status: float = 1.0
    learning_rate: float = 5e-3
    epochs: int = 100
    weight_decay: float = 1e-5
    seed: int = 0
    gamma: int | None = 30
    d: int = 64
    layers: int = 1
    learn_alpha: bool = True
    learn_embeddings: bool = True
    resample: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainingData:
    """Everything training reads: routed EgoNets, triad ratios and the training edges."""

    partition: PartitionTable
    ratios: TriadStats
    edges: SignedDigraph
    hops: int = 3

    @property
    def node_count(self) -> int:
        return self.edges.node_count


@dataclass
class FitResult:
    params: ModelParams
    trace: list = field(default_factory=list)
    embeddings: np.ndarray | None = None


def objective(params: ModelParams, data: TrainingData, sampled, lam: float):
    fused = forward(params, sampled, data.ratios)
    ls = sign_loss(fused, data.edges)
    lt = status_loss(fused, data.edges, params.status_w, params.status_b)
    total = ls + lam * lt if lam > 0 else ls
    return total, ls, lt


def backward(params: ModelParams, data: TrainingData, sampled, lam: float) -> dict:
    """Gradient of the total loss for every parameter; untouched ones come back as zeros."""
    params.zero_grad(set_to_none=True)
    total, _, _ = objective(params, data, sampled, lam)
    total.backward()
    grads = {}
    for name, p in params.named_parameters():
        g = p.grad if p.grad is not None else torch.zeros_like(p)
        if not torch.isfinite(g).all():
            raise TrainingError(f"non-finite gradient for {name}")
        grads[name] = g.detach().clone()
    return grads


def fit(data: TrainingData, config: TrainConfig) -> FitResult:
    """Full-batch Adam on the joint loss, resampling neighbourhoods every epoch.

    The returned embeddings come from one more sampled forward pass after the
    last step, drawn from the same seeded stream.
    """
    torch.use_deterministic_algorithms(True)
    params = ModelParams(data.node_count, config.d, config.layers, data.hops, config.seed,
                         learn_alpha=config.learn_alpha, learn_embeddings=config.learn_embeddings)
    rng = np.random.default_rng([config.seed, 1])
    trainable = [p for p in params.parameters() if p.requires_grad]
    opt = torch.optim.Adam(trainable, lr=config.learning_rate, weight_decay=config.weight_decay)
    fixed = None if config.resample else sample_neighbors(data.partition, config.gamma, rng)
    trace = []
    for epoch in range(config.epochs):
        sampled = fixed or sample_neighbors(data.partition, config.gamma, rng)
        opt.zero_grad(set_to_none=True)
        total, ls, lt = objective(params, data, sampled, config.lambda_status)
        ls_v, lt_v = ls.item(), lt.item()
        row = (epoch, ls_v, lt_v, ls_v + config.lambda_status * lt_v)
        trace.append(row)
        if not np.isfinite(row[3]):
            raise DivergenceError(f"loss became non-finite at epoch {epoch}", trace)
        total.backward()
        for name, p in params.named_parameters():
            if p.grad is not None and not torch.isfinite(p.grad).all():
                raise DivergenceError(f"non-finite gradient for {name} at epoch {epoch}", trace)
        opt.step()
        if epoch % 10 == 0 or epoch == config.epochs - 1:
            log.debug("epoch %d sign %.4f status %.4f", *row[:3])
    with torch.no_grad():
        sampled = fixed or sample_neighbors(data.partition, config.gamma, rng)
        emb = forward(params, sampled, data.ratios).numpy().copy()
    if not np.isfinite(emb).all():
        raise DivergenceError("non-finite embeddings after training", trace)
    return FitResult(params, trace, emb)
