"""Trust-aware propagation of positive/negative node embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .fextra import PartitionTable
from .graph import TriadStats

T_POS, T_NEG, U_POS, U_NEG = range(4)
DTYPE = torch.float64


class ModelParams(nn.Module):
    """Every learnable tensor of the model.

    ``pos``/``neg`` are the initial (layer 0) embedding tables, ``W_pos``/``W_neg``
    stack one square matrix per layer, ``alpha[p - 1]`` weights neighbours at
    path length p, and ``status_w``/``status_b`` form the status head over the
    fused embedding.
    """

    def __init__(self, node_count: int, d: int = 64, layers: int = 1, hops: int = 3, seed: int = 0,
                 learn_alpha: bool = True, learn_embeddings: bool = True):
        super().__init__()
        if d % 2 or d <= 0:
            raise ValueError("embedding dimension must be a positive even number")
        if layers < 1:
            raise ValueError("need at least one layer")
        half = d // 2
        gen = torch.Generator().manual_seed(seed)
        bound = math.sqrt(6.0 / (2 * half))

        def uniform(*shape, a=bound):
            return (torch.rand(*shape, generator=gen, dtype=DTYPE) * 2.0 - 1.0) * a

        self.pos = nn.Parameter(uniform(node_count, half), requires_grad=learn_embeddings)
        self.neg = nn.Parameter(uniform(node_count, half), requires_grad=learn_embeddings)
        self.W_pos = nn.Parameter(uniform(layers, half, half))
        self.W_neg = nn.Parameter(uniform(layers, half, half))
        self.alpha = nn.Parameter(torch.ones(hops, dtype=DTYPE), requires_grad=learn_alpha)
        self.status_w = nn.Parameter(uniform(d, a=math.sqrt(6.0 / (d + 1))))
        self.status_b = nn.Parameter(torch.zeros(1, dtype=DTYPE))

    @property
    def node_count(self) -> int:
        return self.pos.shape[0]

    @property
    def layers(self) -> int:
        return self.W_pos.shape[0]


@dataclass(frozen=True)
class SampledNeighbors:
    """Neighbour multiset used by one propagation pass.

    Rows are canonically sorted by (group, center, neighbour, path length);
    ``weight`` counts how many EgoEdges of that row were drawn. Summing in this
    fixed order makes messages independent of how the rows were supplied.
    """

    node_count: int
    group: np.ndarray
    center: np.ndarray
    neighbor: np.ndarray
    path_len: np.ndarray
    weight: np.ndarray

    @classmethod
    def build(cls, node_count, group, center, neighbor, path_len, weight=None):
        group, center, neighbor, path_len = (np.asarray(a, dtype=np.int64)
                                             for a in (group, center, neighbor, path_len))
        weight = np.ones(len(group), dtype=np.int64) if weight is None else np.asarray(weight, dtype=np.int64)
        order = np.lexsort((path_len, neighbor, center, group))
        return cls(node_count, group[order], center[order], neighbor[order], path_len[order], weight[order])

    def degrees(self) -> tuple[np.ndarray, np.ndarray]:
        """Sampled EgoEdge counts per center for the positive and negative sets."""
        d_pos = np.bincount(self.center, weights=self.weight * ((self.group == T_POS) | (self.group == U_POS)),
                            minlength=self.node_count)
        d_neg = np.bincount(self.center, weights=self.weight * ((self.group == T_NEG) | (self.group == U_NEG)),
                            minlength=self.node_count)
        return d_pos, d_neg


def sample_neighbors(table: PartitionTable, gamma: int | None, rng: np.random.Generator | None = None) -> SampledNeighbors:
    """Draw up to ``gamma`` EgoEdges per (center, group) uniformly without replacement.

    The unit of sampling is the EgoEdge, so a row with multiplicity k can be
    drawn up to k times. ``gamma=None`` keeps everything.
    """
    if gamma is None:
        return SampledNeighbors.build(table.node_count, table.group, table.center, table.neighbor,
                                      table.path_len, table.count)
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    if rng is None:
        raise ValueError("sampling needs a random generator")
    rows = len(table.group)
    weight = table.count.copy()
    if rows:
        seg = table.group.astype(np.int64) * table.node_count + table.center
        starts = np.flatnonzero(np.r_[True, seg[1:] != seg[:-1]])
        ends = np.r_[starts[1:], rows]
        cum = np.cumsum(table.count)
        base = np.where(starts > 0, cum[starts - 1], 0)
        totals = cum[ends - 1] - base
        for s, e, b, tot in zip(starts[totals > gamma], ends[totals > gamma], base[totals > gamma],
                                totals[totals > gamma]):
            picks = rng.choice(int(tot), size=gamma, replace=False)
            rec = np.searchsorted(cum, b + picks, side="right")
            weight[s:e] = 0
            np.add.at(weight, rec, 1)
    keep = weight > 0
    return SampledNeighbors.build(table.node_count, table.group[keep], table.center[keep],
                                  table.neighbor[keep], table.path_len[keep], weight[keep])


def routing_coefficients(ratios: TriadStats) -> torch.Tensor:
    """``coef[g, out, in]``: share of a neighbour's (v+, v-) entering the (m+, m-) message."""
    r = ratios.r
    coef = [
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0], [1.0, 0.0]],
        [[r(1, 1, 1), r(-1, 1, 1)], [r(1, 1, -1), r(-1, 1, -1)]],
        [[r(1, -1, 1), r(-1, -1, 1)], [r(1, -1, -1), r(-1, -1, -1)]],
    ]
    return torch.tensor(coef, dtype=DTYPE)


def _branch_message(pos, neg, sampled: SampledNeighbors, groups, coef, W_pos, W_neg, alpha):
    mask = np.isin(sampled.group, groups)
    l, half = pos.shape
    center = torch.from_numpy(sampled.center[mask])
    nb = torch.from_numpy(sampled.neighbor[mask])
    g = torch.from_numpy(sampled.group[mask])
    a = alpha[torch.from_numpy(sampled.path_len[mask] - 1)] * torch.from_numpy(sampled.weight[mask]).to(DTYPE)
    vp, vn = pos[nb], neg[nb]
    cf = coef[g]
    into_pos = (cf[:, 0, 0:1] * vp + cf[:, 0, 1:2] * vn) * a[:, None]
    into_neg = (cf[:, 1, 0:1] * vp + cf[:, 1, 1:2] * vn) * a[:, None]
    agg_pos = torch.zeros(l, half, dtype=DTYPE).index_add(0, center, into_pos)
    agg_neg = torch.zeros(l, half, dtype=DTYPE).index_add(0, center, into_neg)
    has = torch.zeros(l, 1, dtype=DTYPE)
    has[center] = 1.0
    # nodes with an empty branch get no message at all, not sigmoid(0)
    return torch.sigmoid(agg_pos @ W_pos.T) * has, torch.sigmoid(agg_neg @ W_neg.T) * has


def tgcn_message(pos, neg, sampled: SampledNeighbors, W_pos, W_neg, alpha):
    """Messages from trusted neighbours: same polarity along +, crossed along -."""
    coef = routing_coefficients(TriadStats.uniform())
    return _branch_message(pos, neg, sampled, (T_POS, T_NEG), coef, W_pos, W_neg, alpha)


def ugcn_message(pos, neg, sampled: SampledNeighbors, W_pos, W_neg, alpha, ratios: TriadStats):
    """Messages from untrusted neighbours, splitting both polarities by triad ratios."""
    coef = routing_coefficients(ratios)
    return _branch_message(pos, neg, sampled, (U_POS, U_NEG), coef, W_pos, W_neg, alpha)


def aggregate(pos, neg, m_t, m_u, sampled: SampledNeighbors):
    """Residual update scaled by the sampled degree; a zero degree leaves the table as is."""
    d_pos, d_neg = sampled.degrees()
    out = []
    for prev, mt, mu, d in ((pos, m_t[0], m_u[0], d_pos), (neg, m_t[1], m_u[1], d_neg)):
        d = torch.from_numpy(d).to(DTYPE)[:, None]
        scale = torch.where(d > 0, 1.0 / d.clamp(min=1.0), torch.zeros_like(d))
        out.append(prev + scale * (mt + mu))
    return out[0], out[1]


def forward(params: ModelParams, sampled: SampledNeighbors, ratios: TriadStats) -> torch.Tensor:
    """Run every layer synchronously and return fused ``[v+ || v-]`` embeddings."""
    if sampled.node_count != params.node_count:
        raise ValueError("sampled neighbourhoods and parameters disagree on the node count")
    if len(sampled.path_len) and sampled.path_len.max() > params.alpha.shape[0]:
        raise ValueError("path length exceeds the attention table")
    pos, neg = params.pos, params.neg
    for h in range(params.layers):
        m_t = tgcn_message(pos, neg, sampled, params.W_pos[h], params.W_neg[h], params.alpha)
        m_u = ugcn_message(pos, neg, sampled, params.W_pos[h], params.W_neg[h], params.alpha, ratios)
        pos, neg = aggregate(pos, neg, m_t, m_u, sampled)
    return torch.cat([pos, neg], dim=1)
