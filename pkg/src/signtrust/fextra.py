"""Topological sign classifier and the trust gate for balance-inferred signs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .egonet import EgoEdge, EgoNet, EgoTable
from .graph import SignedDigraph
from .logreg import LogisticModel, fit_logistic, sigmoid

N_FEATURES = 23

# Order of the 16 triad features: sign blocks (i-z, j-z) outermost, then the
# edge directions (i->z or z->i, z->j or j->z).
SIGN_BLOCKS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
DIRECTION_BLOCKS = (("out", "in"), ("out", "out"), ("in", "in"), ("in", "out"))

FEATURE_NAMES = (
    ["pos_deg_i", "pos_deg_j", "neg_deg_i", "neg_deg_j", "deg_i", "deg_j", "common_neighbors"]
    + [f"triad_{'+' if si > 0 else '-'}{'+' if sj > 0 else '-'}_{di}_{dj}"
       for (si, sj), (di, dj) in itertools.product(SIGN_BLOCKS, DIRECTION_BLOCKS)]
)

GROUPS = ("T+", "T-", "U+", "U-")


class FeatureExtractor:
    """Vectorised feature lookup for many node pairs of one graph.

    Here "out" for node i means an edge i -> z and "in" means z -> i; for node
    j, "in" is z -> j and "out" is j -> z. Triad counts enumerate
    (common neighbour, edge pair) configurations, so a neighbour joined by
    reciprocal edges can contribute to several features.
    """

    def __init__(self, graph: SignedDigraph):
        self.graph = graph
        self.out = {s: graph.directed_matrix(s) for s in (1, -1)}
        self.inn = {s: self.out[s].T.tocsr() for s in (1, -1)}
        self.pos_deg = np.asarray(self.out[1].sum(1)).ravel() + np.asarray(self.out[1].sum(0)).ravel()
        self.neg_deg = np.asarray(self.out[-1].sum(1)).ravel() + np.asarray(self.out[-1].sum(0)).ravel()
        pos, neg = graph.undirected_sign_matrices()
        b = (pos + neg).tocsr()
        b.data[:] = 1
        self._binary = b
        self._products: dict = {}

    def _product(self, key):
        if key not in self._products:
            if key == "common":
                self._products[key] = (self._binary @ self._binary.T).tocsr()
            else:
                si, sj, di, dj = key
                left = self.out[si] if di == "out" else self.inn[si]
                right = self.out[sj] if dj == "out" else self.inn[sj]
                self._products[key] = (left @ right.T).tocsr()
        return self._products[key]

    def pairs(self, i, j, exclude_pair: bool = False) -> np.ndarray:
        """Feature matrix (k x 23) for pairs ``(i[t], j[t])``.

        With ``exclude_pair`` the edges joining i and j themselves are left out
        of the degree counts, so a training edge looks like the unlinked pairs
        the classifier is later applied to.
        """
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if np.any(i == j):
            raise ValueError("feature pairs need i != j")
        k = len(i)
        F = np.zeros((k, N_FEATURES))
        if k == 0:
            return F

        def lookup(mat):
            return np.asarray(mat[i, j]).ravel().astype(np.float64)

        F[:, 0], F[:, 1] = self.pos_deg[i], self.pos_deg[j]
        F[:, 2], F[:, 3] = self.neg_deg[i], self.neg_deg[j]
        if exclude_pair:
            p = lookup(self.out[1]) + lookup(self.inn[1])
            n = lookup(self.out[-1]) + lookup(self.inn[-1])
            F[:, 0] -= p
            F[:, 1] -= p
            F[:, 2] -= n
            F[:, 3] -= n
        F[:, 4] = F[:, 0] + F[:, 2]
        F[:, 5] = F[:, 1] + F[:, 3]
        F[:, 6] = lookup(self._product("common"))
        for col, ((si, sj), (di, dj)) in enumerate(itertools.product(SIGN_BLOCKS, DIRECTION_BLOCKS), 7):
            F[:, col] = lookup(self._product((si, sj, di, dj)))
        return F


def extract_features(graph: SignedDigraph, i: int, j: int, exclude_pair: bool = False) -> np.ndarray:
    if i == j:
        raise ValueError("feature pairs need i != j")
    return FeatureExtractor(graph).pairs([i], [j], exclude_pair)[0]


@dataclass
class FExtraConfig:
    l2: float = 1e-4
    max_iter: int = 5000
    tol: float = 1e-6
    exclude_pair: bool = True


def train_fextra(train_edges: SignedDigraph, graph: SignedDigraph | None = None,
                 config: FExtraConfig | None = None) -> LogisticModel:
    """Fit the sign classifier on every edge of ``train_edges`` (label 1 = positive).

    Features are read from ``graph`` (defaults to ``train_edges`` itself).
    """
    config = config or FExtraConfig()
    graph = graph if graph is not None else train_edges
    X = FeatureExtractor(graph).pairs(train_edges.src, train_edges.dst, config.exclude_pair)
    y = (train_edges.sign > 0).astype(np.float64)
    return fit_logistic(X, y, l2=config.l2, max_iter=config.max_iter, tol=config.tol)


def predict_sign(model: LogisticModel, fv) -> tuple[int, float]:
    """(predicted sign, trust) with trust the winning-class probability; ties go to +1."""
    p = float(sigmoid(model.decision(fv))[0])
    return (1 if p >= 0.5 else -1), max(p, 1.0 - p)


class TrustDecision(NamedTuple):
    s_hat: int
    trust: float
    trustworthy: bool


def decide_trust(s_ij: int, prediction: tuple[int, float], beta: float) -> TrustDecision:
    """Trust a balance-inferred sign iff the classifier agrees and ``trust > beta``."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    s_hat, trust = prediction
    return TrustDecision(s_hat, trust, bool(trust > beta and s_hat == s_ij))


@dataclass
class TrustPartition:
    center: int
    sets: dict = field(default_factory=lambda: {g: [] for g in GROUPS})

    def __len__(self):
        return sum(len(v) for v in self.sets.values())


def partition_egonet(egonet: EgoNet, model: LogisticModel, graph: SignedDigraph, beta: float,
                     extractor: FeatureExtractor | None = None) -> TrustPartition:
    """Assign each EgoEdge of one EgoNet to T+, T-, U+ or U-."""
    extractor = extractor or FeatureExtractor(graph)
    part = TrustPartition(egonet.center)
    cache: dict = {}
    for e in egonet.edges:
        if e.is_direct:
            trusted = True
        else:
            if e.neighbor not in cache:
                fv = extractor.pairs([egonet.center], [e.neighbor])[0]
                cache[e.neighbor] = predict_sign(model, fv)
            trusted = decide_trust(e.sign, cache[e.neighbor], beta).trustworthy
        key = ("T" if trusted else "U") + ("+" if e.sign > 0 else "-")
        part.sets[key].append(e)
    return part


def pair_probabilities(table: EgoTable, model: LogisticModel, graph: SignedDigraph,
                       block: int = 500_000) -> np.ndarray:
    """P(+) from the classifier for every indirect row of ``table`` (NaN on direct rows)."""
    out = np.full(table.rows, np.nan)
    indirect = np.flatnonzero(table.path_len >= 2)
    if len(indirect) == 0:
        return out
    key = table.center[indirect] * table.node_count + table.neighbor[indirect]
    uniq, inv = np.unique(key, return_inverse=True)
    extractor = FeatureExtractor(graph)
    probs = np.empty(len(uniq))
    for lo in range(0, len(uniq), block):
        chunk = uniq[lo:lo + block]
        X = extractor.pairs(chunk // table.node_count, chunk % table.node_count)
        probs[lo:lo + block] = model.predict_proba(X)
    out[indirect] = probs[inv]
    return out


@dataclass
class PartitionTable:
    """Columnar trust partition of every EgoNet.

    ``group`` indexes :data:`GROUPS`. Rows are sorted by (group, center,
    neighbour, path length); ``count`` is the number of identical EgoEdges.
    """

    node_count: int
    group: np.ndarray
    center: np.ndarray
    neighbor: np.ndarray
    path_len: np.ndarray
    count: np.ndarray
    sign: np.ndarray

    def __post_init__(self):
        order = np.lexsort((self.sign, self.path_len, self.neighbor, self.center, self.group))
        for name in ("group", "center", "neighbor", "path_len", "count", "sign"):
            setattr(self, name, np.asarray(getattr(self, name))[order])
        self.group = self.group.astype(np.int8)
        self.path_len = self.path_len.astype(np.int8)
        self.sign = self.sign.astype(np.int8)
        self.center = self.center.astype(np.int64)
        self.neighbor = self.neighbor.astype(np.int64)
        self.count = self.count.astype(np.int64)

    def group_totals(self) -> dict:
        return {g: int(self.count[self.group == k].sum()) for k, g in enumerate(GROUPS)}

    def untrustworthy_fraction(self) -> float:
        """Share of indirect EgoEdges routed to the untrustworthy sets."""
        indirect = self.path_len >= 2
        tot = self.count[indirect].sum()
        return float(self.count[indirect & (self.group >= 2)].sum() / tot) if tot else float("nan")

    def node(self, center: int) -> TrustPartition:
        part = TrustPartition(center)
        for k, g in enumerate(GROUPS):
            m = (self.group == k) & (self.center == center)
            for v, p, c, s in zip(self.neighbor[m].tolist(), self.path_len[m].tolist(),
                                  self.count[m].tolist(), self.sign[m].tolist()):
                part.sets[g].extend([EgoEdge(v, s, p, p == 1)] * c)
        return part

    def arrays(self) -> dict:
        return {"group": self.group, "center": self.center, "neighbor": self.neighbor,
                "path_len": self.path_len, "count": self.count, "sign": self.sign}


ROUTES = ("trust", "balance", "fextra")


def partition_table(table: EgoTable, p_pos: np.ndarray, beta: float, route: str = "trust") -> PartitionTable:
    """Route every EgoEdge to a trust/sign group.

    ``route="trust"`` applies the two trust conditions to indirect rows.
    ``"balance"`` trusts every balance-inferred sign and ``"fextra"`` trusts
    the classifier's sign instead; both leave the untrustworthy groups empty.
    Direct edges are always trusted with their actual sign.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    sign = table.sign.astype(np.int64)
    direct = table.path_len == 1
    s_hat = np.where(p_pos >= 0.5, 1, -1)
    trust = np.maximum(p_pos, 1.0 - p_pos)
    if route == "trust":
        trusted = direct | ((trust > beta) & (s_hat == sign))
    else:
        trusted = np.ones(table.rows, dtype=bool)
        if route == "fextra":
            sign = np.where(direct, sign, s_hat)
    group = np.where(trusted, 0, 2) + (sign < 0)
    return PartitionTable(table.node_count, group, table.center, table.neighbor,
                          table.path_len, table.count, sign)
