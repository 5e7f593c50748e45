"""Extended ego-networks: direct neighbours plus balance-inferred n-hop neighbours."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import SignedDigraph

MAX_HOPS = 4


def infer_path_sign(signs: Sequence[int]) -> int:
    """Balance-theory sign of a path: +1 iff it has an even number of negative edges."""
    if len(signs) == 0:
        raise ValueError("cannot infer the sign of an empty path")
    neg = 0
    for s in signs:
        if s not in (1, -1):
            raise ValueError(f"invalid sign {s!r}")
        neg += s < 0
    return -1 if neg % 2 else 1


class EgoEdge(NamedTuple):
    neighbor: int
    sign: int
    path_len: int
    is_direct: bool


@dataclass(frozen=True)
class EgoNet:
    center: int
    edges: list
    hop_bound: int


def _check(graph: SignedDigraph, n: int, center: int | None = None):
    if not 1 <= n <= MAX_HOPS:
        raise ValueError(f"hop bound must be in [1, {MAX_HOPS}], got {n}")
    if center is not None and not 0 <= center < graph.node_count:
        raise ValueError(f"invalid center {center}")


def _sort_key(e: EgoEdge):
    return (e.neighbor, e.path_len, -e.sign)


def build_egonet(graph: SignedDigraph, center: int, n: int) -> EgoNet:
    """Enumerate every simple path of length <= n out of ``center``.

    Paths run over the undirected projection, where a pair joined by edges of
    both signs offers two parallel edges. A neighbour reached by a direct edge
    keeps only its direct EgoEdges.
    """
    _check(graph, n, center)
    adj = graph.undirected_adj()
    direct = {v for v, _ in adj[center]}
    edges: list[EgoEdge] = [EgoEdge(v, s, 1, True) for v, s in adj[center]]
    on_path = {center}

    def walk(node: int, sign: int, depth: int):
        for v, s in adj[node]:
            if v in on_path:
                continue
            ps = sign * s
            if v not in direct:
                edges.append(EgoEdge(v, ps, depth + 1, False))
            if depth + 1 < n:
                on_path.add(v)
                walk(v, ps, depth + 1)
                on_path.discard(v)

    if n >= 2:
        for v, s in adj[center]:
            on_path.add(v)
            walk(v, s, 1)
            on_path.discard(v)
    edges.sort(key=_sort_key)
    return EgoNet(center, edges, n)


class EgoTable(Mapping):
    """All EgoNets of a graph in compressed columnar form.

    Identical EgoEdges (same center, neighbour, sign and path length, reached
    through different paths) are stored once with a multiplicity ``count``.
    Rows are sorted by (center, neighbour, path length, sign descending).
    Indexing by a node id expands that node's EgoNet.
    """

    def __init__(self, node_count: int, hop_bound: int, center, neighbor, sign, path_len, count):
        self.node_count = node_count
        self.hop_bound = hop_bound
        order = np.lexsort((-np.asarray(sign), path_len, neighbor, center))
        self.center = np.asarray(center, dtype=np.int64)[order]
        self.neighbor = np.asarray(neighbor, dtype=np.int64)[order]
        self.sign = np.asarray(sign, dtype=np.int8)[order]
        self.path_len = np.asarray(path_len, dtype=np.int8)[order]
        self.count = np.asarray(count, dtype=np.int64)[order]
        self.offsets = np.searchsorted(self.center, np.arange(node_count + 1))

    def __len__(self):
        return self.node_count

    def __iter__(self):
        return iter(range(self.node_count))

    def __getitem__(self, center: int) -> EgoNet:
        if not 0 <= center < self.node_count:
            raise KeyError(center)
        lo, hi = self.offsets[center], self.offsets[center + 1]
        edges = []
        for v, s, p, c in zip(self.neighbor[lo:hi].tolist(), self.sign[lo:hi].tolist(),
                              self.path_len[lo:hi].tolist(), self.count[lo:hi].tolist()):
            edges.extend([EgoEdge(v, s, p, p == 1)] * c)
        return EgoNet(center, edges, self.hop_bound)

    @property
    def rows(self) -> int:
        return len(self.center)

    def total_edges(self) -> int:
        return int(self.count.sum())

    def arrays(self) -> dict:
        return {"center": self.center, "neighbor": self.neighbor, "sign": self.sign,
                "path_len": self.path_len, "count": self.count}


def _direct_rows(graph: SignedDigraph):
    pos, neg = graph.undirected_sign_matrices()
    rows = []
    for mat, s in ((pos, 1), (neg, -1)):
        coo = mat.tocoo()
        rows.append((coo.row, coo.col, np.full(coo.nnz, s), np.ones(coo.nnz), np.ones(coo.nnz)))
    return rows


def _walk_rows(graph: SignedDigraph, n: int, block: int):
    """Indirect EgoEdges via signed walk counts (valid for n <= 3).

    With A = P + N and S = P - N, ``(A^k + S^k) / 2`` and ``(A^k - S^k) / 2``
    count positive and negative length-k walks. For an endpoint that is not the
    center and not adjacent to it, every walk of length 2 or 3 is a simple path:
    the only ways to revisit a node (returning to the center mid-walk, or
    stepping back to the first hop) both end next to the center.
    """
    pos, neg = graph.undirected_sign_matrices()
    a = (pos + neg).tocsr()
    s = (pos - neg).tocsr()
    adjacent = a.copy()
    adjacent.data[:] = 1
    rows = []
    for lo in range(0, graph.node_count, block):
        hi = min(lo + block, graph.node_count)
        ak, sk = a[lo:hi], s[lo:hi]
        blocked = adjacent[lo:hi] + sp.csr_matrix(
            (np.ones(hi - lo), (np.arange(hi - lo), np.arange(lo, hi))), shape=(hi - lo, graph.node_count))
        for k in range(2, n + 1):
            ak = (ak @ a).tocsr()
            sk = (sk @ s).tocsr()
            walks = ak.tocoo()
            signed = np.asarray(sk[walks.row, walks.col]).ravel() if walks.nnz else np.zeros(0)
            keep = np.asarray(blocked[walks.row, walks.col]).ravel() == 0 if walks.nnz else np.zeros(0, bool)
            r, c, tot, sg = walks.row[keep] + lo, walks.col[keep], walks.data[keep].astype(np.int64), signed[keep].astype(np.int64)
            npos, nneg = (tot + sg) // 2, (tot - sg) // 2
            for cnt, sign in ((npos, 1), (nneg, -1)):
                m = cnt > 0
                rows.append((r[m], c[m], np.full(m.sum(), sign), np.full(m.sum(), k), cnt[m]))
    return rows


def build_all_egonets(graph: SignedDigraph, n: int, block: int = 2048) -> EgoTable:
    """EgoNets for every node, as a compressed :class:`EgoTable`."""
    _check(graph, n)
    if n <= 3:
        parts = _direct_rows(graph) + _walk_rows(graph, n, block)
        cols = [np.concatenate([p[i] for p in parts]) if parts else np.zeros(0) for i in range(5)]
        return EgoTable(graph.node_count, n, *cols)
    # No closed form beyond three hops: enumerate paths per center.
    center, neighbor, sign, plen, count = [], [], [], [], []
    for c in range(graph.node_count):
        agg: dict = {}
        for e in build_egonet(graph, c, n).edges:
            key = (e.neighbor, e.sign, e.path_len)
            agg[key] = agg.get(key, 0) + 1
        for (v, s, p), k in agg.items():
            center.append(c)
            neighbor.append(v)
            sign.append(s)
            plen.append(p)
            count.append(k)
    return EgoTable(graph.node_count, n, center, neighbor, sign, plen, count)
