"""Signed directed graphs: ingestion, splitting and triad statistics."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp

SIGNS = (1, -1)


class EdgeListError(ValueError):
    """A malformed edge-list record."""

    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class SignedDigraph:
    """Immutable signed directed graph over dense node ids ``0..node_count-1``.

    Edges live in three parallel arrays. Adjacency lists are derived on demand;
    ``labels[i]`` is the original label of node ``i`` when the graph was loaded
    from a file.
    """

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    sign: np.ndarray
    labels: tuple = ()
    dropped: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "src", np.ascontiguousarray(self.src, dtype=np.int64))
        object.__setattr__(self, "dst", np.ascontiguousarray(self.dst, dtype=np.int64))
        object.__setattr__(self, "sign", np.ascontiguousarray(self.sign, dtype=np.int8))
        if not (len(self.src) == len(self.dst) == len(self.sign)):
            raise ValueError("edge arrays differ in length")
        if len(self.src):
            if self.src.min() < 0 or max(self.src.max(), self.dst.max()) >= self.node_count:
                raise ValueError("edge endpoint outside node range")
            if np.any(self.src == self.dst):
                raise ValueError("self-loops are not allowed")
            if not np.all(np.abs(self.sign) == 1):
                raise ValueError("signs must be +1 or -1")
            key = self.src * self.node_count + self.dst
            if len(np.unique(key)) != len(key):
                raise ValueError("duplicate (src, dst) pairs")

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int, int]]) -> "SignedDigraph":
        edges = list(edges)
        if not edges:
            return cls(node_count, np.zeros(0), np.zeros(0), np.zeros(0))
        s, d, w = zip(*edges)
        return cls(node_count, np.array(s), np.array(d), np.array(w))

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.sign.tolist()))

    def subgraph(self, edge_index: np.ndarray) -> "SignedDigraph":
        """Same node set, restricted to the selected edges (kept in the given order)."""
        edge_index = np.asarray(edge_index, dtype=np.int64)
        return SignedDigraph(self.node_count, self.src[edge_index], self.dst[edge_index],
                             self.sign[edge_index], self.labels)

    def _adj(self, by: np.ndarray, other: np.ndarray) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for u, v, s in zip(by.tolist(), other.tolist(), self.sign.tolist()):
            adj[u].append((v, s))
        return adj

    @property
    def out_adj(self) -> list[list[tuple[int, int]]]:
        if "_out_adj" not in self.__dict__:
            object.__setattr__(self, "_out_adj", self._adj(self.src, self.dst))
        return self.__dict__["_out_adj"]

    @property
    def in_adj(self) -> list[list[tuple[int, int]]]:
        if "_in_adj" not in self.__dict__:
            object.__setattr__(self, "_in_adj", self._adj(self.dst, self.src))
        return self.__dict__["_in_adj"]

    def directed_matrix(self, sign: int) -> sp.csr_matrix:
        """0/1 matrix with ``M[u, v] = 1`` iff ``u -> v`` carries ``sign``."""
        m = self.sign == sign
        data = np.ones(int(m.sum()), dtype=np.int64)
        return sp.csr_matrix((data, (self.src[m], self.dst[m])),
                             shape=(self.node_count, self.node_count))

    def undirected_sign_matrices(self) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """Symmetric 0/1 matrices (P, N) of the undirected projection.

        A node pair carries the set of distinct signs found on its edges in
        either direction, so a reciprocated pair with conflicting signs appears
        in both P and N.
        """
        if "_undirected" not in self.__dict__:
            out = []
            for s in SIGNS:
                d = self.directed_matrix(s)
                u = (d + d.T).tocsr()
                u.data[:] = 1
                u.eliminate_zeros()
                u.sort_indices()
                out.append(u)
            object.__setattr__(self, "_undirected", tuple(out))
        return self.__dict__["_undirected"]

    def undirected_adj(self) -> list[list[tuple[int, int]]]:
        """Per node, sorted ``(neighbor, sign)`` for every sign of every undirected pair."""
        if "_uadj" not in self.__dict__:
            pos, neg = self.undirected_sign_matrices()
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
            for mat, s in ((pos, 1), (neg, -1)):
                coo = mat.tocoo()
                for u, v in zip(coo.row.tolist(), coo.col.tolist()):
                    adj[u].append((v, s))
            for row in adj:
                row.sort(key=lambda t: (t[0], -t[1]))
            object.__setattr__(self, "_uadj", adj)
        return self.__dict__["_uadj"]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.node_count).encode())
        for arr in (self.src, self.dst, self.sign):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def _parse_label(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def load_edge_list(source: IO[str] | Iterable[str], format: str = "auto") -> SignedDigraph:
    """Read ``src dst weight`` records; the sign of ``weight`` is the edge sign.

    ``format`` is ``"csv"`` (comma separated), ``"tsv"`` (any whitespace) or
    ``"auto"`` (decided per line). Extra columns such as timestamps are ignored,
    ``#`` lines are comments. Self-loops, zero weights and repeated ordered
    pairs (after the first) are dropped and tallied in ``graph.dropped``.
    """
    if format not in ("auto", "csv", "tsv"):
        raise ValueError(f"unknown format {format!r}")
    ids: dict = {}
    labels: list = []
    src, dst, sgn = [], [], []
    seen: set[tuple[int, int]] = set()
    dropped = {"self_loops": 0, "zero_weight": 0, "duplicates": 0}

    def node(tok):
        lab = _parse_label(tok)
        if lab not in ids:
            ids[lab] = len(labels)
            labels.append(lab)
        return ids[lab]

    for lineno, line in enumerate(source, 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if format == "csv" or (format == "auto" and "," in text):
            parts = [p.strip() for p in text.split(",")]
        else:
            parts = text.split()
        if len(parts) < 3 or not parts[0] or not parts[1]:
            raise EdgeListError(lineno, line, "expected at least 3 fields")
        try:
            weight = float(parts[2])
        except ValueError:
            raise EdgeListError(lineno, line, "weight is not a number") from None
        if not np.isfinite(weight):
            raise EdgeListError(lineno, line, "weight is not finite")
        if weight == 0:
            dropped["zero_weight"] += 1
            continue
        if _parse_label(parts[0]) == _parse_label(parts[1]):
            dropped["self_loops"] += 1
            continue
        u, v = node(parts[0]), node(parts[1])
        if (u, v) in seen:
            dropped["duplicates"] += 1
            continue
        seen.add((u, v))
        src.append(u)
        dst.append(v)
        sgn.append(1 if weight > 0 else -1)
    return SignedDigraph(len(labels), np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                         np.array(sgn, dtype=np.int8), tuple(labels), dropped)


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    train: SignedDigraph
    test: SignedDigraph
    ratio_x: float
    seed: int
    train_index: np.ndarray
    test_index: np.ndarray


def split_edges(graph: SignedDigraph, x: float, seed: int) -> DatasetSplit:
    """Uniform random train/test split keeping ``round(x% * |E|)`` training edges."""
    if not 0 < x <= 100:
        raise ValueError(f"training percentage must be in (0, 100], got {x}")
    m = graph.edge_count
    n_train = int(np.floor(m * x / 100.0 + 0.5))
    perm = np.random.default_rng(seed).permutation(m)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return DatasetSplit(graph.subgraph(train_idx), graph.subgraph(test_idx), x, seed,
                        train_idx, test_idx)


def _sign_char(s: int) -> str:
    return "+" if s > 0 else "-"


PRIOR_PAIRS = ((1, 1), (1, -1), (-1, -1))


@dataclass(frozen=True)
class TriadStats:
    """Posterior-sign ratios ``r(a, b, c)`` keyed by sign triples.

    The prior pair is unordered, so ``(a, b, c)`` and ``(b, a, c)`` share one
    entry. ``defaulted`` lists prior pairs with no observed triangle; their
    ratios are set to 0.5.
    """

    ratios: dict
    counts: dict
    defaulted: tuple = ()

    def r(self, a: int, b: int, c: int) -> float:
        return self.ratios[(a, b, c)]

    def as_array(self) -> np.ndarray:
        """``arr[ia, ib, ic]`` with index 0 for ``+`` and 1 for ``-``."""
        arr = np.empty((2, 2, 2))
        for a, b, c in itertools.product(SIGNS, repeat=3):
            arr[SIGNS.index(a), SIGNS.index(b), SIGNS.index(c)] = self.ratios[(a, b, c)]
        return arr

    def report(self) -> dict:
        out = {}
        for a, b, c in itertools.product(SIGNS, repeat=3):
            key = _sign_char(a) + _sign_char(b) + _sign_char(c)
            out[f"r_{key}"] = self.ratios[(a, b, c)]
            out[f"count_{key}"] = self.counts[(a, b, c)]
        out["defaulted"] = ["".join(map(_sign_char, p)) for p in self.defaulted]
        return out

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=1, sort_keys=True)

    @classmethod
    def from_report(cls, rep: dict) -> "TriadStats":
        ratios, counts = {}, {}
        for a, b, c in itertools.product(SIGNS, repeat=3):
            key = _sign_char(a) + _sign_char(b) + _sign_char(c)
            ratios[(a, b, c)] = float(rep[f"r_{key}"])
            counts[(a, b, c)] = int(rep[f"count_{key}"])
        defaulted = tuple(tuple(1 if ch == "+" else -1 for ch in p) for p in rep.get("defaulted", []))
        return cls(ratios, counts, defaulted)

    @classmethod
    def from_counts(cls, counts: dict) -> "TriadStats":
        """Normalise ``{(a, b, c): count}`` (prior pair in canonical order) into ratios."""
        ratios, full = {}, {}
        defaulted = []
        for a, b in PRIOR_PAIRS:
            cp, cn = counts.get((a, b, 1), 0), counts.get((a, b, -1), 0)
            tot = cp + cn
            if tot == 0:
                rp = rn = 0.5
                defaulted.append((a, b))
            else:
                rp, rn = cp / tot, cn / tot
            for x, y in {(a, b), (b, a)}:
                ratios[(x, y, 1)], ratios[(x, y, -1)] = rp, rn
                full[(x, y, 1)], full[(x, y, -1)] = int(cp), int(cn)
        return cls(ratios, full, tuple(defaulted))

    @classmethod
    def uniform(cls) -> "TriadStats":
        return cls.from_counts({})

    def reversed(self) -> "TriadStats":
        """Swap the posterior sign: ``r'(a, b, c) = r(a, b, -c)``."""
        ratios = {(a, b, c): self.ratios[(a, b, -c)] for (a, b, c) in self.ratios}
        counts = {(a, b, c): self.counts[(a, b, -c)] for (a, b, c) in self.counts}
        return TriadStats(ratios, counts, self.defaulted)

    @classmethod
    def balanced(cls) -> "TriadStats":
        """Strict balance theory: the posterior is always the product of the priors."""
        ratios = {(a, b, c): float(a * b == c) for a, b, c in itertools.product(SIGNS, repeat=3)}
        return cls(ratios, {k: 0 for k in ratios}, ())


def compute_triad_ratios(graph: SignedDigraph) -> TriadStats:
    """Count how triangles close given two of their signs.

    Triangles are taken on the undirected projection; every edge of a triangle
    acts once as the posterior with the other two as the prior pair. Uses the
    identity that ``(X @ Y)[u, v]`` counts the wedges u-w-v with signs from X
    and Y.
    """
    pos, neg = graph.undirected_sign_matrices()
    wedges = {
        (1, 1): pos @ pos,
        (1, -1): pos @ neg + neg @ pos,
        (-1, -1): neg @ neg,
    }
    counts = {}
    for c, closing in ((1, pos), (-1, neg)):
        upper = sp.triu(closing, k=1).tocoo()
        for prior, w in wedges.items():
            vals = np.asarray(w[upper.row, upper.col]).ravel() if upper.nnz else np.zeros(0)
            counts[(prior[0], prior[1], c)] = int(vals.sum())
    return TriadStats.from_counts(counts)
