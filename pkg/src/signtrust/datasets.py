"""Known benchmark datasets, their per-dataset defaults and a synthetic generator."""

from __future__ import annotations

import gzip
import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import SignedDigraph, load_edge_list


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    filenames: tuple
    nodes: int
    edges: int
    positive: int
    gamma: int
    beta: float
    lam: float
    sha256: str | None = None


# Sizes and hyperparameters as published for the four benchmarks.
DATASETS = {
    "bitcoin_alpha": DatasetInfo("bitcoin_alpha", ("soc-sign-bitcoinalpha.csv", "bitcoin_alpha.csv",
                                                   "bitcoin_alpha.txt"), 3784, 14145, 12729, 30, 0.80, 1.0),
    "bitcoin_otc": DatasetInfo("bitcoin_otc", ("soc-sign-bitcoinotc.csv", "bitcoin_otc.csv",
                                               "bitcoin_otc.txt"), 5901, 21522, 18390, 30, 0.95, 0.80),
    "slashdot": DatasetInfo("slashdot", ("slashdot.txt", "slashdot.csv", "soc-sign-Slashdot090221.txt"),
                            13182, 36338, 30914, 20, 1.0, 1.0),
    "epinions": DatasetInfo("epinions", ("epinions.txt", "epinions.csv", "soc-sign-epinions.txt"),
                            25148, 105061, 74060, 10, 1.0, 1.0),
}

DOWNLOAD_HINTS = {
    "bitcoin_alpha": "https://snap.stanford.edu/data/soc-sign-bitcoin-alpha.html",
    "bitcoin_otc": "https://snap.stanford.edu/data/soc-sign-bitcoin-otc.html",
    "slashdot": "https://snap.stanford.edu/data/soc-sign-Slashdot090221.html",
    "epinions": "https://snap.stanford.edu/data/soc-sign-epinions.html",
}

# Published test-set results at an 80% training ratio: (micro-F1, macro-F1, AUC).
PUBLISHED_RESULTS = {
    "bitcoin_alpha": (0.921, 0.721, 0.867),
    "bitcoin_otc": (0.901, 0.773, 0.886),
    "slashdot": (0.891, 0.765, 0.907),
    "epinions": (0.920, 0.902, 0.966),
}


class DatasetNotFound(FileNotFoundError):
    pass


def data_dir(path=None) -> Path:
    return Path(path or os.environ.get("SIGNTRUST_DATA", "data"))


def locate(name: str, root=None) -> Path:
    """Path of a registered dataset (plain or ``.gz``) or of an explicit file."""
    p = Path(name)
    if p.is_file():
        return p
    if name not in DATASETS:
        raise DatasetNotFound(f"{name!r} is neither a file nor a known dataset ({', '.join(DATASETS)})")
    root = data_dir(root)
    for fname in DATASETS[name].filenames:
        for cand in (root / fname, root / (fname + ".gz"), root / name / fname, root / name / (fname + ".gz")):
            if cand.is_file():
                return cand
    raise DatasetNotFound(
        f"dataset {name!r} not found under {root}; expected one of {DATASETS[name].filenames} "
        f"(optionally .gz). Download from {DOWNLOAD_HINTS[name]}")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(name: str, root=None) -> SignedDigraph:
    path = locate(name, root)
    info = DATASETS.get(name)
    if info and info.sha256 and file_sha256(path) != info.sha256:
        raise ValueError(f"{path}: checksum mismatch for {name}")
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        return load_edge_list(fh)


def synthetic_signed_graph(nodes: int = 300, edges: int = 2400, seed: int = 0,
                           closure: float = 0.6, noise: float = 0.1, majority: float = 0.8,
                           distrusted: float = 0.1) -> SignedDigraph:
    """Two-faction directed signed graph with triadic closure and a status order.

    Same-faction edges are positive and cross-faction edges negative, each
    flipped with probability ``noise``. A ``majority`` share of nodes sits in
    the first faction, so positive edges dominate as in rating networks, and
    edges into the ``distrusted`` share of nodes are mostly negative.
    Positive edges point toward the higher-status endpoint more often than not.
    """
    rng = np.random.default_rng(seed)
    faction = (rng.random(nodes) >= majority).astype(np.int64)
    shady = rng.random(nodes) < distrusted
    status = rng.random(nodes)
    nbrs: list[list[int]] = [[] for _ in range(nodes)]
    seen: set = set()
    src, dst, sgn = [], [], []
    attempts = 0
    while len(src) < edges and attempts < edges * 50:
        attempts += 1
        u = int(rng.integers(nodes))
        if nbrs[u] and rng.random() < closure:
            w = nbrs[u][rng.integers(len(nbrs[u]))]
            v = nbrs[w][rng.integers(len(nbrs[w]))] if nbrs[w] else int(rng.integers(nodes))
        else:
            v = int(rng.integers(nodes))
        if u == v or (u, v) in seen:
            continue
        s = 1 if faction[u] == faction[v] else -1
        if rng.random() < noise:
            s = -s
        if shady[v] and rng.random() < 0.8:
            s = -1
        if s > 0 and status[v] < status[u] and rng.random() < 0.5:
            u, v = v, u
            if (u, v) in seen:
                continue
        seen.add((u, v))
        nbrs[u].append(v)
        nbrs[v].append(u)
        src.append(u)
        dst.append(v)
        sgn.append(s)
    return SignedDigraph(nodes, np.array(src), np.array(dst), np.array(sgn), tuple(range(nodes)))
