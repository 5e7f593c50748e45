"""End-to-end runs: configuration, cached preprocessing, training and evaluation."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np
import torch

from . import store
from .datasets import DATASETS, PUBLISHED_RESULTS, load_dataset, synthetic_signed_graph
from .egonet import EgoTable, build_all_egonets
from .evaluation import MetricsReport, evaluate, train_downstream
from .fextra import PartitionTable, pair_probabilities, partition_table, train_fextra
from .graph import DatasetSplit, SignedDigraph, TriadStats, compute_triad_ratios, split_edges
from .logreg import LogisticModel, model_from_text, model_to_text
from .training import FitResult, TrainConfig, TrainingData, fit

log = logging.getLogger(__name__)

# variant -> (routing of EgoEdges, U-GCN ratios, learnable attention, neighbour sampling)
VARIANTS = {
    "full": ("trust", "triads", True, True),
    "tgcn_only": ("balance", "triads", True, True),
    "fextra_only": ("fextra", "triads", True, True),
    "uniform": ("trust", "uniform", True, True),
    "reverse": ("trust", "reverse", True, True),
    "mean_pool": ("trust", "triads", False, True),
    "no_sampling": ("trust", "triads", True, False),
}

DOWNSTREAM = ("concat", "hadamard", "dot")


@dataclass
class RunConfig:
    dataset: str = "bitcoin_alpha"
    data_dir: str | None = None
    n: int = 3
    H: int = 1
    d: int = 64
    gamma: int | None = None
    beta: float | None = None
    lam: float | None = None
    x: float = 80
    seed: int = 0
    variant: str = "full"
    epochs: int = 100
    lr: float = 5e-3
    weight_decay: float = 1e-5
    downstream: str = "concat"
    triads_on: str = "train"
    resample: bool = True
    learn_embeddings: bool = True
    cache_dir: str = "cache"

    def resolved(self) -> "RunConfig":
        """Fill unset gamma/beta/lambda from the dataset defaults and validate."""
        info = DATASETS.get(self.dataset, DATASETS["bitcoin_alpha"])
        cfg = replace(self,
                      gamma=info.gamma if self.gamma is None else self.gamma,
                      beta=info.beta if self.beta is None else self.beta,
                      lam=info.lam if self.lam is None else self.lam)
        if cfg.variant not in VARIANTS:
            raise ValueError(f"unknown variant {cfg.variant!r}; choose from {', '.join(VARIANTS)}")
        if cfg.downstream not in DOWNSTREAM:
            raise ValueError(f"unknown downstream scorer {cfg.downstream!r}")
        if cfg.triads_on not in ("train", "full"):
            raise ValueError("triads_on must be 'train' or 'full'")
        if not 0 <= cfg.beta <= 1:
            raise ValueError("beta must be in [0, 1]")
        if cfg.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not 0 < cfg.x <= 100:
            raise ValueError("x must be in (0, 100]")
        return cfg

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(field_type: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if "bool" in field_type:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in field_type and "float" not in field_type:
        return int(raw)
    if "float" in field_type:
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: str(f.type) for f in fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(types[key], val)
    return out


def config_text(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.as_dict().items())


# ---------------------------------------------------------------- preprocessing

@dataclass
class Prepared:
    config: RunConfig
    graph: SignedDigraph
    split: DatasetSplit
    triads: TriadStats
    egonets: EgoTable
    fextra: LogisticModel
    p_pos: np.ndarray
    partition: PartitionTable
    cache: Path


def load_graph(cfg: RunConfig) -> SignedDigraph:
    if cfg.dataset.startswith("synthetic"):
        # synthetic[:nodes[:edges]]
        parts = cfg.dataset.split(":")
        nodes = int(parts[1]) if len(parts) > 1 else 300
        edges = int(parts[2]) if len(parts) > 2 else 8 * nodes
        return synthetic_signed_graph(nodes, edges, seed=0)
    return load_dataset(cfg.dataset, cfg.data_dir)


def cache_path(cfg: RunConfig, graph: SignedDigraph) -> Path:
    name = Path(cfg.dataset).stem.replace(":", "-")
    return Path(cfg.cache_dir) / f"{name}-{graph.digest()}-x{cfg.x:g}-s{cfg.seed}-n{cfg.n}"


def _cached_arrays(path: Path, kind: str, expect: dict, build):
    try:
        _, arrays = store.read_arrays(path, kind, expect)
        return arrays
    except FileNotFoundError:
        pass
    except store.CacheMismatch as exc:
        log.warning("rebuilding stale cache: %s", exc)
    arrays = build()
    store.write_arrays(path, kind, expect, arrays)
    return arrays


def _cached_text(path: Path, header: str, build) -> str:
    if path.is_file():
        text = path.read_text()
        if text.startswith(header):
            return text[len(header):]
        log.warning("rebuilding stale cache: %s", path)
    body = build()
    store.write_text(path, header + body)
    return body


def ratio_table(triads: TriadStats, variant: str) -> TriadStats:
    mode = VARIANTS[variant][1]
    if mode == "uniform":
        return TriadStats.uniform()
    if mode == "reverse":
        return triads.reversed()
    return triads


def prepare(cfg: RunConfig, graph: SignedDigraph | None = None) -> Prepared:
    """Split, triad statistics, EgoNets, sign classifier and trust partition (all cached)."""
    cfg = cfg.resolved()
    graph = graph if graph is not None else load_graph(cfg)
    split = split_edges(graph, cfg.x, cfg.seed)
    train = split.train
    root = cache_path(cfg, graph)
    ident = {"graph": graph.digest(), "train": train.digest(), "x": cfg.x, "seed": cfg.seed, "n": cfg.n}

    tri_src = graph if cfg.triads_on == "full" else train
    tri_head = f"# triads {json.dumps({**ident, 'on': cfg.triads_on}, sort_keys=True)}\n"
    tri_text = _cached_text(root / f"triads-{cfg.triads_on}.json", tri_head,
                            lambda: compute_triad_ratios(tri_src).to_json() + "\n")
    triads = TriadStats.from_report(json.loads(tri_text))

    ego = _cached_arrays(root / "egonets.bin", "egonets", ident,
                         lambda: build_all_egonets(train, cfg.n).arrays())
    table = EgoTable(graph.node_count, cfg.n, ego["center"], ego["neighbor"], ego["sign"],
                     ego["path_len"], ego["count"])

    model_head = f"# fextra {json.dumps(ident, sort_keys=True)}\n"
    model = model_from_text(_cached_text(root / "fextra.txt", model_head,
                                         lambda: model_to_text(train_fextra(train))))

    pred = _cached_arrays(root / "fextra_pred.bin", "fextra_pred", ident,
                          lambda: {"p_pos": pair_probabilities(table, model, train)})
    p_pos = pred["p_pos"]

    route = VARIANTS[cfg.variant][0]
    part_id = {**ident, "beta": cfg.beta, "route": route}
    parts = _cached_arrays(root / f"partition-b{cfg.beta:g}-{route}.bin", "partition", part_id,
                           lambda: partition_table(table, p_pos, cfg.beta, route).arrays())
    partition = PartitionTable(graph.node_count, parts["group"], parts["center"], parts["neighbor"],
                               parts["path_len"], parts["count"], parts["sign"])
    return Prepared(cfg, graph, split, triads, table, model, p_pos, partition, root)


# ---------------------------------------------------------------- training/eval

@dataclass
class RunResult:
    config: RunConfig
    metrics: MetricsReport
    fit: FitResult
    row: dict
    checkpoint: Path | None = None


def train_config(cfg: RunConfig) -> TrainConfig:
    _, _, learn_alpha, sampling = VARIANTS[cfg.variant]
    return TrainConfig(lambda_status=cfg.lam, learning_rate=cfg.lr, epochs=cfg.epochs,
                       weight_decay=cfg.weight_decay, seed=cfg.seed,
                       gamma=cfg.gamma if sampling else None, d=cfg.d, layers=cfg.H,
                       learn_alpha=learn_alpha, learn_embeddings=cfg.learn_embeddings,
                       resample=cfg.resample)


def write_checkpoint(path: Path, cfg: RunConfig, result: FitResult):
    arrays = {name: p.detach().numpy() for name, p in result.params.named_parameters()}
    arrays["embeddings"] = result.embeddings
    store.write_arrays(path, "checkpoint", {"run": cfg.as_dict()}, arrays)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "sign_loss", "status_loss", "total"])
    for epoch, ls, lt, tot in result.trace:
        w.writerow([epoch, repr(ls), repr(lt), repr(tot)])
    store.write_text(path.with_suffix(".loss.csv"), buf.getvalue())


def write_embeddings(path: Path, cfg: RunConfig, graph: SignedDigraph, emb: np.ndarray):
    """One ``label v_1 ... v_d`` line per node after a ``#`` header with the run settings."""
    head = {"d": cfg.d, "H": cfg.H, "n": cfg.n, "gamma": cfg.gamma, "beta": cfg.beta, "lambda": cfg.lam,
            "seed": cfg.seed, "dataset": graph.digest()}
    lines = ["# " + json.dumps(head, sort_keys=True)]
    labels = graph.labels or tuple(range(graph.node_count))
    for lab, row in zip(labels, emb):
        lines.append(f"{lab} " + " ".join(repr(float(v)) for v in row))
    store.write_text(path, "\n".join(lines) + "\n")


def read_embeddings(path, graph: SignedDigraph) -> np.ndarray:
    index = {str(lab): i for i, lab in enumerate(graph.labels or range(graph.node_count))}
    emb = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            parts = line.split()
            if emb is None:
                emb = np.zeros((graph.node_count, len(parts) - 1))
            emb[index[parts[0]]] = [float(v) for v in parts[1:]]
    if emb is None:
        raise ValueError(f"{path}: no embeddings")
    return emb


def downstream_metrics(cfg: RunConfig, emb: np.ndarray, split: DatasetSplit) -> MetricsReport:
    if cfg.downstream == "dot":
        return evaluate(None, emb, split.test)
    model = train_downstream(emb, split.train, cfg.downstream)
    return evaluate(model, emb, split.test, cfg.downstream)


def train_eval(cfg: RunConfig, graph: SignedDigraph | None = None, out_dir: Path | None = None) -> RunResult:
    """Preprocess (cached), train, score held-out edges and build the report row."""
    cfg = cfg.resolved()
    if cfg.x >= 100:
        raise ValueError("x=100 leaves no test edges to evaluate")
    t0 = time.perf_counter()
    prep = prepare(cfg, graph)
    torch.set_num_threads(1)
    ratios = ratio_table(prep.triads, cfg.variant)
    data = TrainingData(prep.partition, ratios, prep.split.train, hops=cfg.n)
    result = fit(data, train_config(cfg))
    metrics = downstream_metrics(cfg, result.embeddings, prep.split)
    row = {**cfg.as_dict(), "dataset_hash": prep.graph.digest(),
           "untrusted_fraction": prep.partition.untrustworthy_fraction(),
           **{k: v for k, v in metrics.as_dict().items() if k != "confusion"},
           "final_loss": result.trace[-1][3] if result.trace else float("nan"),
           "wall_time_s": round(time.perf_counter() - t0, 3)}
    ckpt = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        ckpt = out_dir / f"{Path(cfg.dataset).stem.replace(':', '-')}-{cfg.variant}-s{cfg.seed}.ckpt"
        write_checkpoint(ckpt, cfg, result)
    return RunResult(cfg, metrics, result, row, ckpt)


REPORT_FIELDS = ["dataset", "x", "seed", "variant", "micro_f1", "macro_f1", "auc", "wall_time_s"]


def rows_to_csv(rows: list[dict]) -> str:
    keys = list(REPORT_FIELDS) + sorted({k for r in rows for k in r} - set(REPORT_FIELDS))
    buf = io.StringIO()
    w = csv.DictWriter(buf, keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def reproduce(datasets, seeds, base: RunConfig) -> list[dict]:
    """Run every (dataset, seed) cell; a failing cell is reported and the grid continues."""
    cells = []
    for name in datasets:
        runs, errors = [], []
        for seed in seeds:
            cfg = replace(base, dataset=name, seed=seed, gamma=None, beta=None, lam=None)
            try:
                runs.append(train_eval(cfg).metrics)
            except Exception as exc:  # noqa: BLE001 - grid keeps going, error is reported
                log.error("%s seed %s failed: %s", name, seed, exc)
                errors.append(f"seed {seed}: {type(exc).__name__}: {exc}")
        cell = {"dataset": name, "runs": len(runs), "errors": errors}
        target = PUBLISHED_RESULTS.get(name)
        for k, metric in enumerate(("micro_f1", "macro_f1", "auc")):
            vals = np.array([getattr(m, metric) for m in runs])
            cell[metric + "_mean"] = float(vals.mean()) if len(vals) else math.nan
            cell[metric + "_std"] = float(vals.std()) if len(vals) else math.nan
            cell[metric + "_published"] = target[k] if target else None
        cells.append(cell)
    return cells
