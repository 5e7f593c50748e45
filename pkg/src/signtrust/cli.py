"""Command-line entry point: ``signtrust <ingest|stats|preprocess|train|eval|reproduce>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import pipeline, store
from .datasets import DATASETS, DatasetNotFound, file_sha256, locate
from .graph import EdgeListError, compute_triad_ratios, split_edges
from .logreg import TrainingError
from .pipeline import RunConfig

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_PARSE, EXIT_TRAIN = 0, 2, 3, 4, 5

# flag name -> RunConfig field, for the flags whose spelling differs
FLAG_ALIASES = {"lambda": "lam"}


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("dataset", nargs="?", help="registered dataset name, synthetic[:nodes[:edges]] or an edge-list path")
    p.add_argument("--config", help="flat key = value file; flags given here override it")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--n", type=int, help="hop bound for EgoNets")
    p.add_argument("--H", type=int, help="propagation layers")
    p.add_argument("--d", type=int, help="embedding size (both halves)")
    p.add_argument("--gamma", type=int, help="neighbours sampled per set (0 keeps all)")
    p.add_argument("--beta", type=float, help="trust threshold")
    p.add_argument("--lambda", dest="lam", type=float, help="status loss weight")
    p.add_argument("--x", type=float, help="training percentage")
    p.add_argument("--seed", type=int)
    p.add_argument("--variant", choices=list(pipeline.VARIANTS))
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--downstream", choices=pipeline.DOWNSTREAM)
    p.add_argument("--triads-on", dest="triads_on", choices=("train", "full"))
    p.add_argument("--no-resample", dest="resample", action="store_const", const=False)
    p.add_argument("--freeze-embeddings", dest="learn_embeddings", action="store_const", const=False)
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--out", help="also write the report to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signtrust", description="Trust-aware signed graph embeddings.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an edge list and report its size and hash")
    _add_run_flags(p)
    p = sub.add_parser("stats", help="triad closure ratios")
    _add_run_flags(p)
    p.add_argument("--on", choices=("full", "train"), default="full")
    p = sub.add_parser("preprocess", help="build EgoNet, classifier and partition caches")
    _add_run_flags(p)
    p = sub.add_parser("train", help="train embeddings and evaluate on held-out edges")
    _add_run_flags(p)
    p.add_argument("--embeddings", help="write final embeddings to this path")
    p = sub.add_parser("eval", help="evaluate a saved embeddings file")
    _add_run_flags(p)
    p.add_argument("--embeddings", required=True)
    p = sub.add_parser("reproduce", help="run the benchmark grid over datasets and seeds")
    _add_run_flags(p)
    p.add_argument("--datasets", nargs="+", default=list(DATASETS))
    p.add_argument("--seeds", type=int, default=5, help="number of seeds (0..k-1)")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **pipeline.parse_config_text(Path(args.config).read_text()))
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    if overrides.get("gamma") == 0:
        overrides["gamma"] = None
        overrides["variant"] = overrides.get("variant", "no_sampling")
    cfg = replace(cfg, **overrides)
    return cfg.resolved()


def emit(text: str, out: str | None):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if out:
        store.write_text(Path(out), text if text.endswith("\n") else text + "\n")


def cmd_ingest(cfg: RunConfig, args) -> int:
    graph = pipeline.load_graph(cfg)
    info = {"dataset": cfg.dataset, "nodes": graph.node_count, "edges": graph.edge_count,
            "positive": int((graph.sign > 0).sum()), "negative": int((graph.sign < 0).sum()),
            "dropped": dict(graph.dropped), "digest": graph.digest()}
    if not cfg.dataset.startswith("synthetic"):
        info["file_sha256"] = file_sha256(locate(cfg.dataset, cfg.data_dir))
    known = DATASETS.get(cfg.dataset)
    if known:
        info["matches_published_size"] = (graph.node_count, graph.edge_count, info["positive"]) == \
            (known.nodes, known.edges, known.positive)
    emit(json.dumps(info, indent=1, sort_keys=True), args.out)
    return EXIT_OK


def triad_table(stats) -> str:
    lines = ["prior  posterior  ratio   count  label"]
    for a, b in (("+", "+"), ("+", "-"), ("-", "-")):
        sa, sb = (1 if a == "+" else -1), (1 if b == "+" else -1)
        for c in ("+", "-"):
            sc = 1 if c == "+" else -1
            label = "balanced" if sa * sb == sc else "unbalanced"
            lines.append(f"({a},{b})  {c:>9}  {stats.r(sa, sb, sc):.4f}  {stats.counts[(sa, sb, sc)]:6d}  {label}")
    if stats.defaulted:
        lines.append("no triangles for prior pairs: " + ", ".join("".join("+" if s > 0 else "-" for s in p)
                                                                for p in stats.defaulted) + " (ratios set to 0.5)")
    return "\n".join(lines)


def cmd_stats(cfg: RunConfig, args) -> int:
    graph = pipeline.load_graph(cfg)
    if args.on == "train":
        graph = split_edges(graph, cfg.x, cfg.seed).train
    emit(triad_table(compute_triad_ratios(graph)), args.out)
    return EXIT_OK


def cmd_preprocess(cfg: RunConfig, args) -> int:
    prep = pipeline.prepare(cfg)
    summary = {"cache": str(prep.cache), "egonet_rows": prep.egonets.rows,
               "egonet_edges": prep.egonets.total_edges(), "groups": prep.partition.group_totals(),
               "untrusted_fraction": prep.partition.untrustworthy_fraction()}
    emit(json.dumps(summary, indent=1, sort_keys=True), args.out)
    return EXIT_OK


def cmd_train(cfg: RunConfig, args) -> int:
    out_dir = Path(args.out).parent if args.out else None
    res = pipeline.train_eval(cfg, out_dir=out_dir)
    if args.embeddings:
        pipeline.write_embeddings(Path(args.embeddings), cfg, pipeline.load_graph(cfg), res.fit.embeddings)
    emit(json.dumps(res.row, sort_keys=True), args.out)
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    graph = pipeline.load_graph(cfg)
    split = split_edges(graph, cfg.x, cfg.seed)
    if split.test.edge_count == 0:
        raise ValueError("x=100 leaves no test edges to evaluate")
    emb = pipeline.read_embeddings(args.embeddings, graph)
    metrics = pipeline.downstream_metrics(cfg, emb, split)
    emit(json.dumps({**cfg.as_dict(), **metrics.as_dict()}, sort_keys=True), args.out)
    return EXIT_OK


def cmd_reproduce(cfg: RunConfig, args) -> int:
    cells = pipeline.reproduce(args.datasets, range(args.seeds), cfg)
    lines = [f"{'dataset':<14}{'micro':>20}{'macro':>20}{'auc':>20}"]
    for c in cells:
        parts = []
        for m in ("micro_f1", "macro_f1", "auc"):
            pub = c[m + "_published"]
            parts.append(f"{c[m + '_mean']:.3f}±{c[m + '_std']:.3f} ({pub if pub is not None else '-'})")
        lines.append(f"{c['dataset']:<14}" + "".join(f"{p:>20}" for p in parts))
        lines += [f"  failed {e}" for e in c["errors"]]
    emit("\n".join(lines), args.out)
    return EXIT_OK if all(c["runs"] for c in cells) else EXIT_TRAIN


COMMANDS = {"ingest": cmd_ingest, "stats": cmd_stats, "preprocess": cmd_preprocess,
            "train": cmd_train, "eval": cmd_eval, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print("# " + pipeline.config_text(cfg).strip().replace("\n", "\n# "), file=sys.stderr)
    try:
        return COMMANDS[args.command](cfg, args)
    except DatasetNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EdgeListError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
