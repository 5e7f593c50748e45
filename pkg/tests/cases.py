"""Random problem instances shared by the unit and acceptance tests."""

import numpy as np
import torch

import oracles
from signtrust.egonet import build_all_egonets
from signtrust.fextra import GROUPS, PartitionTable, pair_probabilities, partition_table, train_fextra
from signtrust.graph import TriadStats, compute_triad_ratios
from signtrust.logreg import LogisticModel
from signtrust.propagation import ModelParams, forward, sample_neighbors


def random_partition(rng, nodes, rows, hops=3):
    """Arbitrary partition rows (not tied to a graph) with multiplicities."""
    group = rng.integers(0, 4, rows)
    center = rng.integers(0, nodes, rows)
    neighbor = rng.integers(0, nodes, rows)
    path_len = rng.integers(1, hops + 1, rows)
    count = rng.integers(1, 3, rows)
    sign = np.where(group % 2 == 0, 1, -1)
    return PartitionTable(nodes, group, center, neighbor, path_len, count, sign)


def graph_partition(rng, nodes, edges, hops=3, beta=0.6):
    g = oracles.random_graph(rng, nodes, edges)
    table = build_all_egonets(g, hops)
    try:
        model = train_fextra(g)
    except Exception:  # single-class toy graph
        model = LogisticModel.zeros(23)
    return g, partition_table(table, pair_probabilities(table, model, g), beta)


def oracle_sets(part: PartitionTable):
    sets = {}
    for g, c, v, p, k in zip(part.group.tolist(), part.center.tolist(), part.neighbor.tolist(),
                             part.path_len.tolist(), part.count.tolist()):
        sets.setdefault(c, {key: [] for key in GROUPS})[GROUPS[g]].extend([(v, p)] * k)
    return sets


def random_params(rng, nodes, d, layers, hops, seed):
    params = ModelParams(nodes, d, layers, hops, seed)
    with torch.no_grad():
        params.alpha.copy_(torch.from_numpy(rng.uniform(0.2, 2.0, hops)))
    return params


def random_ratios(rng):
    counts = {(a, b, c): int(rng.integers(0, 20)) for a, b in ((1, 1), (1, -1), (-1, -1)) for c in (1, -1)}
    return TriadStats.from_counts(counts)


def propagation_error(seed):
    """Max |forward - straightline oracle| on one random instance."""
    rng = np.random.default_rng(seed)
    nodes = int(rng.integers(2, 11))
    hops = int(rng.integers(1, 4))
    layers = int(rng.integers(1, 3))
    d = 2 * int(rng.integers(1, 5))
    if seed % 2:
        part = random_partition(rng, nodes, int(rng.integers(0, 4 * nodes)), hops)
        ratios = random_ratios(rng)
    else:
        g, part = graph_partition(rng, nodes, int(rng.integers(0, 3 * nodes)), hops, float(rng.uniform(0.5, 1)))
        ratios = compute_triad_ratios(g)
    params = random_params(rng, nodes, d, layers, hops, seed)
    with torch.no_grad():
        got = forward(params, sample_neighbors(part, None), ratios).numpy()
    pos, neg = params.pos.detach().numpy(), params.neg.detach().numpy()
    alpha = params.alpha.detach().numpy()
    sets = oracle_sets(part)
    for h in range(layers):
        pos, neg = oracles.propagate(pos, neg, params.W_pos[h].detach().numpy(),
                                     params.W_neg[h].detach().numpy(), alpha, sets, ratios.r)
    return float(np.max(np.abs(got - np.hstack([pos, neg]))))


def gradient_instance(seed, nodes=6, d=4, layers=2, hops=3):
    """Small model, fixed neighbourhoods covering all four groups, and training edges."""
    from signtrust.training import TrainingData
    rng = np.random.default_rng(seed)
    part = random_partition(rng, nodes, 24, hops)
    g = oracles.random_graph(rng, nodes, 10, p_pos=0.6)
    params = random_params(rng, nodes, d, layers, hops, seed)
    with torch.no_grad():
        params.status_b.fill_(float(rng.normal()))
    return params, TrainingData(part, random_ratios(rng), g, hops), sample_neighbors(part, None)


def gradient_errors(seed, lam=0.7, eps=1e-5):
    """Relative error of backward() against central differences, per parameter group."""
    from signtrust.training import backward, objective
    params, data, sampled = gradient_instance(seed)
    grads = backward(params, data, sampled, lam)
    errors = {}
    for name, p in params.named_parameters():
        num = torch.zeros_like(p)
        flat = p.data.view(-1)
        for k in range(flat.numel()):
            old = flat[k].item()
            with torch.no_grad():
                flat[k] = old + eps
                up = objective(params, data, sampled, lam)[0].item()
                flat[k] = old - eps
                down = objective(params, data, sampled, lam)[0].item()
                flat[k] = old
            num.view(-1)[k] = (up - down) / (2 * eps)
        scale = max(num.norm().item(), grads[name].norm().item(), 1e-8)
        errors[name] = (grads[name] - num).norm().item() / scale
    return errors
