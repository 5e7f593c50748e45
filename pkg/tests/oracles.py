"""Slow, obviously-correct reference implementations used by the tests."""

import itertools
import math

import numpy as np

from signtrust.graph import SignedDigraph


def random_graph(rng, nodes, edges, p_pos=0.7):
    """Random signed digraph with up to ``edges`` distinct ordered pairs."""
    pairs = [(u, v) for u in range(nodes) for v in range(nodes) if u != v]
    rng.shuffle(pairs)
    chosen = pairs[:edges]
    signs = [1 if rng.random() < p_pos else -1 for _ in chosen]
    return SignedDigraph.from_edges(nodes, [(u, v, s) for (u, v), s in zip(chosen, signs)])


def undirected_signs(graph):
    """{frozenset({u, v}): set of signs} over the undirected projection."""
    out = {}
    for u, v, s in graph.edges():
        out.setdefault(frozenset((u, v)), set()).add(s)
    return out


def triad_counts(graph):
    """Brute force over node triples: every sign assignment of a triangle, each edge once as posterior."""
    und = undirected_signs(graph)
    counts = {}
    for a, b, c in itertools.combinations(range(graph.node_count), 3):
        e_ab, e_bc, e_ac = frozenset((a, b)), frozenset((b, c)), frozenset((a, c))
        if not (e_ab in und and e_bc in und and e_ac in und):
            continue
        for s_ab in und[e_ab]:
            for s_bc in und[e_bc]:
                for s_ac in und[e_ac]:
                    for post, p1, p2 in ((s_ab, s_bc, s_ac), (s_bc, s_ab, s_ac), (s_ac, s_ab, s_bc)):
                        key = (max(p1, p2), min(p1, p2), post)
                        counts[key] = counts.get(key, 0) + 1
    return counts


def simple_paths(graph, center, n):
    """All (end, sign, length) over simple paths of length 1..n in the undirected multigraph."""
    und = undirected_signs(graph)
    nbrs = {u: [] for u in range(graph.node_count)}
    for pair, signs in und.items():
        u, v = tuple(pair)
        for s in signs:
            nbrs[u].append((v, s))
            nbrs[v].append((u, s))
    found = []

    def go(path, sign):
        if len(path) - 1 == n:
            return
        for v, s in nbrs[path[-1]]:
            if v in path:
                continue
            found.append((v, sign * s, len(path)))
            go(path + [v], sign * s)

    go([center], 1)
    direct = {v for v, _, length in found if length == 1}
    return sorted(e for e in found if e[2] == 1 or e[0] not in direct)


def pair_features(graph, i, j):
    """Feature vector of (i, j) by testing every (i, z, j) configuration."""
    sign = {(u, v): s for u, v, s in graph.edges()}
    f = [0] * 23
    for (u, v), s in sign.items():
        for node, slot in ((i, 0), (j, 1)):
            if node in (u, v):
                f[slot if s > 0 else slot + 2] += 1
    f[4], f[5] = f[0] + f[2], f[1] + f[3]
    linked = lambda a, b: (a, b) in sign or (b, a) in sign  # noqa: E731
    for z in range(graph.node_count):
        if z in (i, j):
            continue
        if linked(i, z) and linked(j, z):
            f[6] += 1
        col = 7
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            for ei, ej in (((i, z), (z, j)), ((i, z), (j, z)), ((z, i), (z, j)), ((z, i), (j, z))):
                if sign.get(ei) == si and sign.get(ej) == sj:
                    f[col] += 1
                col += 1
    return f


def sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def propagate(pos, neg, W_pos, W_neg, alpha, sets, r):
    """One layer of trust-aware propagation written term by term.

    ``sets[i]`` maps "T+", "T-", "U+", "U-" to lists of (neighbour, path length).
    ``r(a, b, c)`` is the ratio table. Returns new (pos, neg) arrays.
    """
    l, h = pos.shape
    new_pos, new_neg = pos.copy(), neg.copy()
    for i in range(l):
        s = sets.get(i, {})
        tp, tn, up, un = (s.get(k, []) for k in ("T+", "T-", "U+", "U-"))

        def act(W, x):
            return np.array([sig(sum(W[a][b] * x[b] for b in range(h))) for a in range(h)])

        if tp or tn:
            x_pos = [0.0] * h
            x_neg = [0.0] * h
            for j, p in tp:
                for c in range(h):
                    x_pos[c] += alpha[p - 1] * pos[j][c]
                    x_neg[c] += alpha[p - 1] * neg[j][c]
            for k, p in tn:
                for c in range(h):
                    x_pos[c] += alpha[p - 1] * neg[k][c]
                    x_neg[c] += alpha[p - 1] * pos[k][c]
            mt_pos, mt_neg = act(W_pos, x_pos), act(W_neg, x_neg)
        else:
            mt_pos, mt_neg = np.zeros(h), np.zeros(h)
        if up or un:
            x_pos = [0.0] * h
            x_neg = [0.0] * h
            for j, p in up:
                for c in range(h):
                    x_pos[c] += alpha[p - 1] * (r(1, 1, 1) * pos[j][c] + r(-1, 1, 1) * neg[j][c])
                    x_neg[c] += alpha[p - 1] * (r(1, 1, -1) * pos[j][c] + r(-1, 1, -1) * neg[j][c])
            for k, p in un:
                for c in range(h):
                    x_pos[c] += alpha[p - 1] * (r(1, -1, 1) * pos[k][c] + r(-1, -1, 1) * neg[k][c])
                    x_neg[c] += alpha[p - 1] * (r(1, -1, -1) * pos[k][c] + r(-1, -1, -1) * neg[k][c])
            mu_pos, mu_neg = act(W_pos, x_pos), act(W_neg, x_neg)
        else:
            mu_pos, mu_neg = np.zeros(h), np.zeros(h)
        d_pos, d_neg = len(tp) + len(up), len(tn) + len(un)
        if d_pos:
            new_pos[i] = pos[i] + (mt_pos + mu_pos) / d_pos
        if d_neg:
            new_neg[i] = neg[i] + (mt_neg + mu_neg) / d_neg
    return new_pos, new_neg


def trapezoid_auc(labels, scores):
    """Area under the ROC curve by sweeping thresholds over distinct scores."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    P, N = labels.sum(), (~labels).sum()
    tpr, fpr = [0.0], [0.0]
    for t in sorted(set(scores.tolist()), reverse=True):
        tpr.append(np.sum(labels & (scores >= t)) / P)
        fpr.append(np.sum(~labels & (scores >= t)) / N)
    return float(sum((fpr[k] - fpr[k - 1]) * (tpr[k] + tpr[k - 1]) / 2 for k in range(1, len(fpr))))
