"""Deliberately naive CAEA used as a test oracle.

Plain Python lists and dicts, everything rebuilt every step, no numpy.
Follows the learning loop directly: initial nodes, winner search with the
mean bandwidth, edge aging, three-case vigilance test, isolated-node sweep.
"""

import math
import statistics


def kde_sigma(window):
    n = len(window)
    d = len(window[0])
    coef = (4.0 / (2.0 + d)) ** (1.0 / (4.0 + d))
    per_attr = [coef * statistics.pstdev([p[a] for p in window]) * n ** (-1.0 / (4.0 + d)) for a in range(d)]
    s = statistics.median(per_attr)
    return s if s > 0 else 1e-6


def cim(x, y, sigma):
    c = sum(math.exp(-((a - b) ** 2) / (2.0 * sigma * sigma)) for a, b in zip(x, y)) / len(x)
    return math.sqrt(max(1.0 - c, 0.0))


def run(stream, lam, age_max):
    init = int(math.floor(lam / 2 + 0.5))
    nodes = []  # each: [weight list, sigma, M]
    edges = {}  # frozenset({i, j}) -> age
    threshold = None
    history = []
    for l, x in enumerate(stream, start=1):
        x = [float(v) for v in x]
        past = [list(p) for p in history[-init:]] or [x]
        nodes = [[list(w), s, m] for w, s, m in nodes]
        edges = dict(edges)
        if len(nodes) < init:
            nodes.append([list(x), kde_sigma(past), 1])
            if threshold is None:
                common = kde_sigma([w for w, _, _ in nodes])
                for nd in nodes:
                    nd[1] = common
                if len(nodes) == init:
                    mins = []
                    for i, (wi, _, _) in enumerate(nodes):
                        mins.append(min(cim(wi, wj, common) for j, (wj, _, _) in enumerate(nodes) if j != i))
                    threshold = sum(mins) / len(mins)
        else:
            sbar = sum(nd[1] for nd in nodes) / len(nodes)
            dists = [cim(x, nd[0], sbar) for nd in nodes]
            k1 = min(range(len(nodes)), key=lambda k: (dists[k], k))
            rest = [k for k in range(len(nodes)) if k != k1]
            k2 = min(rest, key=lambda k: (dists[k], k)) if rest else None
            v1 = dists[k1]
            v2 = dists[k2] if k2 is not None else None
            for e in [e for e in edges if k1 in e]:
                edges[e] += 1
                if edges[e] > age_max:
                    del edges[e]
            if v1 > threshold:
                nodes.append([list(x), kde_sigma(past), 1])
            else:
                w, s, m = nodes[k1]
                nodes[k1] = [[wi + (xi - wi) / m for wi, xi in zip(w, x)], s, m + 1]
                if v2 is not None and v2 <= threshold:
                    neigh = sorted(j for e in edges if k1 in e for j in e if j != k1)
                    for j in neigh:
                        wj, sj, mj = nodes[j]
                        nodes[j] = [[wi + (xi - wi) / (10 * mj) for wi, xi in zip(wj, x)], sj, mj]
                    edges[frozenset((k1, k2))] = 0
        history.append(x)
        if l % lam == 0:
            linked = {i for e in edges for i in e}
            keep = [k for k in range(len(nodes)) if k in linked]
            new = {old: n for n, old in enumerate(keep)}
            nodes = [nodes[k] for k in keep]
            edges = {frozenset(new[i] for i in e): a for e, a in edges.items()}
    return nodes, edges, threshold
