"""Online CAEA learner: prototype nodes, aged edges, and a CIM vigilance test.

Each input either spawns a node (Case I), moves its first winner (Case II), or
moves the first winner and its neighbours and links the two winners
(Case III). Isolated nodes are swept every ``lam`` inputs.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from caea.bandwidth import usable_sigma
from caea.similarity import cim_many

AGING_POLICIES = ("algorithm1", "prose")

class ConfigError(ValueError):
    """Invalid hyperparameters."""


class StateError(RuntimeError):
    """Operation not possible in the model's current state."""


class VigilanceCase(enum.IntEnum):
    CASE_I = 1
    CASE_II = 2
    CASE_III = 3


@dataclass(frozen=True)
class CaeaParams:
    """Hyperparameters.

    Attributes:
        lam: interval for bandwidth estimation and isolated-node deletion.
            The first ``round(lam / 2)`` inputs become the initial nodes.
        age_max: edges older than this are deleted.
        aging_policy: ``"algorithm1"`` ages the first winner's edges on every
            post-initialization input; ``"prose"`` only in Cases II and III.
        v_threshold: optional fixed vigilance threshold replacing the
            estimate. Required when ``lam < 4``.
    """

    lam: int = 20
    age_max: int = 10
    aging_policy: str = "algorithm1"
    v_threshold: float | None = None

    def __post_init__(self):
        if isinstance(self.lam, bool) or int(self.lam) != self.lam or self.lam < 2:
            raise ConfigError(f"lambda must be an integer >= 2, got {self.lam!r}")
        if self.lam < 4 and self.v_threshold is None:
            raise ConfigError(
                f"lambda={self.lam} is below 4; threshold estimation over so few "
                "initial nodes is refused unless v_threshold is given explicitly"
            )
        if int(self.age_max) != self.age_max or self.age_max < 1:
            raise ConfigError(f"age_max must be a positive integer, got {self.age_max!r}")
        if self.aging_policy not in AGING_POLICIES:
            raise ConfigError(f"aging_policy must be one of {AGING_POLICIES}")
        if self.v_threshold is not None and not 0.0 < self.v_threshold < 1.0:
            raise ConfigError("v_threshold must lie in (0, 1)")

    @property
    def init_size(self) -> int:
        return init_size(self)


def init_size(params: CaeaParams) -> int:
    """round(lam / 2) with halves rounded up."""
    return int(math.floor(params.lam / 2 + 0.5))


@dataclass
class Node:
    weight: np.ndarray
    sigma: float
    win_count: int
    label_histogram: dict = field(default_factory=dict)


class EdgeStore:
    """Undirected edges with integer ages, keyed by (low, high) index pairs."""

    def __init__(self):
        self.ages: dict[tuple[int, int], int] = {}
        self._adj: dict[int, set[int]] = {}

    @staticmethod
    def key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def __len__(self):
        return len(self.ages)

    def __contains__(self, pair) -> bool:
        return self.key(*pair) in self.ages

    def age(self, i: int, j: int) -> int:
        return self.ages[self.key(i, j)]

    def neighbors(self, i: int) -> list[int]:
        return sorted(self._adj.get(i, ()))

    def degree(self, i: int) -> int:
        return len(self._adj.get(i, ()))

    def connect(self, i: int, j: int) -> None:
        """Create edge (i, j) or reset its age to zero."""
        if i == j:
            raise ValueError("self-loops are not allowed")
        self.ages[self.key(i, j)] = 0
        self._adj.setdefault(i, set()).add(j)
        self._adj.setdefault(j, set()).add(i)

    def disconnect(self, i: int, j: int) -> None:
        del self.ages[self.key(i, j)]
        self._adj[i].discard(j)
        self._adj[j].discard(i)

    def age_incident(self, i: int, age_max: int) -> list[int]:
        """Increment ages of edges at ``i``; drop those above ``age_max``."""
        dropped = []
        for j in self.neighbors(i):
            k = self.key(i, j)
            self.ages[k] += 1
            if self.ages[k] > age_max:
                self.disconnect(i, j)
                dropped.append(j)
        return dropped

    def remap(self, keep: np.ndarray) -> None:
        """Keep only nodes flagged in ``keep`` and renumber them compactly."""
        new_index = np.cumsum(keep) - 1
        ages = {}
        for (i, j), a in self.ages.items():
            if keep[i] and keep[j]:
                ages[(int(new_index[i]), int(new_index[j]))] = a
        self.ages = {}
        self._adj = {}
        for (i, j), a in ages.items():
            self.connect(i, j)
            self.ages[(i, j)] = a

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.ages)


def compute_vigilance_threshold(points, sigma: float) -> float:
    """Mean over points of the CIM to each point's closest other point."""
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    if m < 2:
        raise StateError("vigilance threshold needs at least two initial nodes")
    mins = np.empty(m)
    for i in range(m):
        c = cim_many(pts[i], pts, sigma)
        c[i] = np.inf
        mins[i] = c.min()
    return float(mins.mean())


def vigilance_case(v1: float, v2: float | None, v_threshold: float) -> VigilanceCase:
    if v1 > v_threshold:
        return VigilanceCase.CASE_I
    if v2 is None or v2 > v_threshold:
        return VigilanceCase.CASE_II
    return VigilanceCase.CASE_III


def _majority(hist: dict):
    if not hist:
        return None
    best = max(hist.values())
    return min(k for k, v in hist.items() if v == best)


class CaeaModel:
    """Single-pass topological clusterer.

    Weights, bandwidths and win counts are held in parallel arrays indexed by
    node; ``nodes`` exposes them as :class:`Node` records.
    """

    def __init__(self, params: CaeaParams | None = None, **kwargs):
        if params is None:
            params = CaeaParams(**kwargs)
        elif kwargs:
            raise TypeError("pass either params or keyword hyperparameters")
        self.params = params
        self.dim: int | None = None
        self.weights = np.empty((0, 0))
        self.sigmas = np.empty(0)
        self.counts = np.empty(0, dtype=np.int64)
        self.histograms: list[dict] = []
        self.edges = EdgeStore()
        self.recent: deque = deque(maxlen=params.init_size)
        self.input_count = 0
        self._v_threshold: float | None = None

    # -- state -----------------------------------------------------------

    @property
    def v_threshold(self) -> float | None:
        return self._v_threshold

    @v_threshold.setter
    def v_threshold(self, value: float) -> None:
        if self._v_threshold is not None:
            raise StateError("vigilance threshold is fixed once initialization completes")
        self._v_threshold = float(value)

    @property
    def n_nodes(self) -> int:
        return len(self.sigmas)

    @property
    def nodes(self) -> list[Node]:
        return [
            Node(self.weights[k].copy(), float(self.sigmas[k]), int(self.counts[k]), dict(self.histograms[k]))
            for k in range(self.n_nodes)
        ]

    @property
    def mean_sigma(self) -> float:
        return float(np.mean(self.sigmas))

    def _as_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        if self.dim is None:
            if x.size == 0:
                raise ValueError("data points need at least one attribute")
            self.dim = x.size
            self.weights = np.empty((0, x.size))
        elif x.size != self.dim:
            raise ValueError(f"expected {self.dim} attributes, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("data points must be finite")
        return x

    def _add_node(self, x: np.ndarray, sigma: float) -> int:
        self.weights = np.vstack([self.weights, x[None, :]])
        self.sigmas = np.append(self.sigmas, sigma)
        self.counts = np.append(self.counts, 1)
        self.histograms.append({})
        return self.n_nodes - 1

    # -- learning --------------------------------------------------------

    def select_winners(self, x) -> tuple[int, int | None, float, float | None]:
        """First and second winners by CIM under the mean node bandwidth."""
        if self.n_nodes == 0:
            raise StateError("model has no nodes")
        c = cim_many(np.asarray(x, dtype=np.float64), self.weights, self.mean_sigma)
        k1 = int(np.argmin(c))
        if self.n_nodes == 1:
            return k1, None, float(c[k1]), None
        v1 = float(c[k1])
        c[k1] = np.inf
        k2 = int(np.argmin(c))
        return k1, k2, v1, float(c[k2])

    def learn_one(self, x, label: Hashable | None = None) -> VigilanceCase | None:
        """Present one input. Returns the vigilance case, or None for a direct insertion."""
        x = self._as_point(x)
        p = self.params
        self.input_count += 1
        past = np.array(self.recent) if self.recent else x[None, :]
        case = None

        if self.n_nodes < p.init_size:
            k = self._add_node(x, usable_sigma(past))
            if self._v_threshold is None:
                # initial nodes share one bandwidth estimated over themselves
                self.sigmas[:] = usable_sigma(self.weights)
                if self.n_nodes == p.init_size:
                    if p.v_threshold is not None:
                        self.v_threshold = p.v_threshold
                    else:
                        self.v_threshold = compute_vigilance_threshold(self.weights, self.sigmas[0])
        else:
            k1, k2, v1, v2 = self.select_winners(x)
            if p.aging_policy == "algorithm1":
                self.edges.age_incident(k1, p.age_max)
            case = vigilance_case(v1, v2, self._v_threshold)
            if case is VigilanceCase.CASE_I:
                k = self._add_node(x, usable_sigma(past))
            else:
                if p.aging_policy == "prose":
                    self.edges.age_incident(k1, p.age_max)
                k = k1
                self.weights[k1] += (x - self.weights[k1]) / self.counts[k1]
                self.counts[k1] += 1
                if case is VigilanceCase.CASE_III:
                    for j in self.edges.neighbors(k1):
                        self.weights[j] += (x - self.weights[j]) / (10 * self.counts[j])
                    self.edges.connect(k1, k2)

        if label is not None:
            if isinstance(label, np.generic):
                label = label.item()
            h = self.histograms[k]
            h[label] = h.get(label, 0) + 1
        self.recent.append(x)
        if self.input_count % p.lam == 0:
            self.delete_isolated()
        return case

    def delete_isolated(self) -> int:
        """Remove every node without edges; returns how many were removed."""
        keep = np.array([self.edges.degree(k) > 0 for k in range(self.n_nodes)], dtype=bool)
        removed = int((~keep).sum())
        if removed:
            self.edges.remap(keep)
            self.weights = self.weights[keep]
            self.sigmas = self.sigmas[keep]
            self.counts = self.counts[keep]
            self.histograms = [h for h, kp in zip(self.histograms, keep) if kp]
        return removed

    def fit(self, X, y=None) -> "CaeaModel":
        """Single pass over ``X`` in the given order."""
        X = np.asarray(X, dtype=np.float64)
        if X.size == 0:
            return self
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        labels = [None] * len(X) if y is None else list(y)
        if len(labels) != len(X):
            raise ValueError("X and y have different lengths")
        for x, lbl in zip(X, labels):
            self.learn_one(x, lbl)
        return self

    # -- prediction ------------------------------------------------------

    def components(self) -> np.ndarray:
        """Connected-component id of every node."""
        k = self.n_nodes
        if k == 0:
            return np.empty(0, dtype=np.int64)
        pairs = self.edges.pairs()
        rows = [i for i, _ in pairs]
        cols = [j for _, j in pairs]
        graph = coo_matrix((np.ones(len(pairs)), (rows, cols)), shape=(k, k))
        _, comp = connected_components(graph, directed=False)
        return comp.astype(np.int64)

    def nearest(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Index of and CIM to the nearest node for each row of ``X``."""
        if self.n_nodes == 0:
            raise StateError("cannot predict with an empty model")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} attributes, got {X.shape[1]}")
        sigma = self.mean_sigma
        idx = np.empty(len(X), dtype=np.int64)
        dist = np.empty(len(X))
        for n, x in enumerate(X):
            c = cim_many(x, self.weights, sigma)
            idx[n] = int(np.argmin(c))
            dist[n] = c[idx[n]]
        return idx, dist

    def node_classes(self) -> list:
        """Majority class of each node (ties go to the smallest class id)."""
        return [_majority(h) for h in self.histograms]

    def predict_one(self, x) -> tuple[int, Hashable | None, int]:
        """(nearest node, its class, its connected component)."""
        idx, _ = self.nearest(x)
        k = int(idx[0])
        return k, _majority(self.histograms[k]), int(self.components()[k])

    def predict(self, X) -> np.ndarray:
        """Class of the nearest node for every row of ``X``."""
        idx, _ = self.nearest(X)
        classes = self.node_classes()
        return np.array([classes[k] for k in idx], dtype=object)

    def predict_cluster(self, X) -> np.ndarray:
        idx, _ = self.nearest(X)
        return self.components()[idx]

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        p = self.params
        return {
            "format": "caea-model",
            "version": 1,
            "params": {
                "lam": p.lam,
                "age_max": p.age_max,
                "aging_policy": p.aging_policy,
                "v_threshold": p.v_threshold,
            },
            "dim": self.dim,
            "input_count": self.input_count,
            "v_threshold": self._v_threshold,
            "nodes": [
                {
                    "weight": self.weights[k].tolist(),
                    "sigma": float(self.sigmas[k]),
                    "win_count": int(self.counts[k]),
                    "label_histogram": [[lbl, n] for lbl, n in self.histograms[k].items()],
                }
                for k in range(self.n_nodes)
            ],
            "edges": [[i, j, a] for (i, j), a in sorted(self.edges.ages.items())],
            "recent": [r.tolist() for r in self.recent],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CaeaModel":
        if d.get("format") != "caea-model":
            raise ValueError("not a serialized CAEA model")
        m = cls(CaeaParams(**d["params"]))
        m.dim = d["dim"]
        m.input_count = d["input_count"]
        m._v_threshold = d["v_threshold"]
        nodes = d["nodes"]
        dim = m.dim or 0
        m.weights = np.array([n["weight"] for n in nodes], dtype=np.float64).reshape(len(nodes), dim)
        m.sigmas = np.array([n["sigma"] for n in nodes], dtype=np.float64)
        m.counts = np.array([n["win_count"] for n in nodes], dtype=np.int64)
        m.histograms = [{_label(lbl): c for lbl, c in n["label_histogram"]} for n in nodes]
        for i, j, a in d["edges"]:
            m.edges.connect(i, j)
            m.edges.ages[(i, j)] = a
        for r in d["recent"]:
            m.recent.append(np.array(r, dtype=np.float64))
        return m

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, s: str) -> "CaeaModel":
        return cls.from_dict(json.loads(s))


def _label(v):
    # JSON turns tuples into lists; labels are scalars in practice
    return tuple(v) if isinstance(v, list) else v


def fit_stream(model: CaeaModel, stream: Iterable) -> CaeaModel:
    """Feed ``(x, label)`` pairs in order."""
    for x, label in stream:
        model.learn_one(x, label)
    return model
