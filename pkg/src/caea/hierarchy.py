"""Divisive hierarchy of CAEA models (HCAEA).

A CAEA model is trained on the data; every point is then assigned to its
nearest final prototype, and each prototype's share of the data trains an
independent child model. Prediction descends to the nearest prototype that
has no child.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from caea.model import CaeaModel, CaeaParams, StateError, _label, _majority

# K at or above which a layer is split further.
RECURSE_MIN_K = 3


def partition_training_data(model: CaeaModel, data) -> list[np.ndarray]:
    """Split row indices of ``data`` by nearest prototype of ``model``.

    Cell ``k`` holds, in ascending order, the rows whose nearest node under
    the mean-bandwidth CIM is ``k``. Cells may be empty.
    """
    if model.n_nodes == 0:
        raise StateError("cannot partition with a model that has no nodes")
    X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    nearest, _ = model.nearest(X)
    return [np.flatnonzero(nearest == k) for k in range(model.n_nodes)]


@dataclass
class HcaeaNode:
    model: CaeaModel
    indices: np.ndarray
    subsets: list[np.ndarray] = field(default_factory=list)
    children: dict[int, "HcaeaNode"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children.values()), default=0)

    def walk(self):
        yield self
        for k in sorted(self.children):
            yield from self.children[k].walk()

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "indices": self.indices.tolist(),
            "subsets": [s.tolist() for s in self.subsets],
            "children": {str(k): c.to_dict() for k, c in sorted(self.children.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HcaeaNode":
        return cls(
            model=CaeaModel.from_dict(d["model"]),
            indices=np.array(d["indices"], dtype=np.int64),
            subsets=[np.array(s, dtype=np.int64) for s in d["subsets"]],
            children={int(k): cls.from_dict(c) for k, c in d["children"].items()},
        )


def _build(X, y, indices, params, recurse_min_k, min_cell) -> HcaeaNode:
    labels = None if y is None else [y[i] for i in indices]
    model = CaeaModel(params).fit(X[indices], labels)
    node = HcaeaNode(model, indices)
    if model.n_nodes == 0 or model.v_threshold is None:
        return node
    node.subsets = [indices[cell] for cell in partition_training_data(model, X[indices])]
    if model.n_nodes < recurse_min_k:
        return node
    for k, cell in enumerate(node.subsets):
        # a cell equal to the whole input would recurse forever
        if len(cell) < min_cell or len(cell) == len(indices):
            continue
        node.children[k] = _build(X, y, cell, params, recurse_min_k, min_cell)
    return node


class HcaeaTree:
    """A trained hierarchy plus the data it was trained on.

    ``X`` and ``y`` are kept so :meth:`fit_more` can rebuild subtrees.
    """

    def __init__(self, root: HcaeaNode, X: np.ndarray, y, params: CaeaParams,
                 recurse_min_k: int = RECURSE_MIN_K, min_cell: int | None = None):
        self.root = root
        self.X = X
        self.y = y
        self.params = params
        self.recurse_min_k = recurse_min_k
        self.min_cell = params.lam if min_cell is None else min_cell

    @property
    def depth(self) -> int:
        return self.root.depth()

    def nodes(self):
        return list(self.root.walk())

    def leaf_count(self) -> int:
        """Number of prototypes without a child, summed over the tree."""
        return sum(n.model.n_nodes - len(n.children) for n in self.root.walk())

    def node_count(self) -> int:
        return sum(n.model.n_nodes for n in self.root.walk())

    def predict_path(self, x) -> tuple[object, list[int]]:
        """Class of the leaf prototype reached by ``x`` and the prototype path."""
        node = self.root
        if node.model.n_nodes == 0:
            raise StateError("tree has no prototypes")
        path = []
        while True:
            idx, _ = node.model.nearest(x)
            k = int(idx[0])
            path.append(k)
            child = node.children.get(k)
            if child is None or child.model.n_nodes == 0:
                return _majority(node.model.histograms[k]), path
            node = child

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.predict_path(x)[0] for x in X], dtype=object)

    def fit_more(self, X_new, y_new=None) -> "HcaeaTree":
        """Continue training on a further batch.

        New points are streamed through the root model. The root is then
        re-partitioned over all data seen so far; subtrees whose cell is
        unchanged are kept and the rest are retrained from their cells.
        """
        X_new = np.atleast_2d(np.asarray(X_new, dtype=np.float64))
        if (self.y is None) != (y_new is None):
            raise ValueError("labels must be given for every batch or for none")
        root = self.root
        old_children = {
            tuple(root.subsets[k].tolist()): c for k, c in root.children.items()
        }
        root.model.fit(X_new, None if y_new is None else list(y_new))
        self.X = np.vstack([self.X, X_new])
        if self.y is not None:
            self.y = list(self.y) + list(y_new)
        root.indices = np.arange(len(self.X))
        root.subsets = []
        root.children = {}
        model = root.model
        if model.n_nodes == 0 or model.v_threshold is None:
            return self
        root.subsets = partition_training_data(model, self.X)
        if model.n_nodes < self.recurse_min_k:
            return self
        for k, cell in enumerate(root.subsets):
            if len(cell) < self.min_cell or len(cell) == len(self.X):
                continue
            kept = old_children.get(tuple(cell.tolist()))
            if kept is not None:
                root.children[k] = kept
            else:
                root.children[k] = _build(self.X, self.y, cell, self.params,
                                          self.recurse_min_k, self.min_cell)
        return self

    def to_dict(self) -> dict:
        return {
            "format": "hcaea-tree",
            "version": 1,
            "recurse_min_k": self.recurse_min_k,
            "min_cell": self.min_cell,
            "X": self.X.tolist(),
            "y": None if self.y is None else list(self.y),
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HcaeaTree":
        if d.get("format") != "hcaea-tree":
            raise ValueError("not a serialized HCAEA tree")
        root = HcaeaNode.from_dict(d["root"])
        y = None if d["y"] is None else [_label(v) for v in d["y"]]
        X = np.array(d["X"], dtype=np.float64)
        return cls(root, X, y, root.model.params, d["recurse_min_k"], d["min_cell"])

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, s: str) -> "HcaeaTree":
        return cls.from_dict(json.loads(s))


def fit_hierarchy(X, y=None, params: CaeaParams | None = None, *,
                  recurse_min_k: int = RECURSE_MIN_K, min_cell: int | None = None) -> HcaeaTree:
    """Train a HCAEA tree on ``X`` presented in row order.

    A layer is split when its model finished initialization and has at least
    ``recurse_min_k`` nodes; only cells with at least ``min_cell`` points
    (default ``lam``) that are strictly smaller than their parent's input get
    a child.
    """
    params = params or CaeaParams()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if len(X) == 0:
        raise ValueError("cannot fit a hierarchy on no data")
    if y is not None:
        y = [v.item() if isinstance(v, np.generic) else v for v in y]
        if len(y) != len(X):
            raise ValueError("X and y have different lengths")
    min_cell = params.lam if min_cell is None else min_cell
    if recurse_min_k < 2:
        raise ValueError("recurse_min_k must be at least 2")
    root = _build(X, y, np.arange(len(X)), params, recurse_min_k, min_cell)
    return HcaeaTree(root, X, y, params, recurse_min_k, min_cell)
