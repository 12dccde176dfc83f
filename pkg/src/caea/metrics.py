"""External evaluation scores: accuracy, NMI, ARI and macro-F1.

Predicted labels are class ids (nodes vote with their label histograms), so
no cluster-to-class matching is done for accuracy and macro-F1.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def _pair(pred, truth) -> tuple[list, list]:
    pred = list(pred)
    truth = list(truth)
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} predictions for {len(truth)} labels")
    if not pred:
        raise ValueError("need at least one instance")
    return pred, truth


def _codes(values: list) -> np.ndarray:
    index: dict = {}
    return np.array([index.setdefault(v, len(index)) for v in values], dtype=np.int64)


def contingency(pred, truth) -> np.ndarray:
    """Counts matrix with predicted clusters on rows and true classes on columns."""
    pred, truth = _pair(pred, truth)
    p, t = _codes(pred), _codes(truth)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return sum(a == b for a, b in zip(pred, truth)) / len(truth)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the entropies."""
    table = contingency(pred, truth)
    n = int(table.sum())
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    h_pred, h_true = _entropy(rows, n), _entropy(cols, n)
    if h_pred == 0.0 or h_true == 0.0:
        return 1.0 if len(rows) == 1 and len(cols) == 1 else 0.0
    nz = table > 0
    outer = np.outer(rows, cols)
    mi = float(np.sum(table[nz] / n * np.log(table[nz] * n / outer[nz])))
    return min(max(mi / math.sqrt(h_pred * h_true), 0.0), 1.0)


def _comb2(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    return a * (a - 1) // 2


def ari(pred, truth) -> float:
    """Hubert-Arabie adjusted Rand index, evaluated in exact rational arithmetic."""
    table = contingency(pred, truth)
    n = int(table.sum())
    index = int(_comb2(table).sum())
    a = int(_comb2(table.sum(axis=1)).sum())
    b = int(_comb2(table.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = Fraction(a * b, total)
    max_index = Fraction(a + b, 2)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def macro_f1(pred, truth) -> float:
    """Unweighted mean of per-class F1 over the classes present in ``truth``."""
    pred, truth = _pair(pred, truth)
    scores = []
    for c in dict.fromkeys(truth):
        tp = sum(p == c and t == c for p, t in zip(pred, truth))
        n_pred = sum(p == c for p in pred)
        n_true = sum(t == c for t in truth)
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_true
        scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return float(np.mean(scores))


def score_all(pred, truth) -> dict[str, float]:
    return {
        "accuracy": accuracy(pred, truth),
        "nmi": nmi(pred, truth),
        "ari": ari(pred, truth),
        "macro_f1": macro_f1(pred, truth),
    }
