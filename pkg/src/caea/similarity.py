"""Gaussian-kernel correntropy and the correntropy-induced metric (CIM).

The kernel carries no 1/(sqrt(2*pi)*sigma) normalization, so correntropy
lies in (0, 1] and the CIM in [0, 1).
"""

from __future__ import annotations

import math

import numpy as np


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"bandwidth must be positive and finite, got {sigma!r}")
    return sigma


def gaussian_kernel(a: float, b: float, sigma: float) -> float:
    """exp(-(a - b)^2 / (2 sigma^2)) for scalars."""
    sigma = _check_sigma(sigma)
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("kernel arguments must be finite")
    return math.exp(-((a - b) ** 2) / (2.0 * sigma * sigma))


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.size == 0:
        raise ValueError("vectors must have at least one coordinate")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("vectors must be finite")
    return x, y


def correntropy(x, y, sigma: float) -> float:
    """Mean of the coordinate-wise Gaussian kernel between ``x`` and ``y``."""
    sigma = _check_sigma(sigma)
    x, y = _pair(x, y)
    return float(np.mean(np.exp(-((x - y) ** 2) / (2.0 * sigma * sigma))))


def cim(x, y, sigma: float) -> float:
    """Correntropy-induced metric, sqrt(1 - correntropy)."""
    # rounding can push 1 - C slightly below zero when x ~= y
    return math.sqrt(max(1.0 - correntropy(x, y, sigma), 0.0))


def cim_many(x: np.ndarray, prototypes: np.ndarray, sigma: float) -> np.ndarray:
    """CIM between one point and each row of ``prototypes``.

    Hot path for winner selection; inputs are assumed validated by the caller.
    """
    diff = prototypes - x
    c = np.mean(np.exp(-(diff * diff) / (2.0 * sigma * sigma)), axis=1)
    return np.sqrt(np.maximum(1.0 - c, 0.0))
