"""Rule-of-thumb kernel bandwidth for the CIM.

The Gaussian second-order constants are already folded in, giving

    Sigma = (4 / (2 + d)) ** (1 / (4 + d)) * Gamma * N ** (-1 / (4 + d))

with Gamma the per-attribute standard deviation over N points. The median of
Sigma is the single bandwidth used by the CIM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Gamma uses the population standard deviation (divide by N).
STD_DDOF = 0

# Substituted for a zero bandwidth so the CIM stays defined.
SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class BandwidthEstimate:
    per_attribute: np.ndarray
    representative: float


def estimate_sigma(window) -> BandwidthEstimate:
    """Estimate per-attribute bandwidths and their median from ``window``.

    ``window`` is an (N, d) array-like of N >= 1 points. A window without any
    spread yields ``representative == 0``; see :func:`usable_sigma`.
    """
    pts = np.asarray(window, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("window must contain at least one d-dimensional point")
    n, d = pts.shape
    gamma = np.std(pts, axis=0, ddof=STD_DDOF)
    coef = (4.0 / (2.0 + d)) ** (1.0 / (4.0 + d))
    per_attribute = coef * gamma * n ** (-1.0 / (4.0 + d))
    return BandwidthEstimate(per_attribute, float(np.median(per_attribute)))


def usable_sigma(window) -> float:
    """Representative bandwidth with the degenerate-zero fallback applied."""
    sigma = estimate_sigma(window).representative
    return sigma if sigma > 0.0 else SIGMA_FLOOR
