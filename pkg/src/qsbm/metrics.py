"""Loss and divergence metrics shared by the model, the trainer, and the
baselines. All values are in nats.

The probability floor protects ln(q) against exact zeros that occur early in
training; 1e-12 is far below any reachable probability at <= 1024 bins, so
the floor is inert once a model has any support on a bin.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Q_FLOOR", "nll", "shannon_entropy", "kld", "empirical_distribution"]

Q_FLOOR = 1e-12


def _probs(p) -> np.ndarray:
    return np.asarray(getattr(p, "probs", p), dtype=float)


def nll(p, q) -> float:
    """Cross entropy -sum p ln q with the shared q-floor."""
    p = _probs(p)
    q = _probs(q)
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} vs {len(q)}")
    return float(-np.sum(p * np.log(np.maximum(q, Q_FLOOR))))


def shannon_entropy(p) -> float:
    p = _probs(p)
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def kld(p, q) -> float:
    """D(p || q), with the q-floor applied to q only (0 ln 0 := 0 on p)."""
    p = _probs(p)
    q = _probs(q)
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} vs {len(q)}")
    mask = p > 0.0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(np.maximum(q[mask], Q_FLOOR)))))


def empirical_distribution(counts: np.ndarray, smoothing_alpha: float = 0.5) -> np.ndarray:
    """Additively smoothed frequencies (count + alpha) / (shots + alpha * bins).

    alpha defaults to the Jeffreys value 0.5; alpha = 0 reproduces raw
    frequencies and is only safe when every bin with target mass was hit.
    """
    counts = np.asarray(counts)
    if np.any(counts < 0):
        raise ValueError("negative counts")
    total = counts.sum()
    if total == 0:
        raise ValueError("all-zero counts")
    return (counts + smoothing_alpha) / (total + smoothing_alpha * len(counts))
