"""Masked sequence-regression losses and their gradients.

Both losses see only positions where the mask is 1; padded steps contribute
exactly zero to values and gradients.
"""

import numpy as np

LOSS_KINDS = ("mse", "euclidean")


def _canon(pred, target, mask):
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim == 1:
        mask = mask[None, :]
    pred = np.asarray(pred, dtype=np.float64).reshape(mask.shape)
    target = np.asarray(target, dtype=np.float64).reshape(mask.shape)
    return pred, target, mask


def masked_mse(pred, target, mask) -> float:
    """Mean squared error over valid positions only."""
    p, t, m = _canon(pred, target, mask)
    count = m.sum()
    if count == 0:
        raise ValueError("mask selects no valid positions")
    r = (p - t) * m
    return float((r * r).sum() / count)


def masked_euclidean(pred, target, mask) -> float:
    """Mean over sequences of the per-sequence Euclidean distance
    sqrt(sum over valid steps of squared residual)."""
    p, t, m = _canon(pred, target, mask)
    counts = m.sum(axis=1)
    if np.any(counts == 0):
        empty = int(np.argmax(counts == 0))
        raise ValueError(f"sequence {empty} has an empty mask")
    r = (p - t) * m
    return float(np.sqrt((r * r).sum(axis=1)).mean())


def per_sequence_metric(kind: str, pred, target, mask) -> np.ndarray:
    """One value per sequence: the Euclidean distance, or the per-sequence MSE."""
    p, t, m = _canon(pred, target, mask)
    counts = m.sum(axis=1)
    if np.any(counts == 0):
        raise ValueError("a sequence has an empty mask")
    r = (p - t) * m
    sums = (r * r).sum(axis=1)
    if kind == "euclidean":
        return np.sqrt(sums)
    if kind == "mse":
        return sums / counts
    raise ValueError(f"unknown loss kind {kind!r}")


def loss_and_grad(kind: str, pred, target, mask):
    """Loss value and its gradient with respect to pred (same shape as pred)."""
    p, t, m = _canon(pred, target, mask)
    r = (p - t) * m
    if kind == "mse":
        count = m.sum()
        if count == 0:
            raise ValueError("mask selects no valid positions")
        value = float((r * r).sum() / count)
        grad = (2.0 / count) * r
    elif kind == "euclidean":
        counts = m.sum(axis=1)
        if np.any(counts == 0):
            empty = int(np.argmax(counts == 0))
            raise ValueError(f"sequence {empty} has an empty mask")
        dist = np.sqrt((r * r).sum(axis=1))
        value = float(dist.mean())
        safe = np.where(dist > 0.0, dist, 1.0)
        grad = r / (safe[:, None] * r.shape[0])
        grad[dist == 0.0] = 0.0
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return value, grad.reshape(np.asarray(pred).shape)
