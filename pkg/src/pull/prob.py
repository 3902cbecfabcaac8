"""Sigmoid and clamped binary cross-entropy."""

import warnings

import numpy as np
from scipy.special import expit

from .errors import ClampWarning

EPS = 1e-12


def sigmoid(x):
    return expit(x)


def clamp(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    out = np.clip(p, EPS, 1.0 - EPS)
    if np.any(out != p):
        warnings.warn("probability clamped to [1e-12, 1 - 1e-12]", ClampWarning, stacklevel=3)
    return out


def bce_sum(p, labels, weights=None) -> float:
    """Sum of ``-w [y log p + (1 - y) log(1 - p)]`` with clamped ``p``."""
    p = clamp(p)
    y = np.asarray(labels, dtype=np.float64)
    terms = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    if weights is not None:
        terms = terms * np.asarray(weights, dtype=np.float64)
    return float(np.sum(terms))
