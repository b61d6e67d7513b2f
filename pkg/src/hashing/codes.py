"""
Hash codes and the distances used between real-valued code vectors.
"""

from enum import Enum
from typing import Tuple

import numpy as np

from ..errors import ConfigurationError, DomainError

# A HashCode is a float64 vector over {-1, +1}; kept as a plain ndarray so
# it can be fed straight back into the real-valued losses.
HashCode = np.ndarray


class Distance(Enum):
    COSINE = 'cosine'
    EUCLIDEAN = 'euclidean'


def binarize(b: np.ndarray) -> HashCode:
    """Element-wise sign with sign(0) = +1. Works on vectors and batches."""
    b = np.asarray(b, dtype=np.float64)
    return np.where(b >= 0.0, 1.0, -1.0)


def distance(u: np.ndarray, v: np.ndarray, metric: Distance = Distance.COSINE) -> float:
    """
    Distance between two vectors.

    Args:
        u: First vector
        v: Second vector, same length as u
        metric: COSINE gives 1 - cos(u, v) in [0, 2]; EUCLIDEAN gives ||u - v||

    Returns:
        Distance as a float
    """
    d, _, _ = distance_with_grad(np.atleast_2d(u), np.atleast_2d(v), metric)
    return float(d[0])


def distance_with_grad(u: np.ndarray, v: np.ndarray,
                       metric: Distance) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row-wise distances between two (n, K) arrays and their gradients.

    Returns:
        Tuple (d, grad_u, grad_v) with d of shape (n,) and gradients (n, K)
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ConfigurationError(f"Distance operands differ in shape: {u.shape} vs {v.shape}")

    if metric is Distance.COSINE:
        nu = np.linalg.norm(u, axis=1)
        nv = np.linalg.norm(v, axis=1)
        if np.any(nu == 0.0) or np.any(nv == 0.0):
            raise DomainError("Cosine distance is undefined for a zero vector")
        dot = np.einsum('ij,ij->i', u, v)
        cos = dot / (nu * nv)
        d = 1.0 - cos
        # d(cos)/du = v / (|u||v|) - cos * u / |u|^2
        grad_u = -(v / (nu * nv)[:, None] - cos[:, None] * u / (nu ** 2)[:, None])
        grad_v = -(u / (nu * nv)[:, None] - cos[:, None] * v / (nv ** 2)[:, None])
        return d, grad_u, grad_v

    if metric is Distance.EUCLIDEAN:
        diff = u - v
        d = np.linalg.norm(diff, axis=1)
        # subgradient 0 where u == v
        safe = np.where(d > 0.0, d, 1.0)
        grad_u = np.where((d > 0.0)[:, None], diff / safe[:, None], 0.0)
        return d, grad_u, -grad_u

    raise ConfigurationError(f"Unknown distance metric: {metric!r}")
