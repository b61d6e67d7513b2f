"""
Code databases and ranked retrieval results.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..hashing.models import HashHead


def _as_matrix(values) -> np.ndarray:
    array = np.asarray(values, dtype=np.int8)
    if array.ndim == 2:
        return array
    if array.size == 0:
        return np.zeros((0, 0), dtype=np.int8)
    return array.reshape(1, -1) if array.ndim == 1 else array.reshape(array.shape[0], -1)


@dataclass
class CodeDatabase:
    """Aligned hash codes (n, K) and multi-hot labels (n, C)."""

    codes: np.ndarray
    labels: np.ndarray
    owner: Optional[int] = None

    def __post_init__(self):
        self.codes = _as_matrix(self.codes)
        self.labels = _as_matrix(self.labels)
        if self.codes.shape[0] != self.labels.shape[0]:
            raise ConfigurationError(
                f"{self.codes.shape[0]} codes but {self.labels.shape[0]} label rows")
        if self.codes.size and not np.all(np.abs(self.codes) == 1):
            raise ConfigurationError("Database codes must be in {-1, +1}")

    @classmethod
    def from_head(cls, head: HashHead, features: np.ndarray, labels: np.ndarray,
                  owner: Optional[int] = None) -> 'CodeDatabase':
        """Encode features with a hash head."""
        if len(features) == 0:
            return cls(np.zeros((0, head.code_bits)), np.zeros((0, np.shape(labels)[-1])), owner)
        return cls(head.encode(features), labels, owner)

    @property
    def size(self) -> int:
        return self.codes.shape[0]

    @property
    def code_bits(self) -> int:
        return self.codes.shape[1]

    def __len__(self) -> int:
        return self.size


@dataclass
class RetrievalResult:
    """Database positions ranked by ascending Hamming distance."""

    indices: np.ndarray
    distances: np.ndarray
    relevant: Optional[np.ndarray] = None
    silos: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.indices)

    def ids(self) -> List[Tuple[int, int]]:
        """(silo, index) pairs; silo is 0 for single-database results."""
        silos = self.silos if self.silos is not None else np.zeros(len(self.indices), dtype=np.int64)
        return [(int(s), int(i)) for s, i in zip(silos, self.indices)]

    @classmethod
    def empty(cls) -> 'RetrievalResult':
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                   np.zeros(0, dtype=bool), np.zeros(0, dtype=np.int64))

