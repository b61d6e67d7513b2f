"""
Gaussian-blob datasets for desk-scale experiments.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..rng import stream_rng
from .dataset import Dataset, Split

logger = logging.getLogger(__name__)


@dataclass
class SyntheticSpec:
    """Parameters of a synthetic multi-label blob dataset."""

    classes: int = 6
    dim: int = 32
    per_class: int = 200
    sigma: float = 1.5
    overlap: float = 0.0
    seed: int = 0
    fractions: Tuple[float, float, float] = (0.6, 0.1, 0.3)  # train, query, db

    def __post_init__(self):
        self.fractions = tuple(float(f) for f in self.fractions)
        if self.classes < 1 or self.dim < 1 or self.per_class < 1:
            raise ConfigurationError("classes, dim and per_class must be positive")
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.overlap <= 1.0:
            raise ConfigurationError(f"overlap must be in [0, 1], got {self.overlap}")
        if self.overlap > 0 and self.classes < 2:
            raise ConfigurationError("overlap needs at least two classes")
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions) \
                or not np.isclose(sum(self.fractions), 1.0):
            raise ConfigurationError(f"fractions must be three non-negative values summing to 1: {self.fractions}")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['fractions'] = list(self.fractions)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'SyntheticSpec':
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown synthetic keys: {sorted(unknown)}")
        return cls(**data)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """
    Draw per_class samples around a seeded center for every class.

    With probability `overlap` a sample also carries one extra random class
    and sits at the mean of both centers. Splits are assigned by shuffling
    all samples and cutting at the configured fractions.

    Args:
        spec: Dataset parameters

    Returns:
        Dataset ordered class by class
    """
    rng = stream_rng(spec.seed, 'synthetic')
    centers = rng.uniform(-1.0, 1.0, size=(spec.classes, spec.dim))
    n = spec.classes * spec.per_class

    features = np.empty((n, spec.dim))
    labels = np.zeros((n, spec.classes), dtype=np.int8)
    row = 0
    for c in range(spec.classes):
        for _ in range(spec.per_class):
            labels[row, c] = 1
            center = centers[c]
            if spec.overlap > 0 and rng.random() < spec.overlap:
                others = [k for k in range(spec.classes) if k != c]
                extra = others[rng.integers(len(others))]
                labels[row, extra] = 1
                center = 0.5 * (centers[c] + centers[extra])
            features[row] = center + spec.sigma * rng.standard_normal(spec.dim)
            row += 1

    order = rng.permutation(n)
    n_train = int(round(spec.fractions[0] * n))
    n_query = int(round(spec.fractions[1] * n))
    splits = [Split.DATABASE] * n
    for i in order[:n_train]:
        splits[i] = Split.TRAIN
    for i in order[n_train:n_train + n_query]:
        splits[i] = Split.QUERY

    logger.debug("Generated %d samples: %d train, %d query, %d db",
                 n, n_train, n_query, n - n_train - n_query)
    return Dataset(features, labels, splits)
