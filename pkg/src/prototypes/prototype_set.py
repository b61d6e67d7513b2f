"""
Data types exchanged for global prototypes: per-client class means and
the server's sign-aggregated PrototypeSet.
"""

import threading
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import ConfigurationError


@dataclass
class ClassMeanReport:
    """Per-class mean head outputs of one client, with sample counts."""

    counts: np.ndarray                                   # (C,) int
    means: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        for c in list(self.means):
            if self.counts[c] == 0:
                raise ConfigurationError(f"Class {c} has a mean but no samples")
            self.means[c] = np.asarray(self.means[c], dtype=np.float64)

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    def reported_classes(self) -> List[int]:
        return sorted(c for c in self.means if self.counts[c] > 0)


class PrototypeSet:
    """
    One {-1, +1}^K code per class plus validity flags.

    Reads through `codes`, `valid`, `valid_classes()` and `has_valid()` are
    counted in `access_count`, so a run can prove it never consumed the
    prototypes (the no-prototype ablation). Serialization does not count.
    """

    def __init__(self, codes: np.ndarray, valid: np.ndarray, round_index: int = 0):
        codes = np.asarray(codes, dtype=np.float64)
        valid = np.asarray(valid, dtype=bool)
        if codes.ndim != 2 or valid.shape != (codes.shape[0],):
            raise ConfigurationError(
                f"Prototype codes {codes.shape} and flags {valid.shape} disagree")
        if valid.any() and not np.all(np.abs(codes[valid]) == 1.0):
            raise ConfigurationError("Valid prototypes must have entries in {-1, +1}")
        self._codes = codes
        self._valid = valid
        self.round_index = int(round_index)
        self._reads = 0
        # clients of a round read one broadcast set from several threads
        self._reads_lock = threading.Lock()

    @classmethod
    def random(cls, num_classes: int, code_bits: int, rng: np.random.Generator,
               round_index: int = 0) -> 'PrototypeSet':
        """All-valid set of uniform random codes."""
        codes = rng.choice([-1.0, 1.0], size=(num_classes, code_bits))
        return cls(codes, np.ones(num_classes, dtype=bool), round_index)

    @classmethod
    def empty(cls, num_classes: int, code_bits: int, round_index: int = 0) -> 'PrototypeSet':
        """All-invalid set; prototype-dependent losses are skipped against it."""
        return cls(np.zeros((num_classes, code_bits)), np.zeros(num_classes, dtype=bool), round_index)

    @property
    def num_classes(self) -> int:
        return self._codes.shape[0]

    @property
    def code_bits(self) -> int:
        return self._codes.shape[1]

    @property
    def access_count(self) -> int:
        with self._reads_lock:
            return self._reads

    def _count_read(self):
        with self._reads_lock:
            self._reads += 1

    @property
    def codes(self) -> np.ndarray:
        self._count_read()
        return self._codes

    @property
    def valid(self) -> np.ndarray:
        self._count_read()
        return self._valid

    def valid_classes(self) -> np.ndarray:
        self._count_read()
        return np.flatnonzero(self._valid)

    def has_valid(self) -> bool:
        self._count_read()
        return bool(self._valid.any())

    def to_dict(self) -> Dict:
        return {
            'round': self.round_index,
            'codes': self._codes.tolist(),
            'valid': self._valid.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'PrototypeSet':
        return cls(np.array(data['codes'], dtype=np.float64).reshape(len(data['valid']), -1),
                   np.array(data['valid'], dtype=bool), data.get('round', 0))

    def same_as(self, other: 'PrototypeSet') -> bool:
        """Equality without touching the access counters."""
        return (np.array_equal(self._codes, other._codes)
                and np.array_equal(self._valid, other._valid))
