"""
HashHead (the hashing model G), the conditional Discriminator D and the
loss-weight settings shared by both.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..nn import Activation, Network, Tape, forward
from .codes import Distance, HashCode, binarize

DEFAULT_MARGINS = {
    Distance.COSINE: 0.4,
    Distance.EUCLIDEAN: 1.0,
}


class GeneratorLoss(Enum):
    """How the hash head is pushed by the discriminator."""

    NONSATURATING = 'nonsaturating'  # minimize -log D(b|y)
    SHARED = 'shared'                # minimize the local half of the discriminator loss itself


@dataclass
class LossWeights:
    """Penalty weights, triplet margin and distance metric."""

    mu: float = 0.05
    lam: float = 0.1
    margin_a: Optional[float] = None
    distance: Distance = Distance.COSINE

    def __post_init__(self):
        if isinstance(self.distance, str):
            self.distance = Distance(self.distance)
        if self.mu < 0 or self.lam < 0:
            raise ConfigurationError(f"mu and lambda must be >= 0, got {self.mu}, {self.lam}")
        if self.margin_a is not None and self.margin_a <= 0:
            raise ConfigurationError(f"margin_a must be > 0, got {self.margin_a}")

    @property
    def margin(self) -> float:
        if self.margin_a is not None:
            return float(self.margin_a)
        return DEFAULT_MARGINS[self.distance]


class HashHead:
    """Fully connected hashing model: features -> b in (-1, 1)^K."""

    def __init__(self, net: Network):
        if net.layers[-1].activation is not Activation.TANH:
            raise ConfigurationError("Hash head must end in a Tanh layer")
        self.net = net

    @classmethod
    def create(cls, in_dim: int, code_bits: int, hidden_dim: int = 256,
               rng: Optional[np.random.Generator] = None) -> 'HashHead':
        rng = rng if rng is not None else np.random.default_rng(0)
        if hidden_dim > 0:
            net = Network.build([in_dim, hidden_dim, code_bits],
                                [Activation.RELU, Activation.TANH], rng)
        else:
            net = Network.build([in_dim, code_bits], [Activation.TANH], rng)
        return cls(net)

    @property
    def code_bits(self) -> int:
        return self.net.out_dim

    @property
    def in_dim(self) -> int:
        return self.net.in_dim

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
        return forward(self.net, x)

    def encode(self, x: np.ndarray) -> HashCode:
        """Binary codes for a batch of features."""
        b, _ = forward(self.net, x)
        return binarize(b)

    def copy(self) -> 'HashHead':
        return HashHead(self.net.copy())


def hash_forward(head: HashHead, x: np.ndarray) -> np.ndarray:
    """Real-valued head output b for one vector or a batch."""
    b, _ = forward(head.net, x)
    return b


class Discriminator:
    """Scores [code, label vector] as global prototype (1) or local code (0)."""

    def __init__(self, net: Network, code_bits: int):
        if net.out_dim != 1 or net.layers[-1].activation is not Activation.SIGMOID:
            raise ConfigurationError("Discriminator must end in a single Sigmoid unit")
        if net.in_dim <= code_bits:
            raise ConfigurationError(
                f"Discriminator input {net.in_dim} leaves no room for labels after {code_bits} bits")
        self.net = net
        self.code_bits = code_bits

    @classmethod
    def create(cls, code_bits: int, num_classes: int, hidden_dim: int = 128,
               rng: Optional[np.random.Generator] = None) -> 'Discriminator':
        rng = rng if rng is not None else np.random.default_rng(0)
        net = Network.build([code_bits + num_classes, hidden_dim, 1],
                            [Activation.RELU, Activation.SIGMOID], rng)
        return cls(net, code_bits)

    @property
    def num_classes(self) -> int:
        return self.net.in_dim - self.code_bits

    def inputs(self, codes: np.ndarray, labels: np.ndarray) -> np.ndarray:
        codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
        labels = np.atleast_2d(np.asarray(labels, dtype=np.float64))
        if codes.shape[1] != self.code_bits or labels.shape[1] != self.num_classes:
            raise ConfigurationError(
                f"Discriminator expects {self.code_bits} bits + {self.num_classes} labels, "
                f"got {codes.shape[1]} + {labels.shape[1]}")
        return np.hstack([codes, labels])

    def forward(self, codes: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, Tape]:
        """Probabilities (n,) that each conditioned code is a global prototype."""
        out, tape = forward(self.net, self.inputs(codes, labels))
        return out[:, 0], tape

    def copy(self) -> 'Discriminator':
        return Discriminator(self.net.copy(), self.code_bits)
