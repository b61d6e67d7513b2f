"""
Federation settings and the objects exchanged between clients and server.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from ..errors import ConfigurationError
from ..hashing.codes import Distance
from ..hashing.models import Discriminator, GeneratorLoss, HashHead, LossWeights
from ..nn import AdamState
from ..prototypes import ClassMeanReport, PrototypeSet
from .ablation import Ablation
from .partition import PartitionScheme


class Round0Prototypes(Enum):
    RANDOM = 'random'      # uniform random codes, all valid
    DISABLED = 'disabled'  # all invalid; prototype terms wait for round 1


@dataclass
class FederationConfig:
    """Training settings shared by the server and every client."""

    clients: int = 20
    rounds: int = 100
    local_epochs: int = 5
    code_bits: int = 48
    lr: float = 0.005
    mu: float = 0.05
    lam: float = 0.1
    margin_a: Optional[float] = None
    distance: Distance = Distance.COSINE
    batch_size: int = 64
    partition: PartitionScheme = PartitionScheme.IID
    classes_per_client: int = 3
    ablation: Ablation = Ablation.FULL
    seed: int = 0
    hidden_dim: int = 256
    disc_hidden_dim: int = 128
    generator_loss: GeneratorLoss = GeneratorLoss.NONSATURATING
    round0_prototypes: Round0Prototypes = Round0Prototypes.RANDOM
    weighted_prototypes: bool = False
    weighted_fedavg: bool = False
    eval_every: int = 5
    snapshot_every: int = 0

    def __post_init__(self):
        positive = ['clients', 'rounds', 'code_bits', 'batch_size', 'classes_per_client', 'eval_every']
        for name in positive:
            if int(getattr(self, name)) <= 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ['local_epochs', 'snapshot_every', 'hidden_dim']:
            if int(getattr(self, name)) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.disc_hidden_dim <= 0:
            raise ConfigurationError(f"disc_hidden_dim must be positive, got {self.disc_hidden_dim}")
        if not self.lr > 0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")
        self.loss_weights()

    def loss_weights(self) -> LossWeights:
        return LossWeights(mu=self.mu, lam=self.lam, margin_a=self.margin_a, distance=self.distance)


@dataclass
class ClientState:
    """One client's data positions, local models and optimizer states."""

    client_id: int
    indices: np.ndarray
    head: HashHead
    disc: Discriminator
    head_opt: AdamState
    disc_opt: AdamState


@dataclass
class RoundUpload:
    """What a client sends back at the end of a round."""

    client_id: int
    head_params: List[np.ndarray]
    disc_params: List[np.ndarray]
    report: ClassMeanReport
    num_samples: int = 0
    losses: Dict[str, float] = field(default_factory=dict)


@dataclass
class RoundMetrics:
    """One row of the round history; mAP is None when not evaluated."""

    round: int
    map: Optional[float] = None
    tl_local: Optional[float] = None
    tl_global: Optional[float] = None
    quan: Optional[float] = None
    adv_d: Optional[float] = None
    adv_g: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'round': self.round,
            'map': self.map,
            'tl_local': self.tl_local,
            'tl_global': self.tl_global,
            'quan': self.quan,
            'adv_d': self.adv_d,
            'adv_g': self.adv_g,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'RoundMetrics':
        return cls(**{k: data.get(k) for k in cls.__dataclass_fields__})


@dataclass
class RoundState:
    """Global models, prototypes and history after `round_index` rounds."""

    round_index: int
    head: HashHead
    disc: Discriminator
    prototypes: PrototypeSet
    history: List[RoundMetrics] = field(default_factory=list)
