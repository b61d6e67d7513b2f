"""
The full local hashing objective for one mini-batch, with its gradient
chained back into the hash head.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..nn import GradientBundle, backward
from ..prototypes.prototype_set import PrototypeSet
from .losses import (
    LossTerm,
    generator_adversarial_loss,
    quantization_loss,
    total_hash_loss,
    triplet_loss_global,
    triplet_loss_local,
)
from .models import Discriminator, GeneratorLoss, HashHead, LossWeights
from .triplets import PrototypePair, Triplet

TL_LOCAL = 'tl_local'
TL_GLOBAL = 'tl_global'
QUAN = 'quan'
ADV = 'adv'

ALL_TERMS: FrozenSet[str] = frozenset({TL_LOCAL, TL_GLOBAL, QUAN, ADV})
PROTOTYPE_TERMS: FrozenSet[str] = frozenset({TL_GLOBAL, ADV})


@dataclass
class LossBreakdown:
    """Component values of one objective evaluation."""

    tl_local: float = 0.0
    tl_global: float = 0.0
    quan: float = 0.0
    adv_g: float = 0.0
    total: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, float]:
        return {
            'tl_local': self.tl_local,
            'tl_global': self.tl_global,
            'quan': self.quan,
            'adv_g': self.adv_g,
            'total': self.total,
        }


class HashObjective:
    """tl_local + tl_global + mu * quan + lambda * adv, restricted to active terms."""

    def __init__(self, weights: LossWeights, active: Iterable[str] = ALL_TERMS,
                 generator_loss: GeneratorLoss = GeneratorLoss.NONSATURATING):
        self.weights = weights
        self.active = frozenset(active)
        self.generator_loss = generator_loss

    @property
    def uses_prototypes(self) -> bool:
        return bool(self.active & PROTOTYPE_TERMS)

    def evaluate(self, head: HashHead, disc: Optional[Discriminator], x: np.ndarray,
                 labels: np.ndarray, prototypes: Optional[PrototypeSet],
                 triplets: Sequence[Triplet],
                 proto_pairs: Optional[Sequence[PrototypePair]] = None,
                 rng: Optional[np.random.Generator] = None) -> Tuple[LossBreakdown, GradientBundle]:
        """
        Evaluate the objective on a batch and backpropagate into the head.

        Args:
            head: Hash head being trained
            disc: Frozen discriminator; None drops the adversarial term
            x: (n, d) features
            labels: (n, C) multi-hot labels
            prototypes: Global prototypes; None drops the global triplet term
            triplets: Mined local triplets
            proto_pairs: Fixed prototype choices for the global triplet term
            rng: Generator for prototype choices when proto_pairs is None

        Returns:
            Tuple of (LossBreakdown, head gradients)
        """
        b, tape = head.forward(x)
        w = self.weights
        terms: Dict[str, LossTerm] = {}

        if TL_LOCAL in self.active:
            terms[TL_LOCAL] = triplet_loss_local(b, triplets, w)
        if TL_GLOBAL in self.active and prototypes is not None:
            terms[TL_GLOBAL] = triplet_loss_global(b, labels, prototypes, w, rng=rng, pairs=proto_pairs)
        if QUAN in self.active:
            terms[QUAN] = quantization_loss(b)
        if ADV in self.active and disc is not None:
            terms[ADV] = generator_adversarial_loss(disc, b, labels, self.generator_loss)

        breakdown = LossBreakdown(
            tl_local=terms[TL_LOCAL].value if TL_LOCAL in terms else 0.0,
            tl_global=terms[TL_GLOBAL].value if TL_GLOBAL in terms else 0.0,
            quan=terms[QUAN].value if QUAN in terms else 0.0,
            adv_g=terms[ADV].value if ADV in terms else 0.0,
            warnings=sorted(name for name, term in terms.items() if term.warning),
        )
        if not terms:
            return breakdown, GradientBundle.zeros_like(head.net)

        total = total_hash_loss(terms, w)
        breakdown.total = total.value
        return breakdown, backward(head.net, tape, total.grad)
