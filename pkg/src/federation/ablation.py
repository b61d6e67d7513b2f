"""
Ablation modes and the loss terms each one keeps.
"""

from enum import Enum
from typing import FrozenSet

from ..hashing.objective import ADV, QUAN, TL_GLOBAL, TL_LOCAL


class Ablation(Enum):
    FULL = 'full'
    NO_PROTOTYPES = 'no_prototypes'        # no discriminator, no global triplets
    ADVERSARIAL_ONLY = 'adversarial_only'  # prototypes feed only the discriminator
    TRIPLET_ONLY = 'triplet_only'          # prototypes feed only the global triplets


_ACTIVE_TERMS = {
    Ablation.FULL: frozenset({TL_LOCAL, TL_GLOBAL, QUAN, ADV}),
    Ablation.NO_PROTOTYPES: frozenset({TL_LOCAL, QUAN}),
    Ablation.ADVERSARIAL_ONLY: frozenset({TL_LOCAL, QUAN, ADV}),
    Ablation.TRIPLET_ONLY: frozenset({TL_LOCAL, TL_GLOBAL, QUAN}),
}


def ablation_filter(mode: Ablation) -> FrozenSet[str]:
    """Names of the loss terms active under an ablation mode."""
    return _ACTIVE_TERMS[Ablation(mode)]
