"""Hashing model: hash head, discriminator, codes and loss terms."""

from .codes import Distance, HashCode, binarize, distance, distance_with_grad
from .models import Discriminator, GeneratorLoss, HashHead, LossWeights, hash_forward
from .triplets import PrototypePair, Triplet, mine_triplets, select_prototype_pairs, shares_label
from .losses import (
    DiscriminatorLossResult,
    LossTerm,
    discriminator_loss,
    generator_adversarial_loss,
    quantization_loss,
    total_hash_loss,
    triplet_loss_global,
    triplet_loss_local,
)
from .objective import ALL_TERMS, ADV, QUAN, TL_GLOBAL, TL_LOCAL, HashObjective, LossBreakdown

__all__ = [
    'Distance', 'HashCode', 'binarize', 'distance', 'distance_with_grad',
    'Discriminator', 'GeneratorLoss', 'HashHead', 'LossWeights', 'hash_forward',
    'PrototypePair', 'Triplet', 'mine_triplets', 'select_prototype_pairs', 'shares_label',
    'DiscriminatorLossResult', 'LossTerm', 'discriminator_loss', 'generator_adversarial_loss',
    'quantization_loss', 'total_hash_loss', 'triplet_loss_global', 'triplet_loss_local',
    'ALL_TERMS', 'ADV', 'QUAN', 'TL_GLOBAL', 'TL_LOCAL', 'HashObjective', 'LossBreakdown',
]
