"""
FederatedClient - Local two-phase training on one client's data.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Optional

import numpy as np

from ..errors import DiscriminatorUnavailable, TrainingError
from ..hashing.codes import binarize
from ..hashing.losses import discriminator_loss
from ..hashing.models import Discriminator, HashHead, hash_forward
from ..hashing.objective import ADV, HashObjective
from ..hashing.triplets import mine_triplets
from ..nn import AdamState, adam_step
from ..prototypes import PrototypeSet, local_class_means
from ..rng import client_rng
from .ablation import ablation_filter
from .state import ClientState, FederationConfig, RoundState, RoundUpload

logger = logging.getLogger(__name__)


class FederatedClient:
    """A client holding a private shard of the training set."""

    def __init__(self, client_id: int, indices: np.ndarray, features: np.ndarray,
                 labels: np.ndarray):
        """
        Args:
            client_id: Position of the client in the federation
            indices: Dataset indices of the client's samples
            features: (n_i, d) client features
            labels: (n_i, C) client labels
        """
        self.client_id = client_id
        self.indices = np.asarray(indices, dtype=np.int64)
        self.features = np.asarray(features, dtype=np.float64)
        self.labels = np.asarray(labels)
        self.state: Optional[ClientState] = None

    @property
    def num_samples(self) -> int:
        return len(self.indices)

    def _receive(self, broadcast: RoundState) -> ClientState:
        head, disc = broadcast.head.copy(), broadcast.disc.copy()
        if self.state is None:
            self.state = ClientState(self.client_id, self.indices, head, disc,
                                     AdamState.for_network(head.net), AdamState.for_network(disc.net))
        else:
            self.state.head, self.state.disc = head, disc
        return self.state

    def _discriminator_step(self, state: ClientState, x: np.ndarray, y: np.ndarray,
                            prototypes: PrototypeSet, lr: float) -> float:
        codes = binarize(hash_forward(state.head, x))
        result = discriminator_loss(state.disc, codes, y, prototypes)
        if not np.isfinite(result.value):
            raise TrainingError("Discriminator loss is not finite", {'adv_d': result.value})
        net, state.disc_opt = adam_step(state.disc.net, result.grads, state.disc_opt, lr)
        state.disc = Discriminator(net, state.disc.code_bits)
        return result.value

    def local_round(self, broadcast: RoundState, cfg: FederationConfig) -> RoundUpload:
        """
        Train on the local shard for cfg.local_epochs epochs.

        Each mini-batch first updates the discriminator on the batch's hard
        codes against the broadcast prototypes, then updates the hash head
        on the ablation-filtered objective with the discriminator frozen.

        Args:
            broadcast: Global models and prototypes of this round
            cfg: Federation settings

        Returns:
            RoundUpload with the trained parameters and class means

        Raises:
            TrainingError: on a non-finite loss or gradient
        """
        state = self._receive(broadcast)
        rng = client_rng(cfg.seed, self.client_id, broadcast.round_index)
        active = ablation_filter(cfg.ablation)
        objective = HashObjective(cfg.loss_weights(), active, cfg.generator_loss)
        prototypes = broadcast.prototypes if objective.uses_prototypes else None
        adversarial = ADV in active

        sums: Dict[str, List[float]] = defaultdict(list)
        n = self.num_samples
        for epoch in range(cfg.local_epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                x, y = self.features[batch], self.labels[batch]
                context = {'client': self.client_id, 'round': broadcast.round_index,
                           'epoch': epoch, 'batch_start': int(start)}

                disc = None
                if adversarial:
                    try:
                        sums['adv_d'].append(self._discriminator_step(state, x, y, prototypes, cfg.lr))
                        disc = state.disc
                    except DiscriminatorUnavailable:
                        adversarial = False
                        logger.debug("Client %d: no valid prototypes, adversarial phase off this round",
                                     self.client_id)
                    except TrainingError as e:
                        raise TrainingError(str(e), {**e.diagnostics, **context}) from e

                breakdown, grads = objective.evaluate(
                    state.head, disc, x, y, prototypes, mine_triplets(y, rng), rng=rng)
                if not np.isfinite(breakdown.total):
                    raise TrainingError(f"Client {self.client_id}: hash loss is not finite",
                                        {**breakdown.as_dict(), **context})
                try:
                    net, state.head_opt = adam_step(state.head.net, grads, state.head_opt, cfg.lr)
                except TrainingError as e:
                    raise TrainingError(str(e), {**e.diagnostics, **breakdown.as_dict(), **context}) from e
                state.head = HashHead(net)

                for name, value in breakdown.as_dict().items():
                    sums[name].append(value)

        losses = {name: float(np.mean(values)) for name, values in sums.items()}
        if losses:
            logger.debug("Client %d round %d: %s", self.client_id, broadcast.round_index,
                         ", ".join(f"{k}={v:.4f}" for k, v in sorted(losses.items())))
        return RoundUpload(
            client_id=self.client_id,
            head_params=state.head.net.parameters(),
            disc_params=state.disc.net.parameters(),
            report=local_class_means(state.head, self.features, self.labels),
            num_samples=n,
            losses=losses,
        )


def build_clients(partitions, features: np.ndarray, labels: np.ndarray,
                  train_idx: np.ndarray) -> List[FederatedClient]:
    """One client per partition; partitions index the training split."""
    clients = []
    for client_id, part in enumerate(partitions):
        idx = np.asarray(train_idx)[np.asarray(part, dtype=np.int64)]
        clients.append(FederatedClient(client_id, idx, features[idx], labels[idx]))
    return clients
