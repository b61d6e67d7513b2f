"""
FederationRunner - Broadcast, parallel local rounds and aggregation for T rounds.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ..data.dataset import Dataset, split_indices
from ..errors import ConfigurationError, TrainingAborted, TrainingError
from ..hashing.models import Discriminator, HashHead
from ..prototypes import PrototypeSet
from ..rng import stream_rng
from .client import FederatedClient, build_clients
from .partition import make_partitioner
from .server import server_aggregate
from .snapshot import save_snapshot
from .state import FederationConfig, Round0Prototypes, RoundMetrics, RoundState, RoundUpload

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ['tl_local', 'tl_global', 'quan', 'adv_d', 'adv_g']


@dataclass
class FederationResult:
    """Final round state, its metric history and the client partitions."""

    state: RoundState
    partitions: List[np.ndarray] = field(default_factory=list)

    @property
    def history(self) -> List[RoundMetrics]:
        return self.state.history


def initial_state(cfg: FederationConfig, in_dim: int, num_classes: int) -> RoundState:
    """Round-0 global models and prototypes, all drawn from the run seed."""
    rng = stream_rng(cfg.seed, 'init')
    head = HashHead.create(in_dim, cfg.code_bits, cfg.hidden_dim, rng)
    disc = Discriminator.create(cfg.code_bits, num_classes, cfg.disc_hidden_dim, rng)
    if cfg.round0_prototypes is Round0Prototypes.RANDOM:
        prototypes = PrototypeSet.random(num_classes, cfg.code_bits, stream_rng(cfg.seed, 'prototypes'))
    else:
        prototypes = PrototypeSet.empty(num_classes, cfg.code_bits)
    return RoundState(0, head, disc, prototypes)


def _mean_losses(uploads: List[RoundUpload]) -> Dict[str, Optional[float]]:
    """Per-term loss averaged over the clients that recorded it."""
    means: Dict[str, Optional[float]] = {}
    for name in LOSS_COLUMNS:
        values = [u.losses[name] for u in uploads if name in u.losses]
        means[name] = float(np.mean(values)) if values else None
    return means


class FederationRunner:
    """Drives the round loop for one configuration and dataset."""

    def __init__(self, cfg: FederationConfig, dataset: Dataset,
                 evaluate: Optional[Callable[[HashHead], float]] = None,
                 jobs: Optional[int] = None, snapshot_dir=None,
                 config_echo: Optional[Dict] = None):
        """
        Args:
            cfg: Federation settings
            dataset: Dataset with split tags; clients train on the train split
            evaluate: Optional hook returning mAP for a head
            jobs: Worker threads for client training (default: min(clients, CPU count))
            snapshot_dir: Where periodic and diagnostic snapshots go
            config_echo: Configuration dict stored in snapshots
        """
        self.cfg = cfg
        self.dataset = dataset
        self.evaluate = evaluate
        self.jobs = max(1, jobs if jobs else min(cfg.clients, os.cpu_count() or 1))
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir is not None else None
        self.config_echo = config_echo or {}

        train_idx, _, _ = split_indices(dataset)
        partitioner = make_partitioner(cfg.partition, cfg.clients, cfg.classes_per_client, cfg.seed)
        self.partitions = partitioner(dataset.labels[train_idx])
        self.clients: List[FederatedClient] = build_clients(
            self.partitions, dataset.features, dataset.labels, train_idx)
        sizes = [c.num_samples for c in self.clients]
        logger.debug("Partition %s sizes: %s", partitioner, sizes)
        for client in self.clients:
            hist = np.asarray(client.labels, dtype=np.int64).sum(axis=0).tolist()
            logger.debug("Client %d label histogram: %s", client.client_id, hist)

    def _evaluate(self, state: RoundState) -> Optional[float]:
        if self.evaluate is None:
            return None
        return float(self.evaluate(state.head))

    def _due(self, round_index: int) -> bool:
        return round_index % self.cfg.eval_every == 0 or round_index == self.cfg.rounds

    def _snapshot(self, state: RoundState, name: str) -> Optional[Path]:
        if self.snapshot_dir is None:
            return None
        return save_snapshot(state, self.config_echo, self.snapshot_dir / name)

    def _train_round(self, state: RoundState, pool: ThreadPoolExecutor) -> List[RoundUpload]:
        futures = [pool.submit(client.local_round, state, self.cfg) for client in self.clients]
        return [f.result() for f in futures]

    def run(self, start: Optional[RoundState] = None,
            on_round_end: Optional[Callable[[RoundState], None]] = None) -> FederationResult:
        """
        Run rounds until cfg.rounds, optionally resuming from a saved state.

        Args:
            start: State to resume from; None initializes from the seed
            on_round_end: Called with each new global state

        Returns:
            FederationResult

        Raises:
            TrainingAborted: a client hit a non-finite loss or gradient
        """
        cfg = self.cfg
        if start is None:
            state = initial_state(cfg, self.dataset.dim, self.dataset.num_classes)
            state.history.append(RoundMetrics(round=0, map=self._evaluate(state)))
            logger.info("Round 0: mAP=%s", _fmt(state.history[-1].map))
        else:
            state = start
            if state.head.in_dim != self.dataset.dim or state.head.code_bits != cfg.code_bits:
                raise ConfigurationError(
                    f"Snapshot head maps {state.head.in_dim} -> {state.head.code_bits}, run needs "
                    f"{self.dataset.dim} -> {cfg.code_bits}")
            logger.info("Resuming from round %d", state.round_index)

        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            while state.round_index < cfg.rounds:
                t = state.round_index + 1
                logger.info("Round %d/%d: training %d clients", t, cfg.rounds, cfg.clients)
                try:
                    uploads = self._train_round(state, pool)
                except TrainingError as e:
                    path = self._snapshot(state, f'diagnostic_round_{t:04d}.json')
                    logger.error("Training aborted in round %d: %s", t, e)
                    raise TrainingAborted(f"Round {t}: {e}", str(path) if path else None,
                                          e.diagnostics) from e

                state = server_aggregate(uploads, state, cfg.clients, cfg.weighted_fedavg,
                                         cfg.weighted_prototypes)
                metrics = RoundMetrics(round=t, **_mean_losses(uploads))
                if self._due(t):
                    metrics.map = self._evaluate(state)
                    logger.info("Round %d: mAP=%s", t, _fmt(metrics.map))
                state.history.append(metrics)

                if cfg.snapshot_every and t % cfg.snapshot_every == 0:
                    self._snapshot(state, f'round_{t:04d}.json')
                if on_round_end is not None:
                    on_round_end(state)

        return FederationResult(state, self.partitions)


def _fmt(value: Optional[float]) -> str:
    return 'n/a' if value is None else f"{value:.4f}"


def run_federation(cfg: FederationConfig, dataset: Dataset,
                   evaluate: Optional[Callable[[HashHead], float]] = None,
                   jobs: Optional[int] = None, snapshot_dir=None,
                   config_echo: Optional[Dict] = None,
                   start: Optional[RoundState] = None,
                   on_round_end: Optional[Callable[[RoundState], None]] = None) -> FederationResult:
    """Convenience wrapper: build a FederationRunner and run it."""
    runner = FederationRunner(cfg, dataset, evaluate, jobs, snapshot_dir, config_echo)
    return runner.run(start, on_round_end)
