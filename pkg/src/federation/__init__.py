"""Federated training: partitioning, local rounds, aggregation and the round loop."""

from .ablation import Ablation, ablation_filter
from .partition import (
    IIDPartitioner,
    PartitionScheme,
    ShardPartitioner,
    make_partitioner,
    partition_iid,
    partition_shard_noniid,
)
from .state import (
    ClientState,
    FederationConfig,
    Round0Prototypes,
    RoundMetrics,
    RoundState,
    RoundUpload,
)
from .client import FederatedClient, build_clients
from .server import average_parameters, server_aggregate
from .snapshot import load_snapshot, save_snapshot
from .runner import FederationResult, FederationRunner, initial_state, run_federation

__all__ = [
    'Ablation', 'ablation_filter',
    'IIDPartitioner', 'PartitionScheme', 'ShardPartitioner', 'make_partitioner',
    'partition_iid', 'partition_shard_noniid',
    'ClientState', 'FederationConfig', 'Round0Prototypes', 'RoundMetrics', 'RoundState', 'RoundUpload',
    'FederatedClient', 'build_clients',
    'average_parameters', 'server_aggregate',
    'load_snapshot', 'save_snapshot',
    'FederationResult', 'FederationRunner', 'initial_state', 'run_federation',
]
