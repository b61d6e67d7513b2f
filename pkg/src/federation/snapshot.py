"""
Round-state snapshots as JSON.

Layout (see docs/snapshot_format.md):
    format, version, round, head, disc, prototypes, history, config
"""

import json
import logging
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..hashing.models import Discriminator, HashHead
from ..nn import Activation, DenseLayer, Network
from ..prototypes import PrototypeSet
from .state import RoundMetrics, RoundState

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = 'fedhap-snapshot'
SNAPSHOT_VERSION = 1


def _network_to_dict(net: Network) -> Dict:
    return {
        'activations': [layer.activation.value for layer in net.layers],
        'parameters': [
            {'name': name, 'shape': list(p.shape), 'data': p.reshape(-1).tolist()}
            for name, p in zip(net.parameter_names(), net.parameters())
        ],
    }


def _network_from_dict(data: Dict) -> Network:
    params = data['parameters']
    activations = data['activations']
    if len(params) != 2 * len(activations):
        raise ConfigurationError(
            f"Snapshot network has {len(activations)} layers but {len(params)} parameter arrays")
    layers = []
    for i, act in enumerate(activations):
        w, b = params[2 * i], params[2 * i + 1]
        layers.append(DenseLayer(
            np.array(w['data'], dtype=np.float64).reshape(w['shape']),
            np.array(b['data'], dtype=np.float64).reshape(b['shape']),
            Activation(act),
        ))
    return Network(layers)


def save_snapshot(state: RoundState, config: Dict, path) -> Path:
    """
    Write a round state and the run configuration to a JSON file.

    Args:
        state: Round state to save
        config: Serialized run configuration (echoed verbatim)
        path: Output file

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = {
        'format': SNAPSHOT_FORMAT,
        'version': SNAPSHOT_VERSION,
        'round': state.round_index,
        'head': _network_to_dict(state.head.net),
        'disc': {'code_bits': state.disc.code_bits, **_network_to_dict(state.disc.net)},
        'prototypes': state.prototypes.to_dict(),
        'history': [m.to_dict() for m in state.history],
        'config': config,
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(blob, f)
    logger.debug("Snapshot for round %d written to %s", state.round_index, path)
    return path


def load_snapshot(path) -> Tuple[RoundState, Dict]:
    """
    Read a snapshot written by save_snapshot.

    Returns:
        Tuple of (RoundState, config dict)

    Raises:
        ConfigurationError: unreadable file, wrong format tag or version
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            blob = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read snapshot {path}: {e}") from e

    if blob.get('format') != SNAPSHOT_FORMAT:
        raise ConfigurationError(f"{path} is not a snapshot (format={blob.get('format')!r})")
    if blob.get('version') != SNAPSHOT_VERSION:
        raise ConfigurationError(
            f"Unsupported snapshot version {blob.get('version')}; expected {SNAPSHOT_VERSION}")

    try:
        state = RoundState(
            round_index=int(blob['round']),
            head=HashHead(_network_from_dict(blob['head'])),
            disc=Discriminator(_network_from_dict(blob['disc']), int(blob['disc']['code_bits'])),
            prototypes=PrototypeSet.from_dict(blob['prototypes']),
            history=[RoundMetrics.from_dict(m) for m in blob.get('history', [])],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"Malformed snapshot {path}: {e}") from e
    return state, blob.get('config', {})
