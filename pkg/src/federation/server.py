"""
Server-side aggregation: parameter averaging and prototype refresh.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, ProtocolError
from ..hashing.models import Discriminator, HashHead
from ..prototypes import aggregate_prototypes
from .state import RoundState, RoundUpload

logger = logging.getLogger(__name__)


def average_parameters(param_lists: Sequence[List[np.ndarray]],
                       weights: Optional[Sequence[float]] = None) -> List[np.ndarray]:
    """
    Coordinate-wise mean of congruent parameter lists.

    Args:
        param_lists: One [W0, b0, ...] list per client, in client-id order
        weights: Optional per-client weights (e.g. sample counts)

    Returns:
        Averaged parameter list
    """
    if not param_lists:
        raise ProtocolError("Nothing to average")
    shapes = [p.shape for p in param_lists[0]]
    for params in param_lists[1:]:
        if [p.shape for p in params] != shapes:
            raise ProtocolError("Uploaded parameter shapes disagree")
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.sum() <= 0:
            weights = None
    averaged = []
    for i in range(len(shapes)):
        stacked = np.stack([params[i] for params in param_lists])
        averaged.append(np.average(stacked, axis=0, weights=weights))
    return averaged


def server_aggregate(uploads: Sequence[RoundUpload], previous: RoundState,
                     num_clients: Optional[int] = None, weighted_fedavg: bool = False,
                     weighted_prototypes: bool = False) -> RoundState:
    """
    Combine all client uploads into the next global round state.

    Args:
        uploads: One upload per client, any order
        previous: The state that was broadcast this round
        num_clients: Expected number of uploads (defaults to len(uploads))
        weighted_fedavg: Weight parameters by client sample counts
        weighted_prototypes: Weight class means by class counts

    Returns:
        RoundState for round previous.round_index + 1

    Raises:
        ProtocolError: if an upload is missing or duplicated
    """
    expected = len(uploads) if num_clients is None else num_clients
    ordered = sorted(uploads, key=lambda u: u.client_id)
    ids = [u.client_id for u in ordered]
    if ids != list(range(expected)):
        missing = sorted(set(range(expected)) - set(ids))
        raise ProtocolError(f"Round {previous.round_index}: expected uploads from clients "
                            f"0..{expected - 1}, missing {missing}, received {ids}")

    weights = [u.num_samples for u in ordered] if weighted_fedavg else None
    try:
        head = HashHead(previous.head.net.with_parameters(
            average_parameters([u.head_params for u in ordered], weights)))
        disc = Discriminator(previous.disc.net.with_parameters(
            average_parameters([u.disc_params for u in ordered], weights)), previous.disc.code_bits)
    except ConfigurationError as e:
        raise ProtocolError(f"Upload does not match the global architecture: {e}") from e

    round_index = previous.round_index + 1
    prototypes = aggregate_prototypes([u.report for u in ordered], weighted=weighted_prototypes,
                                      round_index=round_index, code_bits=head.code_bits)
    return RoundState(round_index, head, disc, prototypes, list(previous.history))
