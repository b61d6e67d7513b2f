"""
Loss terms of the local hashing objective.

Every term returns its value together with the gradient with respect to
the batch of head outputs b (n, K), so the caller can chain it into the
hash head with a single backward pass.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, DiscriminatorUnavailable
from ..nn import GradientBundle, backward
from ..prototypes.prototype_set import PrototypeSet
from .codes import Distance, distance_with_grad
from .models import Discriminator, GeneratorLoss, LossWeights
from .triplets import PrototypePair, Triplet, select_prototype_pairs

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-7
PROB_CEIL = 1.0 - 1e-7
MIN_COSINE_NORM = 1e-12


@dataclass
class LossTerm:
    """A loss value, its gradient w.r.t. the batch outputs, and a warning flag."""

    value: float
    grad: np.ndarray
    warning: bool = False
    count: int = 0


@dataclass
class DiscriminatorLossResult:
    value: float
    grads: GradientBundle
    local_probs: np.ndarray
    prototype_probs: np.ndarray


def _zero_term(shape, count: int = 0) -> LossTerm:
    return LossTerm(0.0, np.zeros(shape), warning=True, count=count)


def _hinge(batch_b: np.ndarray, anchors: np.ndarray, positives: np.ndarray,
           negatives: np.ndarray, w: LossWeights):
    """
    Hinge values and gradients for rows (anchor, positive, negative).

    Under the cosine metric a row with a (near) zero-norm operand has no
    defined distance; it contributes 0 and no gradient.
    """
    rows = anchors.shape[0]
    usable = np.ones(rows, dtype=bool)
    if w.distance is Distance.COSINE:
        for part in (anchors, positives, negatives):
            usable &= np.linalg.norm(part, axis=1) > MIN_COSINE_NORM
        if not usable.all():
            logger.debug("Skipping %d of %d triplets with a zero-norm operand",
                         rows - int(usable.sum()), rows)

    margins = np.zeros(rows)
    g_anchor = np.zeros_like(anchors)
    g_pos = np.zeros_like(anchors)
    g_neg = np.zeros_like(anchors)
    if usable.any():
        a, p, q = anchors[usable], positives[usable], negatives[usable]
        d_pos, ga_pos, gp = distance_with_grad(a, p, w.distance)
        d_neg, ga_neg, gn = distance_with_grad(a, q, w.distance)
        margins[usable] = d_pos - d_neg + w.margin
        g_anchor[usable] = ga_pos - ga_neg
        g_pos[usable] = gp
        g_neg[usable] = -gn
    active = ((margins > 0.0) & usable).astype(np.float64)[:, None]
    return margins, active, g_anchor, g_pos, g_neg


def triplet_loss_local(batch_b: np.ndarray, triplets: Sequence[Triplet],
                       w: LossWeights) -> LossTerm:
    """
    Sum over triplets of max(d(b_a, b_p) - d(b_a, b_n) + a, 0).

    Args:
        batch_b: (n, K) head outputs
        triplets: Index triplets into the batch
        w: Loss weights (margin and distance)

    Returns:
        LossTerm; an empty triplet list gives 0 with warning=True
    """
    batch_b = np.atleast_2d(np.asarray(batch_b, dtype=np.float64))
    if not triplets:
        logger.warning("No valid triplets in a batch of %d", batch_b.shape[0])
        return _zero_term(batch_b.shape)
    n = batch_b.shape[0]
    idx = np.array([(t.anchor, t.positive, t.negative) for t in triplets])
    if idx.min() < 0 or idx.max() >= n:
        raise ConfigurationError(f"Triplet index out of range for batch of {n}")

    a, p, q = idx[:, 0], idx[:, 1], idx[:, 2]
    margins, active, g_anchor, g_pos, g_neg = _hinge(batch_b, batch_b[a], batch_b[p], batch_b[q], w)

    grad = np.zeros_like(batch_b)
    np.add.at(grad, a, active * g_anchor)
    np.add.at(grad, p, active * g_pos)
    np.add.at(grad, q, active * g_neg)
    value = float(np.sum(np.maximum(margins, 0.0)))
    return LossTerm(value, grad, count=len(triplets))


def triplet_loss_global(batch_b: np.ndarray, batch_labels: np.ndarray, prototypes: PrototypeSet,
                        w: LossWeights, rng: Optional[np.random.Generator] = None,
                        pairs: Optional[Sequence[PrototypePair]] = None) -> LossTerm:
    """
    Triplet loss between local outputs and global prototype codes.

    Args:
        batch_b: (n, K) head outputs
        batch_labels: (n, C) multi-hot labels
        prototypes: Global prototypes; only valid classes are used
        w: Loss weights
        rng: Generator for prototype selection when pairs is None
        pairs: Precomputed (anchor, positive class, negative class) choices

    Returns:
        LossTerm; no usable prototypes gives 0 with warning=True
    """
    batch_b = np.atleast_2d(np.asarray(batch_b, dtype=np.float64))
    if not prototypes.has_valid():
        logger.debug("Global triplet loss skipped: no valid prototypes")
        return _zero_term(batch_b.shape)
    if pairs is None:
        pairs = select_prototype_pairs(batch_labels, prototypes,
                                       rng if rng is not None else np.random.default_rng(0))
    if not pairs:
        return _zero_term(batch_b.shape)

    codes = prototypes.codes
    anchors = np.array([pr.anchor for pr in pairs])
    pos = codes[[pr.positive_class for pr in pairs]]
    neg = codes[[pr.negative_class for pr in pairs]]
    margins, active, g_anchor, _, _ = _hinge(batch_b, batch_b[anchors], pos, neg, w)

    grad = np.zeros_like(batch_b)
    np.add.at(grad, anchors, active * g_anchor)
    value = float(np.sum(np.maximum(margins, 0.0)))
    return LossTerm(value, grad, count=len(pairs))


def quantization_loss(batch_b: np.ndarray) -> LossTerm:
    """Sum of ||b_j - sign(b_j)||^2 with sign treated as a constant."""
    batch_b = np.atleast_2d(np.asarray(batch_b, dtype=np.float64))
    target = np.where(batch_b >= 0.0, 1.0, -1.0)
    diff = batch_b - target
    return LossTerm(float(np.sum(diff * diff)), 2.0 * diff, count=batch_b.shape[0])


def _prototype_inputs(prototypes: PrototypeSet):
    classes = prototypes.valid_classes()
    if len(classes) == 0:
        raise DiscriminatorUnavailable("No valid prototypes; adversarial training disabled this round")
    one_hot = np.eye(prototypes.num_classes)[classes]
    return prototypes.codes[classes], one_hot


def _clamped(probs: np.ndarray):
    clipped = np.clip(probs, PROB_FLOOR, PROB_CEIL)
    inside = ((probs > PROB_FLOOR) & (probs < PROB_CEIL)).astype(np.float64)
    return clipped, inside


def discriminator_loss(disc: Discriminator, local_codes: np.ndarray, local_labels: np.ndarray,
                       prototypes: PrototypeSet) -> DiscriminatorLossResult:
    """
    Binary cross-entropy of the discriminator.

    Local codes are labelled 0 (generated) and conditioned on their
    multi-hot labels; valid prototypes are labelled 1 (global) and
    conditioned on their one-hot class. The two group means are summed.

    Args:
        disc: Discriminator
        local_codes: (n, K) hard codes of the local batch
        local_labels: (n, C) multi-hot labels
        prototypes: Global prototypes

    Returns:
        DiscriminatorLossResult with the loss and gradients for D's parameters
    """
    local_codes = np.atleast_2d(local_codes)
    if local_codes.shape[0] == 0:
        raise ConfigurationError("Discriminator loss needs at least one local code")
    proto_codes, proto_labels = _prototype_inputs(prototypes)
    n_local, n_proto = local_codes.shape[0], proto_codes.shape[0]

    codes = np.vstack([local_codes, proto_codes])
    labels = np.vstack([np.atleast_2d(local_labels), proto_labels])
    probs, tape = disc.forward(codes, labels)
    clipped, inside = _clamped(probs)
    p_local, p_proto = clipped[:n_local], clipped[n_local:]

    value = float(-np.mean(np.log(1.0 - p_local)) - np.mean(np.log(p_proto)))

    upstream = np.empty_like(probs)
    upstream[:n_local] = inside[:n_local] / (n_local * (1.0 - p_local))
    upstream[n_local:] = -inside[n_local:] / (n_proto * p_proto)
    grads = backward(disc.net, tape, upstream[:, None])
    return DiscriminatorLossResult(value, grads, probs[:n_local], probs[n_local:])


def generator_adversarial_loss(disc: Discriminator, batch_b: np.ndarray, batch_labels: np.ndarray,
                               mode: GeneratorLoss = GeneratorLoss.NONSATURATING) -> LossTerm:
    """
    Adversarial term for the hash head, computed through a frozen discriminator.

    NONSATURATING: -(1/n) sum log D(b_j | y_j)
    SHARED:        -(1/n) sum log(1 - D(b_j | y_j))

    Uses the soft outputs b so the gradient reaches the head. D's parameters
    are not updated here.

    Returns:
        LossTerm with gradient w.r.t. batch_b
    """
    batch_b = np.atleast_2d(np.asarray(batch_b, dtype=np.float64))
    n = batch_b.shape[0]
    probs, tape = disc.forward(batch_b, batch_labels)
    clipped, inside = _clamped(probs)

    if mode is GeneratorLoss.NONSATURATING:
        value = float(-np.mean(np.log(clipped)))
        upstream = -inside / (n * clipped)
    else:
        value = float(-np.mean(np.log(1.0 - clipped)))
        upstream = inside / (n * (1.0 - clipped))

    grads = backward(disc.net, tape, upstream[:, None])
    grad_b = grads.input_grad[:, :disc.code_bits]
    return LossTerm(value, grad_b, count=n)


def total_hash_loss(terms: Dict[str, LossTerm], w: LossWeights,
                    active: Optional[Iterable[str]] = None) -> LossTerm:
    """
    Weighted sum tl_local + tl_global + mu * quan + lambda * adv.

    Args:
        terms: Component terms keyed by 'tl_local', 'tl_global', 'quan', 'adv'
        w: Loss weights
        active: Names to include; defaults to every supplied term

    Returns:
        Combined LossTerm
    """
    coefficients = {'tl_local': 1.0, 'tl_global': 1.0, 'quan': w.mu, 'adv': w.lam}
    unknown = sorted(set(terms) - set(coefficients))
    if unknown:
        raise ConfigurationError(f"Unknown loss terms {unknown}")
    wanted = set(terms) if active is None else set(active)
    # fixed summation order keeps totals bit-identical across processes
    names: List[str] = [n for n in coefficients if n in terms and n in wanted]
    if not names:
        raise ConfigurationError("total_hash_loss needs at least one term")
    shape = terms[names[0]].grad.shape
    value, grad = 0.0, np.zeros(shape)
    for name in names:
        value += coefficients[name] * terms[name].value
        grad = grad + coefficients[name] * terms[name].grad
    return LossTerm(value, grad, warning=any(terms[n].warning for n in names))
