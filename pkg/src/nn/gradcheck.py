"""
Central finite-difference check for analytic gradients.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .layers import GradientBundle, Network

logger = logging.getLogger(__name__)

LossFn = Callable[[Network], Tuple[float, GradientBundle]]


@dataclass
class GradCheckReport:
    """Outcome of a finite-difference comparison."""

    layer_errors: Dict[str, float] = field(default_factory=dict)
    max_relative_error: float = 0.0
    checked: int = 0
    skipped: int = 0
    tolerance: float = 1e-3

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.max_relative_error <= self.tolerance


def _perturbed(net: Network, array_index: int, entry: Tuple[int, ...], delta: float) -> Network:
    params = [p.copy() for p in net.parameters()]
    params[array_index][entry] += delta
    return net.with_parameters(params)


def finite_diff_check(net: Network, loss_fn: LossFn, tolerance: float = 1e-3,
                      step: float = 1e-4, kink_threshold: float = 1e-2,
                      abs_floor: float = 1e-6, max_entries: Optional[int] = None,
                      rng: Optional[np.random.Generator] = None) -> GradCheckReport:
    """
    Compare backward gradients against central differences.

    An entry whose left and right one-sided slopes disagree by more than
    kink_threshold (relative) sits on a non-differentiable point, e.g. a
    hinge boundary, and is counted as skipped rather than checked.

    Args:
        net: Network at the evaluation point
        loss_fn: Deterministic callable returning (loss, gradients) for a network
        tolerance: Relative error accepted by `passed`
        step: Finite-difference step
        kink_threshold: Relative slope jump that marks a kink
        abs_floor: Denominator floor for relative errors of tiny gradients
        max_entries: Check at most this many entries per parameter array
        rng: Generator used to sample entries when max_entries is set

    Returns:
        GradCheckReport with per-layer maximum relative errors
    """
    base_loss, grads = loss_fn(net)
    analytic = grads.arrays()
    names = net.parameter_names()
    report = GradCheckReport(tolerance=tolerance)

    for a_idx, (param, grad) in enumerate(zip(net.parameters(), analytic)):
        layer_key = names[a_idx].split('.')[0]
        entries = list(np.ndindex(param.shape))
        if max_entries is not None and len(entries) > max_entries:
            rng = rng or np.random.default_rng(0)
            picks = rng.choice(len(entries), size=max_entries, replace=False)
            entries = [entries[i] for i in sorted(picks)]

        for entry in entries:
            f_plus, _ = loss_fn(_perturbed(net, a_idx, entry, step))
            f_minus, _ = loss_fn(_perturbed(net, a_idx, entry, -step))
            slope_right = (f_plus - base_loss) / step
            slope_left = (base_loss - f_minus) / step
            scale = max(1.0, abs(slope_right), abs(slope_left))
            if abs(slope_right - slope_left) > kink_threshold * scale:
                report.skipped += 1
                continue

            numeric = (f_plus - f_minus) / (2.0 * step)
            exact = float(grad[entry])
            denom = max(abs(numeric), abs(exact), abs_floor)
            rel = abs(numeric - exact) / denom
            report.checked += 1
            report.layer_errors[layer_key] = max(report.layer_errors.get(layer_key, 0.0), rel)
            report.max_relative_error = max(report.max_relative_error, rel)

    if report.skipped:
        logger.debug("Gradient check skipped %d entries at non-differentiable points", report.skipped)
    return report
