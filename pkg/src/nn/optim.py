"""
Adam optimizer over Network parameters.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..errors import TrainingError, UsageError
from .layers import GradientBundle, Network


@dataclass
class AdamState:
    """Moment buffers and step counter for one network."""

    first_moment: List[np.ndarray] = field(default_factory=list)
    second_moment: List[np.ndarray] = field(default_factory=list)
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_network(cls, net: Network, beta1: float = 0.9, beta2: float = 0.999,
                    epsilon: float = 1e-8) -> 'AdamState':
        return cls(
            first_moment=[np.zeros_like(p) for p in net.parameters()],
            second_moment=[np.zeros_like(p) for p in net.parameters()],
            beta1=beta1, beta2=beta2, epsilon=epsilon,
        )



def adam_step(net: Network, grads: GradientBundle, state: AdamState,
              lr: float) -> Tuple[Network, AdamState]:
    """
    Apply one bias-corrected Adam update.

    Args:
        net: Current parameters
        grads: Gradients congruent with net
        state: Optimizer state congruent with net
        lr: Learning rate

    Returns:
        Tuple of (updated network, updated state); inputs are left untouched
    """
    params = net.parameters()
    grad_arrays = grads.arrays()
    if not grads.matches(net):
        raise UsageError("Gradient shapes do not match the network")
    if [m.shape for m in state.first_moment] != net.shapes():
        raise UsageError("Adam state shapes do not match the network")
    if not grads.is_finite():
        bad = [name for name, g in zip(net.parameter_names(), grad_arrays) if not np.all(np.isfinite(g))]
        raise TrainingError(
            f"Non-finite gradients in {', '.join(bad)}",
            diagnostics={'parameters': bad, 'step_count': state.step_count},
        )

    step = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** step
    correction2 = 1.0 - b2 ** step

    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grad_arrays, state.first_moment, state.second_moment):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_m.append(m)
        new_v.append(v)

    new_state = AdamState(
        first_moment=new_m, second_moment=new_v, step_count=step,
        beta1=b1, beta2=b2, epsilon=state.epsilon,
    )
    return net.with_parameters(new_params), new_state
