"""Dense-network substrate: layers, Adam and gradient checking."""

from .layers import Activation, DenseLayer, GradientBundle, Network, Tape, backward, forward
from .optim import AdamState, adam_step
from .gradcheck import GradCheckReport, finite_diff_check

__all__ = [
    'Activation',
    'DenseLayer',
    'GradientBundle',
    'Network',
    'Tape',
    'forward',
    'backward',
    'AdamState',
    'adam_step',
    'GradCheckReport',
    'finite_diff_check',
]
