"""
Dense layers with explicit forward and backward passes.

Arrays are float64 throughout. Inputs may be a single vector (d,) or a
batch (n, d); outputs and gradients keep the caller's shape.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, UsageError


class Activation(Enum):
    RELU = 'relu'
    TANH = 'tanh'
    SIGMOID = 'sigmoid'
    IDENTITY = 'identity'


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form avoids overflow in exp for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# activation -> (f(z), f'(z) given z and f(z))
_ACTIVATIONS: Dict[Activation, Tuple[Callable, Callable]] = {
    Activation.RELU: (
        lambda z: np.maximum(z, 0.0),
        lambda z, a: (z > 0.0).astype(np.float64),
    ),
    Activation.TANH: (
        np.tanh,
        lambda z, a: 1.0 - a * a,
    ),
    Activation.SIGMOID: (
        _sigmoid,
        lambda z, a: a * (1.0 - a),
    ),
    Activation.IDENTITY: (
        lambda z: z.copy(),
        lambda z, a: np.ones_like(z),
    ),
}


@dataclass
class DenseLayer:
    """Affine map followed by an element-wise activation."""

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray     # (out_dim,)
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64, ndmin=2)
        self.bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if isinstance(self.activation, str):
            self.activation = Activation(self.activation)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ConfigurationError(
                f"Layer shapes inconsistent: weights {self.weights.shape}, bias {self.bias.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ConfigurationError("Layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> 'DenseLayer':
        return DenseLayer(self.weights.copy(), self.bias.copy(), self.activation)


class Network:
    """Ordered stack of dense layers."""

    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise ConfigurationError("Network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ConfigurationError(
                    f"Layer {i} expects {layers[i].in_dim} inputs but layer {i - 1} "
                    f"produces {layers[i - 1].out_dim}")
        self.layers = list(layers)

    @classmethod
    def build(cls, sizes: Sequence[int], activations: Sequence[Activation],
              rng: np.random.Generator) -> 'Network':
        """
        Create a network with uniform(-s, s) weights, s = sqrt(6 / (in + out)).

        Args:
            sizes: Layer widths including the input, e.g. [d, 256, K]
            activations: One activation per layer (len(sizes) - 1)
            rng: Seeded generator

        Returns:
            Freshly initialized network with zero biases
        """
        if len(activations) != len(sizes) - 1:
            raise ConfigurationError(
                f"{len(sizes) - 1} layers need {len(sizes) - 1} activations, got {len(activations)}")
        if any(s <= 0 for s in sizes):
            raise ConfigurationError(f"Layer sizes must be positive: {list(sizes)}")
        layers = []
        for n_in, n_out, act in zip(sizes[:-1], sizes[1:], activations):
            scale = np.sqrt(6.0 / (n_in + n_out))
            weights = rng.uniform(-scale, scale, size=(n_out, n_in))
            layers.append(DenseLayer(weights, np.zeros(n_out), act))
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in canonical order [W0, b0, W1, b1, ...]."""
        params = []
        for layer in self.layers:
            params.extend([layer.weights, layer.bias])
        return params

    def parameter_names(self) -> List[str]:
        names = []
        for i in range(len(self.layers)):
            names.extend([f"layer{i}.weights", f"layer{i}.bias"])
        return names

    def with_parameters(self, params: Sequence[np.ndarray]) -> 'Network':
        """New network with the same architecture and the given parameters."""
        if len(params) != 2 * len(self.layers):
            raise ConfigurationError(
                f"Expected {2 * len(self.layers)} parameter arrays, got {len(params)}")
        layers = []
        for i, layer in enumerate(self.layers):
            w, b = np.asarray(params[2 * i]), np.asarray(params[2 * i + 1])
            if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
                raise ConfigurationError(
                    f"Parameter shape mismatch in layer {i}: {w.shape}/{b.shape} vs "
                    f"{layer.weights.shape}/{layer.bias.shape}")
            layers.append(DenseLayer(w.copy(), b.copy(), layer.activation))
        return Network(layers)

    def copy(self) -> 'Network':
        return Network([layer.copy() for layer in self.layers])

    def shapes(self) -> List[Tuple[int, ...]]:
        return [p.shape for p in self.parameters()]


@dataclass
class Tape:
    """Activations recorded by forward, consumed by backward."""

    network: Network
    inputs: List[np.ndarray]       # input to each layer, (n, in_dim)
    pre_activations: List[np.ndarray]
    outputs: List[np.ndarray]
    batched: bool


@dataclass
class GradientBundle:
    """Gradients shaped like a network's parameters, plus the input gradient."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    input_grad: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, net: Network) -> 'GradientBundle':
        return cls(
            weights=[np.zeros_like(layer.weights) for layer in net.layers],
            biases=[np.zeros_like(layer.bias) for layer in net.layers],
        )

    def arrays(self) -> List[np.ndarray]:
        """Gradient arrays in the order of Network.parameters()."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def matches(self, net: Network) -> bool:
        return [a.shape for a in self.arrays()] == net.shapes()


def forward(net: Network, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
    """
    Run the network on one vector or a batch of row vectors.

    Args:
        net: Network to evaluate
        x: Input of shape (in_dim,) or (n, in_dim)

    Returns:
        Tuple of (output, tape) where output is (out_dim,) or (n, out_dim)
    """
    x = np.asarray(x, dtype=np.float64)
    batched = x.ndim == 2
    a = x if batched else x.reshape(1, -1)
    if a.ndim != 2 or a.shape[1] != net.in_dim:
        raise ConfigurationError(
            f"Input dimension {x.shape[-1] if x.ndim else 0} does not match network input {net.in_dim}")

    inputs, pre, outs = [], [], []
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weights.T + layer.bias
        a = _ACTIVATIONS[layer.activation][0](z)
        pre.append(z)
        outs.append(a)

    tape = Tape(network=net, inputs=inputs, pre_activations=pre, outputs=outs, batched=batched)
    return (a if batched else a[0]), tape


def backward(net: Network, tape: Tape, upstream_grad: np.ndarray) -> GradientBundle:
    """
    Backpropagate an upstream gradient through a recorded forward pass.

    Parameter gradients are summed over the batch. The input gradient keeps
    the per-sample shape so it can be chained into an upstream network.

    Args:
        net: The network that produced the tape
        tape: Tape from forward(net, ...)
        upstream_grad: dLoss/dOutput, same shape as the forward output

    Returns:
        GradientBundle with parameter and input gradients
    """
    if tape.network is not net or len(tape.inputs) != len(net.layers):
        raise UsageError("Tape was recorded on a different network")

    delta = np.asarray(upstream_grad, dtype=np.float64)
    if not tape.batched:
        delta = delta.reshape(1, -1)
    if delta.shape != tape.outputs[-1].shape:
        raise UsageError(
            f"Upstream gradient shape {np.shape(upstream_grad)} does not match output "
            f"{tape.outputs[-1].shape if tape.batched else tape.outputs[-1].shape[1:]}")

    weight_grads: List[np.ndarray] = [None] * len(net.layers)
    bias_grads: List[np.ndarray] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        derivative = _ACTIVATIONS[layer.activation][1]
        delta = delta * derivative(tape.pre_activations[i], tape.outputs[i])
        weight_grads[i] = delta.T @ tape.inputs[i]
        bias_grads[i] = delta.sum(axis=0)
        delta = delta @ layer.weights

    input_grad = delta if tape.batched else delta[0]
    return GradientBundle(weights=weight_grads, biases=bias_grads, input_grad=input_grad)
