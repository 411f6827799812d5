"""Sequential network with cached forward and exact reverse-mode backward."""

import copy
from typing import List, Optional, Sequence

import numpy as np

from src.errors import GraphError, ShapeError
from src.nn.layers import Layer, Linear, ReLU, Sigmoid
from src.nn.tensor import Tensor


class Network:
    """Ordered stack of layers.

    Inputs may be a single sample of shape ``(D,)`` or a batch ``(B, D)``;
    outputs keep the same rank as the input.
    """

    def __init__(self, layers: Sequence[Layer]):
        self.layers: List[Layer] = list(layers)
        self._check_composition()
        self._live = False
        self._squeeze = False

    def _check_composition(self):
        width = None
        for index, layer in enumerate(self.layers):
            if layer.in_dim is not None:
                if width is not None and layer.in_dim != width:
                    raise ShapeError(index, layer.in_dim, width)
                width = layer.out_dim

    @property
    def input_dim(self) -> Optional[int]:
        for layer in self.layers:
            if layer.in_dim is not None:
                return layer.in_dim
        return None

    @property
    def output_dim(self) -> Optional[int]:
        for layer in reversed(self.layers):
            if layer.out_dim is not None:
                return layer.out_dim
        return None

    @property
    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def parameters(self) -> List[Tensor]:
        params = []
        for layer in self.layers:
            params.extend(layer.params())
        return params

    def _run(self, x, cache: bool) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        for index, layer in enumerate(self.layers):
            if layer.in_dim is not None and x.shape[-1] != layer.in_dim:
                raise ShapeError(index, layer.in_dim, x.shape[-1])
            x = layer.forward(x, cache=cache)
        if cache:
            self._live = True
            self._squeeze = squeeze
        return x[0] if squeeze else x

    def forward(self, x) -> np.ndarray:
        """Run the network and keep per-layer activations for ``backward``."""
        return self._run(x, cache=True)

    def predict(self, x) -> np.ndarray:
        """Inference pass; leaves the backward caches alone."""
        return self._run(x, cache=False)

    def __call__(self, x) -> np.ndarray:
        return self.forward(x)

    def backward(self, upstream_grad) -> np.ndarray:
        """Accumulate d(loss)/d(param) into every parameter's ``grad``.

        Args:
            upstream_grad: d(loss)/d(output), same shape as the last forward output

        Returns:
            d(loss)/d(input)
        """
        if not self._live:
            raise GraphError("backward called before forward")
        grad = np.asarray(upstream_grad, dtype=np.float64)
        if self._squeeze:
            grad = grad[None, :]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad[0] if self._squeeze else grad

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def copy(self) -> "Network":
        """Independent deep copy with caches dropped."""
        clone = copy.deepcopy(self)
        for layer in clone.layers:
            layer._cache = None
        clone._live = False
        for p in clone.parameters():
            p.grad = None
        return clone

    def load_from(self, other: "Network"):
        """Copy parameter values from a network of identical architecture."""
        mine, theirs = self.parameters(), other.parameters()
        if len(mine) != len(theirs):
            raise ValueError("Cannot load parameters from a different architecture")
        for dst, src in zip(mine, theirs):
            if dst.shape != src.shape:
                raise ValueError(f"Parameter shape {src.shape} does not match {dst.shape}")
            dst.data[...] = src.data


def mlp(
    sizes: Sequence[int],
    rng: np.random.Generator,
    output_activation: Optional[str] = None,
    zero_last: bool = False,
) -> Network:
    """Build a ReLU MLP.

    Args:
        sizes: Layer widths, input first (e.g. ``[784, 256, 128, 10]``)
        rng: Initialization generator
        output_activation: ``"sigmoid"`` or None
        zero_last: Zero-initialize the final Linear layer

    Returns:
        Network
    """
    if len(sizes) < 2:
        raise ValueError("An MLP needs at least input and output widths")
    layers: List[Layer] = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        last = i == len(sizes) - 2
        layers.append(Linear(fan_in, fan_out, rng, zero_init=last and zero_last))
        if not last:
            layers.append(ReLU())
    if output_activation == "sigmoid":
        layers.append(Sigmoid())
    elif output_activation is not None:
        raise ValueError(f"Unknown output activation: {output_activation}")
    return Network(layers)
