"""Function-preserving growth: neuron splitting and layer insertion.

Widening replaces a neuron by several half-scale copies using the
activation's two-scale weights; the network output is unchanged for every
input.  Insertion builds a new layer from shifted copies of an activation
that sums to the identity; the output is unchanged on the region where the
scaled values stay inside the summing interval.  All transforms return new
networks and never mutate their input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .activations import Activation, IdentitySumData
from .errors import (
    DimensionMismatch,
    NoFollowingLayer,
    NotFactorable,
    NotRefinable,
    PositionOutOfRange,
)
from .network import Dataset, LayerOp, Network, forward_batch


class InsertVariant(Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class GrowthReport:
    """What a growth step did: scaling used, where it is exact, how exact."""

    beta: float
    omega_desc: str
    max_abs_deviation: float


def max_deviation(old: Network, new: Network, X) -> float:
    """Largest absolute output difference between two networks over rows of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    return float(np.max(np.abs(forward_batch(old, X) - forward_batch(new, X))))


def _refinability(act: Activation):
    try:
        query = act.refinability
    except AttributeError:
        raise NotRefinable(
            f"{type(act).__name__} provides no two-scale data"
        ) from None
    try:
        return query()
    except NotFactorable as e:
        raise NotRefinable(str(e)) from None


def _check_layer_index(net: Network, layer_idx: int):
    count = len(net.layers)
    if not 0 <= layer_idx < count:
        raise PositionOutOfRange(
            f"layer {layer_idx} out of range for {count} layers"
        )
    if layer_idx == count - 1:
        raise NoFollowingLayer("no following layer")


def widen_layer(net: Network, layer_idx: int, subset) -> Network:
    """Split every neuron in subset into its half-scale copies.

    Each chosen neuron of layer layer_idx becomes a consecutive block of
    copies at its original position; the following layer's columns absorb
    the two-scale weights, so the composite map is untouched.
    """
    _check_layer_index(net, layer_idx)
    layer = net.layers[layer_idx]
    following = net.layers[layer_idx + 1]
    chosen = set(int(i) for i in subset)
    if not chosen:
        raise ValueError("subset must name at least one neuron")
    for i in chosen:
        if not 0 <= i < layer.n_out:
            raise PositionOutOfRange(
                f"neuron {i} out of range for width {layer.n_out}"
            )
    data = _refinability(layer.act)
    copies, shift, weights = data.copies, data.shift, data.weights

    rows, biases, columns = [], [], []
    for i in range(layer.n_out):
        if i in chosen:
            for l in range(copies):
                rows.append(2.0 * layer.W[i])
                biases.append(2.0 * layer.b[i] + shift - l)
                columns.append(weights[l] * following.W[:, i])
        else:
            rows.append(layer.W[i])
            biases.append(layer.b[i])
            columns.append(following.W[:, i])
    widened = LayerOp(np.array(rows), np.array(biases), layer.act)
    absorbed = LayerOp(np.column_stack(columns), following.b, following.act)
    return Network(
        net.layers[:layer_idx] + (widened, absorbed) + net.layers[layer_idx + 2 :]
    )


def split_neuron(net: Network, layer_idx: int, neuron_idx: int) -> Network:
    return widen_layer(net, layer_idx, {neuron_idx})


def _check_position(net: Network, position: int):
    count = len(net.layers)
    if not 1 <= position <= count:
        raise PositionOutOfRange(f"position {position} out of range 1..{count}")


def _propagated(net: Network, position: int, X):
    """Sample values arriving at the insertion point (layers before it applied)."""
    return forward_batch(Network(net.layers[: position - 1]), X)


def compute_beta_pre(net: Network, position: int, data: Dataset, delta: float) -> float:
    """Scaling that parks all propagated data well inside (-delta, delta)."""
    _check_position(net, position)
    if math.isinf(delta):
        return 1.0
    if delta <= 0:
        raise ValueError("delta must be positive")
    sup = float(np.max(np.abs(_propagated(net, position, data.inputs))))
    return 1.0 if sup == 0.0 else delta / (2.0 * sup)


def compute_beta_post(net: Network, position: int, data: Dataset, delta: float) -> float:
    """As compute_beta_pre, but bounding the affine outputs of the layer itself."""
    _check_position(net, position)
    if math.isinf(delta):
        return 1.0
    if delta <= 0:
        raise ValueError("delta must be positive")
    layer = net.layers[position - 1]
    values = _propagated(net, position, data.inputs) @ layer.W.T + layer.b
    sup = float(np.max(np.abs(values)))
    return 1.0 if sup == 0.0 else delta / (2.0 * sup)


def _omega_description(variant, position, beta, delta) -> str:
    if math.isinf(delta):
        return (
            f"{variant.value} insert at position {position}: exact for every "
            f"input (the summing interval is unbounded), beta={beta!r}"
        )
    bound = float(delta / beta)
    quantity = "y[i]" if variant is InsertVariant.PRE else "(W y + b)[i]"
    return (
        f"{variant.value} insert at position {position}: exact for vectors y "
        f"reaching that layer with |{quantity}| < {bound!r} in every "
        f"coordinate, beta={beta!r}"
    )


def insert_layer(
    net: Network,
    position: int,
    sigma0: Activation,
    copies: int,
    variant: InsertVariant,
    data: Dataset,
):
    """Insert a new layer at position (1-based), preserving outputs on data.

    The pre variant rebuilds the inputs of the target layer from copies
    shifted copies of sigma0 per coordinate; the post variant rebuilds its
    affine outputs instead.  Returns the grown network and a report with
    the scaling, a description of the exact region, and the measured
    deviation on data.
    """
    _check_position(net, position)
    sum_data: IdentitySumData = sigma0.identity_sum(copies)
    terms, offset = sum_data.terms, sum_data.offset
    layer = net.layers[position - 1]

    if variant is InsertVariant.PRE:
        beta = compute_beta_pre(net, position, data, sum_data.margin)
        n_in = layer.n_in
        W0 = np.zeros((terms * n_in, n_in))
        b0 = np.zeros(terms * n_in)
        for i in range(n_in):
            for l in range(terms):
                W0[l + i * terms, i] = beta
                b0[l + i * terms] = offset - l
        W1 = np.zeros((layer.n_out, terms * n_in))
        for i in range(n_in):
            for l in range(terms):
                W1[:, l + i * terms] = layer.W[:, i] / beta
        replacement = LayerOp(W1, layer.b, layer.act)
    elif variant is InsertVariant.POST:
        beta = compute_beta_post(net, position, data, sum_data.margin)
        n_out = layer.n_out
        W0 = np.zeros((terms * n_out, layer.n_in))
        b0 = np.zeros(terms * n_out)
        for l in range(terms):
            for i in range(n_out):
                W0[i + l * n_out] = beta * layer.W[i]
                b0[i + l * n_out] = beta * layer.b[i] + offset - l
        W1 = np.zeros((n_out, terms * n_out))
        for i in range(n_out):
            for l in range(terms):
                W1[i, i + l * n_out] = 1.0 / beta
        replacement = LayerOp(W1, np.zeros(n_out), layer.act)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    inserted = LayerOp(W0, b0, sigma0)
    grown = Network(
        net.layers[: position - 1] + (inserted, replacement) + net.layers[position:]
    )
    report = GrowthReport(
        beta=beta,
        omega_desc=_omega_description(variant, position, beta, sum_data.margin),
        max_abs_deviation=max_deviation(net, grown, data.inputs),
    )
    return grown, report


def check_domain(
    net: Network,
    position: int,
    variant: InsertVariant,
    beta: float,
    sigma0_params: IdentitySumData,
    x,
) -> bool:
    """Whether insertion at position is exact for this particular input."""
    _check_position(net, position)
    x = np.asarray(x, dtype=float)
    if net.layers and x.shape != (net.in_dim,):
        raise DimensionMismatch(
            f"network expects {net.in_dim} inputs, got shape {x.shape}"
        )
    if math.isinf(sigma0_params.margin):
        return True
    y = _propagated(net, position, x[None, :])[0]
    if variant is InsertVariant.POST:
        layer = net.layers[position - 1]
        y = layer.W @ y + layer.b
    return bool(np.all(np.abs(beta * y) < sigma0_params.margin))
