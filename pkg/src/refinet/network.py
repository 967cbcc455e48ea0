"""Dense layered networks: evaluation, gradients, and the file formats.

A network is a tuple of layers, each applying act(W x + b).  Serialization
is JSON with floats written by repr, which round-trips bit-exactly.
Datasets are plain text, one sample per line with inputs first, under a
'# in=<n> out=<m>' header.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .activations import (
    Activation,
    SplineActivation,
    activation_from_descriptor,
    sigma_prime_from_value,
)
from .errors import (
    DatasetError,
    DimensionMismatch,
    EmptyArchitecture,
    EmptyDataset,
    ParseError,
)


@dataclass(frozen=True)
class LayerOp:
    """One affine-then-activation stage: x -> act(W x + b)."""

    W: np.ndarray
    b: np.ndarray
    act: Activation

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        b = np.array(self.b, dtype=float)
        if W.ndim != 2:
            raise DimensionMismatch("W must be a matrix")
        if b.ndim != 1:
            raise DimensionMismatch("b must be a vector")
        if W.shape[0] != b.shape[0]:
            raise DimensionMismatch(
                f"rows(W)={W.shape[0]} does not match len(b)={b.shape[0]}"
            )
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class Network:
    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        for j in range(len(layers) - 1):
            if layers[j].n_out != layers[j + 1].n_in:
                raise DimensionMismatch(
                    f"layer {j} outputs {layers[j].n_out} values but layer "
                    f"{j + 1} expects {layers[j + 1].n_in}"
                )

    @property
    def dims(self) -> tuple:
        if not self.layers:
            return ()
        return (self.layers[0].n_in,) + tuple(l.n_out for l in self.layers)

    @property
    def in_dim(self):
        return self.layers[0].n_in if self.layers else None

    @property
    def out_dim(self):
        return self.layers[-1].n_out if self.layers else None


def forward_layer(layer: LayerOp, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (layer.n_in,):
        raise DimensionMismatch(
            f"layer expects {layer.n_in} inputs, got shape {x.shape}"
        )
    return layer.act(layer.W @ x + layer.b)


def forward(net: Network, x):
    """Apply the layers left to right; an empty network is the identity."""
    x = np.asarray(x, dtype=float)
    for layer in net.layers:
        x = forward_layer(layer, x)
    return x


def forward_batch(net: Network, X):
    """Forward pass over rows of X, shape (samples, in_dim)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-D (samples by inputs)")
    if net.layers and X.shape[1] != net.in_dim:
        raise DimensionMismatch(
            f"network expects {net.in_dim} inputs, got {X.shape[1]}"
        )
    for layer in net.layers:
        X = layer.act(X @ layer.W.T + layer.b)
    return X


def _layer_prime(layer: LayerOp, z, y, derivative):
    if derivative == "value" and isinstance(layer.act, SplineActivation):
        if layer.act.degree in (1, 2):
            return sigma_prime_from_value(layer.act.degree, y)
    return layer.act.prime(z)


def backprop(net: Network, x, target, derivative: str = "argument"):
    """Loss 0.5 * ||forward(x) - target||^2 and its exact layer gradients.

    derivative="value" recovers slopes from the stored activation values
    where the closed form allows it (spline degrees 1 and 2); both routes
    agree everywhere by the kink conventions.
    """
    if derivative not in ("argument", "value"):
        raise ValueError("derivative must be 'argument' or 'value'")
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    inputs = [x]
    pre = []
    for layer in net.layers:
        z = layer.W @ inputs[-1] + layer.b
        pre.append(z)
        inputs.append(layer.act(z))
    residual = inputs[-1] - target
    if residual.shape != (net.out_dim if net.layers else x.shape[0],):
        raise DimensionMismatch("target shape does not match the network output")
    loss = 0.5 * float(residual @ residual)
    grads = [None] * len(net.layers)
    delta = residual
    for j in reversed(range(len(net.layers))):
        layer = net.layers[j]
        dz = delta * _layer_prime(layer, pre[j], inputs[j + 1], derivative)
        grads[j] = (np.outer(dz, inputs[j]), dz)
        delta = layer.W.T @ dz
    return loss, grads


def dataset_loss(net: Network, data: "Dataset") -> float:
    """Mean over samples of 0.5 * squared error."""
    Y = forward_batch(net, data.inputs)
    return 0.5 * float(np.mean(np.sum((Y - data.targets) ** 2, axis=1)))


def gradient_descent(net: Network, data: "Dataset", epochs: int, lr: float):
    """Plain full-batch gradient descent on the mean squared-error loss.

    Returns the trained network and the loss recorded after each epoch's
    update.  Deterministic: no shuffling, no randomness.
    """
    n = len(data.inputs)
    losses = []
    for _ in range(epochs):
        acc = [
            (np.zeros_like(l.W), np.zeros_like(l.b)) for l in net.layers
        ]
        for x, t in zip(data.inputs, data.targets):
            _, grads = backprop(net, x, t)
            for (aW, ab), (dW, db) in zip(acc, grads):
                aW += dW
                ab += db
        net = Network(
            tuple(
                LayerOp(l.W - lr * aW / n, l.b - lr * ab / n, l.act)
                for l, (aW, ab) in zip(net.layers, acc)
            )
        )
        losses.append(dataset_loss(net, data))
    return net, losses


def init_random(dims, act: Activation, seed: int) -> Network:
    """Uniform Xavier weights, zero biases, same activation on every layer.

    Weights are drawn with numpy's default_rng (PCG64), so a seed pins the
    network exactly.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise EmptyArchitecture("need at least two dims")
    if any(d < 1 for d in dims):
        raise EmptyArchitecture("layer widths must be positive")
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out in zip(dims, dims[1:]):
        bound = math.sqrt(6.0 / (n_in + n_out))
        W = rng.uniform(-bound, bound, size=(n_out, n_in))
        layers.append(LayerOp(W, np.zeros(n_out), act))
    return Network(tuple(layers))


def serialize(net: Network) -> str:
    doc = {
        "layers": [
            {"W": l.W.tolist(), "b": l.b.tolist(), "act": l.act.descriptor()}
            for l in net.layers
        ]
    }
    return json.dumps(doc, indent=1)


def _parse_matrix(rows, where):
    if (
        not isinstance(rows, list)
        or not rows
        or not all(isinstance(r, list) for r in rows)
    ):
        raise ParseError(f"{where}: expected a list of rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"{where}: row {i} has {len(r)} entries, expected {width}")
        for v in r:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ParseError(f"{where}: non-numeric entry {v!r}")
    return rows


def deserialize(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list):
        raise ParseError("top level must be an object with a 'layers' list")
    layers = []
    for i, entry in enumerate(doc["layers"]):
        where = f"layers[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object")
        for key in ("W", "b", "act"):
            if key not in entry:
                raise ParseError(f"{where}: missing field {key!r}")
        W = _parse_matrix(entry["W"], f"{where}.W")
        b = entry["b"]
        if not isinstance(b, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in b
        ):
            raise ParseError(f"{where}.b: expected a list of numbers")
        try:
            act = activation_from_descriptor(entry["act"])
        except ParseError as e:
            raise ParseError(f"{where}.act: {e}") from None
        try:
            layers.append(LayerOp(np.array(W, dtype=float), np.array(b, dtype=float), act))
        except DimensionMismatch as e:
            raise ParseError(f"{where}: {e}") from None
    try:
        return Network(tuple(layers))
    except DimensionMismatch as e:
        raise ParseError(str(e)) from None


def save_network(net: Network, path):
    with open(path, "w") as fh:
        fh.write(serialize(net) + "\n")


def load_network(path) -> Network:
    with open(path) as fh:
        return deserialize(fh.read())


@dataclass(frozen=True)
class Dataset:
    """Paired sample rows: inputs (N, n) and targets (N, m)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=float)
        targets = np.array(self.targets, dtype=float)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise DimensionMismatch("inputs and targets must be 2-D")
        if inputs.shape[0] != targets.shape[0]:
            raise DimensionMismatch("inputs and targets disagree on sample count")
        if inputs.shape[0] == 0:
            raise EmptyDataset("dataset has no samples")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return self.inputs.shape[0]


_HEADER_RE = re.compile(r"^#\s*in=(\d+)\s+out=(\d+)\s*$")


def save_dataset(data: Dataset, path):
    lines = [f"# in={data.inputs.shape[1]} out={data.targets.shape[1]}"]
    for x, t in zip(data.inputs, data.targets):
        lines.append(" ".join(repr(float(v)) for v in (*x, *t)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> Dataset:
    """Read a '# in=<n> out=<m>' header, then one sample per line.

    Columns may be separated by whitespace or commas.
    """
    with open(path) as fh:
        lines = fh.readlines()
    header = None
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if header is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise DatasetError(
                    f"{path}:{lineno}: expected header '# in=<n> out=<m>'"
                )
            header = (int(m.group(1)), int(m.group(2)))
            continue
        if line.startswith("#"):
            continue
        fields = line.replace(",", " ").split()
        n, m_out = header
        if len(fields) != n + m_out:
            raise DatasetError(
                f"{path}:{lineno}: expected {n + m_out} columns, got {len(fields)}"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise DatasetError(f"{path}:{lineno}: non-numeric value") from None
    if header is None:
        raise DatasetError(f"{path}: missing '# in=<n> out=<m>' header")
    if not rows:
        raise EmptyDataset(f"{path}: no samples")
    arr = np.array(rows, dtype=float)
    n, m_out = header
    return Dataset(arr[:, :n], arr[:, n:])
