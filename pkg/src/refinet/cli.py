"""Command-line interface: init, train, widen, insert, verify, dump-activation, info.

Exit codes: 0 success, 1 verification failure, 2 usage or parse problems,
3 violated math preconditions, 4 data problems.  Reports go to stdout,
diagnostics to stderr.  Every command is deterministic given its flags and
input files.
"""

from __future__ import annotations

import functools
import math
import sys

import click
import numpy as np

from . import errors
from .activations import (
    DEFAULT_TABLE_LEVELS,
    IdentityActivation,
    SplineActivation,
    TabulatedActivation,
)
from .network import (
    Dataset,
    Network,
    dataset_loss,
    forward_batch,
    gradient_descent,
    init_random,
    load_dataset,
    load_network,
    save_network,
)
from .subdivision import Mask, format_pairs
from .transform import InsertVariant, insert_layer, widen_layer

VERIFY_TOL = 1e-9

# Seed for the deviation sweep reported by `widen`; fixed so the printed
# number is reproducible run to run.
_SWEEP_SEED = 17


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except errors.UsageError as e:
            _fail(str(e), 2)
        except errors.PreconditionError as e:
            _fail(str(e), 3)
        except errors.DataError as e:
            _fail(str(e), 4)

    return wrapper


def _load_mask_file(path) -> Mask:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise errors.ParseError(f"cannot read mask file {path}: {e}") from None
    tokens = text.replace(",", " ").split()
    coeffs = []
    for tok in tokens:
        if tok.startswith("#"):
            break
        try:
            coeffs.append(float(tok))
        except ValueError:
            raise errors.ParseError(f"{path}: non-numeric mask entry {tok!r}") from None
    try:
        return Mask(tuple(coeffs))
    except ValueError as e:
        raise errors.ParseError(f"{path}: {e}") from None


def _parse_activation(token: str):
    """Turn spline:d / identity / mask:<file> into an activation object."""
    token = token.strip()
    if token == "identity":
        return IdentityActivation()
    if token.startswith("spline:"):
        try:
            degree = int(token.split(":", 1)[1])
        except ValueError:
            raise errors.ParseError(f"bad spline degree in {token!r}") from None
        if degree < 1:
            raise errors.ParseError("degree must be ≥ 1")
        return SplineActivation(degree)
    if token.startswith("mask:"):
        return TabulatedActivation(
            _load_mask_file(token.split(":", 1)[1]), DEFAULT_TABLE_LEVELS
        )
    raise errors.ParseError(f"unknown activation {token!r}")


def _dims_string(net: Network) -> str:
    return "-".join(str(d) for d in net.dims)


def _sweep_deviation(old: Network, new: Network, count: int = 1000) -> float:
    rng = np.random.default_rng(_SWEEP_SEED)
    X = rng.uniform(-10.0, 10.0, size=(count, old.in_dim))
    return float(np.max(np.abs(forward_batch(old, X) - forward_batch(new, X))))


@click.group()
@click.version_option(package_name="refinet", prog_name="refinet")
def main():
    """Build, grow, train, and inspect small dense networks."""


@main.command("init")
@click.option("--dims", required=True, help="Comma-separated layer widths, e.g. 2,4,1.")
@click.option("--act", "act_token", required=True, help="spline:d, identity, or mask:<file>.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def cmd_init(dims, act_token, seed, out):
    """Write a randomly initialized network."""
    try:
        widths = [int(tok) for tok in dims.split(",") if tok.strip() != ""]
    except ValueError:
        raise errors.ParseError(f"bad --dims {dims!r}") from None
    act = _parse_activation(act_token)
    net = init_random(widths, act, seed)
    save_network(net, out)
    click.echo(f"layers: {_dims_string(net)}")
    click.echo(f"activation: {act_token}")
    click.echo(f"seed: {seed}")
    click.echo(f"wrote {out}")


@main.command("widen")
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--layer", type=int, required=True)
@click.option("--neurons", required=True, help="'all' or comma-separated neuron indices.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def cmd_widen(net_path, layer, neurons, out):
    """Split neurons of one layer without changing the network function."""
    net = load_network(net_path)
    if neurons.strip().lower() == "all":
        if not 0 <= layer < len(net.layers):
            raise errors.PositionOutOfRange(
                f"layer {layer} out of range for {len(net.layers)} layers"
            )
        subset = range(net.layers[layer].n_out)
    else:
        try:
            subset = [int(tok) for tok in neurons.split(",") if tok.strip() != ""]
        except ValueError:
            raise errors.ParseError(
                f"--neurons expects 'all' or comma-separated indices, got {neurons!r}"
            ) from None
        if not subset:
            raise errors.ParseError("--neurons names no neurons")
    grown = widen_layer(net, layer, subset)
    save_network(grown, out)
    deviation = _sweep_deviation(net, grown)
    click.echo("variant: widen")
    click.echo(f"layer: {layer}")
    click.echo("beta: 1.0")
    click.echo(f"widths: {_dims_string(net)} -> {_dims_string(grown)}")
    click.echo(f"max deviation on 1000 random inputs: {deviation!r}")
    click.echo(f"wrote {out}")


@main.command("insert")
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pos", type=int, required=True)
@click.option("--sigma0", "sigma0_token", required=True, help="spline:d or identity.")
@click.option("--B", "terms", type=int, required=True, help="Number of shifted copies.")
@click.option("--variant", type=click.Choice(["pre", "post"]), required=True)
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guarded
def cmd_insert(net_path, pos, sigma0_token, terms, variant, data_path, out):
    """Insert a new layer, preserving outputs on the given data."""
    if sigma0_token.strip().startswith("mask:"):
        raise errors.ParseError("--sigma0 accepts spline:d or identity only")
    net = load_network(net_path)
    sigma0 = _parse_activation(sigma0_token)
    data = load_dataset(data_path)
    grown, report = insert_layer(net, pos, sigma0, terms, InsertVariant(variant), data)
    save_network(grown, out)
    click.echo(f"variant: {variant}")
    click.echo(f"beta: {report.beta!r}")
    click.echo(f"omega: {report.omega_desc}")
    click.echo(f"widths: {_dims_string(net)} -> {_dims_string(grown)}")
    click.echo(f"max deviation on data: {report.max_abs_deviation!r}")
    click.echo(f"wrote {out}")


@main.command("verify")
@click.option("--old", "old_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--new", "new_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--random", "random_count", type=int, default=0, show_default=True)
@click.option("--range", "half_range", type=float, default=10.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guarded
def cmd_verify(old_path, new_path, data_path, random_count, half_range, seed):
    """Compare two networks on data and/or random inputs; exit 0 if they agree."""
    old = load_network(old_path)
    new = load_network(new_path)
    if old.in_dim != new.in_dim or old.out_dim != new.out_dim:
        raise errors.DimensionMismatch(
            f"networks map {old.in_dim}->{old.out_dim} vs {new.in_dim}->{new.out_dim}"
        )
    blocks = []
    from_data = 0
    if data_path is not None:
        blocks.append(load_dataset(data_path).inputs)
        from_data = blocks[0].shape[0]
    if random_count > 0:
        rng = np.random.default_rng(seed)
        blocks.append(
            rng.uniform(-half_range, half_range, size=(random_count, old.in_dim))
        )
    if not blocks:
        raise errors.ParseError("need --data and/or --random")
    X = np.vstack(blocks)
    deviations = np.max(np.abs(forward_batch(old, X) - forward_batch(new, X)), axis=1)
    worst = float(np.max(deviations))
    click.echo(f"samples: {X.shape[0]} ({from_data} from data, {X.shape[0] - from_data} random)")
    click.echo(f"max deviation: {worst!r}")
    click.echo(f"mean deviation: {float(np.mean(deviations))!r}")
    if worst <= VERIFY_TOL:
        click.echo(f"result: OK (tolerance {VERIFY_TOL!r})")
    else:
        click.echo(f"result: FAIL (tolerance {VERIFY_TOL!r})")
        sys.exit(1)


@main.command("train")
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--epochs", type=int, required=True)
@click.option("--lr", type=float, required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), help="Also render the loss curve to this image file.")
@_guarded
def cmd_train(net_path, data_path, epochs, lr, out, plot_path):
    """Full-batch gradient descent on mean squared error."""
    if epochs < 0:
        raise errors.ParseError("--epochs must be nonnegative")
    with open(net_path) as fh:
        original_text = fh.read()
    net = load_network(net_path)
    data = load_dataset(data_path)
    if epochs == 0:
        with open(out, "w") as fh:
            fh.write(original_text)
        click.echo(f"loss: {dataset_loss(net, data)!r}")
        click.echo(f"wrote {out}")
        return
    trained, losses = gradient_descent(net, data, epochs, lr)
    for i, loss in enumerate(losses, start=1):
        click.echo(f"epoch {i}: loss {loss!r}")
    save_network(trained, out)
    if plot_path is not None:
        from .plots import save_loss_plot

        save_loss_plot(plot_path, losses)
        click.echo(f"plot: {plot_path}", err=True)
    click.echo(f"wrote {out}")


@main.command("dump-activation")
@click.option("--act", "act_token", required=True, help="spline:d, identity, or mask:<file>.")
@click.option("--from", "start", type=float, required=True)
@click.option("--to", "stop", type=float, required=True)
@click.option("--step", type=float, required=True)
@click.option("--prime", is_flag=True, help="Emit the derivative instead of the value.")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), help="Also render the curve to this image file.")
@_guarded
def cmd_dump_activation(act_token, start, stop, step, prime, plot_path):
    """Print 'x value' lines for an activation on a uniform grid."""
    if step <= 0:
        raise errors.ParseError("step must be positive")
    if stop < start:
        raise errors.ParseError("--to must not be below --from")
    act = _parse_activation(act_token)
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    xs = start + step * np.arange(count)
    ys = act.prime(xs) if prime else act(xs)
    click.echo(format_pairs(xs, ys))
    if plot_path is not None:
        from .plots import save_curve_plot

        label = f"{act_token} derivative" if prime else act_token
        save_curve_plot(plot_path, xs, ys, label, ylabel="slope" if prime else "value")
        click.echo(f"plot: {plot_path}", err=True)


def _float_list(values) -> str:
    return "[" + ",".join(repr(float(v)) for v in values) + "]"


def _activation_summary(act) -> list:
    lines = []
    ref = act.refinability()
    lines.append(
        f"A={ref.copies} τ={ref.shift:g} a={_float_list(ref.weights)}"
    )
    if isinstance(act, IdentityActivation):
        lines.append("sums identity on all of ℝ")
    else:
        d = act.degree
        sum_data = act.identity_sum(d)
        half = sum_data.half_width
        lines.append(
            f"sums identity for B≥{d}; at B={d}: μ={sum_data.offset:g} "
            f"I=[-{half:g},{half:g}] (half-width (B-{d}+1)/2 in general)"
        )
    return lines


@main.command("info")
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@_guarded
def cmd_info(net_path):
    """Describe a network file: widths, activations, growth parameters."""
    net = load_network(net_path)
    click.echo(f"layers: {_dims_string(net)}")
    for j, layer in enumerate(net.layers):
        desc = layer.act.descriptor()
        kind = desc["kind"]
        if kind == "spline":
            kind = f"spline:{desc['d']}"
        elif kind == "tabulated":
            kind = f"tabulated (mask of {len(desc['mask'])} coefficients, levels={desc['levels']})"
        click.echo(f"layer {j}: {layer.n_in} -> {layer.n_out}, {kind}")
        for line in _activation_summary(layer.act):
            click.echo(f"  {line}")


if __name__ == "__main__":
    main()
