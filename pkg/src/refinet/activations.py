"""Clamped spline activations, their derivatives, and growth parameters.

Three interchangeable kinds: closed-form splines, the identity, and
activations tabulated from a refinement mask.  Each knows its two-scale
relation (how many half-scale copies reproduce it, with which shift and
weights) and how many unit-shifted copies of itself sum to the identity map
on a symmetric interval.  Those two parameter sets are everything the
growth transforms need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegreeTooSmall,
    DomainError,
    ParseError,
    UnsupportedDegree,
)
from .subdivision import (
    EPS_ALG,
    DyadicTable,
    Mask,
    factor_difference_scheme,
    tabulate_sigma_from_step,
)

# Binomial-based closed forms stay exact in float64 well past this, but the
# alternating sums lose accuracy as the degree grows; cap where they are safe.
MAX_DEGREE = 20

DEFAULT_TABLE_LEVELS = 12

_SYMMETRY_TOL = 1e-8


def _check_degree(degree, minimum):
    if not isinstance(degree, (int, np.integer)):
        raise TypeError("degree must be an integer")
    if degree < minimum or degree > MAX_DEGREE:
        raise ValueError(f"degree must be between {minimum} and {MAX_DEGREE}")


def _vectorized(fn):
    """Run fn on a float array view of t, returning a float for scalar t."""

    def wrapper(degree, t):
        arr = np.asarray(t, dtype=float)
        out = fn(degree, np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_vectorized
def spline_phi(degree, t):
    """Cardinal B-spline bump of the given degree, supported on (0, degree+1).

    Degree 0 is the unit indicator of [0, 1); higher degrees use the
    alternating truncated-power form, with the outside zeroed explicitly so
    the support boundary is exact.
    """
    _check_degree(degree, minimum=0)
    if degree == 0:
        return np.where((t >= 0.0) & (t < 1.0), 1.0, 0.0)
    acc = np.zeros_like(t)
    for l in range(degree + 2):
        coeff = (-1) ** l * math.comb(degree + 1, l)
        acc += coeff * np.maximum(t - l, 0.0) ** degree
    inside = (t > 0.0) & (t < degree + 1.0)
    return np.where(inside, acc / math.factorial(degree), 0.0)


@_vectorized
def spline_sigma(degree, t):
    """Odd ramp of the given degree: -1/2 below -degree/2, +1/2 above.

    The blend on [-degree/2, degree/2] is the alternating truncated-power
    form; the clamps are applied explicitly so they hold exactly.
    """
    _check_degree(degree, minimum=1)
    half = degree / 2.0
    acc = np.zeros_like(t)
    for l in range(degree + 1):
        coeff = (-1) ** l * math.comb(degree, l)
        acc += coeff * np.maximum(t + half - l, 0.0) ** degree
    blend = acc / math.factorial(degree) - 0.5
    return np.where(t <= -half, -0.5, np.where(t >= half, 0.5, blend))


@_vectorized
def spline_sigma_prime(degree, t):
    """Derivative of spline_sigma: the degree-1 lower bump, recentered.

    At degree 1 the derivative jumps at |t| = 1/2; both one-sided limits are
    replaced by 0 there, matching the value-form convention.
    """
    _check_degree(degree, minimum=1)
    if degree == 1:
        return np.where(np.abs(t) < 0.5, 1.0, 0.0)
    return spline_phi(degree - 1, t + degree / 2.0)


@_vectorized
def sigma_prime_from_value(degree, y):
    """Derivative of spline_sigma recovered from its output value alone.

    Known for degrees 1 and 2 only.  Raises DomainError when |y| exceeds the
    reachable range and UnsupportedDegree otherwise.
    """
    if degree not in (1, 2):
        raise UnsupportedDegree(
            f"value-form derivative is only known for degrees 1 and 2, not {degree}"
        )
    if np.any(np.abs(y) > 0.5 + EPS_ALG):
        raise DomainError("activation values lie in [-1/2, 1/2]")
    if degree == 1:
        return np.where(np.abs(y) < 0.5, 1.0, 0.0)
    return np.sqrt(np.maximum(0.0, 1.0 - 2.0 * np.abs(y)))


@dataclass(frozen=True)
class RefinabilityData:
    """Two-scale relation: act(t) = sum_l weights[l] * act(2t + shift - l)."""

    copies: int
    shift: float
    weights: tuple


@dataclass(frozen=True)
class IdentitySumData:
    """t = sum_{l<terms} act(t + offset - l) for |t| <= half_width.

    margin is the largest m with (-m, m) inside the valid interval; it is
    +inf for the identity activation, which sums everywhere.
    """

    terms: int
    offset: float
    half_width: float
    margin: float


def _spline_sum_params(degree: int, terms: int) -> IdentitySumData:
    if terms < degree:
        raise DegreeTooSmall(
            f"summing the identity with degree {degree} needs at least "
            f"{degree} terms, got {terms}"
        )
    half = (terms - degree + 1) / 2.0
    return IdentitySumData(terms, (terms - 1) / 2.0, half, half)


@dataclass(frozen=True)
class SplineActivation:
    """Closed-form odd ramp of a fixed degree."""

    degree: int

    def __post_init__(self):
        _check_degree(self.degree, minimum=1)

    def __call__(self, t):
        return spline_sigma(self.degree, t)

    def prime(self, t):
        return spline_sigma_prime(self.degree, t)

    def refinability(self) -> RefinabilityData:
        d = self.degree
        weights = tuple(2.0 ** -d * math.comb(d, l) for l in range(d + 1))
        return RefinabilityData(d + 1, d / 2.0, weights)

    def identity_sum(self, terms: int) -> IdentitySumData:
        return _spline_sum_params(self.degree, terms)

    def descriptor(self) -> dict:
        return {"kind": "spline", "d": self.degree}


@dataclass(frozen=True)
class IdentityActivation:
    """The identity map; refinable for any number of copies."""

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        return float(arr) if arr.ndim == 0 else arr.copy()

    def prime(self, t):
        arr = np.asarray(t, dtype=float)
        return 1.0 if arr.ndim == 0 else np.ones_like(arr)

    def refinability(self, copies: int = 2) -> RefinabilityData:
        if copies < 1:
            raise ValueError("copies must be >= 1")
        return RefinabilityData(
            copies, (copies - 1) / 2.0, (1.0 / (2 * copies),) * copies
        )

    def identity_sum(self, terms: int = 1) -> IdentitySumData:
        # Summing B shifted identity copies gives B*t + const, so only a
        # single copy reproduces t; the request is normalized accordingly.
        if terms < 1:
            raise DegreeTooSmall("need at least one term")
        return IdentitySumData(1, 0.0, math.inf, math.inf)

    def descriptor(self) -> dict:
        return {"kind": "identity"}


@dataclass(frozen=True)
class TabulatedActivation:
    """Activation cascaded from a refinement mask, evaluated by interpolation.

    The generating mask is retained: its difference scheme supplies the
    two-scale weights.  Values outside the stored range clamp to -1/2 and
    +1/2.  odd_symmetric records whether the stored table is odd within
    1e-8, the numeric stand-in for the mirror-symmetry hypothesis.
    """

    mask: Mask
    levels: int = DEFAULT_TABLE_LEVELS
    table: DyadicTable = field(init=False, repr=False, compare=False)
    odd_symmetric: bool = field(init=False, compare=False)

    def __post_init__(self):
        mask = self.mask if isinstance(self.mask, Mask) else Mask(tuple(self.mask))
        object.__setattr__(self, "mask", mask)
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        table = tabulate_sigma_from_step(mask, self.levels)
        object.__setattr__(self, "table", table)
        mirrored = table.interp(-table.abscissas)
        odd = bool(np.max(np.abs(mirrored + table.values)) <= _SYMMETRY_TOL)
        object.__setattr__(self, "odd_symmetric", odd)

    @property
    def degree(self) -> int:
        return self.mask.degree

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        out = self.table.interp(arr, left=-0.5, right=0.5)
        return float(out) if arr.ndim == 0 else out

    def prime(self, t):
        """Forward-difference slope of the sample interval containing t."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        xs = self.table.abscissas
        vs = self.table.values
        idx = np.clip(np.searchsorted(xs, arr, side="right") - 1, 0, len(xs) - 2)
        slopes = (vs[idx + 1] - vs[idx]) / self.table.spacing
        out = np.where((arr < xs[0]) | (arr >= xs[-1]), 0.0, slopes)
        return float(out[0]) if np.asarray(t).ndim == 0 else out

    def refinability(self) -> RefinabilityData:
        d = self.degree
        weights = tuple(float(c) for c in factor_difference_scheme(self.mask))
        return RefinabilityData(d + 1, d / 2.0, weights)

    def identity_sum(self, terms: int) -> IdentitySumData:
        return _spline_sum_params(self.degree, terms)

    def descriptor(self) -> dict:
        return {
            "kind": "tabulated",
            "mask": [float(c) for c in self.mask.coeffs],
            "levels": self.levels,
        }


Activation = SplineActivation | IdentityActivation | TabulatedActivation


def activation_from_descriptor(descriptor) -> Activation:
    """Rebuild an activation from its serialized descriptor."""
    if not isinstance(descriptor, dict) or "kind" not in descriptor:
        raise ParseError("activation descriptor must be an object with a 'kind'")
    kind = descriptor["kind"]
    if kind == "spline":
        if "d" not in descriptor:
            raise ParseError("spline activation needs a degree field 'd'")
        return SplineActivation(int(descriptor["d"]))
    if kind == "identity":
        return IdentityActivation()
    if kind == "tabulated":
        if "mask" not in descriptor:
            raise ParseError("tabulated activation needs a 'mask' field")
        levels = int(descriptor.get("levels", DEFAULT_TABLE_LEVELS))
        return TabulatedActivation(Mask(tuple(descriptor["mask"])), levels)
    raise ParseError(f"unknown activation kind {kind!r}")
