"""Masks, Laurent polynomials, and dyadic refinement tables.

One refinement step maps samples f_j at spacing 2^-k to

    f'_i = sum_j a_{i-2j} f_j

at spacing 2^-(k-1) / 2.  Coefficient algebra (products, the (1+z) factor,
convergence checks) stays in exact Python arithmetic so Fraction inputs go
through untouched; the cascade itself runs on float64 arrays.

Abscissa convention: sample i of the refined sequence is pinned where affine
data stays fixed, which shifts the frame by -(mask center of mass) * 2^-(k+1)
per step.  With that frame the degree-1 scheme lands on its limit exactly at
every level, so tables can be compared against closed forms at dyadic points
without a parametrization drift term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConvergent, NotFactorable

# Slack for coefficient-level checks (convergence sums, factor remainders).
EPS_ALG = 1e-12


@dataclass(frozen=True)
class Mask:
    """Refinement coefficients with support starting at index 0."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) < 2:
            raise ValueError("mask needs at least two coefficients")
        if self.coeffs[0] == 0 or self.coeffs[-1] == 0:
            raise ValueError("mask must start and end with a nonzero coefficient")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 2

    @property
    def center(self) -> float:
        """Center of mass of the coefficients, in index units."""
        total = sum(self.coeffs)
        return float(sum(l * a for l, a in enumerate(self.coeffs)) / total)

    def symbol(self) -> "LaurentPoly":
        return LaurentPoly(self.coeffs)


def bspline_mask(degree: int) -> Mask:
    """Mask whose basic limit is the cardinal B-spline of the given degree."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    scale = 2.0 ** -degree
    return Mask(tuple(scale * math.comb(degree + 1, l) for l in range(degree + 2)))


@dataclass(frozen=True)
class LaurentPoly:
    """coeffs[i] multiplies z**(offset + i); exact for int/Fraction coeffs."""

    coeffs: tuple
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValueError("empty coefficient list")

    def __call__(self, z):
        return sum(c * z ** (self.offset + i) for i, c in enumerate(self.coeffs))


def laurent_mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Convolution product; offsets add."""
    out = [0] * (len(p.coeffs) + len(q.coeffs) - 1)
    for i, a in enumerate(p.coeffs):
        for j, b in enumerate(q.coeffs):
            out[i + j] += a * b
    return LaurentPoly(tuple(out), p.offset + q.offset)


def laurent_upsample(p: LaurentPoly) -> LaurentPoly:
    """Substitute z^2 for z: coefficients spread to even exponents."""
    out = [0] * (2 * len(p.coeffs) - 1)
    out[::2] = list(p.coeffs)
    return LaurentPoly(tuple(out), 2 * p.offset)


def check_convergence_necessary(mask: Mask) -> bool:
    """Sum 2 overall and equal sums on even/odd indices, within EPS_ALG."""
    symbol = mask.symbol()
    return (
        abs(float(symbol(1)) - 2.0) <= EPS_ALG
        and abs(float(symbol(-1))) <= EPS_ALG
    )


def factor_difference_scheme(mask: Mask):
    """Divide the symbol by (1 + z), returning the quotient coefficients.

    Synthetic division, exact in the input's arithmetic.  Raises
    NotFactorable when the remainder exceeds EPS_ALG.
    """
    a = mask.coeffs
    b = [a[0]]
    for coeff in a[1:-1]:
        b.append(coeff - b[-1])
    remainder = a[-1] - b[-1]
    if abs(remainder) > EPS_ALG:
        raise NotFactorable(
            f"mask symbol has no (1+z) factor (remainder {float(remainder)!r})"
        )
    return tuple(b)


def is_monotone_scheme(mask: Mask) -> bool:
    """True when the difference-scheme coefficients are all nonnegative.

    Nonnegative quotient coefficients guarantee non-decreasing limits from
    non-decreasing data; a negative entry forfeits that guarantee.
    """
    return all(coeff >= -EPS_ALG for coeff in factor_difference_scheme(mask))


@dataclass(frozen=True)
class DyadicTable:
    """Uniform samples: values[j] sits at origin + j * 2^-level."""

    level: int
    origin: float
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("values must be a nonempty 1-D array")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.level

    @property
    def abscissas(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(len(self.values))

    def interp(self, t, left=None, right=None):
        """Linear interpolation; out-of-range fills default to edge values."""
        return np.interp(t, self.abscissas, self.values, left=left, right=right)

    def window(self, lo: float, hi: float) -> "DyadicTable":
        """Sub-table with abscissas in [lo, hi] (half a spacing of slack)."""
        xs = self.abscissas
        slack = 0.5 * self.spacing
        keep = np.nonzero((xs >= lo - slack) & (xs <= hi + slack))[0]
        if keep.size == 0:
            raise ValueError(f"window [{lo}, {hi}] contains no samples")
        return DyadicTable(
            self.level, float(xs[keep[0]]), self.values[keep[0] : keep[-1] + 1]
        )

    def to_text(self) -> str:
        """Two-column export, one 'abscissa value' pair per line."""
        return format_pairs(self.abscissas, self.values)


def format_pairs(xs, ys) -> str:
    return "\n".join(f"{float(x)!r} {float(y)!r}" for x, y in zip(xs, ys))


def subdivide(mask: Mask, table: DyadicTable) -> DyadicTable:
    """One refinement step.

    The input is padded on both sides with its edge values (width = mask
    length), and only samples whose stencil lies inside the padded window are
    kept.  Results are exact wherever the true data really is edge-constant
    beyond the stored window, which holds for the impulse and step data used
    by the tabulators; for other data the outermost samples are a constant
    extension approximation.
    """
    weights = np.array([float(c) for c in mask.coeffs])
    d = mask.degree
    pad = len(weights)
    v = table.values
    padded = np.concatenate([np.full(pad, v[0]), v, np.full(pad, v[-1])])
    up = np.zeros(2 * len(padded) - 1)
    up[::2] = padded
    full = np.convolve(up, weights)
    kept = full[d + 1 : 2 * len(padded) - 1]
    spacing = 2.0 ** -(table.level + 1)
    origin = table.origin + (d + 1 - 2 * pad - mask.center) * spacing
    return DyadicTable(table.level + 1, origin, kept)


def _require_convergent(mask: Mask):
    if not check_convergence_necessary(mask):
        raise NotConvergent(
            "mask fails the necessary convergence conditions "
            "(coefficients must sum to 2 with equal even/odd sums)"
        )


def tabulate_basic_limit(mask: Mask, levels: int) -> DyadicTable:
    """Cascade from an impulse: table of the scheme's basic limit function.

    The limit is supported on (0, degree+1); the returned table keeps one
    unit of exact zeros on each side.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    _require_convergent(mask)
    d = mask.degree
    table = DyadicTable(0, mask.center - 1.0, np.array([0.0, 1.0, 0.0]))
    for _ in range(levels):
        table = subdivide(mask, table).window(-1.0, d + 2.0)
    return table


def tabulate_sigma_from_step(mask: Mask, levels: int) -> DyadicTable:
    """Cascade from a -1/2 / +1/2 step: table of the associated activation.

    The step limit is the activation delayed by degree/2, so the final
    abscissas are shifted back by that much.  The stored range covers the
    blend zone plus one unit of exactly clamped samples on each side.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    _require_convergent(mask)
    d = mask.degree
    half_window = d + 3
    values = np.concatenate([np.full(half_window, -0.5), np.full(half_window, 0.5)])
    table = DyadicTable(0, mask.center - half_window, values)
    for _ in range(levels):
        table = subdivide(mask, table).window(-2.0, d + 2.0)
    return DyadicTable(table.level, table.origin - d / 2.0, table.values)


def check_polynomial_generation(mask: Mask, levels: int, tol: float) -> bool:
    """Does sum_l l * limit(t - l) reproduce t - (degree+1)/2 within tol?

    Checked on a dyadic grid spanning one full period of interior points,
    against the tabulated basic limit (zero-extended outside its support).
    """
    table = tabulate_basic_limit(mask, levels)
    d = mask.degree
    grid_level = min(levels, 8)
    t = np.linspace(0.5, d + 0.5, d * 2 ** grid_level + 1)
    total = np.zeros_like(t)
    for l in range(-d - 1, d + 2):
        total += l * table.interp(t - l, left=0.0, right=0.0)
    return float(np.max(np.abs(total - (t - (d + 1) / 2.0)))) <= tol
