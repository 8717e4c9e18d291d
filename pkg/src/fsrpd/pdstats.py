"""GEM and Poisson-Dirichlet sampling, the Dickman function, and the
statistics used to compare cycle-length processes against their limits.

Simplex points carry an explicit truncation tail so that coordinates plus
tail always sum to one exactly (up to float roundoff); the metrics treat the
tail as one more coordinate, so truncation error stays bounded by the
stick-breaking tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np

from . import perms

__all__ = [
    "SimplexPoint",
    "FinitePermDist",
    "SampleCounts",
    "gem_sample",
    "pd_sample",
    "rank",
    "dickman_rho",
    "pd_density",
    "metric_d",
    "metric_l1",
    "schedule_distance",
    "sample_counts",
    "ks_statistic",
    "tv_distance",
]

SUM_TOL = 1e-12


@dataclass(frozen=True)
class SimplexPoint:
    """Finitely many nonnegative coordinates plus the residual tail mass."""

    coords: tuple[float, ...]
    tail: float = 0.0

    def __post_init__(self):
        if self.tail < 0 or any(c < 0 for c in self.coords):
            raise ValueError("simplex coordinates must be nonnegative")
        total = math.fsum(self.coords) + self.tail
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"coordinates plus tail sum to {total}, not 1")


def gem_sample(rng, tol: float = 1e-9) -> SimplexPoint:
    """Stick breaking with uniform sticks.

    Coordinates (1-U1), U1(1-U2), U1U2(1-U3), ... are emitted until the
    unbroken remainder U1...Uj drops below tol; the remainder becomes the
    tail.
    """
    if not 0 < tol < 1:
        raise ValueError(f"tol must be in (0,1), got {tol}")
    coords = []
    residual = 1.0
    while residual >= tol:
        u = float(rng.random())
        coords.append(residual * (1.0 - u))
        residual *= u
    return SimplexPoint(tuple(coords), residual)


def rank(x):
    """Sort coordinates nonincreasingly (stable); tails pass through."""
    if isinstance(x, SimplexPoint):
        return SimplexPoint(tuple(sorted(x.coords, reverse=True)), x.tail)
    return type(x)(sorted(x, reverse=True))


def pd_sample(rng, tol: float = 1e-9) -> SimplexPoint:
    """A Poisson-Dirichlet draw: the ranked version of a GEM draw."""
    return rank(gem_sample(rng, tol))


# ---------------------------------------------------------------------------
# Dickman's function, by stepping its delay integral u*rho(u) = int_{u-1}^u rho
# on a fixed grid with trapezoidal quadrature.

_PER_UNIT = 10_000  # grid points per unit of u; h = 1e-4
_RHO_UMAX = 200.0  # rho underflows double precision far before this
_rho_grid = [1.0] * (_PER_UNIT + 1)  # rho = 1 on [0, 1]


def _extend_rho_grid(n_points: int) -> None:
    grid = _rho_grid
    h = 1.0 / _PER_UNIT
    while len(grid) <= n_points:
        i = len(grid) - 1  # current top index, u = i*h
        u = i * h
        delayed = grid[i - _PER_UNIT] + grid[i + 1 - _PER_UNIT]
        grid.append((grid[i] * (u + h / 2) - (h / 2) * delayed) / (u + h / 2))


def dickman_rho(u: float) -> float:
    """Dickman's rho: 1 on [0,1], 0 below 0, and u*rho(u) = int_{u-1}^u rho.

    Grid step 1e-4 with linear interpolation; absolute error stays below
    1e-8 for u <= 10.  Returns 0 beyond u = 200, where rho underflows.
    """
    u = float(u)
    if not math.isfinite(u):
        raise ValueError(f"u must be finite, got {u}")
    if u < 0:
        return 0.0
    if u <= 1:
        return 1.0
    if u > _RHO_UMAX:
        return 0.0
    x = u * _PER_UNIT
    lo = int(math.floor(x))
    _extend_rho_grid(lo + 1)
    frac = x - lo
    return _rho_grid[lo] * (1.0 - frac) + _rho_grid[lo + 1] * frac


def pd_density(xs: Sequence[float]) -> float:
    """Joint density of the k largest Poisson-Dirichlet coordinates.

    Nonzero only on x1 > x2 > ... > xk > 0 with sum < 1, where it equals
    rho((1 - sum)/xk) / (x1 ... xk).
    """
    xs = [float(x) for x in xs]
    if not xs:
        raise ValueError("need at least one coordinate")
    for left, right in zip(xs, xs[1:]):
        if not left > right:
            return 0.0
    if xs[-1] <= 0:
        return 0.0
    s = math.fsum(xs)
    if s >= 1.0:
        return 0.0
    prod = 1.0
    for x in xs:
        prod *= x
    return dickman_rho((1.0 - s) / xs[-1]) / prod


# ---------------------------------------------------------------------------
# Simplex metrics.


def _padded(x, y) -> tuple[list[float], list[float]]:
    def coords(z):
        if isinstance(z, SimplexPoint):
            return list(z.coords) + [z.tail]
        return [float(v) for v in z]

    xs, ys = coords(x), coords(y)
    size = max(len(xs), len(ys))
    xs += [0.0] * (size - len(xs))
    ys += [0.0] * (size - len(ys))
    return xs, ys


def metric_d(x, y) -> float:
    """Sum of 2^-i |x_i - y_i| over coordinates, i starting at 1."""
    xs, ys = _padded(x, y)
    return math.fsum(abs(a - b) * 0.5 ** (i + 1) for i, (a, b) in enumerate(zip(xs, ys)))


def metric_l1(x, y) -> float:
    xs, ys = _padded(x, y)
    return math.fsum(abs(a - b) for a, b in zip(xs, ys))


# ---------------------------------------------------------------------------
# Schedules: words over the color-pair alphabet, each letter flipped in or
# out by a fair coin, composed left to right.

MAX_SCHEDULE_LEN = 24


def schedule_distance(schedule: Sequence[tuple[int, int]], k: int) -> Fraction:
    """Exact total-variation distance to uniform on S_k of the random product
    tau_m o ... o tau_1, where tau_i is the transposition schedule[i] with
    probability 1/2 and the identity otherwise.

    The distribution over S_k is propagated letter by letter, which sums the
    same 2^m equally likely coin vectors as direct enumeration.
    """
    m = len(schedule)
    if m > MAX_SCHEDULE_LEN:
        raise ValueError(
            f"schedule length {m} exceeds the exact-mode cap {MAX_SCHEDULE_LEN}"
        )
    for a, b in schedule:
        if not 1 <= a < b <= k:
            raise ValueError(f"schedule letter ({a},{b}) needs 1 <= a < b <= {k}")
    half = Fraction(1, 2)
    dist: dict[perms.Perm, Fraction] = {perms.identity(k): Fraction(1)}
    for a, b in schedule:
        tau = perms.transposition(k, a, b)
        new: dict[perms.Perm, Fraction] = {}
        for p, w in dist.items():
            flipped = perms.compose(tau, p)
            new[p] = new.get(p, Fraction(0)) + w * half
            new[flipped] = new.get(flipped, Fraction(0)) + w * half
        dist = new
    uniform = Fraction(1, factorial(k))
    total = Fraction(0)
    for p in perms.all_perms(k):
        total += abs(dist.get(p, Fraction(0)) - uniform)
    return total / 2


@dataclass(frozen=True)
class FinitePermDist:
    """A distribution over S_k, indexed by lexicographic permutation rank."""

    k: int
    probabilities: tuple

    def __post_init__(self):
        if len(self.probabilities) != factorial(self.k):
            raise ValueError(
                f"need {factorial(self.k)} probabilities for S_{self.k}"
            )
        if any(p < 0 for p in self.probabilities):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(sum(self.probabilities)) - 1.0) > SUM_TOL:
            raise ValueError("probabilities must sum to 1")


def tv_distance(dist: FinitePermDist):
    """Total-variation distance of dist to uniform on S_k; exact when the
    probabilities are Fractions."""
    uniform = Fraction(1, factorial(dist.k))
    if all(isinstance(p, (Fraction, int)) for p in dist.probabilities):
        return sum(abs(p - uniform) for p in dist.probabilities) / 2
    u = float(uniform)
    return math.fsum(abs(float(p) - u) for p in dist.probabilities) / 2


# ---------------------------------------------------------------------------
# Sampling blocks of a partition.


@dataclass(frozen=True)
class SampleCounts:
    """Counts of a k-sample against a partition's blocks.

    C lists counts in first-appearance block order (no zeros), D in
    nonincreasing block-size order (zeros kept), M the block sizes.  C and D
    always rank to the same multiset.
    """

    C: tuple[int, ...]
    D: tuple[int, ...]
    M: tuple[int, ...]

    def __post_init__(self):
        if sum(self.C) != sum(self.D):
            raise ValueError("C and D must count the same sample")
        ranked_c = sorted(self.C, reverse=True)
        ranked_d = [d for d in sorted(self.D, reverse=True) if d > 0]
        if ranked_c != ranked_d:
            raise ValueError(f"rank(C) != rank(D): {self.C} vs {self.D}")


def sample_counts(
    block_sizes: Sequence[int],
    sample: Sequence[int] | None = None,
    rng=None,
    k: int | None = None,
) -> SampleCounts:
    """Count an ordered with-replacement sample of elements against blocks.

    Blocks are consecutive runs of 1..N in the order given by block_sizes;
    pass an explicit element sample, or an rng plus k to draw one uniformly.
    """
    sizes = [int(s) for s in block_sizes]
    if any(s <= 0 for s in sizes):
        raise ValueError("block sizes must be positive")
    total = sum(sizes)
    if sample is None:
        if rng is None or k is None:
            raise ValueError("need either an explicit sample or rng and k")
        sample = [int(x) for x in rng.integers(1, total + 1, size=k)]
    bounds = np.cumsum(sizes)

    def block_of(element: int) -> int:
        if not 1 <= element <= total:
            raise ValueError(f"element {element} outside 1..{total}")
        return int(np.searchsorted(bounds, element))

    hits = [block_of(x) for x in sample]
    first_order = []
    for b in hits:
        if b not in first_order:
            first_order.append(b)
    c = tuple(hits.count(b) for b in first_order)
    size_order = sorted(range(len(sizes)), key=lambda b: (-sizes[b], b))
    d = tuple(hits.count(b) for b in size_order)
    m = tuple(sizes[b] for b in size_order)
    return SampleCounts(c, d, m)


def ks_statistic(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of samples against a cdf."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.array([cdf(x) for x in xs])
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
