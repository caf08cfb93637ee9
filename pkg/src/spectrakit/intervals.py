"""Finite unions of open intervals and their modular geometry.

The central object is :class:`IntervalUnion`, an ordered disjoint union
``(a_1,b_1) u ... u (a_n,b_n)``.  On top of it this module provides the
congruence ``t = s  (mod 1/p)``, fiber sets ``{k : x + k/p in Omega}``,
exact p-tiling tests, the cycle-following rearrangement that turns a union
with matching endpoint congruences into a lattice-length union, and the
measure-preserving interval swap that moves one component next to another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BoundaryPoint,
    CongruenceViolated,
    CycleOverlap,
    EmptyInput,
    EmptyInterval,
    NonpositivePeriod,
    NoUniquePartner,
    OverlappingIntervals,
    UnnormalizedMeasure,
)

#: Distance below which a point is considered to sit on an interval endpoint.
BOUNDARY_TOL = 1e-12

#: Default tolerance for the congruence test on p*(t - s).
CONGRUENCE_TOL = 1e-9

#: Default number of stratified sample points for the tiling test.
TILE_SAMPLES = 4096


@dataclass(frozen=True)
class IntervalUnion:
    """Ordered union of open intervals with strictly positive lengths.

    Intervals are sorted and non-overlapping; touching endpoints
    (``b_i == a_{i+1}``) are allowed, which keeps the component count
    meaningful for boundary conditions even when the set differs from a
    single interval only by finitely many points.
    """

    intervals: tuple[tuple[float, float], ...]

    @property
    def n(self) -> int:
        return len(self.intervals)

    @property
    def alpha(self) -> np.ndarray:
        """Vector of left endpoints."""
        return np.array([a for a, _ in self.intervals], dtype=float)

    @property
    def beta(self) -> np.ndarray:
        """Vector of right endpoints."""
        return np.array([b for _, b in self.intervals], dtype=float)

    @property
    def lengths(self) -> np.ndarray:
        return self.beta - self.alpha

    @property
    def measure(self) -> float:
        """Total length, summed with compensated accumulation."""
        return float(math.fsum(b - a for a, b in self.intervals))

    @property
    def endpoints(self) -> np.ndarray:
        """All 2n boundary points in increasing order of the intervals."""
        return np.array([e for ab in self.intervals for e in ab], dtype=float)

    @property
    def max_length(self) -> float:
        return float(np.max(self.lengths))

    @property
    def min_length(self) -> float:
        return float(np.min(self.lengths))

    def contains(self, x: float, margin: float = 0.0) -> bool:
        """Whether ``x`` lies strictly inside some component.

        ``margin > 0`` shrinks every component by that amount on both
        sides, so points too close to the boundary are rejected.
        """
        return any(a + margin < x < b - margin for a, b in self.intervals)

    def component_of(self, x: float, margin: float = 0.0) -> int:
        """Index of the component containing ``x``, or -1."""
        for i, (a, b) in enumerate(self.intervals):
            if a + margin < x < b - margin:
                return i
        return -1

    def boundary_distance(self, x: float) -> float:
        """Distance from ``x`` to the nearest endpoint."""
        return float(np.min(np.abs(self.endpoints - x)))

    def translate(self, shift: float) -> "IntervalUnion":
        return IntervalUnion(tuple((a + shift, b + shift) for a, b in self.intervals))

    def scale(self, factor: float) -> "IntervalUnion":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return IntervalUnion(tuple((a * factor, b * factor) for a, b in self.intervals))


@dataclass(frozen=True)
class FiberSet:
    """Integers ``k`` with ``x + k/p`` inside the union, for one base point."""

    base_point: float
    period: float
    members: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.members)

    def points(self) -> np.ndarray:
        """The actual fiber locations ``x + k/p``."""
        return self.base_point + np.asarray(self.members, dtype=float) / self.period


def validate_union(raw_intervals: Sequence[Sequence[float]]) -> IntervalUnion:
    """Sort raw (a, b) pairs into a valid :class:`IntervalUnion`.

    Raises :class:`EmptyInput`, :class:`EmptyInterval` (``b <= a``) or
    :class:`OverlappingIntervals` (a left endpoint strictly inside the
    previous interval).
    """
    pairs = [(float(a), float(b)) for a, b in raw_intervals]
    if not pairs:
        raise EmptyInput("at least one interval is required")
    for a, b in pairs:
        if not (math.isfinite(a) and math.isfinite(b)):
            raise EmptyInterval(f"interval ({a}, {b}) has non-finite endpoints")
        if b <= a:
            raise EmptyInterval(f"interval ({a}, {b}) has nonpositive length")
    pairs.sort()
    for (a1, b1), (a2, b2) in zip(pairs, pairs[1:]):
        if a2 < b1:
            raise OverlappingIntervals(
                f"intervals ({a1}, {b1}) and ({a2}, {b2}) overlap"
            )
    return IntervalUnion(tuple(pairs))


def congruent_mod(t: float, s: float, p: float, tol: float = CONGRUENCE_TOL) -> bool:
    """Whether ``p * (t - s)`` is an integer within ``tol``."""
    if p <= 0:
        raise NonpositivePeriod(f"period must be positive, got {p}")
    z = p * (t - s)
    return abs(z - round(z)) <= tol


def fiber_set(
    omega: IntervalUnion,
    p: float,
    x: float,
    boundary_tol: float = BOUNDARY_TOL,
) -> FiberSet:
    """All integers ``k`` with ``x + k/p`` strictly inside ``omega``.

    Raises :class:`BoundaryPoint` when some candidate lands within
    ``boundary_tol`` of an endpoint; callers should perturb ``x``.
    """
    if p <= 0:
        raise NonpositivePeriod(f"period must be positive, got {p}")
    alpha1 = omega.intervals[0][0]
    betan = omega.intervals[-1][1]
    k_lo = math.ceil(p * (alpha1 - x)) - 1
    k_hi = math.floor(p * (betan - x)) + 1
    members = []
    for k in range(k_lo, k_hi + 1):
        t = x + k / p
        if omega.boundary_distance(t) <= boundary_tol:
            raise BoundaryPoint(
                f"fiber point {t} (k={k}) is within {boundary_tol} of the boundary"
            )
        if omega.contains(t):
            members.append(k)
    return FiberSet(base_point=x, period=p, members=tuple(members))


def _breakpoints_mod(omega: IntervalUnion, p: float) -> np.ndarray:
    """Endpoint images in [0, 1/p), sorted and deduplicated."""
    cell = 1.0 / p
    imgs = np.mod(omega.endpoints, cell)
    imgs = np.unique(np.concatenate([imgs, [0.0]]))
    # collapse images that coincide up to rounding
    keep = [imgs[0]]
    for v in imgs[1:]:
        if v - keep[-1] > 10 * BOUNDARY_TOL:
            keep.append(v)
    return np.array(keep)


def is_p_tile(
    omega: IntervalUnion,
    p: int,
    samples: int = TILE_SAMPLES,
    measure_tol: float = 1e-9,
) -> bool:
    """Whether ``omega`` covers almost every real point exactly ``p`` times
    under translations by ``(1/p)Z``.

    Requires total length one.  The fiber count is piecewise constant
    between endpoint images in ``[0, 1/p)``, so testing the midpoint of
    every stratum is exact; the stratified extra samples are a safety net.
    """
    if abs(omega.measure - 1.0) > measure_tol:
        raise UnnormalizedMeasure(
            f"p-tiling test requires measure 1, got {omega.measure}"
        )
    if p <= 0:
        raise NonpositivePeriod(f"p must be a positive integer, got {p}")
    cell = 1.0 / p
    brk = _breakpoints_mod(omega, p)
    edges = np.concatenate([brk, [cell]])
    test_points = [(a + b) / 2 for a, b in zip(edges, edges[1:]) if b - a > 4 * BOUNDARY_TOL]
    # stratified filler samples, nudged off the strata edges
    if samples > 0:
        grid = (np.arange(samples) + 0.5) * cell / samples
        test_points.extend(grid.tolist())
    for x in test_points:
        try:
            fs = fiber_set(omega, p, x)
        except BoundaryPoint:
            try:
                fs = fiber_set(omega, p, x + 10 * BOUNDARY_TOL)
            except BoundaryPoint:
                continue
        if fs.count != p:
            return False
    return True


def rearrange_to_lattice(
    omega: IntervalUnion,
    p: float,
    sigma: Sequence[int],
    tol: float = CONGRUENCE_TOL,
) -> tuple[np.ndarray, IntervalUnion]:
    """Translate each component by a multiple of ``1/p`` so that the merged
    result is a disjoint union of intervals with lengths in ``(1/p)Z``.

    ``sigma`` is a 0-based permutation with ``beta_i = alpha_{sigma[i]}
    (mod 1/p)`` for every ``i``; cycles of ``sigma`` are laid end to end,
    each new cycle placed just right of everything placed so far, at the
    smallest admissible multiple of ``1/p``.

    Returns the translation amounts ``k`` (multiples of ``1/p``) and the
    merged union.
    """
    n = omega.n
    if sorted(sigma) != list(range(n)):
        raise CongruenceViolated(f"sigma={sigma!r} is not a permutation of 0..{n - 1}")
    alpha, beta = omega.alpha, omega.beta
    for i in range(n):
        if not congruent_mod(beta[i], alpha[sigma[i]], p, tol):
            raise CongruenceViolated(
                f"beta_{i}={beta[i]} is not congruent to alpha_{sigma[i]}="
                f"{alpha[sigma[i]]} mod 1/{p}"
            )

    def snap(v: float) -> float:
        return round(v * p) / p

    k = np.full(n, np.nan)
    placed_max = -math.inf
    visited = [False] * n
    for start in range(n):
        if visited[start]:
            continue
        if math.isinf(placed_max):
            k[start] = 0.0
        else:
            # smallest multiple of 1/p putting this cycle right of the rest
            m = math.floor(p * (alpha[start] - placed_max))
            k[start] = snap(m / p)
        visited[start] = True
        cycle = [start]
        i = start
        while sigma[i] != start:
            j = sigma[i]
            k[j] = snap(alpha[j] - beta[i] + k[i])
            visited[j] = True
            cycle.append(j)
            i = j
        placed_max = max(placed_max, max(beta[i] - k[i] for i in cycle))

    moved = sorted((alpha[i] - k[i], beta[i] - k[i]) for i in range(n))
    for (a1, b1), (a2, b2) in zip(moved, moved[1:]):
        if a2 < b1 - 10 * BOUNDARY_TOL:
            raise CycleOverlap(
                f"translated intervals [{a1}, {b1}) and [{a2}, {b2}) overlap"
            )
    merged: list[list[float]] = [list(moved[0])]
    for a, b in moved[1:]:
        if a <= merged[-1][1] + 10 * BOUNDARY_TOL:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return k, IntervalUnion(tuple((a, b) for a, b in merged))


def swap_interval(
    omega: IntervalUnion,
    spectrum,
    i: int,
    tol: float = CONGRUENCE_TOL,
) -> IntervalUnion:
    """Move the unique congruent partner of component ``i`` next to it.

    ``spectrum`` must be a verified :class:`~spectrakit.pairs.PeriodicSpectrum`
    for ``omega`` containing 0.  If exactly one left endpoint ``alpha_j`` is
    congruent to ``beta_i`` modulo ``1/p``, component ``j`` is translated by
    ``beta_i - alpha_j``; the result is again spectral with the same
    spectrum.  Raises :class:`NoUniquePartner` otherwise.
    """
    from .pairs import assert_spectrum  # deferred: pairs imports this module

    assert_spectrum(omega, spectrum)
    p = spectrum.period
    alpha, beta = omega.alpha, omega.beta
    partners = [j for j in range(omega.n) if congruent_mod(beta[i], alpha[j], p, tol)]
    if len(partners) != 1:
        raise NoUniquePartner(
            f"beta_{i}={beta[i]} has {len(partners)} congruent left endpoints mod 1/{p}"
        )
    j = partners[0]
    shift = beta[i] - alpha[j]
    pairs = [
        (a + shift, b + shift) if idx == j else (a, b)
        for idx, (a, b) in enumerate(omega.intervals)
    ]
    return validate_union(pairs)
