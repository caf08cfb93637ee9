"""Verification of spectral pairs (Omega, Lambda).

Closed-form exponential inner products on interval unions, Gram matrices,
Parseval defects against a named test-function battery, Beurling density,
the finite-set spectral-pair test, a grid search for lattice-aligned
spectra, and the end-to-end pipeline seed frequencies -> boundary matrix
-> spectrum -> verification report.

Completeness of an exponential family is not decidable by finitely many
floating-point operations; the strongest desk-scale certificate combines
exact pairwise orthogonality, the correct point density, and Parseval
defects that decay with the truncation size on a fixed battery of test
functions.  That combination is what :func:`full_pipeline` reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import SpectrumPointsMatrix, b_from_spectrum_points, UNITARITY_TOL
from .errors import (
    NotASpectrum,
    NotLatticeAligned,
    SingularMalpha,
    SizeMismatch,
    ZeroFunction,
)
from .intervals import IntervalUnion
from .spectrum import detect_period, solve_spectrum, spectrality_of_points

#: Battery identifier recorded in verification reports.
BATTERY_NAME = "dyadic-indicators+monomials+random-steps"
BATTERY_VERSION = 1


@dataclass(frozen=True)
class PeriodicSpectrum:
    """Frequency set ``{reps} + period * Z`` with representatives in
    ``[0, period)``."""

    reps: tuple[float, ...]
    period: float

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")
        reps = tuple(float(r) for r in self.reps)
        if not reps:
            raise ValueError("at least one representative is required")
        if any(r < -1e-12 or r >= self.period for r in reps):
            raise ValueError(f"representatives must lie in [0, {self.period}), got {reps}")
        if sorted(reps) != list(reps):
            object.__setattr__(self, "reps", tuple(sorted(reps)))
        gaps = np.diff(np.asarray(self.reps))
        if gaps.size and gaps.min() <= 1e-12:
            raise ValueError("representatives must be distinct")

    @property
    def m(self) -> int:
        return len(self.reps)

    @property
    def density(self) -> float:
        """Points per unit length: ``m / period``."""
        return self.m / self.period

    def points_in(self, window: tuple[float, float]) -> np.ndarray:
        """All points in ``[a, b)``, sorted."""
        a, b = window
        k_lo = math.floor((a - max(self.reps)) / self.period)
        k_hi = math.ceil((b - min(self.reps)) / self.period)
        pts = [
            r + k * self.period
            for k in range(k_lo, k_hi + 1)
            for r in self.reps
            if a <= r + k * self.period < b
        ]
        return np.array(sorted(pts))

    def enumerate(self, count: int) -> np.ndarray:
        """First ``count`` points ordered by increasing ``|lam|``, ties
        broken toward the positive one."""
        radius = (count / self.m + 2) * self.period
        pts = self.points_in((-radius, radius))
        order = sorted(range(pts.size), key=lambda i: (abs(pts[i]), pts[i] < 0))
        return pts[np.array(order[:count])]

    def translate(self, shift: float) -> "PeriodicSpectrum":
        reps = sorted((r + shift) % self.period for r in self.reps)
        return PeriodicSpectrum(tuple(reps), self.period)

    def scale(self, factor: float) -> "PeriodicSpectrum":
        return PeriodicSpectrum(tuple(r * factor for r in self.reps), self.period * factor)


@dataclass(frozen=True)
class VerificationReport:
    """Desk-scale spectral-pair certificate."""

    gram_defect: float
    parseval_defects: dict[str, float]
    density_estimate: float
    passed: bool
    gram_threshold: float
    parseval_threshold: float
    density_threshold: float
    truncation: int
    battery: str = BATTERY_NAME
    battery_version: int = BATTERY_VERSION


def exp_inner_product(omega: IntervalUnion, lam: float, mu: float) -> complex:
    """Inner product of the exponentials with frequencies ``lam`` and ``mu``.

    Uses the cancellation-free product form
    ``sum_i len_i exp(pi i d (a_i + b_i)) sinc(d len_i)`` with
    ``d = lam - mu``, which degrades gracefully to the measure at ``d = 0``.
    """
    d = lam - mu
    lengths = omega.lengths
    centers = omega.alpha + omega.beta
    return complex(
        np.sum(lengths * np.exp(1j * np.pi * d * centers) * np.sinc(d * lengths))
    )


def gram_matrix(omega: IntervalUnion, lam_finite) -> np.ndarray:
    """Hermitian Gram matrix of exponentials; diagonal equals the measure."""
    lams = np.asarray(lam_finite, dtype=float)
    d = lams[:, None] - lams[None, :]
    lengths = omega.lengths
    centers = omega.alpha + omega.beta
    return np.sum(
        lengths[None, None, :]
        * np.exp(1j * np.pi * d[:, :, None] * centers[None, None, :])
        * np.sinc(d[:, :, None] * lengths[None, None, :]),
        axis=2,
    )


def verify_orthogonality(
    omega: IntervalUnion,
    spectrum: PeriodicSpectrum,
    truncation: int = 64,
) -> float:
    """Largest normalized off-diagonal Gram entry over the first
    ``truncation`` spectrum points (enumerated by ``|lam|``)."""
    lams = spectrum.enumerate(truncation)
    g = gram_matrix(omega, lams) / omega.measure
    np.fill_diagonal(g, 0.0)
    return float(np.max(np.abs(g)))


def assert_spectrum(
    omega: IntervalUnion,
    spectrum: PeriodicSpectrum,
    truncation: int = 32,
    tol: float = 1e-7,
    require_zero: bool = True,
) -> None:
    """Raise :class:`NotASpectrum` unless the pair passes orthogonality and
    density checks (and contains 0 when ``require_zero``)."""
    if require_zero and spectrum.reps[0] > 1e-9:
        raise NotASpectrum(f"spectrum does not contain 0: smallest rep {spectrum.reps[0]}")
    defect = verify_orthogonality(omega, spectrum, truncation)
    if defect > tol:
        raise NotASpectrum(f"orthogonality defect {defect:.3e} exceeds {tol:.1e}")
    if abs(spectrum.density - omega.measure) > 1e-9:
        raise NotASpectrum(
            f"density {spectrum.density} differs from the measure {omega.measure}"
        )


# --------------------------------------------------------------------------
# test functions with closed-form exponential coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Indicator:
    """Characteristic function of ``(a, b)``, clipped to the union."""

    a: float
    b: float
    label: str = ""

    def coefficient(self, omega: IntervalUnion, lam: float) -> complex:
        total = 0.0 + 0.0j
        for ia, ib in omega.intervals:
            lo, hi = max(self.a, ia), min(self.b, ib)
            if hi > lo:
                total += (hi - lo) * np.exp(-1j * np.pi * lam * (lo + hi)) * np.sinc(
                    lam * (hi - lo)
                )
        return complex(total)

    def norm_sq(self, omega: IntervalUnion) -> float:
        return sum(
            max(0.0, min(self.b, ib) - max(self.a, ia)) for ia, ib in omega.intervals
        )


def _monomial_integral(k: int, a: float, b: float, lam: float) -> complex:
    """Closed form of the k-th monomial against a conjugated exponential."""
    if lam == 0.0:
        return (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    w = -2j * np.pi * lam
    total = 0.0 + 0.0j
    # repeated integration by parts
    term_b, term_a = np.exp(w * b), np.exp(w * a)
    coeff = 1.0
    pow_b, pow_a = b ** k, a ** k
    for j in range(k, -1, -1):
        total += coeff * (pow_b * term_b - pow_a * term_a) / w
        coeff *= -j / w
        pow_b = b ** (j - 1) if j >= 1 else 0.0
        pow_a = a ** (j - 1) if j >= 1 else 0.0
    return complex(total)


@dataclass(frozen=True)
class Monomial:
    """Power function ``t^k`` restricted to the union."""

    k: int
    label: str = ""

    def coefficient(self, omega: IntervalUnion, lam: float) -> complex:
        return complex(
            sum(_monomial_integral(self.k, a, b, lam) for a, b in omega.intervals)
        )

    def norm_sq(self, omega: IntervalUnion) -> float:
        return float(
            sum(
                (b ** (2 * self.k + 1) - a ** (2 * self.k + 1)) / (2 * self.k + 1)
                for a, b in omega.intervals
            )
        )


@dataclass(frozen=True)
class StepFunction:
    """Finite linear combination of indicators."""

    pieces: tuple[tuple[float, float, complex], ...]  # (a, b, weight), disjoint
    label: str = ""

    def coefficient(self, omega: IntervalUnion, lam: float) -> complex:
        return complex(
            sum(w * Indicator(a, b).coefficient(omega, lam) for a, b, w in self.pieces)
        )

    def norm_sq(self, omega: IntervalUnion) -> float:
        return float(
            sum(abs(w) ** 2 * Indicator(a, b).norm_sq(omega) for a, b, w in self.pieces)
        )


def parseval_defect(
    omega: IntervalUnion,
    spectrum,
    f,
    truncation: int = 256,
) -> float:
    """Energy fraction of ``f`` missed by the first ``truncation``
    frequencies: ``1 - sum |<f, e_lam>|^2 / (|Omega| ||f||^2)``.

    ``spectrum`` may be a :class:`PeriodicSpectrum` or an explicit sequence
    of frequencies (enumerated by ``|lam|`` either way).  ``f`` may be any
    object with closed-form ``coefficient(omega, lam)`` and
    ``norm_sq(omega)`` (see :class:`Indicator`, :class:`Monomial`,
    :class:`StepFunction`) or a sampled function exposing
    ``exp_coefficient(lam)`` and ``norm_sq()`` quadrature approximations.
    """
    if isinstance(spectrum, PeriodicSpectrum):
        lams = spectrum.enumerate(truncation)
    else:
        pts = np.asarray(spectrum, dtype=float)
        order = sorted(range(pts.size), key=lambda i: (abs(pts[i]), pts[i] < 0))
        lams = pts[np.array(order[:truncation])]
    if hasattr(f, "coefficient"):
        norm_sq = f.norm_sq(omega)
        coeffs = np.array([f.coefficient(omega, lam) for lam in lams])
    else:
        norm_sq = f.norm_sq()
        coeffs = np.array([f.exp_coefficient(lam) for lam in lams])
    if norm_sq <= 0:
        raise ZeroFunction("test function has zero norm")
    return float(1.0 - np.sum(np.abs(coeffs) ** 2) / (omega.measure * norm_sq))


def beurling_density(spectrum, window_length: float = 0.0) -> float:
    """Asymptotic number of frequencies per unit length.

    Exact ``m / period`` for a periodic spectrum; a centered-window count
    for an explicit point list (``window_length`` required then).
    """
    if isinstance(spectrum, PeriodicSpectrum):
        return spectrum.density
    pts = np.asarray(spectrum, dtype=float)
    if window_length <= 0:
        raise ValueError("window_length is required for explicit point lists")
    half = window_length / 2
    return float(np.sum((pts >= -half) & (pts < half)) / window_length)


def finite_set_spectrum_check(a_set, l_set, tol: float = 1e-9) -> bool:
    """Whether two equal-size finite sets form a spectral pair, i.e. the
    matrix ``(exp(2 pi i a l)) / sqrt(|A|)`` is unitary within ``tol``."""
    a_arr = np.asarray(a_set, dtype=float)
    l_arr = np.asarray(l_set, dtype=float)
    if a_arr.size != l_arr.size:
        raise SizeMismatch(f"sets have sizes {a_arr.size} and {l_arr.size}")
    m = np.exp(2j * np.pi * np.outer(a_arr, l_arr)) / math.sqrt(a_arr.size)
    defect = np.max(np.abs(m @ m.conj().T - np.eye(a_arr.size)))
    return bool(defect <= tol)


def standard_battery(omega: IntervalUnion, seed: int = 7) -> list:
    """Named test functions used by the Parseval certificate."""
    lo = omega.intervals[0][0]
    hi = omega.intervals[-1][1]
    span = hi - lo
    battery = [
        Indicator(lo, lo + span / 2, label="indicator-left-half"),
        Indicator(lo + span / 4, lo + span / 2, label="indicator-dyadic-quarter"),
        Indicator(lo + span / 8, lo + 3 * span / 8, label="indicator-dyadic-eighth"),
        Monomial(1, label="monomial-t"),
        Monomial(2, label="monomial-t2"),
    ]
    rng = np.random.default_rng(seed)
    edges = np.sort(rng.uniform(lo, hi, 5))
    weights = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    pieces = tuple(
        (float(a), float(b), complex(w))
        for a, b, w in zip(edges, edges[1:], weights)
    )
    battery.append(StepFunction(pieces, label="random-step"))
    return battery


@dataclass(frozen=True)
class PipelineResult:
    """Outcome of the seed-to-verified-pair pipeline."""

    ok: bool
    reason: str | None = None
    spectrum: PeriodicSpectrum | None = None
    matrix: np.ndarray | None = None
    report: VerificationReport | None = None
    construction: SpectrumPointsMatrix | None = None
    witness_lambda: float | None = None


def build_verification_report(
    omega: IntervalUnion,
    spectrum: PeriodicSpectrum,
    truncation: int = 64,
    gram_threshold: float = 1e-9,
    parseval_threshold: float = 0.02,
    density_threshold: float = 1e-9,
    parseval_truncation: int = 256,
) -> VerificationReport:
    """Run the orthogonality / density / Parseval battery on a pair."""
    gram_defect = verify_orthogonality(omega, spectrum, truncation)
    density = beurling_density(spectrum)
    defects: dict[str, float] = {}
    decay_ok = True
    for f in standard_battery(omega):
        d_half = parseval_defect(omega, spectrum, f, parseval_truncation // 2)
        d_full = parseval_defect(omega, spectrum, f, parseval_truncation)
        defects[f.label] = d_full
        if d_full > parseval_threshold or d_full > d_half + 1e-12:
            decay_ok = False
    passed = (
        gram_defect <= gram_threshold
        and abs(density - omega.measure) <= density_threshold
        and decay_ok
    )
    return VerificationReport(
        gram_defect=gram_defect,
        parseval_defects=defects,
        density_estimate=density,
        passed=passed,
        gram_threshold=gram_threshold,
        parseval_threshold=parseval_threshold,
        density_threshold=density_threshold,
        truncation=parseval_truncation,
    )


def spectrum_from_points(
    points: np.ndarray, period: float, tol: float = 1e-9
) -> PeriodicSpectrum:
    """Collapse solved spectrum points to representatives modulo the period."""
    reps = np.sort(np.mod(np.asarray(points, dtype=float), period))
    keep: list[float] = []
    for r in reps:
        if not keep or r - keep[-1] > 10 * tol:
            keep.append(float(r))
    if keep and period - keep[-1] + keep[0] <= 10 * tol:
        # first and last representative coincide modulo the period
        keep[0] = min(keep[0], keep[-1] - period)
        keep.pop()
    if keep and abs(keep[0]) <= 10 * tol:
        keep[0] = 0.0
    return PeriodicSpectrum(tuple(keep), period)


def full_pipeline(
    omega: IntervalUnion,
    lam_seed,
    window: tuple[float, float] = (-8.0, 8.0),
    tol: float = 1e-9,
    unitarity_tol: float = UNITARITY_TOL,
) -> PipelineResult:
    """Seed frequencies -> candidate boundary matrix -> spectrum -> report.

    Fails fast (with the recorded reason) when the candidate matrix is not
    unitary or some characteristic kernel is not spanned by the all-ones
    vector; both conditions are necessary for a spectral pair.
    """
    try:
        construction = b_from_spectrum_points(omega, lam_seed, unitarity_tol)
    except SingularMalpha as exc:
        return PipelineResult(ok=False, reason=f"singular seed matrix: {exc}")
    if not construction.unitary:
        return PipelineResult(
            ok=False,
            reason=f"matrix not unitary (defect {construction.unitarity_defect:.3e})",
            construction=construction,
        )
    b = construction.matrix
    points = solve_spectrum(b, omega, window, tol)
    spectrality = spectrality_of_points(points, omega.n)
    if not spectrality:
        lam = spectrality.witness.lam if spectrality.witness else None
        return PipelineResult(
            ok=False,
            reason="matrix not spectral (characteristic kernel not spanned by ones)",
            matrix=b,
            construction=construction,
            witness_lambda=lam,
        )
    lams = np.array([p.lam for p in points])
    period = detect_period(lams, omega, b, tol)
    if period is None:
        return PipelineResult(
            ok=False, reason="no period detected in the window", matrix=b,
            construction=construction,
        )
    spectrum = spectrum_from_points(lams, period, tol)
    report = build_verification_report(omega, spectrum)
    return PipelineResult(
        ok=report.passed,
        reason=None if report.passed else "verification thresholds not met",
        spectrum=spectrum,
        matrix=b,
        report=report,
        construction=construction,
    )


def lattice_spectrum_search(
    omega: IntervalUnion,
    p: int,
    q: int,
    tol: float = 1e-9,
    lattice_tol: float = 1e-9,
) -> list[PeriodicSpectrum]:
    """All period-``p`` spectra with representatives on the grid
    ``{k/q : 0 <= k < p q}`` for a union with endpoints in ``(1/p)Z``.

    The fiber of cells occupied by the union is constant for such a union,
    so a representative set qualifies exactly when it forms a finite
    spectral pair with the rescaled fiber; survivors are confirmed by the
    Gram test on the union itself.
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive integers")
    scaled = omega.endpoints * p
    if np.max(np.abs(scaled - np.round(scaled))) > lattice_tol * p:
        raise NotLatticeAligned(
            f"endpoints {omega.endpoints.tolist()} are not multiples of 1/{p}"
        )
    cells: list[int] = []
    for a, b in omega.intervals:
        lo, hi = round(a * p), round(b * p)
        cells.extend(range(lo, hi))
    if len(cells) != p:
        raise NotLatticeAligned(
            f"the union occupies {len(cells)} lattice cells but p={p}; "
            "a period-p spectrum needs measure 1"
        )
    fiber = np.asarray(cells, dtype=float) / p

    # admissible pairwise differences on the grid: character sum vanishes
    grid = np.arange(1, p * q) / q
    sums = np.abs(np.exp(2j * np.pi * np.outer(fiber, grid)).sum(axis=0))
    admissible = {round(g * q) for g, s in zip(grid, sums) if s <= p * tol}

    found: list[PeriodicSpectrum] = []
    candidates = sorted(admissible)

    def extend(chosen: list[int]) -> None:
        if len(chosen) == p:
            reps = tuple(c / q for c in chosen)
            if finite_set_spectrum_check(fiber, reps, tol):
                spec = PeriodicSpectrum(reps, float(p))
                if verify_orthogonality(omega, spec, truncation=8 * p) <= 1e-7:
                    found.append(spec)
            return
        for c in candidates:
            if c <= chosen[-1]:
                continue
            if all((c - prev) % (p * q) in admissible for prev in chosen):
                extend(chosen + [c])

    extend([0])
    return found
