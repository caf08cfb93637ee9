"""Complete spectrality classification for two-interval unions.

After the affine normalization ``Omega = (0, w) u (w + rho, 1 + rho)`` with
``0 < w < 1`` and ``rho > 0``, the union is spectral exactly in two cases:

* ``rho`` integer and ``w != 1/2``: the unique spectrum containing 0 is
  ``Z`` and the boundary matrix is the flip ``[[0, 1], [1, 0]]``;
* ``w = 1/2`` and ``w + rho = l/2`` for an integer ``l``: the spectra
  containing 0 are ``{0, (2k+1)/l} + 2Z`` for ``k = 0..l-1``, with
  boundary matrices ``[[ (1+xi)/2, (1-xi)/2 ], [ (1-xi)/2, (1+xi)/2 ]]``,
  ``xi = exp(i pi (2k+1)/l)``.

When both conditions meet (``w = 1/2``, ``rho`` integral, so ``l`` odd)
the half-width case already enumerates every spectrum containing 0
(including ``Z``), so it takes precedence.

The closed-form translation action for the half-width case,

    ``(U(t)f, U(t)f(. + l/2))(x) = B^{a(x+t)} (f([x+t]), f([x+t] + l/2))``

with ``a(x)`` the count of half-unit steps and ``[x] = x - a(x)/2``, is
implemented directly so it can cross-check the generic fiber engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistencyDetected, OutOfRange, WrongCase
from .intervals import IntervalUnion, validate_union
from .pairs import PeriodicSpectrum, verify_orthogonality
from .spectrum import is_spectral_matrix, solve_spectrum
from .translation import SampledFunction
from . import _kernels

CASE_I = "case_i"
CASE_II = "case_ii"
NOT_SPECTRAL = "not_spectral"


def flip_matrix() -> np.ndarray:
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def half_case_xi(l: int, k: int) -> complex:
    return complex(np.exp(1j * np.pi * (2 * k + 1) / l))


def half_case_matrix(l: int, k: int, power: int = 1) -> np.ndarray:
    """Closed form of ``B^power`` for the half-width case: the entries are
    ``(1 +- xi^power) / 2``."""
    xi_pow = complex(np.exp(1j * np.pi * (2 * k + 1) * power / l))
    return np.array(
        [
            [(1 + xi_pow) / 2, (1 - xi_pow) / 2],
            [(1 - xi_pow) / 2, (1 + xi_pow) / 2],
        ]
    )


@dataclass(frozen=True)
class TwoIntervalCase:
    """Classification verdict with attached spectra and boundary matrices."""

    w: float
    rho: float
    verdict: str
    l: int | None = None
    spectra: tuple[PeriodicSpectrum, ...] = ()
    matrices: tuple[np.ndarray, ...] = ()
    conditioning_warning: str | None = None

    @property
    def omega(self) -> IntervalUnion:
        return validate_union([(0.0, self.w), (self.w + self.rho, 1.0 + self.rho)])

    @property
    def spectral(self) -> bool:
        return self.verdict != NOT_SPECTRAL


def classify(w: float, rho: float, tol: float = 1e-9) -> TwoIntervalCase:
    """Decide spectrality of ``(0, w) u (w + rho, 1 + rho)``.

    The verdict is discontinuous in ``(w, rho)``; inputs within ``10 tol``
    of a decision boundary get a conditioning warning attached.
    """
    if not (0.0 < w < 1.0):
        raise OutOfRange(f"w must lie in (0, 1), got {w}")
    if rho <= 0.0:
        raise OutOfRange(f"rho must be positive, got {rho}")
    warning = None
    w_dist = abs(w - 0.5)
    l_float = 2 * (w + rho)
    l_dist = abs(l_float - round(l_float))
    rho_dist = abs(rho - round(rho))
    if any(tol / 10 < d <= 10 * tol for d in (w_dist, l_dist, rho_dist)):
        warning = (
            "parameters sit near a classification boundary; "
            "the verdict is sensitive to input rounding at this tolerance"
        )

    if w_dist <= tol and l_dist <= tol:
        l = round(l_float)
        spectra = tuple(
            PeriodicSpectrum((0.0, (2 * k + 1) / l), 2.0) for k in range(l)
        )
        matrices = tuple(half_case_matrix(l, k) for k in range(l))
        return TwoIntervalCase(
            w=w, rho=rho, verdict=CASE_II, l=l, spectra=spectra,
            matrices=matrices, conditioning_warning=warning,
        )
    if rho_dist <= tol and round(rho) >= 1:
        return TwoIntervalCase(
            w=w, rho=rho, verdict=CASE_I,
            spectra=(PeriodicSpectrum((0.0,), 1.0),),
            matrices=(flip_matrix(),),
            conditioning_warning=warning,
        )
    return TwoIntervalCase(w=w, rho=rho, verdict=NOT_SPECTRAL, conditioning_warning=warning)


def normalize_two_intervals(omega: IntervalUnion) -> tuple[float, float, float, float]:
    """Affine parameters ``(w, rho, shift, scale)`` reducing a two-interval
    union to the normal form: ``x -> (x - shift) / scale``."""
    if omega.n != 2:
        raise OutOfRange(f"need exactly two intervals, got {omega.n}")
    shift = omega.intervals[0][0]
    scale = omega.measure
    (a1, b1), (a2, b2) = omega.intervals
    w = (b1 - a1) / scale
    rho = (a2 - b1) / scale
    return w, rho, shift, scale


def classify_union(omega: IntervalUnion, tol: float = 1e-9) -> TwoIntervalCase:
    """Classify a general two-interval union via its normal form."""
    w, rho, _, _ = normalize_two_intervals(omega)
    return classify(w, rho, tol)


def u_closed_form(
    case: TwoIntervalCase,
    k: int,
    t: float,
    f: SampledFunction,
) -> SampledFunction:
    """Closed-form translation action for the half-width case.

    ``f`` must be sampled on ``(0, 1/2) u (l/2, (l+1)/2)`` with a step
    dividing ``1/2``.  Independent of the generic fiber engine; the two
    must agree pointwise.
    """
    if case.verdict != CASE_II:
        raise WrongCase(f"closed form applies to the half-width case, not {case.verdict}")
    l = case.l
    if not 0 <= k < l:
        raise WrongCase(f"k must lie in 0..{l - 1}, got {k}")
    expected = ((0.0, 0.5), (l / 2.0, (l + 1) / 2.0))
    actual = f.omega.intervals
    if max(abs(x - y) for p, q in zip(actual, expected) for x, y in zip(p, q)) > 1e-9:
        raise WrongCase(f"function must be sampled on {expected}, got {actual}")
    m = round(0.5 / f.step)
    if abs(m * f.step - 0.5) > 1e-9 or f.xs.size != 2 * m:
        raise WrongCase("grid step must divide 1/2 with full sample coverage")

    base = f.xs[:m]
    comps = np.stack([f.values[:m], f.values[m:]])
    z = base + t
    a = np.floor(2 * z).astype(np.int64)
    z_mod = z - a / 2.0
    spill = z_mod >= 0.5
    a[spill] += 1
    z_mod[spill] -= 0.5
    # single segment on [0, 1/2): stencils stop at the cell edges
    idx = np.arange(m, dtype=np.int64)
    left_run = np.minimum(idx, 3)
    right_run = np.minimum(m - 1 - idx, 3)
    g = _kernels.interp_strata(comps, np.clip(z_mod, 0.0, np.nextafter(0.5, 0.0)),
                               f.step, left_run, right_run)
    xi_pow = np.exp(1j * np.pi * (2 * k + 1) * a / l)
    plus, minus = (1 + xi_pow) / 2, (1 - xi_pow) / 2
    out = np.concatenate([plus * g[0] + minus * g[1], minus * g[0] + plus * g[1]])
    return f.with_values(out)


@dataclass(frozen=True)
class CrossCheckEntry:
    k: int | None
    point_error: float
    spectral: bool
    gram_defect: float


@dataclass(frozen=True)
class CrossCheckReport:
    entries: tuple[CrossCheckEntry, ...]

    @property
    def passed(self) -> bool:
        return all(
            e.point_error <= 1e-9 and e.spectral and e.gram_defect <= 1e-9
            for e in self.entries
        )


def cross_check_with_pipeline(
    case: TwoIntervalCase,
    window: tuple[float, float] = (-4.0, 4.0),
) -> CrossCheckReport:
    """Confirm the attached closed forms against the generic machinery.

    For every attached matrix: the solved spectrum must reproduce the
    attached one on the window, the matrix must be spectral, and the
    normalized Gram matrix must be the identity.  Raises
    :class:`InconsistencyDetected` on any disagreement (which would mean
    an implementation bug, not a property of the input).
    """
    if case.verdict == NOT_SPECTRAL:
        raise WrongCase("nothing to cross-check for a non-spectral union")
    omega = case.omega
    entries = []
    for idx, (spec, b) in enumerate(zip(case.spectra, case.matrices)):
        expected = spec.points_in(window)
        points = solve_spectrum(b, omega, window)
        got = np.array([p.lam for p in points])
        if got.size != expected.size:
            raise InconsistencyDetected(
                f"expected {expected.size} spectrum points in {window}, solver found {got.size}"
            )
        point_error = float(np.max(np.abs(got - expected))) if got.size else 0.0
        spectral = bool(is_spectral_matrix(b, omega, window))
        gram = verify_orthogonality(omega, spec, truncation=32)
        entries.append(
            CrossCheckEntry(
                k=idx if case.verdict == CASE_II else None,
                point_error=point_error,
                spectral=spectral,
                gram_defect=gram,
            )
        )
        if point_error > 1e-9 or not spectral or gram > 1e-9:
            raise InconsistencyDetected(
                f"closed form {idx} disagrees with the pipeline: "
                f"point_error={point_error:.3e}, spectral={spectral}, gram={gram:.3e}"
            )
    return CrossCheckReport(entries=tuple(entries))
