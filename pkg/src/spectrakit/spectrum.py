"""Atomic spectra of boundary-matrix extensions via eigenphase tracking.

The extension with boundary matrix ``B`` has pure point spectrum: the real
zero set of ``det(I - M(lam))`` with characteristic matrix

    ``M(lam) = D_beta(lam)* B D_alpha(lam)``.

``M(lam)`` is unitary, and each of its eigenvalue arguments ``theta_k(lam)``
is strictly decreasing with slope in ``[-2 pi max_len, -2 pi min_len]``
(the slope at an eigenvector ``u`` is ``-2 pi sum_i |u_i|^2 len_i``), while
``det M(lam) = det(B) exp(-2 pi i lam |Omega|)`` exactly.  The solver scans
a grid coarse enough that each phase moves by at most ``pi/2`` per step and
the phases jointly move by less than ``pi`` (which pins down the matching),
assigns eigenangles between nodes, brackets every crossing of ``2 pi Z``,
and bisects.  The determinant winding audits that no crossing was lost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .boundary import has_period, phase_vector, require_unitary, UNITARITY_TOL
from .errors import NonUnitaryInput, NotAnEigenvalue, WindingMismatch
from .intervals import IntervalUnion

_TWO_PI = 2.0 * np.pi

#: Singular values of I - M(lam) below KERNEL_TOL_PER_DIM * n count as kernel.
KERNEL_TOL_PER_DIM = 1e-7

#: Angular threshold for "kernel parallel to the all-ones vector".
ONES_ALIGNMENT_TOL = 1e-7


@dataclass(frozen=True)
class SpectrumPoint:
    """One atom of the spectrum with its characteristic-kernel basis."""

    lam: float
    multiplicity: int
    kernel_basis: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class StepExponential:
    """Eigenfunction shape: coefficients ``c_i`` on each component times
    ``exp(2 pi i lam t)``."""

    frequency: float
    coefficients: np.ndarray
    omega: IntervalUnion

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values; zero outside the union."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for c, (a, b) in zip(self.coefficients, self.omega.intervals):
            mask = (x > a) & (x < b)
            out[mask] = c * np.exp(2j * np.pi * self.frequency * x[mask])
        return out

    def boundary_residual(self, b: np.ndarray) -> float:
        """Max-norm of ``B f(alpha) - f(beta)`` for this eigenfunction."""
        f_alpha = self.coefficients * phase_vector(self.omega.alpha, self.frequency)
        f_beta = self.coefficients * phase_vector(self.omega.beta, self.frequency)
        return float(np.max(np.abs(np.asarray(b) @ f_alpha - f_beta)))


@dataclass(frozen=True)
class EigenphaseTrack:
    """Continuous eigenangle tracks of the characteristic matrix on a grid."""

    grid: np.ndarray
    phases: np.ndarray  # (len(grid), n), decreasing along axis 0


@dataclass(frozen=True)
class SpectralityResult:
    """Outcome of the one-dimensional-kernel test over a window."""

    is_spectral: bool
    witness: SpectrumPoint | None = None

    def __bool__(self) -> bool:
        return self.is_spectral


def char_matrix(b: np.ndarray, omega: IntervalUnion, lam: float) -> np.ndarray:
    """Characteristic matrix ``D_beta(lam)* B D_alpha(lam)``; ``M(0) = B``."""
    b = np.asarray(b, dtype=complex)
    eb = phase_vector(omega.beta, lam).conj()
    ea = phase_vector(omega.alpha, lam)
    return eb[:, None] * b * ea[None, :]


def char_matrices(b: np.ndarray, omega: IntervalUnion, lams: np.ndarray) -> np.ndarray:
    """Stacked characteristic matrices for a vector of frequencies."""
    b = np.asarray(b, dtype=complex)
    lams = np.asarray(lams, dtype=float)
    eb = np.exp(-2j * np.pi * np.outer(lams, omega.beta))
    ea = np.exp(2j * np.pi * np.outer(lams, omega.alpha))
    return eb[:, :, None] * b[None, :, :] * ea[:, None, :]


def default_grid_step(omega: IntervalUnion) -> float:
    """Largest scan step keeping per-track motion below pi/2 and joint
    motion below pi/2 (so the inter-node matching is unambiguous)."""
    return min(1.0 / (4.0 * omega.max_length), 1.0 / (4.0 * omega.measure))


def eigenphase_tracks(
    b: np.ndarray,
    omega: IntervalUnion,
    window: tuple[float, float],
    grid_step: float | None = None,
) -> EigenphaseTrack:
    """Track the eigenangles of the characteristic matrix over a window.

    Raises :class:`WindingMismatch` when the tracking cannot be completed
    consistently at this grid step.
    """
    b = require_unitary(b, what="boundary matrix")
    a, bb = float(window[0]), float(window[1])
    if not bb > a:
        raise ValueError(f"window must satisfy b > a, got {window}")
    h = float(grid_step) if grid_step else default_grid_step(omega)
    count = int(np.ceil((bb - a) / h)) + 3
    grid = a - h + h * np.arange(count)
    angles = np.angle(np.linalg.eigvals(char_matrices(b, omega, grid)))
    max_step = _TWO_PI * omega.max_length * h * (1 + 1e-9)
    theta = _kernels.track_grid(angles, max_step)
    if np.isnan(theta[-1]).any():
        raise WindingMismatch(
            f"eigenphase matching failed at grid step {h}; retry with a smaller step"
        )
    drop = float(np.sum(theta[0] - theta[-1]))
    expected = _TWO_PI * omega.measure * (grid[-1] - grid[0])
    if abs(drop - expected) > _TWO_PI * (1e-9 * count + 1e-7):
        raise WindingMismatch(
            f"tracked phase drop {drop:.12g} disagrees with determinant winding "
            f"{expected:.12g}; retry with a smaller step"
        )
    return EigenphaseTrack(grid=grid, phases=theta)


def _bisect_crossing(
    b: np.ndarray,
    omega: IntervalUnion,
    lam_l: float,
    lam_r: float,
    theta_l: np.ndarray,
    track: int,
    target: float,
    lam_tol: float,
) -> float:
    """Refine one crossing ``theta_track(lam) = target`` inside a bracket."""
    slope = _TWO_PI * omega.max_length
    for _ in range(90):
        if lam_r - lam_l <= lam_tol:
            break
        mid = 0.5 * (lam_l + lam_r)
        angles = np.angle(np.linalg.eigvals(char_matrix(b, omega, mid)))
        disp = _kernels.match_step(theta_l % _TWO_PI, angles % _TWO_PI,
                                   slope * (mid - lam_l) * (1 + 1e-9))
        if np.isnan(disp[0]):
            raise WindingMismatch("eigenphase matching failed during bisection")
        theta_mid = theta_l - disp
        if theta_mid[track] >= target:
            lam_l, theta_l = mid, theta_mid
        else:
            lam_r = mid
    return 0.5 * (lam_l + lam_r)


def _kernel_at(b: np.ndarray, omega: IntervalUnion, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Singular values (ascending) and right singular vectors of I - M(lam)."""
    m = char_matrix(b, omega, lam)
    _, s, vh = np.linalg.svd(np.eye(omega.n) - m)
    return s[::-1], vh[::-1].conj()


def solve_spectrum(
    b: np.ndarray,
    omega: IntervalUnion,
    window: tuple[float, float],
    tol: float = 1e-9,
    grid_step: float | None = None,
) -> list[SpectrumPoint]:
    """All spectrum atoms in ``[a, b)``, sorted, with multiplicities.

    Points within ``tol`` of the left window edge are included, points
    within ``tol`` of the right edge belong to the next window.
    """
    track = eigenphase_tracks(b, omega, window, grid_step)
    grid, theta = track.grid, track.phases
    n = omega.n
    lam_tol = min(tol * 1e-2, 1e-12)
    crossings: list[float] = []
    for k in range(n):
        col = theta[:, k]
        floors = np.floor(col / _TWO_PI + 1e-13)
        for r in range(len(grid) - 1):
            if floors[r] > floors[r + 1]:
                target = floors[r] * _TWO_PI
                lam = _bisect_crossing(
                    b, omega, grid[r], grid[r + 1], theta[r].copy(), k, target, lam_tol
                )
                crossings.append(lam)
    a, bb = float(window[0]), float(window[1])
    crossings = sorted(c for c in crossings if a - tol <= c < bb - tol)
    points: list[SpectrumPoint] = []
    merge = max(1e-10, 10 * lam_tol)
    i = 0
    while i < len(crossings):
        j = i
        while j + 1 < len(crossings) and crossings[j + 1] - crossings[j] <= merge:
            j += 1
        lam = float(np.mean(crossings[i : j + 1]))
        mult = j - i + 1
        s, v = _kernel_at(b, omega, lam)
        basis = tuple(v[q] for q in range(min(mult, n)))
        points.append(SpectrumPoint(lam=lam, multiplicity=mult, kernel_basis=basis))
        i = j + 1
    return points


def eigenspace(
    b: np.ndarray,
    omega: IntervalUnion,
    lam: float,
    kernel_tol: float | None = None,
) -> list[StepExponential]:
    """Orthonormal step-exponential basis of the eigenspace at ``lam``.

    Raises :class:`NotAnEigenvalue` when the characteristic matrix has no
    numerical kernel there.
    """
    require_unitary(b, what="boundary matrix")
    thr = kernel_tol if kernel_tol is not None else KERNEL_TOL_PER_DIM * omega.n
    s, v = _kernel_at(b, omega, lam)
    dim = int(np.sum(s < thr))
    if dim == 0:
        raise NotAnEigenvalue(
            f"smallest singular value {s[0]:.3e} exceeds the kernel threshold {thr:.1e}"
        )
    return [
        StepExponential(frequency=float(lam), coefficients=v[q], omega=omega)
        for q in range(dim)
    ]


def is_spectral_matrix(
    b: np.ndarray,
    omega: IntervalUnion,
    window: tuple[float, float],
    tol: float = ONES_ALIGNMENT_TOL,
    grid_step: float | None = None,
) -> SpectralityResult:
    """Whether every kernel in the window is one-dimensional and spanned by
    the all-ones vector (the matrices that induce orthogonal exponential
    bases are exactly these)."""
    points = solve_spectrum(b, omega, window, grid_step=grid_step)
    return spectrality_of_points(points, omega.n, tol)


def spectrality_of_points(
    points: list[SpectrumPoint], n: int, tol: float = ONES_ALIGNMENT_TOL
) -> SpectralityResult:
    ones = np.ones(n) / np.sqrt(n)
    for pt in points:
        if pt.multiplicity != 1:
            return SpectralityResult(False, pt)
        v = pt.kernel_basis[0]
        residual = np.linalg.norm(ones - v * np.vdot(v, ones))
        if residual > tol:
            return SpectralityResult(False, pt)
    return SpectralityResult(True, None)


def detect_period(
    lam_points: np.ndarray,
    omega: IntervalUnion,
    b: np.ndarray,
    tol: float = 1e-9,
    matrix_tol: float = UNITARITY_TOL,
) -> float | None:
    """Smallest period ``k / |Omega|`` under which the point set and the
    boundary matrix are both invariant; None when nothing at or below a
    third of the window length qualifies."""
    lams = np.sort(np.asarray(lam_points, dtype=float))
    if lams.size < 2:
        return None
    span = lams[-1] - lams[0]
    k = 0
    while True:
        k += 1
        p = k / omega.measure
        if p > span / 3:
            return None
        if not has_period(b, omega, p, matrix_tol):
            continue

        def matches(shifted: np.ndarray) -> bool:
            if shifted.size == 0:
                return True
            idx = np.clip(np.searchsorted(lams, shifted), 0, lams.size - 1)
            near = np.minimum(
                np.abs(lams[idx] - shifted),
                np.abs(lams[np.maximum(idx - 1, 0)] - shifted),
            )
            return bool(np.all(near <= tol))

        up = lams + p
        down = lams - p
        if matches(up[up <= lams[-1] + tol]) and matches(down[down >= lams[0] - tol]):
            return p
