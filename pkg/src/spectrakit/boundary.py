"""Unitary boundary matrices of selfadjoint derivative extensions.

A selfadjoint extension of the derivative operator ``(1/2 pi i) d/dx`` on a
union of ``n`` intervals is encoded by an ``n x n`` unitary matrix ``B``
acting between boundary values, ``B f(alpha) = f(beta)``.  This module
builds such matrices from deficiency-space isometries and from candidate
spectrum points, translates them, detects periods, and runs the structural
checks satisfied by matrices whose extension has a periodic spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import csr_matrix

from .errors import NonUnitaryInput, SingularFactor, SingularMalpha
from .intervals import IntervalUnion, congruent_mod

#: Shared max-norm tolerance for "is unitary" assertions.
UNITARITY_TOL = 1e-10

#: Condition-number guard for matrix inversions.
CONDITION_LIMIT = 1e12


def unitarity_defect(m: np.ndarray) -> float:
    """Max-norm of ``M M* - I``."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def require_unitary(m: np.ndarray, tol: float = UNITARITY_TOL, what: str = "matrix") -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if m.shape[0] != m.shape[1]:
        raise NonUnitaryInput(f"{what} is not square: shape {m.shape}")
    defect = unitarity_defect(m)
    if defect > tol:
        raise NonUnitaryInput(f"{what} fails unitarity: defect {defect:.3e} > {tol:.1e}")
    return m


def phase_vector(v: np.ndarray, lam: float) -> np.ndarray:
    """Entrywise ``exp(2 pi i lam v)``."""
    return np.exp(2j * np.pi * lam * np.asarray(v, dtype=float))


def diag_phase(v: Sequence[float], lam: float) -> np.ndarray:
    """Diagonal matrix with entries ``exp(2 pi i lam v_k)``.

    Satisfies the one-parameter group law ``D(lam + mu) = D(lam) D(mu)``
    and ``D(0) = I``.
    """
    return np.diag(phase_vector(np.asarray(v, dtype=float), lam))


def deficiency_constants(omega: IntervalUnion) -> tuple[np.ndarray, np.ndarray]:
    """Normalization constants of the defect-space exponentials.

    Component ``i`` carries ``gamma_i^+ = sqrt(4 pi / (exp(-4 pi a_i) -
    exp(-4 pi b_i)))`` and ``gamma_i^- = sqrt(4 pi / (exp(4 pi b_i) -
    exp(4 pi a_i)))``.  Both are evaluated in factored form so that large
    endpoints do not overflow.
    """
    a, b = omega.alpha, omega.beta
    ell = b - a
    root = np.sqrt(4 * np.pi / -np.expm1(-4 * np.pi * ell))
    gamma_plus = np.exp(2 * np.pi * a) * root
    gamma_minus = np.exp(-2 * np.pi * b) * root
    return gamma_plus, gamma_minus


def b_from_isometry(
    omega: IntervalUnion,
    w: np.ndarray,
    tol: float = UNITARITY_TOL,
) -> np.ndarray:
    """Boundary matrix of the extension determined by a defect-space isometry.

    In the orthonormal defect bases the correspondence is the conformal map

        ``B = G (W + E) (I + E W)^{-1} G^{-1}``,

    where ``E = diag(exp(-2 pi l_i))`` holds the interval lengths and
    ``G = diag(sqrt(4 pi / (1 - exp(-4 pi l_i))))``.  Since ``||E W|| < 1``
    the inverse always exists; the guard only trips for degenerate lengths.
    """
    w = require_unitary(w, tol, "isometry W")
    if w.shape[0] != omega.n:
        raise NonUnitaryInput(f"W is {w.shape[0]}x{w.shape[0]} but the union has {omega.n} components")
    e = np.exp(-2 * np.pi * omega.lengths)
    g = np.sqrt(4 * np.pi / -np.expm1(-4 * np.pi * omega.lengths))
    factor = np.eye(omega.n) + e[:, None] * w
    if np.linalg.cond(factor) > CONDITION_LIMIT:
        raise SingularFactor("inner factor is numerically singular")
    b = (g[:, None] * (w + np.diag(e))) @ np.linalg.solve(factor, np.diag(1.0 / g))
    defect = unitarity_defect(b)
    if defect > tol:
        raise SingularFactor(f"result fails unitarity: defect {defect:.3e}")
    return b


def isometry_from_b(
    omega: IntervalUnion,
    b: np.ndarray,
    tol: float = UNITARITY_TOL,
) -> np.ndarray:
    """Inverse of :func:`b_from_isometry`: recover ``W`` from ``B``.

    Solving the conformal relation for ``W`` gives
    ``W = (I - C E)^{-1} (C - E)`` with ``C = G^{-1} B G``.
    """
    b = require_unitary(b, tol, "boundary matrix")
    e = np.exp(-2 * np.pi * omega.lengths)
    g = np.sqrt(4 * np.pi / -np.expm1(-4 * np.pi * omega.lengths))
    c = (b * g[None, :]) / g[:, None]
    factor = np.eye(omega.n) - c * e[None, :]
    if np.linalg.cond(factor) > CONDITION_LIMIT:
        raise SingularFactor("inverse map factor is numerically singular")
    w = np.linalg.solve(factor, c - np.diag(e))
    defect = unitarity_defect(w)
    if defect > tol:
        raise SingularFactor(f"recovered W fails unitarity: defect {defect:.3e}")
    return w


def translate_b(b: np.ndarray, omega: IntervalUnion, t0: float) -> np.ndarray:
    """Boundary matrix whose spectrum is the original one shifted by ``-t0``.

    Conjugation by endpoint phases: ``D_beta(t0)* B D_alpha(t0)``.
    """
    b = np.asarray(b, dtype=complex)
    pb = phase_vector(omega.beta, t0).conj()
    pa = phase_vector(omega.alpha, t0)
    return pb[:, None] * b * pa[None, :]


def has_period(
    b: np.ndarray,
    omega: IntervalUnion,
    p: float,
    tol: float = UNITARITY_TOL,
) -> bool:
    """Whether ``B D_alpha(p) = D_beta(p) B`` within max-norm ``tol``."""
    return period_residual(b, omega, p) <= tol


def period_residual(b: np.ndarray, omega: IntervalUnion, p: float) -> float:
    """Max-norm of ``B D_alpha(p) - D_beta(p) B``."""
    b = np.asarray(b, dtype=complex)
    pa = phase_vector(omega.alpha, p)
    pb = phase_vector(omega.beta, p)
    return float(np.max(np.abs(b * pa[None, :] - pb[:, None] * b)))


@dataclass(frozen=True)
class SpectrumPointsMatrix:
    """Result of the endpoint-exponential construction ``M_beta M_alpha^{-1}``.

    ``unitary`` is false when the seed frequencies are not drawn from a
    genuine spectrum; the matrix is still returned for diagnostics.
    """

    matrix: np.ndarray
    unitarity_defect: float
    tol: float = UNITARITY_TOL

    @property
    def unitary(self) -> bool:
        return self.unitarity_defect <= self.tol


def b_from_spectrum_points(
    omega: IntervalUnion,
    lams: Sequence[float],
    tol: float = UNITARITY_TOL,
) -> SpectrumPointsMatrix:
    """Candidate boundary matrix built from ``n`` seed frequencies.

    With ``M_alpha = (exp(2 pi i a_i lam_j)) / sqrt(n)`` and ``M_beta``
    its right-endpoint analogue, returns ``B = M_beta M_alpha^{-1}``.
    ``B`` is unitary exactly when the seeds extend to a spectrum whose
    extension has boundary matrix ``B``.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.shape != (omega.n,):
        raise SingularMalpha(
            f"need exactly {omega.n} seed frequencies, got {lams.shape}"
        )
    root_n = math.sqrt(omega.n)
    m_alpha = np.exp(2j * np.pi * np.outer(omega.alpha, lams)) / root_n
    m_beta = np.exp(2j * np.pi * np.outer(omega.beta, lams)) / root_n
    if np.linalg.cond(m_alpha) > CONDITION_LIMIT:
        raise SingularMalpha("left-endpoint exponential matrix is singular")
    b = m_beta @ np.linalg.inv(m_alpha)
    return SpectrumPointsMatrix(matrix=b, unitarity_defect=unitarity_defect(b), tol=tol)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class StructureReport:
    """Outcome of the periodic-spectrum structure suite.

    ``sigma`` is a permutation matching every right endpoint to a congruent
    left endpoint (None when no perfect matching exists), and ``checks``
    maps check names to results; see :func:`structure_checks`.
    """

    sigma: tuple[int, ...] | None
    checks: dict[str, CheckResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.sigma is not None and all(c.passed for c in self.checks.values())

    @property
    def worst_residual(self) -> float:
        return max((c.residual for c in self.checks.values()), default=0.0)


def _congruence_matching(omega: IntervalUnion, p: float, tol: float) -> tuple[int, ...] | None:
    """Perfect matching i -> j with beta_i congruent to alpha_j mod 1/p."""
    n = omega.n
    adj = [
        [j for j in range(n) if congruent_mod(omega.beta[i], omega.alpha[j], p, tol)]
        for i in range(n)
    ]
    match_of_col = [-1] * n

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_of_col[j] < 0 or augment(match_of_col[j], seen):
                    match_of_col[j] = i
                    return True
        return False

    for i in range(n):
        if not augment(i, [False] * n):
            return None
    sigma = [0] * n
    for j, i in enumerate(match_of_col):
        sigma[i] = j
    return tuple(sigma)


def structure_checks(
    b: np.ndarray,
    omega: IntervalUnion,
    p: float,
    lam_reps: Sequence[float],
    tol: float = UNITARITY_TOL,
    congruence_tol: float = 1e-9,
) -> StructureReport:
    """Structural tests for a boundary matrix with a period-``p`` spectrum.

    Runs the six checks that characterize such matrices:

    1. ``zero_pattern``   - ``b_ij = 0`` whenever ``alpha_j`` is not
       congruent to ``beta_i`` mod ``1/p``;
    2. ``row_sums``       - congruent-class row sums equal 1;
    3. ``col_sums``       - congruent-class column sums equal 1;
    4. ``row_phase_sums`` - phase-weighted row sums equal 1 for every
       representative frequency;
    5. ``col_phase_sums`` - same for columns;
    6. ``irreducible``    - no proper index subset is invariant under the
       support pattern of ``B``.

    Diagnostic only: never raises on failed checks.
    """
    b = require_unitary(b, max(tol, UNITARITY_TOL), "boundary matrix")
    n = omega.n
    alpha, beta = omega.alpha, omega.beta
    cong = np.array(
        [[congruent_mod(beta[i], alpha[j], p, congruence_tol) for j in range(n)] for i in range(n)]
    )
    checks: dict[str, CheckResult] = {}

    r = float(np.max(np.abs(b[~cong]))) if (~cong).any() else 0.0
    checks["zero_pattern"] = CheckResult(r <= tol, r)

    row = float(np.max(np.abs(np.sum(np.where(cong, b, 0), axis=1) - 1.0)))
    checks["row_sums"] = CheckResult(row <= tol, row)
    col = float(np.max(np.abs(np.sum(np.where(cong, b, 0), axis=0) - 1.0)))
    checks["col_sums"] = CheckResult(col <= tol, col)

    worst_row_phase = 0.0
    worst_col_phase = 0.0
    for lam in lam_reps:
        phases = np.exp(-2j * np.pi * lam * (beta[:, None] - alpha[None, :]))
        weighted = np.where(cong, phases * b, 0)
        worst_row_phase = max(worst_row_phase, float(np.max(np.abs(weighted.sum(axis=1) - 1.0))))
        worst_col_phase = max(worst_col_phase, float(np.max(np.abs(weighted.sum(axis=0) - 1.0))))
    checks["row_phase_sums"] = CheckResult(worst_row_phase <= tol, worst_row_phase)
    checks["col_phase_sums"] = CheckResult(worst_col_phase <= tol, worst_col_phase)

    support = csr_matrix((np.abs(b) > tol).astype(int))
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    detail = "" if n_comp == 1 else f"invariant subset {tuple(np.flatnonzero(labels == labels[0]))}"
    checks["irreducible"] = CheckResult(n_comp == 1, float(n_comp - 1), detail)

    sigma = _congruence_matching(omega, p, congruence_tol)
    return StructureReport(sigma=sigma, checks=checks)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR factor of a complex Gaussian."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :].conj()
