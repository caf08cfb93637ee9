"""Discrete simulator for the unitary group of local translations.

For a measure-one union that covers the line exactly ``p`` times under
``(1/p)Z`` shifts and a period-``p`` spectrum ``{0, l_1, ..., l_{p-1}} +
p Z``, the map

    ``(Wf)(x) = (f(x + k_0(x)/p), ..., f(x + k_{p-1}(x)/p))``

identifies ``L^2`` of the union with square-integrable ``C^p``-valued
periodic functions on the cell ``[0, 1/p)`` (``k_i(x)`` enumerates the
fiber of ``x``).  Conjugated through ``W``, translation acts by the
unitary cocycle

    ``(U(t)F)(x) = M_x M_{x+t}^* F(x + t)``

with fiber matrices ``M_x = (exp(2 pi i l_j k_i(x)/p)) / sqrt(p)``.  The
fibers, hence the matrices, are constant on the segments cut by the
endpoint images in ``[0, 1/p)``, and ``M_{x + 1/p} = M_x D^*`` for
``D = diag(exp(2 pi i l_j / p))``, so ``M_{x+t}`` reduces to a segment
lookup plus a diagonal phase.

On a uniform midpoint grid whose step divides ``1/p`` the map ``W`` is an
exact sample permutation; only the evaluation of ``F`` at ``x + t`` needs
interpolation (cubic, never across segment boundaries, where the
components may jump).  Unions with other measures are handled by an
affine change of variables recorded on the group object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GridMismatch, NotASpectrum, NotPTile
from .intervals import BOUNDARY_TOL, IntervalUnion, fiber_set, is_p_tile
from .pairs import PeriodicSpectrum, finite_set_spectrum_check


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples at the midpoint-grid points inside a union.

    ``xs`` is the restriction of the uniform lattice ``(j + 1/2) h`` to the
    union, in increasing order.
    """

    omega: IntervalUnion
    step: float
    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.xs.shape != self.values.shape:
            raise GridMismatch("positions and values have different shapes")

    def norm_sq(self) -> float:
        """Quadrature approximation of the squared L^2 norm."""
        return float(self.step * np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def exp_coefficient(self, lam: float) -> complex:
        """Quadrature approximation of the exponential coefficient."""
        return complex(
            self.step * np.sum(self.values * np.exp(-2j * np.pi * lam * self.xs))
        )

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.omega, self.step, self.xs, np.asarray(values, dtype=complex))

    def value_at(self, x) -> np.ndarray:
        """Cubic interpolation inside components (never across gaps)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape, dtype=complex)
        for a, b in self.omega.intervals:
            mask = (x > a) & (x < b)
            if not mask.any():
                continue
            sel = (self.xs > a) & (self.xs < b)
            xs, vals = self.xs[sel], self.values[sel]
            u = (x[mask] - xs[0]) / self.step
            npts = min(4, xs.size)
            base = np.clip(np.floor(u).astype(int) - 1, 0, xs.size - npts)
            w = np.ones((npts, u.size))
            for i_node in range(npts):
                for j_node in range(npts):
                    if i_node != j_node:
                        w[i_node] *= (u - (base + j_node)) / (i_node - j_node)
            out[mask] = np.sum(w * vals[base[None, :] + np.arange(npts)[:, None]], axis=0)
        return out


def lattice_points(omega: IntervalUnion, step: float) -> np.ndarray:
    """Uniform midpoint lattice restricted to the open union."""
    lo = omega.intervals[0][0]
    hi = omega.intervals[-1][1]
    j_lo = math.floor(lo / step) - 1
    j_hi = math.ceil(hi / step) + 1
    xs = (np.arange(j_lo, j_hi + 1) + 0.5) * step
    inside = np.zeros(xs.shape, dtype=bool)
    for a, b in omega.intervals:
        inside |= (xs > a + BOUNDARY_TOL) & (xs < b - BOUNDARY_TOL)
    return xs[inside]


def sample_function(omega: IntervalUnion, step: float, fn) -> SampledFunction:
    """Sample a callable on the midpoint lattice inside the union."""
    xs = lattice_points(omega, step)
    return SampledFunction(omega, step, xs, np.asarray(fn(xs), dtype=complex))


def sample_exponential(omega: IntervalUnion, step: float, lam: float) -> SampledFunction:
    return sample_function(omega, step, lambda x: np.exp(2j * np.pi * lam * x))


@dataclass(frozen=True)
class TranslationGroup:
    """Precomputed fiber structure of the local-translation group.

    All arrays live in normalized coordinates (measure-one union); ``scale``
    maps normalized positions back to original ones (``x = scale * x_norm``).
    ``segments`` are the arcs of ``[0, 1/p)`` cut by the endpoint images;
    segment ``i`` starts at ``breakpoints[i]`` and carries fiber
    ``fibers[segment_fiber[i]]`` and matrix ``mats[segment_fiber[i]]``.
    """

    omega: IntervalUnion
    spectrum: PeriodicSpectrum
    scale: float
    omega_norm: IntervalUnion
    reps_norm: np.ndarray          # (p,)
    p: int
    step_norm: float               # divides 1/p exactly
    cells_per_period: int          # m = 1 / (p step_norm)
    base_xs: np.ndarray            # (m,) midpoints of [0, 1/p)
    breakpoints: np.ndarray        # (k,) sorted endpoint images in [0, 1/p)
    segment_fiber: np.ndarray      # (k,) fiber id per segment
    fiber_of_cell: np.ndarray      # (m,) fiber id per base cell
    fibers: np.ndarray             # (F, p) fiber integers
    mats: np.ndarray               # (F, p, p)
    mats_h: np.ndarray             # (F, p, p)
    left_run: np.ndarray           # (m,)
    right_run: np.ndarray          # (m,)
    index_map: np.ndarray          # (p, m) flat sample index
    xs_norm: np.ndarray            # flat normalized sample positions

    @property
    def step(self) -> float:
        """Grid step in original coordinates."""
        return self.step_norm * self.scale

    def grid(self) -> np.ndarray:
        """Sample positions in original coordinates."""
        return self.xs_norm * self.scale

    def sample(self, fn) -> SampledFunction:
        xs = self.grid()
        return SampledFunction(self.omega, self.step, xs, np.asarray(fn(xs), dtype=complex))

    def sample_exponential(self, lam: float) -> SampledFunction:
        return self.sample(lambda x: np.exp(2j * np.pi * lam * x))

    def segment_of(self, z: np.ndarray) -> np.ndarray:
        """Segment index for normalized positions in [0, 1/p)."""
        idx = np.searchsorted(self.breakpoints, z, side="right") - 1
        return np.where(idx < 0, self.breakpoints.size - 1, idx)


def _endpoint_images(omega_norm: IntervalUnion, p: int) -> np.ndarray:
    cell = 1.0 / p
    imgs = np.mod(omega_norm.endpoints, cell)
    imgs[cell - imgs < 10 * BOUNDARY_TOL] = 0.0
    imgs = np.unique(imgs)
    keep = [float(imgs[0])]
    for v in imgs[1:]:
        if v - keep[-1] > 10 * BOUNDARY_TOL:
            keep.append(float(v))
    return np.array(keep)


def build_group(
    omega: IntervalUnion,
    spectrum: PeriodicSpectrum,
    grid_step: float = 1e-4,
    tol: float = 1e-9,
) -> TranslationGroup:
    """Assemble the discrete local-translation engine.

    Requires the spectrum to contain 0 and to have integer period equal to
    its representative count after normalization.  Verifies the tiling and
    the fiber spectral-pair condition; raises :class:`NotPTile` or
    :class:`NotASpectrum` accordingly.
    """
    scale = omega.measure
    omega_norm = omega.scale(1.0 / scale)
    spec_norm = spectrum.scale(scale)
    p = round(spec_norm.period)
    if abs(spec_norm.period - p) > tol or p < 1:
        raise NotASpectrum(f"normalized period {spec_norm.period} is not a positive integer")
    if spec_norm.m != p:
        raise NotASpectrum(f"spectrum has {spec_norm.m} representatives but period {p}")
    if spec_norm.reps[0] > tol:
        raise NotASpectrum("spectrum must contain 0")
    if not is_p_tile(omega_norm, p, samples=256):
        raise NotPTile(f"the normalized union is not a {p}-tile under (1/{p})Z shifts")
    reps = np.array(spec_norm.reps)
    reps[0] = 0.0
    cell = 1.0 / p

    breakpoints = _endpoint_images(omega_norm, p)
    # fiber and matrix per segment
    ends = np.concatenate([breakpoints[1:], [breakpoints[0] + cell]])
    seg_mids = np.mod((breakpoints + ends) / 2, cell)
    fibers: list[tuple[int, ...]] = []
    fiber_ids: dict[tuple[int, ...], int] = {}
    segment_fiber = np.empty(breakpoints.size, dtype=np.int64)
    for s, mid in enumerate(seg_mids):
        fs = fiber_set(omega_norm, p, float(mid))
        if fs.count != p:
            raise NotPTile(f"fiber at x={mid:.6g} has {fs.count} members, expected {p}")
        if fs.members not in fiber_ids:
            fiber_ids[fs.members] = len(fibers)
            fibers.append(fs.members)
        segment_fiber[s] = fiber_ids[fs.members]
    fibers_arr = np.array(fibers, dtype=np.int64)

    mats = np.empty((fibers_arr.shape[0], p, p), dtype=complex)
    for fid, members in enumerate(fibers_arr):
        if not finite_set_spectrum_check(members / p, reps, 1e-7):
            raise NotASpectrum(
                f"representatives are not a spectrum for the fiber {tuple(members)}"
            )
        mats[fid] = np.exp(2j * np.pi * np.outer(members / p, reps)) / math.sqrt(p)
    mats_h = mats.conj().transpose(0, 2, 1)

    # midpoint grid on the cell, clear of every breakpoint
    m = max(8, round(cell / grid_step))
    base_xs = None
    for m_try in (m, m + 1, m - 1, m + 3, m - 3, m + 7, m - 7, m + 13):
        if m_try < 4:
            continue
        xs_try = (np.arange(m_try) + 0.5) * (cell / m_try)
        d = np.abs(xs_try[:, None] - breakpoints[None, :])
        d = np.minimum(d, cell - d)
        if np.min(d) > (cell / m_try) * 1e-6:
            m, base_xs = m_try, xs_try
            break
    if base_xs is None:
        raise GridMismatch("could not place a midpoint grid clear of endpoint images")
    step_norm = cell / m

    seg_idx = np.searchsorted(breakpoints, base_xs, side="right") - 1
    seg_of_cell = np.where(seg_idx < 0, breakpoints.size - 1, seg_idx)
    fiber_of_cell = segment_fiber[seg_of_cell]

    # stencil runs stop at segment boundaries (components may jump there)
    left_run = np.zeros(m, dtype=np.int64)
    right_run = np.zeros(m, dtype=np.int64)
    for c in range(m):
        run = 0
        while run < 3 and run + 1 < m and seg_of_cell[(c - run - 1) % m] == seg_of_cell[c]:
            run += 1
        left_run[c] = run
        run = 0
        while run < 3 and run + 1 < m and seg_of_cell[(c + run + 1) % m] == seg_of_cell[c]:
            run += 1
        right_run[c] = run

    # flat sample layout; index_map[i, c] locates fiber row i over cell c
    pos = base_xs[None, :] + fibers_arr[fiber_of_cell].T / p  # (p, m)
    flat = pos.ravel()
    order = np.argsort(flat, kind="stable")
    xs_norm = flat[order]
    index_map = np.empty(flat.size, dtype=np.int64)
    index_map[order] = np.arange(flat.size)
    index_map = index_map.reshape(p, m)

    return TranslationGroup(
        omega=omega,
        spectrum=spectrum,
        scale=scale,
        omega_norm=omega_norm,
        reps_norm=reps,
        p=p,
        step_norm=step_norm,
        cells_per_period=m,
        base_xs=base_xs,
        breakpoints=breakpoints,
        segment_fiber=segment_fiber,
        fiber_of_cell=fiber_of_cell,
        fibers=fibers_arr,
        mats=mats,
        mats_h=mats_h,
        left_run=left_run,
        right_run=right_run,
        index_map=index_map,
        xs_norm=xs_norm,
    )


def _check_grid(group: TranslationGroup, f: SampledFunction) -> None:
    if f.xs.size != group.xs_norm.size:
        raise GridMismatch(
            f"function has {f.xs.size} samples, the group expects {group.xs_norm.size}"
        )
    if abs(f.step - group.step) > 1e-12 * group.step:
        raise GridMismatch(f"function step {f.step} differs from group step {group.step}")
    if np.max(np.abs(f.xs - group.grid())) > 1e-9 * group.step:
        raise GridMismatch("function samples sit at different positions than the group grid")


def apply_w(group: TranslationGroup, f: SampledFunction) -> np.ndarray:
    """Vector-valued samples ``(Wf)(x)`` over the base cell, shape (p, m)."""
    _check_grid(group, f)
    return f.values[group.index_map]


def apply_w_inverse(group: TranslationGroup, wf: np.ndarray) -> SampledFunction:
    """Back from base-cell vector samples to a sampled function."""
    values = np.empty(group.xs_norm.size, dtype=complex)
    values[group.index_map.ravel()] = np.asarray(wf, dtype=complex).ravel()
    return SampledFunction(group.omega, group.step, group.grid(), values)


def apply_u(group: TranslationGroup, t: float, f: SampledFunction) -> SampledFunction:
    """Action of the local-translation group element for time ``t``."""
    wf = apply_w(group, f)
    t_norm = t / group.scale
    cell = 1.0 / group.p
    z = group.base_xs + t_norm
    a = np.floor(z * group.p).astype(np.int64)
    z_mod = z - a * cell
    spill = z_mod >= cell
    a[spill] += 1
    z_mod[spill] -= cell
    z_mod = np.clip(z_mod, 0.0, np.nextafter(cell, 0.0))
    f_interp = _kernels.interp_strata(
        wf, z_mod, group.step_norm, group.left_run, group.right_run
    )
    s_in = group.segment_fiber[group.segment_of(z_mod)]
    phase = np.exp(2j * np.pi * np.outer(group.reps_norm, a / group.p))
    out = _kernels.apply_cocycle(
        group.mats, group.mats_h, group.fiber_of_cell, s_in, phase, f_interp
    )
    return apply_w_inverse(group, out)


def local_translation_defect(
    group: TranslationGroup,
    t: float,
    f: SampledFunction,
    resolution: float | None = None,
) -> float:
    """Largest pointwise violation of ``(U(t)f)(x) = f(x + t)``.

    The maximum runs over sample points with ``x`` and ``x + t`` both
    inside the union and away from endpoint images by ``resolution``
    (default two grid steps); the identity holds off those null sets.
    Returns 0 when no sample qualifies.
    """
    uf = apply_u(group, t, f)
    margin = resolution if resolution is not None else 2 * f.step
    xs = f.xs
    inside = np.zeros(xs.shape, dtype=bool)
    shifted = np.zeros(xs.shape, dtype=bool)
    for a, b in group.omega.intervals:
        inside |= (xs > a + margin) & (xs < b - margin)
        shifted |= (xs + t > a + margin) & (xs + t < b - margin)
    # also exclude base points whose translate lands near a segment cut
    cell = 1.0 / group.p
    z = np.mod(xs / group.scale + t / group.scale, cell)
    d = np.abs(z[:, None] - group.breakpoints[None, :])
    d = np.minimum(d, cell - d).min(axis=1)
    clear = d > (margin / group.scale)
    mask = inside & shifted & clear
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(uf.values[mask] - f.value_at(xs[mask] + t))))


def projection_p(
    omega: IntervalUnion,
    p: int,
    lam_i: float,
    f: SampledFunction,
) -> SampledFunction:
    """Orthogonal projection onto the band spanned by ``exp(2 pi i
    (lam_i + k p) t)``:

        ``e_{lam_i}(x) (1/p) sum_j f(x + j/p) e_{-lam_i}(x + j/p)``

    with the sum over the fiber of ``x``.  Exact on the sample lattice
    (fibers map grid points to grid points when the step divides ``1/p``).
    """
    if abs(omega.measure - 1.0) > 1e-9:
        raise NotPTile("the fiber projection formula requires a measure-one union")
    m = round(1.0 / (p * f.step))
    if m < 1 or abs(m * p * f.step - 1.0) > 1e-9:
        raise GridMismatch("grid step must divide 1/p for the fiber projection")
    cell = 1.0 / p
    cell_idx = np.clip((np.mod(f.xs, cell) / f.step).astype(np.int64), 0, m - 1)
    twist = f.values * np.exp(-2j * np.pi * lam_i * f.xs)
    sums = np.zeros(m, dtype=complex)
    np.add.at(sums, cell_idx, twist)
    proj = sums[cell_idx] / p * np.exp(2j * np.pi * lam_i * f.xs)
    return f.with_values(proj)


def group_law_defect(
    group: TranslationGroup, s: float, t: float, f: SampledFunction
) -> float:
    """Relative norm defect of ``U(s) U(t) f`` against ``U(s + t) f``."""
    norm = f.norm()
    if norm == 0:
        return 0.0
    two_step = apply_u(group, s, apply_u(group, t, f))
    one_step = apply_u(group, s + t, f)
    diff = two_step.values - one_step.values
    return float(math.sqrt(f.step * np.sum(np.abs(diff) ** 2)) / norm)
