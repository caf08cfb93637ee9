"""Spectral pairs, boundary matrices and local translation groups for
finite unions of intervals."""

from .intervals import FiberSet, IntervalUnion, congruent_mod, fiber_set, is_p_tile
from .intervals import rearrange_to_lattice, swap_interval, validate_union
from .boundary import (
    b_from_isometry,
    b_from_spectrum_points,
    deficiency_constants,
    diag_phase,
    has_period,
    isometry_from_b,
    random_unitary,
    structure_checks,
    translate_b,
)
from .spectrum import (
    EigenphaseTrack,
    SpectrumPoint,
    StepExponential,
    char_matrix,
    detect_period,
    eigenphase_tracks,
    eigenspace,
    is_spectral_matrix,
    solve_spectrum,
)
from .pairs import (
    PeriodicSpectrum,
    VerificationReport,
    beurling_density,
    exp_inner_product,
    finite_set_spectrum_check,
    full_pipeline,
    gram_matrix,
    lattice_spectrum_search,
    parseval_defect,
    verify_orthogonality,
)
from .translation import (
    SampledFunction,
    TranslationGroup,
    apply_u,
    apply_w,
    apply_w_inverse,
    build_group,
    group_law_defect,
    local_translation_defect,
    projection_p,
)
from .two_intervals import TwoIntervalCase, classify, cross_check_with_pipeline, u_closed_form
from .rkhs import GridFunction, KernelFunction, boundary_form, graph_inner, kernel_at, verify_reproducing

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
