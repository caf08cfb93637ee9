"""JSON / CSV wire formats.

Complex numbers travel as ``[re, im]`` pairs; matrices as row-major nested
lists of such pairs; sampled functions as ``x,re,im`` CSV.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, is_dataclass

import numpy as np

from .errors import GridMismatch
from .intervals import IntervalUnion, validate_union
from .pairs import PeriodicSpectrum
from .spectrum import SpectrumPoint
from .translation import SampledFunction


def complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_to_json(m: np.ndarray) -> list[list[list[float]]]:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[complex_to_pair(z) for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def vector_to_json(v: np.ndarray) -> list[list[float]]:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=complex)]


def spectrum_points_to_json(points: list[SpectrumPoint]) -> list[dict]:
    return [
        {
            "lambda": p.lam,
            "multiplicity": p.multiplicity,
            "kernel": [vector_to_json(v) for v in p.kernel_basis],
        }
        for p in points
    ]


def periodic_spectrum_to_json(spec: PeriodicSpectrum) -> dict:
    return {"reps": list(spec.reps), "period": spec.period}


def periodic_spectrum_from_json(data) -> PeriodicSpectrum:
    return PeriodicSpectrum(tuple(float(r) for r in data["reps"]), float(data["period"]))


def intervals_to_json(omega: IntervalUnion) -> list[list[float]]:
    return [[a, b] for a, b in omega.intervals]


def intervals_from_json(data) -> IntervalUnion:
    return validate_union([(float(a), float(b)) for a, b in data])


def to_jsonable(obj):
    """Recursively convert dataclasses / numpy values for ``json.dump``."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj) if obj.ndim == 2 else vector_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return complex_to_pair(obj)
    return obj


def sampled_to_csv(f: SampledFunction, out) -> None:
    """Write ``x,re,im`` rows for one sampled function."""
    writer = csv.writer(out)
    writer.writerow(["x", "re", "im"])
    for x, v in zip(f.xs, f.values):
        writer.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def sampled_pair_to_csv(before: SampledFunction, after: SampledFunction, out) -> None:
    """Write aligned before/after samples for plotting."""
    writer = csv.writer(out)
    writer.writerow(["x", "re_before", "im_before", "re_after", "im_after"])
    for x, u, v in zip(before.xs, before.values, after.values):
        writer.writerow(
            [repr(float(x))]
            + [repr(float(c)) for c in (u.real, u.imag, v.real, v.imag)]
        )


def sampled_from_csv(text: str, omega: IntervalUnion, step: float) -> SampledFunction:
    """Parse an ``x,re,im`` CSV produced by :func:`sampled_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:3]] != ["x", "re", "im"]:
        raise GridMismatch("sampled-function CSV must start with header x,re,im")
    xs, values = [], []
    for row in reader:
        if not row or row[0].lstrip().startswith("#"):
            continue
        xs.append(float(row[0]))
        values.append(complex(float(row[1]), float(row[2])))
    return SampledFunction(omega, step, np.array(xs), np.array(values))
