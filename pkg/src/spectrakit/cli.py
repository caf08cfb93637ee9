"""Command-line front end.

    spectra-kit {spectrum|check|classify2|translate|report} --config cfg.toml

Configuration is TOML: ``intervals`` as ``[[a, b], ...]``, an optional
boundary ``matrix`` (row-major ``[re, im]`` pairs), an optional ``spectrum``
table ``{reps = [...], period = p}``, optional ``seed`` frequencies, plus
``window``, ``tol``, ``grid_step``, ``format``.  Flags override the file.

Exit codes: 0 success/pass, 1 verdict failure, 2 usage or configuration
error, 3 numerical retry exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import serialize
from .boundary import b_from_spectrum_points, has_period, structure_checks
from .errors import SpectraKitError, WindingMismatch
from .intervals import IntervalUnion, validate_union
from .pairs import (
    PeriodicSpectrum,
    build_verification_report,
    full_pipeline,
)
from .spectrum import detect_period, is_spectral_matrix, solve_spectrum
from .translation import build_group, local_translation_defect, sample_exponential, apply_u
from .two_intervals import classify_union, NOT_SPECTRAL
from .serialize import to_jsonable

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class Config:
    omega: IntervalUnion
    matrix: np.ndarray | None
    spectrum: PeriodicSpectrum | None
    seed: list[float] | None
    window: tuple[float, float]
    tol: float
    grid_step: float
    out_format: str
    t: float | None
    function: dict | None


def load_config(path: str, args) -> Config:
    raw = tomllib.loads(Path(path).read_text())
    if "intervals" not in raw:
        raise SpectraKitError("config must define 'intervals'")
    omega = validate_union(raw["intervals"])
    matrix = None
    if "matrix" in raw:
        matrix = serialize.matrix_from_json(raw["matrix"]["entries"])
    spectrum = None
    if "spectrum" in raw:
        spectrum = PeriodicSpectrum(
            tuple(float(r) for r in raw["spectrum"]["reps"]),
            float(raw["spectrum"]["period"]),
        )
    seed = [float(s) for s in raw["seed"]] if "seed" in raw else None
    window = tuple(args.window) if args.window else tuple(raw.get("window", (-8.0, 8.0)))
    tol = args.tol if args.tol is not None else float(raw.get("tol", 1e-9))
    grid_step = args.grid_step if args.grid_step is not None else float(raw.get("grid_step", 1e-4))
    out_format = args.format or raw.get("format", "json")
    t = args.t if args.t is not None else (float(raw["t"]) if "t" in raw else None)
    return Config(
        omega=omega, matrix=matrix, spectrum=spectrum, seed=seed,
        window=(float(window[0]), float(window[1])), tol=tol,
        grid_step=grid_step, out_format=out_format, t=t,
        function=raw.get("function"),
    )


def emit(report: dict, out_format: str) -> None:
    if out_format == "json":
        print(json.dumps(to_jsonable(report), indent=2))
    elif out_format == "csv":
        for key, value in to_jsonable(report).items():
            print(f"{key},{value}")
    else:
        for key, value in to_jsonable(report).items():
            print(f"{key}: {value}")


def cmd_spectrum(cfg: Config) -> int:
    if cfg.matrix is None:
        raise SpectraKitError("'spectrum' needs intervals and a boundary matrix")
    try:
        points = solve_spectrum(cfg.matrix, cfg.omega, cfg.window, cfg.tol)
    except WindingMismatch:
        try:
            points = solve_spectrum(
                cfg.matrix, cfg.omega, cfg.window, cfg.tol, grid_step=cfg.grid_step / 4
            )
        except WindingMismatch as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    report = {
        "intervals": serialize.intervals_to_json(cfg.omega),
        "window": list(cfg.window),
        "points": serialize.spectrum_points_to_json(points),
    }
    emit(report, cfg.out_format)
    return EXIT_OK


def cmd_check(cfg: Config) -> int:
    if cfg.spectrum is not None:
        report = build_verification_report(cfg.omega, cfg.spectrum)
        payload = {
            "mode": "spectrum",
            "intervals": serialize.intervals_to_json(cfg.omega),
            "spectrum": serialize.periodic_spectrum_to_json(cfg.spectrum),
            "report": report,
        }
        emit(payload, cfg.out_format)
        return EXIT_OK if report.passed else EXIT_VERDICT
    if cfg.matrix is not None:
        spectral = is_spectral_matrix(cfg.matrix, cfg.omega, cfg.window)
        payload = {
            "mode": "matrix",
            "intervals": serialize.intervals_to_json(cfg.omega),
            "is_spectral": spectral.is_spectral,
        }
        if spectral.is_spectral:
            points = solve_spectrum(cfg.matrix, cfg.omega, cfg.window, cfg.tol)
            lams = np.array([p.lam for p in points])
            period = detect_period(lams, cfg.omega, cfg.matrix, cfg.tol)
            payload["period"] = period
            if period is not None:
                from .pairs import spectrum_from_points

                spec = spectrum_from_points(lams, period, cfg.tol)
                report = build_verification_report(cfg.omega, spec)
                payload["spectrum"] = serialize.periodic_spectrum_to_json(spec)
                payload["report"] = report
                emit(payload, cfg.out_format)
                return EXIT_OK if report.passed else EXIT_VERDICT
        emit(payload, cfg.out_format)
        return EXIT_VERDICT
    if cfg.seed is not None:
        result = full_pipeline(cfg.omega, cfg.seed, cfg.window, cfg.tol)
        payload = {
            "mode": "seed",
            "intervals": serialize.intervals_to_json(cfg.omega),
            "ok": result.ok,
            "reason": result.reason,
        }
        if result.spectrum is not None:
            payload["spectrum"] = serialize.periodic_spectrum_to_json(result.spectrum)
        if result.matrix is not None:
            payload["matrix"] = serialize.matrix_to_json(result.matrix)
        if result.report is not None:
            payload["report"] = result.report
        emit(payload, cfg.out_format)
        return EXIT_OK if result.ok else EXIT_VERDICT
    raise SpectraKitError("'check' needs a matrix, a spectrum, or seed frequencies")


def cmd_classify2(cfg: Config) -> int:
    if cfg.omega.n != 2:
        raise SpectraKitError(f"'classify2' needs exactly two intervals, got {cfg.omega.n}")
    case = classify_union(cfg.omega, cfg.tol)
    payload = {
        "intervals": serialize.intervals_to_json(cfg.omega),
        "w": case.w,
        "rho": case.rho,
        "verdict": case.verdict,
        "l": case.l,
        "spectra": [serialize.periodic_spectrum_to_json(s) for s in case.spectra],
        "matrices": [serialize.matrix_to_json(b) for b in case.matrices],
        "conditioning_warning": case.conditioning_warning,
    }
    emit(payload, cfg.out_format)
    return EXIT_OK


def _load_input_function(cfg: Config, group, args):
    if args.input:
        text = Path(args.input).read_text()
        return serialize.sampled_from_csv(text, cfg.omega, group.step)
    spec = cfg.function or {"kind": "exponential", "frequency": 0.0}
    if spec.get("kind", "exponential") != "exponential":
        raise SpectraKitError(f"unsupported function kind {spec.get('kind')!r}")
    return group.sample_exponential(float(spec.get("frequency", 0.0)))


def cmd_translate(cfg: Config, args) -> int:
    if cfg.spectrum is None or cfg.t is None:
        raise SpectraKitError("'translate' needs intervals, a spectrum, and t")
    group = build_group(cfg.omega, cfg.spectrum, cfg.grid_step, cfg.tol)
    f = _load_input_function(cfg, group, args)
    uf = apply_u(group, cfg.t, f)
    defect = local_translation_defect(group, cfg.t, f)
    out_path = args.output
    if out_path:
        with open(out_path, "w", newline="") as handle:
            serialize.sampled_pair_to_csv(f, uf, handle)
    else:
        serialize.sampled_pair_to_csv(f, uf, sys.stdout)
    footer = {
        "t": cfg.t,
        "local_translation_defect": defect,
        "samples": int(f.xs.size),
        "output": out_path or "stdout",
    }
    print(json.dumps(to_jsonable(footer)), file=sys.stderr)
    return EXIT_OK


def cmd_report(cfg: Config) -> int:
    """Combined analysis: classification (two intervals), spectrum,
    structure checks and verification in one document."""
    payload: dict = {"intervals": serialize.intervals_to_json(cfg.omega)}
    status = EXIT_OK
    if cfg.omega.n == 2:
        case = classify_union(cfg.omega, cfg.tol)
        payload["classification"] = {
            "verdict": case.verdict,
            "l": case.l,
            "spectra": [serialize.periodic_spectrum_to_json(s) for s in case.spectra],
        }
        if case.verdict == NOT_SPECTRAL:
            status = EXIT_VERDICT
    matrix = cfg.matrix
    if matrix is None and cfg.seed is not None:
        construction = b_from_spectrum_points(cfg.omega, cfg.seed)
        payload["construction_unitarity_defect"] = construction.unitarity_defect
        if construction.unitary:
            matrix = construction.matrix
    if matrix is not None:
        points = solve_spectrum(matrix, cfg.omega, cfg.window, cfg.tol)
        payload["matrix"] = serialize.matrix_to_json(matrix)
        payload["points"] = serialize.spectrum_points_to_json(points)
        lams = np.array([p.lam for p in points])
        period = detect_period(lams, cfg.omega, matrix, cfg.tol)
        payload["period"] = period
        if period is not None:
            reps = cfg.spectrum.reps if cfg.spectrum else ()
            payload["structure"] = structure_checks(
                matrix, cfg.omega, period, reps or tuple(float(x) for x in lams[:2])
            )
            payload["has_period"] = has_period(matrix, cfg.omega, period)
    if cfg.spectrum is not None:
        report = build_verification_report(cfg.omega, cfg.spectrum)
        payload["verification"] = report
        if not report.passed:
            status = EXIT_VERDICT
    emit(payload, cfg.out_format)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectra-kit",
        description="Spectral pairs, boundary matrices and local translations on interval unions",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "check", "classify2", "translate", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--window", nargs=2, type=float, metavar=("A", "B"))
        p.add_argument("--tol", type=float)
        p.add_argument("--grid-step", dest="grid_step", type=float)
        p.add_argument("--format", choices=("json", "csv", "text"))
        if name == "translate":
            p.add_argument("--t", type=float, help="translation amount")
            p.add_argument("--input", help="input function CSV (x,re,im)")
            p.add_argument("--output", help="output CSV path (default stdout)")
        else:
            p.set_defaults(t=None, input=None, output=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args)
    except (OSError, tomllib.TOMLDecodeError, SpectraKitError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "classify2":
            return cmd_classify2(cfg)
        if args.command == "translate":
            return cmd_translate(cfg, args)
        if args.command == "report":
            return cmd_report(cfg)
    except WindingMismatch as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpectraKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
