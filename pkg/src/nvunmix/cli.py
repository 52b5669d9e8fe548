"""Command-line interface.

Exit codes: 0 success, 2 validation/parse error, 3 numerical error
(singularity/identifiability), 4 I/O error. Every compute subcommand writes a
run report capturing inputs (with hashes), effective parameters, outputs, and
diagnostics.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .basisfit import FieldSeries, fit_series, scale_factor_surface
from .decompose import ScaleSearchConfig, ZplArtifactConfig, decompose
from .errors import (
    IdentifiabilityError,
    NoMinimumError,
    NvUnmixError,
    ParseError,
    RangeError,
    SingularityError,
    ValidationError,
)
from .fileio import RunReport, load_map, load_spectrum, save_map, save_spectrum
from .filters import FilterModel, TabulatedFilter, TransmissivityPair, transmissivity
from .maps import field_unmix, filter_unmix
from .render import RenderStyle, render_map_pgm, render_spectrum_svg
from .spectrum import BasisPair, WavelengthWindow, resample
from .synth import (
    DEFAULT_FIELD_RESPONSE,
    DEFAULT_NV0_SHAPE,
    DEFAULT_NVM_SHAPE,
    FieldResponseModel,
    NoiseModel,
    SpectralShapeModel,
    make_field_map_pair,
    make_letter_map,
    make_spectrum,
    make_sweep,
)

_EXIT_VALIDATION = 2
_EXIT_NUMERICAL = 3
_EXIT_IO = 4


def _parse_window(text: str) -> WavelengthWindow:
    lo, _, hi = text.partition(":")
    try:
        return WavelengthWindow(float(lo), float(hi))
    except ValueError as exc:
        raise ValidationError(f"bad window {text!r} (expected LO:HI)") from exc


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    try:
        return float(lo), float(hi)
    except ValueError as exc:
        raise ValidationError(f"bad range {text!r} (expected LO:HI)") from exc


def _report_path(primary_output: str) -> str:
    stem, _ = os.path.splitext(primary_output)
    return stem + ".report.json"


def _write_report(args, command, input_paths, parameters, outputs, diagnostics) -> str:
    path = args.report or _report_path(outputs[0])
    report = RunReport.create(command, input_paths, parameters, outputs, diagnostics)
    report.save(path)
    return path


def _load_filter(args) -> FilterModel | TabulatedFilter:
    if getattr(args, "filter_table", None):
        spec = load_spectrum(args.filter_table, negative="error")
        return TabulatedFilter(spec.wavelengths, spec.intensities)
    return FilterModel(t_max=args.tmax, center=args.center, width=args.width)


def cmd_decompose(args) -> int:
    low = load_spectrum(args.low, negative=args.negative)
    high = load_spectrum(args.high, negative=args.negative)
    cfg = ZplArtifactConfig(args.zpl_center, _parse_window(args.zpl_window), args.edge)
    f_min, f_max = _parse_range(args.f_range)
    search = ScaleSearchConfig(f_min, f_max, args.f_steps, args.f_tol)
    result = decompose(low, high, cfg, search)
    save_spectrum(result.nv0, args.out_nv0)
    save_spectrum(result.nvminus, args.out_nvm)
    diagnostics = {
        "f": result.f,
        "zpl_metric": result.zpl_metric,
        "nv0_zpl575_score": result.zpl575_score,
    }
    path = _write_report(
        args,
        "decompose",
        [args.low, args.high],
        {
            "zpl_center": args.zpl_center,
            "zpl_window": args.zpl_window,
            "edge": args.edge,
            "f_range": args.f_range,
            "f_steps": args.f_steps,
            "f_tol": args.f_tol,
            "negative": args.negative,
        },
        [args.out_nv0, args.out_nvm],
        diagnostics,
    )
    print(f"f = {result.f:.6g}  zpl_metric = {result.zpl_metric:.6g}  report = {path}")
    return 0


def cmd_fit_series(args) -> int:
    basis = BasisPair.from_spectra(
        load_spectrum(args.basis_nv0, negative=args.negative),
        load_spectrum(args.basis_nvm, negative=args.negative),
    )
    with open(args.series, "r", encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.series}: invalid manifest JSON: {exc}") from exc
    base_dir = os.path.dirname(os.path.abspath(args.series))
    entries = []
    spectrum_paths = []
    for item in manifest:
        path = item["path"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        spectrum_paths.append(path)
        entries.append(
            (float(item["b_field_gauss"]), load_spectrum(path, negative=args.negative))
        )
    series = FieldSeries.ingest(entries)
    grid = series.entries[0][1].wavelengths
    if not np.array_equal(basis.grid, grid):
        basis = BasisPair.from_spectra(
            resample(basis.s0, grid), resample(basis.sminus, grid)
        )
    table = fit_series(series, basis, nonneg=not args.unconstrained)
    with open(args.out_table, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("b_gauss,c0,cminus,residual\n")
        for row in table.rows():
            fh.write(f"{row.b_field!r},{row.c0!r},{row.cminus!r},{row.residual!r}\n")
    surface = scale_factor_surface(table) if len(table) >= 2 else None
    outputs = [args.out_table]
    if args.out_surface and surface is not None:
        with open(args.out_surface, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("b1,b2,f\n")
            for b1, b2, f in surface.rows:
                fh.write(f"{b1!r},{b2!r},{f!r}\n")
        outputs.append(args.out_surface)
    diagnostics = {
        "rows": len(table),
        "surface_pairs": len(surface.rows) if surface else 0,
        "surface_skipped": len(surface.skipped) if surface else 0,
    }
    path = _write_report(
        args,
        "fit-series",
        [args.basis_nv0, args.basis_nvm, args.series] + spectrum_paths,
        {"unconstrained": args.unconstrained, "negative": args.negative},
        outputs,
        diagnostics,
    )
    print(f"fitted {len(table)} spectra  report = {path}")
    return 0


def cmd_transmissivity(args) -> int:
    spec = load_spectrum(args.spectrum, negative=args.negative)
    fm = _load_filter(args)
    window = _parse_window(args.window)
    t = transmissivity(spec, fm, window)
    print(f"{t:.6g}")
    if args.report:
        RunReport.create(
            "transmissivity",
            [args.spectrum] + ([args.filter_table] if args.filter_table else []),
            {
                "tmax": args.tmax,
                "center": args.center,
                "width": args.width,
                "window": args.window,
                "filter_table": args.filter_table,
            },
            [],
            {"transmissivity": t},
        ).save(args.report)
    return 0


def _unmix_common(args, command, unmixed, low_like, inputs, parameters):
    out_nv0 = save_map(unmixed.nv0, args.out + ".nv0")
    out_nvm = save_map(unmixed.nvminus, args.out + ".nvm")
    recon = unmixed.nv0.values + unmixed.nvminus.values
    residual = float(np.max(np.abs(recon - low_like.values)))
    diagnostics = {
        "negative_pixel_count": unmixed.negative_pixel_count,
        "nv0_min": float(np.min(unmixed.nv0.values)),
        "nv0_max": float(np.max(unmixed.nv0.values)),
        "nvm_min": float(np.min(unmixed.nvminus.values)),
        "nvm_max": float(np.max(unmixed.nvminus.values)),
        "reconstruction_residual": residual,
    }
    path = _write_report(
        args, command, inputs, parameters, [*out_nv0, *out_nvm], diagnostics
    )
    print(
        f"negative pixels: {unmixed.negative_pixel_count}  "
        f"reconstruction residual: {residual:.6g}  report = {path}"
    )
    return 0


def cmd_unmix_map_field(args) -> int:
    low = load_map(args.low, negative=args.negative)
    high = load_map(args.high, negative=args.negative)
    unmixed = field_unmix(low, high, args.f)
    return _unmix_common(
        args,
        "unmix-map-field",
        unmixed,
        low,
        [p for pair in (args.low, args.high) for p in _existing_map_files(pair)],
        {"f": args.f, "negative": args.negative},
    )


def cmd_unmix_map_filter(args) -> int:
    m0 = load_map(args.m0, negative=args.negative)
    mlpf = load_map(args.mlpf, negative=args.negative)
    unmixed = filter_unmix(m0, mlpf, TransmissivityPair(args.t0, args.tm))
    return _unmix_common(
        args,
        "unmix-map-filter",
        unmixed,
        m0,
        [p for pair in (args.m0, args.mlpf) for p in _existing_map_files(pair)],
        {"t0": args.t0, "tm": args.tm, "negative": args.negative},
    )


def _existing_map_files(path: str) -> list[str]:
    from .fileio import map_paths

    return [p for p in map_paths(path) if os.path.exists(p)]


def _simulate_spectrum(params, seed, out_dir) -> tuple[list[str], dict]:
    shape = (
        SpectralShapeModel.from_dict(params["shape"])
        if "shape" in params
        else DEFAULT_NVM_SHAPE
    )
    grid = _grid_from_params(params)
    total = float(params.get("total_counts", 62000.0))
    spec = make_spectrum(shape, grid, total)
    path = os.path.join(out_dir, "spectrum.csv")
    save_spectrum(spec, path)
    return [path], {"total_counts": total, "points": len(spec)}


def _grid_from_params(params) -> np.ndarray:
    g = params.get("grid", {})
    lo = float(g.get("lo", 550.0))
    hi = float(g.get("hi", 850.0))
    step = float(g.get("step", 0.2))
    if not (hi > lo and step > 0.0):
        raise ValidationError("grid requires hi > lo and step > 0")
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def _simulate_sweep(params, seed, out_dir) -> tuple[list[str], dict]:
    response = (
        FieldResponseModel.from_dict(params["field_response"])
        if "field_response" in params
        else DEFAULT_FIELD_RESPONSE
    )
    shape_params = params.get("shapes", {})
    shapes = (
        SpectralShapeModel.from_dict(shape_params["nv0"])
        if "nv0" in shape_params
        else DEFAULT_NV0_SHAPE,
        SpectralShapeModel.from_dict(shape_params["nvminus"])
        if "nvminus" in shape_params
        else DEFAULT_NVM_SHAPE,
    )
    grid = _grid_from_params(params)
    noise = NoiseModel.from_dict(params.get("noise", {"kind": "none"}))
    fields = [float(b) for b in params.get("fields", response.fields)]
    sweep = make_sweep(fields, response, shapes, grid, noise, seed)
    manifest = []
    outputs = []
    for b, spec in sweep:
        name = f"spec_{b:07.1f}G.csv"
        save_spectrum(spec, os.path.join(out_dir, name))
        manifest.append({"b_field_gauss": b, "path": name})
        outputs.append(os.path.join(out_dir, name))
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    outputs.append(manifest_path)
    return outputs, {"fields": len(fields), "noise": noise.kind}


def _simulate_letter_map(params, seed, out_dir) -> tuple[list[str], dict]:
    width = int(params.get("width", 512))
    height = int(params.get("height", 512))
    pl0 = float(params.get("pl_nv0", 8000.0))
    plm = float(params.get("pl_nvm", 12000.0))
    pitch = float(params.get("pixel_pitch_um", 0.1))
    nv0, nvm = make_letter_map(width, height, None, pl0, plm, pitch)
    outputs = []
    outputs += save_map(nv0, os.path.join(out_dir, "nv0_truth"))
    outputs += save_map(nvm, os.path.join(out_dir, "nvm_truth"))
    diag = {"width": width, "height": height}
    if "t0" in params and "tminus" in params:
        t0 = float(params["t0"])
        tm = float(params["tminus"])
        from .maps import PLMap

        m0 = PLMap(nv0.values + nvm.values, pitch)
        mlpf = PLMap(t0 * nv0.values + tm * nvm.values, pitch)
        outputs += save_map(m0, os.path.join(out_dir, "m0"))
        outputs += save_map(mlpf, os.path.join(out_dir, "mlpf"))
        diag.update({"t0": t0, "tminus": tm})
    return outputs, diag


def _simulate_field_map_pair(params, seed, out_dir) -> tuple[list[str], dict]:
    lm = params.get("letter_map", {})
    width = int(lm.get("width", 512))
    height = int(lm.get("height", 512))
    pl0 = float(lm.get("pl_nv0", 8000.0))
    plm = float(lm.get("pl_nvm", 12000.0))
    pitch = float(lm.get("pixel_pitch_um", 0.1))
    suppression = float(params.get("suppression", 1.0 / 6.2))
    nv0, nvm = make_letter_map(width, height, None, pl0, plm, pitch)
    low, high = make_field_map_pair(nv0, nvm, suppression)
    outputs = []
    outputs += save_map(nv0, os.path.join(out_dir, "nv0_truth"))
    outputs += save_map(nvm, os.path.join(out_dir, "nvm_truth"))
    outputs += save_map(low, os.path.join(out_dir, "low"))
    outputs += save_map(high, os.path.join(out_dir, "high"))
    return outputs, {"suppression": suppression, "implied_f": 1.0 / suppression}


_SIMULATORS = {
    "spectrum": _simulate_spectrum,
    "sweep": _simulate_sweep,
    "letter-map": _simulate_letter_map,
    "field-map-pair": _simulate_field_map_pair,
}


def cmd_simulate(args) -> int:
    params = {}
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            try:
                params = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.params}: invalid params JSON: {exc}") from exc
    os.makedirs(args.out, exist_ok=True)
    outputs, diag = _SIMULATORS[args.kind](params, args.seed, args.out)
    diag["seed"] = args.seed
    meta_path = os.path.join(args.out, "metadata.json")
    report = RunReport.create(
        f"simulate {args.kind}",
        [args.params] if args.params else [],
        {"params": params, "seed": args.seed},
        outputs,
        diag,
    )
    report.save(meta_path)
    print(f"wrote {len(outputs)} files to {args.out}  metadata = {meta_path}")
    return 0


def cmd_render(args) -> int:
    style = RenderStyle(
        zpl_guides=args.zpl_guides,
        clamp_negative=args.clamp,
        clip=_parse_range(args.clip) if args.clip else None,
    )
    if (args.spectrum is None) == (args.map is None):
        raise ValidationError("render needs exactly one of --spectrum or --map")
    if args.spectrum:
        data = render_spectrum_svg(load_spectrum(args.spectrum, negative="allow"), style)
    else:
        data = render_map_pgm(load_map(args.map), style)
    with open(args.out, "wb") as fh:
        fh.write(data)
    if args.report:
        inputs = [args.spectrum] if args.spectrum else _existing_map_files(args.map)
        RunReport.create(
            "render",
            inputs,
            {"zpl_guides": args.zpl_guides, "clamp": args.clamp, "clip": args.clip},
            [args.out],
            {"bytes": len(data)},
        ).save(args.report)
    print(f"wrote {args.out} ({len(data)} bytes)")
    return 0


def cmd_report(args) -> int:
    report = RunReport.load(args.run)
    print(f"command:    {report.command}")
    print(f"timestamp:  {report.timestamp}")
    print("inputs:")
    for path, digest in report.inputs:
        print(f"  {path}  sha256={digest}")
    print("parameters:")
    for key in sorted(report.parameters):
        print(f"  {key} = {report.parameters[key]}")
    print("outputs:")
    for path in report.outputs:
        print(f"  {path}")
    print("diagnostics:")
    for key in sorted(report.diagnostics):
        value = report.diagnostics[key]
        if isinstance(value, float):
            print(f"  {key} = {value:.6g}")
        else:
            print(f"  {key} = {value}")
    return 0


def _add_negative_flag(parser) -> None:
    parser.add_argument(
        "--negative",
        choices=["error", "clamp", "allow"],
        default="error",
        help="how to treat negative intensities in input files (default: error)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvunmix",
        description="Charge-state unmixing of NV-center PL spectra and maps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="difference-decompose low/high-field spectra")
    p.add_argument("--low", required=True, help="low-field spectrum (spec-csv)")
    p.add_argument("--high", required=True, help="high-field spectrum (spec-csv)")
    p.add_argument("--out-nv0", required=True)
    p.add_argument("--out-nvm", required=True)
    p.add_argument("--zpl-center", type=float, default=637.0)
    p.add_argument("--zpl-window", default="630:644")
    p.add_argument("--edge", type=float, default=4.0)
    p.add_argument("--f-range", default="1:50")
    p.add_argument("--f-steps", type=int, default=200)
    p.add_argument("--f-tol", type=float, default=1e-4)
    p.add_argument("--report", default=None)
    _add_negative_flag(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fit-series", help="fit a field sweep against basis spectra")
    p.add_argument("--basis-nv0", required=True)
    p.add_argument("--basis-nvm", required=True)
    p.add_argument("--series", required=True, help="JSON manifest of {b_field_gauss, path}")
    p.add_argument("--out-table", required=True)
    p.add_argument("--out-surface", default=None)
    p.add_argument("--unconstrained", action="store_true")
    p.add_argument("--report", default=None)
    _add_negative_flag(p)
    p.set_defaults(func=cmd_fit_series)

    p = sub.add_parser("transmissivity", help="filter transmissivity of a spectrum")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--tmax", type=float, default=0.9)
    p.add_argument("--center", type=float, default=645.0)
    p.add_argument("--width", type=float, default=6.9)
    p.add_argument("--window", default="550:850")
    p.add_argument("--filter-table", default=None, help="CSV of wavelength,transmission")
    p.add_argument("--report", default=None)
    _add_negative_flag(p)
    p.set_defaults(func=cmd_transmissivity)

    p = sub.add_parser("unmix-map-field", help="difference-unmix low/high-field maps")
    p.add_argument("--low", required=True)
    p.add_argument("--high", required=True)
    p.add_argument("--f", type=float, required=True)
    p.add_argument("--out", required=True, help="output stem")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_unmix_map_field, negative="allow")

    p = sub.add_parser("unmix-map-filter", help="filter-unmix unfiltered/filtered maps")
    p.add_argument("--m0", required=True)
    p.add_argument("--mlpf", required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--tm", type=float, required=True)
    p.add_argument("--out", required=True, help="output stem")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_unmix_map_filter, negative="allow")

    p = sub.add_parser("simulate", help="generate synthetic data")
    p.add_argument("kind", choices=sorted(_SIMULATORS))
    p.add_argument("--params", default=None, help="JSON parameter file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", help="render a spectrum (SVG) or map (PGM)")
    p.add_argument("--spectrum", default=None)
    p.add_argument("--map", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--zpl-guides", action="store_true")
    p.add_argument("--clamp", action="store_true", help="clamp negatives for display")
    p.add_argument("--clip", default=None, help="display clip range LO:HI")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="pretty-print a run report")
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ParseError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except (SingularityError, IdentifiabilityError, NoMinimumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except NvUnmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
