"""Command-line front end.

Exit codes: 0 success, 1 computation error, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from . import geometry as geo
from . import optimize as opt
from . import scatter
from .cache import SpectrumCache
from .errors import ConfigError, PCMError
from .io import write_csv, write_json
from .jones import ReflectionSpectrum
from .solver import _backend, run_unit_cell
from .solver.fdtd import config_hash

log = logging.getLogger("pcmrcs")

COMMANDS = ("unitcell", "array", "reduce", "lobes", "optimize", "validate")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pcmrcs", description="Polarization-conversion metasurface and checkerboard RCS tools.")
    p.add_argument("--version", action="version", version=f"pcmrcs {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("unitcell", "solve a unit cell: spectrum and PCR CSVs"),
        ("array", "bistatic pattern of the tiled aperture at one frequency"),
        ("reduce", "broadside monostatic RCS reduction over a band"),
        ("lobes", "predicted versus located checkerboard lobes"),
        ("optimize", "bandwidth search over the unit-cell geometry"),
        ("validate", "run the built-in oracle and property checks"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON config path, or 'paper' for the bundled example")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        s.add_argument("--cache", help="spectrum cache directory")
        s.add_argument("--freq", type=float, help="frequency in GHz (array, lobes)")
        s.add_argument("--threads", type=int, default=1, help="worker threads for independent evaluations")
        s.add_argument("--seed", type=_seed, default=0, help="optimizer seed (u64)")
        s.add_argument("--plot", action="store_true", help="also write SVG plots (needs matplotlib)")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


# --- helpers ---------------------------------------------------------------------


def _solve(cell: geo.UnitCellGeometry, solver_cfg, cache: SpectrumCache | None) -> ReflectionSpectrum:
    key = config_hash(cell, solver_cfg)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            log.info("cache hit %s", key[:12])
            return hit
    log.info("solving unit cell (%s kernels) ...", _backend.NAME)
    spec = run_unit_cell(cell, solver_cfg)
    if cache is not None:
        cache.put(key, spec)
    return spec


def _spectra(rc: cfgmod.RunConfig, cache):
    """(unit, mirror) spectra for the layout's converter choice."""
    conv = rc.block("layout").get("converter", "solver")
    if conv == "ideal":
        u = scatter.ideal_converter()
    elif conv == "solver":
        u = _solve(rc.cell(), rc.solver(), cache)
    else:
        raise ConfigError(f"layout.converter must be 'solver' or 'ideal', got {conv!r}")
    return u, u.mirrored()


def _layout(rc: cfgmod.RunConfig) -> geo.ApertureLayout:
    lay = rc.block("layout")
    region = lay.get("antenna_region")
    return geo.build_checkerboard(
        int(lay["tiles_x"]),
        int(lay["tiles_y"]),
        int(lay.get("cells_per_tile", 1)),
        rc.cell(),
        tuple(region) if region is not None else None,
    )


def _freq(args, rc) -> float:
    f = args.freq if args.freq is not None else rc.sweep().get("freq")
    if f is None:
        raise ConfigError("no frequency: pass --freq or set sweep.freq")
    return float(f)


def _spectrum_rows(spec: ReflectionSpectrum):
    pcr_y, pcr_x = spec.pcr("Y"), spec.pcr("X")
    rows = []
    for i, f in enumerate(spec.freqs):
        r = spec.r[i]
        row = [f]
        for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
            row += [r[a, b].real, r[a, b].imag]
        row += [abs(r[0, 1]), abs(r[1, 1]), pcr_y[i]]
        rows.append(row)
    header = [
        "freq_GHz",
        "re_rxx", "im_rxx", "re_rxy", "im_rxy", "re_ryx", "im_ryx", "re_ryy", "im_ryy",
        "abs_rxy", "abs_ryy", "pcr",
    ]  # fmt: skip
    return header, rows, pcr_y, pcr_x


# --- commands ----------------------------------------------------------------------


def cmd_unitcell(args, rc, out: Path, cache):
    spec = _solve(rc.cell(), rc.solver(), cache)
    header, rows, pcr_y, pcr_x = _spectrum_rows(spec)
    files = [write_csv(out / "spectrum.csv", header, rows)]
    files.append(
        write_csv(out / "pcr.csv", ["freq_GHz", "pcr_y", "pcr_x"], zip(spec.freqs, pcr_y, pcr_x))
    )
    bw = opt.fractional_bandwidth(spec.freqs, pcr_y, 0.9)
    print(f"PCR >= 0.9 fractional bandwidth: {bw:.4f}")
    if args.plot:
        from . import plots

        files.append(plots.plot_xy(out / "pcr.csv", "freq_GHz", ["pcr_y"], out / "pcr.svg", "PCR"))
        files.append(plots.plot_xy(out / "spectrum.csv", "freq_GHz", ["abs_rxy", "abs_ryy"], out / "spectrum.svg"))
    return files


def cmd_array(args, rc, out: Path, cache):
    f = _freq(args, rc)
    sw = rc.sweep()
    u, m = _spectra(rc, cache)
    ap = scatter.paint_aperture(_layout(rc), u, m, f, sw.get("incident_pol", "Y"), sw.get("samples_per_cell"))
    th = np.arange(0.0, float(sw.get("theta_max", 89.0)) + 1e-9, float(sw.get("theta_step", 0.5)))
    ph = np.arange(0.0, 360.0 - 1e-9, float(sw.get("phi_step", 0.5)))
    p = scatter.far_field(ap, th, ph)
    s = p.sigma_dbsm
    rows = ((t, q, s[i, j]) for i, t in enumerate(th) for j, q in enumerate(ph))
    files = [write_csv(out / "pattern.csv", ["theta_deg", "phi_deg", "sigma_dbsm"], rows)]
    if args.plot:
        from . import plots

        files.append(plots.plot_pattern(out / "pattern.csv", out / "pattern.svg"))
    return files


def cmd_reduce(args, rc, out: Path, cache):
    sw = rc.sweep()
    band = sw.get("band")
    if band is None:
        raise ConfigError("reduce needs sweep.band")
    u, m = _spectra(rc, cache)
    curve = scatter.monostatic_reduction(
        _layout(rc), u, m, band, int(sw.get("n_freq", 21)), sw.get("incident_pol", "Y"), threads=args.threads
    )
    rows = zip(curve.freqs, curve.sigma_layout_dbsm, curve.sigma_pec_dbsm, curve.delta_db)
    files = [write_csv(out / "reduction.csv", ["freq_GHz", "sigma_dbsm", "sigma_pec_dbsm", "delta_db"], rows)]
    print(f"max reduction {-curve.delta_db.min():.3f} dB, min reduction {-curve.delta_db.max():.3f} dB")
    if args.plot:
        from . import plots

        files.append(plots.plot_xy(out / "reduction.csv", "freq_GHz", ["delta_db"], out / "reduction.svg", "dB"))
    return files


def cmd_lobes(args, rc, out: Path, cache):
    f = _freq(args, rc)
    lay = _layout(rc)
    u, m = _spectra(rc, cache)
    pred = scatter.predict_lobes(lay.tile_pitch, f)
    p = scatter.far_field(scatter.paint_aperture(lay, u, m, f, rc.sweep().get("incident_pol", "Y")))
    found = scatter.dominant_peaks(scatter.find_peaks(p, 3.0))
    from .checks import lobe_offset

    rows = []
    for i, lobe in enumerate(pred):
        best = min(found, key=lambda pk: lobe_offset(pk, lobe)) if found else (np.nan, np.nan, np.nan)
        rows.append([i, lobe[0], lobe[1], best[0], best[1], best[2], lobe_offset(best, lobe)])
    header = ["lobe", "theta_pred_deg", "phi_pred_deg", "theta_found_deg", "phi_found_deg", "sigma_dbsm", "offset_deg"]
    print(f"{len(pred)} predicted lobes, {len(found)} dominant peaks located")
    return [write_csv(out / "lobes.csv", header, rows)]


def cmd_optimize(args, rc, out: Path, cache):
    o = rc.block("optimize")
    cell = rc.cell()
    if "bounds" in o:
        vals = {"major_axis": cell.major_axis, "minor_axis": cell.minor_axis, "period": cell.period, "h": cell.stack.h}
        bounds = {k: tuple(map(float, v)) for k, v in o["bounds"].items()}
        unknown = set(bounds) - set(vals)
        if unknown:
            raise ConfigError(f"optimize.bounds: unknown parameter(s) {', '.join(sorted(unknown))}")
        start = opt.DesignVector({k: vals[k] for k in bounds}, bounds)
    else:
        start = opt.design_from_cell(cell, float(o.get("rel_bounds", 0.25)))
    engine = o.get("engine", "TL_MODEL")
    try:
        engine = opt.Engine(engine)
    except ValueError:
        raise ConfigError(f"optimize.engine must be TL_MODEL or SOLVER, got {engine!r}") from None
    res = opt.optimize_design(
        start,
        band=tuple(o.get("band", (20.0, 60.0))),
        threshold=float(o.get("threshold", 0.9)),
        budget=int(o.get("budget", 200)),
        engine=engine,
        seed=args.seed,
        threads=args.threads,
        base=cell,
    )
    names = start.names
    rows = [[t.iteration, t.evaluations, *[t.values[k] for k in names], t.score, t.best_score] for t in res.trace]
    files = [write_csv(out / "trace.csv", ["iteration", "evaluation", *names, "bandwidth", "best_bandwidth"], rows)]
    files.append(
        write_json(
            out / "best_design.json",
            {
                "values": res.best.values,
                "bounds": {k: list(v) for k, v in res.best.bounds.items()},
                "bandwidth": res.score,
                "initial_bandwidth": res.initial_score,
                "evaluations": res.evaluations,
                "engine": engine.value,
                "seed": args.seed,
            },
        )
    )
    print(f"best bandwidth {res.score:.6f} (start {res.initial_score:.6f}) after {res.evaluations} evaluations")
    return files


def cmd_validate(args, rc, out: Path, cache):
    from .checks import run_all

    results = run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.6g} ({r.target})")
    path = write_csv(out / "validate.csv", ["check", "passed", "value"], ((r.name, r.passed, r.value) for r in results))
    if not all(r.passed for r in results):
        raise PCMError("one or more validation checks failed")
    return [path]


HANDLERS = {
    "unitcell": (cmd_unitcell, ("geometry", "stack")),
    "array": (cmd_array, ("geometry", "stack", "layout")),
    "reduce": (cmd_reduce, ("geometry", "stack", "layout", "sweep")),
    "lobes": (cmd_lobes, ("geometry", "stack", "layout")),
    "optimize": (cmd_optimize, ("geometry", "stack", "optimize")),
    "validate": (cmd_validate, ()),
}


def run_command(argv) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"pcmrcs: usage error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler, needs = HANDLERS[args.command]
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.config:
            rc = cfgmod.load(args.config)
        elif needs:
            raise ConfigError(f"'{args.command}' needs --config")
        else:
            rc = cfgmod.parse({})
        rc.require(*needs)
        out = rc.output_dir(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cache = SpectrumCache(args.cache) if args.cache else None
    except ConfigError as e:
        print(f"pcmrcs: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"pcmrcs: {e}", file=sys.stderr)
        return 2
    try:
        files = handler(args, rc, out, cache)
    except ConfigError as e:
        print(f"pcmrcs: {e}", file=sys.stderr)
        return 2
    except (PCMError, ValueError, OSError) as e:
        print(f"pcmrcs: {e}", file=sys.stderr)
        return 1
    manifest = {
        "tool": "pcmrcs",
        "version": __version__,
        "command": args.command,
        "config_hash": rc.content_hash,
        "reference_mode": "paper" if rc.has("geometry") and rc.is_paper_reference() else "custom",
        "kernels": _backend.NAME,
        "seed": args.seed,
        "files": sorted(Path(f).name for f in files),
    }
    write_json(out / "manifest.json", manifest)
    return 0


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
