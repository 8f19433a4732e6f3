"""Command-line interface.

Subcommands: check, bands, evolve, lindblad, ensemble, sweep.
Exit codes: 0 ok, 1 config error, 2 numeric failure, 3 sweep finished with
failed (NaN) grid points.

Every data-producing command writes a ``<command>_manifest.json`` echoing
the fully resolved configuration, the seed and the tool version; rerunning
with the same config and seed reproduces all CSV/JSON outputs byte for
byte regardless of --threads.  Timings are printed to stdout only.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .ensemble import EnsembleSpec, ensemble_average, run_trajectory, sweep_sigma
from .lattice import (
    caging_flux_even,
    caging_flux_odd,
    flat_band_check,
    flat_band_residuals,
)
from .outputs import (
    fmt,
    write_band_csv,
    write_heatmap_svg,
    write_ipn_csv,
    write_manifest_json,
    write_mean_heatmap_svg,
    write_mean_ipn_csv,
    write_sweep_csv,
    write_sweep_svg,
    write_trajectory_csv,
)
from .runconfig import ConfigError, load_config
from .spectra import band_structure

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_PARTIAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxcage",
        description="Flat-band caging dynamics in multi-path flux lattices",
    )
    parser.add_argument("--version", action="version", version=f"fluxcage {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "report the flat-band interference residuals for the configured flux"),
        ("bands", "band structure CSV and flatness summary"),
        ("evolve", "closed or non-Hermitian single-excitation evolution"),
        ("lindblad", "dissipative evolution with the virtual-sink master equation"),
        ("ensemble", "seeded random-disorder ensemble averages"),
        ("sweep", "2D phase diagram of the IPN fluctuation sigma"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="path to an INI run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config output.directory)")
        p.add_argument("--seed", type=int, default=None, help="ensemble seed override (u64)")
        p.add_argument("--threads", type=int, default=1, help="parallel worker count")
        p.add_argument("--ipn", choices=("per_site", "per_cell"), default=None,
                       help="IPN definition override")
        p.add_argument("--format", dest="formats", default=None,
                       help="comma-separated subset of csv,json,svg")
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must fit in an unsigned 64-bit integer")
        cfg.seed = args.seed
    if args.out is not None:
        cfg.directory = args.out
    if args.ipn is not None:
        cfg.ipn_definition = args.ipn
    if args.formats is not None:
        formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
        for f in formats:
            if f not in ("csv", "json", "svg"):
                raise ConfigError(f"--format: unknown format {f!r}")
        cfg.formats = formats
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    return cfg


def _outpath(cfg, name):
    os.makedirs(cfg.directory, exist_ok=True)
    return os.path.join(cfg.directory, name)


def _manifest(cfg, command, extra=None):
    payload = {
        "command": command,
        "tool": "fluxcage",
        "version": __version__,
        "config": cfg.resolved(command),
    }
    if extra:
        payload.update(extra)
    return payload


def _cmd_check(cfg, args) -> int:
    flux = cfg.flux()
    rc, rs = flat_band_residuals(flux)
    passed = flat_band_check(flux)
    print(f"paths           : {flux.paths}")
    print(f"phases (rad)    : {', '.join(fmt(p) for p in flux.phases)}")
    print(f"sum cos         : {rc:.6e}")
    print(f"sum sin         : {rs:.6e}")
    if flux.paths % 2:
        caged = caging_flux_odd(flux.paths) if flux.paths >= 3 else None
    else:
        caged = caging_flux_even(flux.paths)
    if caged is not None:
        print(f"caging flux     : {', '.join(fmt(p) for p in caged.phases)}")
        if flux.paths % 2:
            print(f"caging angle    : arccos(-1/{flux.paths - 1}) = "
                  f"{fmt(math.acos(-1.0 / (flux.paths - 1)))}")
    print(f"flat band       : {'PASS' if passed else 'FAIL'}")
    return EXIT_OK


def _cmd_bands(cfg, args) -> int:
    bands = band_structure(cfg.flux(), cfg.coupling, k_points=201)
    if "csv" in cfg.formats:
        path = _outpath(cfg, "bands.csv")
        write_band_csv(path, bands)
        print(f"wrote {path}")
    if "json" in cfg.formats:
        path = _outpath(cfg, "bands_manifest.json")
        write_manifest_json(path, _manifest(cfg, "bands", {
            "flatness": bands.flatness,
            "k_points": len(bands.k_grid),
        }))
        print(f"wrote {path}")
    print(f"flatness        : {bands.flatness:.6e} "
          f"({'flat' if bands.flatness < 1e-9 * cfg.coupling else 'dispersive'})")
    return EXIT_OK


def _cmd_evolve(cfg, args) -> int:
    if cfg.gamma > 0:
        raise ConfigError("dissipation.gamma > 0: use the 'lindblad' command")
    if cfg.disorder_mode == "ensemble":
        raise ConfigError(
            "disorder.mode = ensemble needs the 'ensemble' command; "
            "use none or fixed for single runs"
        )
    spec = cfg.lattice_spec()
    grid = cfg.time_grid("evolve")
    start = time.perf_counter()
    traj, series = run_trajectory(
        spec, grid, site=cfg.excitation_site(),
        ipn_definition=cfg.ipn_definition,
        ipn_normalization=cfg.ipn_normalization,
        rk4_dt=cfg.dt,
    )
    elapsed = time.perf_counter() - start
    if "csv" in cfg.formats:
        for name, writer, payload in (
            ("trajectory.csv", write_trajectory_csv, traj),
            ("ipn.csv", write_ipn_csv, series),
        ):
            path = _outpath(cfg, name)
            writer(path, payload)
            print(f"wrote {path}")
    if "svg" in cfg.formats:
        path = _outpath(cfg, "heatmap.svg")
        write_heatmap_svg(path, traj, title="site populations")
        print(f"wrote {path}")
    if "json" in cfg.formats:
        path = _outpath(cfg, "evolve_manifest.json")
        write_manifest_json(path, _manifest(cfg, "evolve", {"engine": traj.engine}))
        print(f"wrote {path}")
    print(f"engine {traj.engine}; final IPN {series.values[-1]:.6f}; {elapsed:.2f}s")
    return EXIT_OK


def _cmd_lindblad(cfg, args) -> int:
    if cfg.disorder_mode == "ensemble":
        raise ConfigError(
            "disorder.mode = ensemble needs the 'ensemble' command; "
            "use none or fixed for single runs"
        )
    spec = cfg.lattice_spec()
    grid = cfg.time_grid("lindblad")
    if spec.gamma_nh != 0:
        raise ConfigError("lindblad evolution needs nonhermitian.gamma_nh = 0")
    start = time.perf_counter()
    traj, series = run_trajectory(
        spec, grid, site=cfg.excitation_site(),
        ipn_definition=cfg.ipn_definition,
        lindblad_fast_path=False, dt=cfg.dt,
    )
    elapsed = time.perf_counter() - start
    if "csv" in cfg.formats:
        for name, writer, payload in (
            ("trajectory.csv", write_trajectory_csv, traj),
            ("ipn.csv", write_ipn_csv, series),
        ):
            path = _outpath(cfg, name)
            writer(path, payload)
            print(f"wrote {path}")
    if "json" in cfg.formats:
        path = _outpath(cfg, "lindblad_manifest.json")
        write_manifest_json(path, _manifest(cfg, "lindblad", {"engine": traj.engine}))
        print(f"wrote {path}")
    print(f"engine {traj.engine}; sink population {traj.populations[-1, -1]:.6f}; {elapsed:.2f}s")
    return EXIT_OK


def _cmd_ensemble(cfg, args) -> int:
    spec = cfg.lattice_spec()
    if spec.disorder.mode != "ensemble":
        raise ConfigError("the ensemble command needs disorder.mode = ensemble")
    espec = EnsembleSpec(base=spec, delta_max=cfg.delta_max, reps=cfg.reps, seed=cfg.seed)
    grid = cfg.time_grid("ensemble")
    start = time.perf_counter()
    result = ensemble_average(
        espec, grid, site=cfg.excitation_site(),
        ipn_definition=cfg.ipn_definition, workers=args.threads,
    )
    elapsed = time.perf_counter() - start
    times = grid.times()
    if "csv" in cfg.formats:
        path = _outpath(cfg, "mean_ipn.csv")
        write_mean_ipn_csv(path, times, result.mean_ipn)
        print(f"wrote {path}")
    if "svg" in cfg.formats:
        path = _outpath(cfg, "mean_heatmap.svg")
        write_mean_heatmap_svg(path, times, result.mean_populations,
                               title=f"mean populations ({result.reps} realizations)")
        print(f"wrote {path}")
    if "json" in cfg.formats:
        path = _outpath(cfg, "ensemble_manifest.json")
        write_manifest_json(path, _manifest(cfg, "ensemble", {
            "reps": result.reps,
            "seed": result.seed,
            "final_mean_ipn": float(result.mean_ipn[-1]),
        }))
        print(f"wrote {path}")
    print(f"{result.reps} realizations; final mean IPN {result.mean_ipn[-1]:.6f}; {elapsed:.2f}s")
    return EXIT_OK


def _cmd_sweep(cfg, args) -> int:
    if cfg.disorder_mode == "ensemble":
        raise ConfigError(
            "sweeps scan fixed parameters; set disorder.mode to none or fixed"
        )
    spec = cfg.lattice_spec()
    axis_x, axis_y = cfg.sweep_axes()
    grid = cfg.time_grid("sweep")
    start = time.perf_counter()
    result = sweep_sigma(
        spec, axis_x, axis_y, grid,
        site=cfg.excitation_site(),
        ipn_definition=cfg.ipn_definition,
        ipn_normalization=cfg.ipn_normalization,
        workers=args.threads,
        dt=cfg.dt,
    )
    elapsed = time.perf_counter() - start
    if "csv" in cfg.formats:
        path = _outpath(cfg, "sweep.csv")
        write_sweep_csv(path, result)
        print(f"wrote {path}")
    if "svg" in cfg.formats:
        path = _outpath(cfg, "sweep.svg")
        write_sweep_svg(path, result, title="IPN fluctuation sigma")
        print(f"wrote {path}")
    if "json" in cfg.formats:
        path = _outpath(cfg, "sweep_manifest.json")
        write_manifest_json(path, _manifest(cfg, "sweep", {
            "seed": cfg.seed,
            "sweep_metadata": result.metadata,
        }))
        print(f"wrote {path}")
    failures = result.metadata["failures"]
    points = axis_x.points * axis_y.points
    print(f"{points} grid points, {len(failures)} failed; {elapsed:.2f}s")
    if failures:
        print(f"failed points recorded as NaN; first: {failures[0]}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


_COMMANDS = {
    "check": _cmd_check,
    "bands": _cmd_bands,
    "evolve": _cmd_evolve,
    "lindblad": _cmd_lindblad,
    "ensemble": _cmd_ensemble,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
