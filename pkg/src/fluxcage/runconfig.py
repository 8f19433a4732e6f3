"""Declarative run configuration.

The config file is INI-style: named sections containing ``key = value``
pairs.  Every key is validated against the schema below; unknown sections
or keys are rejected with their full path so typos cannot silently fall
back to defaults.  All energy-like values (coupling_J, delta, gamma, ...)
share one energy unit and all times are in units of pi/J.

Sections and keys (defaults in parentheses):

    [model]       cells (9), paths (5), coupling_J (1.0)
    [model.flux]  mode (odd_symmetric | even_symmetric | explicit),
                  phi (auto), m (1), values (comma-separated radians)
    [disorder]    mode (none | fixed | ensemble), delta (0.0),
                  delta_max (2.0), reps (500), seed (1),
                  site_overrides ("site:energy,site:energy", 1-based)
    [dissipation] gamma (0.0)
    [nonhermitian] gamma_nh (0.0)
    [time]        t_max (per command), samples (per command), dt (0.001)
    [initial]     site (central hub)
    [sweep]       axis_x (phi), axis_y (delta); each "name[:start:stop:points]"
    [output]      directory (out), formats (csv,json,svg),
                  ipn_definition (per_site), ipn_normalization (renormalized)

Per-command time defaults: evolve/lindblad use t_max 10 with 201 samples
(dynamics window); ensemble/sweep use t_max 150 with 300 samples (the
fluctuation protocol).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

from .dynamics import TimeGrid
from .ensemble import SweepAxis, default_axis
from .lattice import (
    DisorderAssignment,
    FluxConfig,
    LatticeSpec,
    caging_flux_even,
    caging_flux_odd,
    center_site,
)


class ConfigError(ValueError):
    """Invalid run configuration; the message carries the offending key path."""


_FLUX_MODES = ("odd_symmetric", "even_symmetric", "explicit")
_DISORDER_MODES = ("none", "fixed", "ensemble")
_FORMATS = ("csv", "json", "svg")
_IPN_DEFS = ("per_site", "per_cell")
_IPN_NORMS = ("raw", "renormalized")

#: Dynamics commands show a short window; statistics commands use the
#: 150 x 300 fluctuation protocol.
_TIME_DEFAULTS = {
    "evolve": (10.0, 201),
    "lindblad": (10.0, 201),
    "ensemble": (150.0, 300),
    "sweep": (150.0, 300),
    "bands": (10.0, 201),
    "check": (10.0, 201),
}

_SCHEMA = {
    "model": ("cells", "paths", "coupling_J"),
    "model.flux": ("mode", "phi", "m", "values"),
    "disorder": ("mode", "delta", "delta_max", "reps", "seed", "site_overrides"),
    "dissipation": ("gamma",),
    "nonhermitian": ("gamma_nh",),
    "time": ("t_max", "samples", "dt"),
    "initial": ("site",),
    "sweep": ("axis_x", "axis_y"),
    "output": ("directory", "formats", "ipn_definition", "ipn_normalization"),
}


@dataclass
class RunConfig:
    """Fully resolved configuration; every field holds a concrete value."""

    cells: int = 9
    paths: int = 5
    coupling: float = 1.0
    flux_mode: str = "odd_symmetric"
    flux_phi: Optional[float] = None  # None = the caging angle of the family
    flux_m: int = 1
    flux_values: Optional[tuple] = None
    disorder_mode: str = "none"
    delta: float = 0.0
    delta_max: float = 2.0
    reps: int = 500
    seed: int = 1
    site_overrides: Dict[int, float] = field(default_factory=dict)
    gamma: float = 0.0
    gamma_nh: float = 0.0
    t_max: Optional[float] = None
    samples: Optional[int] = None
    dt: float = 1e-3
    initial_site: Optional[int] = None
    axis_x: str = "phi"
    axis_y: str = "delta"
    directory: str = "out"
    formats: tuple = ("csv", "json", "svg")
    ipn_definition: str = "per_site"
    ipn_normalization: str = "renormalized"

    def flux(self) -> FluxConfig:
        if self.flux_mode == "explicit":
            if not self.flux_values:
                raise ConfigError("model.flux.values is required for explicit flux mode")
            if len(self.flux_values) != self.paths:
                raise ConfigError(
                    f"model.flux.values has {len(self.flux_values)} entries, "
                    f"model.paths is {self.paths}"
                )
            return FluxConfig(self.paths, self.flux_values)
        if self.flux_mode == "odd_symmetric":
            if self.flux_phi is None:
                return caging_flux_odd(self.paths)
            if self.paths % 2 == 0:
                raise ConfigError("odd_symmetric flux needs an odd path count")
            half = (self.paths - 1) // 2
            return FluxConfig(
                self.paths, (0.0,) + (self.flux_phi,) * half + (-self.flux_phi,) * half
            )
        base = 0.0 if self.flux_phi is None else self.flux_phi
        return caging_flux_even(self.paths, base=base, m=self.flux_m)

    def disorder(self) -> DisorderAssignment:
        overrides = dict(self.site_overrides) or None
        if self.disorder_mode == "fixed":
            return DisorderAssignment("fixed", self.delta, overrides)
        if self.disorder_mode == "ensemble":
            return DisorderAssignment("ensemble", self.delta_max, overrides)
        return DisorderAssignment("none", 0.0, overrides)

    def lattice_spec(self) -> LatticeSpec:
        try:
            return LatticeSpec(
                cells=self.cells,
                flux=self.flux(),
                coupling=self.coupling,
                disorder=self.disorder(),
                gamma_nh=self.gamma_nh,
                gamma_diss=self.gamma,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def time_grid(self, command: str) -> TimeGrid:
        t_default, s_default = _TIME_DEFAULTS.get(command, (150.0, 300))
        try:
            return TimeGrid(
                t_max=self.t_max if self.t_max is not None else t_default,
                samples=self.samples if self.samples is not None else s_default,
            )
        except ValueError as exc:
            raise ConfigError(f"time: {exc}") from exc

    def excitation_site(self) -> int:
        if self.initial_site is not None:
            return self.initial_site
        return center_site(self.cells, self.paths)

    def sweep_axes(self) -> tuple:
        ax = _parse_axis(self.axis_x, self.coupling)
        ay = _parse_axis(self.axis_y, self.coupling)
        if ax.name == ay.name:
            raise ConfigError("sweep.axis_x and sweep.axis_y must differ")
        return ax, ay

    def resolved(self, command: str) -> dict:
        """Plain-JSON echo of the fully resolved configuration."""
        grid = self.time_grid(command)
        out = {
            "model": {
                "cells": self.cells,
                "paths": self.paths,
                "coupling_J": self.coupling,
                "flux": {
                    "mode": self.flux_mode,
                    "phi": self.flux_phi,
                    "m": self.flux_m,
                    "values": list(self.flux().phases),
                },
            },
            "disorder": {
                "mode": self.disorder_mode,
                "delta": self.delta,
                "delta_max": self.delta_max,
                "reps": self.reps,
                "seed": self.seed,
                "site_overrides": {str(k): v for k, v in sorted(self.site_overrides.items())},
            },
            "dissipation": {"gamma": self.gamma},
            "nonhermitian": {"gamma_nh": self.gamma_nh},
            "time": {"t_max": grid.t_max, "samples": grid.samples, "dt": self.dt},
            "initial": {"site": self.excitation_site()},
            "output": {
                "directory": self.directory,
                "formats": list(self.formats),
                "ipn_definition": self.ipn_definition,
                "ipn_normalization": self.ipn_normalization,
            },
        }
        if command == "sweep":
            ax, ay = self.sweep_axes()
            out["sweep"] = {
                "axis_x": {"name": ax.name, "start": ax.start, "stop": ax.stop,
                           "points": ax.points},
                "axis_y": {"name": ay.name, "start": ay.start, "stop": ay.stop,
                           "points": ay.points},
            }
        return out


def _parse_axis(text: str, coupling: float) -> SweepAxis:
    parts = [p.strip() for p in text.split(":")]
    try:
        if len(parts) == 1:
            return default_axis(parts[0], coupling)
        if len(parts) == 4:
            return SweepAxis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise ConfigError(f"sweep axis {text!r}: {exc}") from exc
    raise ConfigError(
        f"sweep axis {text!r}: expected 'name' or 'name:start:stop:points'"
    )


def _get(parser, section, key, kind, path):
    raw = parser.get(section, key)
    try:
        if kind is int:
            value = int(raw)
        elif kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("must be finite")
        else:
            value = raw.strip()
        return value
    except ValueError as exc:
        raise ConfigError(f"{path}: cannot parse {raw!r} as {kind.__name__} ({exc})") from exc


def _parse_overrides(raw: str) -> Dict[int, float]:
    overrides: Dict[int, float] = {}
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(
                f"disorder.site_overrides: expected 'site:energy', got {chunk!r}"
            )
        site_text, energy_text = chunk.split(":", 1)
        try:
            overrides[int(site_text)] = float(energy_text)
        except ValueError as exc:
            raise ConfigError(f"disorder.site_overrides: {chunk!r}: {exc}") from exc
    return overrides


def load_config(path: Optional[str] = None) -> RunConfig:
    """Parse and validate a config file; ``None`` yields all defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (coupling_J)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found or unreadable")

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")

    def has(section, key):
        return parser.has_section(section) and parser.has_option(section, key)

    if has("model", "cells"):
        cfg.cells = _get(parser, "model", "cells", int, "model.cells")
    if has("model", "paths"):
        cfg.paths = _get(parser, "model", "paths", int, "model.paths")
    if has("model", "coupling_J"):
        cfg.coupling = _get(parser, "model", "coupling_J", float, "model.coupling_J")
    if has("model.flux", "mode"):
        cfg.flux_mode = _get(parser, "model.flux", "mode", str, "model.flux.mode")
        if cfg.flux_mode not in _FLUX_MODES:
            raise ConfigError(
                f"model.flux.mode must be one of {_FLUX_MODES}, got {cfg.flux_mode!r}"
            )
    if has("model.flux", "phi"):
        raw = parser.get("model.flux", "phi").strip()
        if raw.lower() != "auto":
            cfg.flux_phi = _get(parser, "model.flux", "phi", float, "model.flux.phi")
    if has("model.flux", "m"):
        cfg.flux_m = _get(parser, "model.flux", "m", int, "model.flux.m")
    if has("model.flux", "values"):
        raw = parser.get("model.flux", "values")
        try:
            cfg.flux_values = tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"model.flux.values: {exc}") from exc
    if has("disorder", "mode"):
        cfg.disorder_mode = _get(parser, "disorder", "mode", str, "disorder.mode")
        if cfg.disorder_mode not in _DISORDER_MODES:
            raise ConfigError(
                f"disorder.mode must be one of {_DISORDER_MODES}, got {cfg.disorder_mode!r}"
            )
    if has("disorder", "delta"):
        cfg.delta = _get(parser, "disorder", "delta", float, "disorder.delta")
    if has("disorder", "delta_max"):
        cfg.delta_max = _get(parser, "disorder", "delta_max", float, "disorder.delta_max")
        if cfg.delta_max < 0:
            raise ConfigError("disorder.delta_max must be >= 0")
    if has("disorder", "reps"):
        cfg.reps = _get(parser, "disorder", "reps", int, "disorder.reps")
        if cfg.reps < 1:
            raise ConfigError("disorder.reps must be >= 1")
    if has("disorder", "seed"):
        cfg.seed = _get(parser, "disorder", "seed", int, "disorder.seed")
        if not 0 <= cfg.seed < 2 ** 64:
            raise ConfigError("disorder.seed must fit in an unsigned 64-bit integer")
    if has("disorder", "site_overrides"):
        cfg.site_overrides = _parse_overrides(parser.get("disorder", "site_overrides"))
    if has("dissipation", "gamma"):
        cfg.gamma = _get(parser, "dissipation", "gamma", float, "dissipation.gamma")
        if cfg.gamma < 0:
            raise ConfigError("dissipation.gamma must be >= 0")
    if has("nonhermitian", "gamma_nh"):
        cfg.gamma_nh = _get(parser, "nonhermitian", "gamma_nh", float, "nonhermitian.gamma_nh")
    if has("time", "t_max"):
        cfg.t_max = _get(parser, "time", "t_max", float, "time.t_max")
    if has("time", "samples"):
        cfg.samples = _get(parser, "time", "samples", int, "time.samples")
    if has("time", "dt"):
        cfg.dt = _get(parser, "time", "dt", float, "time.dt")
        if cfg.dt <= 0:
            raise ConfigError("time.dt must be > 0")
    if has("initial", "site"):
        cfg.initial_site = _get(parser, "initial", "site", int, "initial.site")
        if cfg.initial_site < 1:
            raise ConfigError("initial.site is 1-based and must be >= 1")
    if has("sweep", "axis_x"):
        cfg.axis_x = _get(parser, "sweep", "axis_x", str, "sweep.axis_x")
    if has("sweep", "axis_y"):
        cfg.axis_y = _get(parser, "sweep", "axis_y", str, "sweep.axis_y")
    if has("output", "directory"):
        cfg.directory = _get(parser, "output", "directory", str, "output.directory")
    if has("output", "formats"):
        raw = parser.get("output", "formats")
        formats = tuple(f.strip() for f in raw.split(",") if f.strip())
        for f in formats:
            if f not in _FORMATS:
                raise ConfigError(f"output.formats: unknown format {f!r}")
        cfg.formats = formats
    if has("output", "ipn_definition"):
        cfg.ipn_definition = _get(parser, "output", "ipn_definition", str,
                                  "output.ipn_definition")
        if cfg.ipn_definition not in _IPN_DEFS:
            raise ConfigError(
                f"output.ipn_definition must be one of {_IPN_DEFS}"
            )
    if has("output", "ipn_normalization"):
        cfg.ipn_normalization = _get(parser, "output", "ipn_normalization", str,
                                     "output.ipn_normalization")
        if cfg.ipn_normalization not in _IPN_NORMS:
            raise ConfigError(
                f"output.ipn_normalization must be one of {_IPN_NORMS}"
            )

    # surface physical-validation errors now, with config context
    cfg.lattice_spec()
    if cfg.initial_site is not None and cfg.initial_site > cfg.lattice_spec().size:
        raise ConfigError(
            f"initial.site = {cfg.initial_site} outside 1..{cfg.lattice_spec().size}"
        )
    return cfg
