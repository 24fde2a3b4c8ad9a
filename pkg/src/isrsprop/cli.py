"""Command line driver: scenario configs in, plot-ready CSV/JSON tables out.

Subcommands: solve (fixed-step oracle), closed-form, multispan, sweep,
preemph, osnr-target, validate-config.  Exit codes: 0 success, 2 config
error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import run_order_sweep, write_records_csv, write_summary_csv
from .closedform import derive_params, power_profile
from .config import RunConfig, parse_config
from .errors import (
    ConfigurationError,
    ConvergenceError,
    NumericalInstabilityError,
    RootBracketError,
)
from .inverse import TargetSpectrum, preemphasis_multispan, preemphasis_single_span
from .multispan import propagate_multispan_closedform
from .ode_oracle import PowerSpectrum, integrate_span, propagate_link_numerical
from .osnr import target_osnr


def _dbm(watts):
    return 10.0 * np.log10(np.asarray(watts) / 1e-3)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _write_table(path: Path, header: list[str], rows: list[list], fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        records = [dict(zip(header, row)) for row in rows]
        path.with_suffix(".json").write_text(
            json.dumps(records, indent=1, default=float) + "\n"
        )
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _spectrum_table(spectrum: PowerSpectrum) -> tuple[list[str], list[list]]:
    grid = spectrum.grid
    names = grid.band_names()
    rows = [
        [i, grid.frequencies[i], names[i], float(_dbm(spectrum.powers[i]))]
        for i in range(grid.n_channels)
    ]
    return ["channel", "frequency_thz", "band", "power_dbm"], rows


def _longitudinal_table(spectra) -> tuple[list[str], list[list]]:
    grid = spectra[0].grid
    header = ["z_km"] + [f"p_dbm_{f:.4f}" for f in grid.frequencies] + ["total_dbm"]
    rows = []
    for s in spectra:
        rows.append([s.z, *(_dbm(s.powers).tolist()), float(_dbm(s.total_power))])
    return header, rows


def _require(cfg: RunConfig, attr: str, what: str):
    value = getattr(cfg, attr)
    if value is None:
        raise ConfigurationError(f"this subcommand needs a {what} section in the config")
    return value


def cmd_solve(cfg: RunConfig, out: Path, fmt: str) -> None:
    launch = _require(cfg, "launch", "launch")
    if cfg.link is not None:
        result = propagate_link_numerical(launch, cfg.link, cfg.solver)
    else:
        fiber = _require(cfg, "fiber", "fiber")
        result = integrate_span(launch, fiber, cfg.solver)
    head, rows = _longitudinal_table(result.spectra)
    _write_table(out / f"{cfg.name}_solve_longitudinal.csv", head, rows, fmt)
    head, rows = _spectrum_table(result.final)
    _write_table(out / f"{cfg.name}_solve_spectrum.csv", head, rows, fmt)


def cmd_closed_form(cfg: RunConfig, out: Path, fmt: str) -> None:
    launch = _require(cfg, "launch", "launch")
    fiber = _require(cfg, "fiber", "fiber")
    params = derive_params(launch, fiber, cfg.order)
    slope = fiber.raman.as_triangular().slope
    zs = np.linspace(0.0, fiber.length, cfg.solver.steps_per_span + 1)
    spectra = [
        power_profile(launch, params, slope, float(z), refresh_reference=cfg.refresh_reference)
        for z in zs
    ]
    head, rows = _longitudinal_table(spectra)
    _write_table(out / f"{cfg.name}_closedform_longitudinal.csv", head, rows, fmt)
    head, rows = _spectrum_table(spectra[-1])
    _write_table(out / f"{cfg.name}_closedform_spectrum.csv", head, rows, fmt)


def cmd_multispan(cfg: RunConfig, out: Path, fmt: str) -> None:
    launch = _require(cfg, "launch", "launch")
    link = _require(cfg, "link", "link")
    result = propagate_multispan_closedform(launch, link, cfg.order)
    spectra = []
    starts = link.span_starts()
    for k, fiber in enumerate(link.spans):
        zs = np.linspace(0.0, fiber.length, cfg.solver.steps_per_span + 1)
        slope = fiber.raman.as_triangular().slope
        for z in zs:
            local = power_profile(result.span_inputs[k], result.params[k], slope, float(z))
            spectra.append(PowerSpectrum(local.grid, local.powers, z=float(starts[k] + z)))
    if link.receiver_boost:
        spectra.append(result.final.scaled(1.0, z=float(starts[-1])))
    head, rows = _longitudinal_table(spectra)
    _write_table(out / f"{cfg.name}_multispan_longitudinal.csv", head, rows, fmt)
    head, rows = _spectrum_table(result.final)
    _write_table(out / f"{cfg.name}_multispan_spectrum.csv", head, rows, fmt)


def cmd_sweep(cfg: RunConfig, out: Path, fmt: str, workers: int) -> None:
    sweep = _require(cfg, "sweep", "sweep")
    records, summaries = run_order_sweep(sweep, workers=workers)
    if fmt == "json":
        rec_rows = [r.__dict__ for r in records]
        (out / f"{cfg.name}_sweep_records.json").write_text(
            json.dumps(rec_rows, indent=1, default=float) + "\n"
        )
        (out / f"{cfg.name}_sweep_summary.json").write_text(
            json.dumps([s.__dict__ for s in summaries], indent=1, default=float) + "\n"
        )
        return
    out.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, out / f"{cfg.name}_sweep_records.csv")
    write_summary_csv(summaries, out / f"{cfg.name}_sweep_summary.csv")


def _launch_table(launch: PowerSpectrum) -> tuple[list[str], list[list]]:
    grid = launch.grid
    names = grid.band_names()
    rows = [
        [i, grid.frequencies[i], names[i], float(_dbm(launch.powers[i]))]
        for i in range(grid.n_channels)
    ]
    return ["channel", "frequency_thz", "band", "launch_power_dbm"], rows


def cmd_preemph(cfg: RunConfig, out: Path, fmt: str) -> None:
    if cfg.launch_mode != "preemphasis" or cfg.preemph_target is None:
        raise ConfigurationError("preemph needs launch.mode == 'preemphasis' with a target")
    target = cfg.preemph_target
    if cfg.link is not None and len(cfg.link.spans) > 1:
        if cfg.preemph_total_power is None:
            raise ConfigurationError("multi-span pre-emphasis needs total_launch_power_dbm")
        launch = preemphasis_multispan(target, cfg.link, cfg.preemph_total_power, cfg.order)
    else:
        fiber = cfg.fiber if cfg.link is None else cfg.link.spans[0]
        if fiber is None:
            raise ConfigurationError("preemph needs a fiber or link section")
        launch = preemphasis_single_span(
            target, fiber, cfg.order, total_launch_power=cfg.preemph_total_power
        )
    head, rows = _launch_table(launch)
    _write_table(out / f"{cfg.name}_preemph_launch.csv", head, rows, fmt)


def cmd_osnr_target(cfg: RunConfig, out: Path, fmt: str) -> None:
    link = _require(cfg, "link", "link")
    grid = _require(cfg, "grid", "grid")
    osnr_cfg = _require(cfg, "osnr", "osnr_target")
    if "values_db" in osnr_cfg:
        values = 10.0 ** (np.asarray(osnr_cfg["values_db"], dtype=float) / 10.0)
        target = TargetSpectrum(grid, values, normalized=True)
    elif osnr_cfg.get("shape", "flat") == "flat":
        target = TargetSpectrum.flat_shape(grid)
    else:
        raise ConfigurationError("osnr_target: expected shape='flat' or values_db")
    if "total_launch_power_dbm" in osnr_cfg:
        total = 10.0 ** (float(osnr_cfg["total_launch_power_dbm"]) / 10.0) * 1e-3
    else:
        total = _require(cfg, "launch", "launch").total_power
    b_ref = osnr_cfg.get("reference_bandwidth_ghz")
    run = target_osnr(
        target,
        link,
        total,
        step=float(osnr_cfg.get("step", 1.0)),
        tolerance=float(osnr_cfg.get("tolerance", 1e-5)),
        max_iterations=int(osnr_cfg.get("max_iterations", 50)),
        order=cfg.order,
        reference_bandwidth=float(b_ref) * 1e-3 if b_ref is not None else None,
        rmse_in_db=bool(osnr_cfg.get("rmse_in_db", False)),
    )
    head, rows = _launch_table(run.launch)
    _write_table(out / f"{cfg.name}_osnr_launch.csv", head, rows, fmt)
    hist_rows = [[i + 1, r] for i, r in enumerate(run.rmse_history)]
    _write_table(out / f"{cfg.name}_osnr_history.csv", ["iteration", "rmse"], hist_rows, fmt)
    names = grid.band_names()
    osnr_rows = [
        [i, grid.frequencies[i], names[i], float(10.0 * np.log10(run.osnr[i]))]
        for i in range(grid.n_channels)
    ]
    _write_table(
        out / f"{cfg.name}_osnr_profile.csv",
        ["channel", "frequency_thz", "band", "osnr_db"], osnr_rows, fmt,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isrsprop",
        description="Wideband WDM power evolution under Raman power transfer "
        "and frequency-dependent loss",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "fixed-step numerical power evolution"),
        ("closed-form", "closed-form single-span profile"),
        ("multispan", "closed-form multi-span propagation"),
        ("sweep", "closed-form accuracy sweep vs the numerical solver"),
        ("preemph", "launch pre-emphasis for a target output"),
        ("osnr-target", "iterative pre-emphasis for a target OSNR shape"),
        ("validate-config", "parse and validate a config file"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--output", default=".", help="output directory (default: cwd)")
        p.add_argument("--steps", type=int, default=None, help="override steps per span")
        p.add_argument("--order", type=int, default=None, help="override approximation order")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=1, help="parallel sweep processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.steps is not None:
            cfg = replace(cfg, solver=replace(cfg.solver, steps_per_span=args.steps))
            if cfg.sweep is not None:
                cfg = replace(cfg, sweep=replace(cfg.sweep, steps_per_span=args.steps))
        if args.order is not None:
            cfg = replace(cfg, order=args.order)
        out = Path(args.output)
        if args.command == "validate-config":
            print(f"ok: {args.config} ({cfg.name})")
            return 0
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            cmd_solve(cfg, out, args.format)
        elif args.command == "closed-form":
            cmd_closed_form(cfg, out, args.format)
        elif args.command == "multispan":
            cmd_multispan(cfg, out, args.format)
        elif args.command == "sweep":
            cmd_sweep(cfg, out, args.format, args.workers)
        elif args.command == "preemph":
            cmd_preemph(cfg, out, args.format)
        elif args.command == "osnr-target":
            cmd_osnr_target(cfg, out, args.format)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalInstabilityError, ConvergenceError, RootBracketError, FloatingPointError) as exc:
        print(f"numerical error in {args.config}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
