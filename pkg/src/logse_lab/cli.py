"""``logse-lab`` command-line harness.

Usage::

    logse-lab <command> [--config PATH] [--key value ...]

Commands: ``converge-time``, ``converge-space``, ``simulate``, ``truncation``,
``properties``. Keys are those of :mod:`logse_lab.config`; flags override
values from the config file.

Outputs (under ``output.dir``):

* ``report.csv``: ``tau|h, l2_error, h1_error, order_l2, order_h1`` for the
  convergence commands; ``tau, h, truncation_error, order`` for
  ``truncation``. The order columns are empty on the first row.
* ``series.csv``: ``t, mass, energy`` for ``simulate``.
* ``snap_<step>.bin``: field snapshots (see :mod:`logse_lab.snapshot`).
* ``properties.txt``: one tab-separated line per property.
* ``config.txt``: the resolved configuration.

Exit codes: 0 success, 1 invalid configuration, 2 numerical divergence,
3 failed acceptance window or property.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import GaussonParams, initial_condition
from .config import COMMANDS, ConfigError, ExperimentConfig, build_config, parse_flags, read_config_file
from .diagnostics import ConvergenceReport, estimate_order, mass
from .grid import GridFunction, GridSpec
from .properties import run_all
from .snapshot import Snapshot, snapshot_name, write_snapshot
from .stepping import DivergenceError, Every, SchemeParams, run_simulation
from .studies import spatial_study, temporal_study, truncation_study

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGENCE = 2
EXIT_ACCEPTANCE = 3

USAGE = f"usage: logse-lab <command> [--config PATH] [--key value ...]\ncommands: {', '.join(COMMANDS)}"


def _fmt(x: float) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def write_report(path: str, report: ConvergenceReport, norms: Sequence[str] = ("l2", "h1")) -> None:
    name = report.param_name
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([name] + [f"{n}_error" for n in norms] + [f"order_{n}" for n in norms])
        for row in report.rows():
            w.writerow([_fmt(row[name])] + [_fmt(row[f"{n}_error"]) for n in norms] + [_fmt(row[f"order_{n}"]) for n in norms])


def _check_windows(cfg: ExperimentConfig, fitted: dict[str, float], names=("l2", "h1")) -> list[str]:
    failures = []
    for norm, window in zip(names, (cfg.window_l2, cfg.window_h1)):
        if window is None or norm not in fitted:
            continue
        value = fitted[norm]
        if not (window[0] <= value <= window[1]):
            failures.append(f"fitted {norm} order {value:.4f} outside [{window[0]}, {window[1]}]")
    return failures


def _summarize(report: ConvergenceReport, out=None) -> None:
    out = sys.stdout if out is None else out
    for name, value in report.fitted.items():
        pair = ", ".join(f"{o:.4f}" for o in report.orders[name])
        print(f"{name}: fitted order {value:.4f}; pairwise [{pair}]", file=out)
    for w in report.warnings:
        print(f"warning: {w}", file=out)


def _gausson(cfg: ExperimentConfig) -> GaussonParams:
    return GaussonParams(cfg.omega, cfg.lam, cfg.dim)


def _zero_errors(cfg: ExperimentConfig, specs: list[GridSpec], taus: list[float]) -> dict[str, list[float]]:
    """Run the scheme from zero data and measure against the zero solution."""
    from .diagnostics import error_norms

    out = {"l2": [], "h1": []}
    for spec, tau in zip(specs, taus):
        p = SchemeParams.from_final_time(cfg.lam, tau, cfg.t_final, scheme=cfg.scheme, check_residual=cfg.residual_check)
        res = run_simulation(GridFunction.zeros(spec), p, series_stride=None)
        l2, h1 = error_norms(res.final, GridFunction.zeros(spec))
        out["l2"].append(l2)
        out["h1"].append(h1)
    return out


def cmd_converge_time(cfg: ExperimentConfig) -> tuple[ConvergenceReport, list[str]]:
    taus = cfg.refinement_values()
    if cfg.synthetic is not None:
        t = np.asarray(taus)
        report = estimate_order(taus, {"l2": t**cfg.synthetic, "h1": 2 * t**cfg.synthetic}, "tau")
    elif cfg.scenario.lower() == "zero":
        spec = GridSpec.from_spacing(cfg.dim, cfg.lower, cfg.upper, cfg.h)
        report = estimate_order(taus, _zero_errors(cfg, [spec] * len(taus), taus), "tau")
    else:
        spec = GridSpec.from_spacing(cfg.dim, cfg.lower, cfg.upper, cfg.h)
        report = temporal_study(
            cfg.scheme, _gausson(cfg), spec, taus, cfg.t_final,
            error_mode=cfg.error_mode, check_residual=cfg.residual_check,
        )
    write_report(os.path.join(cfg.output_dir, "report.csv"), report)
    return report, _check_windows(cfg, report.fitted)


def cmd_converge_space(cfg: ExperimentConfig) -> tuple[ConvergenceReport, list[str]]:
    hs = cfg.refinement_values()
    if cfg.synthetic is not None:
        h = np.asarray(hs)
        report = estimate_order(hs, {"l2": h**cfg.synthetic, "h1": 2 * h**cfg.synthetic}, "h")
    elif cfg.scenario.lower() == "zero":
        specs = [GridSpec.from_spacing(cfg.dim, cfg.lower, cfg.upper, h) for h in hs]
        report = estimate_order(hs, _zero_errors(cfg, specs, [cfg.tau] * len(hs)), "h")
    else:
        report = spatial_study(
            cfg.scheme, _gausson(cfg), cfg.lower, cfg.upper, hs, cfg.tau, cfg.t_final,
            error_mode=cfg.error_mode, check_residual=cfg.residual_check,
        )
    write_report(os.path.join(cfg.output_dir, "report.csv"), report)
    return report, _check_windows(cfg, report.fitted)


def cmd_truncation(cfg: ExperimentConfig) -> tuple[ConvergenceReport, list[str]]:
    values = cfg.refinement_values()
    if cfg.trunc_axis == "time":
        fixed = cfg.trunc_fixed if cfg.trunc_fixed is not None else cfg.h
    else:
        fixed = cfg.trunc_fixed if cfg.trunc_fixed is not None else 1e-7
    if cfg.scenario.lower() == "zero":
        report = estimate_order(values, {"xi": [0.0] * len(values)}, "tau" if cfg.trunc_axis == "time" else "h")
    else:
        report = truncation_study(cfg.scheme, _gausson(cfg), cfg.lower, cfg.upper, cfg.trunc_axis, values,
                                  fixed=fixed, n=cfg.trunc_step)
    path = os.path.join(cfg.output_dir, "report.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "h", "truncation_error", "order"])
        for row in report.rows():
            tau, h = (row["tau"], fixed) if cfg.trunc_axis == "time" else (fixed, row["h"])
            w.writerow([_fmt(tau), _fmt(h), _fmt(row["xi_error"]), _fmt(row["order_xi"])])
    return report, _check_windows(cfg, {"l2": report.fitted["xi"]}, ("l2",))


def cmd_simulate(cfg: ExperimentConfig) -> dict:
    spec = GridSpec.from_spacing(cfg.dim, cfg.lower, cfg.upper, cfg.h)
    name = cfg.scenario.lower()
    if name == "zero":
        u0 = GridFunction.zeros(spec)
    elif name == "gausson":
        from .analytic import exact_on_grid

        u0 = exact_on_grid(_gausson(cfg), spec, 0.0)
    else:
        u0 = initial_condition(cfg.scenario, spec)
    p = SchemeParams.from_final_time(cfg.lam, cfg.tau, cfg.t_final, scheme=cfg.scheme, check_residual=cfg.residual_check)

    observers = []
    peaks: list[tuple[float, float]] = []
    observers.append(Every(1, lambda n, t, u: peaks.append((t, float(np.max(np.abs(u.interior)))))))
    if cfg.snapshot_stride:
        def snap(n: int, t: float, u: GridFunction) -> None:
            write_snapshot(
                os.path.join(cfg.output_dir, snapshot_name(n)),
                Snapshot(u, step=n, time=t, scheme=p.scheme.value, lam=cfg.lam, tau=cfg.tau),
            )

        observers.append(Every(cfg.snapshot_stride, snap))
    res = run_simulation(u0, p, observers, series_stride=cfg.series_stride or None)
    if res.series is not None:
        with open(os.path.join(cfg.output_dir, "series.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mass", "energy"])
            for row in zip(res.series.times, res.series.mass, res.series.energy):
                w.writerow([repr(float(x)) for x in row])
    m0, m1 = mass(u0), mass(res.final)
    return {
        "steps": res.steps,
        "mass_initial": m0,
        "mass_final": m1,
        "peak_initial": peaks[0][1],
        "peak_final": peaks[-1][1],
        "peak_max": max(v for _, v in peaks),
    }


def cmd_properties(cfg: ExperimentConfig) -> list:
    results = run_all(seed=cfg.seed, samples=cfg.samples, inject=cfg.inject)
    with open(os.path.join(cfg.output_dir, "properties.txt"), "w") as fh:
        for r in results:
            fh.write(r.line() + "\n")
    return results


def _split_args(argv: list[str]) -> tuple[str, Optional[str], list[str]]:
    command, rest = argv[0], argv[1:]
    config_path = None
    flags = []
    i = 0
    while i < len(rest):
        if rest[i] == "--config":
            if i + 1 >= len(rest):
                raise ConfigError("--config needs a path")
            config_path = rest[i + 1]
            i += 2
        elif rest[i].startswith("--config="):
            config_path = rest[i].split("=", 1)[1]
            i += 1
        else:
            flags.append(rest[i])
            i += 1
    return command, config_path, flags


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return EXIT_OK if argv else EXIT_VALIDATION
    if argv[0] == "--version":
        print(__version__)
        return EXIT_OK
    try:
        command, config_path, flags = _split_args(argv)
        file_pairs = read_config_file(config_path) if config_path else []
        cfg = build_config(command, file_pairs, parse_flags(flags))
        os.makedirs(cfg.output_dir, exist_ok=True)
        if not os.access(cfg.output_dir, os.W_OK):
            raise ConfigError(f"directory {cfg.output_dir!r} is not writable", "output.dir")
        with open(os.path.join(cfg.output_dir, "config.txt"), "w") as fh:
            fh.write(cfg.echo())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: output.dir: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        if command == "properties":
            results = cmd_properties(cfg)
            for r in results:
                print(r.line())
            failed = [r.name for r in results if not r.passed]
            if failed:
                print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
                return EXIT_ACCEPTANCE
            return EXIT_OK
        if command == "simulate":
            summary = cmd_simulate(cfg)
            for k, v in summary.items():
                print(f"{k}: {v}")
            return EXIT_OK
        runner = {"converge-time": cmd_converge_time, "converge-space": cmd_converge_space, "truncation": cmd_truncation}
        report, failures = runner[command](cfg)
        _summarize(report)
        for f in failures:
            print(f"acceptance: {f}", file=sys.stderr)
        return EXIT_ACCEPTANCE if failures else EXIT_OK
    except DivergenceError as exc:
        print(f"error: divergence at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
