"""Command-line surface: norms, decay-fit, wave-fit, simulate, probe, report.

Every command reads one TOML config (``--config``, with ``--set`` dotted
overrides), writes CSV with 17-significant-digit floats so values survive
a round trip, renders SVG figures next to the CSVs, and echoes the config
verbatim into the output directory.  Commands that evaluate gated checks
exit nonzero when one fails, naming the criterion.
"""
from __future__ import annotations

import argparse
import csv
import glob
import os
import sys
from typing import Iterable, Sequence

import numpy as np

from .besov import A_HIGH, LOW_PAIR, U_HIGH, chemin_lerner_running, x0_norm
from .config import ConfigError, RunConfig, load_config, parse_config
from .dyadic import DyadicPartition
from .experiments import (
    ExperimentReport,
    apriori_bound_experiment,
    continuity_probe,
    critical_norm,
    high_osc_experiment,
    momentum_equivalence_experiment,
    run_probe_suite,
    scaled_state,
    unit_random_state,
)
from .grid import SpectralField
from .probes import ProbeResult, ProbeSpec, WaveGrowthResult, low_decay_probe, wave_growth_probe
from .solver import SimulationResult, StateAM, am_to_uv, simulate, uv_to_am
from .snapshot import read_state, write_state

__all__ = ["main"]


# ---------------------------------------------------------------------------
# output plumbing


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def _echo_config(cfg: RunConfig, out_dir: str) -> None:
    lines = [cfg.text.rstrip("\n")]
    if cfg.overrides:
        lines += ["", "# applied overrides:"]
        lines += [f"# --set {ov}" for ov in cfg.overrides]
    with open(os.path.join(out_dir, "config_echo.toml"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _prepare_out(cfg: RunConfig, args) -> str:
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _echo_config(cfg, out_dir)
    return out_dir


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


def _write_checks(path: str, checks, source: str) -> None:
    write_csv(
        path,
        ["criterion", "name", "passed", "detail", "source"],
        [(c.criterion, c.name, c.passed, c.detail, source) for c in checks],
    )


def _gate(checks) -> int:
    """Exit code from gated checks; advisory rows never block."""
    failed = sorted({c.criterion for c in checks if not c.passed and c.criterion != "advisory"})
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# subcommands


def _cmd_norms(cfg: RunConfig, args) -> int:
    state = read_state(args.snapshot)
    if isinstance(state, StateAM):
        uv, am = am_to_uv(state), state
    else:
        uv, am = state, uv_to_am(state)
    grid = state.grid
    part = DyadicPartition(grid, k0=cfg.k0)
    p, q = cfg.pair.p, cfg.pair.q
    a_crit, u_crit = critical_norm(uv, p, part)
    rows = [
        ("a_critical", f"B^({grid.d}/p)_p1", a_crit),
        ("u_critical", f"B^(-1+{grid.d}/p)_p1", u_crit),
    ]
    # the momentum field measured like the velocity
    from .besov import BesovIndex, besov_norm

    m_f = SpectralField(grid, am.spectral().coef[1:])
    rows.append(("m_critical", f"B^(-1+{grid.d}/p)_p1", besov_norm(m_f, BesovIndex(-1 + grid.d / p, p, 1), part)))
    if grid.d == 3:
        fh = uv.spectral()
        a_f = SpectralField(grid, fh.coef[:1])
        u_f = SpectralField(grid, fh.coef[1:])
        rows.append(("X0", f"hybrid data norm (q={q:g}, p={p:g})", x0_norm(a_f, u_f, m_f, cfg.pair, part)))
    rows.append(("mass", "mean(a) * volume", float(np.mean(uv.a)) * grid.volume))
    rows.append(("min_density", "1 + min(a)", 1.0 + float(np.min(uv.a))))
    width = max(len(r[0]) for r in rows)
    for name, desc, value in rows:
        print(f"{name:<{width}}  {_fmt(value):>24}  ({desc})")
    return 0


def _decay_tolerance(d: int, p: float) -> float:
    if p == 2:
        return 0.05
    return 0.10 if d == 2 else 0.15


def _cmd_decay_fit(cfg: RunConfig, args) -> int:
    from .experiments import CriterionCheck
    from .plots import decay_plot

    out_dir = _prepare_out(cfg, args)
    pr = cfg.probe
    spec = ProbeSpec(d=pr.d, p=pr.p, k_list=pr.k_list, tau_list=pr.taus, backend=pr.backend)
    grid = cfg.grid if pr.backend == "grid" else None
    result = low_decay_probe(spec, grid=grid, branch=pr.branch, seed=cfg.seed)
    write_csv(
        os.path.join(out_dir, "decay_fit.csv"),
        ["d", "p", "k", "tau", "value", "fitted_slope", "ci_low", "ci_high", "expected_slope"],
        [
            (r["d"], r["p"], r["k"], r["tau"], r["value"],
             r["fitted_slope"], r["ci_low"], r["ci_high"], result.expected_slope)
            for r in result.rows
        ],
    )
    decay_plot(result, os.path.join(out_dir, "decay_fit.svg"))
    tol = _decay_tolerance(pr.d, pr.p)
    # The slope is gated at the largest normalized time: by then the wave
    # shell has separated from the core on every block in the sweep.
    # Shorter times are reported for context but sit mid-transition at the
    # top of the k range, so they stay advisory.
    tau_gate = max(result.fits)
    checks = [
        CriterionCheck(
            "criterion-3" if tau == tau_gate else "advisory",
            f"decay slope d={pr.d} p={pr.p:g} tau={tau:g}",
            abs(slope - result.expected_slope) <= tol,
            f"fitted {slope:.4f}, expected {result.expected_slope:+.4f} ± {tol:g}",
        )
        for tau, (slope, _, _) in result.fits.items()
    ]
    _write_checks(os.path.join(out_dir, "checks_decay.csv"), checks, "decay-fit")
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.criterion} {c.name}: {c.detail}")
    return _gate(checks)


def _cmd_wave_fit(cfg: RunConfig, args) -> int:
    from .experiments import CriterionCheck
    from .plots import wave_plot

    out_dir = _prepare_out(cfg, args)
    pr = cfg.probe
    result = wave_growth_probe(d=pr.d, t_fit=pr.t_fit)
    write_csv(
        os.path.join(out_dir, "wave_fit.csv"),
        ["t", "norm"],
        list(zip(result.t_values, result.norms)),
    )
    wave_plot(result, os.path.join(out_dir, "wave_fit.svg"))
    expected = (pr.d - 1) / 2.0
    checks = [
        CriterionCheck(
            "criterion-4",
            f"half-wave L1 growth exponent d={pr.d}",
            abs(result.exponent - expected) <= 0.15,
            f"fitted {result.exponent:.4f} (CI [{result.ci[0]:.4f}, {result.ci[1]:.4f}]), "
            f"expected {expected:g} ± 0.15; early-time max ratio {result.early_ratio:.4f}",
        )
    ]
    _write_checks(os.path.join(out_dir, "checks_wave.csv"), checks, "wave-fit")
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.criterion} {c.name}: {c.detail}")
    return _gate(checks)


_DIAG_COLUMNS = (
    "t", "X_low_inf", "X_low_2", "X_low_1",
    "a_high_inf", "a_high_1", "u_high_inf", "u_high_1",
    "mass", "min_density",
)


def diagnostics_table(result: SimulationResult, q: float, p: float) -> dict[str, np.ndarray]:
    """The running functional aggregates behind the diagnostics CSV."""
    d = result.grid.d
    tr = result.tracker

    def running(label: str, s: float, rho: float) -> np.ndarray:
        times, mat, k_list, _ = tr.series(label)
        return chemin_lerner_running(times, mat, k_list, s, rho)

    times, mass = tr.scalar_series("mass")
    _, dens = tr.scalar_series("min_density")
    return {
        "t": times,
        "X_low_inf": running(LOW_PAIR, -1 + d / q, np.inf),
        "X_low_2": running(LOW_PAIR, -1 + (d + 2) / q, 2),
        "X_low_1": running(LOW_PAIR, (d + 2) / q, 1),
        "a_high_inf": running(A_HIGH, d / p, np.inf),
        "a_high_1": running(A_HIGH, d / p, 1),
        "u_high_inf": running(U_HIGH, -1 + d / p, np.inf),
        "u_high_1": running(U_HIGH, 1 + d / p, 1),
        "mass": mass,
        "min_density": dens,
    }


def _cmd_simulate(cfg: RunConfig, args) -> int:
    from .plots import diagnostics_plot

    out_dir = _prepare_out(cfg, args)
    if args.snapshot:
        state0 = read_state(args.snapshot)
    else:
        state0 = scaled_state(unit_random_state(cfg.grid, cfg.seed), cfg.experiment.delta)
    n_snap = max(args.snapshots, 0)
    snap_times = tuple(cfg.T * (i + 1) / n_snap for i in range(n_snap))
    result = simulate(
        state0,
        T=cfg.T,
        dt=cfg.dt,
        params=cfg.params,
        law=cfg.law,
        pair=cfg.pair,
        k0=cfg.k0,
        track_stride=args.track_stride,
        snapshot_times=snap_times,
        dealias=cfg.dealias,
    )
    cols = diagnostics_table(result, cfg.pair.q, cfg.pair.p)
    write_csv(
        os.path.join(out_dir, "diagnostics.csv"),
        list(_DIAG_COLUMNS),
        list(zip(*(cols[c] for c in _DIAG_COLUMNS))),
    )
    diagnostics_plot(cols["t"], cols, os.path.join(out_dir, "diagnostics.svg"))
    for i, (t, state) in enumerate(result.snapshots):
        write_state(os.path.join(out_dir, f"snapshot_{i + 1:04d}.cnsb"), state)
    print(
        f"simulated {result.formulation} flow to T={cfg.T:g} in {result.steps} steps; "
        f"wrote diagnostics.csv and {len(result.snapshots)} snapshot(s) to {out_dir}"
    )
    return 0


def _dispatch_experiment(cfg: RunConfig) -> ExperimentReport:
    ex = cfg.experiment
    if ex.name == "suite":
        return run_probe_suite(
            seed=cfg.seed,
            trials=ex.trials,
            sweep_trials=ex.sweep_trials,
            sweep_levels=ex.sweep_levels,
            slack=ex.slack,
            include=ex.include,
        )
    if ex.name == "apriori":
        return apriori_bound_experiment(
            cfg.pair, deltas=ex.deltas, T=cfg.T, grid=cfg.grid, dt=cfg.dt,
            seed=cfg.seed, params=cfg.params, law=cfg.law,
        )
    if ex.name == "momentum":
        return momentum_equivalence_experiment(
            cfg.pair, delta=ex.delta, T=cfg.T, grid=cfg.grid, dt=cfg.dt,
            seed=cfg.seed, params=cfg.params, law=cfg.law,
        )
    if ex.name == "high_osc":
        return high_osc_experiment(eps_list=ex.eps_list, p_list=ex.p_list)
    if ex.name == "continuity":
        return continuity_probe(
            cfg.pair, delta=ex.delta, etas=ex.etas, T=cfg.T, grid=cfg.grid,
            dt=cfg.dt, seed=cfg.seed, mode=ex.mode, params=cfg.params, law=cfg.law,
        )
    raise ValueError(f"unknown experiment {ex.name!r}")


def _cmd_probe(cfg: RunConfig, args) -> int:
    from .plots import probe_plot

    out_dir = _prepare_out(cfg, args)
    report = _dispatch_experiment(cfg)
    tag = _slug(report.name)
    _write_checks(os.path.join(out_dir, f"checks_{tag}.csv"), report.checks, f"probe:{report.name}")
    meas = [("runtime_seconds", report.runtime_seconds)] + sorted(report.measurements.items())
    write_csv(os.path.join(out_dir, f"measurements_{tag}.csv"), ["key", "value"], meas)
    for table in report.tables:
        write_csv(
            os.path.join(out_dir, f"table_{_slug(table.name)}.csv"),
            list(table.columns),
            table.rows,
        )
    if report.tables:
        probe_plot(report.tables, os.path.join(out_dir, f"probe_{tag}.svg"))
    for c in report.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.criterion} {c.name}: {c.detail}")
    print(f"{report.name}: {len(report.checks)} checks, {report.runtime_seconds:.1f}s")
    return _gate(report.checks)


def _cmd_report(cfg: RunConfig, args) -> int:
    from .plots import summary_plot

    out_dir = _prepare_out(cfg, args)
    paths = sorted(glob.glob(os.path.join(out_dir, "checks_*.csv")))
    if not paths:
        print(f"no checks_*.csv under {out_dir}; run probe/decay-fit/wave-fit first", file=sys.stderr)
        return 2
    rows = []
    for path in paths:
        header, body = read_csv(path)
        if header != ["criterion", "name", "passed", "detail", "source"]:
            raise ValueError(f"{path}: unexpected checks header {header}")
        rows.extend(body)

    def sort_key(row):
        criterion = row[0]
        num = int(criterion.rsplit("-", 1)[1]) if criterion.startswith("criterion-") else 999
        return (num, criterion, row[4], row[1])

    rows.sort(key=sort_key)
    write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["criterion", "name", "passed", "detail", "source"],
        rows,
    )
    criteria: dict[str, list[bool]] = {}
    for criterion, _, passed, _, _ in rows:
        criteria.setdefault(criterion, []).append(passed == "true")
    rollup = [
        (criterion, f"{sum(oks)}/{len(oks)} checks", all(oks))
        for criterion, oks in criteria.items()
    ]
    write_csv(
        os.path.join(out_dir, "criteria.csv"),
        ["criterion", "checks", "passed"],
        rollup,
    )
    summary_plot(rollup, os.path.join(out_dir, "summary.svg"))
    failed = []
    for criterion, detail, ok in rollup:
        print(f"[{'PASS' if ok else 'FAIL'}] {criterion} ({detail})")
        if not ok and criterion != "advisory":
            failed.append(criterion)
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpcns",
        description="Pseudo-spectral probes for a barotropic compressible flow model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="TOML config file; defaults apply when omitted")
        sp.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override one config value (dotted path), repeatable",
        )
        sp.add_argument("--out", help="output directory (overrides [output] dir)")

    sp = sub.add_parser("norms", help="print data norms for a snapshot")
    common(sp)
    sp.add_argument("snapshot", help="CNSB snapshot file")
    sp.set_defaults(fn=_cmd_norms)

    sp = sub.add_parser("decay-fit", help="dyadic decay slopes of the low-frequency propagator")
    common(sp)
    sp.set_defaults(fn=_cmd_decay_fit)

    sp = sub.add_parser("wave-fit", help="L1 growth exponent of the half-wave flow")
    common(sp)
    sp.set_defaults(fn=_cmd_wave_fit)

    sp = sub.add_parser("simulate", help="march a trajectory, writing diagnostics and snapshots")
    common(sp)
    sp.add_argument("--snapshot", help="initial state file (otherwise random data at experiment.delta)")
    sp.add_argument("--snapshots", type=int, default=4, help="periodic snapshots to write (default 4)")
    sp.add_argument("--track-stride", type=int, default=10, help="record norms every N steps (default 10)")
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("probe", help="run one experiment (experiment.name selects which)")
    common(sp)
    sp.set_defaults(fn=_cmd_probe)

    sp = sub.add_parser("report", help="merge checks CSVs into a gated summary")
    common(sp)
    sp.set_defaults(fn=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.overrides)
        else:
            cfg = parse_config("", args.overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        return args.fn(cfg, args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
