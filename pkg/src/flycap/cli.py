"""Command-line entry point.

Subcommands:
  simulate  run one scenario; emit trace/event CSVs, metrics and SVG plots
  sweep     run a (cap, res, delta) grid; emit the sweep CSV and a summary
  report    regenerate metrics and plots from a stored trace

Exit status: 0 on success, 1 on configuration/validation errors, 2 on
simulation faults.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import RunConfig, load_run_config
from .engine import simulate
from .errors import ConfigError, SimulationFault
from .metrics import (
    MetricsError,
    energy_efficiency,
    settling_time,
    voltage_convergence_report,
)
from .svgplot import LineChart
from .sweep import run_sweep, write_sweep_csv
from .trace import (
    SimTrace,
    apply_run_meta,
    read_events_csv,
    read_trace_csv,
    write_events_csv,
    write_run_meta,
    write_trace_csv,
)


def _metrics_summary(trace: SimTrace) -> list[tuple[str, str]]:
    settled = settling_time(trace)
    try:
        eff = repr(energy_efficiency(trace))
    except MetricsError:
        eff = ""
    report = voltage_convergence_report(trace)
    spread = trace.soc_spread_series()
    return [
        ("settling_hours", repr(settled) if settled is not None else "not_settled"),
        ("efficiency", eff),
        ("final_spread", repr(spread[-1])),
        ("rest_onset_spread", repr(_spread_at_rest_onset(trace))),
        ("initial_voltage_band_mV", repr(report.initial_band_v * 1000.0)),
        ("final_voltage_band_mV", repr(report.final_band_v * 1000.0)),
        ("max_kcl_residual", repr(trace.max_kcl_residual)),
        ("switch_events", str(len(trace.events))),
    ]


def _spread_at_rest_onset(trace: SimTrace) -> float:
    for k, t in enumerate(trace.times):
        if t >= trace.rest_onset_s:
            row = trace.soc[k]
            return max(row) - min(row)
    row = trace.soc[-1]
    return max(row) - min(row)


def _write_reports(trace: SimTrace, out: Path) -> None:
    summary = _metrics_summary(trace)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerows(summary)
    report = voltage_convergence_report(trace)
    with open(out / "metrics.txt", "w") as fh:
        for key, value in summary:
            fh.write(f"{key}: {value}\n")
        fh.write("\nvoltage convergence\n")
        fh.write(report.render_text())
        fh.write("\n")


def _write_plots(trace: SimTrace, out: Path) -> None:
    hours = [t / 3600.0 for t in trace.times]

    soc_chart = LineChart("Pack SoC", "time (h)", "SoC (fraction)")
    volt_chart = LineChart("Cell terminal voltages", "time (h)", "voltage (V)")
    for c in range(trace.n_cells):
        label = trace.cell_label(c)
        soc_chart.add(label, hours, [row[c] for row in trace.soc])
        volt_chart.add(label, hours, [row[c] for row in trace.volts])
    soc_chart.write(str(out / "soc.svg"))
    volt_chart.write(str(out / "voltages.svg"))

    switch_chart = LineChart("Balancer switch activity", "time (h)", "cell index")
    m = trace.cells_per_string
    ev_hours = [ev.time_s / 3600.0 for ev in trace.events]
    switch_chart.add("source (max SoC)", ev_hours,
                     [ev.from_cell[0] * m + ev.from_cell[1] + 1 for ev in trace.events],
                     markers=True)
    switch_chart.add("sink (min SoC)", ev_hours,
                     [ev.to_cell[0] * m + ev.to_cell[1] + 1 for ev in trace.events],
                     markers=True)
    switch_chart.write(str(out / "switching.svg"))


def _ensure_out_dir(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None


def cmd_simulate(cfg: RunConfig) -> int:
    out = cfg.out_dir
    _ensure_out_dir(out)
    trace = simulate(cfg.scenario)
    write_trace_csv(trace, str(out / "trace.csv"))
    write_events_csv(trace.events, str(out / "events.csv"))
    write_run_meta(trace, str(out / "run_meta.json"))
    _write_reports(trace, out)
    _write_plots(trace, out)
    for key, value in _metrics_summary(trace):
        print(f"{key}: {value}")
    print(f"outputs written to {out}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.sweep is None:
        raise ConfigError("config has no [sweep] table")
    out = cfg.out_dir
    _ensure_out_dir(out)
    rows = run_sweep(cfg.sweep, workers=cfg.workers)
    write_sweep_csv(rows, str(out / "sweep.csv"))
    with open(out / "sweep_summary.txt", "w") as fh:
        for r in rows:
            settled = f"{r.settling_h:.3f} h" if r.settling_h is not None else "not settled"
            eff = f"eff={r.efficiency:.4f}" if r.efficiency is not None else "eff=n/a"
            line = (f"C={r.cap_f:g} F  R={r.res_ohm:g} ohm  delta={r.delta:g}  "
                    f"settling={settled}  {eff}  final_spread={r.final_spread:.4f}  [{r.status}]")
            fh.write(line + "\n")
            print(line)
    print(f"sweep written to {out / 'sweep.csv'}")
    return 0


def cmd_report(trace_path: str, out_override: str | None) -> int:
    trace_file = Path(trace_path)
    if not trace_file.exists():
        raise ConfigError(f"trace file {trace_file} does not exist")
    trace = read_trace_csv(str(trace_file))
    meta_path = trace_file.parent / "run_meta.json"
    if not meta_path.exists():
        raise ConfigError(f"missing {meta_path}; reports need the run metadata sidecar")
    apply_run_meta(trace, str(meta_path))
    events_path = trace_file.parent / "events.csv"
    if events_path.exists():
        trace.events = read_events_csv(str(events_path))

    out = Path(out_override) if out_override is not None else trace_file.parent
    _ensure_out_dir(out)
    _write_reports(trace, out)
    _write_plots(trace, out)
    for key, value in _metrics_summary(trace):
        print(f"{key}: {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flycap",
        description="Parallel-pack battery simulator with flying-capacitor cell balancing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--dt", type=float, default=None, help="override the timestep, s")

    sub.add_parser("simulate", parents=[common], help="run one scenario")
    p_sweep = sub.add_parser("sweep", parents=[common], help="run a parameter grid")
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel grid workers")

    p_report = sub.add_parser("report", help="regenerate reports from a stored trace")
    p_report.add_argument("trace", help="path to a trace.csv produced by simulate")
    p_report.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args.trace, args.out)
        cfg = load_run_config(
            args.config,
            seed_override=args.seed,
            dt_override=args.dt,
            out_override=args.out,
            workers=getattr(args, "workers", 1),
        )
        if args.command == "simulate":
            return cmd_simulate(cfg)
        return cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationFault as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
