"""Time-indexed simulation records and their on-disk formats.

A SimTrace is what every metric and report consumes: per-row SoC, terminal
voltage, string currents, capacitor state and the active balancer target,
plus the switch-event log and a handful of exact accumulators the engine
maintains at full step resolution (the recorded rows may be decimated).

CSV layout (one row per recorded step, string-major cell order):
    time_s, z_i_j..., v_i_j..., alpha_i..., v_cap_V, i_c_A, target_i, target_j
Event CSV: time_s, from_string, from_pos, to_string, to_pos, v_cap_V.
Floats are written with repr() so files round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

from .balancer import SwitchEvent
from .errors import ConfigError


@dataclass
class SimTrace:
    n_strings: int
    cells_per_string: int
    dt: float                 # integrator step, s
    record_every: int         # integrator steps between recorded rows
    rest_onset_s: float       # start of the profile's zero-current window
    balancer_res_ohm: float
    balancer_threshold: float

    times: list[float] = field(default_factory=list)
    soc: list[list[float]] = field(default_factory=list)     # per row: n*m values
    volts: list[list[float]] = field(default_factory=list)   # per row: n*m values
    alpha: list[list[float]] = field(default_factory=list)   # per row: n values
    v_cap: list[float] = field(default_factory=list)
    i_c: list[float] = field(default_factory=list)
    target: list[tuple[int, int]] = field(default_factory=list)  # (-1, -1) when idle

    events: list[SwitchEvent] = field(default_factory=list)

    # Exact accumulators over every integrator step, decimation-independent.
    max_kcl_residual: float = 0.0     # max |sum(alpha) - I| / max(1, |I|)
    energy_source_j: float = 0.0      # energy drawn from source cells by the balancer
    energy_loss_j: float = 0.0        # resistive loss in the balancer loop

    @property
    def n_cells(self) -> int:
        return self.n_strings * self.cells_per_string

    @property
    def n_rows(self) -> int:
        return len(self.times)

    def cell_label(self, flat_index: int) -> str:
        return f"B{flat_index + 1}"

    def soc_spread_series(self) -> list[float]:
        return [max(row) - min(row) for row in self.soc]

    def header(self) -> list[str]:
        n, m = self.n_strings, self.cells_per_string
        cols = ["time_s"]
        cols += [f"z_{i}_{j}" for i in range(n) for j in range(m)]
        cols += [f"v_{i}_{j}" for i in range(n) for j in range(m)]
        cols += [f"alpha_{i}" for i in range(n)]
        cols += ["v_cap_V", "i_c_A", "target_i", "target_j"]
        return cols


def write_trace_csv(trace: SimTrace, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace.header())
        for k in range(trace.n_rows):
            ti, tj = trace.target[k]
            row = [repr(trace.times[k])]
            row += [repr(v) for v in trace.soc[k]]
            row += [repr(v) for v in trace.volts[k]]
            row += [repr(v) for v in trace.alpha[k]]
            row += [repr(trace.v_cap[k]), repr(trace.i_c[k]), str(ti), str(tj)]
            writer.writerow(row)


def read_trace_csv(path: str) -> SimTrace:
    """Parse a trace CSV back into a SimTrace (metadata fields left default).

    Callers normally attach the run metadata afterwards; see read_run_meta.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty trace file") from None

        z_cols = [c for c in header if c.startswith("z_")]
        v_cols = [c for c in header if c.startswith("v_") and c != "v_cap_V"]
        a_cols = [c for c in header if c.startswith("alpha_")]
        if not z_cols or len(z_cols) != len(v_cols):
            raise ConfigError(f"{path}: malformed header {header[:6]}...")
        strings = {int(c.split("_")[1]) for c in z_cols}
        positions = {int(c.split("_")[2]) for c in z_cols}
        n, m = max(strings) + 1, max(positions) + 1
        if len(z_cols) != n * m or len(a_cols) != n:
            raise ConfigError(f"{path}: header names an incomplete {n}x{m} cell grid")

        trace = SimTrace(
            n_strings=n, cells_per_string=m, dt=0.0, record_every=1,
            rest_onset_s=0.0, balancer_res_ohm=0.0, balancer_threshold=0.02,
        )
        expected = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != expected:
                raise ConfigError(
                    f"{path}:{lineno}: expected {expected} columns "
                    f"({header[len(row)] if len(row) < expected else 'extra data'}), got {len(row)}"
                )
            try:
                vals = [float(x) for x in row[: 1 + 2 * n * m + n + 2]]
                ti, tj = int(row[-2]), int(row[-1])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
            trace.times.append(vals[0])
            trace.soc.append(vals[1 : 1 + n * m])
            trace.volts.append(vals[1 + n * m : 1 + 2 * n * m])
            trace.alpha.append(vals[1 + 2 * n * m : 1 + 2 * n * m + n])
            trace.v_cap.append(vals[1 + 2 * n * m + n])
            trace.i_c.append(vals[2 + 2 * n * m + n])
            trace.target.append((ti, tj))
    if not trace.times:
        raise ConfigError(f"{path}: trace has a header but no rows")
    return trace


EVENT_HEADER = ["time_s", "from_string", "from_pos", "to_string", "to_pos", "v_cap_V"]


def write_events_csv(events: list[SwitchEvent], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_HEADER)
        for ev in events:
            writer.writerow([
                repr(ev.time_s), ev.from_cell[0], ev.from_cell[1],
                ev.to_cell[0], ev.to_cell[1], repr(ev.v_cap),
            ])


def read_events_csv(path: str) -> list[SwitchEvent]:
    events: list[SwitchEvent] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_HEADER:
            raise ConfigError(f"{path}: unexpected event header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise ConfigError(f"{path}:{lineno}: expected 6 columns, got {len(row)}")
            events.append(SwitchEvent(
                time_s=float(row[0]),
                from_cell=(int(row[1]), int(row[2])),
                to_cell=(int(row[3]), int(row[4])),
                v_cap=float(row[5]),
            ))
    return events


def write_run_meta(trace: SimTrace, path: str) -> None:
    """Sidecar metadata so reports can be regenerated without re-simulating."""
    meta = {
        "n_strings": trace.n_strings,
        "cells_per_string": trace.cells_per_string,
        "dt_s": trace.dt,
        "record_every": trace.record_every,
        "rest_onset_s": trace.rest_onset_s,
        "balancer_res_ohm": trace.balancer_res_ohm,
        "balancer_threshold": trace.balancer_threshold,
        "max_kcl_residual": trace.max_kcl_residual,
        "energy_source_j": trace.energy_source_j,
        "energy_loss_j": trace.energy_loss_j,
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def apply_run_meta(trace: SimTrace, path: str) -> SimTrace:
    """Attach a run_meta.json sidecar to a trace read back from CSV."""
    try:
        with open(path) as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run metadata {path}: {exc}") from None
    for key in ("dt_s", "rest_onset_s", "balancer_res_ohm", "balancer_threshold"):
        if key not in meta:
            raise ConfigError(f"{path}: missing required key {key!r}")
    trace.dt = float(meta["dt_s"])
    trace.record_every = int(meta.get("record_every", 1))
    trace.rest_onset_s = float(meta["rest_onset_s"])
    trace.balancer_res_ohm = float(meta["balancer_res_ohm"])
    trace.balancer_threshold = float(meta["balancer_threshold"])
    trace.max_kcl_residual = float(meta.get("max_kcl_residual", 0.0))
    trace.energy_source_j = float(meta.get("energy_source_j", 0.0))
    trace.energy_loss_j = float(meta.get("energy_loss_j", 0.0))
    return trace
