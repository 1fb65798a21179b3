"""Post-hoc analysis of simulation traces.

Settling time is measured from rest onset and requires the SoC spread to
stay below threshold for the remainder of the trace, so a dip that later
re-crosses the threshold does not count. Energy efficiency is the fraction
of source-side shuttle energy not dissipated in the balancing resistor;
with a lossless loop it approaches one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import MetricsError
from .trace import SimTrace


def soc_spread(snapshot: Iterable[float]) -> float:
    """max - min over one snapshot of cell SoCs."""
    values = list(snapshot)
    if not values:
        raise MetricsError("soc_spread of an empty snapshot")
    return max(values) - min(values)


def settling_time(trace: SimTrace, threshold: Optional[float] = None) -> Optional[float]:
    """Hours from rest onset until the spread durably drops below threshold.

    Returns 0.0 when the pack is already balanced at rest onset and None
    when the threshold is never durably reached (including traces with no
    rest window).
    """
    thr = trace.balancer_threshold if threshold is None else threshold
    rest = trace.rest_onset_s

    last_above: Optional[float] = None
    first_rest_row: Optional[int] = None
    spreads = trace.soc_spread_series()
    for k, t in enumerate(trace.times):
        if t < rest:
            continue
        if first_rest_row is None:
            first_rest_row = k
        if spreads[k] >= thr:
            last_above = t
    if first_rest_row is None:
        return None  # trace never reaches the rest window
    if last_above is None:
        return 0.0
    if last_above >= trace.times[-1]:
        return None  # still above threshold at the end of the trace
    # First recorded time after the final crossing.
    for k in range(first_rest_row, trace.n_rows):
        if trace.times[k] > last_above:
            return (trace.times[k] - rest) / 3600.0
    return None


def energy_efficiency(trace: SimTrace) -> float:
    """(source energy - resistive loss) / source energy for the balancer.

    Uses the engine's exact per-step accumulators when present, otherwise
    integrates the recorded rows (only faithful for undecimated traces).
    """
    if trace.energy_source_j > 0.0:
        src, loss = trace.energy_source_j, trace.energy_loss_j
    else:
        src, loss = energy_sums_from_rows(trace)
    if src <= 0.0:
        raise MetricsError("no balancer transfer occurred; efficiency is undefined")
    return (src - loss) / src


def energy_sums_from_rows(trace: SimTrace) -> tuple[float, float]:
    """Source-energy and loss sums integrated from the recorded rows.

    The rows only carry the target cell's loaded terminal voltage, so this
    is a close approximation of the engine's exact accumulators; prefer
    those when available.
    """
    dt_row = trace.dt * trace.record_every
    src = 0.0
    loss = 0.0
    m = trace.cells_per_string
    for k in range(trace.n_rows):
        i_c = trace.i_c[k]
        ti, tj = trace.target[k]
        if i_c == 0.0 or ti < 0:
            continue
        v_b = trace.volts[k][ti * m + tj]
        if i_c > 0.0:
            src += i_c * v_b * dt_row
        loss += i_c * i_c * trace.balancer_res_ohm * dt_row
    return src, loss


@dataclass(frozen=True)
class ConvergenceRow:
    label: str
    initial_v: float
    final_v: float
    delta_mv: float
    pct_diff: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[ConvergenceRow]
    initial_band_v: float  # max - min terminal voltage at rest onset
    final_band_v: float    # max - min terminal voltage at the end of the trace

    def render_text(self) -> str:
        lines = [
            f"{'Battery':<8} {'Initial voltage':>16} {'Final voltage':>14} "
            f"{'Delta (mV)':>11} {'% difference':>13}"
        ]
        for r in self.rows:
            lines.append(
                f"{r.label:<8} {r.initial_v:>16.3f} {r.final_v:>14.3f} "
                f"{r.delta_mv:>11.3f} {r.pct_diff:>13.4f}"
            )
        lines.append(
            f"voltage band: initial {self.initial_band_v * 1000:.3f} mV -> "
            f"final {self.final_band_v * 1000:.3f} mV"
        )
        return "\n".join(lines)


def voltage_convergence_report(trace: SimTrace) -> ConvergenceReport:
    """Per-cell initial (at rest onset) vs final terminal voltages."""
    first = None
    for k, t in enumerate(trace.times):
        if t >= trace.rest_onset_s:
            first = k
            break
    if first is None:
        first = trace.n_rows - 1  # no rest window recorded; compare against the last row
    last = trace.n_rows - 1

    rows = []
    for c in range(trace.n_cells):
        v0 = trace.volts[first][c]
        v1 = trace.volts[last][c]
        delta = abs(v1 - v0)
        rows.append(ConvergenceRow(
            label=trace.cell_label(c),
            initial_v=v0,
            final_v=v1,
            delta_mv=delta * 1000.0,
            pct_diff=100.0 * delta / v0 if v0 else 0.0,
        ))
    initial_band = max(trace.volts[first]) - min(trace.volts[first])
    final_band = max(trace.volts[last]) - min(trace.volts[last])
    return ConvergenceReport(rows=rows, initial_band_v=initial_band, final_band_v=final_band)
