"""Parameter-sweep harness over (capacitor, resistor, switch factor) grids.

Every grid point runs the same scenario with only the balancer swapped, so
rows are directly comparable. Points are independent pure computations and
may run in a process pool; results always come back in grid order, and a
point that fails is recorded in its row rather than aborting the sweep.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from .balancer import BalancerConfig
from .engine import Scenario, simulate
from .errors import ConfigError, FlycapError
from .metrics import MetricsError, energy_efficiency, settling_time


@dataclass(frozen=True)
class SweepSpec:
    cap_values: tuple[float, ...]
    res_values: tuple[float, ...]
    delta_values: tuple[float, ...]   # switch factors
    scenario: Scenario                # balancer fields are overridden per point
    threshold: float = 0.02
    max_sim_hours: float = 48.0

    def __post_init__(self) -> None:
        if not (self.cap_values and self.res_values and self.delta_values):
            raise ConfigError("sweep value lists must be non-empty")
        if self.max_sim_hours <= 0:
            raise ConfigError("max_sim_hours must be positive")

    def grid(self) -> list[tuple[float, float, float]]:
        return list(itertools.product(self.cap_values, self.res_values, self.delta_values))


@dataclass(frozen=True)
class SweepRow:
    cap_f: float
    res_ohm: float
    delta: float
    settling_h: Optional[float]
    efficiency: Optional[float]
    final_spread: float
    status: str  # "settled" | "not_settled" | "error: ..."


SWEEP_HEADER = ["cap_F", "res_ohm", "delta", "settling_h", "efficiency", "final_spread", "status"]


def _point_scenario(spec: SweepSpec, cap: float, res: float, delta: float) -> Scenario:
    base = spec.scenario.balancer
    bal = BalancerConfig(
        cap_f=cap, res_ohm=res, switch_factor=delta,
        soc_threshold=spec.threshold, v_cap_init=base.v_cap_init,
        inrush_limit_a=base.inrush_limit_a,
    )
    scenario = spec.scenario.with_balancer(bal)
    max_s = spec.max_sim_hours * 3600.0
    profile = scenario.profile
    if profile.duration > max_s:
        if profile.samples[-1][0] >= max_s:
            raise ConfigError(
                f"profile still has samples beyond max_sim_hours={spec.max_sim_hours}"
            )
        scenario = replace(scenario, profile=replace(profile, duration=max_s))
    return scenario


def run_grid_point(args: tuple[SweepSpec, float, float, float]) -> SweepRow:
    """Run one (cap, res, delta) point; importable so process pools can use it."""
    spec, cap, res, delta = args
    try:
        scenario = _point_scenario(spec, cap, res, delta)
        trace = simulate(scenario)
    except FlycapError as exc:
        return SweepRow(cap, res, delta, None, None, float("nan"), f"error: {exc}")

    settled = settling_time(trace, spec.threshold)
    try:
        eff = energy_efficiency(trace)
    except MetricsError:
        eff = None
    final_spread = max(trace.soc[-1]) - min(trace.soc[-1])
    status = "settled" if settled is not None else "not_settled"
    return SweepRow(cap, res, delta, settled, eff, final_spread, status)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate the whole grid, one independent simulation per point."""
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    jobs = [(spec, cap, res, delta) for cap, res, delta in spec.grid()]
    if workers == 1 or len(jobs) == 1:
        return [run_grid_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_grid_point, jobs))


def run_efficiency_study(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Sweep a two-cell shuttle scenario; settling_h is the convergence time.

    Same machinery as run_sweep, but validated for the dedicated two-cell
    study (single string, pre-charged capacitor) so efficiency is always
    defined at every grid point.
    """
    pack = spec.scenario.pack
    if pack.n_strings != 1 or pack.cells_per_string != 2:
        raise ConfigError("efficiency study expects a single string of two cells")
    if spec.scenario.balancer.v_cap_init <= 0.0:
        raise ConfigError("efficiency study expects a pre-charged capacitor (v_cap_init > 0)")
    return run_sweep(spec, workers=workers)


def write_sweep_csv(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for r in rows:
            writer.writerow([
                repr(r.cap_f), repr(r.res_ohm), repr(r.delta),
                "" if r.settling_h is None else repr(r.settling_h),
                "" if r.efficiency is None else repr(r.efficiency),
                repr(r.final_spread), r.status,
            ])


def read_sweep_csv(path: str) -> list[SweepRow]:
    rows: list[SweepRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_HEADER:
            raise ConfigError(f"{path}: unexpected sweep header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SWEEP_HEADER):
                raise ConfigError(f"{path}:{lineno}: expected {len(SWEEP_HEADER)} columns")
            rows.append(SweepRow(
                cap_f=float(row[0]), res_ohm=float(row[1]), delta=float(row[2]),
                settling_h=float(row[3]) if row[3] else None,
                efficiency=float(row[4]) if row[4] else None,
                final_spread=float(row[5]), status=row[6],
            ))
    return rows
