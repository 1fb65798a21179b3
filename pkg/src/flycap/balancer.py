"""Flying-capacitor balancing circuit and its rule-based controller.

A single capacitor C behind a series resistor R is switched across one cell
at a time: it charges from the highest-SoC cell for one switch period, then
discharges into the lowest-SoC cell for one period, re-selecting the extreme
pair at every phase boundary, until the pack SoC spread falls below the
threshold. Balancing only runs at no load. Positive circuit current flows
out of the connected cell into the capacitor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .cell import terminal_voltage
from .errors import ConfigError
from .pack import PackConfig, PackState, pack_soc_spread

# Pack currents below this magnitude count as no-load.
NO_LOAD_THRESHOLD_A = 1e-3

_BOUNDARY_EPS = 1e-12  # float guard when comparing phase_elapsed to the period


class Phase(enum.Enum):
    IDLE = "idle"
    CHARGING_FROM_MAX = "charging_from_max"
    DISCHARGING_INTO_MIN = "discharging_into_min"


@dataclass(frozen=True, slots=True)
class BalancerConfig:
    cap_f: float            # flying capacitor, F
    res_ohm: float          # series resistance of the shuttle loop, ohm
    switch_factor: float    # phase duration as a multiple of R*C
    soc_threshold: float = 0.02  # engage while max-min SoC is at or above this
    v_cap_init: float = 0.0      # capacitor voltage at simulation start, V
    # Bang-bang hysteresis: once engaged, balance down to
    # soc_threshold*(1 - hysteresis) before disconnecting, so sub-threshold
    # drift (mesh-current crosstalk) cannot immediately re-trigger.
    hysteresis: float = 0.1
    inrush_limit_a: Optional[float] = None  # optional realism clamp, off by default

    def __post_init__(self) -> None:
        if self.cap_f <= 0 or self.res_ohm <= 0 or self.switch_factor <= 0:
            raise ConfigError("cap_f, res_ohm and switch_factor must be positive")
        if not 0.0 < self.soc_threshold < 1.0:
            raise ConfigError(f"soc_threshold must be in (0, 1), got {self.soc_threshold}")
        if not 0.0 <= self.hysteresis < 1.0:
            raise ConfigError(f"hysteresis must be in [0, 1), got {self.hysteresis}")
        if self.inrush_limit_a is not None and self.inrush_limit_a <= 0:
            raise ConfigError("inrush_limit_a must be positive when set")

    @property
    def switch_period_s(self) -> float:
        """Duration of one connection phase, s."""
        return self.switch_factor * self.res_ohm * self.cap_f

    @property
    def disengage_spread(self) -> float:
        """Spread level at which an engaged controller disconnects."""
        return self.soc_threshold * (1.0 - self.hysteresis)


@dataclass(slots=True)
class BalancerState:
    v_cap: float                    # capacitor voltage, V
    phase: Phase = Phase.IDLE
    target: Optional[tuple[int, int]] = None  # (string, position), present iff not idle
    phase_elapsed: float = 0.0      # seconds into the current phase, <= switch period
    v_cap_at_phase_start: float = 0.0


@dataclass(frozen=True, slots=True)
class SwitchEvent:
    """One connection decision: the extreme pair selected at a phase start."""

    time_s: float
    from_cell: tuple[int, int]  # highest-SoC cell (source)
    to_cell: tuple[int, int]    # lowest-SoC cell (sink)
    v_cap: float


@dataclass(frozen=True, slots=True)
class Injection:
    """Balancer current applied to one cell for the coming step."""

    cell: tuple[int, int]
    amps: float   # positive discharges the connected cell
    v_b: float    # cell voltage the circuit saw, V (for energy bookkeeping)


def select_extreme_cells(state: PackState) -> tuple[tuple[int, int], tuple[int, int]]:
    """Indices of the maximum- and minimum-SoC cells.

    Ties go to the lowest (string, position) in lexicographic order.
    """
    max_idx = min_idx = (0, 0)
    max_z = min_z = state.cells[0][0].z
    for i, row in enumerate(state.cells):
        for j, s in enumerate(row):
            if s.z > max_z:
                max_z, max_idx = s.z, (i, j)
            if s.z < min_z:
                min_z, min_idx = s.z, (i, j)
    return max_idx, min_idx


def capacitor_current(v_b: float, v_cap_start: float, res: float, cap: float,
                      t_in_phase: float) -> float:
    """Shuttle-loop current at ``t_in_phase`` seconds into a connection.

    i_c = ((v_b - v_cap_start)/R) * exp(-t/(R*C))

    Positive current discharges the connected cell into the capacitor;
    when the capacitor sits above the cell the current reverses and charges
    the cell.
    """
    if t_in_phase < 0:
        raise ConfigError("t_in_phase must be >= 0")
    return (v_b - v_cap_start) / res * math.exp(-t_in_phase / (res * cap))


def capacitor_voltage_update(v_cap_start: float, v_b: float, res: float, cap: float,
                             t_in_phase: float) -> float:
    """Capacitor voltage ``t_in_phase`` seconds into a connection.

    Closed-form integral of the loop current:
    v_cap = v_b - (v_b - v_cap_start) * exp(-t/(R*C)), approaching the cell
    voltage as the connection persists.
    """
    if t_in_phase < 0:
        raise ConfigError("t_in_phase must be >= 0")
    return v_b - (v_b - v_cap_start) * math.exp(-t_in_phase / (res * cap))


def is_balanced(state: PackState, threshold: float) -> bool:
    """True iff the pack SoC spread is strictly below ``threshold``."""
    return pack_soc_spread(state) < threshold


def balancer_step(bal: BalancerState, cfg: BalancerConfig, pack: PackState,
                  pack_cfg: PackConfig, dt: float, pack_current: float
                  ) -> tuple[BalancerState, Optional[Injection], list[SwitchEvent]]:
    """Advance the balancing controller by one simulation step.

    Gate order: under load the circuit disconnects; an idle controller
    engages when the SoC spread reaches the threshold and an engaged one
    disconnects once it has pushed the spread below the hysteresis margin;
    while engaged it alternates charge/discharge phases of one switch
    period each, re-selecting the extreme pair at every boundary. The
    capacitor holds its voltage while disconnected.

    Returns the new controller state, the current to inject into the
    connected cell over the coming ``dt`` (None when disconnected), and any
    switch events emitted at this step.
    """
    period = cfg.switch_period_s
    if dt > period + _BOUNDARY_EPS:
        raise ConfigError(
            f"dt={dt} s does not resolve the switch period {period} s; "
            "lower dt or raise switch_factor*R*C"
        )

    spread = pack_soc_spread(pack)
    engaged = bal.phase is not Phase.IDLE
    done = spread < (cfg.disengage_spread if engaged else cfg.soc_threshold)
    if abs(pack_current) > NO_LOAD_THRESHOLD_A or done:
        return BalancerState(v_cap=bal.v_cap), None, []

    phase = bal.phase
    target = bal.target
    elapsed = bal.phase_elapsed
    v_start = bal.v_cap_at_phase_start
    events: list[SwitchEvent] = []

    if phase is Phase.IDLE:
        max_idx, min_idx = select_extreme_cells(pack)
        phase, target = Phase.CHARGING_FROM_MAX, max_idx
        elapsed, v_start = 0.0, bal.v_cap
        events.append(SwitchEvent(pack.time, max_idx, min_idx, bal.v_cap))
    elif elapsed >= period - _BOUNDARY_EPS:
        max_idx, min_idx = select_extreme_cells(pack)
        if phase is Phase.CHARGING_FROM_MAX:
            phase, target = Phase.DISCHARGING_INTO_MIN, min_idx
        else:
            phase, target = Phase.CHARGING_FROM_MAX, max_idx
        elapsed, v_start = 0.0, bal.v_cap
        events.append(SwitchEvent(pack.time, max_idx, min_idx, bal.v_cap))

    ti, tj = target  # type: ignore[misc]
    # The circuit sees the cell's no-load terminal voltage: OCV minus the
    # polarization history (loop drops are regulated by the balancer's R).
    v_b = terminal_voltage(pack.cells[ti][tj], pack_cfg.cells[ti][tj], 0.0)

    t_eval = min(elapsed + dt, period)
    i_c = capacitor_current(v_b, v_start, cfg.res_ohm, cfg.cap_f, t_eval)
    if cfg.inrush_limit_a is not None and abs(i_c) > cfg.inrush_limit_a:
        # Clamp mode: constant-current step anchored at the present voltage.
        i_c = math.copysign(cfg.inrush_limit_a, i_c)
        v_cap_new = bal.v_cap + i_c * dt / cfg.cap_f
    else:
        v_cap_new = capacitor_voltage_update(v_start, v_b, cfg.res_ohm, cfg.cap_f, t_eval)

    new_state = BalancerState(
        v_cap=v_cap_new,
        phase=phase,
        target=target,
        phase_elapsed=t_eval,
        v_cap_at_phase_start=v_start,
    )
    return new_state, Injection(cell=target, amps=i_c, v_b=v_b), events
