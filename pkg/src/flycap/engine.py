"""Discrete-time simulation loop.

Each step: sample the commanded pack current from the profile, let the
balancing controller pick its connection and injection current, then solve
the current split and advance every cell. The engine tracks KCL residuals
and balancer energy at full step resolution even when trace rows are
decimated, and can stop early once the pack has stayed balanced for a
configurable margin.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .balancer import BalancerConfig, BalancerState, balancer_step
from .cell import terminal_voltage
from .errors import ConfigError
from .pack import (
    CURRENT_CHANGE_THRESHOLD_A,
    PackConfig,
    PackState,
    make_initial_state,
    pack_soc_spread,
    solve_current_split,
    step_pack,
    string_gamma,
    string_phi,
)
from .profiles import CurrentProfile
from .trace import SimTrace


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs, resolved and reproducible."""

    pack: PackConfig
    initial_soc: tuple[tuple[float, ...], ...]
    profile: CurrentProfile
    balancer: BalancerConfig
    dt: float = 0.1
    record_every: int = 1
    # Stop once the pack has stayed balanced this long during rest (None = run out the profile).
    stop_margin_hours: Optional[float] = None

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.dt > self.balancer.switch_period_s:
            raise ConfigError(
                f"dt={self.dt} s exceeds the balancer switch period "
                f"{self.balancer.switch_period_s} s (switch_factor*R*C)"
            )

    def with_balancer(self, balancer: BalancerConfig) -> "Scenario":
        return replace(self, balancer=balancer)


def _record_row(trace: SimTrace, state: PackState, config: PackConfig,
                alpha: tuple[float, ...], injection, v_cap: float) -> None:
    n, m = config.n_strings, config.cells_per_string
    inj_cell = injection.cell if injection is not None else None
    inj_amps = injection.amps if injection is not None else 0.0

    socs = []
    volts = []
    for i in range(n):
        a_i = alpha[i]
        for j in range(m):
            s = state.cells[i][j]
            i_b = a_i + inj_amps if (i, j) == inj_cell else a_i
            socs.append(s.z)
            volts.append(terminal_voltage(s, config.cells[i][j], i_b))
    trace.times.append(state.time)
    trace.soc.append(socs)
    trace.volts.append(volts)
    trace.alpha.append(list(alpha))
    trace.v_cap.append(v_cap)
    trace.i_c.append(inj_amps)
    trace.target.append(inj_cell if inj_cell is not None else (-1, -1))


def simulate(scenario: Scenario) -> SimTrace:
    """Run one scenario to completion and return its trace."""
    cfg = scenario.pack
    bcfg = scenario.balancer
    profile = scenario.profile
    dt = scenario.dt

    state = make_initial_state(cfg, [list(row) for row in scenario.initial_soc])
    bal = BalancerState(v_cap=bcfg.v_cap_init)

    trace = SimTrace(
        n_strings=cfg.n_strings,
        cells_per_string=cfg.cells_per_string,
        dt=dt,
        record_every=scenario.record_every,
        rest_onset_s=profile.rest_onset,
        balancer_res_ohm=bcfg.res_ohm,
        balancer_threshold=bcfg.soc_threshold,
    )

    n_steps = int(profile.duration / dt + 0.5)
    stop_margin_s = (
        scenario.stop_margin_hours * 3600.0 if scenario.stop_margin_hours is not None else None
    )
    below_since: Optional[float] = None

    for k in range(n_steps):
        t = state.time
        current = profile.current_at(t)
        v_cap_before = bal.v_cap

        bal, injection, events = balancer_step(bal, bcfg, state, cfg, dt, current)
        trace.events.extend(events)

        inj = (injection.cell, injection.amps) if injection is not None else None
        new_state, split = step_pack(state, cfg, current, dt, inj)

        # Per-step bookkeeping at full resolution.
        residual = abs(sum(split.alpha) - current) / max(1.0, abs(current))
        if residual > trace.max_kcl_residual:
            trace.max_kcl_residual = residual
        if injection is not None:
            if injection.amps > 0.0:
                trace.energy_source_j += injection.amps * injection.v_b * dt
            trace.energy_loss_j += injection.amps * injection.amps * bcfg.res_ohm * dt

        if k % scenario.record_every == 0:
            _record_row(trace, state, cfg, split.alpha, injection, v_cap_before)

        state = new_state

        if stop_margin_s is not None and t >= trace.rest_onset_s:
            if pack_soc_spread(state) < bcfg.soc_threshold:
                if below_since is None:
                    below_since = state.time
                elif state.time - below_since >= stop_margin_s:
                    break
            else:
                below_since = None

    # Terminal observation row: final state with the split it would see now.
    t_end = state.time
    current = profile.current_at(t_end)
    if abs(current - state.last_current) > CURRENT_CHANGE_THRESHOLD_A:
        hold = 0.0
    else:
        hold = state.hold_time + dt
    phis = [string_phi(i, cfg, hold) for i in range(cfg.n_strings)]
    gammas = [string_gamma(i, state, cfg) for i in range(cfg.n_strings)]
    split = solve_current_split(phis, gammas, current)
    residual = abs(sum(split.alpha) - current) / max(1.0, abs(current))
    trace.max_kcl_residual = max(trace.max_kcl_residual, residual)
    _record_row(trace, state, cfg, split.alpha, None, bal.v_cap)

    return trace
