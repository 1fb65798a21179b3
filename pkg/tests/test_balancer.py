import pytest

from flycap.balancer import (
    BalancerConfig,
    BalancerState,
    Phase,
    balancer_step,
    capacitor_current,
    capacitor_voltage_update,
    is_balanced,
    select_extreme_cells,
)
from flycap.cell import REFERENCE_CELL
from flycap.errors import ConfigError
from flycap.pack import make_initial_state, make_pack_config, step_pack

from oracles import euler_rc_phase, simpson


class TestSelectExtremeCells:
    def test_degenerate_uniform_pack(self, identical_pack):
        state = make_initial_state(identical_pack, 0.6)
        assert select_extreme_cells(state) == ((0, 0), (0, 0))

    def test_extreme_pair(self, identical_pack):
        state = make_initial_state(identical_pack, 0.6)
        state.cells[1][1].z = 0.64
        state.cells[2][3].z = 0.56
        assert select_extreme_cells(state) == ((1, 1), (2, 3))

    def test_lexicographic_tie_break(self, identical_pack):
        state = make_initial_state(identical_pack, 0.6)
        state.cells[0][2].z = 0.64
        state.cells[1][0].z = 0.64
        max_idx, _ = select_extreme_cells(state)
        assert max_idx == (0, 2)


class TestCapacitorCircuit:
    def test_initial_current_is_dv_over_r(self):
        assert capacitor_current(3.3, 3.2, 0.05, 50.0, 0.0) == pytest.approx(2.0, rel=1e-14)

    def test_no_potential_difference_no_current(self):
        for t in (0.0, 1.0, 100.0):
            assert capacitor_current(3.25, 3.25, 0.05, 50.0, t) == 0.0

    def test_one_time_constant_decay(self):
        got = capacitor_current(3.3, 3.2, 0.05, 50.0, 0.05 * 50.0)
        assert got == pytest.approx(0.7357588823428847, rel=1e-14)

    def test_voltage_update_boundaries(self):
        assert capacitor_voltage_update(3.2, 3.3, 0.05, 50.0, 0.0) == pytest.approx(3.2, abs=0)
        assert capacitor_voltage_update(3.2, 3.3, 0.05, 50.0, 1e7) == pytest.approx(3.3, rel=1e-12)

    def test_voltage_update_at_half_time_constant(self):
        got = capacitor_voltage_update(3.2, 3.3, 0.05, 50.0, 0.5 * 0.05 * 50.0)
        assert got == pytest.approx(3.2393469340287364, rel=1e-14)

    def test_charge_bookkeeping_over_a_phase(self):
        # Quadrature of the current must equal C * (v_end - v_start).
        v_b, v0, res, cap = 3.32, 3.27, 0.05, 50.0
        period = 0.5 * res * cap
        integral = simpson(lambda t: capacitor_current(v_b, v0, res, cap, t), 0.0, period, 2000)
        dv = capacitor_voltage_update(v0, v_b, res, cap, period) - v0
        assert abs(integral - cap * dv) <= 1e-9

    def test_closed_forms_match_explicit_euler(self):
        # Explicit Euler at dt = RC/1000 stays within 0.1% over one phase.
        v_b, v0, res, cap, delta = 3.30, 3.18, 0.1, 30.0, 1.0
        rc = res * cap
        period = delta * rc
        n = int(round(period / (rc / 1000.0)))
        times, volts, currents = euler_rc_phase(v_b, v0, res, cap, period, n)
        for t, v_euler, i_euler in zip(times, volts, currents):
            v_exact = capacitor_voltage_update(v0, v_b, res, cap, t)
            i_exact = capacitor_current(v_b, v0, res, cap, t)
            assert abs(v_euler - v_exact) / abs(v_exact) < 1e-3
            assert abs(i_euler - i_exact) / max(abs(i_exact), 1e-9) < 1e-3


class TestIsBalanced:
    def test_uniform_pack(self, identical_pack):
        assert is_balanced(make_initial_state(identical_pack, 0.6), 0.02)

    def test_wide_spread(self, identical_pack):
        state = make_initial_state(identical_pack, 0.6)
        state.cells[0][0].z = 0.6475
        state.cells[2][3].z = 0.5525
        assert not is_balanced(state, 0.02)

    def test_strict_boundary(self, identical_pack):
        state = make_initial_state(identical_pack, 0.6)
        state.cells[0][0].z = 0.6199
        assert is_balanced(state, 0.02)
        state.cells[0][0].z = 0.62
        assert not is_balanced(state, 0.02)


def _unbalanced_two_cell():
    pack = make_pack_config(1, 2, REFERENCE_CELL, rng_seed=0, perturb_pct=0.0)
    state = make_initial_state(pack, [[0.66, 0.58]])
    return pack, state


class TestBalancerStep:
    def test_idle_under_load(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.3)
        new, injection, events = balancer_step(bal, default_balancer, state, pack, 0.1, 12.0)
        assert new.phase is Phase.IDLE
        assert injection is None and events == []

    def test_idle_when_balanced(self, identical_pack, default_balancer):
        state = make_initial_state(identical_pack, 0.6)
        bal = BalancerState(v_cap=3.3)
        new, injection, events = balancer_step(bal, default_balancer, state, identical_pack, 0.1, 0.0)
        assert new.phase is Phase.IDLE
        assert injection is None and events == []

    def test_engages_charging_from_max_and_emits_event(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.3)
        new, injection, events = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert new.phase is Phase.CHARGING_FROM_MAX
        assert new.target == (0, 0)
        assert len(events) == 1
        assert events[0].from_cell == (0, 0) and events[0].to_cell == (0, 1)
        assert injection is not None and injection.cell == (0, 0)
        assert injection.amps > 0  # max cell discharges into the capacitor

    def test_discharge_phase_charges_the_min_cell(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(
            v_cap=3.5, phase=Phase.CHARGING_FROM_MAX, target=(0, 0),
            phase_elapsed=default_balancer.switch_period_s, v_cap_at_phase_start=3.3,
        )
        new, injection, events = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert new.phase is Phase.DISCHARGING_INTO_MIN
        assert new.target == (0, 1)
        assert len(events) == 1
        assert injection.amps < 0  # capacitor above the cell: current charges it
        stepped, _ = step_pack(state, pack, 0.0, 0.1, (injection.cell, injection.amps))
        assert stepped.cells[0][1].z > state.cells[0][1].z

    def test_charging_phase_discharges_the_max_cell(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.0)
        new, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        stepped, _ = step_pack(state, pack, 0.0, 0.1, (injection.cell, injection.amps))
        assert stepped.cells[0][0].z < state.cells[0][0].z

    def test_phase_elapsed_stays_within_period(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.3)
        period = default_balancer.switch_period_s
        for _ in range(200):
            bal, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
            assert 0.0 <= bal.phase_elapsed <= period + 1e-12

    def test_phases_alternate_with_event_per_phase(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.3)
        phases = []
        events_seen = 0
        for _ in range(400):
            bal, _, events = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
            events_seen += len(events)
            if events:
                phases.append(bal.phase)
        # 1.25 s period at dt=0.1 quantizes to 13 steps per phase.
        assert events_seen == pytest.approx(400 / 13, abs=1.0)
        for a, b in zip(phases, phases[1:]):
            assert a is not b, "phases must alternate"

    def test_vcap_latched_at_phase_start(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        bal = BalancerState(v_cap=3.31)
        bal, _, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert bal.v_cap_at_phase_start == 3.31
        v_mid = bal.v_cap
        bal, _, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert bal.v_cap_at_phase_start == 3.31  # unchanged mid-phase
        assert bal.v_cap != v_mid

    def test_hysteresis_keeps_engaged_below_threshold(self, default_balancer):
        pack, state = _unbalanced_two_cell()
        state.cells[0][0].z = 0.611
        state.cells[0][1].z = 0.590  # spread 0.021, above threshold
        bal = BalancerState(v_cap=3.3)
        bal, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert injection is not None
        # Now inside [disengage, threshold): an engaged controller keeps working.
        state.cells[0][0].z = 0.609  # spread 0.019
        bal, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert injection is not None
        # But below the hysteresis margin it lets go.
        state.cells[0][0].z = 0.6075  # spread 0.0175 < 0.02 * 0.9
        bal, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert injection is None and bal.phase is Phase.IDLE
        # And an idle controller does not re-engage inside the band.
        state.cells[0][0].z = 0.609
        bal, injection, _ = balancer_step(bal, default_balancer, state, pack, 0.1, 0.0)
        assert injection is None

    def test_dt_must_resolve_switch_period(self):
        pack, state = _unbalanced_two_cell()
        cfg = BalancerConfig(cap_f=1.0, res_ohm=0.05, switch_factor=0.5)  # period 25 ms
        with pytest.raises(ConfigError):
            balancer_step(BalancerState(v_cap=0.0), cfg, state, pack, 0.1, 0.0)

    def test_inrush_clamp_limits_current(self):
        pack, state = _unbalanced_two_cell()
        cfg = BalancerConfig(cap_f=50.0, res_ohm=0.05, switch_factor=0.5, inrush_limit_a=5.0)
        bal = BalancerState(v_cap=0.0)  # cold capacitor: unclamped inrush would be ~68 A
        bal, injection, _ = balancer_step(bal, cfg, state, pack, 0.1, 0.0)
        assert injection.amps == pytest.approx(5.0)
        assert bal.v_cap == pytest.approx(5.0 * 0.1 / 50.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        BalancerConfig(cap_f=0.0, res_ohm=0.05, switch_factor=0.5)
    with pytest.raises(ConfigError):
        BalancerConfig(cap_f=50.0, res_ohm=0.05, switch_factor=0.5, soc_threshold=1.5)
    with pytest.raises(ConfigError):
        BalancerConfig(cap_f=50.0, res_ohm=0.05, switch_factor=0.5, hysteresis=1.0)
    cfg = BalancerConfig(cap_f=50.0, res_ohm=0.05, switch_factor=0.5)
    assert cfg.switch_period_s == pytest.approx(1.25)
    assert cfg.disengage_spread == pytest.approx(0.018)
