import math
import random

import pytest

from flycap.cell import (
    CellParams,
    CellState,
    OcvParams,
    open_circuit_voltage,
    rc_branch_step,
    soc_step,
    terminal_voltage,
)
from flycap.errors import ConfigError, OcvDomainError, SocRangeError

# Reference OCV at z=0.6, evaluated independently by direct scalar
# arithmetic before the build.
OCV_REF_AT_060 = 3.300004869047748


class TestOpenCircuitVoltage:
    def test_constant_term_only(self):
        p = OcvParams(v0=3.3, alpha=0.0, beta=10.0, gamma=0.0, zeta=0.0, epsilon=0.05)
        assert open_circuit_voltage(0.5, p) == pytest.approx(3.3, abs=0)

    def test_low_soc_limit_is_v0(self):
        p = OcvParams(v0=3.1, alpha=0.2, beta=10.0, gamma=0.0, zeta=0.0, epsilon=0.05)
        assert open_circuit_voltage(1e-12, p) == pytest.approx(3.1, abs=1e-9)

    def test_reference_value_at_060(self, ref_ocv):
        assert open_circuit_voltage(0.6, ref_ocv) == pytest.approx(OCV_REF_AT_060, rel=1e-14)

    @pytest.mark.parametrize("z", [0.0, 1.0, -0.1, 1.2])
    def test_domain_error_outside_open_interval(self, z, ref_ocv):
        with pytest.raises(OcvDomainError):
            open_circuit_voltage(z, ref_ocv)

    def test_monotone_for_random_admissible_params(self):
        rng = random.Random(42)
        for _ in range(200):
            p = OcvParams(
                v0=rng.uniform(2.5, 3.7),
                alpha=rng.uniform(0.0, 0.5),
                beta=rng.uniform(0.5, 30.0),
                gamma=rng.uniform(0.01, 0.6),
                zeta=rng.uniform(0.0, 0.5),
                epsilon=rng.uniform(0.01, 1.0),
            )
            zs = [0.01 + 0.98 * k / 40 for k in range(41)]
            vals = [open_circuit_voltage(z, p) for z in zs]
            assert all(math.isfinite(v) for v in vals)
            for lo, hi in zip(vals, vals[1:]):
                assert lo < hi, f"OCV not increasing for {p}"

    def test_validation_rejects_bad_rates_and_amplitudes(self):
        with pytest.raises(ConfigError):
            OcvParams(v0=3.0, alpha=0.2, beta=0.0, gamma=0.3, zeta=0.2, epsilon=0.05)
        with pytest.raises(ConfigError):
            OcvParams(v0=3.0, alpha=0.2, beta=10.0, gamma=0.3, zeta=0.2, epsilon=-1.0)
        with pytest.raises(ConfigError):
            OcvParams(v0=3.0, alpha=-0.1, beta=10.0, gamma=0.3, zeta=0.2, epsilon=0.05)


class TestSocStep:
    def test_one_c_discharge_for_an_hour_empties_the_cell(self):
        assert soc_step(1.0, 10.0, 3600.0, 10.0) == 0.0

    def test_zero_current_is_identity(self):
        assert soc_step(0.6, 0.0, 123.4, 10.0) == 0.6

    def test_reference_arithmetic(self):
        assert soc_step(0.60, 2.0, 0.1, 10.0) == pytest.approx(0.5999944444444444, rel=1e-15)

    def test_fault_beyond_epsilon(self):
        with pytest.raises(SocRangeError):
            soc_step(0.0, 1.0, 3600.0, 1.0)
        with pytest.raises(SocRangeError):
            soc_step(1.0, -1.0, 3600.0, 1.0)

    def test_saturates_within_epsilon(self):
        capacity = 1.0
        overshoot_amps = 0.5e-6 * 3600.0 * capacity  # half the default tolerance
        assert soc_step(0.0, overshoot_amps, 1.0, capacity) == 0.0
        assert soc_step(1.0, -overshoot_amps, 1.0, capacity) == 1.0

    def test_linearity_exact_for_dyadic_steps(self):
        # 225 s at 1 A on a 1 Ah cell moves SoC by exactly 1/16.
        z = 0.75
        one = soc_step(z, 1.0, 450.0, 1.0)
        two = soc_step(soc_step(z, 1.0, 225.0, 1.0), 1.0, 225.0, 1.0)
        assert one == two == 0.625

    def test_linearity_for_random_steps(self):
        rng = random.Random(7)
        for _ in range(100):
            z = rng.uniform(0.2, 0.8)
            i = rng.uniform(-5.0, 5.0)
            dt = rng.uniform(0.01, 10.0)
            whole = soc_step(z, i, 2 * dt, 10.0)
            halves = soc_step(soc_step(z, i, dt, 10.0), i, dt, 10.0)
            assert halves == pytest.approx(whole, abs=1e-15)


class TestRcBranchStep:
    def test_rest_stays_at_rest(self):
        assert rc_branch_step(0.0, 0.0, 5.0, 0.02, 0.1) == 0.0

    def test_half_life_decay(self):
        betak = 0.37
        assert rc_branch_step(1.0, 0.0, math.log(2) / betak, 0.02, betak) == pytest.approx(0.5, rel=1e-12)

    def test_reference_value(self):
        got = rc_branch_step(0.0, 1.0, 10.0, 0.01, 0.1)
        assert got == pytest.approx(0.006321205588285576, rel=1e-14)

    def test_composition_matches_single_step(self):
        # Exact exponential update: N small steps equal one big step.
        v = 0.003
        i, r, beta, dt, n = 1.5, 0.02, 0.1, 0.7, 50
        stepped = v
        for _ in range(n):
            stepped = rc_branch_step(stepped, i, dt, r, beta)
        assert stepped == pytest.approx(rc_branch_step(v, i, n * dt, r, beta), rel=1e-12)

    def test_converges_to_ri(self):
        v = 0.0
        for _ in range(20000):
            v = rc_branch_step(v, 2.0, 10.0, 0.02, 0.1)
        assert v == pytest.approx(0.04, rel=1e-9)


class TestTerminalVoltage:
    def test_open_circuit_case(self, ref_cell):
        s = CellState(z=0.6)
        assert terminal_voltage(s, ref_cell, 0.0) == pytest.approx(OCV_REF_AT_060, rel=1e-14)

    def test_pure_ohmic_drop(self, ref_ocv):
        p = CellParams(r0=0.05, r1=0.0, beta1=0.1, r2=0.0, beta2=0.01,
                       capacity_ah=10.0, ocv=ref_ocv)
        s = CellState(z=0.6)
        expected = OCV_REF_AT_060 - 0.05
        assert terminal_voltage(s, p, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_with_polarization_and_load(self, ref_cell):
        s = CellState(z=0.6, vc1=0.005, vc2=0.002)
        got = terminal_voltage(s, ref_cell, 2.0)
        assert got == pytest.approx(3.1930048690477477, rel=1e-14)

    def test_propagates_domain_error(self, ref_cell):
        with pytest.raises(OcvDomainError):
            terminal_voltage(CellState(z=1.0), ref_cell, 0.0)


def test_cell_params_validation(ref_ocv):
    with pytest.raises(ConfigError):
        CellParams(r0=-0.01, r1=0.02, beta1=0.1, r2=0.01, beta2=0.01,
                   capacity_ah=10.0, ocv=ref_ocv)
    with pytest.raises(ConfigError):
        CellParams(r0=0.05, r1=0.02, beta1=0.0, r2=0.01, beta2=0.01,
                   capacity_ah=10.0, ocv=ref_ocv)
    with pytest.raises(ConfigError):
        CellParams(r0=0.05, r1=0.02, beta1=0.1, r2=0.01, beta2=0.01,
                   capacity_ah=0.0, ocv=ref_ocv)
