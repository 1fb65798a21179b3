"""Single-cell equivalent-circuit model.

A cell is an open-circuit-voltage source (double-exponential in SoC) in
series with an ohmic resistance r0 and two parallel RC branches that carry
the fast and slow polarization transients. SoC evolves by Coulomb counting.
Sign convention throughout the package: positive cell current = discharge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, OcvDomainError, SocRangeError

# SoC overshoot tolerated before a Coulomb-counting update is a fault.
SOC_EPSILON_DEFAULT = 1e-6


@dataclass(frozen=True, slots=True)
class OcvParams:
    """Coefficients of the double-exponential open-circuit-voltage curve.

    OCV(z) = v0 + alpha*(1 - exp(-beta*z)) + gamma*z
                + zeta*(1 - exp(-epsilon/(1 - z)))

    The curve is strictly increasing on (0, 1) for any parameter set that
    passes validation (non-negative amplitudes, positive rates).
    """

    v0: float       # base voltage, V
    alpha: float    # low-SoC exponential amplitude, V
    beta: float     # low-SoC exponential rate, per SoC fraction
    gamma: float    # linear slope, V per SoC fraction
    zeta: float     # top-of-charge exponential amplitude, V
    epsilon: float  # top-of-charge exponential rate, SoC fraction

    def __post_init__(self) -> None:
        if self.beta <= 0 or self.epsilon <= 0:
            raise ConfigError(f"OCV rates must be positive: beta={self.beta}, epsilon={self.epsilon}")
        if self.alpha < 0 or self.gamma < 0 or self.zeta < 0:
            raise ConfigError("OCV amplitudes alpha/gamma/zeta must be non-negative for a monotone curve")


@dataclass(frozen=True, slots=True)
class CellParams:
    """Static electrical characteristics of one cell."""

    r0: float           # series resistance, ohm
    r1: float           # first RC branch resistance, ohm
    beta1: float        # first RC branch rate 1/(R1*C1), 1/s
    r2: float           # second RC branch resistance, ohm
    beta2: float        # second RC branch rate 1/(R2*C2), 1/s
    capacity_ah: float  # nominal capacity, Ah
    ocv: OcvParams

    def __post_init__(self) -> None:
        if self.r0 < 0 or self.r1 < 0 or self.r2 < 0:
            raise ConfigError("cell resistances must be non-negative")
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise ConfigError("RC branch rates beta1/beta2 must be positive")
        if self.capacity_ah <= 0:
            raise ConfigError("cell capacity must be positive")


@dataclass(slots=True)
class CellState:
    """Dynamic state of one cell: SoC plus the two RC-branch voltages."""

    z: float     # state of charge, fraction in [0, 1]
    vc1: float = 0.0  # first branch polarization voltage, V
    vc2: float = 0.0  # second branch polarization voltage, V


# Reference cell used by the shipped scenarios. The base voltage is chosen
# so the curve passes 3.300 V at 60% SoC with slope ~0.36 V per SoC fraction,
# keeping a 3.3 V pre-charged balancing capacitor inside the cell band.
REFERENCE_OCV = OcvParams(v0=2.897, alpha=0.2, beta=10.0, gamma=0.3, zeta=0.2, epsilon=0.05)
REFERENCE_CELL = CellParams(
    r0=0.05, r1=0.02, beta1=0.1, r2=0.01, beta2=0.01,
    capacity_ah=10.0, ocv=REFERENCE_OCV,
)


def open_circuit_voltage(z: float, p: OcvParams) -> float:
    """Open-circuit voltage at SoC ``z``.

    The 1/(1-z) term is singular at z=1, so the curve is only defined on the
    open interval; callers decide whether to saturate z before asking.
    """
    if not 0.0 < z < 1.0:
        raise OcvDomainError(f"SoC {z!r} outside open interval (0, 1)")
    return (
        p.v0
        + p.alpha * (1.0 - math.exp(-p.beta * z))
        + p.gamma * z
        + p.zeta * (1.0 - math.exp(-p.epsilon / (1.0 - z)))
    )


def soc_step(z: float, i_b: float, dt: float, capacity_ah: float,
             epsilon: float = SOC_EPSILON_DEFAULT) -> float:
    """Advance SoC by one Coulomb-counting step: z' = z - i_b*dt/(3600*C).

    An update landing outside [0, 1] by more than ``epsilon`` raises
    SocRangeError (a simulation fault, never silently clamped); overshoot
    within the tolerance is saturated.
    """
    z_new = z - i_b * dt / (3600.0 * capacity_ah)
    if z_new < 0.0:
        if z_new < -epsilon:
            raise SocRangeError(f"SoC update {z_new:.9f} below 0 (i_b={i_b} A, dt={dt} s)")
        return 0.0
    if z_new > 1.0:
        if z_new > 1.0 + epsilon:
            raise SocRangeError(f"SoC update {z_new:.9f} above 1 (i_b={i_b} A, dt={dt} s)")
        return 1.0
    return z_new


def rc_branch_step(vck: float, i_b: float, dt: float, rk: float, betak: float) -> float:
    """Exact exponential update of one RC branch voltage over ``dt``.

    vck' = vck*exp(-betak*dt) + rk*i_b*(1 - exp(-betak*dt))

    Under constant current the branch converges to rk*i_b with no integrator
    drift for any step size.
    """
    decay = math.exp(-betak * dt)
    return vck * decay + rk * i_b * (1.0 - decay)


def terminal_voltage(s: CellState, p: CellParams, i_b: float) -> float:
    """Terminal voltage: OCV(z) minus the ohmic and polarization drops."""
    return open_circuit_voltage(s.z, p.ocv) - i_b * p.r0 - s.vc1 - s.vc2
