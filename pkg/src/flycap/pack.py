"""Parallel/series pack assembly and the per-timestep current split.

A pack is n parallel strings of m series cells. Each timestep we form the
per-string effective resistance (phi) and source voltage (gamma), solve a
small dense linear system for the string currents alpha, and advance every
cell. Parallel strings must sit at the same terminal voltage, which is what
rows 1..n-1 of the system encode; the last row is Kirchhoff's current law.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from .cell import CellParams, CellState, open_circuit_voltage, rc_branch_step, soc_step
from .errors import ConfigError, SingularSystemError

# Commanded-current change that restarts the transient-resistance clock.
CURRENT_CHANGE_THRESHOLD_A = 1e-3


@dataclass(frozen=True, slots=True)
class PackConfig:
    """Static pack layout: n strings of m cells plus the seed used to build it."""

    n_strings: int
    cells_per_string: int
    cells: tuple[tuple[CellParams, ...], ...]  # [string][position]
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_strings < 1 or self.cells_per_string < 1:
            raise ConfigError("pack needs at least one string of one cell")
        if len(self.cells) != self.n_strings or any(
            len(row) != self.cells_per_string for row in self.cells
        ):
            raise ConfigError(
                f"cell grid shape {[len(r) for r in self.cells]} does not match "
                f"{self.n_strings}x{self.cells_per_string}"
            )


@dataclass(slots=True)
class PackState:
    """Dynamic pack state.

    hold_time tracks seconds since the commanded pack current last changed
    by more than CURRENT_CHANGE_THRESHOLD_A; it drives the transient terms
    of the string resistance.
    """

    cells: tuple[tuple[CellState, ...], ...]
    time: float = 0.0
    hold_time: float = 0.0
    last_current: float = 0.0


@dataclass(slots=True)
class CurrentSplit:
    """Per-string currents, A. Positive = string discharging."""

    alpha: tuple[float, ...]


def make_pack_config(n_strings: int, cells_per_string: int, base: CellParams,
                     rng_seed: int = 0, perturb_pct: float = 0.05) -> PackConfig:
    """Build a pack of cells perturbed around ``base``.

    Cell heterogeneity is multiplicative uniform noise of +-perturb_pct on
    r0, r1, r2 and capacity; the RC rates and the OCV curve are shared.
    """
    if not 0.0 <= perturb_pct < 1.0:
        raise ConfigError(f"perturb_pct must be in [0, 1), got {perturb_pct}")
    rng = random.Random(rng_seed)

    def scale() -> float:
        return 1.0 + rng.uniform(-perturb_pct, perturb_pct)

    grid = tuple(
        tuple(
            CellParams(
                r0=base.r0 * scale(), r1=base.r1 * scale(), beta1=base.beta1,
                r2=base.r2 * scale(), beta2=base.beta2,
                capacity_ah=base.capacity_ah * scale(), ocv=base.ocv,
            )
            for _ in range(cells_per_string)
        )
        for _ in range(n_strings)
    )
    return PackConfig(n_strings, cells_per_string, grid, rng_seed)


def make_initial_state(config: PackConfig, soc: float | list[list[float]] | tuple) -> PackState:
    """Relaxed initial state (vc1 = vc2 = 0) at the given SoC(s)."""
    n, m = config.n_strings, config.cells_per_string
    if isinstance(soc, (int, float)):
        grid = [[float(soc)] * m for _ in range(n)]
    else:
        grid = [[float(v) for v in row] for row in soc]
        if len(grid) != n or any(len(row) != m for row in grid):
            raise ConfigError("initial SoC grid shape does not match the pack")
    for row in grid:
        for z in row:
            if not 0.0 < z < 1.0:
                raise ConfigError(f"initial SoC {z} outside (0, 1)")
    cells = tuple(tuple(CellState(z=grid[i][j]) for j in range(m)) for i in range(n))
    return PackState(cells=cells)


def string_phi(string_index: int, config: PackConfig, t_since_load_change: float) -> float:
    """Effective series resistance of one string, ohm.

    Sum over the string's cells of r0 + r1*(1-exp(-beta1*t)) + r2*(1-exp(-beta2*t)),
    where t is the time the present load level has been held. At t=0 only the
    ohmic part remains; as t grows the polarization resistances saturate in.
    """
    if t_since_load_change < 0:
        raise ConfigError("t_since_load_change must be >= 0")
    total = 0.0
    for p in config.cells[string_index]:
        total += (
            p.r0
            + p.r1 * (1.0 - math.exp(-p.beta1 * t_since_load_change))
            + p.r2 * (1.0 - math.exp(-p.beta2 * t_since_load_change))
        )
    return total


def string_gamma(string_index: int, state: PackState, config: PackConfig) -> float:
    """Source voltage of one string, V: sum of OCV(z) + vc1 + vc2 per cell.

    The RC-branch voltages carried in CellState are the current-history
    terms; they are exact under the exponential branch update.
    """
    total = 0.0
    for s, p in zip(state.cells[string_index], config.cells[string_index]):
        total += open_circuit_voltage(s.z, p.ocv) + s.vc1 + s.vc2
    return total


def solve_current_split(phis: list[float], gammas: list[float],
                        total_current: float) -> CurrentSplit:
    """Solve the n x n current-split system.

    Row i (i = 0..n-2) equates the terminal voltages of adjacent strings,
    V_i = gamma_i - phi_i*alpha_i:

        phi_i*alpha_i - phi_{i+1}*alpha_{i+1} = gamma_i - gamma_{i+1}

    so a string whose source voltage sits above its neighbour's discharges
    into it. The last row is KCL: sum(alpha) = I. Solved by Gaussian
    elimination with partial pivoting; n is small (strings, not cells).
    """
    n = len(phis)
    if n == 0 or len(gammas) != n:
        raise ConfigError("phis and gammas must be non-empty and the same length")
    if n == 1:
        return CurrentSplit(alpha=(total_current,))

    # Augmented matrix [A | b], row-major.
    a = [[0.0] * (n + 1) for _ in range(n)]
    for i in range(n - 1):
        a[i][i] = phis[i]
        a[i][i + 1] = -phis[i + 1]
        a[i][n] = gammas[i] - gammas[i + 1]
    for j in range(n):
        a[n - 1][j] = 1.0
    a[n - 1][n] = total_current

    # Forward elimination with partial pivoting.
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot][col]) < 1e-300:
            raise SingularSystemError(
                f"current-split system is singular at column {col} (phis={phis})"
            )
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f != 0.0:
                row_r, row_c = a[r], a[col]
                for c in range(col, n + 1):
                    row_r[c] -= f * row_c[c]

    # Back substitution.
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        row = a[i]
        s = row[n]
        for j in range(i + 1, n):
            s -= row[j] * x[j]
        x[i] = s / row[i]
    return CurrentSplit(alpha=tuple(x))


def step_pack(state: PackState, config: PackConfig, total_current: float, dt: float,
              balancer_injection: Optional[tuple[tuple[int, int], float]] = None
              ) -> tuple[PackState, CurrentSplit]:
    """Advance the whole pack by one timestep.

    Computes phi/gamma per string, solves the split, then steps every cell
    with its string current; the balancer-connected cell additionally sees
    the injected current (the balancing loop is a separate mesh, so it does
    not enter the KCL row). Returns the new state and the split used.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")

    if abs(total_current - state.last_current) > CURRENT_CHANGE_THRESHOLD_A:
        hold = 0.0
    else:
        hold = state.hold_time + dt

    n = config.n_strings
    phis = [string_phi(i, config, hold) for i in range(n)]
    gammas = [string_gamma(i, state, config) for i in range(n)]
    split = solve_current_split(phis, gammas, total_current)

    inj_cell = balancer_injection[0] if balancer_injection is not None else None
    inj_amps = balancer_injection[1] if balancer_injection is not None else 0.0

    new_cells = []
    for i in range(n):
        a_i = split.alpha[i]
        row = []
        for j in range(config.cells_per_string):
            s = state.cells[i][j]
            p = config.cells[i][j]
            i_b = a_i + inj_amps if (i, j) == inj_cell else a_i
            row.append(CellState(
                z=soc_step(s.z, i_b, dt, p.capacity_ah),
                vc1=rc_branch_step(s.vc1, i_b, dt, p.r1, p.beta1),
                vc2=rc_branch_step(s.vc2, i_b, dt, p.r2, p.beta2),
            ))
        new_cells.append(tuple(row))

    new_state = PackState(
        cells=tuple(new_cells),
        time=state.time + dt,
        hold_time=hold,
        last_current=total_current,
    )
    return new_state, split


def pack_soc_values(state: PackState) -> list[float]:
    """All cell SoCs in string-major order."""
    return [s.z for row in state.cells for s in row]


def pack_soc_spread(state: PackState) -> float:
    """max(z) - min(z) over all cells."""
    zs = pack_soc_values(state)
    return max(zs) - min(zs)
