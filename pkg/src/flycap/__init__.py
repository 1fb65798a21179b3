"""flycap: parallel/series Li-ion pack simulator with flying-capacitor balancing."""

from .balancer import (
    BalancerConfig,
    BalancerState,
    Phase,
    SwitchEvent,
    balancer_step,
    capacitor_current,
    capacitor_voltage_update,
    is_balanced,
    select_extreme_cells,
)
from .cell import (
    REFERENCE_CELL,
    REFERENCE_OCV,
    CellParams,
    CellState,
    OcvParams,
    open_circuit_voltage,
    rc_branch_step,
    soc_step,
    terminal_voltage,
)
from .engine import Scenario, simulate
from .errors import (
    ConfigError,
    FlycapError,
    MetricsError,
    OcvDomainError,
    ProfileError,
    SimulationFault,
    SingularSystemError,
    SocRangeError,
)
from .metrics import (
    energy_efficiency,
    settling_time,
    soc_spread,
    voltage_convergence_report,
)
from .pack import (
    CurrentSplit,
    PackConfig,
    PackState,
    make_initial_state,
    make_pack_config,
    solve_current_split,
    step_pack,
    string_gamma,
    string_phi,
)
from .profiles import CurrentProfile, load_profile, synth_drive_cycle
from .sweep import SweepRow, SweepSpec, run_efficiency_study, run_sweep
from .trace import SimTrace

__version__ = "0.1.0"
