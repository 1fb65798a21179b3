"""TOML run-configuration loading.

A run config is a single hierarchical file; see configs/reference.toml in
the repository for the documented schema. Every table is optional except
[pack] and [profile] or [sweep]: omitted values fall back to the reference
cell and controller defaults so small configs stay small.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .balancer import BalancerConfig
from .cell import REFERENCE_CELL, CellParams, OcvParams
from .engine import Scenario
from .errors import ConfigError
from .pack import make_pack_config
from .profiles import load_profile, synth_drive_cycle
from .scenarios import jittered_soc_grid
from .sweep import SweepSpec


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    seed: int
    out_dir: Path
    workers: int = 1
    sweep: Optional[SweepSpec] = None


def _get(table: dict, key: str, kind, default=None, where: str = ""):
    if key not in table:
        if default is not None:
            return default
        raise ConfigError(f"missing config key {where}{key}")
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"config key {where}{key} should be {kind.__name__}, got {value!r}")
    return value


def load_run_config(path: str | Path, *, seed_override: Optional[int] = None,
                    dt_override: Optional[float] = None,
                    out_override: Optional[str] = None,
                    workers: int = 1) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw: dict[str, Any] = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from None

    seed = seed_override if seed_override is not None else int(raw.get("seed", 0))

    # [pack] and nested [pack.cell] / [pack.cell.ocv]
    pack_tbl = raw.get("pack", {})
    cell_tbl = pack_tbl.get("cell", {})
    ocv_tbl = cell_tbl.get("ocv", {})
    ocv = OcvParams(
        v0=_get(ocv_tbl, "v0", float, REFERENCE_CELL.ocv.v0, "pack.cell.ocv."),
        alpha=_get(ocv_tbl, "alpha", float, REFERENCE_CELL.ocv.alpha, "pack.cell.ocv."),
        beta=_get(ocv_tbl, "beta", float, REFERENCE_CELL.ocv.beta, "pack.cell.ocv."),
        gamma=_get(ocv_tbl, "gamma", float, REFERENCE_CELL.ocv.gamma, "pack.cell.ocv."),
        zeta=_get(ocv_tbl, "zeta", float, REFERENCE_CELL.ocv.zeta, "pack.cell.ocv."),
        epsilon=_get(ocv_tbl, "epsilon", float, REFERENCE_CELL.ocv.epsilon, "pack.cell.ocv."),
    )
    base_cell = CellParams(
        r0=_get(cell_tbl, "r0", float, REFERENCE_CELL.r0, "pack.cell."),
        r1=_get(cell_tbl, "r1", float, REFERENCE_CELL.r1, "pack.cell."),
        beta1=_get(cell_tbl, "beta1", float, REFERENCE_CELL.beta1, "pack.cell."),
        r2=_get(cell_tbl, "r2", float, REFERENCE_CELL.r2, "pack.cell."),
        beta2=_get(cell_tbl, "beta2", float, REFERENCE_CELL.beta2, "pack.cell."),
        capacity_ah=_get(cell_tbl, "capacity_ah", float, REFERENCE_CELL.capacity_ah, "pack.cell."),
        ocv=ocv,
    )
    pack = make_pack_config(
        n_strings=_get(pack_tbl, "n_strings", int, 3, "pack."),
        cells_per_string=_get(pack_tbl, "cells_per_string", int, 4, "pack."),
        base=base_cell,
        rng_seed=seed,
        perturb_pct=_get(pack_tbl, "perturb_pct", float, 0.05, "pack."),
    )

    # [initial_soc]: explicit grid or mean +- jitter
    soc_tbl = raw.get("initial_soc", {})
    if "values" in soc_tbl:
        values = soc_tbl["values"]
        initial = tuple(tuple(float(v) for v in row) for row in values)
    else:
        initial = jittered_soc_grid(
            pack,
            mean=_get(soc_tbl, "mean", float, 0.60, "initial_soc."),
            jitter=_get(soc_tbl, "jitter", float, 0.0, "initial_soc."),
            seed=seed + 1,
        )

    # [profile]
    prof_tbl = raw.get("profile", {})
    kind = _get(prof_tbl, "kind", str, "synthetic", "profile.")
    if kind == "csv":
        csv_path = Path(_get(prof_tbl, "path", str, where="profile."))
        if not csv_path.is_absolute():
            csv_path = path.parent / csv_path
        profile = load_profile(str(csv_path))
    elif kind == "synthetic":
        profile = synth_drive_cycle(
            active_hours=_get(prof_tbl, "active_hours", float, 0.5, "profile."),
            rest_hours=_get(prof_tbl, "rest_hours", float, 12.0, "profile."),
            mean_depletion_a=_get(prof_tbl, "mean_depletion_a", float, 0.8, "profile."),
            pulse_period_s=_get(prof_tbl, "pulse_period_s", float, 60.0, "profile."),
            pulse_amplitude_a=_get(prof_tbl, "pulse_amplitude_a", float, 6.0, "profile."),
            seed=seed + 2,
        )
    else:
        raise ConfigError(f"profile.kind must be 'synthetic' or 'csv', got {kind!r}")

    # [balancer]
    bal_tbl = raw.get("balancer", {})
    inrush = bal_tbl.get("inrush_limit_a")
    balancer = BalancerConfig(
        cap_f=_get(bal_tbl, "cap_f", float, 50.0, "balancer."),
        res_ohm=_get(bal_tbl, "res_ohm", float, 0.05, "balancer."),
        switch_factor=_get(bal_tbl, "switch_factor", float, 0.5, "balancer."),
        soc_threshold=_get(bal_tbl, "soc_threshold", float, 0.02, "balancer."),
        v_cap_init=float(bal_tbl.get("v_cap_init", 0.0)),
        inrush_limit_a=float(inrush) if inrush is not None else None,
    )

    # [sim]
    sim_tbl = raw.get("sim", {})
    dt = dt_override if dt_override is not None else _get(sim_tbl, "dt_s", float, 0.1, "sim.")
    stop_margin = sim_tbl.get("stop_margin_hours")
    scenario = Scenario(
        pack=pack,
        initial_soc=initial,
        profile=profile,
        balancer=balancer,
        dt=dt,
        record_every=_get(sim_tbl, "record_every", int, 100, "sim."),
        stop_margin_hours=float(stop_margin) if stop_margin is not None else None,
    )

    # [sweep] (optional)
    sweep_spec = None
    if "sweep" in raw:
        sw = raw["sweep"]
        sweep_spec = SweepSpec(
            cap_values=tuple(float(v) for v in _get(sw, "cap_f", list, where="sweep.")),
            res_values=tuple(float(v) for v in _get(sw, "res_ohm", list, where="sweep.")),
            delta_values=tuple(float(v) for v in _get(sw, "switch_factor", list, where="sweep.")),
            scenario=scenario,
            threshold=_get(sw, "threshold", float, balancer.soc_threshold, "sweep."),
            max_sim_hours=_get(sw, "max_sim_hours", float, 48.0, "sweep."),
        )

    out_dir = Path(out_override if out_override is not None else raw.get("out_dir", "out"))
    return RunConfig(scenario=scenario, seed=seed, out_dir=out_dir, workers=workers,
                     sweep=sweep_spec)
