import pytest

from flycap.balancer import BalancerConfig
from flycap.cell import REFERENCE_CELL, REFERENCE_OCV
from flycap.pack import make_initial_state, make_pack_config


@pytest.fixture
def ref_ocv():
    return REFERENCE_OCV


@pytest.fixture
def ref_cell():
    return REFERENCE_CELL


@pytest.fixture
def identical_pack():
    """3P4S pack with zero perturbation (all cells identical)."""
    return make_pack_config(3, 4, REFERENCE_CELL, rng_seed=0, perturb_pct=0.0)


@pytest.fixture
def two_cell_pack():
    """Single string of two identical cells."""
    return make_pack_config(1, 2, REFERENCE_CELL, rng_seed=0, perturb_pct=0.0)


@pytest.fixture
def default_balancer():
    return BalancerConfig(cap_f=50.0, res_ohm=0.05, switch_factor=0.5)


@pytest.fixture
def relaxed_state(identical_pack):
    return make_initial_state(identical_pack, 0.60)
