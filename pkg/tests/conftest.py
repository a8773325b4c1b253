"""Shared fixtures for shell-gsm tests."""
import numpy as np
import pytest

from shell_gsm import presets
from shell_gsm.gsm import AntennaGSM
from shell_gsm.sso import assemble

FREQUENCY = 3.5e9


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless -m slow is requested."""
    if "slow" in (config.getoption("markexpr") or ""):
        return
    skip = pytest.mark.skip(reason="slow; run with -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def frequency():
    return FREQUENCY


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def lossy_shell_sso():
    """SSO of the lossy isotropic reference shell at 3.5 GHz."""
    return assemble(presets.lossy_dielectric_shell(), FREQUENCY)


@pytest.fixture(scope="session")
def uniaxial_sso():
    return assemble(presets.two_layer_uniaxial_shell(), FREQUENCY)


@pytest.fixture
def random_antenna():
    def make(lmax, ports=2, seed=0, contrast=0.8):
        return AntennaGSM.random(lmax, FREQUENCY, num_ports=ports, seed=seed, contrast=contrast)
    return make


@pytest.fixture
def scenario_text():
    return """
[geometry]
rb_mm = 150.0
ra_mm = 180.0

[[geometry.layers]]
type = "iso"
thickness_mm = 30.0
eps = "5-0.5j"

[frequency]
start_ghz = 3.4
stop_ghz = 3.6
points = 2

[antenna]
gsm_file = "transparent"

[task]
kind = "sparams"
lmax = 4
"""


@pytest.fixture
def scenario_file(tmp_path, scenario_text):
    path = tmp_path / "shell.toml"
    path.write_text(scenario_text, encoding="utf-8")
    return path
