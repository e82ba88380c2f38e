import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from brainschema.codec import tiny_cortex  # noqa: E402
from brainschema.schema import CerebellumConfig, CortexConfig  # noqa: E402


@pytest.fixture
def tiny():
    return tiny_cortex()


@pytest.fixture
def ragged():
    """Cortex config where every level divides inexactly."""
    return CortexConfig(total_neurons=1_237, total_columns=11, neurons_per_microcolumn=13,
                        regions_per_hemisphere=2, hemisphere_names=("left", "right"))


@pytest.fixture
def small_cerebellum():
    return CerebellumConfig(total_neurons=2_000, functional_regions=3, lobules=2, microzones=2,
                            modules_per_microzone=3)


@pytest.fixture
def canonical():
    return CortexConfig()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
