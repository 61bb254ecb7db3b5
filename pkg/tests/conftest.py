import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from dyadreg import AgentTable, Bandwidths, build_panel  # noqa: E402
from dyadreg.montecarlo import simulate_dgp  # noqa: E402
from oracles import TOY_X, TOY_Y  # noqa: E402


@pytest.fixture
def toy_panel():
    agents = AgentTable((1, 2, 3), np.array(TOY_X)[:, None])
    return build_panel(agents, [(a, b, y) for (a, b), y in TOY_Y.items()])


@pytest.fixture(scope="session")
def small_sim():
    """A 40-agent draw of the simulation design with rule-of-thumb bandwidths."""
    panel = simulate_dgp(40, 7)
    return panel, Bandwidths.rule_of_thumb(40)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
