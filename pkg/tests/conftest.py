import numpy as np
import pytest

from antithetic.crn import MassAction, Network, reaction
from antithetic.presets import preset


def birth_death(birth=5.0, death=1.0):
    sp = ("X",)
    return Network(sp, (reaction(sp, {}, {"X": 1}, MassAction(birth), "birth"),
                        reaction(sp, {"X": 1}, {}, MassAction(death), "death")))


@pytest.fixture
def gene():
    return preset("gene")


@pytest.fixture
def maturation():
    return preset("maturation")


@pytest.fixture
def dimer():
    return preset("dimerization")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
