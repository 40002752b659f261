import sys

import numpy as np
import pytest

from axokit import OperatorKind, Family, enumerate_configs
from axokit.characterize import (
    ActivityPolicy,
    Exhaustive,
    characterize_dataset,
)


def pytest_terminal_summary(terminalreporter):
    # replay acceptance verdicts after capture is torn down
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def adder4():
    return OperatorKind(Family.UNSIGNED_ADDER, 4)


@pytest.fixture(scope="session")
def adder8():
    return OperatorKind(Family.UNSIGNED_ADDER, 8)


@pytest.fixture(scope="session")
def mul4():
    return OperatorKind(Family.SIGNED_MULTIPLIER, 4)


@pytest.fixture(scope="session")
def mul8():
    return OperatorKind(Family.SIGNED_MULTIPLIER, 8)


@pytest.fixture(scope="session")
def adder4_char(adder4):
    """Exhaustive characterization of every 4-bit adder config."""
    configs = list(enumerate_configs(adder4))
    return characterize_dataset(adder4, configs, Exhaustive(), ActivityPolicy(256), seed=0)


@pytest.fixture(scope="session")
def adder8_char(adder8):
    configs = list(enumerate_configs(adder8, include_all_zeros=False))
    return characterize_dataset(adder8, configs, Exhaustive(), ActivityPolicy(256), seed=0, threads=4)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
