import numpy as np
import pytest

from pbchflash import bch, codec


@pytest.fixture(scope="session")
def gf4():
    return bch.make_field(4)


@pytest.fixture(scope="session")
def gf10():
    return bch.make_field(10)


@pytest.fixture(scope="session")
def toy_code(gf4):
    """[15, 7, 4] code: corrects one error, masks up to four defects."""
    return codec.construct_from_t(gf4, 1, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
