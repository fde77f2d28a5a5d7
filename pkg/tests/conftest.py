from __future__ import annotations

import pytest

from memaccel.tables import build_acs_table, build_minselect_table
from memaccel.trellis import DVBT_CODE
from memaccel.viterbi_ma import MaDecoder
from memaccel.viterbi_ref import DecoderConfig


@pytest.fixture(scope="session")
def acs_table():
    return build_acs_table(DVBT_CODE)


@pytest.fixture(scope="session")
def minsel_table():
    return build_minselect_table()


@pytest.fixture(scope="session")
def config():
    return DecoderConfig(DVBT_CODE, 64)


@pytest.fixture()
def ma_decoder(config, acs_table, minsel_table):
    return MaDecoder(config, acs_table, minsel_table)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
