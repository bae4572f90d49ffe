import time

import pytest

from airysums.airy import build_zero_table
from airysums.derive import derive_up_to


@pytest.fixture(scope="session")
def table_small():
    """30 zeros at 128 bits: enough for matrix-element and oracle tests."""
    return build_zero_table(30, 128)


class TimedTable:
    def __init__(self, table, build_seconds):
        self.table = table
        self.build_seconds = build_seconds


@pytest.fixture(scope="session")
def table_sums():
    """2000 zeros at the 256-bit default, with the build time recorded.

    The acceptance suite charges this build time against the runtime budget
    of the numeric-agreement criterion.
    """
    t0 = time.monotonic()
    table = build_zero_table(2000, 256)
    return TimedTable(table, time.monotonic() - t0)


@pytest.fixture(scope="session")
def ledger11():
    return derive_up_to(11)


@pytest.fixture(scope="session")
def ledger20():
    return derive_up_to(20)
