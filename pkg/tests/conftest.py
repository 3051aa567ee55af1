import time

import pytest

from etk import experiments

FIGURES = ("npp", "tcoulomb", "exciton", "cubic-linear", "cubic-log", "cubic-gauss")


class SweepCache:
    """Default figure sweeps, computed once per session on first use."""

    def __init__(self):
        self.tables = {}
        self.seconds = {}

    def get(self, figure):
        if figure not in self.tables:
            t0 = time.perf_counter()
            self.tables[figure] = experiments.run_figure(figure)
            self.seconds[figure] = time.perf_counter() - t0
        return self.tables[figure]


@pytest.fixture(scope="session")
def sweeps():
    return SweepCache()
