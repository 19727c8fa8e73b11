import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fedsubmax.objectives import coverage_population, facility_population  # noqa: E402

# G1={C1,C2}, G2={C2,C3}, G3={C4} with zero-based ids
COV3_GROUPS = [[0, 1], [1, 2], [3]]


@pytest.fixture
def cov3():
    return coverage_population(COV3_GROUPS, 4)


def random_coverage(rng, n, N, density=0.4):
    member = rng.random((N, n)) < density
    return coverage_population([np.flatnonzero(member[:, a]).tolist() for a in range(n)], N)


def random_facility(rng, n, N):
    return facility_population(rng.random((N, n)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[cid])
