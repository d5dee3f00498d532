from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from signum.sparse import SparseMatrix

settings.register_profile("signum", deadline=None, max_examples=60)
settings.load_profile("signum")


def random_sparse(rng, nrows, ncols, density, scale=1.0):
    mask = rng.random((nrows, ncols)) < density
    d = np.where(mask, rng.standard_normal((nrows, ncols)) * scale, 0.0)
    return SparseMatrix.from_coo(nrows, ncols, *np.nonzero(d), d[mask]), d


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# (number, passed, detail) tuples appended by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
