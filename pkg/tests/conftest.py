import numpy as np
import pytest

from ncgrass import _exact as E
from ncgrass.algebra import layered
from ncgrass.grassmann import GrassPoint, affine_embed
from ncgrass.resolvent import ProjectivePoint


def q(x):
    return E.to_exact(x)


def scalar_block(rows, mode="exact"):
    """Outer (len(rows) x len(rows[0])) block matrix with n = k = 1."""
    r, c = len(rows), len(rows[0])
    return layered(rows, r, 1, 1, mode, cols=c)


def emb(*entries, mode="exact"):
    """embed(x) at (d, m, n, k) = (1, 2, 1, 1), or a diagonal at level len(entries)."""
    n = len(entries)
    data = [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
    X = layered(data, 1, n, 1, mode)
    return affine_embed(X)


def proj(a, mode="exact"):
    return ProjectivePoint.from_point(emb(a, mode=mode))


def frame_point(d, rows, mode="exact"):
    m = len(rows)
    return GrassPoint(d, layered(rows, m, 1, 1, mode))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
