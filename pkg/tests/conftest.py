import os
from pathlib import Path

import numpy as np
import pytest

from fuzzyembed import _kernels

DATA_DIR = Path(__file__).parent / "data"
WORDSIM = DATA_DIR / "wordsim353.tsv"
# the 437 WordSim-353 words cut from glove.6B.100d
GLOVE_100D_SUBSET = DATA_DIR / "glove.6B.100d.wordsim.txt"


def glove_path(dim):
    """Location of the GloVe 6B file for ``dim`` dimensions, or None.

    ``FUZZYEMBED_GLOVE_<dim>D`` names a file directly;
    ``FUZZYEMBED_GLOVE_DIR`` a directory holding ``glove.6B.<dim>d.txt``.
    The 100d WordSim subset shipped with the tests is the fallback.
    """
    direct = os.environ.get(f"FUZZYEMBED_GLOVE_{dim}D")
    if direct:
        return Path(direct)
    folder = os.environ.get("FUZZYEMBED_GLOVE_DIR")
    if folder:
        p = Path(folder) / f"glove.6B.{dim}d.txt"
        if p.exists():
            return p
    if dim == 100:
        return GLOVE_100D_SUBSET
    return None


def wordsim_path():
    return Path(os.environ.get("FUZZYEMBED_WORDSIM", WORDSIM))


@pytest.fixture(params=["numpy", "numba"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    impl = getattr(_kernels, f"{request.param}_kernels")
    if impl is None:
        pytest.skip(f"{request.param} kernels unavailable")
    monkeypatch.setattr(_kernels, "_active", impl)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
