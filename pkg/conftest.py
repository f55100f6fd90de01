import os

# keep test runs from writing daily log files into the checkout
os.environ.setdefault("DIMER_MIRROR_LOG_TO_FILE", "false")

import pytest

from dimer import load_dimer
from mirror import dual_dimer


@pytest.fixture(scope="session")
def sphere3():
    return load_dimer("sphere3")


@pytest.fixture(scope="session")
def torus4():
    return load_dimer("torus4")


@pytest.fixture(scope="session")
def sphere3_mirror(sphere3):
    return dual_dimer(sphere3)


@pytest.fixture(scope="session")
def torus4_mirror(torus4):
    return dual_dimer(torus4)


@pytest.fixture
def short_face_text():
    return "\n".join([
        "punctures: p q",
        "arc x p q",
        "arc y q p",
        "rot p: x.t y.h",
        "rot q: y.t x.h",
    ]) + "\n"


@pytest.fixture(scope="session")
def torus4_zigzag(torus4):
    """Zigzag path of torus4 through a given (arc, turn) step."""
    return lambda arc, turn: torus4.zigzag_at(arc, turn)[1]
