import cmath
import math

import pytest

from torusgreen import make_lattice

TAU_SQUARE = 1j
TAU_RECT = 2j
TAU_RHOMBIC = cmath.exp(1j * math.pi / 3)
TAU_GENERIC = 0.3 + 1.2j

ALL_TAUS = (TAU_SQUARE, TAU_RECT, TAU_RHOMBIC, TAU_GENERIC)


@pytest.fixture(scope="session")
def L_square():
    return make_lattice(TAU_SQUARE)


@pytest.fixture(scope="session")
def L_rect():
    return make_lattice(TAU_RECT)


@pytest.fixture(scope="session")
def L_rhombic():
    return make_lattice(TAU_RHOMBIC)


@pytest.fixture(scope="session")
def L_generic():
    return make_lattice(TAU_GENERIC)


@pytest.fixture(scope="session")
def all_lattices(L_square, L_rect, L_rhombic, L_generic):
    return [L_square, L_rect, L_rhombic, L_generic]
