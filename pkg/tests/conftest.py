import os

import pytest

from services.algebra import FreeModule, GradedRing
from services.modules import GradedModule

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def maximal_ideal(ring: GradedRing) -> GradedModule:
    return GradedModule.ideal(ring, [{ring.poly_ring.variable(i): 1} for i in range(ring.nvars)], name="m")


# ---------------------------------------------------------------------------
# Rings (session scoped: canonical modules and resolutions are cached on them)
# ---------------------------------------------------------------------------
@pytest.fixture(scope="session")
def plane() -> GradedRing:
    """k[u,v]"""
    return GradedRing(["u", "v"], name="plane")


@pytest.fixture(scope="session")
def a1() -> GradedRing:
    """k[x,y,z]/(x^2 - yz)"""
    return GradedRing(["x", "y", "z"], ideal=["x^2 - y*z"], name="A1")


@pytest.fixture(scope="session")
def a2() -> GradedRing:
    """k[x,y,z]/(x^3 - yz) with deg x = 2, deg y = deg z = 3"""
    return GradedRing(["x", "y", "z"], weights=[2, 3, 3], ideal=["x^3 - y*z"], name="A2")


@pytest.fixture(scope="session")
def cubic() -> GradedRing:
    """A(3): 2x2 minors of [[a,b,c],[b,c,d]]"""
    return GradedRing(["a", "b", "c", "d"], ideal=["a*c - b^2", "a*d - b*c", "b*d - c^2"], name="A3")


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------
@pytest.fixture(scope="session")
def a1_m(a1) -> GradedModule:
    return maximal_ideal(a1)


@pytest.fixture(scope="session")
def a1_k(a1) -> GradedModule:
    return GradedModule.residue_field(a1)


@pytest.fixture(scope="session")
def a1_m1(a1) -> GradedModule:
    """coker [[x, y], [z, x]], the rank-one MCM module over A1"""
    x, y, z = (a1.poly_ring.variable(i) for i in range(3))
    rels = [{(0, x): 1, (1, z): 1}, {(0, y): 1, (1, x): 1}]
    return GradedModule(FreeModule(a1, (0, 0)), rels, name="M1")


@pytest.fixture(scope="session")
def plane_m(plane) -> GradedModule:
    return maximal_ideal(plane)


@pytest.fixture(scope="session")
def plane_k(plane) -> GradedModule:
    return GradedModule.residue_field(plane)


@pytest.fixture(scope="session")
def cubic_k(cubic) -> GradedModule:
    return GradedModule.residue_field(cubic)
