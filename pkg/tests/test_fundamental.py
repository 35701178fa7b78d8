import pytest

from core.errors import DimensionTooSmall
from services.algebra import GradedRing
from services.canonical import canonical_module, is_mcm
from services.complexes import betti_table, ext_module, ext_total_dim, find_isomorphism
from services.fundamental import ext1_degree_zero, fundamental_module, has_retraction, yoneda_extension
from services.modules import GradedModule, ModuleMap, direct_sum


def test_ext1_piece_of_residue_syzygy_into_omega(plane, plane_m):
    omega = canonical_module(plane).module
    piece = ext1_degree_zero(plane_m, omega)
    assert piece.dimension == 1


def test_zero_class_splits(a1, a1_m1):
    omega = canonical_module(a1).module
    piece = ext1_degree_zero(a1_m1, omega)
    assert piece.dimension == 0
    ident = ModuleMap.identity(a1_m1)
    assert has_retraction(ident)


def test_fundamental_module_of_the_plane(plane):
    fm = fundamental_module(plane)
    E = fm.module.pruned()
    assert E.rank == 2
    assert not E.relations
    assert fm.certificates["sequence"]["exact"]
    assert fm.certificates["non_split"]
    assert fm.certificates["matches_approximation_of_m"]


def test_fundamental_module_over_a1(a1, a1_m1):
    fm = fundamental_module(a1)
    E = fm.module
    assert E.mu == 4
    assert is_mcm(E)
    assert betti_table(E, 3) == betti_table(a1_m1, 3).scaled(2)
    assert fm.certificates["non_split"]


def test_fundamental_module_needs_dimension_two():
    line = GradedRing(["t"])
    with pytest.raises(DimensionTooSmall):
        fundamental_module(line)


def test_yoneda_extension_of_generator_is_non_split(plane, plane_m):
    omega = canonical_module(plane).module
    piece = ext1_degree_zero(plane_m, omega)
    ext = yoneda_extension(piece.generator(0), piece)
    assert not ext.split
    assert ext.sequence.certify()["exact"]


def test_zero_extension_is_the_direct_sum(plane, plane_m):
    omega = canonical_module(plane).module
    piece = ext1_degree_zero(plane_m, omega)
    ext = yoneda_extension(piece.element([0]), piece)
    assert ext.split
    assert ext.sequence.certify()["exact"]
    assert find_isomorphism(ext.module, direct_sum(omega, piece.X).module).isomorphic


def test_koszul_extension_is_free_on_two_linear_generators(plane, plane_m):
    omega = canonical_module(plane).module
    piece = ext1_degree_zero(plane_m, omega)
    E = yoneda_extension(piece.generator(0), piece).module.pruned()
    assert sorted(E.degrees) == [1, 1]
    assert not E.relations


@pytest.mark.parametrize("ring_name", ["plane", "a1"])
def test_fundamental_module_has_no_ext1_into_omega(request, ring_name):
    ring = request.getfixturevalue(ring_name)
    E = fundamental_module(ring, compare_with_approximation=False).module
    omega = canonical_module(ring).module
    assert ext_module(E, omega, 1).is_zero()
    assert ext_module(E, omega, 2).is_zero()


@pytest.mark.slow
def test_fundamental_module_over_cubic(cubic):
    fm = fundamental_module(cubic)
    E = fm.module.pruned()
    assert E.rank == 6
    assert ext_total_dim(E, E, 1) == 8
