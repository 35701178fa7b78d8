import pytest

from core.errors import CertificationError
from services.algebra import FreeModule
from services.complexes import betti_table
from services.modules import (
    GradedModule,
    Matrix,
    ModuleMap,
    direct_power,
    direct_sum,
    hom_module,
    hom_piece,
    kernel_of_map,
    pushout,
    tensor_modules,
)
from tests import oracles


def _multiplication(ring, mono: tuple, source_degree: int = 1) -> ModuleMap:
    """A(-source_degree) -> A, 1 -> mono."""
    source = GradedModule.free_module(ring, (source_degree,))
    return ModuleMap(source, GradedModule.free_module(ring), [{(0, mono): 1}])


# ---------------------------------------------------------------------------
# Graded pieces
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("module_name", ["a1_m", "a1_k", "a1_m1"])
def test_piece_dimensions_match_oracle(request, module_name):
    M = request.getfixturevalue(module_name)
    for d in range(5):
        assert M.piece_dimension(d) == oracles.piece_dimension(M, d)


def test_residue_field_has_length_one(a1_k):
    assert a1_k.length() == 1
    assert a1_k.dimension() == 0


def test_maximal_ideal_presentation(a1_m, plane_m):
    assert a1_m.mu == 3
    assert a1_m.degrees == (1, 1, 1)
    assert plane_m.mu == 2
    assert len(plane_m.relations) == 1


def test_standard_basis_coordinates(a1):
    A = GradedModule.free_module(a1)
    x2 = {(0, (2, 0, 0)): 1}
    yz = {(0, (0, 1, 1)): 1}
    assert (A.coordinates(x2, 2) == A.coordinates(yz, 2)).all()


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------
def test_prune_removes_unit_relations(a1):
    x = a1.poly_ring.variable(0)
    # e_0 (degree 1) = x e_1 (degree 0)
    M = GradedModule(FreeModule(a1, (1, 0)), [{(0, a1.poly_ring.one): 1, (1, x): a1.p - 1}])
    pr = M.prune_data
    assert pr.module.rank == 1
    assert pr.module.degrees == (0,)
    assert pr.to_pruned.compose(pr.from_pruned).equals(ModuleMap.identity(pr.module))
    assert [M.piece_dimension(d) for d in range(4)] == [a1.hilbert_function(d) for d in range(4)]


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------
def test_multiplication_by_x_is_injective_on_a_domain(a1):
    f = _multiplication(a1, a1.poly_ring.variable(0))
    assert f.is_well_defined()
    assert f.is_injective()
    assert not f.is_surjective()
    coker, proj = f.cokernel()
    assert coker.mu == 1
    assert proj.compose(f).is_zero()


def test_kernel_of_projection_onto_residue_field(a1, a1_k):
    A = GradedModule.free_module(a1)
    pi = ModuleMap(A, a1_k, [{(0, a1.poly_ring.one): 1}])
    K, incl = pi.kernel()
    assert K.pruned().mu == 3
    assert pi.compose(incl).is_zero()
    assert incl.is_injective()


def test_kernel_of_map_gives_syzygies_of_the_maximal_ideal(a1):
    pr = a1.poly_ring
    phi = Matrix(
        FreeModule(a1, (1, 1, 1)),
        FreeModule(a1, (0,)),
        [{(0, pr.variable(i)): 1} for i in range(3)],
    )
    K, gens = kernel_of_map(phi)
    assert phi.compose(gens).is_zero()
    assert betti_table(K, 0).entries == {(0, 2): 4}


def test_image_and_lift(a1):
    x = a1.poly_ring.variable(0)
    f = _multiplication(a1, x)
    image, incl = f.image()
    g = f.lift_through(incl)
    assert incl.compose(g).equals(f)
    unit = ModuleMap(GradedModule.free_module(a1), GradedModule.free_module(a1), [{(0, a1.poly_ring.one): 1}])
    with pytest.raises(CertificationError):
        unit.lift_through(incl)


def test_map_arithmetic(a1_m1):
    ident = ModuleMap.identity(a1_m1)
    assert (ident - ident).is_zero()
    assert ident.scale(2).equals(ident + ident)
    assert ident.is_isomorphism()


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------
def test_direct_sum_records_summands(a1_m1, a1_k):
    ds = direct_sum(a1_m1, a1_k)
    assert ds.module.rank == 3
    assert ds.module.summands == (a1_m1, a1_k)
    for inj, proj in zip(ds.injections, ds.projections):
        assert proj.compose(inj).equals(ModuleMap.identity(inj.source))
    cube = direct_power(a1_m1, 3)
    assert cube.mu == 6
    assert len(cube.summands) == 3


def test_tensor_with_residue_field_counts_generators(a1_m, a1_k, a1_m1):
    assert tensor_modules(a1_m, a1_k).length() == 3
    assert tensor_modules(a1_m1, a1_k).length() == 2


def test_pushout_along_identity(a1_m1):
    ident = ModuleMap.identity(a1_m1)
    po = pushout(ident, ident)
    assert po.module.mu == 2
    assert po.from_first.compose(ident).equals(po.from_second.compose(ident))


def test_hom_from_maximal_ideal_is_free(a1, a1_m):
    H = hom_module(a1_m, GradedModule.free_module(a1))
    assert H.module.mu == 1
    for f in H.generator_maps():
        assert f.is_well_defined()


def test_endomorphisms_of_rank_one_mcm(a1_m1):
    assert len(hom_piece(a1_m1, a1_m1, 0)) == 1
    assert len(hom_piece(a1_m1, a1_m1, -1)) == 0


def test_hom_pieces_are_well_defined(a1_m, a1_m1):
    for f in hom_piece(a1_m, a1_m1, 0) + hom_piece(a1_m1, a1_m, 1):
        assert f.is_well_defined()
