import pytest

from core.errors import NotCodepthPure, NotCohenMacaulay, NotFID
from services.algebra import GradedRing
from services.canonical import (
    ab2_embedding,
    canonical_module,
    cm_type,
    codepth,
    depth,
    dual_into_omega,
    is_cohen_macaulay,
    is_mcm,
    omega_multiplier,
    omega_rank,
    omega_rank_greedy,
    sharp_transport,
)
from services.complexes import find_isomorphism
from services.modules import GradedModule, ModuleMap, direct_sum, hom_module


# ---------------------------------------------------------------------------
# Canonical modules
# ---------------------------------------------------------------------------
@pytest.mark.parametrize(
    "ring_name, twists, gorenstein",
    [("plane", [-2], True), ("a1", [-1], True), ("a2", [-2], True), ("cubic", [-1, -1], False)],
)
def test_canonical_module_twists(request, ring_name, twists, gorenstein):
    ring = request.getfixturevalue(ring_name)
    canon = canonical_module(ring)
    assert list(canon.module.free.twists) == twists
    assert canon.is_gorenstein is gorenstein
    assert canon.to_dict()["rank"] == 1


def test_cm_types(plane, a1, cubic):
    assert [cm_type(plane), cm_type(a1), cm_type(cubic)] == [1, 1, 2]


def test_canonical_module_is_cached(a1):
    assert canonical_module(a1) is canonical_module(a1)


def test_non_cohen_macaulay_ring_rejected():
    # two planes meeting in a point
    ring = GradedRing(["x", "y", "z", "w"], ideal=["x*z", "x*w", "y*z", "y*w"])
    assert not is_cohen_macaulay(ring)
    with pytest.raises(NotCohenMacaulay):
        canonical_module(ring)


# ---------------------------------------------------------------------------
# Depth
# ---------------------------------------------------------------------------
def test_mcm_and_depth(a1, a1_m, a1_m1, a1_k):
    assert is_mcm(GradedModule.free_module(a1))
    assert is_mcm(a1_m1)
    assert not is_mcm(a1_m)
    assert not is_mcm(a1_k)
    assert depth(a1_m) == 1
    assert codepth(a1_m) == 1
    assert depth(a1_k) == 0
    assert codepth(a1_m1) == 0


def test_omega_is_mcm(cubic):
    assert is_mcm(canonical_module(cubic).module)


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------
def test_dual_of_rank_one_mcm(a1_m1):
    dual = dual_into_omega(a1_m1)
    assert dual.mu == 2
    assert is_mcm(dual)


def test_dual_of_residue_field(a1_k):
    assert dual_into_omega(a1_k).length() == 1


@pytest.mark.parametrize("module_name", ["a1_m1", "a1_k", "plane_k"])
def test_double_dual_returns_the_module(request, module_name):
    M = request.getfixturevalue(module_name)
    assert find_isomorphism(dual_into_omega(dual_into_omega(M)), M).isomorphic


def test_dual_of_residue_field_in_the_plane(plane_k):
    dual = dual_into_omega(plane_k).pruned()
    assert dual.degrees == (0,)
    assert find_isomorphism(dual, plane_k).isomorphic


@pytest.mark.parametrize("ring_name", ["plane", "a1", "a2", "cubic"])
def test_endomorphisms_of_omega_are_cyclic(request, ring_name):
    ring = request.getfixturevalue(ring_name)
    omega = canonical_module(ring).module
    assert hom_module(omega, omega).module.mu == 1


def test_dual_rejects_non_cohen_macaulay_module(a1_m):
    with pytest.raises(NotCodepthPure):
        dual_into_omega(a1_m)


def test_omega_multiplier_reads_ring_elements(a1):
    omega = canonical_module(a1).module
    x = a1.poly_ring.variable(0)
    mult = ModuleMap(omega, omega, [{(0, x): 1}], 1)
    assert omega_multiplier(mult) == {x: 1}


# ---------------------------------------------------------------------------
# omega-rank
# ---------------------------------------------------------------------------
def test_omega_rank_counts_free_summands(a1, a1_m1):
    A = GradedModule.free_module(a1)
    assert omega_rank(A) == 1
    assert omega_rank(a1_m1) == 0
    assert omega_rank(direct_sum(A, a1_m1).module) == 1
    assert omega_rank(GradedModule.free_module(a1, (0, 3))) == 2


def test_omega_rank_over_non_gorenstein_ring(cubic):
    omega = canonical_module(cubic).module
    A = GradedModule.free_module(cubic)
    assert omega_rank(omega) == 1
    assert omega_rank(direct_sum(omega, omega.shift(2)).module) == 2
    assert omega_rank(A) == 0
    assert omega_rank_greedy(direct_sum(omega, A).module) == 1


# ---------------------------------------------------------------------------
# omega embeddings and the sharp transport
# ---------------------------------------------------------------------------
def test_ab2_embedding_of_mcm_module(a1_m1):
    emb = ab2_embedding(a1_m1)
    assert emb.embedding.is_well_defined()
    assert emb.embedding.is_injective()
    assert emb.projection.compose(emb.embedding).is_zero()
    assert not emb.cover.relations


def test_sharp_transport_of_omega(cubic):
    omega = canonical_module(cubic).module
    t = sharp_transport(omega)
    assert t.certified
    assert t.projective_dimension == 0
    assert t.Q.mu == 1


def test_sharp_transport_rejects_infinite_injective_dimension(a1_k):
    with pytest.raises(NotFID):
        sharp_transport(a1_k)
    assert not sharp_transport(a1_k, strict=False).certified
