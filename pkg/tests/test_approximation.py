import pytest

from core.errors import NotGorenstein
from services.approximation import (
    ApproximationResult,
    ShortExactSequence,
    ding_index,
    gamma,
    is_minimal,
    mcm_approximation,
    power_of_maximal_ideal,
    strip_common_omega,
)
from services.canonical import canonical_module, is_mcm, omega_rank
from services.complexes import betti_table, ext_module, ext_total_dim, find_isomorphism
from services.modules import GradedModule, ModuleMap, direct_power, direct_sum


def test_approximation_of_maximal_ideal_in_the_plane(plane_m):
    result = mcm_approximation(plane_m)
    certs = result.certify()
    assert certs["approximation"]["exact"]
    assert certs["hull"]["exact"]
    assert result.M.mu == 2
    assert not result.M.pruned().relations
    assert result.L.mu == 1
    assert omega_rank(result.M) == 2


def test_approximation_of_maximal_ideal_over_a1(a1, a1_m):
    result = mcm_approximation(a1_m)
    certs = result.certify()
    assert certs["approximation"]["exact"]
    assert certs["M_is_mcm"]
    assert certs["M_hull_is_mcm"]
    assert certs["L_fid"]["evaluation_isomorphism"]
    assert certs["L_hull_fid"]["evaluation_isomorphism"]
    assert omega_rank(result.M) == 0
    assert is_minimal(result)
    assert result.certificates["stripped"]["approximation"] >= 0


def test_stripping_a_minimal_result_removes_nothing(a1_m):
    result = mcm_approximation(a1_m)
    again = strip_common_omega(result)
    assert again.minimal
    assert again.certificates["stripped"] == {"approximation": 0, "hull": 0}
    assert betti_table(again.M, 2) == betti_table(result.M, 2)


def test_strip_removes_a_padded_omega_summand(a1, a1_m):
    result = mcm_approximation(a1_m)
    omega = canonical_module(a1).module
    L = direct_sum(result.L, omega)
    M = direct_sum(result.M, omega)
    left = ModuleMap(
        L.module,
        M.module,
        M.injections[0].compose(result.approximation.left).columns + M.injections[1].columns,
    )
    right = result.approximation.right.compose(M.projections[0])
    padded = ApproximationResult(result.N, ShortExactSequence(left, right), result.hull, result.route)
    assert padded.approximation.certify()["exact"]
    assert not is_minimal(padded)
    stripped = strip_common_omega(padded)
    assert stripped.certificates["stripped"]["approximation"] == 1
    assert betti_table(stripped.M, 2) == betti_table(result.M, 2)
    assert stripped.approximation.certify()["exact"]


@pytest.mark.parametrize("ring_name", ["plane", "a1"])
def test_finite_injective_dimension_input_has_zero_hull_cokernel(request, ring_name):
    ring = request.getfixturevalue(ring_name)
    # y is a nonzerodivisor, so A/(y) has projective dimension 1
    N = GradedModule.quotient_ring(ring, [{ring.poly_ring.variable(1): 1}], name="A/(y)")
    result = mcm_approximation(N)
    assert result.M_hull.is_zero()
    assert find_isomorphism(result.L_hull, N).isomorphic


def test_mcm_input_is_its_own_approximation(a1_m1):
    result = mcm_approximation(a1_m1)
    assert result.L.is_zero()
    assert result.M.mu == 2
    assert is_mcm(result.M_hull)


def test_zero_module(a1):
    result = mcm_approximation(GradedModule.zero(a1))
    assert result.M.rank == 0
    assert result.minimal


def test_approximation_is_orthogonal_to_omega(a1, a1_m):
    result = mcm_approximation(a1_m)
    omega = canonical_module(a1).module
    for i in range(1, a1.dim + 2):
        assert ext_module(result.M, omega, i).is_zero()


def test_hull_is_orthogonal_to_mcm_modules(a1, a1_m, a1_m1):
    result = mcm_approximation(a1_m)
    for i in range(1, a1.dim + 2):
        assert ext_module(a1_m1, result.L_hull, i).is_zero()


def test_summary_reports_generator_counts(a1_m):
    summary = mcm_approximation(a1_m).summary()
    assert summary["route"] == "inductive"
    assert set(summary["mu"]) == {"L", "M", "L_hull", "M_hull"}


# ---------------------------------------------------------------------------
# gamma of A/m^n and the index
# ---------------------------------------------------------------------------
def test_power_of_maximal_ideal_generators(a1):
    assert len(power_of_maximal_ideal(a1, 2)) == 6


@pytest.mark.parametrize("ring_name", ["plane", "a1"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gamma_of_truncations_is_at_most_one(request, ring_name, n):
    ring = request.getfixturevalue(ring_name)
    N = GradedModule.quotient_ring(ring, power_of_maximal_ideal(ring, n))
    assert gamma(N) in (0, 1)


def test_ding_index(plane, a1):
    assert ding_index(plane)[0] == 1
    index, values = ding_index(a1)
    assert index == 2
    assert values == {1: 0, 2: 1}


def test_index_needs_gorenstein_ring(cubic):
    with pytest.raises(NotGorenstein):
        ding_index(cubic)


# ---------------------------------------------------------------------------
# The rational normal cubic
# ---------------------------------------------------------------------------
@pytest.mark.slow
def test_approximation_of_residue_field_over_cubic(cubic, cubic_k):
    result = mcm_approximation(cubic_k)
    assert result.certify(fid=False)["approximation"]["exact"]
    M = result.M.pruned()
    beta1 = betti_table(cubic_k, 1).total(1)
    assert beta1 - 1 == 3
    assert M.rank == canonical_module(cubic).cm_type * beta1 + 1 == 9
    assert ext_total_dim(M, M, 1) == 18
    abc = [{cubic.poly_ring.variable(i): 1} for i in range(3)]
    target = direct_power(GradedModule.ideal(cubic, abc, name="M2").shift(-1), 3)
    assert betti_table(M, 3) == betti_table(target, 3)
    assert find_isomorphism(M, target).isomorphic
