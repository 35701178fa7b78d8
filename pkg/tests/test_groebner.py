import pytest

from core.errors import InhomogeneousInput
from services.algebra import FreeModule
from services.groebner import GroebnerBasis, buchberger, ideal_basis, syzygy_module
from services.modules import syzygies
from services.polynomials import PolynomialRing, padd, pmul


def test_twisted_cubic_basis_is_the_minors(cubic):
    assert len(cubic.ideal_basis) == 3
    P = cubic.poly_ring
    leads = sorted(P.leading_monomial(g) for g in cubic.ideal_basis)
    assert leads == sorted([(0, 2, 0, 0), (0, 1, 1, 0), (0, 0, 2, 0)])


def test_basis_grows_when_needed():
    P = PolynomialRing(["x", "y", "z"])
    basis = ideal_basis([P.parse("x*y - z^2"), P.parse("y^2 - x*z")], P)
    # y*z^2 - x^2*z ... the S-pair gives a cubic
    assert len(basis) == 3
    assert any(P.poly_degree(g) == 3 for g in basis)


def test_inhomogeneous_generators_rejected():
    P = PolynomialRing(["x", "y"])
    with pytest.raises(InhomogeneousInput):
        ideal_basis([P.parse("x^2 + y")], P)


@pytest.mark.parametrize("ring_name", ["plane", "a1", "a2", "cubic"])
def test_s_pair_closure_on_fixture_rings(request, ring_name):
    ring = request.getfixturevalue(ring_name)
    vectors = [{(0, m): c for m, c in g.items()} for g in ring.ideal_generators]
    gb = GroebnerBasis(ring.poly_ring, (0,))
    gb.add_generators(vectors)
    gb.complete()
    assert gb.verify_closure()


def test_s_pair_closure_on_module_presentations(a1_m1, a1_m, cubic_k):
    for M in (a1_m1, a1_m, cubic_k):
        assert M.gb.verify_closure()


def test_normal_form_is_canonical(a1):
    gb = GroebnerBasis(a1.poly_ring, (0,), a1.ideal_basis)
    P = a1.poly_ring
    f = P.parse("x^3 + x*y*z")
    g = P.parse("2*x*y*z")
    assert gb.normal_form({(0, m): c for m, c in f.items()}) == gb.normal_form({(0, m): c for m, c in g.items()})


def test_normal_form_is_idempotent(a1):
    gb = GroebnerBasis(a1.poly_ring, (0,), a1.ideal_basis)
    P = a1.poly_ring
    for text in ("x^3 + x*y*z", "x*y^2 + 3*z^3", "x^2*y*z + y^4"):
        f = {(0, m): c for m, c in P.parse(text).items()}
        once = gb.normal_form(f)
        assert gb.normal_form(once) == once


def test_module_basis_and_lift(plane):
    P = plane.poly_ring
    u, v = P.variable(0), P.variable(1)
    gens = [{(0, u): 1}, {(0, v): 1}]
    gb = GroebnerBasis(P, (0,), track=True)
    gb.add_generators(gens)
    gb.complete()
    target = {(0, (1, 1)): 1, (0, (2, 0)): 3}
    coeffs = gb.lift(target)
    assert coeffs is not None
    total: dict = {}
    for (i, m), c in coeffs.items():
        total = padd(total, pmul({m: c}, {mono: coeff for (_, mono), coeff in gens[i].items()}, P.p), P.p)
    assert total == {m: c for (_, m), c in target.items()}
    assert gb.lift({(0, (0, 0)): 1}) is None


def test_buchberger_reduced_output():
    P = PolynomialRing(["x", "y"])
    basis = buchberger([{(0, (1, 0)): 1}, {(0, (1, 0)): 2, (0, (0, 1)): 1}], P)
    leads = sorted(P.leading_monomial({m: c for (_, m), c in g.items()}) for g in basis)
    assert leads == [(0, 1), (1, 0)]


def _combine(s: dict, polys: list[dict], p: int) -> dict:
    acc: dict = {}
    for (i, m), c in s.items():
        acc = padd(acc, pmul({m: c}, polys[i], p), p)
    return acc


def test_koszul_syzygy(plane):
    P = plane.poly_ring
    u, v = P.variable(0), P.variable(1)
    cols = [{(0, u): 1}, {(0, v): 1}]
    syz = syzygies(cols, FreeModule(plane, (0,)), (1, 1))
    assert len(syz) == 1
    assert _combine(syz[0], [{u: 1}, {v: 1}], P.p) == {}
    assert FreeModule(plane, (1, 1)).vector_degree(syz[0]) == 2


def test_raw_syzygies_annihilate(a1):
    P = a1.poly_ring
    gens = [{(0, P.variable(i)): 1} for i in range(3)]
    polys = [{P.variable(i): 1} for i in range(3)]
    found = syzygy_module(gens, P, (0,), a1.ideal_basis, (1, 1, 1))
    assert found
    for s in found:
        assert a1.reduce(_combine(s, polys, P.p)) == {}
