"""
Degree-wise oracles built from monomial lists and rank computations only.

Nothing here touches Gröbner bases, so agreement with the library is an
independent check.
"""

import numpy as np

from services.complexes import BettiTable
from services.modules import GradedModule
from utils import modp


def _span_rank(vectors: list[dict], basis: list[tuple], p: int) -> int:
    if not vectors or not basis:
        return 0
    index = {b: i for i, b in enumerate(basis)}
    mat = np.zeros((len(vectors), len(basis)), dtype=np.int64)
    for r, v in enumerate(vectors):
        for term, c in v.items():
            mat[r, index[term]] = (mat[r, index[term]] + c) % p
    return modp.rank(mat, p)


def piece_dimension(M: GradedModule, d: int) -> int:
    """dim_k M_d from F_d modulo (relations + I F) in degree d."""
    ring = M.ring
    pr = ring.poly_ring
    p = ring.p
    basis = [(k, m) for k, a in enumerate(M.degrees) for m in pr.monomials_of_degree(d - a)]
    spanning = []
    for rho in M.relations:
        delta = M.free.vector_degree(rho)
        for mu in pr.monomials_of_degree(d - delta):
            spanning.append({(k, tuple(x + y for x, y in zip(m, mu))): c for (k, m), c in rho.items()})
    for h in ring.ideal_generators:
        e = pr.poly_degree(h)
        for k, a in enumerate(M.degrees):
            for mu in pr.monomials_of_degree(d - a - e):
                spanning.append({(k, tuple(x + y for x, y in zip(m, mu))): c for m, c in h.items()})
    return len(basis) - _span_rank(spanning, basis, p)


def ring_hilbert_function(M: GradedModule, d: int) -> int:
    return piece_dimension(GradedModule.free_module(M.ring), d)


def generators_in_degree(M: GradedModule, d: int) -> int:
    """dim_k (M / mM)_d: generators of degree d minus the rank of the constant parts of degree-d relations."""
    p = M.ring.p
    one = M.ring.poly_ring.one
    gens = [k for k, a in enumerate(M.degrees) if a == d]
    constant_parts = []
    for rho in M.relations:
        if M.free.vector_degree(rho) == d:
            constant_parts.append({(k, m): c for (k, m), c in rho.items() if m == one})
    return len(gens) - _span_rank(constant_parts, [(k, one) for k in gens], p)


def hilbert_from_betti(M: GradedModule, table: BettiTable, d: int) -> int:
    """sum_i (-1)^i sum_j beta_ij dim A_{d-j}; equals dim M_d when the table reaches past d."""
    total = 0
    for (i, j), c in table.entries.items():
        total += (-1) ** i * c * ring_hilbert_function(M, d - j)
    return total
