"""
Representing complexes D = S (x) omega and the invariants read from them.

Every term of D is a sum of twisted copies of omega, so D is stored through
its skeleton S, a complex of free modules whose matrices carry the entries of
End(omega) = A. H^0(D) = N; ker d^0 is the MCM approximation of N and
coker d^{-1} its FID hull.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

from core.config import settings
from services.approximation import ApproximationResult, ShortExactSequence, mcm_approximation, prune_result
from services.algebra import FreeModule
from services.canonical import canonical_module, omega_multiplier, omega_rank
from services.complexes import (
    BettiTable,
    ChainComplex,
    betti_table,
    ext_module,
    find_isomorphism,
    free_resolution,
    minimalize_complex,
)
from services.modules import (
    GradedModule,
    Matrix,
    ModuleMap,
    hom_free_map,
    hom_free_presentation,
    hom_module,
    minimal_generators,
    subquotient,
    tensor_free,
    tensor_matrix,
)
from services.polynomials import reindex, vadd_into

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Representing complex
# ---------------------------------------------------------------------------
@dataclass
class RepresentingComplex:
    N: GradedModule
    skeleton: ChainComplex  # free, minimal
    window: int
    route: str
    approximation: ApproximationResult | None = None

    @cached_property
    def omega(self) -> GradedModule:
        return canonical_module(self.N.ring).module

    @cached_property
    def complex(self) -> ChainComplex:
        """D = S (x) omega over the computed range."""
        omega = self.omega
        S = self.skeleton
        terms = {i: tensor_free(omega, S.term(i).free) for i in S.terms}
        diffs = {}
        for i, d in S.differentials.items():
            diffs[i] = tensor_matrix(d.matrix, omega, terms[i], terms[i + 1])
        return ChainComplex(S.ring, terms, diffs)

    def multiplicity(self, i: int) -> int:
        """d^i: number of omega summands of D^i."""
        return self.skeleton.rank(i)

    def multiplicities(self) -> dict[int, int]:
        return {i: self.multiplicity(i) for i in range(-self.window, self.window + 1)}

    def cosyzygy(self, i: int) -> GradedModule:
        """coker(D^{-i-1} -> D^{-i}); i = 0 gives L'."""
        D = self.complex
        term = D.term(-i)
        rels = list(term.relations)
        if -i - 1 in D.terms:
            rels += [c for c in D.differential(-i - 1).columns if c]
        return GradedModule(term.free, rels)

    @cached_property
    def read_approximation(self) -> ApproximationResult:
        """Split D at 0: M = ker d^0, L = im d^{-1}, L' = coker d^{-1}, M' = D^0 / M."""
        D = self.complex
        T0 = D.term(0)
        if 1 in D.terms:
            Z = [z for z in D.differential(0).kernel_generators() if T0.normal_form(z)]
        else:
            Z = [T0.free.basis_vector(k) for k in range(T0.rank)]
        Z = minimal_generators(Z, T0.free, T0.relations)
        B = [c for c in D.differential(-1).columns if c] if -1 in D.terms else []
        M = subquotient(Z, T0.relations, T0.free)
        L = subquotient(B, T0.relations, T0.free)
        incl_M = ModuleMap(M, T0, Z)
        u = ModuleMap(L, T0, B).lift_through(incl_M)
        N2, pi = u.cokernel()
        L_hull = GradedModule(T0.free, list(T0.relations) + B)
        M_hull = GradedModule(T0.free, list(T0.relations) + Z)
        h = ModuleMap(L_hull, M_hull, [T0.free.basis_vector(k) for k in range(T0.rank)])
        j = ModuleMap(N2, L_hull, Z)
        result = ApproximationResult(N2, ShortExactSequence(u, pi), ShortExactSequence(j, h), self.route, minimal=True)
        return prune_result(result)

    def verify(self, iso: bool = True) -> dict:
        """H^0 = N and H^i = 0 for the other positions strictly inside the computed range."""
        D = self.complex
        flags = {"is_complex": D.is_complex()}
        vanishing = {}
        for i in range(max(D.lo + 1, -self.window), min(D.hi, self.window + 1)):
            if i != 0:
                vanishing[i] = D.homology(i).is_zero()
        flags["higher_cohomology_vanishes"] = all(vanishing.values())
        if iso:
            flags["H0_isomorphism"] = find_isomorphism(D.homology(0), self.N).status
        return flags

    def to_dict(self) -> dict:
        S = self.skeleton
        return {
            "window": self.window,
            "route": self.route,
            "multiplicities": {str(i): v for i, v in self.multiplicities().items()},
            "terms": {
                str(i): list(S.term(i).free.twists)
                for i in range(-self.window, self.window + 1)
                if i in S.terms
            },
            "differentials": {
                str(i): S.differential(i).matrix.to_strings()
                for i in range(-self.window, self.window)
                if i in S.differentials
            },
        }


def _reach(window: int) -> int:
    return window + settings.minimalize_margin


def _default_window(N: GradedModule, window: int | None) -> int:
    return N.ring.dim + settings.window_extra if window is None else window


def _finish(N: GradedModule, frees: dict, mats: dict, window: int, route: str, approximation=None) -> RepresentingComplex:
    S = ChainComplex.from_free(N.ring, frees, mats)
    minimal = minimalize_complex(S).complex
    logger.info(f"Representing complex ({route}): {minimal}")
    return RepresentingComplex(N, minimal, window, route, approximation)


def representing_complex(N: GradedModule, window: int | None = None, result: ApproximationResult | None = None) -> RepresentingComplex:
    """Splice the omega-resolution of L' (through Q = Hom(omega, L')) and the omega-coresolution of M'."""
    ring = N.ring
    window = _default_window(N, window)
    reach = _reach(window)
    omega = canonical_module(ring).module
    if result is None:
        result = mcm_approximation(N)
    hom_L = hom_module(omega, result.L_hull)
    hom_M = hom_module(result.M_hull, omega)
    res_Q = free_resolution(hom_L.module, reach)
    res_R = free_resolution(hom_M.module, reach)

    frees: dict = {}
    mats: dict = {}
    for k in range(0, min(reach, res_Q.length) + 1):
        frees[-k] = res_Q.free(k)
        if k >= 1:
            mats[-k] = res_Q.differential(k)
    for j in range(1, min(reach, res_R.length + 1) + 1):
        frees[j] = res_R.free(j - 1).dual()
        if j + 1 <= reach and j <= res_R.length:
            mats[j] = res_R.differential(j).transpose()

    if 0 in frees and 1 in frees:
        qs = hom_L.generator_maps()
        gammas = hom_M.generator_maps()
        h = result.hull.right
        entries = {}
        for a, q in enumerate(qs):
            composite = h.compose(q)
            for b, g in enumerate(gammas):
                value = omega_multiplier(g.compose(composite))
                if value:
                    entries[(b, a)] = value
        mats[0] = Matrix.from_entries(frees[0], frees[1], entries)
    return _finish(N, frees, mats, window, "inductive", result)


# ---------------------------------------------------------------------------
# Dual route
# ---------------------------------------------------------------------------
def _pure_skeleton(dual: GradedModule, n: int, reach: int) -> tuple[dict, dict]:
    """S^j = F_{j+n}^* for a free resolution F of N^v = Ext^n(N, omega)."""
    res = free_resolution(dual, n + reach + 1)
    frees, mats = {}, {}
    for j in range(-n, reach + 1):
        k = j + n
        if k > res.length:
            break
        frees[j] = res.free(k).dual()
        if k + 1 <= res.length and j + 1 <= reach:
            mats[j] = res.differential(k + 1).transpose()
    return frees, mats


def _cone_skeleton(N: GradedModule, reach: int) -> tuple[dict, dict]:
    """Free resolution G of the truncated complex Hom(F(N), omega), dualized."""
    ring = N.ring
    p = ring.p
    d = ring.dim
    omega = canonical_module(ring).module
    res = free_resolution(N, d + 1)
    C = {k: hom_free_presentation(res.free(k), omega) for k in range(d + 2)}
    dC = {k: hom_free_map(res.differential(k + 1), omega, C[k], C[k + 1]) for k in range(d + 1)}
    # truncate: C^d becomes the cocycles of Hom(F_d, omega)
    cocycles = [z for z in dC[d].kernel_generators() if C[d].normal_form(z)]
    Zd = subquotient(cocycles, C[d].relations, C[d].free)
    incl = ModuleMap(Zd, C[d], cocycles)
    if d >= 1:
        dC[d - 1] = dC[d - 1].lift_through(incl)
    C[d] = Zd
    del C[d + 1]
    del dC[d]

    G: dict[int, object] = {}
    dG: dict[int, list] = {}
    eps: dict[int, list] = {}
    zero_term = GradedModule.zero(ring)
    t = d
    while t >= -reach:
        Gnext = G.get(t + 1)
        rank_next = Gnext.rank if Gnext is not None else 0
        Ct = C.get(t, zero_term)
        degrees = (Gnext.degrees if Gnext is not None else ()) + Ct.degrees
        rels = [reindex(v, lambda k: k + rank_next) for v in Ct.relations]
        cone = GradedModule(FreeModule(ring, degrees), rels)
        # target of the cone differential: G^{t+2} + C^{t+1}
        Gnn = G.get(t + 2)
        rank_nn = Gnn.rank if Gnn is not None else 0
        Cn = C.get(t + 1, zero_term)
        cols = []
        for j in range(rank_next):
            col: dict = {}
            if t + 1 in dG:
                vadd_into(col, dG[t + 1][j], p, -1)
            if t + 1 in eps:
                vadd_into(col, reindex(eps[t + 1][j], lambda k: k + rank_nn), p)
            cols.append(col)
        for j in range(Ct.rank):
            cols.append(reindex(dC[t].columns[j], lambda k: k + rank_nn) if t in dC else {})
        if rank_nn + Cn.rank:
            target_degrees = (Gnn.degrees if Gnn is not None else ()) + Cn.degrees
            target_rels = [reindex(v, lambda k: k + rank_nn) for v in Cn.relations]
            target = GradedModule(FreeModule(ring, target_degrees), target_rels)
            cycles = ModuleMap(cone, target, cols).kernel_generators()
        else:
            cycles = [cone.free.basis_vector(k) for k in range(cone.rank)]
        cycles = minimal_generators([z for z in cycles if cone.normal_form(z)], cone.free, cone.relations)
        if not cycles:
            break
        Gt = GradedModule(FreeModule(ring, tuple(cone.free.vector_degree(z) for z in cycles)))
        G[t] = Gt
        dG[t] = [{(k, m): (-c) % p for (k, m), c in z.items() if k < rank_next} for z in cycles]
        eps[t] = [{(k - rank_next, m): c for (k, m), c in z.items() if k >= rank_next} for z in cycles]
        logger.debug(f"Cone resolution term {t}: rank {Gt.rank}")
        t -= 1

    frees = {t: g.free for t, g in G.items()}
    mats = {t: Matrix(frees[t], frees[t + 1], dG[t]) for t in dG if t + 1 in frees}
    dual = ChainComplex.from_free(ring, frees, mats).dual()
    return dual.free_data()


def mcm_approximation_dual_route(N: GradedModule, window: int | None = None) -> tuple[ApproximationResult, RepresentingComplex]:
    ring = N.ring
    N = N.pruned()
    window = _default_window(N, window)
    reach = _reach(window)
    omega = canonical_module(ring).module
    nonzero = [i for i in range(ring.dim + 1) if not ext_module(N, omega, i).is_zero()]
    if len(nonzero) == 1:
        n = nonzero[0]
        logger.info(f"Dual route: Cohen-Macaulay input of codepth {n}")
        frees, mats = _pure_skeleton(ext_module(N, omega, n), n, reach)
    else:
        logger.info(f"Dual route: Ext into omega nonzero in degrees {nonzero}, resolving the dual complex")
        frees, mats = _cone_skeleton(N, reach)
    rc = _finish(N, frees, mats, window, "dual")
    result = rc.read_approximation
    rc.approximation = result
    return result, rc


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------
@dataclass
class InvariantTable:
    window: int
    gamma: int
    nu: dict[int, int]
    d: dict[int, int]
    mcm_betti: list[int]
    fid_betti: list[int]
    crosscheck: dict = field(default_factory=dict)

    def rows(self) -> list[str]:
        out = [f"gamma = {self.gamma}"]
        out.append("nu:  " + "  ".join(f"nu_{i}={v}" for i, v in sorted(self.nu.items())))
        out.append("d:   " + "  ".join(f"d^{i}={v}" for i, v in sorted(self.d.items())))
        out.append("MCM beta: " + " ".join(str(b) for b in self.mcm_betti))
        out.append("FID beta: " + " ".join(str(b) for b in self.fid_betti))
        return out

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "gamma": self.gamma,
            "nu": {str(i): v for i, v in sorted(self.nu.items())},
            "d": {str(i): v for i, v in sorted(self.d.items())},
            "mcm_betti": list(self.mcm_betti),
            "fid_betti": list(self.fid_betti),
            "crosscheck": self.crosscheck,
        }


def _betti_totals(M: GradedModule, length: int) -> list[int]:
    if M.is_zero():
        return [0] * (length + 1)
    table: BettiTable = betti_table(M, length)
    return [table.total(i) for i in range(length + 1)]


def invariants(
    N: GradedModule,
    window: int | None = None,
    rc: RepresentingComplex | None = None,
    crosscheck: bool = True,
) -> InvariantTable:
    window = _default_window(N, window)
    if rc is None:
        rc = representing_complex(N, window)
    result = rc.approximation or rc.read_approximation
    nu = {i: omega_rank(rc.cosyzygy(i)) for i in range(window + 1)}
    table = InvariantTable(
        window=window,
        gamma=omega_rank(result.M),
        nu=nu,
        d=rc.multiplicities(),
        mcm_betti=_betti_totals(result.M, window),
        fid_betti=_betti_totals(result.L, window),
    )
    if crosscheck:
        omega = canonical_module(N.ring).module
        Q = hom_module(omega, result.L_hull).module
        Mv = hom_module(result.M, omega).module
        q_betti = _betti_totals(Q, window)
        m_betti = _betti_totals(Mv, window)
        table.crosscheck = {
            "negative_matches_hom_omega_L_hull": all(table.d[-i] == q_betti[i] for i in range(window + 1)),
            "positive_matches_dual_of_M": all(table.d[i] == m_betti[i] for i in range(window + 1)),
        }
        if not all(table.crosscheck.values()):
            logger.warning(f"Invariant cross-check failed: {table.crosscheck}")
    logger.info(f"Invariants: gamma = {table.gamma}, d^0 = {table.d.get(0)}, nu_0 = {nu.get(0)}")
    return table
