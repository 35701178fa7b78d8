"""
Canonical modules and the omega side of duality.

omega_A is Ext^c_P(A, P(-n)) for the ambient polynomial ring P, c = codim A and
n = sum of the variable weights; it is read off the last map of the minimal
P-resolution of A. Depth questions go through projective dimension over P.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from core.config import settings
from core.errors import CertificationError, NotCodepthPure, NotCohenMacaulay, NotFID
from services.algebra import FreeModule, GradedRing
from services.complexes import ext_module, free_resolution
from services.modules import (
    GradedModule,
    HomModule,
    ModuleMap,
    direct_sum,
    hom_module,
    hom_piece,
    map_coordinates,
    tensor_modules,
)
from services.polynomials import reindex
from utils import modp

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Projective dimension over the ambient polynomial ring
# ---------------------------------------------------------------------------
def over_ambient(M: GradedModule) -> GradedModule:
    """M as a module over P: the relations of M together with I times every generator."""
    ring = M.ring
    ambient = ring.ambient
    rels = list(M.relations)
    for k in range(M.rank):
        for h in ring.ideal_basis:
            rels.append({(k, m): c for m, c in h.items()})
    return GradedModule(FreeModule(ambient, M.degrees), rels)


def ambient_projective_dimension(M: GradedModule) -> int:
    """pd_P(M); -1 for the zero module."""
    cached = M.__dict__.get("_pd_ambient")
    if cached is not None:
        return cached
    if M.is_zero():
        pd = -1
    else:
        res = free_resolution(over_ambient(M), M.ring.nvars + 1)
        pd = res.projective_dimension()
        if pd is None:
            raise CertificationError("Resolution over the polynomial ring did not terminate")
    M.__dict__["_pd_ambient"] = pd
    return pd


def depth(M: GradedModule) -> int:
    """Auslander-Buchsbaum over P: depth M = nvars - pd_P(M)."""
    return M.ring.nvars - ambient_projective_dimension(M)


def codepth(M: GradedModule) -> int:
    return M.ring.dim - depth(M)


def is_cohen_macaulay(ring: GradedRing) -> bool:
    return ambient_projective_dimension(GradedModule.free_module(ring)) == ring.codim


def is_mcm(M: GradedModule) -> bool:
    if M.is_zero():
        logger.warning("is_mcm called on the zero module; reporting it as MCM")
        return True
    return ambient_projective_dimension(M) == M.ring.codim


# ---------------------------------------------------------------------------
# Canonical module
# ---------------------------------------------------------------------------
@dataclass
class CanonicalModule:
    ring: GradedRing
    module: GradedModule
    codim: int
    certificate: dict = field(default_factory=dict)
    twist_convention: str = "omega = Ext^c_P(A, P(-n)), n = sum of weights"

    @property
    def cm_type(self) -> int:
        return self.module.rank

    @property
    def is_gorenstein(self) -> bool:
        return self.module.rank == 1 and not self.module.relations

    def twist(self, e: int) -> GradedModule:
        """omega(e)."""
        return self.module.shift(-e)

    def to_dict(self) -> dict:
        return {
            "rank": 1,
            "mu": self.module.rank,
            "free": self.is_gorenstein,
            "twists": list(self.module.free.twists),
            "presentation": self.module.presentation().to_strings(),
            "cm_type": self.cm_type,
            "gorenstein": self.is_gorenstein,
            "convention": self.twist_convention,
        }


def canonical_module(ring: GradedRing) -> CanonicalModule:
    cached = ring.__dict__.get("_canonical")
    if cached is not None:
        return cached
    A = GradedModule.free_module(ring)
    res = free_resolution(over_ambient(A), ring.nvars + 1)
    pd = res.projective_dimension()
    c = ring.codim
    if pd != c:
        raise NotCohenMacaulay(f"Ring {ring} is not Cohen-Macaulay: pd_P(A) = {pd}, codim = {c}")
    n = ring.weight_sum
    last = res.free(c)
    degrees = tuple(n - a for a in last.degrees)
    rels = res.differential(c).transpose().columns if c > 0 else []
    omega = GradedModule(FreeModule(ring, degrees), rels, name="omega").pruned()
    omega.name = "omega"
    canon = CanonicalModule(ring, omega, c, {"pd_P": pd, "ext_vanishing": True})
    ring.__dict__["_canonical"] = canon
    logger.info(f"Canonical module of {ring}: mu = {omega.rank}, twists {list(omega.free.twists)}")
    return canon


def cm_type(ring: GradedRing) -> int:
    return canonical_module(ring).cm_type


def dual_into_omega(M: GradedModule, codepth_value: int | None = None) -> GradedModule:
    """M^v = Ext^{c'}_A(M, omega), after checking every other Ext^i(M, omega) vanishes."""
    ring = M.ring
    omega = canonical_module(ring).module
    c = codepth(M) if codepth_value is None else codepth_value
    for i in range(ring.dim + 1):
        if i == c:
            continue
        if not ext_module(M, omega, i).is_zero():
            raise NotCodepthPure(f"Ext^{i}(M, omega) is nonzero; M is not Cohen-Macaulay of codepth {c}")
    dual = ext_module(M, omega, c)
    dual.name = f"{M.name}^v" if M.name else None
    return dual


def hom_into_omega(M: GradedModule) -> HomModule:
    return hom_module(M, canonical_module(M.ring).module)


# ---------------------------------------------------------------------------
# End(omega) = A: reading maps omega -> omega as ring elements
# ---------------------------------------------------------------------------
def omega_multiplier(phi: ModuleMap) -> dict:
    """The a in A with phi = a * id for phi: omega -> omega (any degree)."""
    omega = phi.source
    ring = omega.ring
    p = ring.p
    delta = phi.degree
    monos = ring.standard_monomials(delta) if delta >= 0 else ()
    target = map_coordinates(phi)
    if not monos:
        if np.any(np.mod(target, p)):
            raise CertificationError("Map omega -> omega is not multiplication by a ring element")
        return {}
    cols = []
    for m in monos:
        mult = ModuleMap(omega, phi.target, [{(k, m): 1} for k in range(omega.rank)], delta)
        cols.append(map_coordinates(mult))
    system = np.stack(cols, axis=1)
    x = modp.solve(system, target, p)
    if x is None:
        raise CertificationError("Map omega -> omega is not multiplication by a ring element")
    return {m: int(v) % p for m, v in zip(monos, x) if int(v) % p}


def omega_scalar(phi: ModuleMap) -> int:
    """The scalar c with phi = c * id for a degree-0 endomorphism of the pruned omega."""
    if phi.degree != 0:
        return omega_multiplier(phi).get(phi.source.ring.poly_ring.one, 0)
    one = phi.source.ring.poly_ring.one
    return phi.target.normal_form(phi.columns[0]).get((0, one), 0)


# ---------------------------------------------------------------------------
# omega-rank
# ---------------------------------------------------------------------------
def omega_pairing(V: GradedModule, U: GradedModule | None = None, u: ModuleMap | None = None):
    """Yield (e, F, G, matrix) for the pairings Hom(V, omega)_e x Hom(omega, U)_{-e} -> k through u: U -> V."""
    omega = canonical_module(V.ring).module
    U = V if U is None else U
    lo = min(omega.degrees) - max(V.degrees, default=0)
    hi = max(omega.degrees) - min(U.degrees, default=0)
    if V.rank == 0 or U.rank == 0:
        return
    p = V.ring.p
    for e in range(lo, hi + 1):
        F = hom_piece(V, omega, e)
        if not F:
            continue
        G = hom_piece(omega, U, -e)
        if not G:
            continue
        mat = np.zeros((len(F), len(G)), dtype=np.int64)
        for i, f in enumerate(F):
            fu = f.compose(u) if u is not None else f
            for j, g in enumerate(G):
                mat[i, j] = omega_scalar(fu.compose(g)) % p
        yield e, F, G, mat


def omega_rank(M: GradedModule) -> int:
    """Number of omega(e) summands of M, summed over all twists e."""
    M = M.pruned()
    if M.rank == 0:
        return 0
    p = M.ring.p
    total = 0
    for e, _, _, mat in omega_pairing(M):
        r = modp.rank(mat, p)
        if r:
            logger.debug(f"omega-rank contribution {r} in degree {e}")
        total += r
    if settings.omega_rank_crosscheck:
        greedy = omega_rank_greedy(M)
        if greedy != total:
            logger.warning(f"omega-rank disagreement: pairing {total}, greedy {greedy}")
    return total


def split_omega_summand(M: GradedModule):
    """One (f, g) with f . g = unit on omega, or None."""
    for _, F, G, mat in omega_pairing(M):
        nz = np.argwhere(mat)
        if nz.size:
            i, j = nz[0]
            return F[int(i)], G[int(j)]
    return None


def omega_rank_greedy(M: GradedModule) -> int:
    """Split off omega summands one at a time by kernels of split surjections."""
    count = 0
    current = M.pruned()
    while current.rank:
        pair = split_omega_summand(current)
        if pair is None:
            break
        f, _ = pair
        current = f.kernel()[0].pruned()
        count += 1
    return count


# ---------------------------------------------------------------------------
# AB2 embedding into sums of omega and the sharp transport
# ---------------------------------------------------------------------------
@dataclass
class OmegaEmbedding:
    """0 -> X -> W -> X' -> 0 with W a sum of twisted copies of omega."""

    embedding: ModuleMap  # X -> W
    projection: ModuleMap  # W -> X'

    @property
    def cover(self) -> GradedModule:
        return self.embedding.target

    @property
    def cokernel(self) -> GradedModule:
        return self.projection.target


def ab2_embedding(X: GradedModule) -> OmegaEmbedding:
    """X -> sum of omega(e_j) given by a minimal generating set f_j of Hom(X, omega)."""
    ring = X.ring
    if X.rank == 0:
        zero = GradedModule.zero(ring)
        return OmegaEmbedding(ModuleMap(X, zero, [{} for _ in range(X.rank)]), ModuleMap.zero(zero, zero))
    canon = canonical_module(ring)
    gens = hom_module(X, canon.module).generator_maps()
    if not gens:
        raise CertificationError("Hom(X, omega) vanishes for a nonzero module")
    pieces = [canon.twist(f.degree) for f in gens]
    W = direct_sum(*pieces).module
    offsets = np.cumsum([0] + [w.rank for w in pieces]).tolist()
    cols = []
    for i in range(X.rank):
        col: dict = {}
        for f, off in zip(gens, offsets):
            col.update(reindex(f.columns[i], lambda k, off=off: k + off))
        cols.append(col)
    iota = ModuleMap(X, W, cols)
    coker, proj = iota.cokernel()
    return OmegaEmbedding(iota, proj)


@dataclass
class TransportResult:
    """Q = Hom(omega, L) with the evaluation Q (x) omega -> L and its certificates."""

    L: GradedModule
    Q: GradedModule
    projective_dimension: int | None
    evaluation: ModuleMap
    evaluation_is_isomorphism: bool

    @property
    def certified(self) -> bool:
        return self.projective_dimension is not None and self.evaluation_is_isomorphism

    def to_dict(self) -> dict:
        return {
            "pd": self.projective_dimension,
            "evaluation_isomorphism": self.evaluation_is_isomorphism,
            "Q": self.Q.to_dict(),
        }


def sharp_transport(L: GradedModule, strict: bool = True) -> TransportResult:
    ring = L.ring
    omega = canonical_module(ring).module
    hom = hom_module(omega, L)
    Q = hom.module
    res = free_resolution(Q, ring.dim + 1)
    pd = res.projective_dimension()
    QW = tensor_modules(Q, omega)
    q = omega.rank
    maps = hom.generator_maps()
    cols = []
    for i in range(Q.rank):
        for k in range(q):
            cols.append(maps[i].columns[k])
    ev = ModuleMap(QW, L, cols)
    ok = ev.is_well_defined() and ev.is_isomorphism()
    result = TransportResult(L, Q, pd, ev, ok)
    if strict and not result.certified:
        raise NotFID(f"No finite omega-resolution certificate (pd = {pd}, evaluation iso = {ok})")
    logger.debug(f"Sharp transport: pd(Q) = {pd}, evaluation iso = {ok}")
    return result
