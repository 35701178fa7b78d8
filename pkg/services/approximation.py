"""
MCM approximations 0 -> L -> M -> N -> 0 and FID hulls 0 -> N -> L' -> M' -> 0.

The inductive route resolves N until a syzygy is MCM, takes the omega
embedding of that syzygy as its hull and walks back up: the pushout of the
hull along the syzygy inclusion into a free module gives the approximation
one step up, and the pushout of the omega embedding of M along M -> N gives
the hull. Common omega summands are stripped afterwards.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from core.config import settings
from core.errors import CertificationError, NotGorenstein
from services.algebra import GradedRing
from services.canonical import (
    ab2_embedding,
    canonical_module,
    is_mcm,
    omega_pairing,
    omega_rank,
    sharp_transport,
)
from services.complexes import free_resolution
from services.groebner import GroebnerBasis
from services.modules import GradedModule, ModuleMap, pushout

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Short exact sequences
# ---------------------------------------------------------------------------
@dataclass
class ShortExactSequence:
    """0 -> first -> middle -> last -> 0 given by left: first -> middle and right: middle -> last."""

    left: ModuleMap
    right: ModuleMap

    @property
    def first(self) -> GradedModule:
        return self.left.source

    @property
    def middle(self) -> GradedModule:
        return self.left.target

    @property
    def last(self) -> GradedModule:
        return self.right.target

    def _middle_exact(self) -> bool:
        mid = self.middle
        gb = GroebnerBasis(mid.ring.poly_ring, mid.degrees, mid.ring.ideal_basis)
        gb.add_generators([c for c in self.left.columns if c])
        gb.add_generators(mid.relations)
        gb.complete()
        return all(not gb.normal_form(z) for z in self.right.kernel_generators())

    def certify(self) -> dict:
        flags = {
            "well_defined": self.left.is_well_defined() and self.right.is_well_defined(),
            "injective": self.left.is_injective(),
            "surjective": self.right.is_surjective(),
            "composite_zero": self.right.compose(self.left).is_zero(),
        }
        flags["middle_exact"] = self._middle_exact()
        flags["exact"] = all(flags.values())
        return flags

    def to_dict(self) -> dict:
        return {
            "first": self.first.to_dict(),
            "middle": self.middle.to_dict(),
            "last": self.last.to_dict(),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }


@dataclass
class ApproximationResult:
    N: GradedModule
    approximation: ShortExactSequence  # L -> M -> N
    hull: ShortExactSequence  # N -> L' -> M'
    route: str
    minimal: bool = False
    certificates: dict = field(default_factory=dict)

    @property
    def L(self) -> GradedModule:
        return self.approximation.first

    @property
    def M(self) -> GradedModule:
        return self.approximation.middle

    @property
    def L_hull(self) -> GradedModule:
        return self.hull.middle

    @property
    def M_hull(self) -> GradedModule:
        return self.hull.last

    def certify(self, fid: bool = True) -> dict:
        certs = {
            "approximation": self.approximation.certify(),
            "hull": self.hull.certify(),
            "M_is_mcm": is_mcm(self.M),
            "M_hull_is_mcm": is_mcm(self.M_hull),
        }
        if fid:
            for key, module in (("L", self.L), ("L_hull", self.L_hull)):
                if module.is_zero():
                    certs[f"{key}_fid"] = {"pd": -1, "evaluation_isomorphism": True}
                    continue
                t = sharp_transport(module, strict=False)
                certs[f"{key}_fid"] = {"pd": t.projective_dimension, "evaluation_isomorphism": t.evaluation_is_isomorphism}
        self.certificates.update(certs)
        if not (certs["approximation"]["exact"] and certs["hull"]["exact"]):
            raise CertificationError("Approximation or hull sequence failed its exactness certificate")
        return certs

    def summary(self) -> dict:
        return {
            "route": self.route,
            "minimal": self.minimal,
            "mu": {"L": self.L.mu, "M": self.M.mu, "L_hull": self.L_hull.mu, "M_hull": self.M_hull.mu},
        }


def _identity_sequence(N: GradedModule) -> ShortExactSequence:
    zero = GradedModule.zero(N.ring)
    return ShortExactSequence(ModuleMap(zero, N, []), ModuleMap.identity(N))


# ---------------------------------------------------------------------------
# Inductive route
# ---------------------------------------------------------------------------
def hull_from_approximation(approx: ShortExactSequence) -> ShortExactSequence:
    """Push the omega embedding of M out along M -> N."""
    M = approx.middle
    ab2 = ab2_embedding(M)
    po = pushout(ab2.embedding, approx.right)
    # W' / image(N) = W / image(M) = coker of the embedding
    to_coker = ModuleMap(po.module, ab2.cokernel, ab2.projection.columns + [{} for _ in range(approx.last.rank)])
    return ShortExactSequence(po.from_second, to_coker)


def mcm_approximation(N: GradedModule, strip: bool = True) -> ApproximationResult:
    ring = N.ring
    canonical_module(ring)
    N = N.pruned()
    d = ring.dim
    if N.rank == 0:
        seq = _identity_sequence(N)
        return ApproximationResult(N, seq, seq, "inductive", minimal=True)
    res = free_resolution(N, d + 1)
    r = 0
    while not is_mcm(res.syzygy_module(r)):
        r += 1
        if r > d:
            raise CertificationError("No MCM syzygy within dim A steps")
    logger.info(f"Inductive approximation: syzygy {r} is MCM")

    X = res.syzygy_module(r)
    approx = _identity_sequence(X)
    hull = hull_from_approximation(approx)
    for i in range(r - 1, -1, -1):
        syz = res.syzygy_module(i)
        inclusion = res.syzygy_inclusion(i + 1)  # Omega^{i+1} -> F_i
        po = pushout(hull.left, inclusion)  # L'_{i+1} + F_i
        nL = hull.middle.rank
        epsilon = ModuleMap(
            po.module, syz, [{} for _ in range(nL)] + [syz.free.basis_vector(k) for k in range(syz.rank)]
        )
        approx = ShortExactSequence(po.from_first, epsilon)
        hull = hull_from_approximation(approx)
        logger.debug(f"Step {i}: mu(M) = {po.module.rank}, mu(L') = {hull.middle.rank}")

    result = ApproximationResult(N, approx, hull, "inductive")
    if strip:
        result = strip_common_omega(result)
    return result


# ---------------------------------------------------------------------------
# Minimality
# ---------------------------------------------------------------------------
def _pruned_kernel(f: ModuleMap) -> tuple[GradedModule, ModuleMap]:
    K, incl = f.kernel()
    pr = K.prune_data
    return pr.module, incl.compose(pr.from_pruned)


def prune_result(result: ApproximationResult) -> ApproximationResult:
    """Pruned presentations for L, M, L' and M'; N is left as it is."""
    approx = result.approximation
    pr = approx.middle.prune_data
    approx = ShortExactSequence(pr.to_pruned.compose(approx.left), approx.right.compose(pr.from_pruned))
    pr = approx.first.prune_data
    approx = ShortExactSequence(approx.left.compose(pr.from_pruned), approx.right)
    hull = result.hull
    pr = hull.middle.prune_data
    hull = ShortExactSequence(pr.to_pruned.compose(hull.left), hull.right.compose(pr.from_pruned))
    pr = hull.last.prune_data
    hull = ShortExactSequence(hull.left, pr.to_pruned.compose(hull.right))
    return ApproximationResult(result.N, approx, hull, result.route, result.minimal, dict(result.certificates))


def strip_pair(u: ModuleMap):
    """Find f: V -> omega(e), g: omega(e) -> U with f u g a unit and split it off.

    Returns (incl_U, incl_V, u') for U' = ker(f u), V' = ker f, or None when
    u: U -> V carries no common omega summand.
    """
    U, V = u.source, u.target
    if U.rank == 0 or V.rank == 0:
        return None
    for e, F, G, mat in omega_pairing(V, U, u):
        nz = np.argwhere(mat)
        if not nz.size:
            continue
        i, j = (int(x) for x in nz[0])
        f = F[i]
        logger.debug(f"Splitting a common omega({e}) summand")
        V2, incl_V = _pruned_kernel(f)
        U2, incl_U = _pruned_kernel(f.compose(u))
        u2 = u.compose(incl_U).lift_through(incl_V)
        return incl_U, incl_V, u2
    return None


def strip_common_omega(result: ApproximationResult) -> ApproximationResult:
    result = prune_result(result)
    approx = result.approximation
    removed = 0
    while True:
        step = strip_pair(approx.left)
        if step is None:
            break
        incl_L, incl_M, u = step
        approx = ShortExactSequence(u, approx.right.compose(incl_M))
        removed += 1

    hull = result.hull
    removed_hull = 0
    while True:
        step = strip_pair(hull.right)
        if step is None:
            break
        incl_L, incl_M, h = step
        j = hull.left.lift_through(incl_L)
        hull = ShortExactSequence(j, h)
        removed_hull += 1
    if removed or removed_hull:
        logger.info(f"Stripped {removed} omega summands from the approximation, {removed_hull} from the hull")
    stripped = ApproximationResult(result.N, approx, hull, result.route, minimal=True, certificates=dict(result.certificates))
    stripped.certificates["stripped"] = {"approximation": removed, "hull": removed_hull}
    return stripped


def is_minimal(result: ApproximationResult) -> bool:
    return strip_pair(result.approximation.left) is None and strip_pair(result.hull.right) is None


# ---------------------------------------------------------------------------
# Ding's index
# ---------------------------------------------------------------------------
def power_of_maximal_ideal(ring: GradedRing, n: int) -> list[dict]:
    """Generators of m^n: all products of n variables."""
    out = []
    nv = ring.nvars
    for combo in itertools.combinations_with_replacement(range(nv), n):
        mono = [0] * nv
        for i in combo:
            mono[i] += 1
        out.append({tuple(mono): 1})
    return out


def gamma(N: GradedModule) -> int:
    return omega_rank(mcm_approximation(N).M)


def ding_index(ring: GradedRing, nmax: int | None = None) -> tuple[int | None, dict[int, int]]:
    """Smallest n <= nmax with gamma(A/m^n) = 1, plus every gamma value computed."""
    nmax = settings.ding_index_nmax if nmax is None else nmax
    if not canonical_module(ring).is_gorenstein:
        raise NotGorenstein(f"Ring {ring} is not Gorenstein")
    values: dict[int, int] = {}
    for n in range(1, nmax + 1):
        N = GradedModule.quotient_ring(ring, power_of_maximal_ideal(ring, n), name=f"A/m^{n}")
        values[n] = gamma(N)
        logger.info(f"gamma(A/m^{n}) = {values[n]}")
        if values[n] == 1:
            return n, values
    return None, values
