"""
Yoneda extensions from degree-0 Ext^1 classes and the fundamental module.

An Ext^1(X, Y) class is represented by a cocycle Omega^1 X -> Y; the
extension is the pushout of 0 -> Omega^1 X -> F_0 -> X -> 0 along it.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import DimensionTooSmall, NonOneDimensionalExt
from services.algebra import GradedRing
from services.approximation import ShortExactSequence, mcm_approximation, power_of_maximal_ideal
from services.canonical import canonical_module, is_mcm, omega_multiplier
from services.complexes import betti_table, free_resolution
from services.modules import GradedModule, ModuleMap, hom_module, hom_piece, map_coordinates, pushout
from utils import modp

logger = logging.getLogger(__name__)


@dataclass
class ExtensionClass:
    X: GradedModule
    Y: GradedModule
    cocycle: ModuleMap  # Omega^1 X -> Y, degree 0
    coordinates: tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        return not any(self.coordinates)


@dataclass
class Ext1Piece:
    """Degree-0 part of Ext^1(X, Y): cocycles modulo restrictions of maps F_0 -> Y."""

    X: GradedModule
    Y: GradedModule
    syzygy_inclusion: ModuleMap  # Omega^1 X -> F_0
    cover: ModuleMap  # F_0 -> X
    classes: list[ModuleMap] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.classes)

    def element(self, coordinates) -> ExtensionClass:
        coords = tuple(int(c) for c in coordinates)
        cocycle = ModuleMap.zero(self.syzygy_inclusion.source, self.Y)
        for c, z in zip(coords, self.classes):
            if c:
                cocycle = cocycle + z.scale(c)
        return ExtensionClass(self.X, self.Y, cocycle, coords)

    def generator(self, i: int = 0) -> ExtensionClass:
        coords = [0] * self.dimension
        coords[i] = 1
        return self.element(coords)


def ext1_degree_zero(X: GradedModule, Y: GradedModule) -> Ext1Piece:
    X = X.pruned()
    p = X.ring.p
    res = free_resolution(X, 2)
    syz = res.syzygy_module(1)
    F0 = GradedModule(res.free(0))
    inclusion = ModuleMap(syz, F0, res.differential(1).columns)
    cover = ModuleMap(F0, X, [X.free.basis_vector(k) for k in range(X.rank)])
    piece = Ext1Piece(X, Y, inclusion, cover)
    if syz.rank == 0:
        return piece
    cocycles = hom_piece(syz, Y, 0)
    boundaries = [phi.compose(inclusion) for phi in hom_piece(F0, Y, 0)]
    span = [map_coordinates(b) for b in boundaries]
    for z in cocycles:
        vec = map_coordinates(z)
        if span:
            new = not modp.in_span(np.array(span, dtype=np.int64), vec, p)
        else:
            new = bool(np.any(np.mod(vec, p)))
        if new:
            piece.classes.append(z)
            span.append(vec)
    logger.debug(f"Ext^1 degree 0: dimension {piece.dimension}")
    return piece


# ---------------------------------------------------------------------------
# Yoneda extensions
# ---------------------------------------------------------------------------
@dataclass
class YonedaExtension:
    sequence: ShortExactSequence  # Y -> E -> X
    split: bool

    @property
    def module(self) -> GradedModule:
        return self.sequence.middle


def has_retraction(left: ModuleMap) -> bool:
    """Is there r: E -> Y of degree 0 with r . left = id_Y?"""
    Y, E = left.source, left.target
    if Y.rank == 0:
        return True
    candidates = hom_piece(E, Y, 0)
    if not candidates:
        return False
    p = Y.ring.p
    system = np.stack([map_coordinates(r.compose(left)) for r in candidates], axis=1)
    target = map_coordinates(ModuleMap.identity(Y))
    return modp.solve(system, target, p) is not None


def yoneda_extension(c: ExtensionClass, piece: Ext1Piece | None = None) -> YonedaExtension:
    piece = piece or ext1_degree_zero(c.X, c.Y)
    po = pushout(piece.syzygy_inclusion, c.cocycle)  # F_0 + Y
    X = piece.X
    f0 = piece.cover.source.rank
    to_x = ModuleMap(po.module, X, piece.cover.columns + [{} for _ in range(c.Y.rank)])
    seq = ShortExactSequence(po.from_second, to_x)
    split = has_retraction(seq.left)
    if c.is_zero and not split:
        logger.warning("Zero class produced a non-split extension")
    logger.debug(f"Yoneda extension: {f0} + {c.Y.rank} generators, split = {split}")
    return YonedaExtension(seq, split)


# ---------------------------------------------------------------------------
# Fundamental module
# ---------------------------------------------------------------------------
@dataclass
class FundamentalModule:
    ring: GradedRing
    extension: YonedaExtension  # omega -> E -> Omega^{d-1} k
    ext_dimension: int
    certificates: dict = field(default_factory=dict)
    dual_sequence: ShortExactSequence | None = None  # Hom(Omega^1 k, omega) -> E^v -> m, d = 2

    @property
    def module(self) -> GradedModule:
        return self.extension.module

    def to_dict(self) -> dict:
        out = {
            "E": self.module.to_dict(),
            "betti": betti_table(self.module, 3).to_dict(),
            "ext1_dimension": self.ext_dimension,
            "certificates": self.certificates,
        }
        return out


def fundamental_module(ring: GradedRing, compare_with_approximation: bool = True) -> FundamentalModule:
    d = ring.dim
    if d < 2:
        raise DimensionTooSmall(f"Fundamental module needs dim A >= 2, got {d}")
    omega = canonical_module(ring).module
    k = GradedModule.residue_field(ring)
    X = free_resolution(k, d).syzygy_module(d - 1)
    piece = ext1_degree_zero(X, omega)
    if piece.dimension != 1:
        raise NonOneDimensionalExt(f"Ext^1(Omega^{d - 1} k, omega) has dimension {piece.dimension} in degree 0")
    ext = yoneda_extension(piece.generator(0), piece)
    seq = ext.sequence
    certs = {
        "sequence": seq.certify(),
        "non_split": not ext.split,
        "mcm": is_mcm(seq.middle),
    }
    fm = FundamentalModule(ring, ext, piece.dimension, certs)
    if d == 2:
        fm.dual_sequence = _dual_sequence(seq, omega)
        if compare_with_approximation:
            approx = mcm_approximation(GradedModule.ideal(ring, power_of_maximal_ideal(ring, 1), name="m"))
            dual = fm.dual_sequence
            certs["matches_approximation_of_m"] = (
                betti_table(dual.middle, 3) == betti_table(approx.M, 3)
                and betti_table(dual.first, 3) == betti_table(approx.L, 3)
            )
    logger.info(f"Fundamental module: mu(E) = {seq.middle.mu}, certificates {certs}")
    return fm


def _dual_sequence(seq: ShortExactSequence, omega: GradedModule) -> ShortExactSequence:
    """0 -> Hom(Omega^1 k, omega) -> E^v -> m -> 0 from Hom(-, omega) of omega -> E -> Omega^1 k."""
    ring = omega.ring
    E = seq.middle
    hom_E = hom_module(E, omega)
    A = GradedModule.free_module(ring)
    cols = []
    for f in hom_E.generator_maps():
        a = omega_multiplier(f.compose(seq.left))
        cols.append({(0, m): c for m, c in a.items()})
    restrict = ModuleMap(hom_E.module, A, cols)
    image, image_incl = restrict.image()
    to_image = restrict.lift_through(image_incl)
    kernel, kernel_incl = restrict.kernel()
    return ShortExactSequence(kernel_incl, to_image)
