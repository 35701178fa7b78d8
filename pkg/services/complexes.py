"""
Cohomological complexes of graded modules, free resolutions, Betti tables and Ext.

A ChainComplex has terms C^i (GradedModules) and differentials
d^i: C^i -> C^{i+1}. Free resolutions are stored homologically
(F_0 <- F_1 <- ...) and turned into complexes sitting in degrees -L..0.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from core.config import settings
from core.errors import NonCommutingSquare, NonMinimalComplex, PreconditionError
from services.algebra import FreeModule, GradedRing
from services.modules import (
    GradedModule,
    Matrix,
    ModuleMap,
    hom_free_map,
    hom_free_presentation,
    hom_piece,
    subquotient,
    syzygies,
)
from services.polynomials import inv, reindex, vadd_into
from utils import modp

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------
class ChainComplex:
    def __init__(self, ring: GradedRing, terms: dict[int, GradedModule], differentials: dict[int, ModuleMap] | None = None):
        self.ring = ring
        self.terms = {i: m for i, m in terms.items() if m.rank > 0}
        self.differentials: dict[int, ModuleMap] = {}
        for i, d in (differentials or {}).items():
            if i in self.terms and i + 1 in self.terms:
                self.differentials[i] = d

    @classmethod
    def from_free(cls, ring: GradedRing, frees: dict[int, FreeModule], matrices: dict[int, Matrix]) -> "ChainComplex":
        terms = {i: GradedModule(F) for i, F in frees.items()}
        diffs = {}
        for i, mat in matrices.items():
            if i in terms and i + 1 in terms:
                diffs[i] = ModuleMap(terms[i], terms[i + 1], mat.columns)
        return cls(ring, terms, diffs)

    def __repr__(self):
        ranks = ", ".join(f"{i}:{self.terms[i].rank}" for i in sorted(self.terms))
        return f"ChainComplex({ranks})"

    @property
    def lo(self) -> int:
        return min(self.terms, default=0)

    @property
    def hi(self) -> int:
        return max(self.terms, default=-1)

    def term(self, i: int) -> GradedModule:
        return self.terms.get(i) or GradedModule.zero(self.ring)

    def differential(self, i: int) -> ModuleMap:
        d = self.differentials.get(i)
        if d is None:
            d = ModuleMap.zero(self.term(i), self.term(i + 1))
        return d

    def rank(self, i: int) -> int:
        return self.terms[i].rank if i in self.terms else 0

    def is_free(self) -> bool:
        return all(not m.relations for m in self.terms.values())

    def is_complex(self) -> bool:
        for i in range(self.lo, self.hi):
            if not self.differential(i + 1).compose(self.differential(i)).is_zero():
                return False
        return True

    def is_minimal(self) -> bool:
        return all(d.matrix.is_minimal() for d in self.differentials.values())

    def shift(self, s: int) -> "ChainComplex":
        """C[s]: term i is C^{i+s}, differentials multiplied by (-1)^s."""
        sign = -1 if s % 2 else 1
        terms = {i - s: m for i, m in self.terms.items()}
        diffs = {
            i - s: ModuleMap(terms[i - s], terms[i - s + 1], d.columns).scale(sign)
            for i, d in self.differentials.items()
        }
        return ChainComplex(self.ring, terms, diffs)

    def free_data(self) -> tuple[dict[int, FreeModule], dict[int, Matrix]]:
        if not self.is_free():
            raise PreconditionError("Operation needs a complex of free modules")
        frees = {i: m.free for i, m in self.terms.items()}
        mats = {i: Matrix(frees[i], frees[i + 1], d.columns) for i, d in self.differentials.items()}
        return frees, mats

    def dual(self) -> "ChainComplex":
        """Hom(C, A) for a free complex: term i is (C^{-i})^*, differential the transpose of d^{-i-1}."""
        frees, mats = self.free_data()
        dual_frees = {-i: F.dual() for i, F in frees.items()}
        dual_mats = {-i - 1: mat.transpose() for i, mat in mats.items()}
        return ChainComplex.from_free(self.ring, dual_frees, dual_mats)

    def truncate(self, lo: int, hi: int) -> "ChainComplex":
        terms = {i: m for i, m in self.terms.items() if lo <= i <= hi}
        diffs = {i: d for i, d in self.differentials.items() if lo <= i < hi}
        return ChainComplex(self.ring, terms, diffs)

    # --- homology ---
    def cycles(self, i: int) -> list[dict]:
        return self.differential(i).kernel_generators() if i in self.terms else []

    def homology(self, i: int) -> GradedModule:
        if i not in self.terms:
            return GradedModule.zero(self.ring)
        C = self.terms[i]
        z = [v for v in self.cycles(i) if C.normal_form(v)]
        boundaries = list(C.relations)
        if i - 1 in self.terms:
            boundaries += [c for c in self.differential(i - 1).columns if c]
        return subquotient(z, boundaries, C.free).pruned()

    def is_exact_at(self, i: int) -> bool:
        return self.homology(i).is_zero()

    def betti(self) -> "BettiTable":
        """Generator degrees of each term, indexed by cohomological position."""
        require_minimal(self)
        table = BettiTable()
        for i, m in self.terms.items():
            for d in m.degrees:
                table.add(i, d)
        return table

    def to_dict(self) -> dict:
        out = {"terms": {}, "differentials": {}}
        for i in sorted(self.terms):
            out["terms"][str(i)] = {"rank": self.terms[i].rank, "twists": list(self.terms[i].free.twists)}
        for i in sorted(self.differentials):
            out["differentials"][str(i)] = self.differentials[i].matrix.to_strings()
        return out


@dataclass
class ChainMap:
    source: ChainComplex
    target: ChainComplex
    maps: dict[int, ModuleMap]

    def component(self, i: int) -> ModuleMap:
        f = self.maps.get(i)
        if f is None:
            f = ModuleMap.zero(self.source.term(i), self.target.term(i))
        return f

    def failing_square(self) -> int | None:
        """First degree i where d_Y phi^i != phi^{i+1} d_X, or None."""
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for i in range(lo, hi):
            left = self.target.differential(i).compose(self.component(i))
            right = self.component(i + 1).compose(self.source.differential(i))
            if not left.equals(right):
                return i
        return None

    def commutes(self) -> bool:
        return self.failing_square() is None


def mapping_cone(phi: ChainMap) -> ChainComplex:
    """Cone^i = X^{i+1} + Y^i with d = [[-d_X, 0], [phi, d_Y]]."""
    bad = phi.failing_square()
    if bad is not None:
        raise NonCommutingSquare(f"Chain map does not commute with the differentials in degree {bad}")
    X, Y = phi.source, phi.target
    ring = X.ring
    p = ring.p
    lo = min(X.lo - 1, Y.lo)
    hi = max(X.hi - 1, Y.hi)
    terms: dict[int, GradedModule] = {}
    offsets: dict[int, int] = {}
    for i in range(lo, hi + 1):
        xi, yi = X.term(i + 1), Y.term(i)
        offsets[i] = xi.rank
        rels = list(xi.relations) + [reindex(v, lambda k, o=xi.rank: k + o) for v in yi.relations]
        terms[i] = GradedModule(FreeModule(ring, xi.degrees + yi.degrees), rels)
    diffs = {}
    for i in range(lo, hi):
        off_next = offsets[i + 1]
        dx = X.differential(i + 1)
        fx = phi.component(i + 1)
        dy = Y.differential(i)
        cols = []
        for j in range(X.term(i + 1).rank):
            col: dict = {}
            vadd_into(col, dx.columns[j], p, -1)
            vadd_into(col, reindex(fx.columns[j], lambda k: k + off_next), p)
            cols.append(col)
        for j in range(Y.term(i).rank):
            cols.append(reindex(dy.columns[j], lambda k: k + off_next))
        if terms[i].rank and terms[i + 1].rank:
            diffs[i] = ModuleMap(terms[i], terms[i + 1], cols)
    return ChainComplex(ring, terms, diffs)


# ---------------------------------------------------------------------------
# Minimalization of free complexes
# ---------------------------------------------------------------------------
@dataclass
class MinimalizeResult:
    complex: ChainComplex
    to_minimal: dict[int, Matrix]
    from_minimal: dict[int, Matrix]


def minimalize_complex(C: ChainComplex) -> MinimalizeResult:
    """Cancel unit entries of the differentials; returns the homotopy equivalences too."""
    ring = C.ring
    p = ring.p
    one = ring.poly_ring.one
    frees, mats = C.free_data()
    degs = {i: list(F.degrees) for i, F in frees.items()}
    d = {i: [dict(c) for c in mat.columns] for i, mat in mats.items()}
    f = {i: [{(k, one): 1} for k in range(len(degs[i]))] for i in degs}
    g = {i: [{(k, one): 1} for k in range(len(degs[i]))] for i in degs}
    steps = 0

    def find_pivot():
        for i in sorted(d):
            for r in range(len(degs[i + 1])):
                for s, col in enumerate(d[i]):
                    c = col.get((r, one))
                    if c:
                        return i, r, s, c
        return None

    while True:
        pivot = find_pivot()
        if pivot is None:
            break
        i, r, s, c = pivot
        cinv = inv(c, p)
        col_s = d[i][s]
        alpha = {t: v for t, v in col_s.items() if t[0] != r}
        drop_r = lambda k: None if k == r else (k - 1 if k > r else k)
        drop_s = lambda k: None if k == s else (k - 1 if k > s else k)

        new_cols, new_g = [], []
        for b, col in enumerate(d[i]):
            if b == s:
                continue
            beta = [(m, v) for (k, m), v in col.items() if k == r]
            col = {t: v for t, v in col.items() if t[0] != r}
            gb = dict(g[i][b])
            for m, v in beta:
                vadd_into(col, alpha, p, -cinv * v, m)
                vadd_into(gb, g[i][s], p, -cinv * v, m)
            new_cols.append(reindex(ring.reduce_vector(col), drop_r))
            new_g.append(ring.reduce_vector(gb))
        d[i] = new_cols
        g[i] = new_g
        if i - 1 in d:
            d[i - 1] = [reindex(col, drop_s) for col in d[i - 1]]
        if i + 1 in d:
            d[i + 1] = [col for k, col in enumerate(d[i + 1]) if k != r]
        f[i] = [reindex(v, drop_s) for v in f[i]]
        new_f = []
        for v in f[i + 1]:
            yr = [(m, c2) for (k, m), c2 in v.items() if k == r]
            v = {t: c2 for t, c2 in v.items() if t[0] != r}
            for m, c2 in yr:
                vadd_into(v, alpha, p, -cinv * c2, m)
            new_f.append(reindex(ring.reduce_vector(v), drop_r))
        f[i + 1] = new_f
        g[i + 1] = [v for k, v in enumerate(g[i + 1]) if k != r]
        del degs[i][s]
        del degs[i + 1][r]
        steps += 1

    new_frees = {i: FreeModule(ring, tuple(ds)) for i, ds in degs.items()}
    new_mats = {
        i: Matrix(new_frees[i], new_frees[i + 1], cols) for i, cols in d.items() if degs[i] and degs[i + 1]
    }
    minimal = ChainComplex.from_free(ring, {i: F for i, F in new_frees.items() if F.rank}, new_mats)
    to_min = {i: Matrix(frees[i], new_frees[i], f[i]) for i in frees}
    from_min = {i: Matrix(new_frees[i], frees[i], g[i]) for i in frees}
    logger.debug(f"Minimalized complex with {steps} cancellations: {minimal}")
    return MinimalizeResult(minimal, to_min, from_min)


def require_minimal(C: ChainComplex) -> None:
    if not C.is_minimal():
        raise NonMinimalComplex("Differential has a unit entry")


# ---------------------------------------------------------------------------
# Free resolutions
# ---------------------------------------------------------------------------
class Resolution:
    """Minimal graded free resolution F_0 <- F_1 <- ... of a module, extended on demand."""

    def __init__(self, module: GradedModule):
        self.module = module.pruned()
        self.ring = module.ring
        self.free_modules: list[FreeModule] = [self.module.free]
        self.differentials: list[Matrix | None] = [None]
        self.complete = False
        rels = list(self.module.relations)
        F1 = FreeModule(self.ring, tuple(self.module.free.vector_degree(v) for v in rels))
        if F1.rank == 0:
            self.complete = True
        else:
            self.free_modules.append(F1)
            self.differentials.append(Matrix(F1, self.module.free, rels))

    @property
    def length(self) -> int:
        return len(self.free_modules) - 1

    def extend(self, length: int) -> "Resolution":
        while not self.complete and self.length < length:
            last = self.differentials[-1]
            syz = syzygies(last.columns, last.target, last.source.degrees)
            if not syz:
                self.complete = True
                break
            F = FreeModule(self.ring, tuple(last.source.vector_degree(v) for v in syz))
            self.free_modules.append(F)
            self.differentials.append(Matrix(F, last.source, syz))
            logger.debug(f"Resolution step {self.length}: rank {F.rank}")
        return self

    def free(self, i: int) -> FreeModule:
        if i < len(self.free_modules):
            return self.free_modules[i]
        return FreeModule(self.ring, ())

    def differential(self, i: int) -> Matrix:
        """d_i: F_i -> F_{i-1}."""
        if 1 <= i < len(self.differentials):
            return self.differentials[i]
        return Matrix.zero(self.free(i), self.free(i - 1))

    def rank(self, i: int) -> int:
        return self.free(i).rank

    def projective_dimension(self) -> int | None:
        return self.length if self.complete else None

    def syzygy_module(self, i: int) -> GradedModule:
        """The i-th syzygy, presented as coker(d_{i+1}) on F_i."""
        self.extend(i + 1)
        if i == 0:
            return self.module
        F = self.free(i)
        return GradedModule(F, self.differential(i + 1).columns if self.rank(i + 1) else ())

    def syzygy_inclusion(self, i: int) -> ModuleMap:
        """The i-th syzygy into F_{i-1}, given by d_i."""
        syz = self.syzygy_module(i)
        target = GradedModule(self.free(i - 1))
        return ModuleMap(syz, target, self.differential(i).columns)

    def complex(self) -> ChainComplex:
        L = self.length
        frees = {-i: self.free(i) for i in range(L + 1)}
        mats = {-i: self.differential(i) for i in range(1, L + 1)}
        return ChainComplex.from_free(self.ring, frees, mats)

    def betti(self) -> "BettiTable":
        table = BettiTable()
        for i, F in enumerate(self.free_modules):
            for d in F.degrees:
                table.add(i, d)
        return table


def free_resolution(M: GradedModule, length: int) -> Resolution:
    cached = M.__dict__.get("_resolution")
    if cached is None:
        cached = Resolution(M)
        M.__dict__["_resolution"] = cached
    return cached.extend(length)


# ---------------------------------------------------------------------------
# Betti tables
# ---------------------------------------------------------------------------
@dataclass
class BettiTable:
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    def add(self, i: int, degree: int, count: int = 1) -> None:
        self.entries[(i, degree)] = self.entries.get((i, degree), 0) + count

    def total(self, i: int) -> int:
        return sum(c for (k, _), c in self.entries.items() if k == i)

    def totals(self) -> list[int]:
        if not self.entries:
            return []
        lo = min(i for i, _ in self.entries)
        hi = max(i for i, _ in self.entries)
        return [self.total(i) for i in range(lo, hi + 1)]

    def truncated(self, length: int) -> "BettiTable":
        return BettiTable({k: v for k, v in self.entries.items() if k[0] <= length})

    def scaled(self, n: int) -> "BettiTable":
        return BettiTable({k: v * n for k, v in self.entries.items()})

    def __eq__(self, other):
        if not isinstance(other, BettiTable):
            return NotImplemented
        return {k: v for k, v in self.entries.items() if v} == {k: v for k, v in other.entries.items() if v}

    def rows(self) -> list[str]:
        """Text rendering: columns are positions, rows are degree minus position."""
        if not self.entries:
            return ["total: 0"]
        cols = sorted({i for i, _ in self.entries})
        shifts = sorted({d - i for i, d in self.entries})
        width = max(len(str(v)) for v in self.entries.values()) + 1
        width = max(width, max(len(str(i)) for i in cols) + 1)
        out = ["       " + "".join(str(i).rjust(width) for i in cols)]
        out.append("total: " + "".join(str(self.total(i)).rjust(width) for i in cols))
        for s in shifts:
            cells = []
            for i in cols:
                v = self.entries.get((i, i + s), 0)
                cells.append((str(v) if v else ".").rjust(width))
            out.append(f"{s:>5}: " + "".join(cells))
        return out

    def to_dict(self) -> dict:
        return {
            "totals": self.totals(),
            "entries": [[i, d, c] for (i, d), c in sorted(self.entries.items()) if c],
        }


def betti_table(M: GradedModule | ChainComplex, length: int | None = None) -> BettiTable:
    """Betti table of a module through ``length`` (default dim A + 1), or of a minimal free complex."""
    if isinstance(M, ChainComplex):
        return M.betti()
    length = M.ring.dim + 1 if length is None else length
    return free_resolution(M, length).betti().truncated(length)


# ---------------------------------------------------------------------------
# Ext
# ---------------------------------------------------------------------------
def ext_module(M: GradedModule, N: GradedModule, i: int) -> GradedModule:
    """Ext^i(M, N) as the cohomology of Hom(F, N) for the minimal resolution F of M."""
    M.ring.check_same(N.ring)
    res = free_resolution(M, i + 1)
    N = N.pruned()
    H = hom_free_presentation(res.free(i), N)
    H_next = hom_free_presentation(res.free(i + 1), N)
    cocycles = hom_free_map(res.differential(i + 1), N, H, H_next).kernel_generators() if H_next.rank else [
        H.free.basis_vector(k) for k in range(H.rank)
    ]
    boundaries = list(H.relations)
    if i > 0:
        H_prev = hom_free_presentation(res.free(i - 1), N)
        boundaries += [c for c in hom_free_map(res.differential(i), N, H_prev, H).columns if c]
    cocycles = [z for z in cocycles if H.normal_form(z)]
    E = subquotient(cocycles, boundaries, H.free).pruned()
    logger.debug(f"Ext^{i}: {E.rank} generators")
    return E


def _summands(M: GradedModule) -> tuple[GradedModule, ...]:
    return M.summands if M.summands else (M,)


def ext_total_dim(M: GradedModule, N: GradedModule, i: int) -> int:
    """Total dimension of Ext^i(M, N), additive over recorded direct summands."""
    if M.summands or N.summands:
        cache: dict[tuple[int, int], int] = {}
        total = 0
        for a in _summands(M):
            for b in _summands(N):
                key = (id(a), id(b))
                if key not in cache:
                    cache[key] = ext_total_dim(a, b, i)
                total += cache[key]
        return total
    length = ext_module(M, N, i).length()
    if length is None:
        raise PreconditionError(f"Ext^{i} does not have finite length")
    return length


def ext_graded_dimensions(M: GradedModule, N: GradedModule, i: int, degrees: Sequence[int]) -> dict[int, int]:
    E = ext_module(M, N, i)
    return {e: E.piece_dimension(e) for e in degrees}


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------
@dataclass
class IsomorphismResult:
    status: str  # "isomorphic", "not_isomorphic" or "betti_equal_unresolved"
    map: ModuleMap | None = None

    @property
    def isomorphic(self) -> bool:
        return self.status == "isomorphic"


def _is_surjective_on_generators(f: ModuleMap) -> bool:
    """For a minimally presented target: surjective iff onto the generators mod m."""
    one = f.source.ring.poly_ring.one
    const = np.zeros((f.target.rank, f.source.rank), dtype=np.int64)
    for j, col in enumerate(f.columns):
        for (k, m), c in col.items():
            if m == one:
                const[k, j] = c
    return modp.rank(const, f.source.ring.p) == f.target.rank


def find_isomorphism(M: GradedModule, N: GradedModule, betti_length: int | None = None, attempts: int | None = None) -> IsomorphismResult:
    betti_length = settings.iso_betti_length if betti_length is None else betti_length
    attempts = settings.iso_search_attempts if attempts is None else attempts
    Mp, Np = M.pruned(), N.pruned()
    if sorted(Mp.degrees) != sorted(Np.degrees):
        return IsomorphismResult("not_isomorphic")
    if betti_table(Mp, betti_length) != betti_table(Np, betti_length):
        return IsomorphismResult("not_isomorphic")
    if Mp.rank == 0:
        return IsomorphismResult("isomorphic", ModuleMap.zero(Mp, Np))
    if Mp.hilbert_series() != Np.hilbert_series():
        return IsomorphismResult("not_isomorphic")
    basis = hom_piece(Mp, Np, 0)
    if not basis:
        return IsomorphismResult("not_isomorphic")
    p = M.ring.p
    for f in basis:
        if _is_surjective_on_generators(f):
            return IsomorphismResult("isomorphic", f)
    rng = np.random.default_rng(settings.iso_search_seed)
    for _ in range(attempts):
        coeffs = modp.random_vector(rng, len(basis), p)
        f = basis[0].scale(int(coeffs[0]))
        for c, g in zip(coeffs[1:], basis[1:]):
            f = f + g.scale(int(c))
        if _is_surjective_on_generators(f):
            return IsomorphismResult("isomorphic", f)
    logger.info(f"No isomorphism found after {attempts} random attempts")
    return IsomorphismResult("betti_equal_unresolved")
