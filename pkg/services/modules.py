"""
Finitely generated graded modules as cokernels of twisted free presentations.

A GradedModule is F/U where F is a FreeModule and U is spanned by the
relation vectors; every vector is a dict {(component, monomial): coeff}.
Maps are given by the images of the generators of the source (one vector of
the target's free module per source generator), so a ModuleMap of degree e
sends a generator of degree a to a vector of degree a + e.

Everything over A = P/I goes through the Gröbner engine over P with the ideal
adjoined; the graded pieces used by ``hom_piece`` come from standard
monomials of a module's Gröbner basis.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from sympy import Poly, div

from core.errors import CertificationError, RingMismatch
from services.algebra import (
    T,
    FreeModule,
    GradedRing,
    dimension_from_numerator,
    length_from_numerator,
    module_numerator,
)
from services.groebner import GroebnerBasis
from services.polynomials import inv, mono_divides, mono_mul, reindex, vadd_into, vscale
from utils import modp

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Matrices between free modules
# ---------------------------------------------------------------------------
class Matrix:
    """A degree-0 map between free modules, stored column by column."""

    def __init__(self, source: FreeModule, target: FreeModule, columns: Sequence[dict]):
        if len(columns) != source.rank:
            raise ValueError(f"Matrix needs {source.rank} columns, got {len(columns)}")
        self.source = source
        self.target = target
        self.columns = [target.ring.reduce_vector(dict(c)) for c in columns]

    @property
    def ring(self) -> GradedRing:
        return self.target.ring

    @classmethod
    def zero(cls, source: FreeModule, target: FreeModule) -> "Matrix":
        return cls(source, target, [{} for _ in range(source.rank)])

    @classmethod
    def identity(cls, free: FreeModule) -> "Matrix":
        return cls(free, free, [free.basis_vector(i) for i in range(free.rank)])

    @classmethod
    def from_entries(cls, source: FreeModule, target: FreeModule, entries: dict) -> "Matrix":
        """entries maps (row, col) to a polynomial dict."""
        cols = [{} for _ in range(source.rank)]
        for (r, c), poly in entries.items():
            for m, v in poly.items():
                cols[c][(r, m)] = v
        return cls(source, target, cols)

    def apply(self, v: dict) -> dict:
        p = self.ring.p
        out: dict = {}
        for (k, m), c in v.items():
            vadd_into(out, self.columns[k], p, c, m)
        return self.ring.reduce_vector(out)

    def compose(self, other: "Matrix") -> "Matrix":
        """self after other."""
        return Matrix(other.source, self.target, [self.apply(c) for c in other.columns])

    def entry(self, r: int, c: int) -> dict:
        return {m: v for (k, m), v in self.columns[c].items() if k == r}

    def transpose(self) -> "Matrix":
        cols: list[dict] = [{} for _ in range(self.target.rank)]
        for c, col in enumerate(self.columns):
            for (r, m), v in col.items():
                cols[r][(c, m)] = v
        return Matrix(self.target.dual(), self.source.dual(), cols)

    def unit_entries(self):
        one = self.ring.poly_ring.one
        for c, col in enumerate(self.columns):
            for (r, m), v in col.items():
                if m == one:
                    yield r, c, v

    def is_minimal(self) -> bool:
        return next(self.unit_entries(), None) is None

    def is_zero(self) -> bool:
        return not any(self.columns)

    def __add__(self, other: "Matrix") -> "Matrix":
        p = self.ring.p
        return Matrix(self.source, self.target, [vadd_into(dict(a), b, p) for a, b in zip(self.columns, other.columns)])

    def __neg__(self) -> "Matrix":
        return Matrix(self.source, self.target, [vscale(c, -1, self.ring.p) for c in self.columns])

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def check_degrees(self) -> bool:
        for c, col in enumerate(self.columns):
            if col and self.target.vector_degree(col) != self.source.degrees[c]:
                return False
        return True

    def to_strings(self) -> list[list[str]]:
        rows = []
        for r in range(self.target.rank):
            rows.append([self.ring.format(self.entry(r, c)) for c in range(self.source.rank)])
        return rows


def block_matrix(blocks: Sequence[Sequence[Matrix | None]], sources: Sequence[FreeModule], targets: Sequence[FreeModule]) -> Matrix:
    """Assemble a block matrix; blocks[i][j] maps sources[j] to targets[i]."""
    ring = (sources or targets)[0].ring
    source = FreeModule(ring, tuple(d for s in sources for d in s.degrees))
    target = FreeModule(ring, tuple(d for t in targets for d in t.degrees))
    row_off = np.cumsum([0] + [t.rank for t in targets]).tolist()
    cols: list[dict] = []
    for j, src in enumerate(sources):
        for c in range(src.rank):
            col: dict = {}
            for i in range(len(targets)):
                blk = blocks[i][j]
                if blk is None:
                    continue
                off = row_off[i]
                for (r, m), v in blk.columns[c].items():
                    col[(r + off, m)] = v
            cols.append(col)
    return Matrix(source, target, cols)


# ---------------------------------------------------------------------------
# Syzygies and minimal generators over A
# ---------------------------------------------------------------------------
def minimal_generators(vectors: Sequence[dict], free: FreeModule, relations: Sequence[dict] = ()) -> list[dict]:
    """A minimal generating subset of the image of ``vectors`` in F/(relations)."""
    ring = free.ring
    gb = GroebnerBasis(ring.poly_ring, free.degrees, ring.ideal_basis)
    gb.add_generators([r for r in relations if r])
    indexed = [(free.vector_degree(v), i, v) for i, v in enumerate(vectors) if v]
    indexed.sort(key=lambda t: (t[0], t[1]))
    kept = []
    for d, _, v in indexed:
        gb.complete(max_degree=d)
        nf = gb.normal_form(v)
        if nf:
            kept.append(v)
            gb.add_generator(nf)
    return kept


def syzygies(
    columns: Sequence[dict],
    target: FreeModule,
    source_degrees: Sequence[int],
    relations: Sequence[dict] = (),
    minimal: bool = True,
) -> list[dict]:
    """Generators of {a in A^s : sum a_i columns_i lies in the span of ``relations``}."""
    ring = target.ring
    s = len(columns)
    rel = [r for r in relations if r]
    gb = GroebnerBasis(ring.poly_ring, target.degrees, ring.ideal_basis, track=True)
    gb.add_generators(list(columns), list(source_degrees))
    gb.add_generators(rel, [target.vector_degree(r) for r in rel])
    gb.complete()
    source = FreeModule(ring, tuple(source_degrees))
    out = []
    for syz in gb.syzygies:
        v = ring.reduce_vector({(k, m): c for (k, m), c in syz.items() if k < s})
        if v:
            out.append(v)
    if minimal:
        out = minimal_generators(out, source)
    logger.debug(f"Syzygies of {s} columns: {len(out)} generators")
    return out


# ---------------------------------------------------------------------------
# Graded modules
# ---------------------------------------------------------------------------
class GradedModule:
    def __init__(
        self,
        free: FreeModule,
        relations: Sequence[dict] = (),
        summands: Sequence["GradedModule"] | None = None,
        name: str | None = None,
    ):
        self.free = free
        self.ring = free.ring
        rels = []
        for v in relations:
            v = self.ring.reduce_vector(dict(v))
            if v:
                free.vector_degree(v)
                rels.append(v)
        self.relations = rels
        self.summands = tuple(summands) if summands else None
        self.name = name
        self._nf_cache: dict = {}
        self._basis_cache: dict = {}
        self._is_pruned = False

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"GradedModule({label}{self.rank} generators, twists {list(self.free.twists)}, {len(self.relations)} relations)"

    # --- constructors ---
    @classmethod
    def free_module(cls, ring: GradedRing, degrees: Sequence[int] = (0,), name: str | None = None) -> "GradedModule":
        return cls(FreeModule(ring, tuple(degrees)), (), name=name)

    @classmethod
    def zero(cls, ring: GradedRing) -> "GradedModule":
        return cls(FreeModule(ring, ()), ())

    @classmethod
    def cokernel_of(cls, matrix: Matrix, name: str | None = None) -> "GradedModule":
        return cls(matrix.target, matrix.columns, name=name)

    @classmethod
    def residue_field(cls, ring: GradedRing) -> "GradedModule":
        return cls(FreeModule(ring, (0,)), ring.variable_vectors(), name="k")

    @classmethod
    def quotient_ring(cls, ring: GradedRing, gens: Sequence[dict], name: str | None = None) -> "GradedModule":
        return cls(FreeModule(ring, (0,)), [{(0, m): c for m, c in g.items()} for g in gens], name=name)

    @classmethod
    def ideal(cls, ring: GradedRing, gens: Sequence[dict], name: str | None = None) -> "GradedModule":
        """The ideal generated by ``gens``, presented by its syzygies."""
        gens = [ring.reduce(g) for g in gens]
        gens = [g for g in gens if g]
        unit = FreeModule(ring, (0,))
        cols = [{(0, m): c for m, c in g.items()} for g in gens]
        cols = minimal_generators(cols, unit)
        degrees = tuple(unit.vector_degree(c) for c in cols)
        rels = syzygies(cols, unit, degrees)
        module = cls(FreeModule(ring, degrees), rels, name=name)
        module.ideal_generators = [{m: c for (_, m), c in col.items()} for col in cols]
        return module

    # --- basic data ---
    @property
    def degrees(self) -> tuple[int, ...]:
        return self.free.degrees

    @property
    def rank(self) -> int:
        """Number of generators of this presentation (not minimal unless pruned)."""
        return self.free.rank

    @property
    def relation_degrees(self) -> tuple[int, ...]:
        return tuple(self.free.vector_degree(v) for v in self.relations)

    def presentation(self) -> Matrix:
        return Matrix(FreeModule(self.ring, self.relation_degrees), self.free, self.relations)

    def shift(self, s: int) -> "GradedModule":
        """M(-s): every generator degree raised by s."""
        summands = [m.shift(s) for m in self.summands] if self.summands else None
        return GradedModule(self.free.shift(s), self.relations, summands=summands, name=self.name)

    # --- Gröbner data ---
    @cached_property
    def gb(self) -> GroebnerBasis:
        gb = GroebnerBasis(self.ring.poly_ring, self.degrees, self.ring.ideal_basis)
        gb.add_generators(self.relations)
        return gb.complete()

    def normal_form(self, v: dict) -> dict:
        return self.gb.normal_form(v)

    def nf_term(self, k: int, m) -> dict:
        key = (k, m)
        cached = self._nf_cache.get(key)
        if cached is None:
            cached = self.gb.normal_form({key: 1})
            self._nf_cache[key] = cached
        return cached

    def contains_zero(self, v: dict) -> bool:
        return not self.normal_form(v)

    def is_zero(self) -> bool:
        return all(not self.normal_form(self.free.basis_vector(i)) for i in range(self.rank))

    # --- graded pieces ---
    def standard_basis(self, d: int) -> list[tuple[int, tuple]]:
        cached = self._basis_cache.get(d)
        if cached is not None:
            return cached
        leads: dict[int, list] = {}
        for k, m in self.gb.leading_terms():
            leads.setdefault(k, []).append(m)
        out = []
        pr = self.ring.poly_ring
        for k, deg in enumerate(self.degrees):
            for m in pr.monomials_of_degree(d - deg):
                if not any(mono_divides(l, m) for l in leads.get(k, ())):
                    out.append((k, m))
        self._basis_cache[d] = out
        return out

    def piece_dimension(self, d: int) -> int:
        return len(self.standard_basis(d))

    def coordinates(self, v: dict, d: int) -> np.ndarray:
        """Coordinates of the normal form of v in the degree-d standard basis."""
        basis = self.standard_basis(d)
        index = {b: i for i, b in enumerate(basis)}
        out = np.zeros(len(basis), dtype=np.int64)
        for term, c in self.normal_form(v).items():
            out[index[term]] = c
        return out

    # --- Hilbert series ---
    def hilbert_series(self) -> tuple[tuple[int, ...], int]:
        """Numerator coefficients (lowest first) and the degree they start at."""
        if self.rank == 0:
            return (), 0
        q, shift = module_numerator(self.gb.leading_terms(), self.degrees, self.ring.weights)
        if q.is_zero:
            return (), 0
        t = Poly(T, T, domain="ZZ")
        while q.eval(0) == 0:
            q = div(q, t)[0]
            shift += 1
        return tuple(int(c) for c in reversed(q.all_coeffs())), shift

    def _numerator(self) -> Poly:
        if self.rank == 0:
            return Poly(0, T, domain="ZZ")
        return module_numerator(self.gb.leading_terms(), self.degrees, self.ring.weights)[0]

    def dimension(self) -> int:
        return dimension_from_numerator(self._numerator(), self.ring.nvars)

    def length(self) -> int | None:
        q = self._numerator()
        if q.is_zero:
            return 0
        return length_from_numerator(q, self.ring.weights)

    # --- minimal presentation ---
    @cached_property
    def prune_data(self) -> "PruneResult":
        if self._is_pruned:
            return PruneResult(self, ModuleMap.identity(self), ModuleMap.identity(self))
        return _prune(self)

    def pruned(self) -> "GradedModule":
        return self.prune_data.module

    @property
    def mu(self) -> int:
        return self.pruned().rank

    def to_dict(self) -> dict:
        m = self.pruned()
        return {
            "mu": m.rank,
            "twists": list(m.free.twists),
            "presentation": m.presentation().to_strings(),
        }


@dataclass
class PruneResult:
    module: GradedModule
    to_pruned: "ModuleMap"
    from_pruned: "ModuleMap"


def _prune(module: GradedModule) -> PruneResult:
    ring = module.ring
    p = ring.p
    one = ring.poly_ring.one
    r = module.rank
    rels = [dict(v) for v in module.relations]
    images = [module.free.basis_vector(i) for i in range(r)]
    removed: set[int] = set()
    while True:
        pivot = None
        for i in range(r):
            if i in removed:
                continue
            for j, col in enumerate(rels):
                c = col.get((i, one))
                if c:
                    pivot = (i, j, c)
                    break
            if pivot:
                break
        if pivot is None:
            break
        i, j, c = pivot
        col = rels.pop(j)
        cinv = inv(c, p)
        subst = {t: (-cinv * v) % p for t, v in col.items() if t != (i, one)}
        new_rels = []
        for other in rels:
            entry = [(m, v) for (k, m), v in other.items() if k == i]
            if entry:
                other = dict(other)
                for m, v in entry:
                    vadd_into(other, col, p, -cinv * v, m)
                other = ring.reduce_vector(other)
            if other:
                new_rels.append(other)
        rels = new_rels
        new_images = []
        for img in images:
            entry = [(m, v) for (k, m), v in img.items() if k == i]
            if entry:
                img = {t: v for t, v in img.items() if t[0] != i}
                for m, v in entry:
                    vadd_into(img, subst, p, v, m)
                img = ring.reduce_vector(img)
            new_images.append(img)
        images = new_images
        removed.add(i)
    keep = [i for i in range(r) if i not in removed]
    new_index = {old: new for new, old in enumerate(keep)}
    free = FreeModule(ring, tuple(module.degrees[i] for i in keep))
    rels = [reindex(v, new_index) for v in rels]
    rels = minimal_generators(rels, free)
    pruned = GradedModule(free, rels, name=module.name)
    if module.summands:
        pruned.summands = module.summands
    pruned._is_pruned = True
    to_pruned = ModuleMap(module, pruned, [reindex(img, new_index) for img in images])
    from_pruned = ModuleMap(pruned, module, [module.free.basis_vector(i) for i in keep])
    if len(keep) < r:
        logger.debug(f"Pruned presentation: {r} -> {len(keep)} generators")
    return PruneResult(pruned, to_pruned, from_pruned)


# ---------------------------------------------------------------------------
# Module maps
# ---------------------------------------------------------------------------
class ModuleMap:
    def __init__(self, source: GradedModule, target: GradedModule, columns: Sequence[dict], degree: int = 0):
        if len(columns) != source.rank:
            raise ValueError(f"Map needs {source.rank} columns, got {len(columns)}")
        if not source.ring.same_as(target.ring):
            raise RingMismatch("Source and target live over different rings")
        self.source = source
        self.target = target
        self.degree = degree
        self.columns = [target.ring.reduce_vector(dict(c)) for c in columns]

    def __repr__(self):
        return f"ModuleMap({self.source!r} -> {self.target!r}, degree {self.degree})"

    @classmethod
    def identity(cls, module: GradedModule) -> "ModuleMap":
        return cls(module, module, [module.free.basis_vector(i) for i in range(module.rank)])

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule, degree: int = 0) -> "ModuleMap":
        return cls(source, target, [{} for _ in range(source.rank)], degree)

    @property
    def matrix(self) -> Matrix:
        return Matrix(self.source.free.shift(self.degree), self.target.free, self.columns)

    def apply(self, v: dict) -> dict:
        p = self.source.ring.p
        out: dict = {}
        for (k, m), c in v.items():
            vadd_into(out, self.columns[k], p, c, m)
        return self.target.ring.reduce_vector(out)

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self after other."""
        return ModuleMap(other.source, self.target, [self.apply(c) for c in other.columns], self.degree + other.degree)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        p = self.source.ring.p
        return ModuleMap(
            self.source, self.target,
            [vadd_into(dict(a), b, p) for a, b in zip(self.columns, other.columns)],
            self.degree,
        )

    def scale(self, c: int) -> "ModuleMap":
        return ModuleMap(self.source, self.target, [vscale(col, c, self.source.ring.p) for col in self.columns], self.degree)

    def __neg__(self) -> "ModuleMap":
        return self.scale(-1)

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        return self + (-other)

    def retarget(self, source: GradedModule | None = None, target: GradedModule | None = None, degree: int | None = None) -> "ModuleMap":
        """Same columns read between modules with the same generators (e.g. twists)."""
        return ModuleMap(source or self.source, target or self.target, self.columns, self.degree if degree is None else degree)

    # --- certificates ---
    def is_well_defined(self) -> bool:
        return all(not self.target.normal_form(self.apply(rho)) for rho in self.source.relations)

    def is_zero(self) -> bool:
        return all(not self.target.normal_form(c) for c in self.columns)

    def equals(self, other: "ModuleMap") -> bool:
        return (self - other).is_zero()

    # --- kernel, image, cokernel ---
    def kernel_generators(self) -> list[dict]:
        return syzygies(self.columns, self.target.free, self.source.degrees, self.target.relations)

    def kernel(self) -> tuple[GradedModule, "ModuleMap"]:
        gens = [g for g in self.kernel_generators() if self.source.normal_form(g)]
        module = subquotient(gens, self.source.relations, self.source.free)
        return module, ModuleMap(module, self.source, gens)

    def image(self) -> tuple[GradedModule, "ModuleMap"]:
        gens = minimal_generators(
            [c for c in self.columns if c], self.target.free, self.target.relations
        )
        module = subquotient(gens, self.target.relations, self.target.free)
        return module, ModuleMap(module, self.target, gens)

    def cokernel(self) -> tuple[GradedModule, "ModuleMap"]:
        module = GradedModule(self.target.free, list(self.target.relations) + [c for c in self.columns if c])
        return module, ModuleMap(self.target, module, [self.target.free.basis_vector(i) for i in range(self.target.rank)])

    def is_injective(self) -> bool:
        return all(not self.source.normal_form(g) for g in self.kernel_generators())

    def is_surjective(self) -> bool:
        return self.cokernel()[0].is_zero()

    def is_isomorphism(self) -> bool:
        return self.is_surjective() and self.is_injective()

    def lift_through(self, other: "ModuleMap") -> "ModuleMap":
        """g with other . g = self; raises when self does not factor through other."""
        target = self.target
        rels = [r for r in target.relations if r]
        gb = GroebnerBasis(target.ring.poly_ring, target.degrees, target.ring.ideal_basis, track=True)
        gb.add_generators(list(other.columns), [d + other.degree for d in other.source.degrees])
        gb.add_generators(rels, [target.free.vector_degree(r) for r in rels])
        gb.complete()
        n = other.source.rank
        cols = []
        for col in self.columns:
            coeffs = gb.lift(col) if col else {}
            if coeffs is None:
                raise CertificationError("Map does not factor through the given map")
            cols.append({(k, m): c for (k, m), c in coeffs.items() if k < n})
        return ModuleMap(self.source, other.source, cols, self.degree - other.degree)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "matrix": self.matrix.to_strings()}


def subquotient(gens: Sequence[dict], relations: Sequence[dict], free: FreeModule, degrees: Sequence[int] | None = None) -> GradedModule:
    """The submodule generated by ``gens`` inside F/(relations), presented on its own generators."""
    ring = free.ring
    if degrees is None:
        degrees = [free.vector_degree(g) for g in gens]
    rels = syzygies(gens, free, degrees, relations) if gens else []
    return GradedModule(FreeModule(ring, tuple(degrees)), rels)


def kernel_of_map(phi: Matrix) -> tuple[GradedModule, Matrix]:
    """Kernel of a map of free modules: its presentation and the generators as a matrix."""
    gens = syzygies(phi.columns, phi.target, phi.source.degrees)
    module = subquotient(gens, (), phi.source)
    return module, Matrix(module.free, phi.source, gens)


# ---------------------------------------------------------------------------
# Direct sums, tensor products, pushouts
# ---------------------------------------------------------------------------
@dataclass
class DirectSum:
    module: GradedModule
    injections: list[ModuleMap]
    projections: list[ModuleMap]


def direct_sum(*modules: GradedModule) -> DirectSum:
    if not modules:
        raise ValueError("direct_sum needs at least one module")
    ring = modules[0].ring
    for m in modules[1:]:
        ring.check_same(m.ring)
    degrees: list[int] = []
    rels: list[dict] = []
    offsets = []
    for m in modules:
        off = len(degrees)
        offsets.append(off)
        degrees.extend(m.degrees)
        rels.extend(reindex(v, lambda k, off=off: k + off) for v in m.relations)
    flat = []
    for m in modules:
        if m.rank == 0:
            continue
        flat.extend(m.summands or (m,))
    total = GradedModule(FreeModule(ring, tuple(degrees)), rels, summands=flat if len(flat) > 1 else None)
    injections, projections = [], []
    for m, off in zip(modules, offsets):
        injections.append(ModuleMap(m, total, [total.free.basis_vector(off + i) for i in range(m.rank)]))
        cols = []
        for k in range(total.rank):
            cols.append(m.free.basis_vector(k - off) if off <= k < off + m.rank else {})
        projections.append(ModuleMap(total, m, cols))
    return DirectSum(total, injections, projections)


def direct_power(module: GradedModule, n: int) -> GradedModule:
    return direct_sum(*([module] * n)).module if n > 0 else GradedModule.zero(module.ring)


def tensor_free(module: GradedModule, free: FreeModule) -> GradedModule:
    """F (x) M with basis index a * mu + l for generator a of F and l of M."""
    mu = module.rank
    degrees = tuple(a + b for a in free.degrees for b in module.degrees)
    rels = []
    for a in range(free.rank):
        rels.extend(reindex(v, lambda l, a=a: a * mu + l) for v in module.relations)
    return GradedModule(FreeModule(module.ring, degrees), rels)


def tensor_matrix(matrix: Matrix, module: GradedModule, source: GradedModule, target: GradedModule, degree: int = 0) -> ModuleMap:
    """matrix (x) id_M between the modules built by ``tensor_free``."""
    mu = module.rank
    cols = []
    for a in range(matrix.source.rank):
        col_a = matrix.columns[a]
        for l in range(mu):
            cols.append({(b * mu + l, m): c for (b, m), c in col_a.items()})
    return ModuleMap(source, target, cols, degree)


def tensor_modules(M: GradedModule, N: GradedModule) -> GradedModule:
    M.ring.check_same(N.ring)
    q = N.rank
    degrees = tuple(a + b for a in M.degrees for b in N.degrees)
    rels = []
    for rho in M.relations:
        for k in range(q):
            rels.append({(i * q + k, m): c for (i, m), c in rho.items()})
    for i in range(M.rank):
        for sigma in N.relations:
            rels.append({(i * q + k, m): c for (k, m), c in sigma.items()})
    return GradedModule(FreeModule(M.ring, degrees), rels)


@dataclass
class Pushout:
    module: GradedModule
    from_first: ModuleMap
    from_second: ModuleMap


def pushout(f: ModuleMap, g: ModuleMap) -> Pushout:
    """W = (Y + Z) / {(f(x), -g(x))} for f: X -> Y and g: X -> Z."""
    if f.source is not g.source and f.source.degrees != g.source.degrees:
        raise RingMismatch("pushout needs maps with a common source")
    Y, Z = f.target, g.target
    p = Y.ring.p
    off = Y.rank
    rels = list(Y.relations)
    rels.extend(reindex(v, lambda k: k + off) for v in Z.relations)
    for a, b in zip(f.columns, g.columns):
        v = dict(a)
        vadd_into(v, reindex(b, lambda k: k + off), p, -1)
        if v:
            rels.append(v)
    W = GradedModule(FreeModule(Y.ring, Y.degrees + Z.degrees), rels)
    from_y = ModuleMap(Y, W, [W.free.basis_vector(i) for i in range(Y.rank)])
    from_z = ModuleMap(Z, W, [W.free.basis_vector(off + i) for i in range(Z.rank)])
    return Pushout(W, from_y, from_z)


# ---------------------------------------------------------------------------
# Hom
# ---------------------------------------------------------------------------
def hom_free_presentation(F: FreeModule, N: GradedModule) -> GradedModule:
    """Hom(F, N) = sum of N(a) over generators a of F; basis index i * rank(N) + k."""
    q = N.rank
    degrees = tuple(b - a for a in F.degrees for b in N.degrees)
    rels = []
    for i in range(F.rank):
        rels.extend(reindex(v, lambda k, i=i: i * q + k) for v in N.relations)
    return GradedModule(FreeModule(N.ring, degrees), rels)


def hom_free_map(d: Matrix, N: GradedModule, source: GradedModule, target: GradedModule) -> ModuleMap:
    """Hom(d, N): Hom(F0, N) -> Hom(F1, N) for d: F1 -> F0, i.e. phi -> phi . d."""
    q = N.rank
    cols: list[dict] = [{} for _ in range(d.target.rank * q)]
    for j, col in enumerate(d.columns):
        for (i, m), c in col.items():
            for k in range(q):
                cols[i * q + k][(j * q + k, m)] = c
    return ModuleMap(source, target, cols)


@dataclass
class HomModule:
    """Hom(M, N) with the dictionary from its generators to actual maps."""

    module: GradedModule
    source: GradedModule
    target: GradedModule
    embedding: list[dict]  # generator j of ``module`` as a vector of Hom(F0(M), N)

    def element_to_map(self, v: dict) -> ModuleMap:
        p = self.module.ring.p
        h0: dict = {}
        for (j, m), c in v.items():
            vadd_into(h0, self.embedding[j], p, c, m)
        degree = self.module.free.vector_degree(v) or 0
        return _h0_to_map(h0, self.source, self.target, degree)

    def generator_maps(self) -> list[ModuleMap]:
        return [self.element_to_map(self.module.free.basis_vector(j)) for j in range(self.module.rank)]

    def degree_zero_maps(self) -> list[ModuleMap]:
        return hom_piece(self.source, self.target, 0)


def _h0_to_map(h0: dict, M: GradedModule, N: GradedModule, degree: int) -> ModuleMap:
    q = N.rank
    cols: list[dict] = [{} for _ in range(M.rank)]
    for (idx, m), c in h0.items():
        i, k = divmod(idx, q)
        cols[i][(k, m)] = c
    return ModuleMap(M, N, cols, degree)


def hom_module(M: GradedModule, N: GradedModule) -> HomModule:
    """Hom_A(M, N) as the kernel of Hom(F0, N) -> Hom(F1, N)."""
    M.ring.check_same(N.ring)
    if M.rank == 0 or N.rank == 0:
        return HomModule(GradedModule.zero(M.ring), M, N, [])
    H0 = hom_free_presentation(M.free, N)
    pres = M.presentation()
    H1 = hom_free_presentation(pres.source, N)
    psi = hom_free_map(pres, N, H0, H1)
    gens = [g for g in psi.kernel_generators() if H0.normal_form(g)]
    raw = subquotient(gens, H0.relations, H0.free)
    pr = raw.prune_data
    embedding = []
    p = M.ring.p
    for col in pr.from_pruned.columns:
        vec: dict = {}
        for (j, m), c in col.items():
            vadd_into(vec, gens[j], p, c, m)
        embedding.append(vec)
    logger.debug(f"Hom module: {pr.module.rank} generators")
    return HomModule(pr.module, M, N, embedding)


def hom_piece(X: GradedModule, Y: GradedModule, e: int) -> list[ModuleMap]:
    """A basis of the degree-e homomorphisms X -> Y, by linear algebra on graded pieces."""
    p = X.ring.p
    unknowns: list[tuple[int, tuple]] = []
    for i, a in enumerate(X.degrees):
        for b in Y.standard_basis(a + e):
            unknowns.append((i, b))
    if not unknowns:
        return []
    blocks = []
    for rho in X.relations:
        delta = X.free.vector_degree(rho)
        target_basis = Y.standard_basis(delta + e)
        if not target_basis:
            continue
        index = {b: r for r, b in enumerate(target_basis)}
        by_comp: dict[int, list] = {}
        for (i, m), c in rho.items():
            by_comp.setdefault(i, []).append((m, c))
        block = np.zeros((len(target_basis), len(unknowns)), dtype=np.int64)
        for col, (i, (k, mm)) in enumerate(unknowns):
            for m, c in by_comp.get(i, ()):
                for term, c2 in Y.nf_term(k, mono_mul(m, mm)).items():
                    block[index[term], col] = (block[index[term], col] + c * c2) % p
        blocks.append(block)
    system = np.vstack(blocks) if blocks else np.zeros((0, len(unknowns)), dtype=np.int64)
    null = modp.nullspace(system, p, ncols=len(unknowns))
    maps = []
    for vec in null:
        cols: list[dict] = [{} for _ in range(X.rank)]
        for val, (i, term) in zip(vec, unknowns):
            if val % p:
                cols[i][term] = int(val) % p
        maps.append(ModuleMap(X, Y, cols, e))
    return maps


def map_coordinates(f: ModuleMap) -> np.ndarray:
    """Coordinates of a map in the standard bases of the target pieces, generator by generator."""
    parts = [f.target.coordinates(col, a + f.degree) for col, a in zip(f.columns, f.source.degrees)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

