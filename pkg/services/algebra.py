"""
Graded quotient rings A = P/I, twisted free modules and Hilbert series.

Dimension and multiplicity come from the Hilbert series numerator of the
initial monomial ideal, which is computed with the pivot recursion
HN(J) = HN(J + (x)) + t^deg(x) * HN(J : x).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from sympy import Poly, Symbol, div

from core.errors import HomogeneityError, RingMismatch
from services.groebner import ideal_basis, ideal_normal_form
from services.polynomials import Monomial, PolynomialRing, mono_divides

logger = logging.getLogger(__name__)

T = Symbol("t")


# ---------------------------------------------------------------------------
# Hilbert series of monomial ideals
# ---------------------------------------------------------------------------
def _minimalize(gens: Sequence[Monomial]) -> tuple[Monomial, ...]:
    uniq = sorted(set(gens), key=lambda m: (sum(m), m))
    out: list[Monomial] = []
    for m in uniq:
        if not any(mono_divides(g, m) for g in out):
            out.append(m)
    return tuple(sorted(out))


@lru_cache(maxsize=20000)
def _numerator(gens: tuple[Monomial, ...], weights: tuple[int, ...]) -> Poly:
    one = Poly(1, T, domain="ZZ")
    if not gens:
        return one
    if any(not any(m) for m in gens):
        return Poly(0, T, domain="ZZ")
    pivot_var = None
    for m in gens:
        support = [i for i, e in enumerate(m) if e]
        if len(support) > 1:
            pivot_var = support[0]
            break
    if pivot_var is None:
        out = one
        for m in gens:
            d = sum(w * e for w, e in zip(weights, m))
            out = out * Poly(1 - T**d, T, domain="ZZ")
        return out
    x = tuple(1 if i == pivot_var else 0 for i in range(len(weights)))
    with_x = _minimalize(list(gens) + [x])
    colon = _minimalize(
        [tuple(e - 1 if i == pivot_var and e > 0 else e for i, e in enumerate(m)) for m in gens]
    )
    w = weights[pivot_var]
    return _numerator(with_x, weights) + Poly(T**w, T, domain="ZZ") * _numerator(colon, weights)


def monomial_numerator(gens: Sequence[Monomial], weights: Sequence[int]) -> Poly:
    """Numerator Q(t) of the Hilbert series Q(t) / prod(1 - t^w) of P / (gens)."""
    return _numerator(_minimalize(gens), tuple(weights))


def module_numerator(leads: Sequence[tuple[int, Monomial]], degrees: Sequence[int], weights) -> tuple[Poly, int]:
    """Hilbert numerator of F / in(U) for a free module F with the given generator degrees."""
    per_comp: dict[int, list[Monomial]] = {k: [] for k in range(len(degrees))}
    for k, m in leads:
        per_comp[k].append(m)
    total = Poly(0, T, domain="ZZ")
    lowest = min(degrees, default=0)
    for k, d in enumerate(degrees):
        total = total + Poly(T ** (d - lowest), T, domain="ZZ") * monomial_numerator(per_comp[k], weights)
    return total, lowest


def _denominator(weights: Sequence[int]) -> Poly:
    out = Poly(1, T, domain="ZZ")
    for w in weights:
        out = out * Poly(1 - T**w, T, domain="ZZ")
    return out


def dimension_from_numerator(q: Poly, nvars: int) -> int:
    if q.is_zero:
        return -1
    order = 0
    one_minus_t = Poly(1 - T, T, domain="ZZ")
    while q.eval(1) == 0:
        q = div(q, one_minus_t)[0]
        order += 1
    return nvars - order


def degree_from_numerator(q: Poly, nvars: int, weights: Sequence[int]) -> int | Fraction:
    if q.is_zero:
        return 0
    one_minus_t = Poly(1 - T, T, domain="ZZ")
    while q.eval(1) == 0:
        q = div(q, one_minus_t)[0]
    value = Fraction(int(q.eval(1)))
    for w in weights:
        value /= w
    return int(value) if value.denominator == 1 else value


def length_from_numerator(q: Poly, weights: Sequence[int]) -> int | None:
    """Total dimension when the series is a polynomial, else None."""
    quotient, remainder = div(q, _denominator(weights))
    if not remainder.is_zero:
        return None
    return int(quotient.eval(1))


@dataclass(frozen=True)
class HilbertData:
    dimension: int
    degree: int | Fraction
    numerator: tuple[int, ...]  # coefficients of Q(t), lowest degree first

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "degree": str(self.degree),
            "numerator": list(self.numerator),
        }


# ---------------------------------------------------------------------------
# Graded rings
# ---------------------------------------------------------------------------
class GradedRing:
    """A = P/I for a homogeneous ideal I of a weighted polynomial ring P."""

    def __init__(
        self,
        variables: Sequence[str],
        weights: Sequence[int] | None = None,
        ideal: Sequence[str | dict] = (),
        characteristic: int | None = None,
        name: str | None = None,
    ):
        self.poly_ring = PolynomialRing(variables, weights, characteristic)
        self.name = name
        self._standard: dict[int, tuple[Monomial, ...]] = {}
        gens = []
        for g in ideal:
            f = self.poly_ring.parse(g) if isinstance(g, str) else dict(g)
            if not self.poly_ring.is_homogeneous(f):
                raise HomogeneityError(g if isinstance(g, str) else self.poly_ring.format(f))
            if f:
                gens.append(f)
        self.ideal_generators = gens
        self.ideal_basis = ideal_basis(gens, self.poly_ring) if gens else []
        logger.debug(f"Ring {self}: ideal basis has {len(self.ideal_basis)} elements")

    def __repr__(self):
        rels = ", ".join(self.poly_ring.format(g) for g in self.ideal_generators)
        return f"k[{', '.join(self.variables)}]/({rels})" if rels else f"k[{', '.join(self.variables)}]"

    # --- basic data ---
    @property
    def variables(self) -> tuple[str, ...]:
        return self.poly_ring.variables

    @property
    def weights(self) -> tuple[int, ...]:
        return self.poly_ring.weights

    @property
    def nvars(self) -> int:
        return self.poly_ring.nvars

    @property
    def p(self) -> int:
        return self.poly_ring.p

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)

    @cached_property
    def hilbert(self) -> HilbertData:
        leads = [self.poly_ring.leading_monomial(h) for h in self.ideal_basis]
        q = monomial_numerator(leads, self.weights)
        coeffs = tuple(int(c) for c in reversed(q.all_coeffs())) if not q.is_zero else (0,)
        return HilbertData(
            dimension_from_numerator(q, self.nvars),
            degree_from_numerator(q, self.nvars, self.weights),
            coeffs,
        )

    @property
    def dim(self) -> int:
        return self.hilbert.dimension

    @property
    def codim(self) -> int:
        return self.nvars - self.dim

    @cached_property
    def ambient(self) -> "GradedRing":
        """The polynomial ring P itself, as a graded ring with zero ideal."""
        if not self.ideal_basis:
            return self
        amb = GradedRing.__new__(GradedRing)
        amb.poly_ring = self.poly_ring
        amb.name = None
        amb.ideal_generators = []
        amb.ideal_basis = []
        amb._standard = {}
        return amb

    # --- arithmetic modulo I ---
    def reduce(self, f: dict) -> dict:
        return ideal_normal_form(f, self.ideal_basis, self.poly_ring)

    def reduce_vector(self, v: dict) -> dict:
        if not self.ideal_basis or not v:
            return v
        parts: dict[int, dict] = {}
        for (k, m), c in v.items():
            parts.setdefault(k, {})[m] = c
        out = {}
        for k, poly in parts.items():
            for m, c in self.reduce(poly).items():
                out[(k, m)] = c
        return out

    def standard_monomials(self, d: int) -> tuple[Monomial, ...]:
        cached = self._standard.get(d)
        if cached is None:
            leads = [self.poly_ring.leading_monomial(h) for h in self.ideal_basis]
            cached = tuple(
                m for m in self.poly_ring.monomials_of_degree(d) if not any(mono_divides(l, m) for l in leads)
            )
            self._standard[d] = cached
        return cached

    def hilbert_function(self, d: int) -> int:
        return len(self.standard_monomials(d))

    def variable_vectors(self) -> list[dict]:
        return [{(0, self.poly_ring.variable(i)): 1} for i in range(self.nvars)]

    def parse(self, text: str) -> dict:
        return self.reduce(self.poly_ring.parse(text))

    def format(self, f: dict) -> str:
        return self.poly_ring.format(f)

    def same_as(self, other: "GradedRing") -> bool:
        return self is other or (
            self.variables == other.variables
            and self.weights == other.weights
            and self.p == other.p
            and self.ideal_basis == other.ideal_basis
        )

    def check_same(self, other: "GradedRing") -> None:
        if not self.same_as(other):
            raise RingMismatch(f"Rings differ: {self} vs {other}")

    def to_dict(self) -> dict:
        return {
            "char": self.p,
            "vars": list(self.variables),
            "weights": list(self.weights),
            "ideal": [self.format(g) for g in self.ideal_generators],
        }


def hilbert_data(R: GradedRing) -> HilbertData:
    return R.hilbert


# ---------------------------------------------------------------------------
# Twisted free modules
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class FreeModule:
    """sum of A(-d) over the generator degrees d."""

    ring: GradedRing
    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))

    @property
    def rank(self) -> int:
        return len(self.degrees)

    @property
    def twists(self) -> tuple[int, ...]:
        return tuple(-d for d in self.degrees)

    def __eq__(self, other):
        return isinstance(other, FreeModule) and self.ring is other.ring and self.degrees == other.degrees

    def __hash__(self):
        return hash((id(self.ring), self.degrees))

    def basis_vector(self, i: int) -> dict:
        return {(i, self.ring.poly_ring.one): 1}

    def dual(self) -> "FreeModule":
        return FreeModule(self.ring, tuple(-d for d in self.degrees))

    def shift(self, s: int) -> "FreeModule":
        return FreeModule(self.ring, tuple(d + s for d in self.degrees))

    def direct_sum(self, other: "FreeModule") -> "FreeModule":
        self.ring.check_same(other.ring)
        return FreeModule(self.ring, self.degrees + other.degrees)

    def vector_degree(self, v: dict) -> int | None:
        degs = {self.ring.poly_ring.degree(m) + self.degrees[k] for (k, m) in v}
        if len(degs) > 1:
            raise HomogeneityError(str(v), "an inhomogeneous vector")
        return degs.pop() if degs else None

    def __repr__(self):
        return f"FreeModule(twists={list(self.twists)})"
