"""
Buchberger's algorithm for homogeneous submodules of twisted free modules.

Vectors live in a free module over the ambient polynomial ring P whose
generators carry degrees (A(-j) has its generator in degree j). Terms are
ordered term-over-position: the weighted degree of the term first, then the
degrevlex key of its monomial, then the smaller component index.

Quotient rings A = P/I are handled by seeding the basis with h*e_k for every
h in the reduced basis of I (the "base" elements). With ``track=True`` every
basis element remembers how it was built from the original generators, and
zero reductions become syzygies over A (Schreyer's construction).
"""

import heapq
import logging
from dataclasses import dataclass
from typing import Sequence

from core.errors import InhomogeneousInput
from services.polynomials import (
    Monomial,
    PolynomialRing,
    inv,
    mono_coprime,
    mono_div,
    mono_divides,
    mono_lcm,
    padd,
    pmul_term,
    vadd_into,
    vscale,
)

logger = logging.getLogger(__name__)


@dataclass
class _Element:
    vector: dict
    comp: int
    lead: Monomial
    degree: int
    record: dict | None
    base: bool = False


def ideal_normal_form(f: dict, basis: Sequence[dict], ring: PolynomialRing) -> dict:
    """Full reduction of a polynomial by a Gröbner basis of an ideal."""
    if not basis or not f:
        return dict(f)
    p = ring.p
    leads = [(ring.leading_monomial(h), h) for h in basis]
    f = dict(f)
    rem: dict = {}
    while f:
        m = max(f, key=ring.sort_key)
        c = f[m]
        for lm, h in leads:
            q = mono_div(m, lm)
            if q is not None:
                f = padd(f, pmul_term(h, -c * inv(h[lm], p), q, p), p)
                break
        else:
            rem[m] = c
            del f[m]
    return rem


class GroebnerBasis:
    def __init__(
        self,
        ring: PolynomialRing,
        degrees: Sequence[int],
        ideal: Sequence[dict] = (),
        track: bool = False,
        source_degrees: Sequence[int] = (),
    ):
        self.ring = ring
        self.p = ring.p
        self.degrees = tuple(degrees)
        self.ideal = list(ideal)
        self.track = track
        self.source_degrees = list(source_degrees)
        self.elements: list[_Element] = []
        self.syzygies: list[dict] = []
        self._pending: list[tuple] = []
        self._pending_set: set[tuple[int, int]] = set()
        self._seq = 0
        self._generator_count = 0
        self._key_cache: dict = {}
        self.stats = {"pairs": 0, "zero": 0, "skipped": 0}
        for k in range(len(self.degrees)):
            for h in self.ideal:
                lm = ring.leading_monomial(h)
                c = inv(h[lm], self.p)
                vec = {(k, m): (v * c) % self.p for m, v in h.items()}
                self.elements.append(
                    _Element(vec, k, lm, ring.degree(lm) + self.degrees[k], None, base=True)
                )

    # --- order -----------------------------------------------------------
    def key(self, term: tuple[int, Monomial]) -> tuple:
        cached = self._key_cache.get(term)
        if cached is None:
            comp, m = term
            rdeg, rev = self.ring.sort_key(m)
            cached = (rdeg + self.degrees[comp], rev, -comp)
            self._key_cache[term] = cached
        return cached

    def lead_term(self, v: dict) -> tuple[int, Monomial]:
        return max(v, key=self.key)

    def vector_degree(self, v: dict) -> int | None:
        degs = {self.ring.degree(m) + self.degrees[k] for (k, m) in v}
        if len(degs) > 1:
            raise InhomogeneousInput(f"Vector is not homogeneous (degrees {sorted(degs)})")
        return degs.pop() if degs else None

    # --- reduction ---------------------------------------------------------
    def _reducer(self, comp: int, m: Monomial) -> _Element | None:
        for el in self.elements:
            if el.comp == comp and mono_divides(el.lead, m):
                return el
        return None

    def reduce(self, v: dict, full: bool = True) -> tuple[dict, dict]:
        """Return (remainder, quotient record) with v = remainder + sum(record * generators)."""
        p = self.p
        v = dict(v)
        rem: dict = {}
        quotient: dict = {}
        while v:
            term = max(v, key=self.key)
            c = v[term]
            comp, m = term
            el = self._reducer(comp, m)
            if el is None:
                rem[term] = c
                del v[term]
                if not full:
                    rem.update(v)
                    break
                continue
            q = mono_div(m, el.lead)
            vadd_into(v, el.vector, p, -c, q)
            if self.track and el.record:
                vadd_into(quotient, el.record, p, c, q)
        return rem, quotient

    def normal_form(self, v: dict) -> dict:
        return self.reduce(v)[0]

    def _reduce_record(self, record: dict) -> dict:
        if not self.ideal or not record:
            return record
        parts: dict[int, dict] = {}
        for (k, m), c in record.items():
            parts.setdefault(k, {})[m] = c
        out = {}
        for k, poly in parts.items():
            for m, c in ideal_normal_form(poly, self.ideal, self.ring).items():
                out[(k, m)] = c
        return out

    # --- building ----------------------------------------------------------
    def add_generator(self, v: dict, degree: int | None = None) -> None:
        """Add the next original generator (its index is its position)."""
        index = self._generator_count
        self._generator_count += 1
        d = self.vector_degree(v) if v else None
        if index >= len(self.source_degrees):
            self.source_degrees.append(degree if degree is not None else (d if d is not None else 0))
        rem, quotient = self.reduce(v)
        record = None
        if self.track:
            record = {(index, self.ring.one): 1}
            vadd_into(record, quotient, self.p, -1)
        if not rem:
            if self.track:
                syz = self._reduce_record(record)
                if syz:
                    self.syzygies.append(syz)
            return
        self._insert(rem, record)

    def add_generators(self, vectors: Sequence[dict], degrees: Sequence[int] | None = None) -> None:
        for i, v in enumerate(vectors):
            self.add_generator(v, None if degrees is None else degrees[i])

    def _insert(self, v: dict, record: dict | None) -> None:
        comp, lead = self.lead_term(v)
        c = inv(v[(comp, lead)], self.p)
        v = vscale(v, c, self.p)
        if record is not None:
            record = self._reduce_record(vscale(record, c, self.p))
        el = _Element(v, comp, lead, self.ring.degree(lead) + self.degrees[comp], record)
        new_index = len(self.elements)
        self.elements.append(el)
        for j, other in enumerate(self.elements[:-1]):
            if other.comp != comp:
                continue
            lcm = mono_lcm(other.lead, lead)
            if not self.track and len(self.degrees) == 1 and mono_coprime(other.lead, lead):
                self.stats["skipped"] += 1
                continue
            deg = self.ring.degree(lcm) + self.degrees[comp]
            self._seq += 1
            heapq.heappush(self._pending, (deg, self._seq, j, new_index))
            self._pending_set.add((j, new_index))

    def _chain_criterion(self, i: int, j: int, lcm: Monomial) -> bool:
        comp = self.elements[i].comp
        for k, el in enumerate(self.elements):
            if k == i or k == j or el.comp != comp:
                continue
            if not mono_divides(el.lead, lcm):
                continue
            if (min(i, k), max(i, k)) in self._pending_set:
                continue
            if (min(j, k), max(j, k)) in self._pending_set:
                continue
            return True
        return False

    def complete(self, max_degree: int | None = None) -> "GroebnerBasis":
        p = self.p
        while self._pending:
            deg, _, i, j = self._pending[0]
            if max_degree is not None and deg > max_degree:
                break
            heapq.heappop(self._pending)
            self._pending_set.discard((i, j))
            a, b = self.elements[i], self.elements[j]
            lcm = mono_lcm(a.lead, b.lead)
            if self._chain_criterion(i, j, lcm):
                self.stats["skipped"] += 1
                continue
            self.stats["pairs"] += 1
            qa = mono_div(lcm, a.lead)
            qb = mono_div(lcm, b.lead)
            s = vadd_into({}, a.vector, p, 1, qa)
            vadd_into(s, b.vector, p, -1, qb)
            record = None
            if self.track:
                record = {}
                if a.record:
                    vadd_into(record, a.record, p, 1, qa)
                if b.record:
                    vadd_into(record, b.record, p, -1, qb)
            rem, quotient = self.reduce(s)
            if self.track:
                vadd_into(record, quotient, p, -1)
            if not rem:
                self.stats["zero"] += 1
                if self.track:
                    syz = self._reduce_record(record)
                    if syz:
                        self.syzygies.append(syz)
                continue
            self._insert(rem, record)
        logger.debug(
            f"Groebner basis: {len(self.elements)} elements, "
            f"{self.stats['pairs']} pairs reduced, {self.stats['skipped']} skipped"
        )
        return self

    # --- queries -----------------------------------------------------------
    def lift(self, v: dict) -> dict | None:
        """Coefficients a with v = sum(a_i * g_i) modulo I, or None if v is not in the span."""
        if not self.track:
            raise ValueError("lift() needs a tracked basis")
        rem, quotient = self.reduce(v)
        if rem:
            return None
        return self._reduce_record(quotient)

    def leading_terms(self) -> list[tuple[int, Monomial]]:
        return [(el.comp, el.lead) for el in self.elements]

    def nonbase(self) -> list[_Element]:
        return [el for el in self.elements if not el.base]

    def reduced(self) -> list[dict]:
        """Reduced basis of the submodule generated by the non-base elements."""
        candidates = self.nonbase()
        keep: list[_Element] = []
        for i, el in enumerate(candidates):
            redundant = False
            for j, other in enumerate(self.elements):
                if other is el or other.comp != el.comp:
                    continue
                if mono_divides(other.lead, el.lead):
                    if other.lead != el.lead or other.base or self.elements.index(other) < self.elements.index(el):
                        redundant = True
                        break
            if not redundant:
                keep.append(el)
        tail = GroebnerBasis(self.ring, self.degrees, self.ideal)
        out = []
        for el in keep:
            others = [e for e in keep if e is not el]
            tail.elements = tail.elements[: len(self.degrees) * len(self.ideal)] + others
            head = {(el.comp, el.lead): 1}
            rest = {t: c for t, c in el.vector.items() if t != (el.comp, el.lead)}
            out.append(vadd_into(head, tail.normal_form(rest), self.p))
        out.sort(key=lambda v: self.key(self.lead_term(v)))
        return out

    def verify_closure(self) -> bool:
        """Every S-pair of the current basis reduces to zero."""
        els = self.elements
        for i in range(len(els)):
            for j in range(i + 1, len(els)):
                a, b = els[i], els[j]
                if a.comp != b.comp or (a.base and b.base):
                    continue
                lcm = mono_lcm(a.lead, b.lead)
                s = vadd_into({}, a.vector, self.p, 1, mono_div(lcm, a.lead))
                vadd_into(s, b.vector, self.p, -1, mono_div(lcm, b.lead))
                if self.normal_form(s):
                    return False
        return True


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------
def buchberger(gens: Sequence[dict], ring: PolynomialRing, degrees: Sequence[int] = (0,)) -> list[dict]:
    """Reduced Gröbner basis of the submodule of P^r generated by ``gens``."""
    gb = GroebnerBasis(ring, degrees)
    gb.add_generators([g for g in gens if g])
    gb.complete()
    return gb.reduced()


def ideal_basis(gens: Sequence[dict], ring: PolynomialRing) -> list[dict]:
    """Reduced Gröbner basis of an ideal, as polynomial dicts."""
    for g in gens:
        if not ring.is_homogeneous(g):
            raise InhomogeneousInput(f"Ideal generator {ring.format(g)} is not homogeneous")
    vectors = [{(0, m): c for m, c in g.items()} for g in gens if g]
    return [{m: c for (_, m), c in v.items()} for v in buchberger(vectors, ring)]


def normal_form(f: dict, gb: GroebnerBasis) -> dict:
    return gb.normal_form(f)


def syzygy_module(
    gens: Sequence[dict],
    ring: PolynomialRing,
    degrees: Sequence[int],
    ideal: Sequence[dict] = (),
    source_degrees: Sequence[int] | None = None,
) -> list[dict]:
    """Generators of {a : sum a_i gens_i in I*F}, unminimized, in P^s."""
    gb = GroebnerBasis(ring, degrees, ideal, track=True)
    if source_degrees is None:
        source_degrees = [gb.vector_degree(g) if g else 0 for g in gens]
    gb.add_generators(list(gens), list(source_degrees))
    gb.complete()
    return gb.syzygies
