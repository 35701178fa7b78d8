"""
Sparse multivariate polynomials over GF(p).

Polynomials are plain dicts ``{monomial: coefficient}`` with monomials as
exponent tuples; module vectors are dicts ``{(component, monomial): coeff}``.
The raw-dict helpers below are what the Gröbner engine and the module layer
work with; ``Polynomial`` wraps a dict with its ring for the public surface.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import galois

from core.config import settings
from core.errors import HomogeneityError, ParseError, RingMismatch

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


# ---------------------------------------------------------------------------
# Field elements
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int = settings.characteristic

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise RingMismatch(f"Field characteristics differ: {self.p} vs {other.p}")
            return other.value
        return int(other) % self.p

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.p)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other), self.p).inverse()

    def __pow__(self, n: int):
        return FieldElement(pow(self.value, n, self.p), self.p)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))


def inv(c: int, p: int) -> int:
    return pow(c, -1, p)


def signed(c: int, p: int) -> int:
    return c - p if c > p // 2 else c


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------
def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def mono_div(a: Monomial, b: Monomial) -> Monomial | None:
    """a / b when b divides a, else None."""
    out = []
    for x, y in zip(a, b):
        if x < y:
            return None
        out.append(x - y)
    return tuple(out)


def mono_divides(b: Monomial, a: Monomial) -> bool:
    return all(y <= x for x, y in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def mono_coprime(a: Monomial, b: Monomial) -> bool:
    return all(x == 0 or y == 0 for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Raw polynomial dicts
# ---------------------------------------------------------------------------
def padd(f: dict, g: dict, p: int, scale: int = 1) -> dict:
    out = dict(f)
    for m, c in g.items():
        v = (out.get(m, 0) + scale * c) % p
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pscale(f: dict, c: int, p: int) -> dict:
    c %= p
    if c == 0:
        return {}
    return {m: (v * c) % p for m, v in f.items()}


def pmul_term(f: dict, c: int, mono: Monomial, p: int) -> dict:
    c %= p
    if c == 0:
        return {}
    return {mono_mul(m, mono): (v * c) % p for m, v in f.items()}


def pmul(f: dict, g: dict, p: int) -> dict:
    out: dict = {}
    for m1, c1 in f.items():
        for m2, c2 in g.items():
            m = mono_mul(m1, m2)
            v = (out.get(m, 0) + c1 * c2) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


# ---------------------------------------------------------------------------
# Raw module vectors
# ---------------------------------------------------------------------------
def vadd_into(acc: dict, v: dict, p: int, coeff: int = 1, mono: Monomial | None = None) -> dict:
    """acc += coeff * mono * v, in place."""
    coeff %= p
    if coeff == 0:
        return acc
    for (k, m), c in v.items():
        key = (k, mono_mul(m, mono) if mono is not None else m)
        val = (acc.get(key, 0) + coeff * c) % p
        if val:
            acc[key] = val
        else:
            acc.pop(key, None)
    return acc


def vadd(u: dict, v: dict, p: int, coeff: int = 1) -> dict:
    return vadd_into(dict(u), v, p, coeff)


def vscale(v: dict, c: int, p: int) -> dict:
    c %= p
    if c == 0:
        return {}
    return {key: (val * c) % p for key, val in v.items()}


def vmul_poly(v: dict, f: dict, p: int) -> dict:
    out: dict = {}
    for m, c in f.items():
        vadd_into(out, v, p, c, m)
    return out


def components(v: dict) -> dict[int, dict]:
    out: dict[int, dict] = {}
    for (k, m), c in v.items():
        out.setdefault(k, {})[m] = c
    return out


def from_components(parts: dict[int, dict]) -> dict:
    return {(k, m): c for k, poly in parts.items() for m, c in poly.items() if c}


def reindex(v: dict, mapping) -> dict:
    """Move component k to mapping[k]; components mapped to None are dropped."""
    out = {}
    for (k, m), c in v.items():
        target = mapping[k] if not callable(mapping) else mapping(k)
        if target is not None:
            out[(target, m)] = c
    return out


# ---------------------------------------------------------------------------
# Polynomial ring
# ---------------------------------------------------------------------------
class PolynomialRing:
    """k[x_1..x_n] with positive integer weights and the degrevlex order."""

    def __init__(self, variables, weights=None, characteristic: int | None = None):
        self.variables = tuple(variables)
        self.nvars = len(self.variables)
        self.weights = tuple(weights) if weights is not None else (1,) * self.nvars
        if len(self.weights) != self.nvars or any(w <= 0 for w in self.weights):
            raise ParseError("Weights must be positive and match the variables")
        self.p = characteristic or settings.characteristic
        if not galois.is_prime(self.p):
            raise ParseError(f"Characteristic {self.p} is not prime")
        self.one: Monomial = (0,) * self.nvars
        self._degree_cache: dict = {}
        self._monomials_cache: dict = {}

    def __repr__(self):
        return f"PolynomialRing({', '.join(self.variables)}; char {self.p})"

    def degree(self, m: Monomial) -> int:
        d = self._degree_cache.get(m)
        if d is None:
            d = sum(w * e for w, e in zip(self.weights, m))
            self._degree_cache[m] = d
        return d

    def sort_key(self, m: Monomial) -> tuple:
        return (self.degree(m), tuple(-e for e in reversed(m)))

    def variable(self, i: int) -> Monomial:
        return tuple(1 if j == i else 0 for j in range(self.nvars))

    def monomials_of_degree(self, d: int) -> list[Monomial]:
        """All monomials of weighted degree d, largest first."""
        if d < 0:
            return []
        cached = self._monomials_cache.get(d)
        if cached is not None:
            return cached
        out: list[Monomial] = []

        def build(i: int, remaining: int, prefix: list[int]):
            if i == self.nvars - 1:
                if remaining % self.weights[i] == 0:
                    out.append(tuple(prefix + [remaining // self.weights[i]]))
                return
            for e in range(remaining // self.weights[i], -1, -1):
                build(i + 1, remaining - e * self.weights[i], prefix + [e])

        if self.nvars == 0:
            out = [()] if d == 0 else []
        else:
            build(0, d, [])
        out.sort(key=self.sort_key, reverse=True)
        self._monomials_cache[d] = out
        return out

    # --- polynomial helpers on raw dicts ---
    def poly_degree(self, f: dict) -> int | None:
        if not f:
            return None
        return self.degree(next(iter(f)))

    def is_homogeneous(self, f: dict) -> bool:
        return len({self.degree(m) for m in f}) <= 1

    def leading_monomial(self, f: dict) -> Monomial:
        return max(f, key=self.sort_key)

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for name, e in zip(self.variables, m):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts)

    def format(self, f: dict) -> str:
        if not f:
            return "0"
        out = []
        for m in sorted(f, key=self.sort_key, reverse=True):
            c = signed(f[m], self.p)
            body = self.format_monomial(m)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            out.append((sign, text))
        first_sign, first = out[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, text in out[1:]:
            s += f" {sign} {text}"
        return s

    def parse(self, text: str) -> dict:
        """Parse an expression like ``x^2 - y*z`` or ``2xy`` into a raw dict."""
        return _parse_expression(text, self.variables, self.p)

    def polynomial(self, data) -> "Polynomial":
        if isinstance(data, str):
            return Polynomial(self, self.parse(data))
        return Polynomial(self, {m: c % self.p for m, c in dict(data).items() if c % self.p})


@lru_cache(maxsize=4096)
def _parse_cached(text: str, variables: tuple[str, ...], p: int) -> tuple:
    from sympy import Poly, Symbol
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication_application,
        parse_expr,
        standard_transformations,
    )

    symbols = {name: Symbol(name) for name in variables}
    transformations = standard_transformations + (implicit_multiplication_application, convert_xor)
    try:
        expr = parse_expr(text, local_dict=symbols, transformations=transformations, evaluate=True)
        poly = Poly(expr, *[symbols[v] for v in variables]) if variables else None
    except Exception as e:
        raise ParseError(f"Cannot parse expression '{text}': {e}") from e
    if poly is None:
        raise ParseError(f"Cannot parse expression '{text}' without variables")
    terms = []
    for exps, coeff in poly.terms():
        num, den = coeff.as_numer_denom()
        if not (num.is_Integer and den.is_Integer):
            raise ParseError(f"Non-rational coefficient {coeff} in '{text}'")
        den_mod = int(den) % p
        if den_mod == 0:
            raise ParseError(f"Denominator {den} vanishes modulo {p} in '{text}'")
        c = (int(num) * pow(den_mod, -1, p)) % p
        if c:
            terms.append((tuple(int(e) for e in exps), c))
    return tuple(terms)


def _parse_expression(text: str, variables: tuple[str, ...], p: int) -> dict:
    return dict(_parse_cached(text.strip(), tuple(variables), p))


# ---------------------------------------------------------------------------
# Public polynomial type
# ---------------------------------------------------------------------------
class Polynomial:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolynomialRing, terms: dict):
        self.ring = ring
        self.terms = {m: c for m, c in terms.items() if c % ring.p}

    def _check(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            raise TypeError(f"Expected Polynomial, got {type(other).__name__}")
        if other.ring is not self.ring and (
            other.ring.variables != self.ring.variables
            or other.ring.weights != self.ring.weights
            or other.ring.p != self.ring.p
        ):
            raise RingMismatch("Polynomials live in different rings")

    def __add__(self, other):
        self._check(other)
        return Polynomial(self.ring, padd(self.terms, other.terms, self.ring.p))

    def __sub__(self, other):
        self._check(other)
        return Polynomial(self.ring, padd(self.terms, other.terms, self.ring.p, -1))

    def __mul__(self, other):
        if isinstance(other, (int, FieldElement)):
            return Polynomial(self.ring, pscale(self.terms, int(other), self.ring.p))
        self._check(other)
        return Polynomial(self.ring, pmul(self.terms, other.terms, self.ring.p))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(self.ring, pscale(self.terms, -1, self.ring.p))

    def __pow__(self, n: int):
        result = Polynomial(self.ring, {self.ring.one: 1})
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        if isinstance(other, int):
            return self.terms == ({self.ring.one: other % self.ring.p} if other % self.ring.p else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list[tuple[Monomial, FieldElement]]:
        """Terms strictly descending in the monomial order."""
        return [
            (m, FieldElement(self.terms[m], self.ring.p))
            for m in sorted(self.terms, key=self.ring.sort_key, reverse=True)
        ]

    def leading_monomial(self) -> Monomial:
        return self.ring.leading_monomial(self.terms)

    def is_homogeneous(self) -> bool:
        return self.ring.is_homogeneous(self.terms)

    @property
    def degree(self) -> int | None:
        if not self.is_homogeneous():
            raise HomogeneityError(str(self))
        return self.ring.poly_degree(self.terms)

    def __str__(self):
        return self.ring.format(self.terms)

    def __repr__(self):
        return f"Polynomial({self})"


def monomial_compare(a: Monomial, b: Monomial, ring: PolynomialRing) -> int:
    """-1, 0 or 1 as a <, =, > b in degrevlex."""
    if len(a) != ring.nvars or len(b) != ring.nvars:
        raise RingMismatch(f"Monomials {a} and {b} do not have {ring.nvars} exponents")
    ka, kb = ring.sort_key(a), ring.sort_key(b)
    return (ka > kb) - (ka < kb)


def poly_arith(op: str, f: Polynomial, g: Polynomial | int | None = None) -> Polynomial:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "scalar":
        return f * int(g)
    raise ValueError(f"Unknown polynomial operation '{op}'")
