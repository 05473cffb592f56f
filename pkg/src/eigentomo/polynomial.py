"""Sparse multivariate polynomials over exact rationals.

Polynomials in the spatial coordinates (x1, x2, x3) are stored as a mapping
from exponent triples to :class:`fractions.Fraction` coefficients.  Every
operation is exact; nothing in this module rounds.  Axes are numbered 0, 1, 2
for x1, x2, x3.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

Exponents = tuple[int, int, int]

VAR_NAMES = ("x1", "x2", "x3")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational coefficient, got {type(value).__name__}")


class Poly:
    """Polynomial in (x1, x2, x3) with Fraction coefficients.

    Zero-coefficient terms are never stored, so two polynomials are equal
    exactly when their term dictionaries are equal.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Exponents, Fraction] | None = None):
        clean: dict[Exponents, Fraction] = {}
        if terms:
            for expo, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if not coeff:
                    continue
                e = (int(expo[0]), int(expo[1]), int(expo[2]))
                if min(e) < 0:
                    raise ValueError(f"negative exponent in {expo}")
                clean[e] = clean.get(e, Fraction(0)) + coeff
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def constant(cls, value) -> "Poly":
        return cls({(0, 0, 0): _as_fraction(value)})

    @classmethod
    def variable(cls, axis: int) -> "Poly":
        if axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1 or 2")
        e = [0, 0, 0]
        e[axis] = 1
        return cls({tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exponents: Iterable[int], coeff=1) -> "Poly":
        e = tuple(int(v) for v in exponents)
        return cls({e: _as_fraction(coeff)})

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            c0 = _as_fraction(other)
            if not c0:
                return Poly.zero()
            p = Poly.__new__(Poly)
            p.terms = {e: c * c0 for e, c in self.terms.items()}
            return p
        if isinstance(other, Poly):
            out: dict[Exponents, Fraction] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                    s = out.get(e, Fraction(0)) + c1 * c2
                    if s:
                        out[e] = s
                    else:
                        out.pop(e, None)
            p = Poly.__new__(Poly)
            p.terms = out
            return p
        return NotImplemented

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    # -- calculus ----------------------------------------------------------

    def diff(self, axis: int) -> "Poly":
        """Exact partial derivative along ``axis``."""
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            n = e[axis]
            if n == 0:
                continue
            d = list(e)
            d[axis] = n - 1
            out[tuple(d)] = c * n
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def antiderivative(self, axis: int) -> "Poly":
        """Antiderivative along ``axis`` with zero constant (base point 0)."""
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            d = list(e)
            d[axis] = e[axis] + 1
            out[tuple(d)] = c / (e[axis] + 1)
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def subs_zero(self, axis: int) -> "Poly":
        """Restrict to the hyperplane ``x_axis = 0``."""
        p = Poly.__new__(Poly)
        p.terms = {e: c for e, c in self.terms.items() if e[axis] == 0}
        return p

    # -- queries -----------------------------------------------------------

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def uses_axis(self, axis: int) -> bool:
        return any(e[axis] > 0 for e in self.terms)

    def coefficient(self, exponents: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(int(v) for v in exponents), Fraction(0))

    def __call__(self, x1, x2, x3):
        """Evaluate at a numeric point (float in, float out; Fractions stay exact)."""
        total = 0
        for (e1, e2, e3), c in self.terms.items():
            if isinstance(x1, Fraction) or isinstance(x2, Fraction) or isinstance(x3, Fraction):
                total += c * x1**e1 * x2**e2 * x3**e3
            else:
                total += float(c) * x1**e1 * x2**e2 * x3**e3
        return total

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list[dict]:
        """List of ``{"exponents": [e1, e2, e3], "coeff": "p/q"}`` entries.

        Entries are sorted by exponent triple so the output is reproducible.
        """
        return [
            {"exponents": list(e), "coeff": str(c)}
            for e, c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping]) -> "Poly":
        terms = {}
        for entry in data:
            e = tuple(int(v) for v in entry["exponents"])
            if len(e) != 3:
                raise ValueError(f"exponent triple expected, got {entry['exponents']!r}")
            terms[e] = Fraction(entry["coeff"])
        return cls(terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            factors = [str(c)]
            for axis, n in enumerate(e):
                if n == 1:
                    factors.append(VAR_NAMES[axis])
                elif n > 1:
                    factors.append(f"{VAR_NAMES[axis]}^{n}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Poly({self.terms!r})"


def check_degree_cap(p: Poly, cap: int = 12, what: str = "polynomial") -> None:
    """Reject inputs above the degree cap instead of truncating them."""
    if p.degree() > cap:
        raise ValueError(f"{what} has degree {p.degree()}, above the cap {cap}")


def random_polynomial(rng, max_degree: int, axes=(0, 1, 2), n_terms: int | None = None) -> Poly:
    """Seeded random polynomial with small rational coefficients.

    ``rng`` is a ``numpy.random.Generator``; only the listed axes get nonzero
    exponents.  Deterministic for a given generator state.
    """
    axes = tuple(axes)
    if n_terms is None:
        n_terms = int(rng.integers(1, 6))
    terms: dict[Exponents, Fraction] = {}
    for _ in range(n_terms):
        e = [0, 0, 0]
        degree = int(rng.integers(0, max_degree + 1))
        for _ in range(degree):
            e[axes[int(rng.integers(0, len(axes)))]] += 1
        num = int(rng.integers(-9, 10))
        den = int(rng.integers(1, 5))
        if num == 0:
            num = 1
        key = tuple(e)
        terms[key] = terms.get(key, Fraction(0)) + Fraction(num, den)
    return Poly(terms)
