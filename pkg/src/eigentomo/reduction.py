"""Eigenstrain reduction: diagonalization and an isotropic feasibility certificate.

A symmetric polynomial eigenstrain eps can always be written as

    eps = diag(e1, e2, e3) + sym_grad(u)

with polynomial u; the gauge part sym_grad(u) produces no stress, so only the
diagonal survives as data.  :func:`diagonalize` constructs (e, u) exactly.
:func:`isotropic_certificate` decides, again exactly, whether eps admits the
more restrictive form s*I + sym_grad(u) with scalar s up to a given degree;
the answer can be negative even though the diagonal form always exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .polynomial import Poly, check_degree_cap, random_polynomial

DEGREE_CAP = 12

#: component order used throughout: two repeated indices then the shears
EIGENSTRAIN_COMPONENTS = ("11", "22", "33", "23", "13", "12")


@dataclass(frozen=True)
class PolyEigenstrain:
    """Symmetric second-order polynomial tensor, components in the order
    (11, 22, 33, 23, 13, 12)."""

    comps: tuple[Poly, Poly, Poly, Poly, Poly, Poly]

    def __post_init__(self):
        if len(self.comps) != 6:
            raise ValueError("eigenstrain needs 6 components")
        for name, p in zip(EIGENSTRAIN_COMPONENTS, self.comps):
            check_degree_cap(p, DEGREE_CAP, f"component {name}")

    @classmethod
    def zero(cls) -> "PolyEigenstrain":
        return cls(tuple(Poly.zero() for _ in range(6)))

    @classmethod
    def from_components(cls, mapping: dict) -> "PolyEigenstrain":
        comps = tuple(mapping.get(name, Poly.zero()) for name in EIGENSTRAIN_COMPONENTS)
        unknown = set(mapping) - set(EIGENSTRAIN_COMPONENTS)
        if unknown:
            raise ValueError(f"unknown eigenstrain components {sorted(unknown)}")
        return cls(comps)

    def component(self, name: str) -> Poly:
        return self.comps[EIGENSTRAIN_COMPONENTS.index(name)]

    def degree(self) -> int:
        return max(p.degree() for p in self.comps)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyEigenstrain) and self.comps == other.comps

    def __sub__(self, other: "PolyEigenstrain") -> "PolyEigenstrain":
        return PolyEigenstrain(tuple(a - b for a, b in zip(self.comps, other.comps)))

    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.comps)

    def to_json(self) -> dict:
        return {name: p.to_json() for name, p in zip(EIGENSTRAIN_COMPONENTS, self.comps)}

    @classmethod
    def from_json(cls, data: dict) -> "PolyEigenstrain":
        try:
            comps = tuple(Poly.from_json(data[name]) for name in EIGENSTRAIN_COMPONENTS)
        except KeyError as exc:
            raise ValueError(f"missing eigenstrain component {exc}") from exc
        return cls(comps)


def sym_gradient(u: tuple[Poly, Poly, Poly]) -> PolyEigenstrain:
    """Symmetric gradient of a polynomial vector field, as an eigenstrain."""
    half = Fraction(1, 2)
    return PolyEigenstrain(
        (
            u[0].diff(0),
            u[1].diff(1),
            u[2].diff(2),
            half * (u[1].diff(2) + u[2].diff(1)),
            half * (u[0].diff(2) + u[2].diff(0)),
            half * (u[0].diff(1) + u[1].diff(0)),
        )
    )


def diagonal_eigenstrain(e: tuple[Poly, Poly, Poly]) -> PolyEigenstrain:
    return PolyEigenstrain((e[0], e[1], e[2], Poly.zero(), Poly.zero(), Poly.zero()))


@dataclass(frozen=True)
class ReductionResult:
    """Exact decomposition eps = diag(e) + sym_grad(u)."""

    e: tuple[Poly, Poly, Poly]
    u: tuple[Poly, Poly, Poly]

    def to_json(self) -> dict:
        return {
            "e": [p.to_json() for p in self.e],
            "u": [p.to_json() for p in self.u],
        }


# Per shear component: (axes paired by the shear, complementary axis).
_SHEAR_PLAN = {
    "23": (1, 2, 0),
    "13": (0, 2, 1),
    "12": (0, 1, 2),
}


def diagonalize(eps: PolyEigenstrain) -> ReductionResult:
    """Remove the shear components of ``eps`` with an exact gauge field.

    Works monomial by monomial.  A shear term c * x^a in component (i, j)
    is absorbed by adding single antiderivatives to u_i and u_j; both pick up
    the term, so their symmetric combination doubles and a compensating term
    must go into u_k (k the remaining axis) whenever the monomial depends on
    x_k.  That third term is chosen so the two new shear pairs it creates
    cancel the unwanted ones exactly.  The diagonal remainder is then read
    off as e_i = eps_ii - d_i u_i.

    Returns polynomials with exact rational coefficients satisfying
    eps == diag(e) + sym_grad(u) identically.
    """
    u = [Poly.zero(), Poly.zero(), Poly.zero()]
    for name, (i, j, k) in _SHEAR_PLAN.items():
        shear = eps.component(name)
        for exps, coeff in shear.terms.items():
            ei = exps[i]
            ej = exps[j]
            ek = exps[k]
            # raise along j for u_i, along i for u_j
            exps_i = list(exps)
            exps_i[j] += 1
            u[i] = u[i] + Poly.monomial(tuple(exps_i), coeff * Fraction(1, ej + 1))
            exps_j = list(exps)
            exps_j[i] += 1
            u[j] = u[j] + Poly.monomial(tuple(exps_j), coeff * Fraction(1, ei + 1))
            if ek >= 1:
                exps_k = list(exps)
                exps_k[i] += 1
                exps_k[j] += 1
                exps_k[k] -= 1
                u[k] = u[k] + Poly.monomial(
                    tuple(exps_k), -coeff * Fraction(ek, (ei + 1) * (ej + 1))
                )
    e = tuple(eps.comps[i] - u[i].diff(i) for i in range(3))
    result = ReductionResult(e=e, u=tuple(u))
    gauge = sym_gradient(result.u)
    if not (eps - diagonal_eigenstrain(result.e) - gauge).is_zero():
        raise ArithmeticError("diagonalization identity failed")
    return result


def homogeneous_u(p) -> tuple[Poly, Poly, Poly]:
    """Gauge field with sym_grad(u) = 0 built from a shear potential triple.

    Takes a :class:`~eigentomo.poorly.PoorlyParamU`-like object with
    attributes u1, u2, u3 (U_i independent of x_i) and returns
    u_i = d_i (U_{i+1} - U_{i+2}), indices cyclic.  These are exactly the
    polynomial fields whose symmetric gradient is purely shear with zero
    diagonal, i.e. the gauge freedom left after diagonalization.
    """
    parts = (p.u1, p.u2, p.u3)
    out = []
    for i in range(3):
        out.append((parts[(i + 1) % 3] - parts[(i + 2) % 3]).diff(i))
    return tuple(out)


def random_eigenstrain(rng, max_degree: int = 4) -> PolyEigenstrain:
    """Seeded random symmetric polynomial tensor, all six components."""
    return PolyEigenstrain(tuple(random_polynomial(rng, max_degree) for _ in range(6)))


# ---------------------------------------------------------------------------
# isotropic feasibility certificate


@dataclass(frozen=True)
class IsotropicCertificate:
    """Outcome of the exact feasibility test for eps = s*I + sym_grad(u).

    ``residual`` is the exact squared distance (coefficient L2) between eps
    and the closest representable tensor with deg s <= degree_bound and
    deg u <= degree_bound + 1; feasible iff it is exactly zero.
    """

    feasible: bool
    residual: Fraction
    degree_bound: int

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "degree": self.degree_bound,
            "residual_rational": str(self.residual),
        }


def _monomials_of_degree(d: int):
    out = []
    for a in range(d + 1):
        for b in range(d - a + 1):
            out.append((a, b, d - a - b))
    return out


def _solve_normal_equations(gram: list[dict], rhs: list[Fraction]) -> list[Fraction]:
    """Solve G x = r exactly, G given as sparse symmetric rows.

    Free columns (no usable pivot) are set to zero; the system comes from
    normal equations so it is always consistent.
    """
    n = len(gram)
    rows = [dict(row) for row in gram]
    rhs = list(rhs)
    order = []
    for col in range(n):
        pivot = None
        for r in range(len(order), n):
            if rows[r].get(col):
                pivot = r
                break
        if pivot is None:
            continue
        r0 = len(order)
        rows[r0], rows[pivot] = rows[pivot], rows[r0]
        rhs[r0], rhs[pivot] = rhs[pivot], rhs[r0]
        base = rows[r0]
        pv = base[col]
        for r in range(r0 + 1, n):
            factor = rows[r].get(col)
            if not factor:
                continue
            scale = factor / pv
            row = rows[r]
            for c, v in base.items():
                acc = row.get(c, Fraction(0)) - scale * v
                if acc:
                    row[c] = acc
                else:
                    row.pop(c, None)
            rhs[r] -= scale * rhs[r0]
        order.append(col)
    x = [Fraction(0)] * n
    for r in range(len(order) - 1, -1, -1):
        col = order[r]
        acc = rhs[r]
        for c, v in rows[r].items():
            if c != col:
                acc -= v * x[c]
        x[col] = acc / rows[r][col]
    return x


def isotropic_certificate(eps: PolyEigenstrain, degree_bound: int) -> IsotropicCertificate:
    """Exact least-squares test of eps = s*I + sym_grad(u).

    The unknown coefficient spaces are scalars s of total degree at most
    ``degree_bound`` and vector fields u of degree at most ``degree_bound + 1``.
    Matching coefficients monomial by monomial decouples the problem into
    independent blocks per total degree; each block is solved exactly over
    the rationals via its normal equations, and the residuals accumulate
    into one exact scalar.  All target monomials of degree <= degree_bound
    are constrained, including those absent from eps.
    """
    if degree_bound < eps.degree():
        raise ValueError(
            f"degree bound {degree_bound} below eigenstrain degree {eps.degree()}"
        )
    half = Fraction(1, 2)
    total = Fraction(0)
    for d in range(degree_bound + 1):
        mons = _monomials_of_degree(d)
        mons_up = _monomials_of_degree(d + 1)
        index_s = {m: idx for idx, m in enumerate(mons)}
        index_u = {}
        pos = len(index_s)
        for i in range(3):
            for m in mons_up:
                index_u[(i, m)] = pos
                pos += 1
        n_unknowns = pos

        def raised(m, axis):
            lst = list(m)
            lst[axis] += 1
            return tuple(lst)

        rows = []
        rhs = []
        for m in mons:
            for i in range(3):
                row = {index_s[m]: Fraction(1)}
                key = (i, raised(m, i))
                row[index_u[key]] = row.get(index_u[key], Fraction(0)) + Fraction(m[i] + 1)
                rows.append(row)
                rhs.append(eps.comps[i].coefficient(m))
            for name, (i, j) in (("23", (1, 2)), ("13", (0, 2)), ("12", (0, 1))):
                row = {}
                ki = index_u[(j, raised(m, i))]
                row[ki] = row.get(ki, Fraction(0)) + half * (m[i] + 1)
                kj = index_u[(i, raised(m, j))]
                row[kj] = row.get(kj, Fraction(0)) + half * (m[j] + 1)
                rows.append(row)
                rhs.append(eps.component(name).coefficient(m))

        gram = [{} for _ in range(n_unknowns)]
        grhs = [Fraction(0)] * n_unknowns
        for row, beta in zip(rows, rhs):
            for ci, vi in row.items():
                if beta:
                    grhs[ci] += vi * beta
                bucket = gram[ci]
                for cj, vj in row.items():
                    acc = bucket.get(cj, Fraction(0)) + vi * vj
                    if acc:
                        bucket[cj] = acc
                    else:
                        bucket.pop(cj, None)
        x = _solve_normal_equations(gram, grhs)
        for row, beta in zip(rows, rhs):
            r = beta - sum(v * x[c] for c, v in row.items())
            if r:
                total += r * r
    return IsotropicCertificate(feasible=(total == 0), residual=total, degree_bound=degree_bound)
