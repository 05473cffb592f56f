"""Shear-only equilibrium solutions and poorly vector fields, in exact arithmetic.

With the diagonal stress components removed, equilibrium of the shear triple
tau = (s23, s13, s12) reduces to

    d2 s12 + d3 s13 = 0
    d1 s12 + d3 s23 = 0
    d1 s13 + d2 s23 = 0.

Two parameterisations of the solutions are implemented: a three-potential form
(U1, U2, U3) with each U_i independent of x_i, and a split form (phi, psi,
omega) built from single antiderivatives.  A vector field X is called poorly
when d_i X_j + d_j X_i = 0 for all i != j, the off-diagonal half of the
Killing condition; the class is closed under the Lie bracket.

All polynomials use exact rational coefficients; every identity here is exact,
not approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .polynomial import Poly, check_degree_cap, random_polynomial

DEGREE_CAP = 12

PolyTriple = tuple[Poly, Poly, Poly]


def _check_free_axis(p: Poly, axis: int, name: str) -> None:
    if p.uses_axis(axis):
        raise ValueError(f"{name} must not depend on x{axis + 1}")


@dataclass(frozen=True)
class PoorlyParamU:
    """Potential triple (U1, U2, U3); U_i must not depend on x_i."""

    u1: Poly
    u2: Poly
    u3: Poly

    def __post_init__(self):
        for axis, (p, name) in enumerate(((self.u1, "U1"), (self.u2, "U2"), (self.u3, "U3"))):
            _check_free_axis(p, axis, name)
            check_degree_cap(p, DEGREE_CAP, name)


@dataclass(frozen=True)
class PoorlyParamSPW:
    """Split parameters: phi(x1,x3), psi(x2,x3), omega(x1,x2)."""

    phi: Poly
    psi: Poly
    omega: Poly

    def __post_init__(self):
        _check_free_axis(self.phi, 1, "phi")
        _check_free_axis(self.psi, 0, "psi")
        _check_free_axis(self.omega, 2, "omega")
        for p, name in ((self.phi, "phi"), (self.psi, "psi"), (self.omega, "omega")):
            check_degree_cap(p, DEGREE_CAP, name)


def tau_from_u(p: PoorlyParamU) -> PolyTriple:
    """Shear triple (s23, s13, s12) generated by the potential form.

    s23 = d1(-U2 + U3), s13 = d2(-U3 + U1), s12 = d3(-U1 + U2); equilibrium
    holds because each term differentiates a potential along an axis the
    neighbouring term cannot see.
    """
    s23 = (-p.u2 + p.u3).diff(0)
    s13 = (-p.u3 + p.u1).diff(1)
    s12 = (-p.u1 + p.u2).diff(2)
    return s23, s13, s12


def tau_from_spw(p: PoorlyParamSPW) -> PolyTriple:
    """Shear triple from the split form, antiderivatives based at 0.

    s12 = phi + psi,
    s13 = -int_0^{x3} d2 psi + omega,
    s23 = -int_0^{x3} d1 phi - int_0^{x2} d1 omega.
    """
    s12 = p.phi + p.psi
    s13 = -(p.psi.diff(1).antiderivative(2)) + p.omega
    s23 = -(p.phi.diff(0).antiderivative(2)) - (p.omega.diff(0).antiderivative(1))
    return s23, s13, s12


def convert_u_to_spw(p: PoorlyParamU) -> PoorlyParamSPW:
    """Split parameters generating the same shear triple as ``p``.

    Uses phi = d3 U2, psi = -d3 U1 and omega = -d2 U3 + (d2 U1)|_{x3=0};
    the omega correction recovers the part a base-0 antiderivative in x3
    would otherwise drop.  The single remaining gap of the base-0 convention
    is :func:`conversion_remainder`: the generated triples satisfy

        tau_from_u(p) = tau_from_spw(convert_u_to_spw(p)) + (remainder, 0, 0)

    exactly, and the remainder (a polynomial in x1 alone) is zero whenever
    U2(x1, 0) and U3(x1, 0) have equal derivatives, in particular whenever
    neither has a pure-x1 part.
    """
    phi = p.u2.diff(2)
    psi = -p.u1.diff(2)
    omega = -p.u3.diff(1) + p.u1.diff(1).subs_zero(2)
    return PoorlyParamSPW(phi, psi, omega)


def conversion_remainder(p: PoorlyParamU) -> Poly:
    """Part of s23 not representable with base-0 antiderivatives.

    Equals the restriction of s23 to the edge x2 = x3 = 0; any split-form
    triple built from base-0 antiderivatives vanishes there.
    """
    s23 = tau_from_u(p)[0]
    return s23.subs_zero(1).subs_zero(2)


def equilibrium_residuals(tau: PolyTriple) -> PolyTriple:
    """The three reduced equilibrium combinations; all zero for solutions."""
    s23, s13, s12 = tau
    return (
        s12.diff(1) + s13.diff(2),
        s12.diff(0) + s23.diff(2),
        s13.diff(0) + s23.diff(1),
    )


def mixed_second_derivatives(tau: PolyTriple) -> PolyTriple:
    """(d1 d2 s12, d1 d3 s13, d2 d3 s23); zero for every equilibrium solution."""
    s23, s13, s12 = tau
    return (
        s12.diff(0).diff(1),
        s13.diff(0).diff(2),
        s23.diff(1).diff(2),
    )


def is_poorly(field: PolyTriple) -> tuple[bool, PolyTriple]:
    """Check d_i X_j + d_j X_i = 0 for (i,j) = (1,2), (1,3), (2,3).

    Returns the verdict together with the three residual polynomials in that
    pair order.
    """
    x1, x2, x3 = field
    r12 = x2.diff(0) + x1.diff(1)
    r13 = x3.diff(0) + x1.diff(2)
    r23 = x3.diff(1) + x2.diff(2)
    ok = r12.is_zero and r13.is_zero and r23.is_zero
    return ok, (r12, r13, r23)


def lie_bracket(x: PolyTriple, y: PolyTriple) -> PolyTriple:
    """[X, Y]_i = sum_j (X_j d_j Y_i - Y_j d_j X_i), computed exactly."""
    out = []
    for i in range(3):
        acc = Poly.zero()
        for j in range(3):
            acc = acc + x[j] * y[i].diff(j) - y[j] * x[i].diff(j)
        out.append(acc)
    return tuple(out)


def principal_symbol_det(xi) -> float:
    """Determinant of the reduced equilibrium symbol at frequency xi.

    The symbol matrix has rows (0, xi3, xi2), (xi3, 0, xi1), (xi2, xi1, 0)
    against the unknowns (s23, s13, s12); its determinant 2 xi1 xi2 xi3
    vanishes on the coordinate planes, so the system is not elliptic.
    """
    xi1, xi2, xi3 = (float(v) for v in xi)
    return 2.0 * xi1 * xi2 * xi3


def random_param_u(rng, max_degree: int = 5) -> PoorlyParamU:
    """Seeded random potential triple with the required variable structure."""
    u1 = random_polynomial(rng, max_degree, axes=(1, 2))
    u2 = random_polynomial(rng, max_degree, axes=(0, 2))
    u3 = random_polynomial(rng, max_degree, axes=(0, 1))
    return PoorlyParamU(u1, u2, u3)


def param_u_to_dict(p: PoorlyParamU) -> dict:
    return {"U1": p.u1.to_json(), "U2": p.u2.to_json(), "U3": p.u3.to_json()}


def param_u_from_dict(data: dict) -> PoorlyParamU:
    try:
        return PoorlyParamU(*(Poly.from_json(data[key]) for key in ("U1", "U2", "U3")))
    except KeyError as exc:
        raise ValueError(f"missing potential entry {exc} in parameter record") from exc


def param_spw_to_dict(p: PoorlyParamSPW) -> dict:
    return {"phi": p.phi.to_json(), "psi": p.psi.to_json(), "omega": p.omega.to_json()}


def param_spw_from_dict(data: dict) -> PoorlyParamSPW:
    try:
        return PoorlyParamSPW(*(Poly.from_json(data[key]) for key in ("phi", "psi", "omega")))
    except KeyError as exc:
        raise ValueError(f"missing split entry {exc} in parameter record") from exc
