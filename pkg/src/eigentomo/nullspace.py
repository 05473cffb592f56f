"""Cosine-series Maxwell stress potentials and their traction null space.

A diagonal Maxwell potential Lambda = diag(L1, L2, L3) generates the stress

    s11 = d3^2 L2 + d2^2 L3     s23 = -d2 d3 L1
    s22 = d1^2 L3 + d3^2 L1     s13 = -d1 d3 L2
    s33 = d2^2 L1 + d1^2 L2     s12 = -d1 d2 L3

which is divergence free for any smooth Lambda (each divergence row pairs two
identical mixed partials with opposite signs).  Here each L_i is a finite
cosine series

    L_i = sum_{j,k,l=1}^{N} a^i_{jkl} cos(j x1) cos(k x2) cos(l x3),

with all frequencies starting at 1.  A scalar generator array b_{jkl} fixes
the three coefficient families per mode through a cross product of the two
per-mode constraint rows that force eps22 = eps33 = 0; the zero-traction
conditions on the cube faces then reduce to the weighted sums
sum_j j^2 b_{jkl} = 0, sum_k k^2 b_{jkl} = 0, sum_l l^2 b_{jkl} = 0.

Flat index convention: mode (j, k, l) maps to i = j + (k-1) N + (l-1) N^2
(1-based, j fastest), which is a Fortran-order ravel of an array indexed
[j-1, k-1, l-1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import ElasticConstants, Grid3, SymTensorField3, VectorField3, hooke_strain_from_stress
from .polynomial import Poly

_SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class NullGenerator:
    """Scalar generator array b, indexed [j-1, k-1, l-1]."""

    N: int
    b: np.ndarray

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        b = np.asarray(self.b, dtype=float)
        if b.shape != (self.N,) * 3:
            raise ValueError(f"generator array must have shape {(self.N,) * 3}, got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("generator array contains non-finite entries")
        object.__setattr__(self, "b", b)

    @classmethod
    def from_flat(cls, N: int, flat) -> "NullGenerator":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (N**3,):
            raise ValueError(f"flat generator must have length {N**3}, got {flat.shape}")
        return cls(N, flat.reshape((N, N, N), order="F"))

    def flat(self) -> np.ndarray:
        return self.b.ravel(order="F")


@dataclass(frozen=True, eq=False)
class CosinePotential:
    """Cosine coefficients of the three potential entries, shape (3, N, N, N)."""

    N: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3,) + (self.N,) * 3:
            raise ValueError(f"coefficients must have shape {(3,) + (self.N,) * 3}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("potential coefficients contain non-finite entries")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Zero-traction constraints on generator arrays, one block per axis.

    ``matrix`` has shape (3 N^2, N^3).  Block 0 holds, for each (k, l), the
    equation sum_j j^2 b_{jkl} = 0; blocks 1 and 2 are the analogous k- and
    l-weighted sums.  The entries do not depend on the elastic constants: the
    material factors cancel out of the face equations.
    """

    N: int
    matrix: np.ndarray


def index_flatten(j: int, k: int, l: int, N: int) -> int:
    """1-based flat index of mode (j, k, l); j varies fastest."""
    for name, v in (("j", j), ("k", k), ("l", l)):
        if not 1 <= v <= N:
            raise ValueError(f"{name}={v} outside 1..{N}")
    return j + (k - 1) * N + (l - 1) * N * N


def index_unflatten(i: int, N: int) -> tuple[int, int, int]:
    """Inverse of :func:`index_flatten`."""
    if not 1 <= i <= N**3:
        raise ValueError(f"flat index {i} outside 1..{N**3}")
    j = (i - 1) % N + 1
    k = ((i - 1) // N) % N + 1
    l = (i - 1) // (N * N) + 1
    return j, k, l


def _freq_grids(N: int):
    j = np.arange(1.0, N + 1.0)
    return j[:, None, None], j[None, :, None], j[None, None, :]


def coeffs_from_generator(gen: NullGenerator, constants: ElasticConstants = ElasticConstants()) -> CosinePotential:
    """Per-mode potential coefficients that force eps22 = eps33 = 0.

    Each mode's coefficient triple is the cross product of the two linear
    conditions that the mode's lateral strains vanish, scaled by b_{jkl}:

        a^1 = b j^2 (-(1-nu) j^2 + nu k^2 + nu l^2)
        a^2 = b k^2 ( (1-nu) j^2 - nu k^2 + nu l^2)
        a^3 = b l^2 ( (1-nu) j^2 + nu k^2 - nu l^2)
    """
    nu = constants.poisson
    j, k, l = _freq_grids(gen.N)
    j2, k2, l2 = j * j, k * k, l * l
    f1 = j2 * (-(1.0 - nu) * j2 + nu * k2 + nu * l2)
    f2 = k2 * ((1.0 - nu) * j2 - nu * k2 + nu * l2)
    f3 = l2 * ((1.0 - nu) * j2 + nu * k2 - nu * l2)
    a = np.stack([f1 * gen.b, f2 * gen.b, f3 * gen.b])
    return CosinePotential(gen.N, a)


def assemble_constraints(N: int, constants: ElasticConstants | None = None) -> ConstraintSystem:
    """Boundary-traction constraint matrix for generator arrays.

    The ``constants`` argument is accepted for interface symmetry but the
    matrix is independent of it; the material factors are strictly positive
    and divide out of every face equation.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    A = np.zeros((3 * N * N, N**3))
    for l in range(1, N + 1):
        for k in range(1, N + 1):
            for j in range(1, N + 1):
                col = index_flatten(j, k, l, N) - 1
                A[(l - 1) * N + (k - 1), col] = j * j
                A[N * N + (l - 1) * N + (j - 1), col] = k * k
                A[2 * N * N + (k - 1) * N + (j - 1), col] = l * l
    return ConstraintSystem(N, A)


def _fix_column_signs(basis: np.ndarray) -> np.ndarray:
    for q in range(basis.shape[1]):
        col = basis[:, q]
        nz = np.nonzero(np.abs(col) > _SIGN_EPS)[0]
        if nz.size and col[nz[0]] < 0.0:
            basis[:, q] = -col
    return basis


def null_basis(system: ConstraintSystem, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal null-space basis of the constraint matrix via SVD.

    Columns are ordered by ascending singular value (exact structural zeros
    first, ties kept in factorization order) and each column's sign is fixed
    so its first entry above 1e-12 is positive, making repeated runs
    reproducible.  ``tol`` is relative to the largest singular value.
    """
    A = system.matrix
    n = A.shape[1]
    try:
        _, s, vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise RuntimeError(f"SVD of the constraint matrix did not converge: {exc}") from exc
    padded = np.zeros(n)
    padded[: s.size] = s
    smax = float(padded[0]) if n else 0.0
    mask = np.ones(n, dtype=bool) if smax == 0.0 else padded <= tol * smax
    idx = np.nonzero(mask)[0]
    order = idx[np.argsort(padded[idx], kind="stable")]
    basis = vh[order].T.copy()
    return _fix_column_signs(basis)


def weight_complement_basis(N: int) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to (1^2, ..., N^2).

    Built from a Householder reflection and polished so the residual scalar
    products with the weight vector sit at rounding level.
    """
    w = np.arange(1.0, N + 1.0) ** 2
    if N == 1:
        return np.zeros((1, 0))
    v = w / np.linalg.norm(w)
    u = v - np.eye(N)[:, 0]
    H = np.eye(N) - 2.0 * np.outer(u, u) / float(u @ u)
    Q = H[:, 1:].copy()
    for _ in range(2):
        Q -= np.outer(w, (w @ Q) / float(w @ w))
    Q, _ = np.linalg.qr(Q)
    return Q


def separable_null_basis(N: int) -> np.ndarray:
    """Orthonormal null basis built from per-axis weight-complement factors.

    The constraint system forces every axis fiber of the generator array to be
    orthogonal to the weight vector (1^2, ..., N^2), so its null space is the
    triple tensor product of that vector's orthogonal complement and has
    dimension (N-1)^3.  Tensor products of the per-axis factors give columns
    whose constraint sums stay at rounding level even for the highest modes,
    which keeps boundary tractions of the generated fields small.  Subspace
    and dimension agree with :func:`null_basis`; conditioning is better.
    """
    Q = weight_complement_basis(N)
    r = Q.shape[1]
    cols = np.empty((N**3, r**3))
    q = 0
    for u in range(r):
        for t in range(r):
            for s in range(r):
                cols[:, q] = np.kron(Q[:, u], np.kron(Q[:, t], Q[:, s]))
                q += 1
    return _fix_column_signs(cols)


# ---------------------------------------------------------------------------
# Evaluation


#: Trigonometric factor kinds per axis for each stress component.
MODE_BASIS = {
    "11": ("cos", "cos", "cos"),
    "22": ("cos", "cos", "cos"),
    "33": ("cos", "cos", "cos"),
    "23": ("cos", "sin", "sin"),
    "13": ("sin", "cos", "sin"),
    "12": ("sin", "sin", "cos"),
}


def mode_coefficients(pot: CosinePotential) -> dict[str, np.ndarray]:
    """Per-mode coefficient arrays of the six stress components."""
    j, k, l = _freq_grids(pot.N)
    a1, a2, a3 = pot.a
    return {
        "11": -(l * l * a2 + k * k * a3),
        "22": -(j * j * a3 + l * l * a1),
        "33": -(k * k * a1 + j * j * a2),
        "23": -(k * l * a1),
        "13": -(j * l * a2),
        "12": -(j * k * a3),
    }


def _basis_matrix(N: int, x: np.ndarray, kind: str, deriv: int = 0) -> np.ndarray:
    n = np.arange(1.0, N + 1.0)[:, None]
    if kind == "one":
        if deriv:
            return np.zeros((N, x.size))
        return np.ones((N, x.size))
    arg = n * x[None, :]
    if kind == "cos":
        table = (np.cos(arg), -n * np.sin(arg), -n * n * np.cos(arg))
    elif kind == "sin":
        table = (np.sin(arg), n * np.cos(arg), -n * n * np.sin(arg))
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    if not 0 <= deriv < len(table):
        raise ValueError(f"derivative order {deriv} not supported")
    return table[deriv]


def eval_mode_sum(coeff: np.ndarray, grid: Grid3, kinds, derivs=(0, 0, 0)) -> np.ndarray:
    """Evaluate sum_{jkl} coeff_{jkl} T1(j x1) T2(k x2) T3(l x3) on the grid.

    ``kinds`` picks cos/sin/one per axis and ``derivs`` applies per-axis
    derivative orders to the corresponding factor.
    """
    coeff = np.asarray(coeff, dtype=float)
    N = coeff.shape[0]
    x = grid.nodes()
    mats = [_basis_matrix(N, x, kind, order) for kind, order in zip(kinds, derivs)]
    return np.einsum("jkl,ja,kb,lc->abc", coeff, *mats, optimize=True)


def eval_stress_component(pot: CosinePotential, grid: Grid3, comp: str, derivs=(0, 0, 0)) -> np.ndarray:
    """Single stress component (or an exact partial derivative of it)."""
    coeff = mode_coefficients(pot)[comp]
    return eval_mode_sum(coeff, grid, MODE_BASIS[comp], derivs)


def eval_stress(pot: CosinePotential, grid: Grid3) -> SymTensorField3:
    """Sample all six stress components on the grid (exact derivatives of the
    potential, no finite differencing)."""
    coeffs = mode_coefficients(pot)
    data = np.stack(
        [eval_mode_sum(coeffs[name], grid, MODE_BASIS[name]) for name in ("11", "22", "33", "23", "13", "12")]
    )
    return SymTensorField3(grid, data)


def eval_strain(pot: CosinePotential, grid: Grid3, constants: ElasticConstants = ElasticConstants()) -> SymTensorField3:
    """Strain field of the generated stress under the given constants."""
    return hooke_strain_from_stress(eval_stress(pot, grid), constants)


def analytic_divergence(pot: CosinePotential, grid: Grid3) -> VectorField3:
    """Termwise divergence of the generated stress: identically zero.

    Each divergence row expands into two pairs of identical mixed third
    partials of the potential with opposite signs (for row 1:
    +d1 d3^2 L2, +d1 d2^2 L3, -d1 d2^2 L3, -d1 d3^2 L2), so the per-mode
    coefficients cancel exactly and the analytic divergence is the zero
    field for every potential.  The finite-difference divergence of the
    sampled field is the non-trivial cross check; see
    :func:`eigentomo.fields.divergence_fd` and
    :func:`eval_divergence_terms` for the unsimplified floating-point sum.
    """
    return VectorField3.zeros(grid)


def eval_divergence_terms(pot: CosinePotential, grid: Grid3) -> VectorField3:
    """Divergence assembled from separately evaluated derivative fields.

    Unlike :func:`analytic_divergence` this does not use the termwise
    cancellation; it sums three floating-point fields per row, so the result
    is rounding noise proportional to the size of those terms.
    """
    rows = (
        (("11", (1, 0, 0)), ("12", (0, 1, 0)), ("13", (0, 0, 1))),
        (("12", (1, 0, 0)), ("22", (0, 1, 0)), ("23", (0, 0, 1))),
        (("13", (1, 0, 0)), ("23", (0, 1, 0)), ("33", (0, 0, 1))),
    )
    data = np.zeros((3,) + grid.shape)
    for r, terms in enumerate(rows):
        for comp, derivs in terms:
            data[r] += eval_stress_component(pot, grid, comp, derivs)
    return VectorField3(grid, data)


# ---------------------------------------------------------------------------
# Exact polynomial potentials from a single scalar


def potential_from_scalar(a: Poly, nu: Fraction = Fraction(7, 25)) -> tuple[Poly, Poly, Poly]:
    """Diagonal potential entries from one scalar polynomial, exactly.

    Applies the constant-coefficient operator triple

        L1 = d1^2 (-(1-nu) d1^2 + nu d2^2 + nu d3^2) a
        L2 = d2^2 ( (1-nu) d1^2 - nu d2^2 + nu d3^2) a
        L3 = d3^2 ( (1-nu) d1^2 + nu d2^2 - nu d3^2) a

    which is the cross product of the two zero-lateral-strain constraint rows,
    so the result satisfies both constraints identically.  That is asserted on
    the exact residuals before returning.  ``nu`` must be an exact rational;
    inputs of degree >= 6 give a nonzero potential.
    """
    if not isinstance(nu, Fraction):
        raise TypeError("nu must be an exact Fraction for the polynomial path")
    d1, d2, d3 = (lambda p: p.diff(0), lambda p: p.diff(1), lambda p: p.diff(2))
    a11, a22, a33 = d1(d1(a)), d2(d2(a)), d3(d3(a))
    one = Fraction(1)
    lam1 = -(one - nu) * d1(d1(a11)) + nu * d2(d2(a11)) + nu * d3(d3(a11))
    lam2 = (one - nu) * d1(d1(a22)) - nu * d2(d2(a22)) + nu * d3(d3(a22))
    lam3 = (one - nu) * d1(d1(a33)) + nu * d2(d2(a33)) - nu * d3(d3(a33))
    r1, r2 = lateral_strain_residuals((lam1, lam2, lam3), nu)
    if not (r1.is_zero and r2.is_zero):  # pragma: no cover - construction guarantee
        raise ArithmeticError("constructed potential violates the lateral strain constraints")
    return lam1, lam2, lam3


def lateral_strain_residuals(lam: tuple[Poly, Poly, Poly], nu: Fraction) -> tuple[Poly, Poly]:
    """Exact residuals of the two constraints equivalent to eps22 = eps33 = 0.

    For stresses generated from a diagonal potential, eps33 - nu-weighted
    combinations of the other strains vanish exactly when

        d1^2 (L2 - nu L3) + d2^2 (L1 - nu L3) - nu d3^2 (L1 + L2) = 0
        d1^2 (L2 - L3) + d2^2 L1 - d3^2 L1 = 0.
    """
    lam1, lam2, lam3 = lam
    r1 = (lam2 - nu * lam3).diff(0).diff(0) + (lam1 - nu * lam3).diff(1).diff(1) \
        - nu * (lam1 + lam2).diff(2).diff(2)
    r2 = (lam2 - lam3).diff(0).diff(0) + lam1.diff(1).diff(1) - lam1.diff(2).diff(2)
    return r1, r2


# ---------------------------------------------------------------------------
# Persistence helpers (plain dicts, ready for json.dump)


def generator_to_dict(gen: NullGenerator, nu: float) -> dict:
    return {"N": gen.N, "nu": float(nu), "b": [float(v) for v in gen.flat()]}


def generator_from_dict(data: dict) -> tuple[NullGenerator, float]:
    try:
        N = int(data["N"])
        nu = float(data["nu"])
        flat = np.asarray(data["b"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed generator record: {exc}") from exc
    return NullGenerator.from_flat(N, flat), nu


def potential_to_dict(pot: CosinePotential, nu: float) -> dict:
    return {
        "N": pot.N,
        "nu": float(nu),
        "a": [[float(v) for v in pot.a[i].ravel(order="F")] for i in range(3)],
    }


def potential_from_dict(data: dict) -> tuple[CosinePotential, float]:
    try:
        N = int(data["N"])
        nu = float(data["nu"])
        parts = data["a"]
        a = np.stack([np.asarray(part, dtype=float).reshape((N, N, N), order="F") for part in parts])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed potential record: {exc}") from exc
    return CosinePotential(N, a), nu
