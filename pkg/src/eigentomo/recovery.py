"""Constructive recovery of missing stress components from measured ones.

Two directions, both for fields on the cube [0, 2pi]^3 with traction-free
faces in the relevant components:

* diagonal from shears: equilibrium gives d1 s11 = -(d2 s12 + d3 s13) with
  s11 = 0 on the face x1 = 0, so s11 is a line integral of known data; same
  for s22 and s33 by cyclic rotation.  The value produced on the far face
  x1 = 2pi must vanish again; its size is a consistency check on the input.

* shears from diagonals: the three equilibrium equations are a first-order
  system for (s23, s13, s12) with the diagonal derivatives as sources.  The
  system is discretised with second-order finite differences and solved in
  the least-squares sense; boundary rows select the solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid
from scipy.sparse.linalg import lsmr

from .fields import Grid3, SymTensorField3
from .nullspace import CosinePotential, eval_mode_sum, eval_stress_component

RECOVERY_MODES = ("diagonal-from-shear", "shear-from-diagonal")
BOUNDARY_MODES = ("dirichlet", "traction")

#: shear components (s23, s13, s12) pinned per face axis in traction mode;
#: these are exactly the components entering that face's traction vector.
TRACTION_COMPS = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


class RecoveryConsistencyError(Exception):
    """Input data is not consistent with a traction-free equilibrium field."""


class RankDeficiencyError(Exception):
    """The discrete operator lost the injectivity the continuous problem has."""


@dataclass(frozen=True)
class RecoveryProblem:
    """A grid, the measured components, and optionally their analytic source.

    ``known`` carries the measured data; which components are read depends on
    the direction.  When ``source`` is given, analytic paths evaluate exact
    derivatives from the cosine coefficients instead of differencing data.
    """

    grid: Grid3
    known: SymTensorField3
    source: Optional[CosinePotential] = None

    def __post_init__(self):
        if self.known.data.shape[1:] != self.grid.shape:
            raise ValueError("known field does not match grid")


def far_face_residuals(field: SymTensorField3) -> dict:
    """Max |s_ii| on the far face x_i = 2pi, for i = 1, 2, 3."""
    out = {}
    for axis, name in enumerate(("11", "22", "33")):
        comp = field.component(name)
        out[name] = float(np.max(np.abs(np.take(comp, -1, axis=axis))))
    return out


def _default_far_face_tol(problem: RecoveryProblem, path: str) -> float:
    if path == "analytic":
        return 1e-9
    h = problem.grid.h
    return 10.0 * h * h


def recover_diagonal_from_shear(
    problem: RecoveryProblem,
    path: Optional[str] = None,
    far_face_tol: Optional[float] = None,
) -> SymTensorField3:
    """Reconstruct (s11, s22, s33) from the shear components by line integrals.

    path "analytic" uses the cosine coefficients of ``problem.source``; the
    antiderivative of each mode is closed-form and the result is exact up to
    rounding.  path "grid" differentiates the sampled shears with one-sided
    second-order differences and integrates with the trapezoid rule, which is
    second-order accurate.  Default path is analytic when a source is present.

    The reconstruction pins s_ii = 0 on the near face x_i = 0.  If the far
    face value exceeds ``far_face_tol`` (default 1e-9 analytic, 10 h^2 on
    the grid) the input cannot come from a traction-free equilibrium field
    and RecoveryConsistencyError is raised.

    Returns a full stress field: reconstructed diagonal, input shears.
    """
    if path is None:
        path = "analytic" if problem.source is not None else "grid"
    if path not in ("analytic", "grid"):
        raise ValueError(f"unknown path {path!r}")
    grid = problem.grid
    out = SymTensorField3.zeros(grid)
    out.data[3:] = problem.known.data[3:]

    if path == "analytic":
        pot = problem.source
        if pot is None:
            raise ValueError("analytic path needs a source potential")
        sq = np.arange(1, pot.N + 1, dtype=float) ** 2
        a1, a2, a3 = pot.a
        # minus the diagonal mode coefficients; these multiply
        # (1 - cos(n x_i)) in the reconstructed component
        gains = (
            sq[None, :, None] * a3 + sq[None, None, :] * a2,
            sq[:, None, None] * a3 + sq[None, None, :] * a1,
            sq[:, None, None] * a2 + sq[None, :, None] * a1,
        )
        kinds_by_axis = (("one", "cos", "cos"), ("cos", "one", "cos"), ("cos", "cos", "one"))
        for axis, (gain, kinds) in enumerate(zip(gains, kinds_by_axis)):
            full = eval_mode_sum(gain, grid, ("cos", "cos", "cos"), (0, 0, 0))
            plateau = eval_mode_sum(gain, grid, kinds, (0, 0, 0))
            out.data[axis] = plateau - full
    else:
        h = grid.h
        tau = problem.known
        plans = (
            ("12", 1, "13", 2, 0),
            ("12", 0, "23", 2, 1),
            ("13", 0, "23", 1, 2),
        )
        for comp_a, ax_a, comp_b, ax_b, axis in plans:
            integrand = -(
                np.gradient(tau.component(comp_a), h, axis=ax_a, edge_order=2)
                + np.gradient(tau.component(comp_b), h, axis=ax_b, edge_order=2)
            )
            out.data[axis] = cumulative_trapezoid(integrand, dx=h, axis=axis, initial=0.0)

    residuals = far_face_residuals(out)
    tol = far_face_tol if far_face_tol is not None else _default_far_face_tol(problem, path)
    worst = max(residuals.values())
    if worst > tol:
        raise RecoveryConsistencyError(
            f"far-face residuals {residuals} exceed tolerance {tol:g}; "
            "input is not a traction-free equilibrium field"
        )
    return out


# ---------------------------------------------------------------------------
# shears from diagonals


def _derivative_matrix(m: int, h: float) -> sp.csr_matrix:
    """Second-order first-derivative matrix on m uniform nodes.

    Central differences inside, one-sided three-point stencils at both ends;
    identical to np.gradient with edge_order=2.
    """
    rows, cols, vals = [], [], []
    for i in range(1, m - 1):
        rows += [i, i]
        cols += [i - 1, i + 1]
        vals += [-0.5 / h, 0.5 / h]
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [-1.5 / h, 2.0 / h, -0.5 / h]
    rows += [m - 1, m - 1, m - 1]
    cols += [m - 1, m - 2, m - 3]
    vals += [1.5 / h, -2.0 / h, 0.5 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def _axis_derivative(m: int, h: float, axis: int) -> sp.csr_matrix:
    d = _derivative_matrix(m, h)
    eye = sp.identity(m, format="csr")
    if axis == 0:
        return sp.kron(d, sp.kron(eye, eye), format="csr")
    if axis == 1:
        return sp.kron(eye, sp.kron(d, eye), format="csr")
    return sp.kron(sp.kron(eye, eye), d, format="csr")


@dataclass(frozen=True)
class DiscreteOperator:
    """Assembled least-squares system A x = b for the shear triple.

    Unknown layout: x = (s23, s13, s12), each flattened in C order, so
    column comp * m^3 + flat(node).  Equilibrium rows come first in node-major
    order (row 3*flat + equation), then boundary rows face by face.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: Grid3
    boundary_mode: str
    boundary_weight: float
    n_equilibrium_rows: int
    n_boundary_rows: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def assemble_shear_recovery(
    problem: RecoveryProblem,
    boundary_mode: str = "dirichlet",
    boundary_weight: Optional[float] = None,
) -> DiscreteOperator:
    """Discretise the equilibrium system for (s23, s13, s12).

    Equilibrium rows (one triple per node, node-major):

        d2 s12 + d3 s13 = -d1 s11
        d1 s12 + d3 s23 = -d2 s22
        d1 s13 + d2 s23 = -d3 s33

    Boundary rows pin shear values on the faces, scaled by
    ``boundary_weight`` (default 1/h so their influence tracks the
    equilibrium rows under refinement).  Mode "dirichlet" pins all three
    components on every face; the continuous problem with that data is
    uniquely solvable, and the smallest singular value of the operator
    measures how much of this survives discretisation.  Mode "traction" pins
    only the two components belonging to each face's traction vector, which
    is the data actually available when faces are traction-measured; use it
    to reconstruct fields whose full Dirichlet data is not known.

    Boundary values are sampled from ``problem.known``; the right-hand
    diagonal derivatives come from the analytic source when available.
    """
    if boundary_mode not in BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {boundary_mode!r}")
    grid = problem.grid
    m = grid.m
    if m < 9:
        raise ValueError(f"grid too coarse for recovery, need m >= 9, got {m}")
    h = grid.h
    n = m * m * m
    weight = (1.0 / h) if boundary_weight is None else float(boundary_weight)

    d_ax = [_axis_derivative(m, h, axis) for axis in range(3)]
    zero = sp.csr_matrix((n, n))
    eq_blocks = [
        sp.hstack([zero, d_ax[2], d_ax[1]], format="csr"),
        sp.hstack([d_ax[2], zero, d_ax[0]], format="csr"),
        sp.hstack([d_ax[1], d_ax[0], zero], format="csr"),
    ]
    equilibrium = sp.vstack(eq_blocks, format="csr")
    perm = (np.arange(3 * n) % 3) * n + np.arange(3 * n) // 3
    equilibrium = equilibrium[perm]

    if problem.source is not None:
        diag_derivs = [
            eval_stress_component(problem.source, grid, "11", (1, 0, 0)),
            eval_stress_component(problem.source, grid, "22", (0, 1, 0)),
            eval_stress_component(problem.source, grid, "33", (0, 0, 1)),
        ]
    else:
        diag_derivs = [
            np.gradient(problem.known.component(name), h, axis=axis, edge_order=2)
            for axis, name in enumerate(("11", "22", "33"))
        ]
    rhs_eq = np.empty(3 * n)
    for eq in range(3):
        rhs_eq[eq::3] = -diag_derivs[eq].reshape(-1)

    tau_names = ("23", "13", "12")
    b_rows, b_cols, b_vals, b_rhs = [], [], [], []
    row = 3 * n
    flat = np.arange(n).reshape(m, m, m)
    for axis in range(3):
        comps = (0, 1, 2) if boundary_mode == "dirichlet" else TRACTION_COMPS[axis]
        for side in (0, -1):
            for comp in comps:
                nodes = np.take(flat, side, axis=axis).reshape(-1)
                values = np.take(
                    problem.known.component(tau_names[comp]), side, axis=axis
                ).reshape(-1)
                count = nodes.size
                b_rows.append(np.arange(row, row + count))
                b_cols.append(comp * n + nodes)
                b_vals.append(np.full(count, weight))
                b_rhs.append(weight * values)
                row += count
    n_boundary = row - 3 * n
    boundary = sp.csr_matrix(
        (
            np.concatenate(b_vals),
            (np.concatenate(b_rows) - 3 * n, np.concatenate(b_cols)),
        ),
        shape=(n_boundary, 3 * n),
    )
    matrix = sp.vstack([equilibrium, boundary], format="csr")
    rhs = np.concatenate([rhs_eq, np.concatenate(b_rhs)])
    return DiscreteOperator(
        matrix=matrix,
        rhs=rhs,
        grid=grid,
        boundary_mode=boundary_mode,
        boundary_weight=weight,
        n_equilibrium_rows=3 * n,
        n_boundary_rows=n_boundary,
    )


@dataclass(frozen=True)
class ShearRecoveryResult:
    """Least-squares solution of a :class:`DiscreteOperator`.

    ``min_singular_value`` (and its ratio to the largest) is filled only when
    the normal matrix is small enough to decompose densely; ``None`` means
    not computed, not zero.
    """

    tau: np.ndarray
    residual_norm: float
    relative_residual: float
    min_singular_value: Optional[float]
    min_singular_value_rel: Optional[float]
    method: str
    iterations: Optional[int]

    def field(self) -> np.ndarray:
        return self.tau


#: above this unknown count the dense normal-matrix decomposition is refused
SV_DENSE_LIMIT = 4000


def min_singular_values(op: DiscreteOperator) -> tuple[float, float]:
    """Extreme singular values of the operator via its dense normal matrix.

    Costs O(n^3) memory n^2; guarded by SV_DENSE_LIMIT.
    """
    n = op.shape[1]
    if n > SV_DENSE_LIMIT:
        raise ValueError(
            f"operator with {n} unknowns too large for dense singular values"
        )
    normal = (op.matrix.T @ op.matrix).toarray()
    eigs = np.linalg.eigvalsh(normal)
    smin = float(np.sqrt(max(eigs[0], 0.0)))
    smax = float(np.sqrt(max(eigs[-1], 0.0)))
    return smin, smax


def solve_shear_recovery(
    op: DiscreteOperator,
    method: str = "lsmr",
    compute_min_singular: str = "auto",
    rank_tol: float = 1e-8,
    atol: float = 1e-12,
    maxiter: Optional[int] = None,
) -> ShearRecoveryResult:
    """Solve the assembled system and package diagnostics.

    method "lsmr" (iterative, deterministic) or "dense" (materialise and use
    np.linalg.lstsq; small grids only).  compute_min_singular: "auto"
    computes extreme singular values when the system is small enough,
    "always" insists (raising if too large), "never" skips.

    In dirichlet mode a computed relative smallest singular value below
    ``rank_tol`` raises RankDeficiencyError: the discretisation failed to
    inherit the uniqueness of the continuous problem and any solution
    returned from it would be arbitrary in the lost directions.  In traction
    mode the value is reported but not enforced.
    """
    if compute_min_singular not in ("auto", "always", "never"):
        raise ValueError(f"unknown option {compute_min_singular!r}")
    smin = smax = None
    if compute_min_singular == "always" or (
        compute_min_singular == "auto" and op.shape[1] <= SV_DENSE_LIMIT
    ):
        smin, smax = min_singular_values(op)
        if (
            op.boundary_mode == "dirichlet"
            and smax > 0
            and smin / smax < rank_tol
        ):
            raise RankDeficiencyError(
                f"relative smallest singular value {smin / smax:.3e} below "
                f"{rank_tol:g} in dirichlet mode"
            )

    if method == "lsmr":
        outcome = lsmr(op.matrix, op.rhs, atol=atol, btol=atol, conlim=1e12, maxiter=maxiter)
        x = outcome[0]
        iterations = int(outcome[2])
    elif method == "dense":
        if op.shape[0] * op.shape[1] > 5e7:
            raise ValueError("system too large for the dense method")
        x, *_ = np.linalg.lstsq(op.matrix.toarray(), op.rhs, rcond=None)
        iterations = None
    else:
        raise ValueError(f"unknown method {method!r}")

    residual = op.matrix @ x - op.rhs
    rnorm = float(np.linalg.norm(residual))
    bnorm = float(np.linalg.norm(op.rhs))
    m = op.grid.m
    return ShearRecoveryResult(
        tau=x.reshape(3, m, m, m),
        residual_norm=rnorm,
        relative_residual=rnorm / bnorm if bnorm > 0 else rnorm,
        min_singular_value=smin,
        min_singular_value_rel=(smin / smax) if (smin is not None and smax) else None,
        method=method,
        iterations=iterations,
    )
