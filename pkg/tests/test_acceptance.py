"""Acceptance gate: end-to-end checks with pinned tolerances.

Each test pins the quantitative bar the package must clear: exact null-space
counts, field invisibility bounds, exact-arithmetic identities, finite
difference convergence rates, discrete uniqueness margins, fit quality, and
report determinism.
"""

import json
import time
from fractions import Fraction

import numpy as np
import pytest

from eigentomo.cli import main
from eigentomo.fields import Grid3, divergence_fd, max_traction
from eigentomo.imagefit import BinaryTarget, combined_generator, fit_target
from eigentomo.nullspace import (
    NullGenerator,
    analytic_divergence,
    assemble_constraints,
    coeffs_from_generator,
    eval_strain,
    eval_stress,
    null_basis,
    separable_null_basis,
)
from eigentomo.polynomial import Poly
from eigentomo.poorly import (
    conversion_remainder,
    convert_u_to_spw,
    equilibrium_residuals,
    is_poorly,
    lie_bracket,
    mixed_second_derivatives,
    random_param_u,
    tau_from_spw,
    tau_from_u,
)
from eigentomo.recovery import (
    RecoveryProblem,
    assemble_shear_recovery,
    far_face_residuals,
    recover_diagonal_from_shear,
    solve_shear_recovery,
)
from eigentomo.reduction import (
    PolyEigenstrain,
    diagonal_eigenstrain,
    diagonalize,
    isotropic_certificate,
    random_eigenstrain,
    sym_gradient,
)

RATE_WINDOW = (1.7, 2.3)


def potential_for(N, column=0, basis=None):
    if basis is None:
        basis = separable_null_basis(N)
    return coeffs_from_generator(NullGenerator.from_flat(N, basis[:, column]))


def padded_potential(N_small, N_big, column):
    """Null generator of the small family embedded in the larger index range.

    Zero padding preserves every per-line constraint sum, so the embedded
    vector is a genuine null generator of the larger system; its frequency
    content stays resolvable on the convergence-study grids.
    """
    small = separable_null_basis(N_small)[:, column].reshape((N_small,) * 3, order="F")
    big = np.zeros((N_big,) * 3)
    big[:N_small, :N_small, :N_small] = small
    system = assemble_constraints(N_big)
    assert np.max(np.abs(system.matrix @ big.ravel(order="F"))) <= 1e-12
    return coeffs_from_generator(NullGenerator(N_big, big))


def observed_order(values):
    # order across the endpoints of a 3-level, factor-2 refinement study
    return float(np.log2(values[0] / values[-1]) / (len(values) - 1))


def fd_divergence_order(pot, ms=(17, 33, 65)):
    vals = [divergence_fd(eval_stress(pot, Grid3(m))).max_abs() for m in ms]
    return observed_order(vals)


def test_null_space_dimension_formula():
    start = time.perf_counter()
    for N in range(2, 9):
        basis = null_basis(assemble_constraints(N))
        assert basis.shape == (N**3, (N - 1) ** 3)
    assert time.perf_counter() - start < 5.0


def test_every_basis_field_is_invisible_in_equilibrium():
    grid = Grid3(33)
    for N in (2, 8):
        basis = separable_null_basis(N)
        assert basis.shape[1] == (N - 1) ** 3
        for column in range(basis.shape[1]):
            pot = potential_for(N, column, basis)
            eps = eval_strain(pot, grid)
            assert np.max(np.abs(eps.component("22"))) <= 1e-10
            assert np.max(np.abs(eps.component("33"))) <= 1e-10
            assert max_traction(eval_stress(pot, grid)) <= 1e-10
            assert analytic_divergence(pot, grid).max_abs() <= 1e-12


def test_fd_divergence_vanishes_at_second_order():
    # rate checks need the field resolved on the coarsest grid, so the
    # representatives are the N=2 field and low-frequency members of the
    # N=8 family (high-frequency columns sit at the coarse-grid Nyquist
    # limit and have no meaningful finite difference rate there)
    assert RATE_WINDOW[0] <= fd_divergence_order(potential_for(2)) <= RATE_WINDOW[1]
    for column in (0, 13, 26):
        order = fd_divergence_order(padded_potential(4, 8, column))
        assert RATE_WINDOW[0] <= order <= RATE_WINDOW[1]


def test_reduction_is_exact_and_matches_reference_display():
    start = time.perf_counter()
    for seed in range(100):
        eps = random_eigenstrain(np.random.default_rng(seed), max_degree=4)
        r = diagonalize(eps)
        d = diagonal_eigenstrain(r.e)
        g = sym_gradient(r.u)
        total = PolyEigenstrain(tuple(a + b for a, b in zip(d.comps, g.comps)))
        assert (eps - total).is_zero()
    eps = PolyEigenstrain.from_components({"12": Poly({(2, 0, 1): Fraction(-1, 2)})})
    r = diagonalize(eps)
    assert r.u[0] == Poly({(2, 1, 1): Fraction(-1, 2)})
    assert r.u[1] == Poly({(3, 0, 1): Fraction(-1, 6)})
    assert r.u[2] == Poly({(3, 1, 0): Fraction(1, 6)})
    assert r.e[0] == Poly.monomial((1, 1, 1))
    assert r.e[1].is_zero and r.e[2].is_zero
    assert time.perf_counter() - start < 10.0


def test_certificate_separates_scalar_representable_inputs():
    eps = PolyEigenstrain.from_components({"12": Poly({(2, 0, 1): Fraction(-1, 2)})})
    cert = isotropic_certificate(eps, degree_bound=6)
    assert not cert.feasible
    assert cert.residual > 0
    assert cert.residual == Fraction(2, 135)

    s = Poly({(1, 1, 0): Fraction(2, 3), (0, 0, 2): Fraction(-1)})
    scalar = diagonal_eigenstrain((s, s, s))
    cert = isotropic_certificate(scalar, degree_bound=2)
    assert cert.feasible and cert.residual == 0

    rng = np.random.default_rng(12)
    u = tuple(random_eigenstrain(rng, max_degree=3).component("11") for _ in range(3))
    grad = sym_gradient(u)
    cert = isotropic_certificate(grad, degree_bound=max(1, grad.degree()))
    assert cert.feasible and cert.residual == 0


def test_shear_only_solution_suite():
    start = time.perf_counter()
    for seed in range(50):
        params = random_param_u(np.random.default_rng(seed), max_degree=5)
        tau = tau_from_u(params)
        assert all(r.is_zero for r in equilibrium_residuals(tau))
        assert all(r.is_zero for r in mixed_second_derivatives(tau))
        split = tau_from_spw(convert_u_to_spw(params))
        rem = conversion_remainder(params)
        assert tau[0] - split[0] == rem
        assert tau[1] == split[1] and tau[2] == split[2]
        assert is_poorly(tau)[0]
    assert time.perf_counter() - start < 10.0


@pytest.mark.xfail(
    strict=True,
    reason="the class is not closed under the Lie bracket; "
    "tau(U3=x1x2) and tau(U2=x1^2) have a bracket with symmetrized "
    "off-diagonal derivative -4",
)
def test_bracket_of_solution_pairs_stays_in_class():
    from eigentomo.poorly import PoorlyParamU

    x1, x2 = Poly.variable(0), Poly.variable(1)
    pairs = [
        (
            tau_from_u(PoorlyParamU(Poly.zero(), Poly.zero(), x1 * x2)),
            tau_from_u(PoorlyParamU(Poly.zero(), x1 * x1, Poly.zero())),
        )
    ]
    for seed in range(50):
        rng = np.random.default_rng(seed)
        pairs.append(
            (
                tau_from_u(random_param_u(rng, max_degree=3)),
                tau_from_u(random_param_u(rng, max_degree=3)),
            )
        )
    for x, y in pairs:
        assert is_poorly(lie_bracket(x, y))[0]


def test_diagonal_recovery_accuracy_and_rates():
    pot = potential_for(2)
    grid = Grid3(17)
    field = eval_stress(pot, grid)
    problem = RecoveryProblem(grid=grid, known=field, source=pot)
    rec = recover_diagonal_from_shear(problem, path="analytic")
    for idx in range(3):
        err = np.linalg.norm(rec.data[idx] - field.data[idx]) / np.linalg.norm(field.data[idx])
        assert err <= 1e-10
    assert max(far_face_residuals(rec).values()) <= 1e-9

    errs = []
    for m in (17, 33, 65):
        g = Grid3(m)
        truth = eval_stress(pot, g)
        p = RecoveryProblem(grid=g, known=truth)
        out = recover_diagonal_from_shear(p, path="grid")
        errs.append(np.linalg.norm(out.data[:3] - truth.data[:3]) / np.linalg.norm(truth.data[:3]))
    assert RATE_WINDOW[0] <= observed_order(errs) <= RATE_WINDOW[1]


def test_shear_recovery_uniqueness_and_convergence():
    pot = potential_for(2)
    g9 = Grid3(9)
    p9 = RecoveryProblem(grid=g9, known=eval_stress(pot, g9), source=pot)
    op9 = assemble_shear_recovery(p9, boundary_mode="dirichlet")
    sol9 = solve_shear_recovery(op9, compute_min_singular="always")
    assert sol9.min_singular_value_rel > 1e-8

    errs = []
    start = time.perf_counter()
    for m in (9, 17, 33):
        g = Grid3(m)
        truth = eval_stress(pot, g)
        problem = RecoveryProblem(grid=g, known=truth, source=pot)
        op = assemble_shear_recovery(problem, boundary_mode="dirichlet")
        tick = time.perf_counter()
        sol = solve_shear_recovery(op, compute_min_singular="never")
        if m == 33:
            assert time.perf_counter() - tick < 120.0
        errs.append(np.linalg.norm(sol.tau - truth.tau) / np.linalg.norm(truth.tau))
    assert RATE_WINDOW[0] <= observed_order(errs) <= RATE_WINDOW[1]
    assert time.perf_counter() - start < 300.0


def test_image_fit_improves_with_family_size_and_stays_invisible():
    target = BinaryTarget.checkerboard(cells=16, resolution=64)
    rms = {}
    fits = {}
    for N in (2, 4, 8):
        basis = separable_null_basis(N)
        fit = fit_target(target, basis, N)
        rms[N] = fit.rms_residual
        fits[N] = (basis, fit)
    assert rms[4] < rms[2]
    assert rms[8] < rms[4]

    basis, fit = fits[8]
    pot = coeffs_from_generator(combined_generator(basis, fit.coefficients, 8))
    grid = Grid3(33)
    eps = eval_strain(pot, grid)
    scale = max(1.0, float(np.max(np.abs(eval_stress(pot, grid).data))))
    assert np.max(np.abs(eps.component("22"))) <= 1e-10 * scale
    assert np.max(np.abs(eps.component("33"))) <= 1e-10 * scale
    assert max_traction(eval_stress(pot, grid)) <= 1e-10 * scale
    assert analytic_divergence(pot, grid).max_abs() <= 1e-12 * scale


def test_cli_reports_are_byte_identical(tmp_path):
    runs = {
        "verify": ["verify", "--N", "2", "--m", "17"],
        "fit": ["fit", "--target", "disk", "--N", "4"],
        "recover": ["recover", "--mode", "shear-from-diagonal", "--N", "2", "--m", "9"],
        "nullbasis": ["nullbasis", "--N", "4"],
    }
    for name, argv in runs.items():
        a = tmp_path / f"{name}-a.json"
        b = tmp_path / f"{name}-b.json"
        for out in (a, b):
            rc = main([*argv, "--out", str(out)])
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()
        json.loads(a.read_text())  # reports stay valid JSON
