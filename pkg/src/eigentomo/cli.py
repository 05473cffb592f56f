"""Command line interface.

Every command prints one JSON report to stdout with sorted keys and fixed
indentation, so identical invocations produce identical bytes.  ``--out``
writes the same report to a file; bulky artifacts (bases, fields, images)
have their own save flags.  Exit codes: 0 success, 1 a verification or
consistency check failed, 2 malformed input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fieldio
from .fields import (
    ElasticConstants,
    Grid3,
    divergence_fd,
    max_traction,
)
from .imagefit import BinaryTarget, combined_generator, fit_target, write_pgm
from .nullspace import (
    NullGenerator,
    analytic_divergence,
    assemble_constraints,
    coeffs_from_generator,
    eval_strain,
    eval_stress,
    generator_from_dict,
    generator_to_dict,
    null_basis,
    potential_from_dict,
    potential_to_dict,
    separable_null_basis,
)
from .poorly import (
    PoorlyParamU,
    conversion_remainder,
    convert_u_to_spw,
    equilibrium_residuals,
    is_poorly,
    mixed_second_derivatives,
    param_spw_to_dict,
    param_u_from_dict,
    param_u_to_dict,
    principal_symbol_det,
    random_param_u,
    tau_from_spw,
    tau_from_u,
)
from .recovery import (
    RankDeficiencyError,
    RecoveryConsistencyError,
    RecoveryProblem,
    assemble_shear_recovery,
    far_face_residuals,
    recover_diagonal_from_shear,
    solve_shear_recovery,
)
from .reduction import (
    PolyEigenstrain,
    diagonalize,
    isotropic_certificate,
    sym_gradient,
    diagonal_eigenstrain,
)

DEFAULT_SEED = 1234


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _constants(args) -> ElasticConstants:
    nu = args.nu if args.nu is not None else 0.28
    return ElasticConstants(young=args.E, poisson=nu)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON in {path}: {exc}") from exc


def _generator_from_args(args) -> tuple[NullGenerator, float]:
    """Generator from --generator file, else a separable basis column."""
    if getattr(args, "generator", None):
        gen, nu = generator_from_dict(_load_json(args.generator))
        if args.nu is not None:
            nu = args.nu
        return gen, nu
    basis = separable_null_basis(args.N)
    col = getattr(args, "column", 0)
    if not 0 <= col < basis.shape[1]:
        raise ValueError(f"column {col} out of range, basis has {basis.shape[1]} columns")
    nu = args.nu if args.nu is not None else 0.28
    return NullGenerator.from_flat(args.N, basis[:, col]), nu


def _field_checks(pot, grid, constants, tols):
    strain = eval_strain(pot, grid, constants)
    stress = eval_stress(pot, grid)
    div0 = analytic_divergence(pot, grid)
    div_fd = divergence_fd(stress)
    results = {
        "max_abs_eps22": float(np.max(np.abs(strain.component("22")))),
        "max_abs_eps33": float(np.max(np.abs(strain.component("33")))),
        "max_traction": max_traction(stress),
        "max_analytic_divergence": div0.max_abs(),
        "max_fd_divergence": div_fd.max_abs(),
    }
    checks = {
        "lateral_strain_ok": results["max_abs_eps22"] <= tols["strain"]
        and results["max_abs_eps33"] <= tols["strain"],
        "traction_ok": results["max_traction"] <= tols["traction"],
        "divergence_ok": results["max_analytic_divergence"] <= tols["divergence"],
    }
    return results, checks


def cmd_nullbasis(args) -> int:
    constants = _constants(args)
    if args.method == "svd":
        system = assemble_constraints(args.N, constants)
        basis = null_basis(system, tol=args.tol)
    else:
        basis = separable_null_basis(args.N)
    system = assemble_constraints(args.N, constants)
    residual = float(np.max(np.abs(system.matrix @ basis))) if basis.size else 0.0
    gram_gap = (
        float(np.max(np.abs(basis.T @ basis - np.eye(basis.shape[1]))))
        if basis.size
        else 0.0
    )
    expected = (args.N - 1) ** 3
    passed = basis.shape[1] == expected
    report = {
        "command": "nullbasis",
        "config": {
            "N": args.N,
            "nu": constants.poisson,
            "method": args.method,
            "tol": args.tol,
        },
        "results": {
            "dimension": basis.shape[1],
            "expected_dimension": expected,
            "max_constraint_residual": residual,
            "orthonormality_gap": gram_gap,
        },
        "passed": passed,
    }
    if args.save_basis:
        payload = {
            "N": args.N,
            "method": args.method,
            "basis": [[float(v) for v in rowv] for rowv in basis],
        }
        Path(args.save_basis).write_text(json.dumps(payload, sort_keys=True) + "\n")
    _emit(report, args.out)
    return 0 if passed else 1


def cmd_verify(args) -> int:
    # --potential bypasses the coefficient formula, so saved files with
    # perturbed coefficients genuinely fail the strain checks here
    if getattr(args, "potential", None):
        pot, nu = potential_from_dict(_load_json(args.potential))
        if args.nu is not None:
            nu = args.nu
        N = pot.N
    else:
        gen, nu = _generator_from_args(args)
        pot = coeffs_from_generator(gen, ElasticConstants(young=args.E, poisson=nu))
        N = gen.N
    constants = ElasticConstants(young=args.E, poisson=nu)
    grid = Grid3(args.m)
    tols = {
        "strain": args.tol_strain,
        "traction": args.tol_traction,
        "divergence": args.tol_div,
    }
    results, checks = _field_checks(pot, grid, constants, tols)
    passed = all(checks.values())
    report = {
        "command": "verify",
        "config": {
            "N": N,
            "nu": nu,
            "E": args.E,
            "m": args.m,
            "column": getattr(args, "column", 0),
            "potential": getattr(args, "potential", None),
            "tolerances": tols,
        },
        "results": results,
        "checks": checks,
        "passed": passed,
    }
    _emit(report, args.out)
    return 0 if passed else 1


def cmd_fit(args) -> int:
    constants = _constants(args)
    if args.image:
        path = Path(args.image)
        if path.suffix.lower() == ".pgm":
            target = BinaryTarget.from_pgm(path)
        else:
            target = BinaryTarget.from_csv(path)
        target_name = str(path)
    elif args.target == "disk":
        target = BinaryTarget.disk(resolution=args.resolution)
        target_name = "disk"
    else:
        target = BinaryTarget.checkerboard(cells=args.cells, resolution=args.resolution)
        target_name = "checkerboard"
    basis = separable_null_basis(args.N)
    result = fit_target(
        target, basis, args.N, args.resolution, args.slice_x3, constants
    )
    report = {
        "command": "fit",
        "config": {
            "N": args.N,
            "nu": constants.poisson,
            "resolution": args.resolution,
            "slice_x3": float(args.slice_x3),
            "target": target_name,
            "cells": args.cells,
        },
        "results": {
            "n_columns": basis.shape[1],
            "rms_residual": result.rms_residual,
            "max_abs_coefficient": float(np.max(np.abs(result.coefficients))),
        },
        "passed": True,
    }
    if args.save_pgm:
        write_pgm(result.fitted, args.save_pgm)
    if args.save_coefficients:
        gen = combined_generator(basis, result.coefficients, args.N)
        Path(args.save_coefficients).write_text(
            json.dumps(generator_to_dict(gen, constants.poisson), sort_keys=True) + "\n"
        )
    _emit(report, args.out)
    return 0


def cmd_reduce(args) -> int:
    data = _load_json(args.input)
    eps = PolyEigenstrain.from_json(data)
    result = diagonalize(eps)
    identity_ok = (
        eps - diagonal_eigenstrain(result.e) - sym_gradient(result.u)
    ).is_zero()
    report = {
        "command": "reduce",
        "config": {"input": args.input, "certificate_degree": args.certificate_degree},
        "results": {
            "input_degree": eps.degree(),
            "identity_ok": identity_ok,
            "reduction": result.to_json(),
        },
        "passed": identity_ok,
    }
    if args.certificate_degree is not None:
        cert = isotropic_certificate(eps, args.certificate_degree)
        report["results"]["certificate"] = cert.to_json()
    _emit(report, args.out)
    return 0 if identity_ok else 1


def cmd_recover(args) -> int:
    gen, nu = _generator_from_args(args)
    constants = ElasticConstants(young=args.E, poisson=nu)
    pot = coeffs_from_generator(gen, constants)
    grid = Grid3(args.m)
    stress = eval_stress(pot, grid)
    problem = RecoveryProblem(grid=grid, known=stress, source=pot)
    config = {
        "mode": args.mode,
        "N": gen.N,
        "nu": nu,
        "m": args.m,
        "column": getattr(args, "column", 0),
    }
    if args.mode == "diagonal-from-shear":
        config["path"] = args.path or ("analytic" if problem.source else "grid")
        try:
            recovered = recover_diagonal_from_shear(problem, path=args.path)
        except RecoveryConsistencyError as exc:
            report = {
                "command": "recover",
                "config": config,
                "results": {"error": str(exc)},
                "passed": False,
            }
            _emit(report, args.out)
            return 1
        true_diag = stress.data[:3]
        rec_diag = recovered.data[:3]
        denom = float(np.linalg.norm(true_diag))
        rel = float(np.linalg.norm(rec_diag - true_diag)) / denom if denom else 0.0
        report = {
            "command": "recover",
            "config": config,
            "results": {
                "far_face_residuals": far_face_residuals(recovered),
                "relative_error_vs_direct": rel,
            },
            "passed": True,
        }
        if args.save_csv:
            fieldio.write_csv(recovered, args.save_csv)
        _emit(report, args.out)
        return 0

    config["boundary"] = args.boundary
    op = assemble_shear_recovery(problem, boundary_mode=args.boundary)
    try:
        sol = solve_shear_recovery(op, compute_min_singular=args.min_singular)
    except RankDeficiencyError as exc:
        report = {
            "command": "recover",
            "config": config,
            "results": {"error": str(exc)},
            "passed": False,
        }
        _emit(report, args.out)
        return 1
    true_tau = stress.data[3:]
    denom = float(np.linalg.norm(true_tau))
    rel = float(np.linalg.norm(sol.tau - true_tau)) / denom if denom else 0.0
    report = {
        "command": "recover",
        "config": config,
        "results": {
            "rows": op.shape[0],
            "columns": op.shape[1],
            "relative_residual": sol.relative_residual,
            "relative_error_vs_direct": rel,
            "min_singular_value": sol.min_singular_value,
            "min_singular_value_rel": sol.min_singular_value_rel,
            "iterations": sol.iterations,
        },
        "passed": True,
    }
    if args.save_csv:
        out_field = eval_stress(pot, grid)
        out_field.data[3:] = sol.tau
        fieldio.write_csv(out_field, args.save_csv)
    _emit(report, args.out)
    return 0


def cmd_poorly(args) -> int:
    if args.params:
        params = param_u_from_dict(_load_json(args.params))
        source = args.params
    else:
        rng = np.random.default_rng(args.seed)
        params = random_param_u(rng, max_degree=args.degree)
        source = "random"
    tau = tau_from_u(params)
    eq = equilibrium_residuals(tau)
    mixed = mixed_second_derivatives(tau)
    spw = convert_u_to_spw(params)
    tau_spw = tau_from_spw(spw)
    remainder = conversion_remainder(params)
    aligned = (
        (tau[0] - tau_spw[0] - remainder).is_zero
        and (tau[1] - tau_spw[1]).is_zero
        and (tau[2] - tau_spw[2]).is_zero
    )
    poorly_ok, _ = is_poorly(tau)
    checks = {
        "equilibrium_zero": all(p.is_zero for p in eq),
        "mixed_derivatives_zero": all(p.is_zero for p in mixed),
        "split_conversion_aligned": aligned,
        "tau_is_poorly": poorly_ok,
    }
    passed = all(checks.values())
    report = {
        "command": "poorly",
        "config": {"source": source, "degree": args.degree, "seed": args.seed},
        "results": {
            "params": param_u_to_dict(params),
            "split_params": param_spw_to_dict(spw),
            "tau": [p.to_json() for p in tau],
            "conversion_remainder": remainder.to_json(),
            "symbol_det_at_111": principal_symbol_det((1, 1, 1)),
            "symbol_det_at_110": principal_symbol_det((1, 1, 0)),
        },
        "checks": checks,
        "passed": passed,
    }
    _emit(report, args.out)
    return 0 if passed else 1


def cmd_export(args) -> int:
    gen, nu = _generator_from_args(args)
    constants = ElasticConstants(young=args.E, poisson=nu)
    pot = coeffs_from_generator(gen, constants)
    if args.format == "json":
        Path(args.out_file).write_text(
            json.dumps(potential_to_dict(pot, nu), sort_keys=True) + "\n"
        )
    else:
        grid = Grid3(args.m)
        field = eval_stress(pot, grid) if args.what == "stress" else eval_strain(
            pot, grid, constants
        )
        if args.format == "csv":
            fieldio.write_csv(field, args.out_file)
        else:
            fieldio.write_vtk(field, args.out_file, title=args.what)
    report = {
        "command": "export",
        "config": {
            "N": gen.N,
            "nu": nu,
            "m": args.m,
            "what": args.what,
            "format": args.format,
        },
        "results": {"written": args.out_file},
        "passed": True,
    }
    _emit(report, args.out)
    return 0


def _add_common(parser, m_default=33):
    parser.add_argument("--nu", type=float, default=None, help="Poisson ratio (default 0.28)")
    parser.add_argument("--E", type=float, default=1.0, help="Young modulus")
    parser.add_argument("--m", type=int, default=m_default, help="nodes per axis")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")
    parser.add_argument("--workers", type=int, default=1,
                        help="accepted for compatibility; evaluation is vectorised")
    parser.add_argument("--out", help="also write the JSON report here")


def _add_source(parser):
    parser.add_argument("--generator", help="JSON file with a saved generator")
    parser.add_argument("--N", type=int, default=2, help="modes per axis")
    parser.add_argument("--column", type=int, default=0,
                        help="basis column when no generator file is given")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigentomo",
        description="Invisible residual stress fields: construction, checks, recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nullbasis", help="build and check a generator basis")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--method", choices=("separable", "svd"), default="separable")
    p.add_argument("--tol", type=float, default=1e-10, help="singular value cutoff")
    p.add_argument("--save-basis", help="write the basis matrix as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_nullbasis)

    p = sub.add_parser("verify", help="check the defining properties of a field")
    _add_source(p)
    p.add_argument("--potential", help="JSON file with saved cosine coefficients")
    p.add_argument("--tol-strain", type=float, default=1e-10)
    p.add_argument("--tol-traction", type=float, default=1e-10)
    p.add_argument("--tol-div", type=float, default=1e-12)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fit", help="project a binary image onto a blind slice span")
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--target", choices=("checkerboard", "disk"), default="checkerboard")
    p.add_argument("--image", help="PGM or CSV image file instead of a built-in target")
    p.add_argument("--cells", type=int, default=16, help="checkerboard cells per side")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--slice-x3", type=float, default=np.pi / 2, dest="slice_x3")
    p.add_argument("--save-pgm", help="write the fitted slice as PGM")
    p.add_argument("--save-coefficients", help="write the combined generator as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reduce", help="diagonalize a polynomial eigenstrain")
    p.add_argument("--input", required=True, help="eigenstrain JSON file")
    p.add_argument("--certificate-degree", type=int, default=None,
                   help="also run the isotropic feasibility certificate")
    _add_common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("recover", help="reconstruct missing stress components")
    p.add_argument("--mode", choices=("diagonal-from-shear", "shear-from-diagonal"),
                   default="diagonal-from-shear")
    _add_source(p)
    p.add_argument("--path", choices=("analytic", "grid"), default=None)
    p.add_argument("--boundary", choices=("dirichlet", "traction"), default="dirichlet")
    p.add_argument("--min-singular", choices=("auto", "always", "never"),
                   default="auto", dest="min_singular")
    p.add_argument("--save-csv", help="write the recovered field as CSV")
    _add_common(p, m_default=17)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("poorly", help="build and check a shear-only solution triple")
    p.add_argument("--params", help="JSON file with potentials U1, U2, U3")
    p.add_argument("--degree", type=int, default=4, help="degree for random parameters")
    _add_common(p)
    p.set_defaults(func=cmd_poorly)

    p = sub.add_parser("export", help="write a sampled field to CSV, VTK or JSON")
    p.add_argument("--what", choices=("stress", "strain"), default="stress")
    _add_source(p)
    p.add_argument("--format", choices=("csv", "vtk", "json"), default="csv")
    p.add_argument("--out-file", required=True, dest="out_file")
    _add_common(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
