"""Command line entry points, exit codes, report files."""

import json

import numpy as np
import pytest

from eigentomo.cli import main
from eigentomo.imagefit import BinaryTarget, write_pgm
from eigentomo.nullspace import (
    NullGenerator,
    coeffs_from_generator,
    generator_to_dict,
    potential_to_dict,
    separable_null_basis,
)
from eigentomo.polynomial import Poly
from eigentomo.poorly import PoorlyParamU, param_u_to_dict
from eigentomo.reduction import PolyEigenstrain


def run(tmp_path, *argv, expect=0, name="report.json"):
    out = tmp_path / name
    rc = main([*argv, "--out", str(out)])
    assert rc == expect
    return json.loads(out.read_text())


def test_nullbasis_report(tmp_path):
    saved = tmp_path / "basis.json"
    rep = run(tmp_path, "nullbasis", "--N", "3", "--save-basis", str(saved))
    assert rep["passed"]
    assert rep["results"]["dimension"] == 8
    assert rep["results"]["expected_dimension"] == 8
    blob = json.loads(saved.read_text())
    assert np.asarray(blob["basis"]).shape == (27, 8)


def test_nullbasis_svd_method(tmp_path):
    rep = run(tmp_path, "nullbasis", "--N", "2", "--method", "svd")
    assert rep["results"]["dimension"] == 1


def test_nullbasis_single_mode_has_no_null_fields(tmp_path):
    rep = run(tmp_path, "nullbasis", "--N", "1")
    assert rep["passed"]
    assert rep["results"]["dimension"] == 0


def test_verify_passes_on_null_field(tmp_path):
    rep = run(tmp_path, "verify", "--N", "2", "--m", "17")
    assert rep["passed"]
    assert rep["results"]["max_abs_eps22"] <= 1e-10
    assert rep["results"]["max_traction"] <= 1e-10
    assert rep["results"]["max_analytic_divergence"] <= 1e-12


def test_verify_fails_with_impossible_tolerance(tmp_path):
    rep = run(tmp_path, "verify", "--N", "2", "--m", "9",
              "--tol-strain", "1e-30", expect=1)
    assert not rep["passed"]
    assert not rep["checks"]["lateral_strain_ok"]


def test_verify_reads_saved_generator(tmp_path):
    gen = NullGenerator.from_flat(2, separable_null_basis(2)[:, 0])
    gen_file = tmp_path / "gen.json"
    gen_file.write_text(json.dumps(generator_to_dict(gen, 0.28)))
    rep = run(tmp_path, "verify", "--generator", str(gen_file), "--m", "9")
    assert rep["passed"]


def test_verify_flags_perturbed_coefficients(tmp_path):
    gen = NullGenerator.from_flat(2, separable_null_basis(2)[:, 0])
    pot = coeffs_from_generator(gen)
    blob = potential_to_dict(pot, 0.28)
    blob["a"][0][0] += 0.05  # knock one coefficient off the formula
    pot_file = tmp_path / "pot.json"
    pot_file.write_text(json.dumps(blob))
    rep = run(tmp_path, "verify", "--potential", str(pot_file), "--m", "9", expect=1)
    assert not rep["passed"]
    assert not rep["checks"]["lateral_strain_ok"]
    # the double-curl structure keeps the field balanced regardless
    assert rep["checks"]["divergence_ok"]


def test_fit_from_image_file(tmp_path):
    img = tmp_path / "target.pgm"
    write_pgm(BinaryTarget.checkerboard(cells=4, resolution=32).values, img)
    coeff_file = tmp_path / "combined.json"
    pgm_out = tmp_path / "fitted.pgm"
    rep = run(tmp_path, "fit", "--image", str(img), "--N", "2",
              "--resolution", "32", "--save-pgm", str(pgm_out),
              "--save-coefficients", str(coeff_file))
    assert rep["results"]["n_columns"] == 1
    assert 0.0 <= rep["results"]["rms_residual"] <= 1.0
    assert pgm_out.read_text().startswith("P2")
    saved = json.loads(coeff_file.read_text())
    assert saved["N"] == 2


def test_reduce_with_certificate(tmp_path):
    eps = PolyEigenstrain.from_components({"12": Poly.variable(2)})
    eps_file = tmp_path / "eps.json"
    eps_file.write_text(json.dumps(eps.to_json()))
    rep = run(tmp_path, "reduce", "--input", str(eps_file), "--certificate-degree", "4")
    assert rep["passed"]
    assert rep["results"]["identity_ok"]
    assert rep["results"]["certificate"]["feasible"]
    assert rep["results"]["certificate"]["residual_rational"] == "0"


def test_recover_shear_mode_report(tmp_path):
    rep = run(tmp_path, "recover", "--mode", "shear-from-diagonal", "--N", "2", "--m", "9")
    assert rep["passed"]
    assert rep["results"]["rows"] == 3 * 9**3 + 18 * 9**2
    assert rep["results"]["min_singular_value_rel"] > 1e-8
    assert rep["results"]["relative_error_vs_direct"] < 0.45


def test_recover_diagonal_mode_writes_csv(tmp_path):
    csv_out = tmp_path / "field.csv"
    rep = run(tmp_path, "recover", "--mode", "diagonal-from-shear", "--N", "2",
              "--m", "9", "--save-csv", str(csv_out))
    assert rep["passed"]
    header = csv_out.read_text().splitlines()[0]
    assert header == "x1,x2,x3,s11,s22,s33,s23,s13,s12"


def test_recover_rejects_coarse_grid(tmp_path):
    out = tmp_path / "r.json"
    rc = main(["recover", "--mode", "shear-from-diagonal", "--N", "2", "--m", "7",
               "--out", str(out)])
    assert rc == 2


def test_poorly_random_and_from_file(tmp_path):
    rep = run(tmp_path, "poorly", "--degree", "3", "--seed", "5")
    assert rep["passed"]
    assert rep["checks"]["tau_is_poorly"]
    assert rep["checks"]["split_conversion_aligned"]
    X1, X2 = Poly.variable(0), Poly.variable(1)
    params = PoorlyParamU(Poly.zero(), Poly.zero(), X1 * X2)
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps(param_u_to_dict(params)))
    rep = run(tmp_path, "poorly", "--params", str(pfile), name="r2.json")
    assert rep["passed"]
    assert rep["config"]["source"] == str(pfile)


def test_export_formats(tmp_path):
    for fmt, fname in (("csv", "f.csv"), ("vtk", "f.vtk"), ("json", "f.json")):
        target = tmp_path / fname
        rep = run(tmp_path, "export", "--what", "stress", "--format", fmt,
                  "--N", "2", "--m", "5", "--out-file", str(target),
                  name=f"rep-{fmt}.json")
        assert rep["passed"]
        assert target.exists()
    assert (tmp_path / "f.vtk").read_text().splitlines()[0].startswith("# vtk")


def test_reports_are_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert main(["verify", "--N", "2", "--m", "9", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_unknown_arguments_exit_nonzero(tmp_path):
    with pytest.raises(SystemExit):
        main(["fit", "--no-such-flag"])
    assert main(["reduce", "--input", str(tmp_path / "missing.json")]) == 2
