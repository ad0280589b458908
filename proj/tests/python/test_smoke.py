import math
import os

import numpy as np
import pytest

import thermistor as th


def test_expression_evaluation_and_derivative():
    e = th.Expr("1 + 1/(1 + u^2)")
    assert e(u=0.0) == 2.0
    assert e(u=1.0) == 1.5
    assert e.diff("u")(u=1.0) == pytest.approx(-0.5)
    assert e.depends_on("u") and not e.depends_on("x")
    assert th.Expr("2^3^2")() == 512.0


def test_expression_errors_carry_a_code():
    with pytest.raises(th.ThermistorError) as info:
        th.Expr("1 + h")
    assert info.value.code == "unknown-identifier"


def test_mass_and_stiffness_closed_forms():
    mesh = th.interval_mesh(0.0, 1.0, 8)
    h = mesh.h
    m = th.mass_matrix(mesh)
    k = th.stiffness_matrix(mesh)
    assert m.shape == (7, 7)
    assert np.allclose(np.diag(m), 2 * h / 3, rtol=1e-13)
    assert np.allclose(np.diag(m, 1), h / 6, rtol=1e-13)
    assert np.allclose(np.diag(k), 2 / h, rtol=1e-13)
    assert np.allclose(np.diag(k, -1), -1 / h, rtol=1e-13)
    assert np.count_nonzero(np.triu(m, 2)) == 0


def test_rect_mesh_shape():
    mesh = th.rect_mesh(0, 0, 1, 1, 4, 4)
    assert mesh.dim == 2
    assert mesh.vertices.shape == (25, 2)
    assert mesh.elements.shape == (32, 3)


def test_steady_state_is_the_parabola():
    lam = 1.6
    mesh = th.interval_mesh(-1.0, 1.0, 16)
    out = th.solve(mesh, th.Coefficients.unit(lam), tau=0.5, t_end=30.0)
    x = mesh.vertices[:, 0]
    assert np.allclose(out["u"][-1], lam * (1 - x**2) / 8, atol=1e-10)
    assert len(out["t"]) == 61


def test_manufactured_solve_is_accurate():
    mesh = th.interval_mesh(-1.0, 1.0, 64)
    out = th.solve(mesh, th.Coefficients.smooth(), scheme="crank_nicolson", tau=0.01,
                   u_exact=th.Expr("exp(-t)*sin(pi*(x + 1)/2)"))
    assert out["error_L2"] < 1e-3
    assert all(i >= 1 for i in out["iterations"][1:])


def test_spatial_study_orders():
    rows = th.spatial_eoc(th.interval_mesh(-1.0, 1.0, 8), th.Coefficients.smooth(), levels=3)
    assert len(rows) == 3
    assert rows[0]["eoc_L2"] is None
    assert 1.8 <= rows[-1]["eoc_L2"] <= 2.2
    assert 0.85 <= rows[-1]["eoc_H1"] <= 1.15


def test_hypothesis_violation_reports_a_witness():
    with pytest.raises(th.HypothesisViolation) as info:
        th.Coefficients.make("1", "u", lam=1.0, sigma=0.1, k1=1.0, k2=1.0)
    assert info.value.witness == 0.0
    assert info.value.value == 0.0
    assert isinstance(info.value, th.ThermistorError)


def test_config_checks_and_run(tmp_path):
    issues = th.check_config("coefficients.lambda = -1\n")
    assert issues and issues[0][0] == 1
    assert "positive" in issues[0][1]
    assert th.check_config("mode = solve\n") == []
    status = th.run_config("mesh.n = 8\nscheme.tau = 0.1\nscheme.t_end = 0.5\n", output_dir=str(tmp_path))
    assert status == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "MANIFEST" in names and "u_5.csv" in names
    assert th.run_config("coefficients.f = u\ncoefficients.sigma = 0.1\n", output_dir=str(tmp_path / "h1")) == 4


def test_command_line_solver_matches_binding(tmp_path):
    solver = os.environ.get("THERMISTOR_SOLVER_PATH")
    if not solver:
        pytest.skip("solver path not provided")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode = spatial_eoc\nmesh.n = 4\nstudy.levels = 3\nstudy.tau = 0.01\n")
    assert os.system(f"{solver} {cfg} --output-dir {tmp_path / 'cli'} > /dev/null 2>&1") == 0
    assert th.run_config(cfg.read_text(), output_dir=str(tmp_path / "py")) == 0
    assert (tmp_path / "cli" / "errors.csv").read_bytes() == (tmp_path / "py" / "errors.csv").read_bytes()
    assert not math.isnan(float((tmp_path / "py" / "errors.csv").read_text().splitlines()[-1].split(",")[8]))
