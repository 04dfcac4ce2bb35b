import re

import numpy as np
import pytest

from saddlecert import harness
from saddlecert.harness import (
    DivergenceError,
    check_cc_bound,
    check_scsc_bound,
    export,
    lyapunov_trace,
    progress_decomposition,
    reproduce_fig1,
    run_matrix,
    run_trajectory,
    trajectory_csv,
    trajectory_svg,
)
from saddlecert.saddle_core import AlgoParams, bilinear, certified_params, fig1_scsc, nonquadratic_cc, random_quadratic

ALT = AlgoParams(0.2, -0.5, "alt-neg-momentum")


@pytest.fixture(scope="module")
def nonquad_run():
    obj = nonquadratic_cc(4, 1.0, seed=3)
    z0 = np.random.default_rng(3).standard_normal(8)
    return run_trajectory(obj, certified_params(obj), z0, 500)


# ---------------------------------------------------------------- trajectories


def test_two_step_record():
    rec = run_trajectory(bilinear(1), ALT, (1.0, 0.0), 2)
    assert rec.T == 2
    np.testing.assert_allclose(rec.states[2].z, [24 / 25, 73 / 250], atol=1e-15)
    assert list(rec.grad_evals) == [0, 2, 4]


def test_rejects_bad_horizon_and_shape():
    with pytest.raises(ValueError):
        run_trajectory(bilinear(1), ALT, (1.0, 0.0), 0)
    with pytest.raises(ValueError):
        run_trajectory(bilinear(1), ALT, np.ones(3), 5)


def test_gda_distance_strictly_increasing():
    rec = run_trajectory(bilinear(1), AlgoParams(0.2, algorithm="gda"), (1.0, 0.0), 100)
    assert np.all(np.diff(rec.dist_sq) > 0)


def test_divergence_guard():
    with pytest.raises(DivergenceError):
        run_trajectory(bilinear(1), AlgoParams(10.0, algorithm="gda"), (1.0, 0.0), 50)


def test_run_matrix_keeps_order(monkeypatch):
    monkeypatch.setenv("SADDLECERT_THREADS", "3")
    assert run_matrix([lambda k=k: k * k for k in range(10)]) == [k * k for k in range(10)]
    monkeypatch.setenv("SADDLECERT_THREADS", "1")
    assert run_matrix([lambda k=k: -k for k in range(4)]) == [0, -1, -2, -3]


# ---------------------------------------------------------------- Lyapunov


def test_lyapunov_fig1_scsc():
    tr = lyapunov_trace(run_trajectory(fig1_scsc(0.01), ALT, (1.0, 0.0), 200))
    assert tr.ok
    assert tr.mu_tilde == pytest.approx(0.01)


def test_lyapunov_nonquadratic(nonquad_run):
    tr = lyapunov_trace(nonquad_run)
    assert tr.ok
    assert np.all(tr.residuals >= -1e-9 * (1 + tr.values[:-1]))


def test_lyapunov_at_saddle_is_zero():
    obj = random_quadratic(2, 2, 0.1, seed=4)
    rec = run_trajectory(obj, certified_params(obj), tuple(obj.saddle), 20)
    assert np.all(lyapunov_trace(rec).values == 0)


def test_sandwich_and_initial_bound(nonquad_run):
    tr = lyapunov_trace(nonquad_run)
    assert np.all(50 * tr.dist_sq <= tr.values + 1e-9)
    assert np.all(tr.values <= 150 * tr.state_norm_sq + 1e-9)
    assert tr.values[0] <= 300 * tr.dist_sq[0]


@pytest.mark.parametrize(
    "obj",
    [fig1_scsc(0.01), random_quadratic(4, 3, 0.05, 2.0, seed=5), nonquadratic_cc(3, 0.5, seed=1)],
    ids=lambda o: o.name,
)
def test_telescoped_sum(obj):
    z0 = np.random.default_rng(0).standard_normal(sum(obj.dims))
    rec = run_trajectory(obj, certified_params(obj), z0, 400)
    tr = lyapunov_trace(rec)
    mu, V = tr.mu_tilde, tr.values
    f = harness.rescale_to_unit_smoothness(obj)
    G = np.array([sum(float(g @ g) for g in f.grad(s.x, s.y)) for s in rec.states])
    lhs = np.sum((1 - mu) * G[:-1])
    rhs = np.sum((1 - mu / 5) * V[:-1] - V[1:])
    assert lhs <= rhs * (1 + 1e-6)
    if mu == 0:
        assert lhs <= V[0] - V[-1] + 1e-6 * V[0]


def test_lyapunov_requires_certified_run():
    rec = run_trajectory(bilinear(1), AlgoParams(0.1, -0.5), (1.0, 0.0), 5)
    with pytest.raises(ValueError):
        lyapunov_trace(rec)
    rec = run_trajectory(bilinear(1), AlgoParams(0.2, algorithm="gda"), (1.0, 0.0), 5)
    with pytest.raises(ValueError):
        lyapunov_trace(rec)


def test_progress_decomposition(nonquad_run):
    tr = lyapunov_trace(nonquad_run)
    dec = progress_decomposition(nonquad_run)
    scale = 1 + tr.values[:-1]
    assert np.all(np.abs(dec.identity_gap) <= 1e-9 * scale)
    assert np.all(dec.min_valid_inequality >= -1e-9 * scale)
    assert np.all(dec.sos_residual >= -1e-9 * scale)


# ---------------------------------------------------------------- rate bounds


def test_cc_bound_at_saddle():
    rep = check_cc_bound(run_trajectory(bilinear(2), ALT, (np.zeros(2), np.zeros(2)), 10))
    assert rep.passed and rep.bound == 0 and rep.measured == 0


def test_cc_bound_bilinear():
    z0 = np.random.default_rng(5).standard_normal(4)
    rep = check_cc_bound(run_trajectory(bilinear(2), ALT, z0 / np.linalg.norm(z0), 200))
    assert rep.passed and rep.margin > 0


def test_cc_bound_nonquadratic():
    obj = nonquadratic_cc(4, seed=2)
    rep = check_cc_bound(run_trajectory(obj, certified_params(obj), np.ones(8), 1000))
    assert rep.passed and rep.margin > 0
    assert rep.metadata["min_grad_norm_sq"] <= rep.measured


def test_scsc_bound_fig1():
    assert check_scsc_bound(run_trajectory(fig1_scsc(0.01), ALT, (1.0, 0.0), 200)).passed


def test_scsc_bound_at_saddle():
    rep = check_scsc_bound(run_trajectory(fig1_scsc(0.01), ALT, (0.0, 0.0), 10))
    assert rep.passed and rep.measured == 0


def test_scsc_bound_random_quadratic():
    obj = random_quadratic(5, 5, 0.05, 1.0, seed=11)
    z0 = np.random.default_rng(11).standard_normal(10)
    rec = run_trajectory(obj, certified_params(obj), z0, 2000)
    rep = check_scsc_bound(rec)
    assert rep.passed
    assert rec.dist_sq[-1] <= 6 * 0.99**2000 * rec.dist_sq[0]


def test_scsc_bound_rejects_merely_convex():
    with pytest.raises(ValueError):
        check_scsc_bound(run_trajectory(bilinear(1), ALT, (1.0, 0.0), 5))


# ---------------------------------------------------------------- fig1 and exports


def test_fig1(tmp_path):
    res = reproduce_fig1(tmp_path)
    assert res.ok
    assert len(res.files) == 9
    assert (tmp_path / "fig1.json").exists()


def test_csv_rows_and_determinism(tmp_path):
    rec = run_trajectory(bilinear(1), ALT, (1.0, 0.0), 3)
    text = trajectory_csv(rec)
    lines = text.splitlines()
    assert lines[0] == "t,x0,y0,grad_norm_sq,dist_sq,lyapunov"
    assert len(lines) == 4 + 1
    a = export(rec, "csv", tmp_path / "a.csv").read_bytes()
    b = export(rec, "csv", tmp_path / "b.csv").read_bytes()
    assert a == b


def test_svg_point_count():
    rec = reproduce_fig1().records["left_alternating"]
    svg = trajectory_svg(rec)
    pts = re.search(r'points="([^"]*)"', svg).group(1).split()
    assert len(pts) == 201
    assert svg.count("<polyline") == 1


def test_svg_needs_planar_problem():
    rec = run_trajectory(bilinear(2), ALT, np.ones(4), 3)
    with pytest.raises(ValueError):
        trajectory_svg(rec)


def test_json_report(tmp_path):
    import json

    rec = run_trajectory(fig1_scsc(0.01), ALT, (1.0, 0.0), 50)
    path = export(check_scsc_bound(rec), "json", tmp_path / "r.json", rec=rec)
    data = json.loads(path.read_text())
    for key in ("problem", "algorithm", "eta", "beta", "T", "bound", "measured", "margin", "pass"):
        assert key in data
    with pytest.raises(ValueError):
        export(rec, "png", tmp_path / "x.png")
