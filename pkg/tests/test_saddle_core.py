import numpy as np
import pytest

from saddlecert.saddle_core import (
    ALGORITHMS,
    AlgoParams,
    NonFiniteGradientError,
    OptimizerState,
    SaddleObjective,
    bilinear,
    certified_params,
    counting,
    fig1_scsc,
    finite_diff_check,
    make_problem,
    nonquadratic_cc,
    random_quadratic,
    rescale_to_unit_smoothness,
    step,
)

ALL_PROBLEMS = [
    bilinear(1),
    bilinear(3),
    fig1_scsc(0.01),
    random_quadratic(3, 2, 0.1, 1.0, seed=7),
    random_quadratic(4, 4, 0.05, 4.0, seed=2),
    nonquadratic_cc(3, 1.0, seed=3),
]


def run(obj, params, z0, T):
    dx = obj.dims[0]
    s = OptimizerState.initial(z0[:dx], z0[dx:])
    out = [s]
    for _ in range(T):
        s = step(obj, s, params).next
        out.append(s)
    return out


# ---------------------------------------------------------------- step examples


def test_alternating_steps_on_bilinear():
    obj = bilinear(1)
    p = AlgoParams(0.2, -0.5, "alt-neg-momentum")
    s0, s1, s2 = run(obj, p, np.array([1.0, 0.0]), 2)
    np.testing.assert_allclose(s1.z, [1.0, 0.2], atol=1e-15)
    np.testing.assert_allclose([s1.v[0], s1.w[0]], [0.0, 0.2], atol=1e-15)
    np.testing.assert_allclose(s2.z, [24 / 25, 73 / 250], atol=1e-15)


def test_simultaneous_first_step_and_divergence():
    obj = bilinear(1)
    p = AlgoParams(0.2, -0.8, "sim-momentum")
    states = run(obj, p, np.array([1.0, 0.0]), 200)
    np.testing.assert_allclose(states[1].z, [1.0, 0.2], atol=1e-15)
    assert np.linalg.norm(states[-1].z) > 1.0


def test_gda_radius_strictly_increasing():
    states = run(bilinear(1), AlgoParams(0.2, algorithm="gda"), np.array([1.0, 0.0]), 100)
    r = [np.linalg.norm(s.z) for s in states]
    assert all(b > a for a, b in zip(r, r[1:]))


def test_extragradient_matches_linear_map_oracle():
    eta = 0.2
    states = run(bilinear(1), AlgoParams(eta, algorithm="extragradient"), np.array([1.0, 0.0]), 100)
    # one EG step on f = xy is the 2x2 linear map below
    m = np.array([[1 - eta**2, -eta], [eta, 1 - eta**2]])
    z = np.array([1.0, 0.0])
    for _ in range(100):
        z = m @ z
    np.testing.assert_allclose(states[-1].z, z, rtol=1e-12)
    assert np.linalg.norm(states[-1].z) < 1.0


def test_ogda_first_step_is_gda():
    obj = fig1_scsc(0.01)
    z0 = np.array([0.7, -0.3])
    a = run(obj, AlgoParams(0.1, algorithm="ogda"), z0, 1)[1]
    b = run(obj, AlgoParams(0.1, algorithm="gda"), z0, 1)[1]
    np.testing.assert_allclose(a.z, b.z, rtol=1e-15)


@pytest.mark.parametrize("algorithm", ALGORITHMS)
@pytest.mark.parametrize("obj", ALL_PROBLEMS, ids=lambda o: f"{o.name}{o.dims}")
def test_saddle_is_fixed_point(algorithm, obj):
    z0 = np.concatenate(obj.saddle)
    states = run(obj, AlgoParams(0.1, -0.5, algorithm), z0, 5)
    for s in states:
        np.testing.assert_allclose(s.z, z0, atol=1e-12)


@pytest.mark.parametrize("algorithm", ["alt-neg-momentum", "sim-momentum"])
@pytest.mark.parametrize("obj", ALL_PROBLEMS, ids=lambda o: f"{o.name}{o.dims}")
def test_momentum_bookkeeping(algorithm, obj):
    rng = np.random.default_rng(0)
    z0 = rng.standard_normal(sum(obj.dims))
    states = run(obj, AlgoParams(0.1, -0.5, algorithm), z0, 30)
    for a, b in zip(states, states[1:]):
        scale = max(1.0, np.abs(b.z).max())
        assert np.abs(b.v - (b.x - a.x)).max() <= 1e-12 * scale
        assert np.abs(b.w - (b.y - a.y)).max() <= 1e-12 * scale


@pytest.mark.parametrize(
    "algorithm,per_step", [("alt-neg-momentum", 1), ("sim-momentum", 1), ("gda", 1), ("ogda", 1), ("extragradient", 2)]
)
def test_gradient_counts(algorithm, per_step):
    obj, counts = counting(nonquadratic_cc(2, seed=1))
    run(obj, AlgoParams(0.1, -0.5, algorithm), np.ones(4), 10)
    assert counts == {"grad_x": 10 * per_step, "grad_y": 10 * per_step}


def test_alternating_uses_fresh_x_for_y_gradient():
    obj = bilinear(1)
    out = step(obj, OptimizerState.initial([1.0], [0.5]), AlgoParams(0.2))
    (kx, (x1, y1), _), (ky, (x2, y2), _) = out.grads_used
    assert (kx, ky) == ("grad_x", "grad_y")
    assert x1[0] == 1.0 and y1[0] == 0.5
    assert x2[0] == pytest.approx(1.0 - 0.2 * 0.5) and y2[0] == 0.5


def test_non_finite_gradient_raises():
    bad = SaddleObjective((1, 1), lambda x, y: 0.0, lambda x, y: np.array([np.nan]), lambda x, y: y, 1.0)
    with pytest.raises(NonFiniteGradientError) as err:
        step(bad, OptimizerState.initial([1.0], [0.0]), AlgoParams(0.1))
    assert err.value.point[0][0] == 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        AlgoParams(0.0)
    with pytest.raises(ValueError):
        AlgoParams(0.1, algorithm="adam")
    assert certified_params(random_quadratic(2, 2, 0.1, 4.0)).eta == pytest.approx(0.05)


# ---------------------------------------------------------------- problems


def test_gradient_examples():
    obj = fig1_scsc(0.01)
    gx, gy = obj.grad(np.array([1.0]), np.array([0.0]))
    np.testing.assert_allclose([gx[0], gy[0]], [0.01, np.sqrt(0.9999)], rtol=1e-15)
    gx, gy = bilinear(1).grad(np.array([2.0]), np.array([-3.0]))
    assert (gx[0], gy[0]) == (-3.0, 2.0)


def _jacobian(obj, z):
    dx = obj.dims[0]
    n = sum(obj.dims)
    g0 = np.concatenate(obj.grad(z[:dx], z[dx:]))
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        zz = z + e
        cols.append(np.concatenate(obj.grad(zz[:dx], zz[dx:])) - g0)
    return np.column_stack(cols)


def test_random_quadratic_saddle_and_smoothness():
    obj = random_quadratic(3, 3, 0.1, 1.0, seed=7)
    xs, ys = obj.saddle
    assert np.linalg.norm(np.concatenate(obj.grad(xs, ys))) <= 1e-10
    h = _jacobian(obj, np.concatenate(obj.saddle))
    v = np.random.default_rng(0).standard_normal(6)
    for _ in range(2000):
        v = h.T @ (h @ v)
        v /= np.linalg.norm(v)
    assert np.linalg.norm(h @ v) <= 1 + 1e-9
    assert np.linalg.eigvalsh(h[:3, :3]).min() >= 0.1 - 1e-12


def test_random_quadratic_is_seeded():
    a, b = random_quadratic(2, 3, 0.1, seed=5), random_quadratic(2, 3, 0.1, seed=5)
    np.testing.assert_array_equal(a.saddle[0], b.saddle[0])


def test_make_problem():
    assert make_problem("fig1-scsc", mu=0.02).strong_mu == 0.02
    assert make_problem("bilinear", d=2).dims == (2, 2)
    with pytest.raises(ValueError):
        make_problem("rosenbrock")
    with pytest.raises(ValueError):
        make_problem("random-quad", d_x=2, d_y=2, mu=0.8, L=1.0)
    with pytest.raises(ValueError):
        bilinear(0)
    with pytest.raises(ValueError):
        fig1_scsc(1.0)


@pytest.mark.parametrize(
    "obj,tol",
    [(bilinear(2), 1e-9), (fig1_scsc(0.01), 1e-8), (random_quadratic(3, 3, 0.1, 2.0, seed=1), 1e-6), (nonquadratic_cc(4, 1.0, seed=3), 1e-6)],
    ids=["bilinear", "fig1", "random-quad", "nonquad"],
)
def test_finite_differences(obj, tol):
    pts = np.random.default_rng(1).standard_normal((20, sum(obj.dims)))
    assert finite_diff_check(obj, pts, h=1e-5) <= tol


# ---------------------------------------------------------------- rescaling


def test_rescale_is_identity_at_unit_smoothness():
    obj = bilinear(2)
    assert rescale_to_unit_smoothness(obj) is obj
    assert rescale_to_unit_smoothness(fig1_scsc(0.01)).strong_mu == 0.01


@pytest.mark.parametrize(
    "obj",
    [random_quadratic(3, 3, 0.2, 4.0, seed=3), nonquadratic_cc(3, 1.0, seed=2), fig1_scsc(0.01), bilinear(2)],
    ids=lambda o: o.name,
)
def test_rescale_equivalence(obj):
    tilde = rescale_to_unit_smoothness(obj)
    assert tilde.smoothness_L == 1.0
    assert tilde.strong_mu == pytest.approx(obj.strong_mu / obj.smoothness_L)
    z0 = np.random.default_rng(9).standard_normal(sum(obj.dims))
    a = run(obj, certified_params(obj), z0, 50)
    b = run(tilde, AlgoParams(0.2, -0.5), z0, 50)
    for s, t in zip(a, b):
        np.testing.assert_allclose(s.z, t.z, rtol=1e-12, atol=1e-14)
