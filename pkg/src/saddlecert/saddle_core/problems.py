"""Smooth convex-concave test objectives with value and gradient oracles."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class SaddleObjective:
    """Value/gradient oracle for ``min_x max_y f(x, y)``.

    ``smoothness_L`` is a certified bound on the gradient Lipschitz constant and
    ``strong_mu`` a certified strong-convexity-concavity modulus (0 when merely
    convex-concave). ``saddle`` is the known solution ``(x*, y*)`` if any.
    """

    dims: tuple[int, int]
    value: Callable[[Array, Array], float]
    grad_x: Callable[[Array, Array], Array]
    grad_y: Callable[[Array, Array], Array]
    smoothness_L: float
    strong_mu: float = 0.0
    saddle: Optional[tuple[Array, Array]] = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        dx, dy = self.dims
        if dx <= 0 or dy <= 0:
            raise ValueError(f"dimensions must be positive, got {self.dims}")
        if not self.smoothness_L > 0:
            raise ValueError("smoothness_L must be positive")
        if self.strong_mu < 0:
            raise ValueError("strong_mu must be non-negative")
        if self.strong_mu > self.smoothness_L:
            raise ValueError("strong_mu cannot exceed smoothness_L")

    def grad(self, x: Array, y: Array) -> tuple[Array, Array]:
        return self.grad_x(x, y), self.grad_y(x, y)

    @property
    def name(self) -> str:
        return self.descriptor.get("kind", "custom")


def _as_vec(v, d: int) -> Array:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.shape != (d,):
        raise ValueError(f"expected a vector of length {d}, got shape {a.shape}")
    return a


def bilinear(d: int = 1) -> SaddleObjective:
    """``f(x, y) = x^T y``."""
    if d <= 0:
        raise ValueError("dimension must be positive")
    zero = np.zeros(d)
    return SaddleObjective(
        dims=(d, d),
        value=lambda x, y: float(x @ y),
        grad_x=lambda x, y: np.array(y, dtype=float),
        grad_y=lambda x, y: np.array(x, dtype=float),
        smoothness_L=1.0,
        strong_mu=0.0,
        saddle=(zero, zero.copy()),
        descriptor={"kind": "bilinear", "d": d},
    )


def fig1_scsc(mu: float = 0.01) -> SaddleObjective:
    """``f(x, y) = mu/2 x^2 + sqrt(1 - mu^2) x y - mu/2 y^2`` in one dimension each.

    The Hessian has eigenvalues ``+-1``, so the function is exactly 1-smooth.
    """
    if not 0 <= mu < 1:
        raise ValueError("need 0 <= mu < 1")
    s = float(np.sqrt(1.0 - mu * mu))
    zero = np.zeros(1)
    return SaddleObjective(
        dims=(1, 1),
        value=lambda x, y: float(0.5 * mu * x @ x + s * x @ y - 0.5 * mu * y @ y),
        grad_x=lambda x, y: mu * x + s * y,
        grad_y=lambda x, y: s * x - mu * y,
        smoothness_L=1.0,
        strong_mu=float(mu),
        saddle=(zero, zero.copy()),
        descriptor={"kind": "fig1_scsc", "mu": float(mu)},
    )


def _orthogonal(rng: np.random.Generator, d: int) -> Array:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_quadratic(d_x: int, d_y: int, mu: float, L: float = 1.0, seed: int = 0) -> SaddleObjective:
    """``1/2 x'Px + x'By - 1/2 y'Ry`` around a seeded random saddle.

    Spectra of ``P`` and ``R`` lie in ``[mu, L/2]`` and ``||B|| = L/2``, so the
    full Hessian has operator norm at most ``L``.
    """
    if d_x <= 0 or d_y <= 0:
        raise ValueError("dimensions must be positive")
    if mu < 0 or mu >= L:
        raise ValueError("need 0 <= mu < L")
    if mu > L / 2:
        raise ValueError("random_quadratic needs mu <= L/2 to split the smoothness budget")
    rng = np.random.default_rng(seed)

    def spd(d):
        s = np.sort(rng.uniform(mu, L / 2, size=d))
        s[0] = mu
        if d > 1:
            s[-1] = L / 2
        u = _orthogonal(rng, d)
        return (u * s) @ u.T

    P, R = spd(d_x), spd(d_y)
    B = rng.standard_normal((d_x, d_y))
    B *= (L / 2) / np.linalg.norm(B, 2)
    sx, sy = rng.standard_normal(d_x), rng.standard_normal(d_y)

    def value(x, y):
        a, b = x - sx, y - sy
        return float(0.5 * a @ P @ a + a @ B @ b - 0.5 * b @ R @ b)

    return SaddleObjective(
        dims=(d_x, d_y),
        value=value,
        grad_x=lambda x, y: P @ (x - sx) + B @ (y - sy),
        grad_y=lambda x, y: B.T @ (x - sx) - R @ (y - sy),
        smoothness_L=float(L),
        strong_mu=float(mu),
        saddle=(sx.copy(), sy.copy()),
        descriptor={"kind": "random_quadratic", "d_x": d_x, "d_y": d_y, "mu": float(mu), "L": float(L), "seed": seed},
    )


def _logcosh(a: Array) -> Array:
    return np.logaddexp(a, -a) - np.log(2.0)


def nonquadratic_cc(d: int, coupling: float = 1.0, seed: int = 0) -> SaddleObjective:
    """``sum logcosh(x_i) - sum logcosh(y_j) + c x'Ay`` with ``||A|| = 1``.

    ``logcosh'' = sech^2`` lies in ``(0, 1]``, so the declared smoothness is
    ``1 + c``. The gradient is non-linear and the saddle is the origin.
    """
    if d <= 0:
        raise ValueError("dimension must be positive")
    if coupling < 0:
        raise ValueError("coupling must be non-negative")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    A /= np.linalg.norm(A, 2)
    c = float(coupling)
    zero = np.zeros(d)
    return SaddleObjective(
        dims=(d, d),
        value=lambda x, y: float(_logcosh(x).sum() - _logcosh(y).sum() + c * x @ A @ y),
        grad_x=lambda x, y: np.tanh(x) + c * (A @ y),
        grad_y=lambda x, y: -np.tanh(y) + c * (A.T @ x),
        smoothness_L=1.0 + c,
        strong_mu=0.0,
        saddle=(zero, zero.copy()),
        descriptor={"kind": "nonquadratic_cc", "d": d, "coupling": c, "seed": seed},
    )


_FAMILIES = {
    "bilinear": bilinear,
    "fig1_scsc": fig1_scsc,
    "random_quadratic": random_quadratic,
    "nonquadratic_cc": nonquadratic_cc,
}

ALIASES = {
    "fig1-scsc": "fig1_scsc",
    "random-quad": "random_quadratic",
    "nonquad-cc": "nonquadratic_cc",
}


def make_problem(kind: str, **params) -> SaddleObjective:
    """Build a shipped problem by family name, e.g. ``make_problem("bilinear", d=2)``."""
    kind = ALIASES.get(kind, kind)
    try:
        factory = _FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown problem family {kind!r}") from None
    return factory(**params)


def rescale_to_unit_smoothness(obj: SaddleObjective) -> SaddleObjective:
    """``f / L``: 1-smooth and ``mu/L``-strongly-convex-strongly-concave."""
    L = obj.smoothness_L
    if L == 1.0:
        return obj
    value, gx, gy = obj.value, obj.grad_x, obj.grad_y
    return replace(
        obj,
        value=lambda x, y: value(x, y) / L,
        grad_x=lambda x, y: gx(x, y) / L,
        grad_y=lambda x, y: gy(x, y) / L,
        smoothness_L=1.0,
        strong_mu=obj.strong_mu / L,
        descriptor={**obj.descriptor, "rescaled_by": L},
    )


def finite_diff_check(obj: SaddleObjective, points, h: float = 1e-5) -> float:
    """Worst relative error between central differences and the gradient oracle.

    The error at a point is ``max|fd - grad| / max(1, max|grad|)``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    dx, dy = obj.dims
    worst = 0.0
    for z in points:
        z = np.asarray(z, dtype=float)
        x, y = z[:dx], z[dx:]
        g = np.concatenate(obj.grad(x, y))
        fd = np.empty(dx + dy)
        for k in range(dx + dy):
            e = np.zeros(dx + dy)
            e[k] = h
            zp, zm = z + e, z - e
            fd[k] = (obj.value(zp[:dx], zp[dx:]) - obj.value(zm[:dx], zm[dx:])) / (2 * h)
        err = np.max(np.abs(fd - g)) / max(1.0, np.max(np.abs(g)))
        worst = max(worst, float(err))
    return worst
