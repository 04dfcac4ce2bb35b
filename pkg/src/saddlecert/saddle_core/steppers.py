"""One-step updates for GDA, momentum variants, extragradient and OGDA."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .problems import SaddleObjective

ALGORITHMS = ("gda", "sim-momentum", "alt-neg-momentum", "extragradient", "ogda")
MOMENTUM_ALGORITHMS = ("sim-momentum", "alt-neg-momentum")


class NonFiniteGradientError(FloatingPointError):
    def __init__(self, which: str, x, y):
        self.point = (np.array(x), np.array(y))
        super().__init__(f"non-finite {which} at x={x!r}, y={y!r}")


@dataclass(frozen=True)
class AlgoParams:
    eta: float
    beta: float = -0.5
    algorithm: str = "alt-neg-momentum"

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "beta", float(self.beta))
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")


@dataclass(frozen=True)
class OptimizerState:
    """Iterate plus momentum ``v ~ x_t - x_{t-1}``, ``w ~ y_t - y_{t-1}``.

    OGDA stores the previous partial gradients in ``v`` and ``w`` instead.
    """

    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    w: np.ndarray
    step_index: int = 0

    @classmethod
    def initial(cls, x0, y0) -> "OptimizerState":
        x = np.array(x0, dtype=float).ravel()
        y = np.array(y0, dtype=float).ravel()
        return cls(x, y, np.zeros_like(x), np.zeros_like(y), 0)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass
class StepOutput:
    next: OptimizerState
    grads_used: list = field(default_factory=list)


class _Oracle:
    """Records every partial-gradient evaluation made during one step."""

    def __init__(self, obj: SaddleObjective):
        self.obj = obj
        self.log = []

    def gx(self, x, y):
        g = np.asarray(self.obj.grad_x(x, y), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError("grad_x", x, y)
        self.log.append(("grad_x", (x.copy(), y.copy()), g))
        return g

    def gy(self, x, y):
        g = np.asarray(self.obj.grad_y(x, y), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError("grad_y", x, y)
        self.log.append(("grad_y", (x.copy(), y.copy()), g))
        return g


def _advance(s: OptimizerState, x, y, oracle: _Oracle, v=None, w=None) -> StepOutput:
    v = x - s.x if v is None else v
    w = y - s.y if w is None else w
    return StepOutput(OptimizerState(x, y, v, w, s.step_index + 1), oracle.log)


def step_alt_neg_momentum(obj: SaddleObjective, s: OptimizerState, p: AlgoParams) -> StepOutput:
    """x first, then y using the fresh x."""
    o = _Oracle(obj)
    x = s.x - p.eta * o.gx(s.x, s.y) + p.beta * s.v
    y = s.y + p.eta * o.gy(x, s.y) + p.beta * s.w
    return _advance(s, x, y, o)


def step_sim_momentum(obj: SaddleObjective, s: OptimizerState, p: AlgoParams) -> StepOutput:
    o = _Oracle(obj)
    gx, gy = o.gx(s.x, s.y), o.gy(s.x, s.y)
    x = s.x - p.eta * gx + p.beta * s.v
    y = s.y + p.eta * gy + p.beta * s.w
    return _advance(s, x, y, o)


def step_baseline(obj: SaddleObjective, s: OptimizerState, p: AlgoParams) -> StepOutput:
    """GDA, extragradient, or OGDA (``beta`` is ignored)."""
    o = _Oracle(obj)
    if p.algorithm == "gda":
        gx, gy = o.gx(s.x, s.y), o.gy(s.x, s.y)
        return _advance(s, s.x - p.eta * gx, s.y + p.eta * gy, o)
    if p.algorithm == "extragradient":
        gx, gy = o.gx(s.x, s.y), o.gy(s.x, s.y)
        xh, yh = s.x - p.eta * gx, s.y + p.eta * gy
        return _advance(s, s.x - p.eta * o.gx(xh, yh), s.y + p.eta * o.gy(xh, yh), o)
    if p.algorithm == "ogda":
        gx, gy = o.gx(s.x, s.y), o.gy(s.x, s.y)
        # first step: previous gradient := current gradient (plain GDA step)
        px, py = (gx, gy) if s.step_index == 0 else (s.v, s.w)
        x = s.x - 2 * p.eta * gx + p.eta * px
        y = s.y + 2 * p.eta * gy - p.eta * py
        return _advance(s, x, y, o, v=gx, w=gy)
    raise ValueError(f"{p.algorithm!r} is not a baseline algorithm")


def step(obj: SaddleObjective, s: OptimizerState, p: AlgoParams) -> StepOutput:
    if p.algorithm == "alt-neg-momentum":
        return step_alt_neg_momentum(obj, s, p)
    if p.algorithm == "sim-momentum":
        return step_sim_momentum(obj, s, p)
    return step_baseline(obj, s, p)


def certified_params(obj: SaddleObjective) -> AlgoParams:
    """``eta = 1/(5L)``, ``beta = -1/2``: the parameters the certificate covers."""
    return AlgoParams(eta=1.0 / (5.0 * obj.smoothness_L), beta=-0.5, algorithm="alt-neg-momentum")


def counting(obj: SaddleObjective):
    """Wrap ``obj`` so partial-gradient calls are tallied in the returned dict."""
    counts = {"grad_x": 0, "grad_y": 0}
    gx, gy = obj.grad_x, obj.grad_y

    def cgx(x, y):
        counts["grad_x"] += 1
        return gx(x, y)

    def cgy(x, y):
        counts["grad_y"] += 1
        return gy(x, y)

    return replace(obj, grad_x=cgx, grad_y=cgy), counts
