"""Trajectories, Lyapunov traces, rate-bound checks, the fig1 comparison and exports."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .certificate import Certificate, load_certificate, verify_identity
from .saddle_core import (
    AlgoParams,
    OptimizerState,
    SaddleObjective,
    bilinear,
    fig1_scsc,
    rescale_to_unit_smoothness,
    step,
)

DIVERGENCE_RADIUS = 1e12
LYAPUNOV_RTOL = 1e-9
BOUND_RTOL = 1e-9


class DivergenceError(RuntimeError):
    def __init__(self, t: int, radius: float):
        self.t, self.radius = t, radius
        super().__init__(f"trajectory diverged at step {t}: |z| = {radius:.3e}")


@dataclass
class TrajectoryRecord:
    obj: SaddleObjective
    params: AlgoParams
    states: list[OptimizerState]
    grad_norm_sq: np.ndarray
    dist_sq: Optional[np.ndarray]
    grad_evals: np.ndarray  # cumulative partial-gradient evaluations after each step

    @property
    def T(self) -> int:
        return len(self.states) - 1

    @property
    def problem(self) -> dict:
        return self.obj.descriptor

    @property
    def xs(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    @property
    def ys(self) -> np.ndarray:
        return np.array([s.y for s in self.states])

    def radius(self) -> np.ndarray:
        """``|z_t - z*|`` (or ``|z_t|`` when the saddle is unknown)."""
        if self.dist_sq is not None:
            return np.sqrt(self.dist_sq)
        return np.array([np.linalg.norm(s.z) for s in self.states])


def _split_z0(obj: SaddleObjective, z0):
    dx, dy = obj.dims
    if isinstance(z0, tuple) and len(z0) == 2:
        x0, y0 = (np.atleast_1d(np.asarray(v, dtype=float)) for v in z0)
    else:
        z = np.asarray(z0, dtype=float).ravel()
        if z.size != dx + dy:
            raise ValueError(f"z0 needs {dx + dy} entries, got {z.size}")
        x0, y0 = z[:dx], z[dx:]
    if x0.shape != (dx,) or y0.shape != (dy,):
        raise ValueError("z0 does not match the problem dimensions")
    return x0, y0


def run_trajectory(obj: SaddleObjective, params: AlgoParams, z0, T: int) -> TrajectoryRecord:
    if T < 1:
        raise ValueError("T must be at least 1")
    x0, y0 = _split_z0(obj, z0)
    s = OptimizerState.initial(x0, y0)
    states = [s]
    evals = [0]
    for t in range(T):
        out = step(obj, s, params)
        s = out.next
        r = float(np.linalg.norm(s.z))
        if not r <= DIVERGENCE_RADIUS:
            raise DivergenceError(t + 1, r)
        states.append(s)
        evals.append(evals[-1] + len(out.grads_used))
    gns = np.array([sum(float(g @ g) for g in obj.grad(st.x, st.y)) for st in states])
    dist = None
    if obj.saddle is not None:
        xs, ys = obj.saddle
        dist = np.array([float((st.x - xs) @ (st.x - xs) + (st.y - ys) @ (st.y - ys)) for st in states])
    return TrajectoryRecord(obj, params, states, gns, dist, np.array(evals))


def _require_certified(rec: TrajectoryRecord, what: str):
    p, L = rec.params, rec.obj.smoothness_L
    if p.algorithm != "alt-neg-momentum":
        raise ValueError(f"{what} applies only to alternating negative momentum, not {p.algorithm}")
    if abs(p.eta * 5 * L - 1) > 1e-12 or p.beta != -0.5:
        raise ValueError(f"{what} needs eta = 1/(5L) = {1 / (5 * L)!r} and beta = -1/2")
    if rec.obj.saddle is None:
        raise ValueError(f"{what} needs a known saddle point")


def _q_float(m) -> np.ndarray:
    return np.array([[float(e.coeff(0)) for e in row] for row in m.rows])


def _block_quad(q: np.ndarray, vecs: Sequence[np.ndarray]) -> float:
    return float(sum(q[a, b] * (vecs[a] @ vecs[b]) for a in range(3) for b in range(3)))


@dataclass
class LyapunovTrace:
    values: np.ndarray  # xi_t' Q xi_t, t = 0..T
    residuals: np.ndarray  # r_t, t = 0..T-1
    state_norm_sq: np.ndarray  # |xi_t|^2
    dist_sq: np.ndarray
    mu_tilde: float
    first_violation: Optional[int] = None
    violation: str = ""

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def lyapunov_trace(rec: TrajectoryRecord, cert: Certificate | None = None) -> LyapunovTrace:
    """Per-step Lyapunov values and progress residuals on ``f / L``.

    ``r_t = (1 - mu~/5) V_t - V_{t+1} - (1 - mu~) |grad f~(z_t)|^2`` must be
    non-negative, and ``50 |z_t - z*|^2 <= V_t <= 150 |xi_t|^2``, each up to
    ``1e-9 (1 + V_t)``.
    """
    _require_certified(rec, "lyapunov_trace")
    cert = cert or load_certificate()
    qx, qy = _q_float(cert.Qx), _q_float(cert.Qy)
    f = rescale_to_unit_smoothness(rec.obj)
    mu = f.strong_mu
    xs, ys = f.saddle
    V, N, D, G = [], [], [], []
    for s in rec.states:
        gx, gy = f.grad(s.x, s.y)
        ux = (s.x - xs, gx, s.v)
        uy = (s.y - ys, gy, s.w)
        V.append(_block_quad(qx, ux) + _block_quad(qy, uy))
        N.append(sum(float(u @ u) for u in ux + uy))
        D.append(float(ux[0] @ ux[0] + uy[0] @ uy[0]))
        G.append(float(gx @ gx + gy @ gy))
    V, N, D, G = map(np.array, (V, N, D, G))
    r = (1 - mu / 5) * V[:-1] - V[1:] - (1 - mu) * G[:-1]
    trace = LyapunovTrace(V, r, N, D, mu)
    tol = LYAPUNOV_RTOL * (1 + V)
    checks = [
        ("progress residual r_t < -tol", np.append(r < -tol[:-1], False)),
        ("50|z_t - z*|^2 > V_t", 50 * D > V + tol),
        ("V_t > 150|xi_t|^2", V > 150 * N + tol),
    ]
    bad = [(int(np.argmax(mask)), msg) for msg, mask in checks if mask.any()]
    if bad:
        trace.first_violation, trace.violation = min(bad)
    return trace


# Valid inequalities evaluated directly on a 1-smooth objective (uncleared).


def _m_smooth(za, zb, ga, gb) -> float:
    dz, dg = za - zb, ga - gb
    return float(dz @ dz - dg @ dg)


def _coco(fa, fb, ga, gb, a, b, mu) -> float:
    """``C_g(a, b)`` for a 1-smooth, ``mu``-strongly convex ``g``."""
    d = a - b
    r = ga - gb - mu * d
    return float(fa - fb - gb @ d - 0.5 * mu * d @ d - (r @ r) / (2 * (1 - mu)))


@dataclass
class ProgressDecomposition:
    """Numeric check of ``r_t = sum lambda M + S`` along a trajectory."""

    multiplier_sum: np.ndarray
    sos_residual: np.ndarray
    identity_gap: np.ndarray
    min_valid_inequality: np.ndarray


def progress_decomposition(rec: TrajectoryRecord, cert: Certificate | None = None) -> ProgressDecomposition:
    """Split each progress residual into valid inequalities and the SOS part.

    Function values and gradients are evaluated on the 3x3 grid of points
    ``{x_t, x_{t+1}, x*} x {y_t, y_{t+1}, y*}``. This recomputes
    ``grad_y f(x_{t+1}, y_t)``, which the state ``xi_t`` leaves out. The
    multiplier combination is the one :func:`verify_identity` certifies.
    """
    _require_certified(rec, "progress_decomposition")
    cert = cert or load_certificate()
    ident = verify_identity(cert)
    if not ident.ok:
        raise ValueError("certificate identity does not verify")
    terms = ident.accepted_terms
    trace = lyapunov_trace(rec, cert)
    f = rescale_to_unit_smoothness(rec.obj)
    mu = f.strong_mu
    sx_m = np.array(cert.Sx.at_mu_float(mu))
    sy_m = np.array(cert.Sy.at_mu_float(mu))
    star_x, star_y = f.saddle
    sums, sos, mins = [], [], []
    for t in range(rec.T):
        s0, s1 = rec.states[t], rec.states[t + 1]
        X = {"t": s0.x, "t+1": s1.x, "*": star_x}
        Y = {"t": s0.y, "t+1": s1.y, "*": star_y}
        cache = {}

        def at(i, j):
            if (i, j) not in cache:
                cache[i, j] = (f.value(X[i], Y[j]), *f.grad(X[i], Y[j]))
            return cache[i, j]

        total, lo = 0.0, np.inf
        for term in terms:
            lam = float(term.multiplier(cert.lambdas))
            if term.kind == "smooth":
                i, j, k, l = term.indices
                _, gxa, gya = at(i, j)
                _, gxb, gyb = at(k, l)
                m = _m_smooth(
                    np.concatenate([X[i], Y[j]]), np.concatenate([X[k], Y[l]]),
                    np.concatenate([gxa, gya]), np.concatenate([gxb, gyb]),
                )
            elif term.kind == "convex":
                i, j, k = term.indices
                fa, ga, _ = at(i, k)
                fb, gb, _ = at(j, k)
                m = _coco(fa, fb, ga, gb, X[i], X[j], mu)
            else:
                i, j, k = term.indices
                fa, _, ga = at(k, i)
                fb, _, gb = at(k, j)
                m = _coco(-fa, -fb, -ga, -gb, Y[i], Y[j], mu)
            lo = min(lo, m)
            total += lam * m

        def xi_block(block, star, pos, mom):
            g = lambda i, j: at(i, j)[1 if block == "x" else 2]
            return [pos - star, g("*", "t"), g("*", "t+1"), g("t+1", "*"),
                    g("t", "t"), g("t+1", "t"), g("t+1", "t+1"), mom]

        ux = xi_block("x", star_x, s0.x, s0.v)
        uy = xi_block("y", star_y, s0.y, s0.w)
        quad = sum(sx_m[a, b] * (ux[a] @ ux[b]) for a in range(8) for b in range(8))
        quad += sum(sy_m[a, b] * (uy[a] @ uy[b]) for a in range(8) for b in range(8))
        sums.append(total)
        sos.append(float(quad) / (2 * (1 - mu)))
        mins.append(lo)
    sums, sos = np.array(sums), np.array(sos)
    return ProgressDecomposition(sums, sos, trace.residuals - sums - sos, np.array(mins))


@dataclass
class RateReport:
    theorem: str
    bound: float
    measured: float
    margin: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self, rec: TrajectoryRecord | None = None) -> dict:
        out = {}
        if rec is not None:
            out.update(
                problem=rec.problem,
                algorithm=rec.params.algorithm,
                eta=rec.params.eta,
                beta=rec.params.beta,
                T=rec.T,
            )
        out.update(bound=self.bound, measured=self.measured, margin=self.margin)
        out["pass"] = self.passed
        out["theorem"] = self.theorem
        out["metadata"] = self.metadata
        return out


def check_cc_bound(rec: TrajectoryRecord) -> RateReport:
    """``(1/T) sum_{t<T} |grad f(z_t)|^2 <= 12 |z_0 - z*|^2 / (eta^2 T)``."""
    _require_certified(rec, "check_cc_bound")
    T, eta = rec.T, rec.params.eta
    measured = float(np.mean(rec.grad_norm_sq[:T]))
    bound = 12 * float(rec.dist_sq[0]) / (eta * eta * T)
    return RateReport(
        "cc",
        bound,
        measured,
        bound - measured,
        measured <= bound * (1 + BOUND_RTOL),
        {"min_grad_norm_sq": float(np.min(rec.grad_norm_sq[:T])), "mean_grad_norm_sq": measured},
    )


def check_scsc_bound(rec: TrajectoryRecord) -> RateReport:
    """``|z_T' - z*|^2 <= 6 (1 - eta mu)^T' |z_0 - z*|^2`` for every prefix ``T'``."""
    _require_certified(rec, "check_scsc_bound")
    mu = rec.obj.strong_mu
    if not mu > 0:
        raise ValueError("check_scsc_bound needs a strongly-convex-strongly-concave problem")
    rate = 1 - rec.params.eta * mu
    bounds = 6 * rate ** np.arange(rec.T + 1) * rec.dist_sq[0]
    ok = rec.dist_sq <= bounds * (1 + BOUND_RTOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bounds > 0, rec.dist_sq / bounds, 0.0)
    meta = {"worst_prefix_ratio": float(np.max(ratio)), "rate": rate}
    if not ok.all():
        meta["first_violation"] = int(np.argmin(ok))
    return RateReport(
        "scsc",
        float(bounds[-1]),
        float(rec.dist_sq[-1]),
        float(bounds[-1] - rec.dist_sq[-1]),
        bool(ok.all()),
        meta,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SADDLECERT_THREADS", "") or (os.cpu_count() or 1)))
    except ValueError:
        return 1


def run_matrix(jobs: Sequence[Callable[[], object]], threads: int | None = None) -> list:
    """Run independent jobs, at most ``SADDLECERT_THREADS`` at a time; results keep job order."""
    threads = threads or _threads()
    if threads == 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


@dataclass
class Fig1Result:
    records: dict[str, TrajectoryRecord]
    checks: dict[str, bool]
    files: list[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


FIG1_RUNS = {
    "left_alternating": ("bilinear", AlgoParams(0.2, -0.5, "alt-neg-momentum")),
    "left_simultaneous": ("bilinear", AlgoParams(0.2, -0.8, "sim-momentum")),
    "right_alternating": ("scsc", AlgoParams(0.2, -0.5, "alt-neg-momentum")),
    "right_simultaneous": ("scsc", AlgoParams(0.1, -0.9, "sim-momentum")),
}


def windowed_max(r: np.ndarray, window: int = 20) -> np.ndarray:
    return np.array([r[i : i + window].max() for i in range(0, len(r), window)])


def reproduce_fig1(out_dir=None, T: int = 200, z0=(1.0, 0.0), mu: float = 0.01) -> Fig1Result:
    """Both panels: ``f = xy`` and the ``mu = 0.01`` strongly-convex-strongly-concave quadratic."""
    problems = {"bilinear": bilinear(1), "scsc": fig1_scsc(mu)}
    names = list(FIG1_RUNS)
    recs = run_matrix(
        [
            (lambda n=n: run_trajectory(problems[FIG1_RUNS[n][0]], FIG1_RUNS[n][1], np.asarray(z0), T))
            for n in names
        ]
    )
    records = dict(zip(names, recs))
    la, ls = records["left_alternating"].radius(), records["left_simultaneous"].radius()
    ra, rs = records["right_alternating"].radius(), records["right_simultaneous"].radius()
    wins = windowed_max(la)
    checks = {
        "left simultaneous diverges (final radius > initial)": bool(ls[-1] > ls[0]),
        "left alternating converges (final radius < initial)": bool(la[-1] < la[0]),
        "left alternating 20-step window maxima non-increasing": bool(np.all(np.diff(wins) <= 0)),
        "right alternating ends closer than simultaneous": bool(ra[-1] < rs[-1]),
    }
    result = Fig1Result(records, checks)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for n, rec in records.items():
            for ext, fn in (("csv", export_csv), ("svg", export_svg)):
                path = out / f"{n}.{ext}"
                fn(rec, path)
                result.files.append(path)
        summary = out / "fig1.json"
        summary.write_text(json.dumps({"T": T, "z0": list(map(float, z0)), "checks": checks}, indent=1, sort_keys=True) + "\n")
        result.files.append(summary)
    return result


def _g17(v) -> str:
    return format(float(v), ".17g")


def trajectory_csv(rec: TrajectoryRecord, trace: LyapunovTrace | None = None) -> str:
    """CSV text: ``t,x...,y...,grad_norm_sq,dist_sq,lyapunov``.

    ``lyapunov`` is ``xi_t' Q xi_t`` on ``f / L`` when the saddle is known,
    blank otherwise; ``dist_sq`` is blank without a known saddle.
    """
    dx, dy = rec.obj.dims
    if trace is None and rec.obj.saddle is not None:
        trace = _lyapunov_values(rec)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *(f"x{i}" for i in range(dx)), *(f"y{j}" for j in range(dy)), "grad_norm_sq", "dist_sq", "lyapunov"])
    for t, s in enumerate(rec.states):
        w.writerow(
            [
                t,
                *map(_g17, s.x),
                *map(_g17, s.y),
                _g17(rec.grad_norm_sq[t]),
                _g17(rec.dist_sq[t]) if rec.dist_sq is not None else "",
                _g17(trace.values[t]) if trace is not None else "",
            ]
        )
    return buf.getvalue()


def _lyapunov_values(rec: TrajectoryRecord) -> LyapunovTrace:
    cert = load_certificate()
    qx, qy = _q_float(cert.Qx), _q_float(cert.Qy)
    f = rescale_to_unit_smoothness(rec.obj)
    xs, ys = f.saddle
    vals = []
    for s in rec.states:
        gx, gy = f.grad(s.x, s.y)
        vals.append(_block_quad(qx, (s.x - xs, gx, s.v)) + _block_quad(qy, (s.y - ys, gy, s.w)))
    return LyapunovTrace(np.array(vals), np.array([]), np.array([]), np.array([]), f.strong_mu)


def export_csv(rec: TrajectoryRecord, path, trace: LyapunovTrace | None = None) -> Path:
    path = Path(path)
    path.write_text(trajectory_csv(rec, trace))
    return path


def export_json(report, path, rec: TrajectoryRecord | None = None) -> Path:
    """Write a :class:`RateReport`, a verification report, or a plain dict."""
    if isinstance(report, RateReport):
        data = report.to_json_dict(rec)
    elif hasattr(report, "to_dict"):
        data = report.to_dict()
    else:
        data = report
    path = Path(path)
    path.write_text(json.dumps(data, indent=1, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def trajectory_svg(rec: TrajectoryRecord, size: int = 400) -> str:
    """Single polyline of the ``(x, y)`` path with start and end markers."""
    if rec.obj.dims != (1, 1):
        raise ValueError("SVG paths need a problem with d_x = d_y = 1")
    pts = np.column_stack([rec.xs[:, 0], -rec.ys[:, 0]])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    pad = 0.05 * span
    vb = (lo[0] - pad, lo[1] - pad, (hi[0] - lo[0]) + 2 * pad, (hi[1] - lo[1]) + 2 * pad)
    stroke = span / 300
    coords = " ".join(f"{x:.6g},{y:.6g}" for x, y in pts)
    (x0, y0), (x1, y1) = pts[0], pts[-1]
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{vb[0]:.6g} {vb[1]:.6g} {vb[2]:.6g} {vb[3]:.6g}">\n'
        f'<polyline fill="none" stroke="black" stroke-width="{stroke:.6g}" points="{coords}"/>\n'
        f'<circle class="start" cx="{x0:.6g}" cy="{y0:.6g}" r="{4 * stroke:.6g}" fill="green"/>\n'
        f'<circle class="end" cx="{x1:.6g}" cy="{y1:.6g}" r="{4 * stroke:.6g}" fill="red"/>\n'
        "</svg>\n"
    )


def export_svg(rec: TrajectoryRecord, path) -> Path:
    path = Path(path)
    path.write_text(trajectory_svg(rec))
    return path


def export(obj, fmt: str, path, **kw) -> Path:
    if fmt == "csv":
        return export_csv(obj, path, **kw)
    if fmt == "json":
        return export_json(obj, path, **kw)
    if fmt == "svg":
        return export_svg(obj, path)
    raise ValueError(f"unknown export format {fmt!r}")
