"""``saddlecert`` command line.

Exit codes: 0 when every requested check passes, 1 when a verification or
bound check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import harness
from .certificate import Certificate, load_certificate, verify_certificate
from .saddle_core import AlgoParams, make_problem

ALGO_NAMES = {
    "gda": "gda",
    "sim-nm": "sim-momentum",
    "alt-nm": "alt-neg-momentum",
    "eg": "extragradient",
    "ogda": "ogda",
}
PROBLEMS = ("bilinear", "fig1-scsc", "random-quad", "nonquad-cc")
CHECKS = ("cc-bound", "scsc-bound", "lyapunov")

# options whose value may start with '-' (e.g. --beta -1/2)
VALUE_FLAGS = {
    "--out", "--certificate", "--dump-certificate", "--problem", "--algo", "--eta", "--beta",
    "--steps", "--mu", "--L", "--dims", "--seed", "--z0", "--check", "--svg", "--report",
    "--coupling",
}


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected DX,DY, got {text!r}") from None
    return a, b


def float_list(text: str) -> list[float]:
    try:
        return [float(Fraction(v)) for v in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _problem_args(p: argparse.ArgumentParser):
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    p.add_argument("--eta", type=rational, help="stepsize, default 1/(5L)")
    p.add_argument("--beta", type=rational, default=Fraction(-1, 2))
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--mu", type=rational)
    p.add_argument("--L", type=rational)
    p.add_argument("--dims", type=int_pair, default=(1, 1))
    p.add_argument("--coupling", type=rational, help="nonquad-cc coupling strength (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z0", type=float_list, help="comma-separated x then y (default: Gaussian draw from --seed)")
    p.add_argument("--check", choices=CHECKS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="saddlecert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="exact verification of the progress certificate")
    v.add_argument("--out", help="write the verification report (JSON)")
    v.add_argument("--certificate", help="verify constants from this JSON file instead of the shipped ones")
    v.add_argument("--dump-certificate", help="write the constants being verified (JSON)")

    r = sub.add_parser("run", help="run one trajectory")
    _problem_args(r)
    r.add_argument("--algo", required=True, choices=ALGO_NAMES)
    r.add_argument("--out", help="trajectory CSV")
    r.add_argument("--svg", help="trajectory path SVG (1-d problems)")
    r.add_argument("--report", help="JSON report for --check (default: stdout)")

    c = sub.add_parser("compare", help="run several algorithms on one problem")
    _problem_args(c)
    c.add_argument("--algo", required=True, action="append", choices=ALGO_NAMES)
    c.add_argument("--out", help="joint JSON report (default: stdout)")

    f = sub.add_parser("fig1", help="reproduce the two-panel momentum comparison")
    f.add_argument("--out", required=True, help="output directory")

    rep = sub.add_parser("report", help="summarize a JSON report written by this tool")
    rep.add_argument("path")
    return parser


def _normalize(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] not in VALUE_FLAGS:
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _make_objective(a):
    dx, dy = a.dims
    if dx <= 0 or dy <= 0:
        raise UsageError("--dims must be positive")
    fixed_L = a.problem in ("bilinear", "fig1-scsc", "nonquad-cc")
    if fixed_L and a.L is not None:
        raise UsageError(f"--L does not apply to {a.problem}")
    if a.problem != "nonquad-cc" and a.coupling is not None:
        raise UsageError("--coupling applies only to nonquad-cc")
    try:
        if a.problem == "bilinear":
            if a.mu not in (None, 0):
                raise UsageError("bilinear has mu = 0")
            if dx != dy:
                raise UsageError("bilinear needs DX = DY")
            return make_problem("bilinear", d=dx)
        if a.problem == "fig1-scsc":
            if (dx, dy) != (1, 1):
                raise UsageError("fig1-scsc is two-dimensional (--dims 1,1)")
            mu = a.mu if a.mu is not None else Fraction(1, 100)
            return make_problem("fig1_scsc", mu=float(mu))
        if a.problem == "random-quad":
            mu = a.mu if a.mu is not None else Fraction(1, 10)
            L = a.L if a.L is not None else Fraction(1)
            return make_problem("random_quadratic", d_x=dx, d_y=dy, mu=float(mu), L=float(L), seed=a.seed)
        if dx != dy:
            raise UsageError("nonquad-cc needs DX = DY")
        if a.mu not in (None, 0):
            raise UsageError("nonquad-cc has mu = 0")
        c = a.coupling if a.coupling is not None else Fraction(1)
        return make_problem("nonquadratic_cc", d=dx, coupling=float(c), seed=a.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _params(a, obj, algo: str) -> AlgoParams:
    # eta stays exact until this boundary
    eta = a.eta if a.eta is not None else 1 / (5 * Fraction(obj.smoothness_L))
    if eta <= 0:
        raise UsageError("--eta must be positive")
    return AlgoParams(eta=float(eta), beta=float(a.beta), algorithm=ALGO_NAMES[algo])


def _z0(a, obj):
    dx, dy = obj.dims
    if a.z0 is None:
        # separate stream from the one that builds the problem
        return np.random.default_rng([a.seed, 1]).standard_normal(dx + dy)
    if len(a.z0) != dx + dy:
        raise UsageError(f"--z0 needs {dx + dy} values")
    return np.array(a.z0)


def _check_exact_params(a, obj, algo):
    if algo != "alt-nm":
        raise UsageError(f"--check {a.check} applies only to --algo alt-nm")
    eta = a.eta if a.eta is not None else 1 / (5 * Fraction(obj.smoothness_L))
    if eta * 5 * Fraction(obj.smoothness_L) != 1 or a.beta != Fraction(-1, 2):
        raise UsageError(f"--check {a.check} needs --eta 1/(5L) and --beta -1/2")
    if a.check == "scsc-bound" and not obj.strong_mu > 0:
        raise UsageError("--check scsc-bound needs mu > 0")


def _run_check(check: str, rec) -> dict:
    if check == "cc-bound":
        return harness.check_cc_bound(rec).to_json_dict(rec)
    if check == "scsc-bound":
        return harness.check_scsc_bound(rec).to_json_dict(rec)
    tr = harness.lyapunov_trace(rec)
    normalized = tr.residuals / (1 + tr.values[:-1])
    measured = float(normalized.min())
    bound = -harness.LYAPUNOV_RTOL
    rep = harness.RateReport(
        "lyapunov",
        bound,
        measured,
        measured - bound,
        tr.ok,
        {"first_violation": tr.first_violation, "violation": tr.violation},
    )
    return rep.to_json_dict(rec)


def _dump(data: dict, path: str | None):
    text = json.dumps(data, indent=1, sort_keys=True, default=harness._json_default) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(a) -> int:
    if a.certificate:
        try:
            cert = Certificate.read(a.certificate)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read certificate: {exc}") from None
    else:
        cert = load_certificate()
    if a.dump_certificate:
        cert.dump(a.dump_certificate)
    report = verify_certificate(cert)
    if a.out:
        harness.export_json(report, a.out)
    stages = [
        ("identity: function values cancel", report.funvals_cancel),
        ("identity: residual equals Sx, Sy", report.residual_matches_appendix),
        ("multipliers non-negative", report.multipliers_nonneg),
        ("Q sandwich 50 E11 <= Qx, Qy <= 150 I", report.q_sandwich),
        ("characteristic-polynomial tables", report.charpoly_tables_match),
        ("Sx, Sy >= 0 on [0, 1)", report.psd_on_interval),
    ]
    for name, ok in stages:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if report.finding:
        print(f"finding: {report.finding}")
    return 0 if report.passed else 1


def cmd_run(a) -> int:
    if a.steps < 1:
        raise UsageError("--steps must be at least 1")
    obj = _make_objective(a)
    if a.check:
        _check_exact_params(a, obj, a.algo)
    params = _params(a, obj, a.algo)
    if a.svg and obj.dims != (1, 1):
        raise UsageError("--svg needs a problem with --dims 1,1")
    try:
        rec = harness.run_trajectory(obj, params, _z0(a, obj), a.steps)
    except (harness.DivergenceError, FloatingPointError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 1
    if a.out:
        harness.export_csv(rec, a.out)
    if a.svg:
        harness.export_svg(rec, a.svg)
    if a.check:
        data = _run_check(a.check, rec)
        _dump(data, a.report)
        return 0 if data["pass"] else 1
    return 0


def cmd_compare(a) -> int:
    if a.steps < 1:
        raise UsageError("--steps must be at least 1")
    obj = _make_objective(a)
    if a.check:
        for algo in a.algo:
            _check_exact_params(a, obj, algo)
    z0 = _z0(a, obj)
    plist = [_params(a, obj, algo) for algo in a.algo]

    def job(p):
        try:
            return harness.run_trajectory(obj, p, z0, a.steps)
        except (harness.DivergenceError, FloatingPointError) as exc:
            return exc

    recs = harness.run_matrix([lambda p=p: job(p) for p in plist])
    rows, ok = [], True
    for algo, p, rec in zip(a.algo, plist, recs):
        row = {"algo": algo, "algorithm": p.algorithm, "eta": p.eta, "beta": p.beta}
        if isinstance(rec, Exception):
            row.update(diverged=True, error=str(rec))
            ok = False
        else:
            row.update(
                diverged=False,
                final_dist_sq=None if rec.dist_sq is None else float(rec.dist_sq[-1]),
                final_grad_norm_sq=float(rec.grad_norm_sq[-1]),
                grad_evals=int(rec.grad_evals[-1]),
            )
            if a.check:
                row["check"] = _run_check(a.check, rec)
                ok = ok and row["check"]["pass"]
        rows.append(row)
    _dump({"problem": obj.descriptor, "T": a.steps, "runs": rows}, a.out)
    return 0 if ok else 1


def cmd_fig1(a) -> int:
    res = harness.reproduce_fig1(a.out)
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if res.ok else 1


def cmd_report(a) -> int:
    try:
        data = json.loads(Path(a.path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read report: {exc}") from None
    if not isinstance(data, dict) or "pass" not in data:
        raise UsageError("not a saddlecert report (no 'pass' field)")
    for key in sorted(data):
        if isinstance(data[key], (str, int, float, bool)) or data[key] is None:
            print(f"{key}: {data[key]}")
    return 0 if data["pass"] else 1


COMMANDS = {"verify": cmd_verify, "run": cmd_run, "compare": cmd_compare, "fig1": cmd_fig1, "report": cmd_report}


def dispatch(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = build_parser().parse_args(_normalize(argv))
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
