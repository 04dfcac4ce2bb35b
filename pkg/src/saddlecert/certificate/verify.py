"""Exact verification of the progress certificate.

Stages run in a fixed order: progress identity, Lyapunov sandwich bounds,
characteristic-polynomial tables, and positive semidefiniteness of the
residual blocks on ``mu in [0, 1)``. Mismatches are reported, never raised.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from ..exact_algebra import (
    PolyMatrix,
    UniPoly,
    char_poly,
    count_roots_open,
    descartes_all_roots_nonneg,
    psd_check_constant,
    sign,
)
from .model import Certificate, Term
from .symbolic import CANONICAL, SymExpr, expand_term, progress_lhs

ARITY = {"smooth": 4, "convex": 3, "concave": 3}


def assemble_residual(cert: Certificate, terms: tuple[Term, ...] | None = None) -> SymExpr:
    """Cleared residual ``2(1-mu) * (LHS - sum lambda_a M_a)``."""
    terms = cert.terms if terms is None else terms
    r = progress_lhs(cert.Qx, cert.Qy, cert.eta, cert.beta)
    for term in terms:
        m = term.multiplier(cert.lambdas)
        if m:
            r = r - expand_term(term.kind, term.indices, cert.eta, cert.beta).scale(m)
    return r


def _compare_block(r: SymExpr, block: str, expected: PolyMatrix) -> tuple[list[dict], list[str]]:
    basis = r.basis(block)
    got = r.block_matrix(block, basis)
    canon = CANONICAL[block]
    mismatches = []
    for i, a in enumerate(canon):
        for j in range(i, len(canon)):
            if got[i, j] != expected[i, j]:
                mismatches.append(
                    {
                        "block": block,
                        "row": a.label,
                        "col": canon[j].label,
                        "computed": str(got[i, j]),
                        "expected": str(expected[i, j]),
                    }
                )
    stray = []
    for k in range(len(canon), len(basis)):
        if any(not got[k, j].is_zero() for j in range(len(basis))):
            stray.append(basis[k].label)
    return mismatches, stray


@dataclass
class ResidualCheck:
    terms: list[str]
    funvals_cancel: bool
    surviving_funvals: dict[str, str]
    extra_coordinates: list[str]
    residual_matches_appendix: bool
    mismatches: list[dict]

    @property
    def ok(self) -> bool:
        return self.funvals_cancel and not self.extra_coordinates and self.residual_matches_appendix


def check_residual(cert: Certificate, terms: tuple[Term, ...] | None = None) -> ResidualCheck:
    terms = cert.terms if terms is None else terms
    r = assemble_residual(cert, terms)
    mx, sx = _compare_block(r, "x", cert.Sx)
    my, sy = _compare_block(r, "y", cert.Sy)
    return ResidualCheck(
        terms=[str(t) for t in terms],
        funvals_cancel=not r.funvals,
        surviving_funvals={str(p): str(c) for p, c in sorted(r.funvals.items())},
        extra_coordinates=sx + sy,
        residual_matches_appendix=not (mx or my),
        mismatches=mx + my,
    )


@dataclass
class IdentityResult:
    funvals_cancel: bool
    residual_matches_appendix: bool
    multipliers_nonneg: bool
    basis_mismatch: list[str]
    printed: ResidualCheck
    resolved_terms: list[str] | None = None
    accepted_terms: tuple[Term, ...] | None = None
    resolution_candidates: list[str] = field(default_factory=list)
    finding: str = ""

    @property
    def ok(self) -> bool:
        return self.funvals_cancel and self.residual_matches_appendix and self.multipliers_nonneg


def _terms_with_extras(cert: Certificate) -> list[int]:
    out = []
    for n, t in enumerate(cert.terms):
        if expand_term(t.kind, t.indices, cert.eta, cert.beta).extra_coordinates():
            out.append(n)
    return out


def _resolve(cert: Certificate, culprits: list[int]) -> list[tuple[int, Term]]:
    """Single-term replacements of ``culprits`` that make the identity exact.

    Each culprit is swapped for every other valid inequality of the same kind
    and weight on the grid; the identity is re-checked from scratch.
    """
    found = []
    grid = ("t", "t+1", "*")
    for n in culprits:
        old = cert.terms[n]
        for idx in itertools.product(grid, repeat=ARITY[old.kind]):
            if idx == old.indices:
                continue
            cand = Term(old.weights, old.kind, idx)
            if expand_term(cand.kind, cand.indices, cert.eta, cert.beta).is_zero():
                continue
            terms = cert.terms[:n] + (cand,) + cert.terms[n + 1 :]
            if check_residual(cert, terms).ok:
                found.append((n, cand))
    return found


def verify_identity(cert: Certificate) -> IdentityResult:
    """Check the progress identity for the printed multiplier combination.

    If the printed combination leaves function values or coordinates outside
    the canonical extended state, the offending terms are isolated and every
    same-kind single-term replacement is tried. A unique replacement that
    makes the identity exact is reported as the resolution.
    """
    nonneg = all(lam >= 0 for lam in cert.lambdas) and all(
        t.multiplier(cert.lambdas) >= 0 for t in cert.terms
    )
    printed = check_residual(cert)
    result = IdentityResult(
        funvals_cancel=printed.funvals_cancel,
        residual_matches_appendix=printed.residual_matches_appendix and not printed.extra_coordinates,
        multipliers_nonneg=nonneg,
        basis_mismatch=list(printed.extra_coordinates),
        printed=printed,
    )
    if printed.ok:
        result.accepted_terms = cert.terms
        return result
    culprits = _terms_with_extras(cert)
    if not culprits:
        result.finding = "residual does not match the shipped Sx, Sy"
        return result
    found = _resolve(cert, culprits)
    result.resolution_candidates = [f"{cert.terms[n]} -> {cand}" for n, cand in found]
    culprit_names = ", ".join(str(cert.terms[n]) for n in culprits)
    if len(found) != 1:
        result.finding = (
            f"term(s) {culprit_names} reference coordinates outside the extended state "
            f"({', '.join(printed.extra_coordinates)}); "
            f"{len(found)} single-term replacement(s) reconcile the identity"
        )
        return result
    n, cand = found[0]
    terms = cert.terms[:n] + (cand,) + cert.terms[n + 1 :]
    result.resolved_terms = [str(t) for t in terms]
    result.accepted_terms = terms
    result.funvals_cancel = True
    result.residual_matches_appendix = True
    result.finding = (
        f"as printed, {cert.terms[n]} references {', '.join(printed.extra_coordinates)} "
        f"and leaves function values {printed.surviving_funvals}; "
        f"replacing it by {cand} cancels every function value and reproduces Sx, Sy exactly"
    )
    return result


def q_bound_details(cert: Certificate, lower=50, upper=150) -> dict[str, bool]:
    e11 = PolyMatrix([[lower if i == j == 0 else 0 for j in range(3)] for i in range(3)])
    top = PolyMatrix.identity(3, upper)
    return {
        "Qx - lower*E11 >= 0": psd_check_constant(cert.Qx - e11),
        "Qy - lower*E11 >= 0": psd_check_constant(cert.Qy - e11),
        "upper*I - Qx >= 0": psd_check_constant(top - cert.Qx),
        "upper*I - Qy >= 0": psd_check_constant(top - cert.Qy),
    }


def verify_q_bounds(cert: Certificate, lower=50, upper=150) -> bool:
    """Exact check of ``lower * E11 <= Qx, Qy <= upper * I``."""
    return all(q_bound_details(cert, lower, upper).values())


def charpoly_table_diff(s: PolyMatrix, table) -> list[dict]:
    got = char_poly(s).table()
    rows = max(len(got), len(table))
    cols = max(max((len(r) for r in got), default=0), max((len(r) for r in table), default=0))
    diff = []
    for i in range(rows):
        for j in range(cols):
            a = got[i][j] if i < len(got) and j < len(got[i]) else Fraction(0)
            b = table[i][j] if i < len(table) and j < len(table[i]) else Fraction(0)
            if a != b:
                diff.append({"mu_power": i, "zeta_power": j, "computed": str(a), "table": str(b)})
    return diff


def verify_charpoly_tables(cert: Certificate) -> bool:
    return not charpoly_table_diff(cert.Sx, cert.Cx) and not charpoly_table_diff(cert.Sy, cert.Cy)


@dataclass
class IntervalPsdResult:
    ok: bool
    failures: list[str]
    signs_at_zero: list[int]
    roots_in_interval: list[int]

    def __bool__(self):
        return self.ok


def verify_psd_on_interval(s: PolyMatrix) -> IntervalPsdResult:
    """Certify ``S(mu) >= 0`` for every ``mu`` in ``[0, 1)``.

    The characteristic polynomial ``det(S - zeta I)`` is real-rooted for each
    ``mu``. Its zeta-coefficients must alternate in sign at ``mu = 0``; a
    vanishing constant coefficient must leave ``mu = 0`` with the sign the
    pattern demands; and no coefficient may have a root in ``(0, 1)``.
    Then the pattern holds on the whole interval and all eigenvalues are
    non-negative.
    """
    coeffs = list(char_poly(s).zeta_coefficients)
    failures = []
    m = 0
    while m < len(coeffs) and coeffs[m].is_zero():
        m += 1
    live = coeffs[m:]
    signs0 = [sign(c(0)) for c in live]
    try:
        if not descartes_all_roots_nonneg(signs0):
            failures.append("coefficients at mu=0 do not alternate in sign")
    except ValueError as exc:
        failures.append(f"sign pattern at mu=0: {exc}")
    zeros_at_0 = 0
    while zeros_at_0 < len(signs0) and signs0[zeros_at_0] == 0:
        zeros_at_0 += 1
    if zeros_at_0 > 1:
        failures.append(f"{zeros_at_0} low-order coefficients vanish at mu=0")
    elif zeros_at_0 == 1 and len(live) > 1:
        lin = sign(live[0].coeff(1))
        if lin == 0 or lin != -signs0[1]:
            failures.append(
                f"c_{m}: linear mu-coefficient has sign {lin}, pattern needs {-signs0[1]}"
            )
    roots = [count_roots_open(c, 0, 1) for c in live]
    for j, k in enumerate(roots):
        if k:
            failures.append(f"c_{m + j} has {k} root(s) in (0,1)")
    return IntervalPsdResult(not failures, failures, signs0, roots)


@dataclass
class VerificationReport:
    funvals_cancel: bool
    residual_matches_appendix: bool
    basis_mismatch: list[str]
    q_sandwich: bool
    charpoly_tables_match: bool
    psd_on_interval: bool
    multipliers_nonneg: bool
    finding: str
    diagnostics: dict

    @property
    def passed(self) -> bool:
        return all(
            (
                self.funvals_cancel,
                self.residual_matches_appendix,
                self.q_sandwich,
                self.charpoly_tables_match,
                self.psd_on_interval,
                self.multipliers_nonneg,
            )
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


def _structure_errors(cert: Certificate) -> list[str]:
    errs = []
    if cert.Qx.n != 3 or cert.Qy.n != 3:
        errs.append("Qx, Qy must be 3x3")
    if not (cert.Qx.is_constant() and cert.Qy.is_constant()):
        errs.append("Qx, Qy must be constant")
    if cert.Sx.n != 8 or cert.Sy.n != 8:
        errs.append("Sx, Sy must be 8x8")
    if len(cert.lambdas) != 3:
        errs.append("need exactly three multipliers")
    for t in cert.terms:
        if t.kind not in ARITY or len(t.indices) != ARITY[t.kind] or len(t.weights) != 3:
            errs.append(f"malformed term {t!r}")
    return errs


def verify_certificate(cert: Certificate) -> VerificationReport:
    errs = _structure_errors(cert)
    if errs:
        return VerificationReport(
            False, False, [], False, False, False, False, "structural failure", {"structure": errs}
        )
    ident = verify_identity(cert)
    qd = q_bound_details(cert)
    dx = charpoly_table_diff(cert.Sx, cert.Cx)
    dy = charpoly_table_diff(cert.Sy, cert.Cy)
    px = verify_psd_on_interval(cert.Sx)
    py = verify_psd_on_interval(cert.Sy)
    return VerificationReport(
        funvals_cancel=ident.funvals_cancel,
        residual_matches_appendix=ident.residual_matches_appendix,
        basis_mismatch=ident.basis_mismatch,
        q_sandwich=all(qd.values()),
        charpoly_tables_match=not dx and not dy,
        psd_on_interval=px.ok and py.ok,
        multipliers_nonneg=ident.multipliers_nonneg,
        finding=ident.finding,
        diagnostics={
            "identity": {
                "printed": asdict(ident.printed),
                "resolved_terms": ident.resolved_terms,
                "resolution_candidates": ident.resolution_candidates,
            },
            "q_bounds": qd,
            "charpoly_tables": {"x": dx, "y": dy},
            "psd": {"x": asdict(px), "y": asdict(py)},
        },
    )
