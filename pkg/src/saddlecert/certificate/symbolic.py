"""Symbolic expansion of the progress identity over the extended state.

Every scalar quantity in one iteration of alternating negative-momentum GDA
is written as a polynomial (in ``mu``) combination of

* quadratic monomials in the extended-state coordinates (displacements,
  momenta, and partial gradients evaluated on the 3x3 grid of points built
  from ``{t, t+1, *}``), and
* function values ``f(x_i, y_j)`` on the same grid.

Because the co-coercivity terms carry a ``1/(2(1-mu))`` factor, every
expression built here is stored already multiplied by the clearing factor
``2(1-mu)``. All coefficients are therefore polynomials in ``mu``.

Iterates at ``t+1`` are eliminated through the update rule, so only ``x_t``,
``y_t``, ``v_t``, ``w_t`` and gradients survive as coordinates. The gradient
at ``(*, *)`` is zero by stationarity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

from ..exact_algebra import ONE, ZERO, MU, PolyMatrix, UniPoly, as_poly, as_rational

INDICES = ("t", "t+1", "*")

CLEAR = (ONE - MU).scale(2)  # 2(1 - mu)


class GridPoint(NamedTuple):
    x_index: str
    y_index: str

    def __str__(self):
        return f"({self.x_index},{self.y_index})"


GRID = tuple(GridPoint(i, j) for i in INDICES for j in INDICES)
SADDLE = GridPoint("*", "*")

# Gradient grid points carried by the canonical extended state, in listing order.
CANONICAL_GRAD_POINTS = (
    GridPoint("*", "t"),
    GridPoint("*", "t+1"),
    GridPoint("t+1", "*"),
    GridPoint("t", "t"),
    GridPoint("t+1", "t"),
    GridPoint("t+1", "t+1"),
)


class Coord(NamedTuple):
    """One coordinate of the extended state ``Xi_t``."""

    block: str  # "x" or "y"
    kind: str  # "disp", "grad" or "mom"
    point: GridPoint | None = None

    @property
    def label(self) -> str:
        if self.kind == "disp":
            return f"{self.block}_t-{self.block}*"
        if self.kind == "mom":
            return "v_t" if self.block == "x" else "w_t"
        return f"grad_{self.block}{self.point}"


def canonical_basis(block: str) -> tuple[Coord, ...]:
    return (
        (Coord(block, "disp"),)
        + tuple(Coord(block, "grad", p) for p in CANONICAL_GRAD_POINTS)
        + (Coord(block, "mom"),)
    )


CANONICAL = {b: canonical_basis(b) for b in ("x", "y")}


def _order_key(c: Coord):
    canon = CANONICAL[c.block]
    if c in canon:
        return (c.block, 0, canon.index(c), "")
    return (c.block, 1, 0, str(c.point))


def _check_index(*indices):
    for i in indices:
        if i not in INDICES:
            raise ValueError(f"grid index {i!r} not in {INDICES}")


class Lin:
    """Linear form: coordinate -> polynomial coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Coord, UniPoly] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @classmethod
    def coord(cls, c: Coord, coeff=1) -> "Lin":
        return cls({c: as_poly(coeff)})

    def __add__(self, other: "Lin") -> "Lin":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return Lin(out)

    def __neg__(self) -> "Lin":
        return Lin({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def scale(self, factor) -> "Lin":
        f = as_poly(factor)
        return Lin({k: v * f for k, v in self.terms.items()})

    def evaluate(self, values: Mapping[Coord, Fraction], mu) -> Fraction:
        return sum((v(mu) * values[k] for k, v in self.terms.items()), Fraction(0))


class SymExpr:
    """Quadratic form in extended-state coordinates plus grid function values.

    ``quad`` maps an ordered coordinate pair to the coefficient of the
    monomial ``a*b`` (for ``a == b`` the coefficient of ``a**2``).
    """

    __slots__ = ("quad", "funvals")

    def __init__(self, quad=None, funvals=None):
        self.quad = {k: v for k, v in (quad or {}).items() if not v.is_zero()}
        self.funvals = {k: v for k, v in (funvals or {}).items() if not v.is_zero()}
        for a, b in self.quad:
            if a.block != b.block:
                raise ValueError(f"cross-block quadratic term {a.label}*{b.label}")

    @staticmethod
    def _key(a: Coord, b: Coord):
        return (a, b) if _order_key(a) <= _order_key(b) else (b, a)

    @classmethod
    def product(cls, u: Lin, w: Lin) -> "SymExpr":
        quad: dict = {}
        for a, ca in u.terms.items():
            for b, cb in w.terms.items():
                k = cls._key(a, b)
                quad[k] = quad.get(k, ZERO) + ca * cb
        return cls(quad)

    @classmethod
    def square(cls, u: Lin) -> "SymExpr":
        return cls.product(u, u)

    @classmethod
    def funval(cls, p: GridPoint, coeff=1) -> "SymExpr":
        return cls(funvals={p: as_poly(coeff)})

    def __add__(self, other: "SymExpr") -> "SymExpr":
        quad = dict(self.quad)
        for k, v in other.quad.items():
            quad[k] = quad.get(k, ZERO) + v
        fv = dict(self.funvals)
        for k, v in other.funvals.items():
            fv[k] = fv.get(k, ZERO) + v
        return SymExpr(quad, fv)

    def __neg__(self) -> "SymExpr":
        return SymExpr({k: -v for k, v in self.quad.items()}, {k: -v for k, v in self.funvals.items()})

    def __sub__(self, other: "SymExpr") -> "SymExpr":
        return self + (-other)

    def scale(self, factor) -> "SymExpr":
        f = as_poly(factor)
        return SymExpr(
            {k: v * f for k, v in self.quad.items()},
            {k: v * f for k, v in self.funvals.items()},
        )

    def is_zero(self) -> bool:
        return not self.quad and not self.funvals

    def coordinates(self, block: str | None = None) -> set[Coord]:
        out = {c for pair in self.quad for c in pair}
        return {c for c in out if block is None or c.block == block}

    def extra_coordinates(self) -> list[Coord]:
        """Coordinates outside the canonical 8-per-block listing."""
        extra = [c for c in self.coordinates() if c not in CANONICAL[c.block]]
        return sorted(extra, key=_order_key)

    def basis(self, block: str) -> tuple[Coord, ...]:
        """Canonical basis of ``block`` followed by any extra coordinates used."""
        extra = [c for c in self.extra_coordinates() if c.block == block]
        return CANONICAL[block] + tuple(extra)

    def block_matrix(self, block: str, basis: Iterable[Coord] | None = None) -> PolyMatrix:
        """Symmetric matrix of the ``block`` quadratic form over ``basis``."""
        basis = tuple(basis) if basis is not None else self.basis(block)
        pos = {c: i for i, c in enumerate(basis)}
        n = len(basis)
        rows = [[ZERO] * n for _ in range(n)]
        for (a, b), v in self.quad.items():
            if a.block != block:
                continue
            if a not in pos or b not in pos:
                raise KeyError(f"coordinate outside the requested basis: {a.label}, {b.label}")
            i, j = pos[a], pos[b]
            if i == j:
                rows[i][i] = rows[i][i] + v
            else:
                half = v.scale(Fraction(1, 2))
                rows[i][j] = rows[i][j] + half
                rows[j][i] = rows[j][i] + half
        return PolyMatrix(rows)

    @property
    def quad_x(self) -> PolyMatrix:
        return self.block_matrix("x")

    @property
    def quad_y(self) -> PolyMatrix:
        return self.block_matrix("y")

    def evaluate(self, mu, coords: Mapping[Coord, object], funvals: Mapping[GridPoint, object] | None = None) -> Fraction:
        """Exact value at a given ``mu`` and coordinate/function-value assignment.

        Coordinate values may be rationals or equal-length sequences of
        rationals (the Kronecker ``(.) x I_d`` lift); products are then inner
        products.
        """
        mu = as_rational(mu)
        total = Fraction(0)
        for (a, b), c in self.quad.items():
            total += c(mu) * _inner(coords[a], coords[b])
        for p, c in self.funvals.items():
            total += c(mu) * Fraction(funvals[p])
        return total


def _inner(u, w) -> Fraction:
    if isinstance(u, (list, tuple)):
        return sum((Fraction(a) * Fraction(b) for a, b in zip(u, w)), Fraction(0))
    return Fraction(u) * Fraction(w)


def grad(block: str, i: str, j: str) -> Lin:
    """Partial gradient ``grad_block f(x_i, y_j)``; zero at the saddle."""
    _check_index(i, j)
    p = GridPoint(i, j)
    if p == SADDLE:
        return Lin()
    return Lin.coord(Coord(block, "grad", p))


def position(block: str, i: str, eta, beta) -> Lin:
    """``x_i - x*`` (or ``y_i - y*``) with the ``t+1`` iterate eliminated."""
    _check_index(i)
    eta, beta = as_rational(eta), as_rational(beta)
    if i == "*":
        return Lin()
    disp = Lin.coord(Coord(block, "disp"))
    if i == "t":
        return disp
    mom = Lin.coord(Coord(block, "mom"), beta)
    if block == "x":
        return disp - grad("x", "t", "t").scale(eta) + mom
    return disp + grad("y", "t+1", "t").scale(eta) + mom


def successor_coordinates(eta="1/5", beta="-1/2") -> dict[str, Lin]:
    """Coordinates of ``xi_{t+1}`` as linear forms in the extended basis."""
    eta, beta = as_rational(eta), as_rational(beta)
    return {
        "x_disp": position("x", "t+1", eta, beta),
        "x_grad": grad("x", "t+1", "t+1"),
        "x_mom": grad("x", "t", "t").scale(-eta) + Lin.coord(Coord("x", "mom"), beta),
        "y_disp": position("y", "t+1", eta, beta),
        "y_grad": grad("y", "t+1", "t+1"),
        "y_mom": grad("y", "t+1", "t").scale(eta) + Lin.coord(Coord("y", "mom"), beta),
    }


def state_coordinates() -> dict[str, Lin]:
    """Coordinates of ``xi_t``."""
    return {
        "x_disp": Lin.coord(Coord("x", "disp")),
        "x_grad": grad("x", "t", "t"),
        "x_mom": Lin.coord(Coord("x", "mom")),
        "y_disp": Lin.coord(Coord("y", "disp")),
        "y_grad": grad("y", "t", "t"),
        "y_mom": Lin.coord(Coord("y", "mom")),
    }


def quadratic_form(q: PolyMatrix, vec: list[Lin]) -> SymExpr:
    out = SymExpr()
    for a in range(q.n):
        for b in range(q.n):
            if not q[a, b].is_zero():
                out = out + SymExpr.product(vec[a], vec[b]).scale(q[a, b])
    return out


def lyapunov(qx: PolyMatrix, qy: PolyMatrix, xi: Mapping[str, Lin]) -> SymExpr:
    return quadratic_form(qx, [xi["x_disp"], xi["x_grad"], xi["x_mom"]]) + quadratic_form(
        qy, [xi["y_disp"], xi["y_grad"], xi["y_mom"]]
    )


def expand_smoothness(i, j, k, l, eta="1/5", beta="-1/2") -> SymExpr:
    """Cleared ``2(1-mu) * M_smooth(x_i, y_j, x_k, y_l)``."""
    _check_index(i, j, k, l)
    dx = position("x", i, eta, beta) - position("x", k, eta, beta)
    dy = position("y", j, eta, beta) - position("y", l, eta, beta)
    gx = grad("x", i, j) - grad("x", k, l)
    gy = grad("y", i, j) - grad("y", k, l)
    m = SymExpr.square(dx) + SymExpr.square(dy) - SymExpr.square(gx) - SymExpr.square(gy)
    return m.scale(CLEAR)


def expand_co_coercivity(role: str, i, j, k, eta="1/5", beta="-1/2") -> SymExpr:
    """Cleared co-coercivity of a restricted function.

    ``role="convex"`` gives ``2(1-mu) * C_{f(., y_k)}(x_i, x_j)``;
    ``role="concave"`` gives ``2(1-mu) * C_{-f(x_k, .)}(y_i, y_j)``.
    """
    _check_index(i, j, k)
    half_mu = MU.scale(Fraction(1, 2))
    if role == "convex":
        d = position("x", i, eta, beta) - position("x", j, eta, beta)
        g_i, g_j = grad("x", i, k), grad("x", j, k)
        values = SymExpr.funval(GridPoint(i, k)) - SymExpr.funval(GridPoint(j, k))
        linear = SymExpr.product(g_j, d)
        # C_g(a,b) = g(a) - g(b) - <grad g(b), a-b> - ...
        first = values - linear
        resid = g_i - g_j - d.scale(MU)
    elif role == "concave":
        d = position("y", i, eta, beta) - position("y", j, eta, beta)
        g_i, g_j = grad("y", k, i), grad("y", k, j)
        values = SymExpr.funval(GridPoint(k, j)) - SymExpr.funval(GridPoint(k, i))
        first = values + SymExpr.product(g_j, d)
        resid = g_j - g_i - d.scale(MU)
    else:
        raise ValueError(f"unknown role {role!r}")
    body = first - SymExpr.square(d).scale(half_mu)
    return body.scale(CLEAR) - SymExpr.square(resid)


def expand_term(kind: str, indices, eta="1/5", beta="-1/2") -> SymExpr:
    if kind == "smooth":
        return expand_smoothness(*indices, eta=eta, beta=beta)
    if kind in ("convex", "concave"):
        return expand_co_coercivity(kind, *indices, eta=eta, beta=beta)
    raise ValueError(f"unknown valid-inequality kind {kind!r}")


def progress_lhs(qx: PolyMatrix, qy: PolyMatrix, eta="1/5", beta="-1/2") -> SymExpr:
    """Cleared ``(1-mu/5) V_t - V_{t+1} - (1-mu) |grad f(z_t)|^2``."""
    v_now = lyapunov(qx, qy, state_coordinates())
    v_next = lyapunov(qx, qy, successor_coordinates(eta, beta))
    xi = state_coordinates()
    grad_sq = SymExpr.square(xi["x_grad"]) + SymExpr.square(xi["y_grad"])
    contraction = ONE - MU.scale(as_rational(eta))
    lhs = v_now.scale(contraction) - v_next - grad_sq.scale(ONE - MU)
    return lhs.scale(CLEAR)
