"""Exact rational polynomial algebra.

Univariate polynomials in ``mu`` over :class:`fractions.Fraction`, bivariate
characteristic polynomials in ``(zeta, mu)``, symmetric polynomial matrices,
Sturm root counting and the all-real-roots form of Descartes' rule of signs.

Nothing in this module ever rounds. Every value is immutable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction

# Degree reported for the zero polynomial.
ZERO_DEGREE = -1

Coercible = Union["UniPoly", int, Fraction, str, Sequence]


def as_rational(value) -> Fraction:
    """Coerce ``value`` to a Fraction without passing through floats.

    Accepts ints, Fractions and strings such as ``"-81/10"`` or ``"0.2"``.
    Floats are rejected because their binary expansion is never what the
    caller meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def sign(value) -> int:
    return (value > 0) - (value < 0)


class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``mu**k``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_rational(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    @classmethod
    def constant(cls, value) -> "UniPoly":
        return cls((value,))

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "UniPoly":
        return cls([0] * degree + [coeff])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UniPoly":
        p = cls.constant(lead)
        for r in roots:
            p = p * cls((-as_rational(r), 1))
        return p

    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1 if self._c else ZERO_DEGREE

    def is_zero(self) -> bool:
        return not self._c

    def coeff(self, k: int) -> Fraction:
        return self._c[k] if 0 <= k < len(self._c) else Fraction(0)

    @property
    def lead(self) -> Fraction:
        return self._c[-1] if self._c else Fraction(0)

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self._c):
            acc = acc * x + float(c)
        return acc

    def __add__(self, other):
        other = as_poly(other)
        a, b = self._c, other._c
        n = max(len(a), len(b))
        return UniPoly(
            (a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)
        )

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self._c)

    def __sub__(self, other):
        return self + (-as_poly(other))

    def __rsub__(self, other):
        return as_poly(other) - self

    def __mul__(self, other):
        other = as_poly(other)
        if not self._c or not other._c:
            return ZERO
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            for j, b in enumerate(other._c):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def scale(self, factor) -> "UniPoly":
        factor = as_rational(factor)
        return UniPoly(c * factor for c in self._c)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other):
        other = as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self._c)
        dq = other.degree
        lead = other.lead
        if len(rem) - 1 < dq:
            return ZERO, self
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            q = rem[k] / lead
            quot[k - dq] = q
            if q:
                for j, c in enumerate(other._c):
                    rem[k - dq + j] -= q * c
        return UniPoly(quot), UniPoly(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def derivative(self) -> "UniPoly":
        return UniPoly(k * c for k, c in enumerate(self._c) if k)

    def monic(self) -> "UniPoly":
        return self.scale(1 / self.lead) if self._c else self

    def __eq__(self, other):
        try:
            other = as_poly(other)
        except TypeError:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self._c]})"

    def __str__(self):
        return format_poly(self, "mu")


ZERO = UniPoly()
ONE = UniPoly((1,))
MU = UniPoly((0, 1))


def as_poly(value: Coercible) -> UniPoly:
    if isinstance(value, UniPoly):
        return value
    if isinstance(value, (list, tuple)):
        return UniPoly(value)
    return UniPoly.constant(value)


def format_poly(p: UniPoly, var: str = "mu") -> str:
    if p.is_zero():
        return "0"
    terms = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            power = var if k == 1 else f"{var}^{k}"
            body = power if mag == 1 else f"{mag}*{power}"
        terms.append(("-" if c < 0 else "+", body))
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for s, body in terms[1:]:
        out += f" {s} {body}"
    return out


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd by the Euclidean algorithm."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def square_free_part(p: UniPoly) -> UniPoly:
    if p.is_zero():
        raise ValueError("zero polynomial has no square-free part")
    g = poly_gcd(p, p.derivative())
    return p // g


class BiPoly:
    """Polynomial in ``zeta`` whose coefficients are :class:`UniPoly` in ``mu``."""

    __slots__ = ("_c",)

    def __init__(self, zeta_coefficients: Iterable[Coercible]):
        c = [as_poly(v) for v in zeta_coefficients]
        while c and c[-1].is_zero():
            c.pop()
        self._c = tuple(c)

    @property
    def zeta_coefficients(self) -> tuple:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1 if self._c else ZERO_DEGREE

    def coeff(self, j: int) -> UniPoly:
        return self._c[j] if 0 <= j < len(self._c) else ZERO

    def at_mu(self, mu) -> UniPoly:
        """Specialize ``mu`` and return the univariate polynomial in ``zeta``."""
        return UniPoly(c(mu) for c in self._c)

    def table(self) -> list[list[Fraction]]:
        """Coefficient table: row ``i`` = power of mu, column ``j`` = power of zeta."""
        rows = max((c.degree for c in self._c), default=-1) + 1
        return [[c.coeff(i) for c in self._c] for i in range(rows)]

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"BiPoly({list(self._c)!r})"


class PolyMatrix:
    """Symmetric square matrix with :class:`UniPoly` entries."""

    __slots__ = ("_rows",)

    def __init__(self, rows: Sequence[Sequence[Coercible]], check_symmetric: bool = True):
        n = len(rows)
        if n == 0:
            raise ValueError("matrix dimension must be positive")
        entries = tuple(tuple(as_poly(v) for v in row) for row in rows)
        if any(len(r) != n for r in entries):
            raise ValueError("matrix must be square")
        if check_symmetric:
            for i in range(n):
                for j in range(i + 1, n):
                    if entries[i][j] != entries[j][i]:
                        raise ValueError(f"matrix not symmetric at ({i}, {j})")
        self._rows = entries

    @classmethod
    def identity(cls, n: int, scale=1) -> "PolyMatrix":
        return cls([[scale if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence[Coercible]) -> "PolyMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple:
        return self._rows

    def __getitem__(self, ij) -> UniPoly:
        i, j = ij
        return self._rows[i][j]

    @property
    def max_degree(self) -> int:
        return max(e.degree for row in self._rows for e in row)

    def is_constant(self) -> bool:
        return self.max_degree <= 0

    def at_mu(self, mu) -> list[list[Fraction]]:
        return [[e(mu) for e in row] for row in self._rows]

    def at_mu_float(self, mu: float) -> list[list[float]]:
        return [[e.eval_float(mu) for e in row] for row in self._rows]

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)]
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)]
        )

    def scale(self, factor: Coercible) -> "PolyMatrix":
        f = as_poly(factor)
        return PolyMatrix([[e * f for e in row] for row in self._rows])

    def replace(self, i: int, j: int, value: Coercible) -> "PolyMatrix":
        """Copy with entry ``(i, j)`` and its mirror set to ``value``."""
        rows = [list(r) for r in self._rows]
        rows[i][j] = rows[j][i] = as_poly(value)
        return PolyMatrix(rows)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"PolyMatrix(n={self.n})"


def _matmul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ZERO
            for k in range(n):
                if not a[i][k].is_zero() and not b[k][j].is_zero():
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def char_poly(m: PolyMatrix) -> BiPoly:
    """``det(M - zeta*I)`` by Faddeev-LeVerrier.

    The recurrence only divides by the integers ``1..n``, so it stays inside
    the polynomial ring over the rationals.
    """
    n = m.n
    a = [list(r) for r in m.rows]
    # monic coefficients of det(zeta*I - A), indexed by power of zeta
    c = [ZERO] * (n + 1)
    c[n] = ONE
    mk = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        amk = _matmul(a, mk)
        trace = ZERO
        for i in range(n):
            trace = trace + amk[i][i]
        c[n - k] = trace.scale(Fraction(-1, k))
        if k < n:
            mk = amk
            for i in range(n):
                mk[i][i] = mk[i][i] + c[n - k]
    if n % 2:
        c = [-p for p in c]
    return BiPoly(c)


def sturm_chain(p: UniPoly) -> list[UniPoly]:
    """``[p, p', -rem(p, p'), ...]`` down to the last non-zero remainder."""
    if p.is_zero():
        raise ValueError("Sturm chain of the zero polynomial")
    chain = [p, p.derivative()]
    if chain[1].is_zero():
        return chain[:1]
    while True:
        r = -(chain[-2] % chain[-1])
        if r.is_zero():
            return chain
        chain.append(r)


def sign_variations(chain: Sequence[UniPoly], x) -> int:
    signs = [s for s in (sign(q(x)) for q in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_root_count(p: UniPoly, lo, hi) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval ``(lo, hi]``."""
    lo, hi = as_rational(lo), as_rational(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if p.is_zero():
        raise ValueError("cannot count roots of the zero polynomial")
    chain = sturm_chain(square_free_part(p))
    return sign_variations(chain, lo) - sign_variations(chain, hi)


def count_roots_open(p: UniPoly, lo, hi) -> int:
    """Distinct real roots strictly inside ``(lo, hi)``."""
    hi = as_rational(hi)
    return sturm_root_count(p, lo, hi) - (1 if p(hi) == 0 else 0)


def descartes_all_roots_nonneg(signs: Sequence[int]) -> bool:
    """Sufficient sign test for a real-rooted polynomial to have no negative roots.

    ``signs`` lists coefficient signs from ``zeta**0`` upward. Leading zero
    low-order coefficients are skipped; the remaining block must be non-zero
    and strictly alternating.
    """
    signs = [sign(s) for s in signs]
    m = 0
    while m < len(signs) and signs[m] == 0:
        m += 1
    if m == len(signs):
        raise ValueError("all coefficients are zero")
    block = signs[m:]
    if 0 in block:
        raise ValueError(f"zero coefficient inside the high-order block at index {m + block.index(0)}")
    return all(a == -b for a, b in zip(block, block[1:]))


def _ldl_psd(rows: list[list[Fraction]]) -> bool:
    """Exact symmetric-pivoted LDL^T test for positive semidefiniteness."""
    a = [list(r) for r in rows]
    n = len(a)
    active = list(range(n))
    while active:
        p = max(active, key=lambda k: a[k][k])
        d = a[p][p]
        if d < 0:
            return False
        if d == 0:
            # a PSD matrix with a zero diagonal has that whole row zero
            return all(a[i][j] == 0 for i in active for j in active)
        active.remove(p)
        for i in active:
            f = a[i][p] / d
            if f:
                for j in active:
                    a[i][j] -= f * a[p][j]
    return True


def psd_check_constant(m: PolyMatrix) -> bool:
    """Decide ``M >= 0`` exactly for a matrix with constant entries.

    The characteristic-polynomial sign test is the primary decision; a pivoted
    LDL^T factorization must agree with it.
    """
    if not m.is_constant():
        raise ValueError("psd_check_constant needs degree-0 entries")
    coeffs = char_poly(m).at_mu(0).coeffs
    try:
        by_signs = descartes_all_roots_nonneg([sign(c) for c in coeffs])
    except ValueError:
        # an interior zero cannot occur when every root is >= 0
        by_signs = False
    by_ldl = _ldl_psd(m.at_mu(0))
    if by_signs != by_ldl:
        raise ArithmeticError("characteristic-polynomial and LDL PSD tests disagree")
    return by_signs
