"""The certificate: Lyapunov matrices, multipliers, residual blocks and tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

from ..exact_algebra import PolyMatrix, as_rational
from . import constants


class Term(NamedTuple):
    """One valid inequality in the multiplier combination.

    ``weights`` are the integer coefficients on ``(lambda1, lambda2, lambda3)``.
    """

    weights: tuple[int, int, int]
    kind: str
    indices: tuple[str, ...]

    def multiplier(self, lambdas) -> Fraction:
        return sum((w * lam for w, lam in zip(self.weights, lambdas)), Fraction(0))

    def __str__(self):
        args = {
            "smooth": lambda i, j, k, l: f"x_{i},y_{j},x_{k},y_{l}",
            "convex": lambda i, j, k: f"x_{i},x_{j},y_{k}",
            "concave": lambda i, j, k: f"y_{i},y_{j},x_{k}",
        }[self.kind](*self.indices)
        return f"M_{self.kind}({args})"


@dataclass(frozen=True)
class Certificate:
    Qx: PolyMatrix
    Qy: PolyMatrix
    lambdas: tuple[Fraction, Fraction, Fraction]
    Sx: PolyMatrix
    Sy: PolyMatrix
    Cx: tuple[tuple[Fraction, ...], ...]
    Cy: tuple[tuple[Fraction, ...], ...]
    terms: tuple[Term, ...]
    eta: Fraction = Fraction(1, 5)
    beta: Fraction = Fraction(-1, 2)

    @property
    def lambda1(self) -> Fraction:
        return self.lambdas[0]

    @property
    def lambda2(self) -> Fraction:
        return self.lambdas[1]

    @property
    def lambda3(self) -> Fraction:
        return self.lambdas[2]

    def with_lambda(self, index: int, value) -> "Certificate":
        lam = list(self.lambdas)
        lam[index] = as_rational(value)
        return replace(self, lambdas=tuple(lam))

    def to_dict(self) -> dict:
        def poly_rows(m: PolyMatrix):
            return [[[str(c) for c in e.coeffs] for e in row] for row in m.rows]

        def const_rows(m: PolyMatrix):
            return [[str(e.coeff(0)) for e in row] for row in m.rows]

        return {
            "eta": str(self.eta),
            "beta": str(self.beta),
            "lambdas": [str(v) for v in self.lambdas],
            "Qx": const_rows(self.Qx),
            "Qy": const_rows(self.Qy),
            "Sx": poly_rows(self.Sx),
            "Sy": poly_rows(self.Sy),
            "Cx": [[str(v) for v in row] for row in self.Cx],
            "Cy": [[str(v) for v in row] for row in self.Cy],
            "terms": [
                {"weights": list(t.weights), "kind": t.kind, "indices": list(t.indices)}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        """Build a certificate from :meth:`to_dict` output.

        Raises ``ValueError`` for malformed content, including asymmetric
        matrices.
        """

        def table(rows):
            return tuple(tuple(as_rational(v) for v in row) for row in rows)

        try:
            return cls(
                Qx=PolyMatrix([[(v,) for v in row] for row in data["Qx"]]),
                Qy=PolyMatrix([[(v,) for v in row] for row in data["Qy"]]),
                lambdas=tuple(as_rational(v) for v in data["lambdas"]),
                Sx=PolyMatrix([[tuple(e) for e in row] for row in data["Sx"]]),
                Sy=PolyMatrix([[tuple(e) for e in row] for row in data["Sy"]]),
                Cx=table(data["Cx"]),
                Cy=table(data["Cy"]),
                terms=tuple(
                    Term(tuple(t["weights"]), t["kind"], tuple(t["indices"]))
                    for t in data["terms"]
                ),
                eta=as_rational(data.get("eta", "1/5")),
                beta=as_rational(data.get("beta", "-1/2")),
            )
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed certificate: {exc}") from exc

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def read(cls, path) -> "Certificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


def load_certificate() -> Certificate:
    """The shipped certificate for ``eta = 1/5``, ``beta = -1/2``."""

    def table(rows):
        return tuple(tuple(Fraction(v) for v in row) for row in rows)

    return Certificate(
        Qx=PolyMatrix([[(v,) for v in row] for row in constants.QX]),
        Qy=PolyMatrix([[(v,) for v in row] for row in constants.QY]),
        lambdas=tuple(Fraction(v) for v in constants.LAMBDAS),
        Sx=PolyMatrix(constants.SX),
        Sy=PolyMatrix(constants.SY),
        Cx=table(constants.CX),
        Cy=table(constants.CY),
        terms=tuple(Term(*t) for t in constants.TERMS),
        eta=Fraction(constants.ETA),
        beta=Fraction(constants.BETA),
    )
