"""Integral ternary quadratic forms.

A form is stored by its six coefficients ``(a, b, c, d, e, f)`` for

    F(x) = a x1^2 + b x2^2 + c x3^2 + d x1 x2 + e x1 x3 + f x2 x3,

together with the doubled Gram matrix ``A`` (so that ``F(x) = x^T A x / 2``).
All arithmetic on coefficients is exact Python integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateForm

Vector = Sequence[int]


def _det3(m: Sequence[Sequence[int]]) -> int:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _adjugate3(m: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    def minor(i: int, j: int) -> int:
        rows = [r for r in range(3) if r != i]
        cols = [c for c in range(3) if c != j]
        return m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]

    # adj(m)[i][j] = (-1)^{i+j} * minor(j, i)
    return tuple(tuple((-1) ** (i + j) * minor(j, i) for j in range(3)) for i in range(3))


def _sign_changes(seq: Sequence[int]) -> int:
    signs = [1 if v > 0 else -1 for v in seq if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


@dataclass(frozen=True)
class TernaryQuadraticForm:
    """A non-degenerate integral ternary quadratic form."""

    coeffs: tuple[int, int, int, int, int, int]
    gram2: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    det: int = field(init=False, repr=False)
    delta: int = field(init=False)

    def __post_init__(self) -> None:
        coeffs = tuple(int(v) for v in self.coeffs)
        if len(coeffs) != 6:
            raise ValueError("a ternary form needs exactly six coefficients")
        a, b, c, d, e, f = coeffs
        gram2 = ((2 * a, d, e), (d, 2 * b, f), (e, f, 2 * c))
        det = _det3(gram2)
        if det == 0:
            raise DegenerateForm(f"form {coeffs} is degenerate (det A = 0)")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "gram2", gram2)
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "delta", abs(det))

    # -- evaluation -------------------------------------------------------

    def __call__(self, x: Vector) -> int:
        return evaluate(self, x)

    def evaluate_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorised evaluation on an ``(..., 3)`` integer array (int64 arithmetic)."""
        a, b, c, d, e, f = self.coeffs
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return a * x1 * x1 + b * x2 * x2 + c * x3 * x3 + d * x1 * x2 + e * x1 * x3 + f * x2 * x3

    @property
    def gram2_array(self) -> np.ndarray:
        return np.array(self.gram2, dtype=np.int64)

    @property
    def adjugate(self) -> tuple[tuple[int, ...], ...]:
        return _adjugate3(self.gram2)

    @property
    def dual(self) -> "DualForm":
        return DualForm(self)

    def to_json(self) -> str:
        return json.dumps({"coeffs": list(self.coeffs)})

    @classmethod
    def from_json(cls, text: str | dict) -> "TernaryQuadraticForm":
        payload = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(payload["coeffs"]))


@dataclass(frozen=True)
class DualForm:
    """The adjugate form ``F*(c) = c^T adj(A) c`` of a ternary form."""

    form: TernaryQuadraticForm

    @property
    def matrix(self) -> tuple[tuple[int, ...], ...]:
        return self.form.adjugate

    def __call__(self, c: Vector) -> int:
        m = self.matrix
        c = [int(v) for v in c]
        return sum(c[i] * m[i][j] * c[j] for i in range(3) for j in range(3))


def new_form(coeffs: Sequence[int]) -> TernaryQuadraticForm:
    return TernaryQuadraticForm(tuple(int(v) for v in coeffs))


def evaluate(form: TernaryQuadraticForm, x: Vector) -> int:
    a, b, c, d, e, f = form.coeffs
    x1, x2, x3 = (int(v) for v in x)
    return a * x1 * x1 + b * x2 * x2 + c * x3 * x3 + d * x1 * x2 + e * x1 * x3 + f * x2 * x3


def dual_eval(form: TernaryQuadraticForm, c: Vector) -> int:
    return DualForm(form)(c)


def signature(form: TernaryQuadraticForm) -> tuple[int, int]:
    """Inertia ``(positives, negatives)`` of the Gram matrix.

    Exact: the characteristic polynomial of a real symmetric matrix has only
    real roots, so Descartes' rule of signs counts them without error.
    """
    m = form.gram2
    trace = m[0][0] + m[1][1] + m[2][2]
    minors2 = (
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
        + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2] - m[1][2] * m[2][1]
    )
    det = form.det
    # p(t) = t^3 - trace t^2 + minors2 t - det
    positives = _sign_changes([1, -trace, minors2, -det])
    negatives = _sign_changes([-1, -trace, -minors2, -det])
    return positives, negatives


def is_indefinite(form: TernaryQuadraticForm) -> bool:
    pos, neg = signature(form)
    return pos >= 1 and neg >= 1


def bad_modulus(form: TernaryQuadraticForm, L: int) -> int:
    """``Omega = 8 L Delta``; every prime where the local analysis is not generic divides it."""
    if L < 1:
        raise ValueError("L must be a positive integer")
    return 8 * L * form.delta


PYTHAGOREAN = new_form((1, 1, -1, 0, 0, 0))
"""x1^2 + x2^2 - x3^2."""

SQUARE_CONE = new_form((0, 0, -1, 1, 0, 0))
"""x1 x2 - x3^2, the cone of the obstruction example."""
