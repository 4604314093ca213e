"""Smooth weights and the singular integral of a ternary cone.

The singular integral of w equals the integral of w against the Leray measure
dS/|grad F| of the real cone {F = 0}. After an orthogonal change of variables
F = alpha y1^2 + beta y2^2 - gamma y3^2 (alpha, beta, gamma > 0; replace F by -F
if needed), and with y1 = rho cos(phi)/sqrt(alpha), y2 = rho sin(phi)/sqrt(beta),
y3 = +-rho/sqrt(gamma), the measure becomes drho dphi / (2 sqrt(alpha beta gamma)).

Two evaluators are provided:

* ``leray``: tensor quadrature in (rho, phi); deterministic and used by the harness.
* ``thickening``: (1/2 eps) times the integral of w over |F| < eps, estimated by
  Monte Carlo in the (y1, y2) plane with the exact y3-intervals of the shell,
  for a decreasing eps schedule, then extrapolated to eps = 0.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .errors import BadExtents
from .quadform import TernaryQuadraticForm, signature

KINDS = ("radial-bump", "box-bump", "octant-bump")


def bump1d(u: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - u^2)) on |u| < 1, else 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class WeightFunction:
    """A smooth bump on R^3.

    radial-bump: bump1d(|x - center| / radius).
    box-bump / octant-bump: prod_i bump1d((x_i - center_i) / extents_i); the
    octant kind additionally requires its support to lie in the open positive octant.
    symmetric: the average (w(x) + w(-x)) / 2, which stays smooth and in [0, 1].
    """

    kind: str
    center: tuple[float, float, float]
    extents: tuple[float, float, float]
    symmetric: bool = False

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.symmetric:
            return 0.5 * (self._base(x) + self._base(-x))
        return self._base(x)

    def _base(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center)
        if self.kind == "radial-bump":
            r = np.sqrt(np.sum((x - c) ** 2, axis=-1)) / self.extents[0]
            return bump1d(r)
        u = (x - c) / np.asarray(self.extents)
        return bump1d(u[..., 0]) * bump1d(u[..., 1]) * bump1d(u[..., 2])

    @property
    def radius(self) -> float:
        return self.extents[0]

    def pieces(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Axis-aligned boxes (lo, hi) whose union contains the support."""
        c = np.asarray(self.center, dtype=float)
        e = np.asarray(self.extents if self.kind != "radial-bump" else (self.extents[0],) * 3, dtype=float)
        boxes = [(c - e, c + e)]
        if self.symmetric and np.any(c != 0):
            boxes.append((-c - e, -c + e))
        return boxes

    def sup_norm(self) -> float:
        """max |x| over the support."""
        c = np.asarray(self.center, dtype=float)
        if self.kind == "radial-bump":
            return float(np.linalg.norm(c) + self.extents[0])
        return float(np.linalg.norm(np.abs(c) + np.asarray(self.extents)))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "center": list(self.center), "symmetric": self.symmetric}
        if self.kind == "radial-bump":
            d["radius"] = self.extents[0]
        else:
            d["extents"] = list(self.extents)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "WeightFunction":
        ext = d.get("extents", d.get("radius"))
        return make_weight(d["kind"], d.get("center", (0, 0, 0)), ext, d.get("symmetric", False))


def make_weight(kind: str, center: Sequence[float], extents, symmetric: bool = False) -> WeightFunction:
    if kind not in KINDS:
        raise BadExtents(f"unknown weight kind {kind!r}")
    if np.isscalar(extents):
        extents = (float(extents),) * 3
    extents = tuple(float(e) for e in extents)
    if len(extents) != 3 or any(not e > 0 for e in extents):
        raise BadExtents(f"extents must be positive, got {extents}")
    center = tuple(float(v) for v in center)
    if kind == "radial-bump" and len(set(extents)) != 1:
        raise BadExtents("a radial bump takes a single radius")
    if kind == "octant-bump" and any(ci - ei < 0 for ci, ei in zip(center, extents)):
        raise BadExtents("octant-bump support must lie in the closed positive octant")
    return WeightFunction(kind, center, extents, bool(symmetric))


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the singular integral.

    ``epsilons`` and ``samples``/``seed`` drive the thickening estimator;
    ``rho_nodes``/``phi_nodes`` are the starting resolution of the Leray rule.
    """

    epsilons: tuple[float, ...] = tuple(2.0 ** -j for j in range(4, 13))
    samples: int = 10**6
    seed: int = 0x5EED
    rho_nodes: int = 256
    phi_nodes: int = 256
    tol: float = 1e-10

    def __post_init__(self) -> None:
        eps = list(self.epsilons)
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be positive and strictly decreasing")
        if self.samples < 10**4:
            raise ValueError("at least 10^4 samples are required")


@dataclass
class IntegralValue:
    value: float
    error: float
    method: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "error": self.error, "method": self.method, **self.details}


def _diagonalize(form: TernaryQuadraticForm):
    """Orthogonal R and (alpha, beta, gamma) with F(R y) = alpha y1^2 + beta y2^2 - gamma y3^2 (up to sign)."""
    M = np.array(form.gram2, dtype=float) / 2.0
    pos, neg = signature(form)
    if pos == 1 and neg == 2:
        M = -M
    vals, vecs = np.linalg.eigh(M)
    order = np.argsort(-vals)  # two positive first, negative last
    vals, vecs = vals[order], vecs[:, order]
    return vecs, vals[0], vals[1], -vals[2]


def _gauss_panels(a: float, b: float, panels: int, order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _leray_once(w: WeightFunction, R, alpha, beta, gamma, rho_max, n_rho, n_phi) -> float:
    rho, wr = _gauss_panels(0.0, rho_max, max(1, n_rho // 16))
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    dirs = np.stack([np.cos(phi) / math.sqrt(alpha), np.sin(phi) / math.sqrt(beta)], axis=-1)
    total = 0.0
    for sgn in (1.0, -1.0):
        y = np.empty((len(rho), n_phi, 3))
        y[..., 0] = rho[:, None] * dirs[None, :, 0]
        y[..., 1] = rho[:, None] * dirs[None, :, 1]
        y[..., 2] = sgn * rho[:, None] / math.sqrt(gamma)
        x = y @ R.T
        vals = w(x)
        total += float(np.sum(wr[:, None] * vals)) * (2 * math.pi / n_phi)
    return total / (2.0 * math.sqrt(alpha * beta * gamma))


def singular_integral(form: TernaryQuadraticForm, w: WeightFunction, spec: QuadratureSpec = QuadratureSpec(),
                      method: str = "leray") -> IntegralValue:
    pos, neg = signature(form)
    if pos == 0 or neg == 0:
        warnings.warn("definite form: the real cone is the origin, singular integral is 0")
        return IntegralValue(0.0, 0.0, method, {"definite": True})
    if method == "leray":
        return _singular_integral_leray(form, w, spec)
    if method == "thickening":
        return _singular_integral_thickening(form, w, spec)
    raise ValueError(f"unknown method {method!r}")


def _singular_integral_leray(form, w, spec) -> IntegralValue:
    R, alpha, beta, gamma = _diagonalize(form)
    # |y|^2 >= rho^2 / max(alpha, beta, gamma): bound rho on the support
    rho_max = w.sup_norm() * math.sqrt(max(alpha, beta, gamma)) * 1.0000001
    n_rho, n_phi = spec.rho_nodes, spec.phi_nodes
    prev = _leray_once(w, R, alpha, beta, gamma, rho_max, n_rho, n_phi)
    err = math.inf
    for _ in range(8):
        n_rho *= 2
        n_phi *= 2
        cur = _leray_once(w, R, alpha, beta, gamma, rho_max, n_rho, n_phi)
        err = abs(cur - prev)
        prev = cur
        if err <= spec.tol * max(1.0, abs(cur)):
            break
    return IntegralValue(prev, err, "leray", {"rho_nodes": n_rho, "phi_nodes": n_phi})


def _shell_integral(w, R, alpha, beta, gamma, y12, eps, gl_x, gl_w):
    """For each (y1, y2) the integral of w(R y) over y3 with |Q(y)| < eps."""
    s = alpha * y12[:, 0] ** 2 + beta * y12[:, 1] ** 2
    hi = np.sqrt((s + eps) / gamma)
    lo = np.sqrt(np.maximum(s - eps, 0.0) / gamma)
    n = len(s)
    total = np.zeros(n)
    for sgn in (1.0, -1.0):
        # |y3| in [lo, hi] (or [0, hi] when s < eps); y3 = sgn * t
        a, b = lo, hi
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for xk, wk in zip(gl_x, gl_w):
            t = mid + half * xk
            y = np.column_stack([y12[:, 0], y12[:, 1], sgn * t])
            total += wk * half * w(y @ R.T)
    return total


def _projected_rectangles(w: WeightFunction, R: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rectangles in the (y1, y2) plane, y = R^T x, covering each support piece."""
    rects = []
    for lo, hi in w.pieces():
        c, e = 0.5 * (lo + hi), 0.5 * (hi - lo)
        if w.kind == "radial-bump":
            half = np.full(2, e[0])
        else:
            half = np.abs(R[:, :2]).T @ e
        mid = R[:, :2].T @ c
        rects.append((mid - half, mid + half))
    return rects


def _singular_integral_thickening(form, w, spec) -> IntegralValue:
    R, alpha, beta, gamma = _diagonalize(form)
    rects = _projected_rectangles(w, R)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    reps = 8
    per_rep = max(1 << 10, 1 << int(math.log2(max(1, spec.samples // (reps * len(rects))))))
    rng = np.random.default_rng(spec.seed)
    # scrambled Sobol points per rectangle and replicate; points covered by
    # several rectangles are down-weighted so overlaps are counted once
    draws = []
    for lo, hi in rects:
        area = float(np.prod(hi - lo))
        for _ in range(reps):
            u = qmc.Sobol(d=2, scramble=True, seed=rng).random(per_rep)
            y12 = lo + u * (hi - lo)
            cover = np.zeros(len(y12))
            for lo2, hi2 in rects:
                cover += np.all((y12 >= lo2) & (y12 <= hi2), axis=1)
            draws.append((y12, area / cover))
    estimates, spreads = [], []
    for eps in spec.epsilons:
        per = np.zeros(reps)
        for i, (y12, wt) in enumerate(draws):
            vals = _shell_integral(w, R, alpha, beta, gamma, y12, eps, gl_x, gl_w) * wt
            per[i % reps] += vals.mean() / (2 * eps)
        estimates.append(float(per.mean()))
        spreads.append(float(per.std(ddof=1) / math.sqrt(reps)))
    eps = np.array(spec.epsilons)
    est = np.array(estimates)
    # Richardson: first order in eps for transversal supports; a support
    # containing the cone vertex adds a sqrt(eps) term to the thickened volume
    vertex = bool(w(np.zeros(3)) > 0)
    cols = [np.ones_like(eps), np.sqrt(eps), eps] if vertex else [np.ones_like(eps), eps]
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, est, rcond=None)
    value = float(coef[0])
    extrap_err = float(np.max(np.abs(A @ coef - est))) if vertex else abs(value - est[-1])
    return IntegralValue(
        value,
        math.hypot(extrap_err, spreads[-1]),
        "thickening",
        {"epsilons": list(map(float, eps)), "estimates": estimates, "stderr": spreads, "seed": spec.seed,
         "vertex_in_support": vertex, "samples": per_rep * reps * len(rects)},
    )


def leray_halves(form: TernaryQuadraticForm, w: WeightFunction, spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    """Contributions of the two nappes y3 > 0 and y3 < 0 of the Leray integral."""
    R, alpha, beta, gamma = _diagonalize(form)
    rho_max = w.sup_norm() * math.sqrt(max(alpha, beta, gamma)) * 1.0000001
    n = spec.rho_nodes * 8
    rho, wr = _gauss_panels(0.0, rho_max, n // 16)
    phi = 2 * math.pi * np.arange(n) / n
    out = []
    for sgn in (1.0, -1.0):
        y = np.empty((len(rho), n, 3))
        y[..., 0] = rho[:, None] * (np.cos(phi) / math.sqrt(alpha))[None, :]
        y[..., 1] = rho[:, None] * (np.sin(phi) / math.sqrt(beta))[None, :]
        y[..., 2] = sgn * rho[:, None] / math.sqrt(gamma)
        vals = w(y @ R.T)
        out.append(float(np.sum(wr[:, None] * vals)) * (2 * math.pi / n) / (2 * math.sqrt(alpha * beta * gamma)))
    return out[0], out[1]
