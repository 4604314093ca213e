"""Exact enumeration of integral points on a ternary cone.

Two coordinates are iterated and the third is solved exactly: from the integer
quadratic when its square coefficient is nonzero (perfect-square test of the
discriminant), otherwise from the linear equation. A variable with zero square
coefficient is preferred as the solved one; among the rest the one with the
widest range is solved, which minimises the number of visited pairs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .archimedean import WeightFunction
from .arith import mobius
from .errors import BudgetExceeded
from .localdens import CongruenceCondition
from .quadform import TernaryQuadraticForm

DEFAULT_BUDGET = 2 * 10**11  # visited (x1, x2) pairs


@dataclass(frozen=True)
class LatticePoint:
    x: tuple[int, int, int]
    primitive: bool


@dataclass(frozen=True)
class CountRequest:
    form: TernaryQuadraticForm
    weight: WeightFunction
    condition: CongruenceCondition
    B: float
    primitive: bool = False

    def __post_init__(self) -> None:
        if not self.B >= 1:
            raise ValueError(f"B must be at least 1, got {self.B}")


@dataclass(frozen=True)
class _Piece:
    """Integer region: x in [lo, hi] per axis, optionally cut to a ball."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]
    center: Optional[tuple[float, float, float]] = None
    radius: Optional[float] = None


def _coeff_matrix(form: TernaryQuadraticForm) -> list[list[int]]:
    """Symmetric integer table m with F = sum_{i<=j} m[i][j] x_i x_j."""
    a, b, c, d, e, f = form.coeffs
    return [[a, d, e], [d, b, f], [e, f, c]]


def _permuted_coeffs(form: TernaryQuadraticForm, perm: Sequence[int]) -> np.ndarray:
    m = _coeff_matrix(form)
    i, j, k = perm
    return np.array([m[i][i], m[j][j], m[k][k], m[i][j], m[i][k], m[j][k]], dtype=np.int64)


def choose_order(form: TernaryQuadraticForm, lo: Sequence[int], hi: Sequence[int]) -> tuple[int, int, int]:
    """(outer, inner, solved) coordinate order for a box."""
    m = _coeff_matrix(form)
    width = [hi[i] - lo[i] for i in range(3)]
    linear = [k for k in range(3) if m[k][k] == 0 and any(m[k][j] for j in range(3) if j != k)]
    pool = linear or [k for k in range(3) if m[k][k] != 0]
    k = max(pool, key=lambda t: (width[t], t))
    i, j = [t for t in range(3) if t != k]
    if width[i] > width[j]:
        i, j = j, i
    return i, j, k


def _check_magnitude(co: np.ndarray, bound: int) -> None:
    # |beta| <= S M and |gam| <= S M^2 with S = sum |coeffs|, so |D| <= 5 S^2 M^2
    S = int(np.abs(co).sum())
    if 5 * S * S * bound * bound >= 2**62:
        raise BudgetExceeded(f"coordinates up to {bound} overflow the int64 solver")


def _row_windows(piece: _Piece, perm, x1_lo: int, x1_hi: int) -> tuple[np.ndarray, np.ndarray]:
    i, j, _ = perm
    n = x1_hi - x1_lo + 1
    lo = np.full(n, piece.lo[j], dtype=np.int64)
    hi = np.full(n, piece.hi[j], dtype=np.int64)
    if piece.radius is not None:
        x1 = np.arange(x1_lo, x1_hi + 1, dtype=np.float64)
        h = np.sqrt(np.maximum(piece.radius ** 2 - (x1 - piece.center[i]) ** 2, 0.0))
        # widened by one so float rounding can only add candidates
        lo = np.maximum(lo, np.floor(piece.center[j] - h).astype(np.int64) - 1)
        hi = np.minimum(hi, np.ceil(piece.center[j] + h).astype(np.int64) + 1)
    return lo, hi


def _run_kernel(co, x1_lo, x1_hi, step1, res1, wlo, whi, step2, res2, x3_lo, x3_hi, base):
    # row blocks keep the output buffer small; an overflow only repeats one block
    block = max(step1, (1 << 12) // step1 * step1)
    out = np.empty((1 << 16, 3), dtype=np.int64)
    parts = []
    start = x1_lo
    while start <= x1_hi:
        stop = min(x1_hi, start + block - 1)
        while True:
            n = _kernels.cone_points(co, start, stop, step1, res1, wlo[start - base:stop - base + 1],
                                     whi[start - base:stop - base + 1], step2, res2, x3_lo, x3_hi, out)
            if n <= len(out):
                break
            out = np.empty((2 * n, 3), dtype=np.int64)
        parts.append(out[:n].copy())
        start = stop + 1
    return np.concatenate(parts) if parts else np.empty((0, 3), dtype=np.int64)


def _enumerate_piece(form, piece: _Piece, residues: Optional[CongruenceCondition], threads: int,
                     budget: float) -> np.ndarray:
    lo, hi = piece.lo, piece.hi
    if any(l > h for l, h in zip(lo, hi)):
        return np.empty((0, 3), dtype=np.int64)
    perm = choose_order(form, lo, hi)
    i, j, k = perm
    co = _permuted_coeffs(form, perm)
    _check_magnitude(co, max(max(abs(v) for v in lo), max(abs(v) for v in hi), 1))
    x1_lo, x1_hi = lo[i], hi[i]
    wlo, whi = _row_windows(piece, perm, x1_lo, x1_hi)
    step = residues.L if residues is not None else 1
    res = residues.gamma if residues is not None else (0, 0, 0)
    pairs = float(np.sum(np.maximum(whi - wlo + 1, 0))) / (step * step)
    if pairs > budget:
        raise BudgetExceeded(f"enumeration needs about {pairs:.3g} pairs, budget is {budget:.3g}")
    stripes = max(1, int(threads))
    edges = np.linspace(x1_lo, x1_hi + 1, stripes + 1).astype(np.int64)
    jobs = [(int(edges[s]), int(edges[s + 1]) - 1) for s in range(stripes) if edges[s + 1] > edges[s]]

    def job(span):
        return _run_kernel(co, span[0], span[1], step, res[i], wlo, whi, step, res[j], lo[k], hi[k], x1_lo)

    if stripes == 1:
        parts = [job(s) for s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=stripes) as pool:
            parts = list(pool.map(job, jobs))  # stripe order is preserved
    pts = np.concatenate(parts) if parts else np.empty((0, 3), dtype=np.int64)
    out = np.empty_like(pts)
    out[:, i], out[:, j], out[:, k] = pts[:, 0], pts[:, 1], pts[:, 2]
    if residues is not None and step > 1:
        out = out[(out[:, k] - res[k]) % step == 0]
    return out


def _canonical(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, 3)
    return np.unique(points, axis=0)


def solutions_in_box(form: TernaryQuadraticForm, lo: Sequence[int], hi: Sequence[int],
                     residues: Optional[CongruenceCondition] = None, threads: int = 1,
                     budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """All integer x with F(x) = 0 and lo <= x <= hi, sorted, each row once.

    With ``residues`` only x = gamma mod L is returned (the two iterated
    coordinates are stepped by L, the solved one is filtered).
    """
    piece = _Piece(tuple(int(v) for v in lo), tuple(int(v) for v in hi))
    return _canonical(_enumerate_piece(form, piece, residues, threads, budget))


def iter_solutions(form: TernaryQuadraticForm, lo: Sequence[int], hi: Sequence[int]) -> Iterator[LatticePoint]:
    for x in solutions_in_box(form, lo, hi):
        t = tuple(int(v) for v in x)
        yield LatticePoint(t, math.gcd(*t) == 1)


def brute_force_box(form: TernaryQuadraticForm, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """Triple-loop oracle for ``solutions_in_box``."""
    axes = [np.arange(lo[t], hi[t] + 1, dtype=np.int64) for t in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return _canonical(grid[form.evaluate_array(grid) == 0])


def support_pieces(w: WeightFunction, B: float) -> list[_Piece]:
    """Integer regions covering B * supp(w)."""
    out = []
    for lo, hi in w.pieces():
        ilo = tuple(int(math.floor(B * v)) for v in lo)
        ihi = tuple(int(math.ceil(B * v)) for v in hi)
        if w.kind == "radial-bump":
            # pieces() returns the bounding cube; recover the ball
            c = tuple(B * 0.5 * (a + b) for a, b in zip(lo, hi))
            out.append(_Piece(ilo, ihi, c, B * w.radius))
        else:
            out.append(_Piece(ilo, ihi))
    return out


def points_in_support(form: TernaryQuadraticForm, w: WeightFunction, B: float,
                      residues: Optional[CongruenceCondition] = None, threads: int = 1,
                      budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """Every integer point of the cone in B * supp(w) (possibly with a few zero-weight extras).

    Results are memoised (read-only arrays); the thread count does not change them.
    """
    if residues is not None and residues.L == 1:
        residues = None
    return _points_cached(form, w, float(B), residues, budget, max(1, int(threads)))


@lru_cache(maxsize=32)
def _points_cached(form, w, B, residues, budget, threads) -> np.ndarray:
    parts = [_enumerate_piece(form, p, residues, threads, budget) for p in support_pieces(w, B)]
    pts = np.concatenate(parts) if parts else np.empty((0, 3), dtype=np.int64)
    pts = _canonical(pts) if len(parts) > 1 else pts
    pts.setflags(write=False)
    return pts


def primitive_mask(points: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(points), axis=1) if len(points) else np.empty(0, dtype=np.int64)
    return g == 1


def _select(points: np.ndarray, condition: CongruenceCondition, primitive: bool, include_origin: bool) -> np.ndarray:
    keep = np.ones(len(points), dtype=bool)
    if condition.L > 1:
        keep &= np.all((points - np.array(condition.gamma)) % condition.L == 0, axis=1)
    if primitive:
        keep &= primitive_mask(points)
    elif not include_origin:
        keep &= np.any(points != 0, axis=1)
    return points[keep]


def _weighted_sum(w: WeightFunction, points: np.ndarray, B: float) -> float:
    if len(points) == 0:
        return 0.0
    return math.fsum(w(points / B))


def weighted_count(req: CountRequest, threads: int = 1, include_origin: bool = True,
                   budget: float = DEFAULT_BUDGET) -> float:
    """sum of w(x/B) over cone points x = gamma mod L (primitive ones if requested).

    The origin belongs to the non-primitive count unless ``include_origin`` is
    False; it is never primitive.
    """
    pts = points_in_support(req.form, req.weight, req.B, req.condition, threads, budget)
    return _weighted_sum(req.weight, _select(pts, req.condition, req.primitive, include_origin), req.B)


def _pieces_nest(w: WeightFunction) -> bool:
    # B * piece lies inside B' * piece for B <= B' exactly when the piece contains 0
    return all(np.all(lo <= 0) and np.all(hi >= 0) for lo, hi in w.pieces())


def grid_points(form: TernaryQuadraticForm, w: WeightFunction, Bs: Sequence[float],
                residues: Optional[CongruenceCondition] = None, threads: int = 1,
                budget: float = DEFAULT_BUDGET) -> list[np.ndarray]:
    """Cone points in B * supp(w) for each B; one shared enumeration when the supports nest."""
    Bs = [float(b) for b in Bs]
    if _pieces_nest(w):
        pts = points_in_support(form, w, max(Bs), residues, threads, budget)
        return [pts] * len(Bs)
    return [points_in_support(form, w, B, residues, threads, budget) for B in Bs]


def weighted_counts(form: TernaryQuadraticForm, w: WeightFunction, condition: CongruenceCondition,
                    Bs: Sequence[float], primitive: bool = False, threads: int = 1,
                    include_origin: bool = True, budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """weighted_count for every B in ``Bs``, sharing the enumeration where possible."""
    sets = grid_points(form, w, Bs, condition, threads, budget)
    cache: dict = {}
    out = []
    for B, pts in zip(Bs, sets):
        key = id(pts)
        if key not in cache:
            cache[key] = _select(pts, condition, primitive, include_origin)
        out.append(_weighted_sum(w, cache[key], float(B)))
    return np.array(out)


def group_counts(form: TernaryQuadraticForm, w: WeightFunction, L: int, classes: Sequence[CongruenceCondition],
                 Bs: Sequence[float], primitive: bool = True, threads: int = 1,
                 budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """Counts for several congruence classes mod L from unconstrained enumerations.

    Returns an array of shape (len(classes), len(Bs)).
    """
    sets = grid_points(form, w, Bs, None, threads, budget)
    out = np.zeros((len(classes), len(Bs)))
    for t, (B, pts) in enumerate(zip(Bs, sets)):
        for r, cond in enumerate(classes):
            out[r, t] = _weighted_sum(w, _select(pts, cond, primitive, include_origin=True), float(B))
    return out


def mobius_inverted_count(req: CountRequest, D: Optional[int] = None, threads: int = 1,
                          budget: float = DEFAULT_BUDGET) -> float:
    """sum_{d <= D, (d, L) = 1} mu(d) N(w, (L, dbar gamma); B/d), N over the punctured cone.

    Each term is a separate enumeration. D defaults to B * max|supp w|, beyond
    which B/d * supp(w) contains no nonzero integer point.
    """
    L = req.condition.L
    if D is None:
        D = int(math.floor(req.B * req.weight.sup_norm())) + 1
    total = []
    for d in range(1, D + 1):
        if math.gcd(d, L) != 1:
            continue
        mu = mobius(d)
        if mu == 0:
            continue
        cond = req.condition.scaled(pow(d, -1, L)) if L > 1 else req.condition
        pts = points_in_support(req.form, req.weight, req.B / d, cond, threads, budget)
        pts = _select(pts, cond, primitive=False, include_origin=False)
        total.append(mu * _weighted_sum(req.weight, pts * d, req.B))
    return math.fsum(total)
