"""Fits of exact counts against the asymptotic laws, and the associated checks.

Main terms used here:

* integral points: N(B) ~ (1/2) S I B log B + H B, S the singular series of
  (L, Gamma) and I the singular integral of w;
* primitive points: N^o(B) ~ ((1/2) S I prod_{p | L} p/(p-1) + G) B, where the
  product is the limit of -sum_{(d, L) = 1} mu(d) log(d)/d;
* conic points: N_C(B) ~ (1/4) I omega B with omega = L S(L, Gamma).

The secondary constants H and G are estimated by regression only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .archimedean import QuadratureSpec, WeightFunction, make_weight, singular_integral
from .arith import (
    RealCharacter,
    gauss_iota,
    l_one,
    l_one_digamma,
    mobius_sieve,
    omega_split,
    prime_divisors,
    primes_up_to,
    real_characters,
)
from .enumerate import (
    DEFAULT_BUDGET,
    CountRequest,
    brute_force_box,
    mobius_inverted_count,
    weighted_count,
    group_counts,
    points_in_support,
    primitive_mask,
    solutions_in_box,
    weighted_counts,
)
from .errors import AsymmetricWeight, HypothesisViolated, InsufficientGrid
from .expsums import (
    S0_value,
    S2_factor,
    SumContext,
    TruncationPolicy,
    eta_coefficient,
    partial_F_series,
    partial_sum_S0_series,
    salie_T,
    sum_S1_closed,
    sum_Sq,
)
from .localdens import (
    CongruenceCondition,
    count_mod,
    local_density,
    primitive_relation_check,
    singular_series,
    tamagawa_conic,
    trivial_condition,
)
from .quadform import TernaryQuadraticForm, dual_eval

N_BOOT = 2000
DEFAULT_SEED = 0x5EED
MODELS = ("BlogB_plus_B", "linear_B")


@dataclass
class FitReport:
    B: list[float]
    counts: list[float]
    model: str
    coefficients: dict
    stderr: dict
    predicted: float
    relative_deviation: float
    verdict: str
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_grid(self.B)

    @property
    def leading(self) -> float:
        return self.coefficients["a" if self.model == "BlogB_plus_B" else "c"]

    @property
    def leading_stderr(self) -> float:
        return self.stderr["a" if self.model == "BlogB_plus_B" else "c"]

    def to_dict(self) -> dict:
        return {
            "B": list(self.B),
            "counts": list(self.counts),
            "model": self.model,
            "coefficients": self.coefficients,
            "stderr": self.stderr,
            "predicted": self.predicted,
            "relative_deviation": self.relative_deviation,
            "verdict": self.verdict,
            **self.extras,
        }


@dataclass
class ObstructionReport:
    B: list[float]
    counts: list[float]
    nonprimitive_counts: list[float]
    leading_constant: float
    primitive_main_constant: float
    G_estimate: float
    exhaustive_region: dict
    verdict: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "B": self.B,
            "counts": self.counts,
            "nonprimitive_counts": self.nonprimitive_counts,
            "leading_constant": self.leading_constant,
            "primitive_main_constant": self.primitive_main_constant,
            "G_estimate": self.G_estimate,
            "exhaustive_region": self.exhaustive_region,
            "verdict": self.verdict,
            **self.details,
        }


# -- regression -----------------------------------------------------------


def _design(model: str, B: np.ndarray) -> np.ndarray:
    if model == "BlogB_plus_B":
        return np.column_stack([B * np.log(B), B])
    if model == "linear_B":
        return B[:, None]
    raise ValueError(f"unknown model {model!r}")


def _wls(A: np.ndarray, y: np.ndarray, B: np.ndarray) -> np.ndarray:
    # weights 1/B: residual variance grows like B
    s = 1.0 / np.sqrt(B)
    coef, *_ = np.linalg.lstsq(A * s[:, None], y * s, rcond=None)
    return coef


def regress(model: str, B: Sequence[float], y: Sequence[float], seed: int = DEFAULT_SEED,
            n_boot: int = N_BOOT) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """WLS coefficients, residual-bootstrap standard errors and residuals."""
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(B) < 4:
        raise InsufficientGrid(f"need at least 4 grid points, got {len(B)}")
    if np.any(np.diff(B) <= 0):
        raise InsufficientGrid("B grid must be strictly increasing")
    A = _design(model, B)
    coef = _wls(A, y, B)
    fit = A @ coef
    # standardised residuals, inflated for the fitted degrees of freedom
    n, k = A.shape
    r = (y - fit) / np.sqrt(B) * math.sqrt(n / max(n - k, 1))
    rng = np.random.default_rng(seed)
    boots = np.empty((n_boot, k))
    for t in range(n_boot):
        ystar = fit + np.sqrt(B) * rng.choice(r, size=n, replace=True)
        boots[t] = _wls(A, ystar, B)
    return coef, boots.std(axis=0, ddof=1), y - fit


def _names(model: str) -> tuple[str, ...]:
    return ("a", "b") if model == "BlogB_plus_B" else ("c",)


def _fit(model: str, B, y, predicted: float, tolerance: float, seed: int, extras: dict) -> FitReport:
    B = [float(b) for b in B]
    y = [float(v) for v in y]
    coef, se, res = regress(model, B, y, seed)
    names = _names(model)
    half = len(B) // 2
    top = None
    if len(B) - half >= 4:
        ctop, setop, rtop = regress(model, B[half:], y[half:], seed)
        top = {"coefficients": dict(zip(names, map(float, ctop))), "stderr": dict(zip(names, map(float, setop))),
               "max_relative_residual": _max_rel(rtop, y[half:])}
    lead = float(coef[0])
    dev = lead / predicted - 1.0 if predicted != 0 else (0.0 if lead == 0 else math.inf)
    if predicted == 0:
        ok = abs(lead) <= 3 * float(se[0]) + 1e-12
    else:
        ok = abs(dev) <= tolerance
    extras = dict(extras)
    extras["max_relative_residual"] = _max_rel(res, y)
    extras["tolerance"] = tolerance
    if top is not None:
        extras["top_half_fit"] = top
    return FitReport(B, y, model, dict(zip(names, map(float, coef))), dict(zip(names, map(float, se))),
                     float(predicted), float(dev), "consistent" if ok else "inconsistent", extras)


def _max_rel(res, y) -> float:
    y = np.asarray(y, dtype=float)
    nz = y != 0
    if not np.any(nz):
        return 0.0
    return float(np.max(np.abs(np.asarray(res)[nz]) / np.abs(y[nz])))


# -- main-term constants ----------------------------------------------------


def radical(n: int) -> int:
    return math.prod(prime_divisors(n)) if n > 1 else 1


def primitive_factor(L: int) -> float:
    """prod_{p | L} p/(p-1), the limit of -sum_{d coprime to L} mu(d) log(d)/d."""
    return math.prod(p / (p - 1) for p in prime_divisors(L)) if L > 1 else 1.0


def leading_constant(form: TernaryQuadraticForm, w: WeightFunction, condition: CongruenceCondition,
                     spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, dict]:
    """(1/2) S(L, Gamma) I(w), with the ingredients."""
    S = singular_series(form, condition)
    I = singular_integral(form, w, spec)
    return 0.5 * S.completed * I.value, {"singular_series": S.to_dict(), "singular_integral": I.to_dict()}


# -- fits -------------------------------------------------------------------


def fit_integral_counts(form: TernaryQuadraticForm, w: WeightFunction, condition: Optional[CongruenceCondition],
                        B_grid: Sequence[float], tolerance: float = 0.10, threads: int = 1,
                        seed: int = DEFAULT_SEED, budget: float = DEFAULT_BUDGET,
                        counts: Optional[Sequence[float]] = None) -> FitReport:
    """Fit N(B) = a B log B + b B and compare a with (1/2) S I."""
    condition = (condition or trivial_condition()).validate(form)
    _check_grid(B_grid)
    if counts is None:
        counts = weighted_counts(form, w, condition, B_grid, primitive=False, threads=threads, budget=budget)
    pred, parts = leading_constant(form, w, condition)
    return _fit("BlogB_plus_B", B_grid, counts, pred, tolerance, seed, parts)


def fit_primitive_counts(form: TernaryQuadraticForm, w: WeightFunction, condition: Optional[CongruenceCondition],
                         B_grid: Sequence[float], tolerance: float = 0.10, threads: int = 1,
                         seed: int = DEFAULT_SEED, budget: float = DEFAULT_BUDGET,
                         counts: Optional[Sequence[float]] = None) -> FitReport:
    """Fit N^o(B) = c B; the G-estimate is c minus the primitive main constant."""
    condition = (condition or trivial_condition()).validate(form)
    _check_grid(B_grid)
    rad = radical(8 * abs(form.delta))
    hypothesis = condition.L % rad == 0
    if not hypothesis:
        warnings.warn(f"L = {condition.L} is not divisible by rad(8 Delta) = {rad}", HypothesisViolated)
    if counts is None:
        counts = weighted_counts(form, w, condition, B_grid, primitive=True, threads=threads, budget=budget)
    half, parts = leading_constant(form, w, condition)
    main = half * primitive_factor(condition.L)
    rep = _fit("linear_B", B_grid, counts, main, tolerance, seed, parts)
    c, se = rep.coefficients["c"], rep.stderr["c"]
    rep.extras.update({
        "leading_constant": half,
        "primitive_factor": primitive_factor(condition.L),
        "G_estimate": c - main,
        "G_stderr": se,
        "hypothesis_holds": hypothesis,
    })
    top = rep.extras.get("top_half_fit")
    if top is not None:
        rep.extras["stability_sigmas"] = abs(top["coefficients"]["c"] - c) / se if se > 0 else (
            0.0 if top["coefficients"]["c"] == c else math.inf)
    return rep


def _check_grid(B_grid: Sequence[float]) -> None:
    B = list(B_grid)
    if len(B) < 4:
        raise InsufficientGrid(f"need at least 4 grid points, got {len(B)}")
    if any(b2 <= b1 for b1, b2 in zip(B, B[1:])):
        raise InsufficientGrid("B grid must be strictly increasing")


# -- exponential-sum checks -------------------------------------------------


def slope_eta_check(ctx: SumContext, c: Sequence[int], X: int = 2000, policy: TruncationPolicy = TruncationPolicy(),
                    kappa: float = 2.0, method: str = "crt") -> dict:
    """Regression slope of F_lam(c; x) on x in [X/2, X] against eta_lam(c).

    Error model: |F(x) - eta x| <= kappa |c| x^(1/2), which bounds the slope
    error by kappa |c| X^(-1/2).
    """
    F = partial_F_series(ctx, c, X, method)
    xs = np.arange(1, X + 1, dtype=float)
    sel = xs >= X // 2
    slope = complex(np.sum(xs[sel] * F[sel]) / np.sum(xs[sel] ** 2))
    eta = eta_coefficient(ctx, c, policy)
    norm_c = max(abs(int(v)) for v in c)
    allowed = kappa * norm_c / math.sqrt(X) + eta.tail_bound
    resid = float(np.max(np.abs(F - eta.value * xs) / (norm_c * np.sqrt(xs))))
    return {
        "c": [int(v) for v in c],
        "dual_value": dual_eval(ctx.form, c),
        "X": X,
        "slope": [slope.real, slope.imag],
        "eta": eta.to_dict(),
        "deviation": abs(slope - eta.value),
        "allowed": allowed,
        "max_normalized_residual": resid,
        "kappa": kappa,
        "pass": bool(abs(slope - eta.value) <= allowed and resid <= kappa),
    }


def s0_growth_check(ctx: SumContext, X_grid: Sequence[int] = (100, 200, 400), cubic_tol: float = 0.25,
                    log_tol: float = 0.15) -> dict:
    """Compare sum S_q(0) with (1/6) L^4 S X^3 and the slope of sum S_q(0)/q^3 in log X with (1/2) L^4 S."""
    S = singular_series(ctx.form, ctx.condition).completed
    L4 = ctx.L ** 4
    parts = partial_sum_S0_series(ctx, X_grid)
    cubic = [(1 / 6) * L4 * S * p.X ** 3 for p in parts]
    devs = [abs(p.plain / cu - 1.0) for p, cu in zip(parts, cubic)]
    logs = np.log([p.X for p in parts])
    vals = np.array([float(p.over_q3) for p in parts])
    slope = float(np.polyfit(logs, vals, 1)[0]) if len(parts) >= 2 else math.nan
    return {
        "X": [p.X for p in parts],
        "sums": [p.plain for p in parts],
        "sums_over_q3": [str(p.over_q3) for p in parts],
        "singular_series": S,
        "cubic_prediction": cubic,
        "cubic_relative_deviation": devs,
        "cubic_pass": bool(devs[-1] <= cubic_tol and all(b < a for a, b in zip(devs, devs[1:]))),
        "log_slope": slope,
        "log_slope_prediction": 0.5 * L4 * S,
        "log_slope_pass": bool(abs(slope / (0.5 * L4 * S) - 1.0) <= log_tol),
    }


# -- Moebius sums -------------------------------------------------------------


def mu_limit_checks(L: int = 1, D_grid: Sequence[int] = (10**4, 10**5, 10**6),
                    chi: Optional[RealCharacter] = None) -> dict:
    """The four Moebius sums over d <= D coprime to L.

    sum mu(d)/D -> 0, sum mu(d)/d -> 0, sum mu(d) log(d)/d -> -prod_{p | L} p/(p-1)
    and sum mu(d) chi(d)/d -> 1/L(1, chi) for a non-principal real chi mod L.
    """
    D_grid = sorted(int(D) for D in D_grid)
    Dmax = D_grid[-1]
    mu = mobius_sieve(Dmax).astype(np.float64)
    d = np.arange(Dmax + 1, dtype=np.float64)
    if L > 1:
        mu[np.gcd(np.arange(Dmax + 1), L) != 1] = 0.0
    if chi is None and L > 1:
        nonprincipal = [c for c in real_characters(L) if not c.principal]
        chi = nonprincipal[0] if nonprincipal else None
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(d > 0, 1.0 / d, 0.0)
        logs = np.where(d > 0, np.log(np.maximum(d, 1.0)), 0.0)
    c0 = np.cumsum(mu)
    c1 = np.cumsum(mu * inv)
    c2 = np.cumsum(mu * logs * inv)
    out = {"L": L, "D": D_grid, "sum_mu_over_D": [], "sum_mu_over_d": [], "sum_mu_log_over_d": [],
           "log_limit": -primitive_factor(L)}
    for D in D_grid:
        out["sum_mu_over_D"].append(float(c0[D] / D))
        out["sum_mu_over_d"].append(float(c1[D]))
        out["sum_mu_log_over_d"].append(float(c2[D]))
    if chi is not None:
        table = chi.table()[np.arange(Dmax + 1) % chi.modulus].astype(np.float64)
        c3 = np.cumsum(mu * table * inv)
        series, series_err = l_one(chi)
        closed = l_one_digamma(chi)
        out.update({
            "character": chi.label,
            "sum_mu_chi_over_d": [float(c3[D]) for D in D_grid],
            "l_one_series": series,
            "l_one_series_error": series_err,
            "l_one_closed": closed,
            "chi_limit": 1.0 / closed,
        })
    return out


# -- conic count -------------------------------------------------------------


def unit_classes(form: TernaryQuadraticForm, condition: CongruenceCondition) -> list[CongruenceCondition]:
    """The classes gamma Gamma for gamma in (Z/L)^x, as a set."""
    L = condition.L
    seen = {}
    for g in range(1, L + 1) if L > 1 else [1]:
        if math.gcd(g, L) == 1:
            c = condition.scaled(g)
            seen.setdefault(c.gamma, c)
    return list(seen.values())


def _check_symmetric(w: WeightFunction, seed: int) -> None:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(4096, 3)) * w.sup_norm()
    if not np.allclose(w(x), w(-x), rtol=0, atol=1e-15):
        raise AsymmetricWeight("the conic count needs w(-x) = w(x)")


def conic_count(form: TernaryQuadraticForm, w: WeightFunction, condition: CongruenceCondition,
                B_grid: Sequence[float], tolerance: float = 0.10, threads: int = 1, seed: int = DEFAULT_SEED,
                budget: float = DEFAULT_BUDGET) -> FitReport:
    """N_C(B) = (1/2) sum_gamma N^o(w, (L, gamma Gamma); B), fitted against (1/4) I omega B."""
    condition = condition.validate(form)
    _check_symmetric(w, seed)
    _check_grid(B_grid)
    classes = unit_classes(form, condition)
    per_class = group_counts(form, w, condition.L, classes, B_grid, primitive=True, threads=threads, budget=budget)
    total = 0.5 * per_class.sum(axis=0)
    I = singular_integral(form, w)
    omega = tamagawa_conic(form, condition)
    pred = 0.25 * I.value * omega.value
    rep = _fit("linear_B", B_grid, total, pred, tolerance, seed,
               {"singular_integral": I.to_dict(), "tamagawa": omega.to_dict()})
    factor = primitive_factor(condition.L)
    G, G_se = [], []
    per = []
    for cond, counts in zip(classes, per_class):
        S = singular_series(form, cond).completed
        main = 0.5 * S * I.value * factor
        coef, se, _ = regress("linear_B", B_grid, counts, seed)
        G.append(float(coef[0]) - main)
        G_se.append(float(se[0]))
        per.append({"gamma": list(cond.gamma), "slope": float(coef[0]), "stderr": float(se[0]),
                    "main": main, "G_estimate": G[-1]})
    G_sum = math.fsum(G)
    G_sum_se = math.sqrt(sum(s * s for s in G_se))
    rep.extras.update({
        "classes": per,
        "G_sum": G_sum,
        "G_sum_stderr": G_sum_se,
        "G_sum_sigmas": abs(G_sum) / G_sum_se if G_sum_se > 0 else (0.0 if G_sum == 0 else math.inf),
    })
    return rep


def conic_count_direct(form: TernaryQuadraticForm, w: WeightFunction, condition: CongruenceCondition,
                       B: float, threads: int = 1) -> float:
    """sum of w(x/B) over sign classes {x, -x} of primitive points lying in some class gamma Gamma."""
    condition = condition.validate(form)
    pts = points_in_support(form, w, B, None, threads)
    pts = pts[primitive_mask(pts)]
    L = condition.L
    keep = np.zeros(len(pts), dtype=bool)
    for cond in unit_classes(form, condition):
        keep |= np.all((pts - np.array(cond.gamma)) % L == 0, axis=1)
    pts = pts[keep]
    # one representative per sign class: first nonzero coordinate positive
    first = np.where(pts[:, 0] != 0, pts[:, 0], np.where(pts[:, 1] != 0, pts[:, 1], pts[:, 2]))
    reps = pts[first > 0]
    return math.fsum(w(reps / B)) if len(reps) else 0.0


# -- obstruction probe ----------------------------------------------------------


def obstruction_probe(form: TernaryQuadraticForm, w: WeightFunction, condition: CongruenceCondition,
                      B_grid: Sequence[float], threads: int = 1, seed: int = DEFAULT_SEED,
                      budget: float = DEFAULT_BUDGET) -> ObstructionReport:
    """Exhaustive primitive counts for every B <= max(B_grid) against (1/2) S I.

    The region searched is the bounding box of the union of B * supp(w) over
    1 <= B <= max(B_grid), so a zero count there means N^o(B) = 0 for all such B.
    """
    condition = condition.validate(form)
    Bmax = float(max(B_grid))
    lo = np.min([np.minimum(l, l * Bmax) for l, _ in w.pieces()], axis=0)
    hi = np.max([np.maximum(h, h * Bmax) for _, h in w.pieces()], axis=0)
    ilo = np.floor(lo).astype(int)
    ihi = np.ceil(hi).astype(int)
    pts = solutions_in_box(form, ilo, ihi, condition if condition.L > 1 else None, threads, budget)
    prim = pts[primitive_mask(pts)]
    counts = [math.fsum(w(prim / B)) if len(prim) else 0.0 for B in B_grid]
    nonprim = [math.fsum(w(pts / B)) if len(pts) else 0.0 for B in B_grid]
    half, parts = leading_constant(form, w, condition)
    main = half * primitive_factor(condition.L)
    I_err = parts["singular_integral"]["error"]
    positive = half > 0 and half > 0.5 * parts["singular_series"]["completed"] * I_err
    if len(prim) == 0 and positive:
        verdict = "obstructed"
    elif len(prim) > 0 and positive:
        verdict = "consistent"
    elif len(prim) == 0 and half == 0:
        verdict = "consistent"
    else:
        verdict = "inconclusive"
    G = math.nan
    if len(B_grid) >= 4:
        coef, _, _ = regress("linear_B", B_grid, counts, seed)
        G = float(coef[0]) - main
    return ObstructionReport(
        [float(b) for b in B_grid], counts, nonprim, half, main, G,
        {"lo": ilo.tolist(), "hi": ihi.tolist(), "primitive_points": int(len(prim)),
         "nonprimitive_points": int(len(pts))},
        verdict, parts,
    )


# -- invariant suite ------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.detail}


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def invariant_suite(form: TernaryQuadraticForm, condition: Optional[CongruenceCondition] = None,
                    c_vectors: Sequence[Sequence[int]] = ((1, 0, 1), (1, 1, 0), (2, 1, 1)),
                    q_max: int = 40, p_max: int = 13, box: int = 8, B_mobius: float = 50.0,
                    w: Optional[WeightFunction] = None) -> list[CheckResult]:
    """Fast cross-checks of every module on one form; each compares two independent routes."""
    condition = (condition or trivial_condition()).validate(form)
    ctx = SumContext(form, condition.L, condition.gamma)
    w = w or make_weight("radial-bump", (0, 0, 0), 1.0, symmetric=True)
    out = []

    lo, hi = (-box,) * 3, (box,) * 3
    a = solutions_in_box(form, lo, hi)
    b = brute_force_box(form, lo, hi)
    out.append(CheckResult("enumeration_matches_brute_force", bool(np.array_equal(a, b)),
                           {"box": box, "points": int(len(a))}))

    req = CountRequest(form, w, condition, B_mobius, primitive=True)
    direct, inverted = weighted_count(req), mobius_inverted_count(req)
    out.append(CheckResult("mobius_inversion", _rel(direct, inverted) <= 1e-9,
                           {"B": B_mobius, "primitive": direct, "inverted": inverted}))

    worst_crt, worst_route = 0.0, 0.0
    for q in range(1, q_max + 1):
        q1, q2 = omega_split(q, ctx.omega)
        for c in c_vectors:
            s = sum_Sq(ctx, q, c, "direct" if (q * ctx.L) ** 3 <= 2 * 10**5 else "reduced")
            r = sum_Sq(ctx, q, c, "reduced")
            worst_route = max(worst_route, _rel(s, r))
            worst_crt = max(worst_crt, _rel(r, sum_S1_closed(ctx, q1, q2, c) * S2_factor(ctx, q1, q2, c)))
    out.append(CheckResult("exp_sum_routes_agree", worst_route <= 1e-6, {"q_max": q_max, "worst": worst_route}))
    out.append(CheckResult("exp_sum_crt_factorization", worst_crt <= 1e-6, {"q_max": q_max, "worst": worst_crt}))

    worst_gauss = max(_rel(gauss_iota(q), gauss_iota(q, "direct")) for q in range(1, 2 * q_max, 2))
    worst_salie = max(_rel(salie_T(x, m), salie_T(x, m, "direct")) for x in range(1, 2 * q_max, 2)
                      for m in (0, 1, -3, 12, 45, 98))
    out.append(CheckResult("gauss_sum_closed_form", worst_gauss <= 1e-6, {"worst": worst_gauss}))
    out.append(CheckResult("salie_closed_form", worst_salie <= 1e-6, {"worst": worst_salie}))

    good = [p for p in primes_up_to(p_max) if ctx.omega % p]
    # S_q(0) is multiplicative in q coprime to L, so S_1(0) scales the prime values
    base = S0_value(ctx, 1)
    s0 = {p: (S0_value(ctx, p), S0_value(ctx, p * p)) for p in good}
    ok = all(v1 == 0 and v2 == base * p ** 4 * (p - 1) for p, (v1, v2) in s0.items())
    out.append(CheckResult("S0_prime_values", ok, {"S_1": base, "values": {str(p): list(v) for p, v in s0.items()}}))

    hensel = {}
    for p in good:
        ratios = [Fraction(count_mod(form, p ** k, primitive=True), p ** (2 * k)) for k in (1, 2, 3)]
        hensel[p] = len(set(ratios)) == 1
    out.append(CheckResult("hensel_stabilization", all(hensel.values()), {"primes": {str(p): v for p, v in hensel.items()}}))

    rel = {p: primitive_relation_check(form, p).holds for p in primes_up_to(p_max)}
    out.append(CheckResult("primitive_relation", all(rel.values()), {"primes": {str(p): v for p, v in rel.items()}}))

    inv = True
    for p in prime_divisors(condition.L):
        base = local_density(form, p, condition).value
        for d in range(2, condition.L + 1):
            if math.gcd(d, condition.L) == 1:
                inv &= local_density(form, p, condition.scaled(d)).value == base
    out.append(CheckResult("density_scaling_invariance", inv, {"L": condition.L}))

    mu = mu_limit_checks(1, (10**4, 10**5))
    out.append(CheckResult("mobius_log_sum", abs(mu["sum_mu_log_over_d"][-1] + 1) <= 0.05,
                           {"value": mu["sum_mu_log_over_d"][-1]}))

    I1 = singular_integral(form, w)
    I2 = singular_integral(form, w, QuadratureSpec(samples=2 * 10**5), method="thickening")
    tol = 3 * I2.error + I1.error
    out.append(CheckResult("singular_integral_routes_agree", abs(I1.value - I2.value) <= tol,
                           {"leray": I1.value, "thickening": I2.value, "tolerance": tol}))
    return out

