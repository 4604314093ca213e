"""Complete exponential sums attached to a ternary cone with a congruence condition.

Two independent evaluation routes are provided for the sums over residues:

* ``direct``: the literal double sum over units ``a`` and residue vectors,
  accumulated as an exact integer histogram of phases and summed once.
* ``reduced``: the unit sum is a Ramanujan sum, which collapses the sum to
  signed combinations of

      Phi_M(c; mu) = sum_{b mod M, b = mu mod L, F(b) = 0 mod M} e_M(c.b),

  and Phi factors over the prime powers of M. Solutions mod p^k are produced
  by Hensel lifting, so the cost is about p^(2k) instead of (qL)^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .arith import (
    RealCharacter,
    euler_phi,
    exp_sum,
    factorize,
    gauss_iota,
    is_square,
    jacobi,
    jacobi_table,
    kronecker,
    mobius,
    omega_split,
    prime_divisors,
    real_characters,
    unit_root,
    valuation,
)
from .errors import BudgetExceeded, EvenModulus, NotCoprime, ZeroDual
from .localdens import CongruenceCondition, count_mod, count_prime_power
from .quadform import TernaryQuadraticForm, bad_modulus, dual_eval

DEFAULT_BUDGET = 5 * 10**7
Vector = Sequence[int]


@dataclass(frozen=True)
class SumContext:
    """Form, congruence modulus L and a representative lam of Gamma in [0, L)^3."""

    form: TernaryQuadraticForm
    L: int
    lam: tuple[int, int, int]
    omega: int = field(init=False)

    def __post_init__(self) -> None:
        lam = tuple(int(v) % self.L for v in self.lam)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "omega", bad_modulus(self.form, self.L))
        CongruenceCondition(self.L, lam).validate(self.form)

    @property
    def condition(self) -> CongruenceCondition:
        return CongruenceCondition(self.L, self.lam)

    def scaled(self, d: int) -> "SumContext":
        """Context with representative d * lam (gcd(d, L) = 1)."""
        if math.gcd(d, self.L) != 1:
            raise NotCoprime(f"gcd({d}, {self.L}) > 1")
        return SumContext(self.form, self.L, tuple(d * v for v in self.lam))


@dataclass(frozen=True)
class TruncationPolicy:
    u_max: int = 4096
    x_max: int = 10**4
    tail_report: bool = True

    def __post_init__(self) -> None:
        if self.u_max < 1 or self.x_max < 1:
            raise ValueError("truncation bounds must be >= 1")


def _dot(c: Vector, v: Vector) -> int:
    return sum(int(a) * int(b) for a, b in zip(c, v))


def _is_smooth(n: int, omega: int) -> bool:
    return omega_split(n, omega)[0] == 1


# -- solutions mod prime powers and the Phi sums ----------------------------


@lru_cache(maxsize=256)
def _solutions(form: TernaryQuadraticForm, p: int, k: int, start: Optional[tuple], e: int) -> np.ndarray:
    """All solutions mod p^k, restricted to the class ``start`` mod p^e when e >= 1."""
    co = np.array(form.coeffs, dtype=np.int64)
    g2 = form.gram2_array
    if e >= 1:
        pe = p ** e
        st = np.array([[v % pe for v in start]], dtype=np.int64)
        sols = st if form(st[0]) % pe == 0 else st[:0]
        level = e
    else:
        sols = _kernels.solutions_mod_p(co, p, False)
        level = 1
    while level < k:
        sols = _kernels.lift_solutions(sols, co, g2, p, level)
        level += 1
    sols.setflags(write=False)
    return sols


def _expected_solutions(form: TernaryQuadraticForm, p: int, k: int, start, e: int) -> int:
    return count_prime_power(form, p, k, start, e)


def _phase_hists(form: TernaryQuadraticForm, p: int, k: int, start, e: int, cs: np.ndarray,
                 budget: int) -> np.ndarray:
    """Histograms of c.b mod p^k over solutions b mod p^k (one row per c)."""
    M = p ** k
    n_sols = _expected_solutions(form, p, k, start, e)
    if n_sols > budget:
        raise BudgetExceeded(f"{n_sols} solutions mod {p}^{k} exceed the budget {budget}")
    base = max(e, 1)
    if k <= base:
        sols = _solutions(form, p, k, start, min(e, k))
        phases = (sols @ cs.T) % M
        return np.stack([np.bincount(phases[:, i], minlength=M) for i in range(cs.shape[0])])
    prev = _solutions(form, p, k - 1, start, e)
    co = np.array(form.coeffs, dtype=np.int64)
    return _kernels.lift_phase_hist(prev, co, form.gram2_array, p, k - 1, cs, M)


def phi_sums(form: TernaryQuadraticForm, M: int, cs: Sequence[Vector], L: int, mu: Vector,
             budget: int = DEFAULT_BUDGET) -> list[complex]:
    """Phi_M(c; mu) for each c; requires L | M."""
    if M % L:
        raise ValueError("Phi_M needs L | M")
    cs = np.array(cs, dtype=np.int64).reshape(-1, 3)
    out = np.ones(len(cs), dtype=complex)
    if M == 1:
        return list(out)
    if not cs.any():
        n = count_mod(form, M, CongruenceCondition(L, tuple(mu)))
        return [complex(n)] * len(cs)
    for p, k in factorize(M):
        pk = p ** k
        u = pow(M // pk, -1, pk)
        e = valuation(L, p) if L % p == 0 else 0
        start = tuple(int(v) % p ** e for v in mu) if e else None
        twisted = (u * cs) % pk
        hists = _phase_hists(form, p, k, start, e, twisted, budget)
        for i in range(len(cs)):
            out[i] *= exp_sum(hists[i], pk)
    return list(out)


def _reduced_sums(form: TernaryQuadraticForm, q: int, L: int, mu: Vector, cs: Sequence[Vector],
                  budget: int) -> list[complex]:
    """sum_{a mod q}^* sum_{y mod qL^2, y = mu mod L, L^2 | F(y)} e_q(a F(y)/L^2) e_{qL^2}(c.y).

    Ramanujan's evaluation of the a-sum gives
    sum over square-free s | q with s | c of (q/s) mu(s) s^3 Phi_{(q/s) L^2}(c/s; mu).
    """
    out = []
    L2 = L * L
    squarefree_divs = [s for s in _divisors(q) if mobius(s) != 0]
    for c in cs:
        total = 0j
        exact = 0
        c_zero = not any(c)
        for s in squarefree_divs:
            if any(int(ci) % s for ci in c):
                continue
            d = q // s
            coeff = d * mobius(s) * s ** 3
            cc = tuple(int(ci) // s for ci in c)
            if c_zero:
                exact += coeff * count_mod(form, d * L2, CongruenceCondition(L, tuple(mu)))
            else:
                total += coeff * phi_sums(form, d * L2, [cc], L, mu, budget)[0]
        out.append(complex(exact) if c_zero else total)
    return out


@lru_cache(maxsize=4096)
def _divisors(n: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p ** i for d in divs for i in range(e + 1)]
    return tuple(sorted(divs))


def _direct_sums(form: TernaryQuadraticForm, q: int, L: int, lam: Vector, cs: Sequence[Vector],
                 budget: int) -> list[complex]:
    """Literal sum_{a mod q}^* sum_{sigma mod qL} e_{qL}(a L n + c.sigma), n = F(L sigma + lam)/L^2."""
    M = q * L
    if M ** 3 * max(1, len(cs)) > budget:
        raise BudgetExceeded(f"direct sum needs {M ** 3 * len(cs)} terms (budget {budget})")
    co = np.array(form.coeffs, dtype=np.int64)
    cs_arr = np.array(cs, dtype=np.int64).reshape(-1, 3)
    H = _kernels.direct_sum_hist(co, q, L, np.array(lam, dtype=np.int64), cs_arr)
    units = [a for a in range(q) if math.gcd(a, q) == 1]
    n_idx = np.arange(q, dtype=np.int64)[:, None]
    k_idx = np.arange(M, dtype=np.int64)[None, :]
    out = []
    for ci in range(len(cs_arr)):
        hist = np.zeros(M, dtype=np.int64)
        flat = H[ci].ravel()
        for a in units:
            phase = ((a * L * n_idx + k_idx) % M).ravel()
            hist += np.bincount(phase, weights=flat, minlength=M).astype(np.int64)
        out.append(exp_sum(hist, M))
    return out


# -- the complete sums -----------------------------------------------------


def _pick_method(method: str, q: int, L: int, ncs: int) -> str:
    if method == "auto":
        return "direct" if (q * L) ** 3 * ncs <= 2 * 10**6 else "reduced"
    if method not in ("direct", "reduced"):
        raise ValueError(f"unknown method {method!r}")
    return method


def sum_Sq_many(ctx: SumContext, q: int, cs: Sequence[Vector], method: str = "auto",
                budget: int = DEFAULT_BUDGET) -> list[complex]:
    """S_{q,L,lam}(c) for several c at once."""
    if q < 1:
        raise ValueError("q must be positive")
    cs = [tuple(int(v) for v in c) for c in cs]
    method = _pick_method(method, q, ctx.L, len(cs))
    if method == "direct":
        return _direct_sums(ctx.form, q, ctx.L, ctx.lam, cs, budget)
    vals = _reduced_sums(ctx.form, q, ctx.L, ctx.lam, cs, budget)
    M = q * ctx.L * ctx.L
    return [v * unit_root(-_dot(c, ctx.lam), M) if any(c) else v for v, c in zip(vals, cs)]


def sum_Sq(ctx: SumContext, q: int, c: Vector, method: str = "auto", budget: int = DEFAULT_BUDGET) -> complex:
    """S_{q,L,lam}(c) = sum_{a mod q}^* sum_{sigma mod qL, L^2 | F(L sigma + lam)} e_{qL}(a F(L sigma + lam)/L + c.sigma)."""
    return sum_Sq_many(ctx, q, [c], method, budget)[0]


def salie_T(x: int, fstar: int, method: str = "closed") -> complex:
    """T(x; c) = sum_{a mod x}^* (a/x) e_x(-a F*(c)), given ``fstar = F*(c)``."""
    if x < 1 or x % 2 == 0:
        raise EvenModulus(f"T(x; c) needs odd x, got {x}")
    if method == "direct":
        a = np.arange(x, dtype=np.int64)
        chi = jacobi_table(x)
        phases = (-a * fstar) % x
        re = math.fsum((chi * np.cos(2 * math.pi * phases / x)).tolist())
        im = math.fsum((chi * np.sin(2 * math.pi * phases / x)).tolist())
        return complex(re, im)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return _salie_closed(x, int(fstar))


def _salie_prime_power(p: int, e: int, m: int) -> complex:
    v = valuation(m, p) if m != 0 else None
    if e % 2 == 0:
        # Ramanujan sum c_{p^e}(m)
        if v is None or v >= e:
            return complex(p ** e - p ** (e - 1))
        if v == e - 1:
            return complex(-(p ** (e - 1)))
        return 0j
    if v is not None and v == e - 1:
        mp = m // p ** (e - 1)
        return p ** (e - 1) * jacobi(-mp, p) * gauss_iota(p)
    return 0j


def _salie_closed(x: int, m: int) -> complex:
    acc_q, acc = 1, 1 + 0j
    for p, e in factorize(x):
        Q = p ** e
        acc = jacobi(Q, acc_q) * jacobi(acc_q, Q) * acc * _salie_prime_power(p, e, m)
        acc_q *= Q
    return acc


def sum_S1_closed(ctx: SumContext, q1: int, q2: int, c: Vector) -> complex:
    """e_{q1}(-(q2 L^2)^{-1} c.lam) iota_{q1}^3 T(q1; c) for gcd(q1, Omega) = 1."""
    if math.gcd(q1, ctx.omega) != 1:
        raise NotCoprime(f"gcd(q1={q1}, Omega={ctx.omega}) > 1")
    if q1 == 1:
        return 1 + 0j
    inv = pow(q2 * ctx.L * ctx.L, -1, q1)
    phase = unit_root(-inv * _dot(c, ctx.lam), q1)
    return phase * gauss_iota(q1) ** 3 * salie_T(q1, dual_eval(ctx.form, c))


def _check_S2_args(ctx: SumContext, q2: int, x: int) -> None:
    if math.gcd(x, ctx.L) != 1:
        raise NotCoprime(f"gcd(x={x}, L={ctx.L}) > 1")
    if not _is_smooth(q2, ctx.omega):
        raise ValueError(f"q2={q2} has a prime factor not dividing Omega={ctx.omega}")


def sum_S2_many(ctx: SumContext, q2: int, x: int, cs: Sequence[Vector], method: str = "auto",
                budget: int = DEFAULT_BUDGET) -> list[complex]:
    _check_S2_args(ctx, q2, x)
    L = ctx.L
    mu = tuple((pow(x, -1, L) * v) % L for v in ctx.lam) if L > 1 else (0, 0, 0)
    cs = [tuple(int(v) for v in c) for c in cs]
    method = _pick_method(method, q2, L, len(cs))
    if method == "reduced":
        return _reduced_sums(ctx.form, q2, L, mu, cs, budget)
    vals = _direct_sums(ctx.form, q2, L, mu, cs, budget)
    return [v * unit_root(_dot(c, mu), q2 * L * L) for v, c in zip(vals, cs)]


def sum_S2(ctx: SumContext, q2: int, x: int, c: Vector, method: str = "auto",
           budget: int = DEFAULT_BUDGET) -> complex:
    """The sum over a2 mod q2 and alpha mod q2 L^2 (alpha = x^{-1} lam mod L, L^2 | F(alpha))
    of e_{q2 L^2}(a2 F(alpha) + c.alpha)."""
    return sum_S2_many(ctx, q2, x, [c], method, budget)[0]


def S2_factor(ctx: SumContext, q1: int, q2: int, c: Vector, method: str = "auto",
              budget: int = DEFAULT_BUDGET) -> complex:
    """e_{q2 L^2}(-q1^{-1} c.lam) times the q2-sum at x = q1."""
    M = q2 * ctx.L * ctx.L
    inv = pow(q1, -1, M) if M > 1 else 0
    return unit_root(-inv * _dot(c, ctx.lam), M) * sum_S2(ctx, q2, q1, c, method, budget)


# -- character averages, theta, eta ---------------------------------------


def char_average_A(ctx: SumContext, q2: int, chi: RealCharacter, c: Vector, method: str = "auto",
                   budget: int = DEFAULT_BUDGET) -> complex:
    """(1/phi(L)) sum_{x mod L} conj(chi(x)) * S-sum(q2; x, c); chi is real so conj is the identity."""
    if chi.modulus != ctx.L:
        raise ValueError("character modulus must equal L")
    units = [x for x in range(1, ctx.L + 1) if math.gcd(x, ctx.L) == 1]
    total = 0j
    for x in units:
        total += chi(x) * sum_S2(ctx, q2, x, c, method, budget)
    return total / euler_phi(ctx.L)


def creal_test(chi: RealCharacter, fstar: int, L: int) -> Optional[int]:
    """The signed divisor xi of L with -F*(c) = xi * square and chi = (xi / .), else None.

    The comparison is made on all n coprime to 4 L |F*(c)| in one period, which is
    exactly the condition that chi(.)(-F*(c)/.) is principal.
    """
    if fstar == 0:
        raise ZeroDual("creal_test needs F*(c) != 0")
    if chi.modulus != L:
        raise ValueError("character modulus must equal L")
    m = -fstar
    N = 4 * L * abs(fstar)
    window = [n for n in range(1, N + 1) if math.gcd(n, N) == 1]
    if any(chi(n) * jacobi(m, n) != 1 for n in window):
        return None
    for d in sorted(_divisors(L)):
        for xi in (d, -d):
            if m % xi == 0 and m // xi > 0 and is_square(m // xi):
                if all(chi(n) == kronecker(xi, n) for n in window):
                    return xi
    return None


@dataclass
class ThetaResult:
    value: complex
    tail_bound: float
    terms: int
    support_max: int


def theta_chi(ctx: SumContext, chi: RealCharacter, c: Vector, policy: TruncationPolicy = TruncationPolicy(),
              literal: bool = False) -> ThetaResult:
    """(6/pi^2) sum over square-full x coprime to Omega of chi(x) T(x;c)/(x iota_x) times
    prod_{p | x Omega F*(c)} (1 + 1/p)^{-1}.

    The product is the density of square-free integers coprime to x Omega F*(c).
    ``literal=True`` uses (1 - 1/p) instead. T(p^e; c) = 0 once e >= v_p(F*(c)) + 2,
    so only x built from primes of F*(c) contribute and the series is finite;
    ``tail_bound`` is the exact sum of |terms| beyond ``x_max``.
    """
    fstar = dual_eval(ctx.form, c)
    if fstar == 0:
        raise ZeroDual("theta is defined for F*(c) != 0")
    local = [(p, valuation(fstar, p)) for p in prime_divisors(abs(fstar)) if ctx.omega % p]
    support = [1]
    for p, v in local:
        support = [s * p ** e for s in support for e in [0] + list(range(2, v + 2))]
    support.sort()

    def factor(p: int) -> float:
        return 1.0 - 1.0 / p if literal else 1.0 / (1.0 + 1.0 / p)

    base_primes = set(prime_divisors(ctx.omega)) | set(prime_divisors(abs(fstar)))
    total, tail, terms = 0j, 0.0, 0
    for x in support:
        T = salie_T(x, fstar)
        if T == 0:
            continue
        prod = 1.0
        for p in base_primes | set(prime_divisors(x)):
            prod *= factor(p)
        term = chi(x) * T / (x * gauss_iota(x)) * prod
        if x <= policy.x_max:
            total += term
            terms += 1
        else:
            tail += abs(term)
    scale = 6.0 / math.pi ** 2
    return ThetaResult(scale * total, scale * tail, terms, support[-1])


def smooth_numbers(primes: Iterable[int], bound: int) -> list[int]:
    out = [1]
    for p in primes:
        new = []
        for u in out:
            v = u
            while v <= bound:
                new.append(v)
                v *= p
        out = new
    return sorted(out)


@dataclass
class EtaResult:
    value: complex
    components: dict
    tail_bound: float
    u_terms: int
    case: str

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "components": {k: [v.real, v.imag] for k, v in self.components.items()},
            "tail_bound": self.tail_bound,
            "u_terms": self.u_terms,
            "case": self.case,
        }


def _u_series(ctx: SumContext, chi: RealCharacter, c: Vector, us: list[int], budget: int) -> tuple[complex, float]:
    total = 0j
    worst = 0.0
    for u in us:
        A = char_average_A(ctx, u, chi, c, "reduced", budget)
        total += A / u ** 3
        worst = max(worst, abs(A) / u ** 2.5)
    return total, worst


def _smooth_tail(primes: Sequence[int], u_max: int, exponent: float = 0.5) -> float:
    """sum_{u > u_max, u Omega-smooth} u^(-exponent), summed to 10^12 u_max plus a geometric remainder."""
    bound = u_max * 10**12
    us = [u for u in smooth_numbers(primes, bound) if u > u_max]
    s = sum(u ** -exponent for u in us)
    return s + s * bound ** -exponent


def eta_coefficient(ctx: SumContext, c: Vector, policy: TruncationPolicy = TruncationPolicy(),
                    chi: Optional[RealCharacter] = None, literal: bool = False,
                    budget: int = DEFAULT_BUDGET) -> EtaResult:
    """eta_lam(chi; c), or the aggregate over real characters when ``chi`` is None.

    F*(c) = 0: K * sum_{u | Omega^infty} A_u(chi; c)/u^3 with
    K = (3/pi^2) prod_{p | Omega} (1 + 1/p)^{-1}, the density constant of
    sum_{r <= R, (r, Omega) = 1} phi(r); ``literal=True`` uses (1 - 1/p).
    F*(c) != 0: sum_u A_u(chi; c) theta_chi(c)/u^3 over characters passing creal_test.
    """
    fstar = dual_eval(ctx.form, c)
    chars = [chi] if chi is not None else real_characters(ctx.L)
    primes = prime_divisors(ctx.omega)
    us = [u for u in smooth_numbers(primes, policy.u_max)]
    comps = {}
    tail = 0.0
    if fstar == 0:
        K = 3.0 / math.pi ** 2
        for p in primes:
            K *= (1.0 - 1.0 / p) if literal else 1.0 / (1.0 + 1.0 / p)
        for ch in chars:
            s, worst = _u_series(ctx, ch, c, us, budget)
            comps[ch.label] = K * s
            tail += K * worst * _smooth_tail(primes, policy.u_max)
        case = "dual-zero"
    else:
        for ch in chars:
            if creal_test(ch, fstar, ctx.L) is None:
                continue
            th = theta_chi(ctx, ch, c, policy, literal)
            s, worst = _u_series(ctx, ch, c, us, budget)
            comps[ch.label] = s * th.value
            tail += abs(th.value) * worst * _smooth_tail(primes, policy.u_max) + abs(s) * th.tail_bound
        case = "dual-nonzero"
    value = sum(comps.values(), 0j)
    return EtaResult(value, comps, tail, len(us), case)


# -- partial sums over q ---------------------------------------------------


class _CRTTerms:
    """e_{qL^2}(c.lam) S_q(c) = iota_{q1}^3 T(q1; c) * S-sum(q2; q1, c), cached over q2 and q1 mod L."""

    def __init__(self, ctx: SumContext, c: Vector, budget: int):
        self.ctx = ctx
        self.c = tuple(int(v) for v in c)
        self.fstar = dual_eval(ctx.form, c)
        self.budget = budget
        self._s2: dict = {}

    def s2(self, q2: int, x: int) -> complex:
        key = (q2, x % self.ctx.L)
        if key not in self._s2:
            self._s2[key] = sum_S2(self.ctx, q2, x, self.c, "reduced", self.budget)
        return self._s2[key]

    def term(self, q: int) -> complex:
        q1, q2 = omega_split(q, self.ctx.omega)
        t1 = salie_T(q1, self.fstar)
        if t1 == 0:
            return 0j
        return gauss_iota(q1) ** 3 * t1 * self.s2(q2, q1)


def partial_F_series(ctx: SumContext, c: Vector, X: int, method: str = "crt",
                     budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Cumulative values F_lam(c; x) for x = 1..X (index x-1)."""
    if not any(c):
        raise ValueError("partial_F is defined for c != 0")
    terms = np.zeros(X, dtype=complex)
    if method == "crt":
        crt = _CRTTerms(ctx, c, budget)
        for q in range(1, X + 1):
            terms[q - 1] = crt.term(q) / q ** 2
    elif method in ("direct", "reduced", "auto"):
        for q in range(1, X + 1):
            s = sum_Sq(ctx, q, c, method, budget)
            terms[q - 1] = unit_root(_dot(c, ctx.lam), q * ctx.L ** 2) * s / q ** 2
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.cumsum(terms)


def partial_F(ctx: SumContext, c: Vector, X: int, method: str = "crt", budget: int = DEFAULT_BUDGET) -> complex:
    """F_lam(c; X) = sum_{q <= X} e_{qL^2}(c.lam) S_q(c)/q^2."""
    return complex(partial_F_series(ctx, c, X, method, budget)[-1])


def S0_value(ctx: SumContext, q: int) -> int:
    """S_q(0) exactly: sum_{d | q} d mu(q/d) (q/d)^3 N(d L^2), N counting the cone mod dL^2 in the class lam."""
    cond = ctx.condition
    L2 = ctx.L ** 2
    total = 0
    for d in _divisors(q):
        m = mobius(q // d)
        if m:
            total += d * m * (q // d) ** 3 * count_mod(ctx.form, d * L2, cond)
    return total


@dataclass
class S0Partial:
    X: int
    plain: int
    over_q3: Fraction

    def as_complex(self) -> tuple[complex, complex]:
        return complex(self.plain), complex(float(self.over_q3))


def partial_sum_S0(ctx: SumContext, X: int) -> S0Partial:
    """(sum_{q <= X} S_q(0), sum_{q <= X} S_q(0)/q^3), both exact."""
    return partial_sum_S0_series(ctx, [X])[0]


def partial_sum_S0_series(ctx: SumContext, Xs: Sequence[int]) -> list[S0Partial]:
    Xs = sorted(Xs)
    out = []
    plain, over = 0, Fraction(0)
    q = 0
    for X in Xs:
        while q < X:
            q += 1
            s = S0_value(ctx, q)
            plain += s
            over += Fraction(s, q ** 3)
        out.append(S0Partial(X, plain, over))
    return out
