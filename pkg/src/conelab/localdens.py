"""Exact p-adic local densities of ternary cones.

Counts of solutions mod p^k are obtained from a Hensel tree. A node is a
primitive residue class b mod p^j on the cone mod p^j. With
g = v_p(A b), the class is *decided* once g < j: for every k >= j + g it has
exactly p^(2(k-j)+g) lifts on the cone mod p^k if p^(j+g) | F(b), and none
otherwise. Undecided classes are refined into their p^3 children. Because a
primitive b has v_p(A b) <= v_p(det A) the tree is finite, so primitive and
congruence-constrained densities come out as exact rationals.

Non-primitive solutions are x = p y, which gives the vertex recursion
N_k = N_k^o + p^3 N_{k-2} (N_0 = 1, and only x = 0 at k = 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _kernels
from .arith import factorize, jacobi_table, prime_divisors, primes_up_to, valuation
from .errors import BudgetExceeded, InvalidCondition, NotStabilized
from .quadform import TernaryQuadraticForm, bad_modulus


@dataclass(frozen=True)
class CongruenceCondition:
    """The condition x = gamma mod L, gamma a point of the punctured cone mod L."""

    L: int
    gamma: tuple[int, int, int]

    def __post_init__(self) -> None:
        if self.L < 1:
            raise InvalidCondition("L must be a positive integer")
        object.__setattr__(self, "gamma", tuple(int(g) % self.L for g in self.gamma))

    def validate(self, form: TernaryQuadraticForm) -> "CongruenceCondition":
        if form(self.gamma) % self.L != 0:
            raise InvalidCondition(f"F(gamma) = {form(self.gamma)} is not 0 mod L = {self.L}")
        for p in prime_divisors(self.L):
            if all(g % p == 0 for g in self.gamma):
                raise InvalidCondition(f"gamma is divisible by {p}, not a point of the punctured cone")
        return self

    def scaled(self, d: int) -> "CongruenceCondition":
        """The condition with residue d * gamma."""
        return CongruenceCondition(self.L, tuple(d * g for g in self.gamma))

    def residue_mod(self, p: int) -> tuple[int, Optional[tuple[int, int, int]]]:
        """``(e, gamma mod p^e)`` with ``e = v_p(L)``; ``(0, None)`` when p does not divide L."""
        e = valuation(self.L, p) if self.L % p == 0 else 0
        if e == 0:
            return 0, None
        pe = p ** e
        return e, tuple(g % pe for g in self.gamma)

    @property
    def omega_primes(self) -> tuple[int, ...]:
        return prime_divisors(self.L)


def trivial_condition() -> CongruenceCondition:
    return CongruenceCondition(1, (0, 0, 0))


@dataclass(frozen=True)
class DensityValue:
    """A local density.

    ``value`` is the exact limit. ``raw`` is count(p^k)/p^(2k) at ``k_used``.
    ``method`` is "tree" when the count ratio is eventually constant (primitive
    or congruence-constrained densities) and "extrapolated" for plain densities,
    whose ratios approach the limit geometrically with ratio 1/p.
    """

    p: int
    k_used: int
    value: Fraction
    stabilized: bool
    raw: Fraction
    method: str

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k_used": self.k_used,
            "value": str(self.value),
            "value_float": float(self.value),
            "raw": str(self.raw),
            "stabilized": self.stabilized,
            "method": self.method,
        }


# -- the Hensel tree ---------------------------------------------------------


def _residues_mod_p(form: TernaryQuadraticForm, p: int, nonzero: bool) -> np.ndarray:
    co = np.array(form.coeffs, dtype=np.int64)
    return _kernels.solutions_mod_p(co, p, nonzero)


def _gradient_valuation(A: np.ndarray, nodes: np.ndarray, p: int, j: int) -> np.ndarray:
    """min(v_p(A b), j) row-wise; j means 'at least j' (undecided)."""
    grad = nodes @ A.T
    g = np.full(len(nodes), j, dtype=np.int64)
    pk = 1
    for k in range(j):
        # rows where some component is not divisible by p^(k+1) get valuation k
        nz = np.any(grad % (pk * p) != 0, axis=1)
        g = np.where((g == j) & nz, k, g)
        pk *= p
    return g


class PrimitiveTree:
    """Hensel tree of primitive solutions mod powers of p.

    ``start`` is a residue mod p^e (e >= 1) restricting the root class; with
    ``start=None`` all primitive solutions mod p are roots.
    """

    def __init__(self, form: TernaryQuadraticForm, p: int, start=None, e: int = 1, max_depth: int = 64):
        self.form = form
        self.p = p
        self.A = form.gram2_array
        self.co = np.array(form.coeffs, dtype=np.int64)
        self.start_level = e if start is not None else 1
        self.max_depth = max_depth
        if start is None:
            roots = _residues_mod_p(form, p, nonzero=True)
        else:
            pe = p ** e
            roots = np.array([[int(v) % pe for v in start]], dtype=np.int64)
            if form(roots[0]) % pe != 0:
                roots = roots[:0]
        # decided nodes per level: (g array, F(b) array)
        self._decided: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._undecided_count: dict[int, int] = {}
        self._frontier = roots
        self._level = self.start_level
        self._settle_level()

    def _settle_level(self) -> None:
        j = self._level
        nodes = self._frontier
        if len(nodes) == 0:
            self._decided[j] = (np.zeros(0, np.int64), np.zeros(0, np.int64))
            self._undecided_count[j] = 0
            return
        g = _gradient_valuation(self.A, nodes, self.p, j)
        done = g < j
        fvals = self.form.evaluate_array(nodes[done])
        self._decided[j] = (g[done], fvals)
        self._frontier = nodes[~done]
        self._undecided_count[j] = int((~done).sum())

    def _advance(self) -> None:
        p, j = self.p, self._level
        if j >= self.max_depth:
            raise BudgetExceeded(f"Hensel tree for p={p} did not terminate by depth {self.max_depth}")
        nodes = self._frontier
        if len(nodes):
            fvals = self.form.evaluate_array(nodes)
            # undecided nodes have p^j | A b, so F is constant mod p^(j+1) on the class
            keep = nodes[fvals % (p ** (j + 1)) == 0]
            pj = p ** j
            d = np.array(np.meshgrid(*(np.arange(p, dtype=np.int64),) * 3, indexing="ij")).reshape(3, -1).T
            nodes = (keep[:, None, :] + pj * d[None, :, :]).reshape(-1, 3)
        self._frontier = nodes
        self._level = j + 1
        self._settle_level()

    @property
    def finished(self) -> bool:
        return len(self._frontier) == 0

    def grow_to(self, k: int) -> None:
        while self._level < k and not self.finished:
            self._advance()

    def complete(self) -> None:
        while not self.finished:
            self._advance()

    def count(self, k: int) -> int:
        """Primitive solutions mod p^k in the root classes (k >= start level)."""
        p = self.p
        if k < self.start_level:
            raise ValueError("count below the start level is not defined by the tree")
        self.grow_to(k)
        total = 0
        for j, (g, fvals) in self._decided.items():
            if j > k or len(g) == 0:
                continue
            for gi in np.unique(g).tolist():
                fv = fvals[g == gi]
                if k >= j + gi:
                    total += int((fv % p ** (j + gi) == 0).sum()) * p ** (2 * (k - j) + gi)
                else:
                    total += int((fv % p ** k == 0).sum()) * p ** (3 * (k - j))
        total += self._undecided_count.get(k, 0)
        return total

    def density(self) -> Fraction:
        """Exact limit of count(p^k)/p^(2k)."""
        self.complete()
        p = self.p
        out = Fraction(0)
        for j, (g, fvals) in self._decided.items():
            for gi, fv in zip(g.tolist(), fvals.tolist()):
                if fv % p ** (j + gi) == 0:
                    out += Fraction(p ** gi, p ** (2 * j))
        return out

    def stable_from(self) -> int:
        """Smallest k from which count(p^k)/p^(2k) is constant."""
        self.complete()
        k0 = self.start_level
        for j, (g, _) in self._decided.items():
            if len(g):
                k0 = max(k0, j + int(g.max()))
        return k0


@lru_cache(maxsize=1024)
def _tree(form: TernaryQuadraticForm, p: int, start, e: int) -> PrimitiveTree:
    return PrimitiveTree(form, p, start, e)


def _count_mod_prime(form: TernaryQuadraticForm, p: int) -> int:
    """#{x mod p : F(x) = 0} in O(p^2) using root counts of the quadratic in one variable."""
    if p < 64:
        return len(_residues_mod_p(form, p, nonzero=False))
    a, b, c, d, e, f = (v % p for v in form.coeffs)
    # pick a variable with a nonzero square coefficient mod p
    perms = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
    coeff_of = {2: c, 1: b, 0: a}
    for perm in perms:
        if coeff_of[perm[2]] != 0:
            break
    else:
        return len(_residues_mod_p(form, p, nonzero=False))
    full = {(0, 0): a, (1, 1): b, (2, 2): c, (0, 1): d, (0, 2): e, (1, 2): f}

    def cf(i, j):
        return full[(min(i, j), max(i, j))]

    u, v, w = perm
    cw = cf(w, w)
    x = np.arange(p, dtype=np.int64)[:, None]
    y = np.arange(p, dtype=np.int64)[None, :]
    lin = (cf(u, w) * x + cf(v, w) * y) % p
    const = (cf(u, u) * x * x + cf(v, v) * y * y + cf(u, v) * x * y) % p
    # cw t^2 + lin t + const has 1 + (disc/p) roots mod odd p
    disc = (lin * lin - 4 * cw * const) % p
    leg = jacobi_table(p)
    return int((1 + leg[disc]).sum())


def count_prime_power(form: TernaryQuadraticForm, p: int, k: int, start=None, e: int = 0,
                      primitive: bool = False) -> int:
    """Solutions mod p^k; ``start`` (mod p^e, e >= 1) restricts to a residue class."""
    if k == 0:
        return 1
    if start is not None and e >= 1:
        e_eff = min(e, k)
        pe = p ** e_eff
        st = tuple(int(v) % pe for v in start)
        if all(v % p == 0 for v in st):
            # class of non-primitive points; only reachable for invalid conditions
            raise InvalidCondition("constraint residue is divisible by p")
        if k == e_eff:
            return 1 if form(st) % pe == 0 else 0
        return _tree(form, p, st, e_eff).count(k)
    if k == 1:
        n1 = _count_mod_prime(form, p)
        return n1 - 1 if primitive else n1
    prim = _tree(form, p, None, 1).count(k)
    if primitive:
        return prim
    return _plain_counts(form, p, k)[k]


@lru_cache(maxsize=4096)
def _plain_counts(form: TernaryQuadraticForm, p: int, k: int) -> tuple[int, ...]:
    tree = _tree(form, p, None, 1)
    N = [1]
    for j in range(1, k + 1):
        vertex = 1 if j == 1 else p ** 3 * N[j - 2]
        N.append(tree.count(j) + vertex)
    return tuple(N)


def count_mod(form: TernaryQuadraticForm, m: int, constraint: Optional[CongruenceCondition] = None,
              primitive: bool = False, method: str = "tree", budget: int = 10**9) -> int:
    """Exact #{x in (Z/m)^3 : F(x) = 0 mod m} with optional constraint and primitivity.

    The constraint x = gamma is imposed mod gcd(L, m); primitive means that no
    prime divisor of m divides all coordinates.
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    if method == "exhaustive":
        if m ** 3 > budget:
            raise BudgetExceeded(f"exhaustive count mod {m} needs {m ** 3} evaluations")
        Lc = math.gcd(constraint.L, m) if constraint else 1
        gamma = np.array(constraint.gamma if constraint else (0, 0, 0), dtype=np.int64)
        primes = np.array(prime_divisors(m) if primitive else (), dtype=np.int64)
        return int(_kernels.count_exhaustive(np.array(form.coeffs, dtype=np.int64), m, gamma, Lc, primes))
    if method != "tree":
        raise ValueError(f"unknown method {method!r}")
    total = 1
    for p, k in factorize(m):
        e, start = constraint.residue_mod(p) if constraint else (0, None)
        total *= count_prime_power(form, p, k, start, e, primitive)
    return total


# -- densities ---------------------------------------------------------------


def local_density(form: TernaryQuadraticForm, p: int, constraint: Optional[CongruenceCondition] = None,
                  primitive: bool = False, k_max: Optional[int] = None) -> DensityValue:
    """sigma_p, sigma_p(L, Gamma) or the primitive density sigma_p^o."""
    e, start = constraint.residue_mod(p) if constraint else (0, None)
    if e >= 1 or primitive:
        tree = _tree(form, p, start, e if e >= 1 else 1)
        value = tree.density()
        k0 = tree.stable_from()
        counts = [count_prime_power(form, p, k, start, e, primitive=True) for k in (k0, k0 + 1, k0 + 2)]
        ratios = [Fraction(n, p ** (2 * k)) for n, k in zip(counts, (k0, k0 + 1, k0 + 2))]
        stabilized = all(r == value for r in ratios)
        return DensityValue(p, k0, value, stabilized, ratios[0], "tree")
    if k_max is None:
        k_max = 12 if p <= 3 else 6
    # plain density: s_k = s_k^o + s_{k-2}/p, so (p s_k - s_{k-2})/(p-1) is exact once s^o is stable
    N = _plain_counts(form, p, k_max)
    s = [Fraction(N[k], p ** (2 * k)) for k in range(k_max + 1)]
    est = {k: (p * s[k] - s[k - 2]) / (p - 1) for k in range(2, k_max + 1)}
    for k in range(4, k_max + 1):
        if est[k] == est[k - 1] == est[k - 2]:
            return DensityValue(p, k, est[k], True, s[k], "extrapolated")
    warnings.warn(f"plain density at p={p} not stabilized by k={k_max}", NotStabilized)
    return DensityValue(p, k_max, est[k_max], False, s[k_max], "extrapolated")


@dataclass(frozen=True)
class RelationReport:
    p: int
    lhs: Fraction  # (1 - 1/p) sigma_p
    rhs: Fraction  # sigma_p^o
    holds: bool

    def to_dict(self) -> dict:
        return {"p": self.p, "lhs": str(self.lhs), "rhs": str(self.rhs), "holds": self.holds}


def primitive_relation_check(form: TernaryQuadraticForm, p: int) -> RelationReport:
    """Compare (1 - 1/p) sigma_p with sigma_p^o."""
    plain = local_density(form, p)
    prim = local_density(form, p, primitive=True)
    lhs = (1 - Fraction(1, p)) * plain.value
    return RelationReport(p, lhs, prim.value, plain.stabilized and prim.stabilized and lhs == prim.value)


def good_prime_factor(form: TernaryQuadraticForm, p: int) -> Fraction:
    """(1 - 1/p) sigma_p for p not dividing 2 det A, from the count mod p alone.

    Every primitive solution mod such p is smooth, so sigma_p^o = N^o(p)/p^2.
    """
    return Fraction(_count_mod_prime(form, p) - 1, p * p)


@dataclass
class SeriesValue:
    """A truncated Euler product with its tail factor.

    ``value`` is the product over p <= P. ``tail_factor`` is the product over
    p > P of (1 - p^-2), which is what every prime not dividing Omega
    contributes; ``completed`` = value * tail_factor.
    """

    value: float
    tail_factor: float
    completed: float
    P: int
    factors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "tail_factor": self.tail_factor,
            "completed": self.completed,
            "P": self.P,
            "bad_factors": {str(p): str(v) for p, v in self.factors.items()},
        }


def _tail_factor(P: int) -> float:
    prod = 1.0
    for p in primes_up_to(P):
        prod *= 1.0 - 1.0 / (p * p)
    return (6.0 / math.pi ** 2) / prod


def euler_factor(form: TernaryQuadraticForm, p: int, condition: CongruenceCondition) -> Fraction:
    """(1 - 1/p) sigma_p(L, Gamma)."""
    if condition.L % p == 0:
        return (1 - Fraction(1, p)) * local_density(form, p, condition).value
    if (2 * form.delta) % p == 0:
        return (1 - Fraction(1, p)) * local_density(form, p).value
    return good_prime_factor(form, p)


def singular_series(form: TernaryQuadraticForm, condition: Optional[CongruenceCondition] = None,
                    P: int = 100) -> SeriesValue:
    """Truncated product of (1 - 1/p) sigma_p(L, Gamma) over p <= P (bad primes always included)."""
    condition = (condition or trivial_condition()).validate(form)
    omega = bad_modulus(form, condition.L)
    primes = sorted(set(primes_up_to(P)) | set(prime_divisors(omega)))
    value = 1.0
    bad = {}
    for p in primes:
        fac = euler_factor(form, p, condition)
        if omega % p == 0:
            bad[p] = fac
        value *= float(fac)
    tail = _tail_factor(max(P, max(primes)))
    return SeriesValue(value, tail, value * tail, P, bad)


def singular_series_exact(form: TernaryQuadraticForm, condition: Optional[CongruenceCondition] = None) -> float:
    """Bad-prime factors times the exact good-prime product (6/pi^2) / prod_{p | Omega} (1 - p^-2)."""
    condition = (condition or trivial_condition()).validate(form)
    omega = bad_modulus(form, condition.L)
    value = 6.0 / math.pi ** 2
    for p in prime_divisors(omega):
        value *= float(euler_factor(form, p, condition)) / (1.0 - 1.0 / (p * p))
    return value


@dataclass
class TamagawaValue:
    value: float
    truncated: float
    tail_factor: float
    local_part: Fraction
    literal_local_part: Fraction
    P: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "truncated": self.truncated,
            "tail_factor": self.tail_factor,
            "local_part": str(self.local_part),
            "literal_local_part": str(self.literal_local_part),
            "P": self.P,
        }


def tamagawa_conic(form: TernaryQuadraticForm, condition: CongruenceCondition, P: int = 100) -> TamagawaValue:
    """Finite Tamagawa volume of the projective congruence neighbourhood.

    phi(L) prod_{p | L} sigma_p(L, Gamma) prod_{p not dividing L} (1 - 1/p) sigma_p.
    At primes p | L where Gamma is a smooth point, sigma_p(L, Gamma) = p^(-2 v_p(L))
    and the local part reduces to prod (1 - 1/p) p^(-v_p(L)), reported as
    ``literal_local_part`` for comparison.
    """
    condition.validate(form)
    L = condition.L
    local = Fraction(1)
    literal = Fraction(1)
    for p, e in factorize(L):
        local *= Fraction(p ** e) * (1 - Fraction(1, p)) * local_density(form, p, condition).value
        literal *= (1 - Fraction(1, p)) * Fraction(1, p ** e)
    omega = bad_modulus(form, L)
    primes = sorted(set(primes_up_to(P)) | set(prime_divisors(omega)))
    prod = 1.0
    for p in primes:
        if L % p:
            prod *= float(euler_factor(form, p, trivial_condition()))
    tail = _tail_factor(max(P, max(primes)))
    truncated = float(local) * prod
    return TamagawaValue(truncated * tail, truncated, tail, local, literal, P)
