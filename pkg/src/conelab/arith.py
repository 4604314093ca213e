"""Exact elementary number theory used throughout conelab."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
import sympy
from scipy.special import digamma

from .errors import EvenModulus, PrincipalCharacter

Factorization = tuple[tuple[int, int], ...]


def factorize(n: int) -> Factorization:
    """Prime factorisation as ascending ``(prime, exponent)`` pairs; ``1 -> ()``."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    return _factorize_cached(int(n))


@lru_cache(maxsize=65536)
def _factorize_cached(n: int) -> Factorization:
    return tuple(sorted(sympy.factorint(n).items()))


def prime_divisors(n: int) -> tuple[int, ...]:
    return tuple(p for p, _ in factorize(abs(n))) if n != 0 else ()


def is_prime(n: int) -> bool:
    return bool(sympy.isprime(n))


def primes_up_to(n: int) -> list[int]:
    return list(sympy.primerange(2, n + 1))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def is_squarefull(n: int) -> bool:
    return all(e >= 2 for _, e in factorize(n))


def squarefull_up_to(n: int) -> list[int]:
    """All square-full integers ``1 <= x <= n`` (1 included), ascending.

    Every square-full number is uniquely ``a^2 b^3`` with ``b`` square-free.
    """
    out = set()
    b = 1
    while b ** 3 <= n:
        if mobius(b) != 0:
            a = 1
            while a * a * b ** 3 <= n:
                out.add(a * a * b ** 3)
                a += 1
        b += 1
    return sorted(out)


def jacobi(a: int, n: int) -> int:
    if n < 1 or n % 2 == 0:
        raise EvenModulus(f"Jacobi symbol needs an odd positive modulus, got {n}")
    return int(sympy.jacobi_symbol(a % n, n))


def kronecker(a: int, n: int) -> int:
    """Kronecker extension of the Jacobi symbol to all ``n >= 1``."""
    if n < 1:
        raise ValueError("kronecker expects n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    return result * (jacobi(a, n) if n > 1 else 1)


@lru_cache(maxsize=4096)
def _jacobi_table_cached(n: int) -> np.ndarray:
    table = np.ones(n, dtype=np.int64)
    a = np.arange(n, dtype=np.int64)
    for p, e in factorize(n):
        if e % 2 == 0:
            table *= (a % p != 0)
            continue
        squares = np.zeros(p, dtype=np.int64)
        squares[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
        legendre = np.where(squares == 1, 1, -1)
        legendre[0] = 0
        table *= legendre[a % p]
    table.setflags(write=False)
    return table


def jacobi_table(n: int) -> np.ndarray:
    """Array ``t`` with ``t[a] = (a/n)`` for ``0 <= a < n`` (``n`` odd)."""
    if n < 1 or n % 2 == 0:
        raise EvenModulus(f"Jacobi symbol needs an odd positive modulus, got {n}")
    return _jacobi_table_cached(n)


def gauss_iota(q: int, method: str = "closed") -> complex:
    """Quadratic Gauss sum ``sum_{a mod q} e(a^2/q)`` for odd ``q``."""
    if q < 1 or q % 2 == 0:
        raise EvenModulus(f"quadratic Gauss sum needs odd q, got {q}")
    if method == "closed":
        root = math.sqrt(q)
        return complex(root, 0.0) if q % 4 == 1 else complex(0.0, root)
    if method == "direct":
        a = np.arange(q, dtype=np.int64)
        phases = (a * a) % q
        return complex(exp_sum(np.bincount(phases, minlength=q), q))
    raise ValueError(f"unknown method {method!r}")


def unit_root(k: int, m: int) -> complex:
    """``e(k/m)`` with the phase reduced exactly before the float step."""
    k %= m
    return cmath.exp(2j * math.pi * k / m)


def exp_sum(hist: np.ndarray, m: int) -> complex:
    """``sum_k hist[k] e(k/m)`` for an integer histogram, compensated summation."""
    hist = np.asarray(hist)
    nz = np.nonzero(hist)[0]
    if len(nz) == 0:
        return 0j
    angles = 2.0 * math.pi * nz / m
    weights = hist[nz].astype(np.float64)
    re = math.fsum(weights * np.cos(angles))
    im = math.fsum(weights * np.sin(angles))
    return complex(re, im)


def mobius(n: int) -> int:
    return int(sympy.mobius(n))


def euler_phi(n: int) -> int:
    return int(sympy.totient(n))


def mobius_sieve(n: int) -> np.ndarray:
    """``mu[0..n]`` as an int8 array (``mu[0] = 0``)."""
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    is_comp = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
    return mu


def omega_split(q: int, omega: int) -> tuple[int, int]:
    """Split ``q = q1 q2`` with ``gcd(q1, omega) = 1`` and ``q2 | omega^infinity``."""
    if q < 1 or omega < 1:
        raise ValueError("omega_split expects positive integers")
    q1 = q
    while (g := math.gcd(q1, omega)) > 1:
        q1 //= g
    return q1, q // q1


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    """The residue mod ``m1 m2`` congruent to ``r1`` mod ``m1`` and ``r2`` mod ``m2``."""
    if m1 == 1:
        return r2 % m2
    if m2 == 1:
        return r1 % m1
    return (r1 * m2 * pow(m2, -1, m1) + r2 * m1 * pow(m1, -1, m2)) % (m1 * m2)


# -- real Dirichlet characters ---------------------------------------------


@dataclass(frozen=True)
class RealCharacter:
    """A real Dirichlet character stored by its value table mod ``modulus``."""

    modulus: int
    values: tuple[int, ...]
    principal: bool
    label: str = ""

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]

    def table(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


def _local_real_characters(p: int, e: int) -> list[tuple[str, callable]]:
    """Real characters of ``(Z/p^e)^x`` as functions on integers coprime to ``p``."""
    trivial = ("1", lambda x: 1)
    if p == 2:
        if e == 1:
            return [trivial]
        chi_m4 = ("-4", lambda x: 1 if x % 4 == 1 else -1)
        if e == 2:
            return [trivial, chi_m4]
        chi_8 = ("8", lambda x: 1 if x % 8 in (1, 7) else -1)
        chi_m8 = ("-8", lambda x: 1 if x % 8 in (1, 3) else -1)
        return [trivial, chi_m4, chi_8, chi_m8]
    legendre = (f"({p})", lambda x, p=p: 1 if pow(x, (p - 1) // 2, p) == 1 else -1)
    return [trivial, legendre]


def real_characters(L: int) -> list[RealCharacter]:
    """All real characters mod ``L``, principal first.

    Built from the CRT decomposition of ``(Z/L)^x``: a real character is a
    product of one quadratic (or trivial) character per prime-power factor.
    """
    if L < 1:
        raise ValueError("modulus must be positive")
    locals_ = [_local_real_characters(p, e) for p, e in factorize(L)]
    units = [n for n in range(L) if math.gcd(n, L) == 1]
    out = []
    for combo in product(*locals_) if locals_ else [()]:
        values = [0] * L
        for n in units:
            v = 1
            for _, fn in combo:
                v *= fn(n)
            values[n] = v
        if L == 1:
            values = [1]
        principal = all(values[n] == 1 for n in units) if L > 1 else True
        label = "*".join(name for name, _ in combo if name != "1") or "principal"
        out.append(RealCharacter(L, tuple(values), principal, label))
    out.sort(key=lambda chi: (not chi.principal, chi.label))
    return out


def legendre_character(p: int) -> RealCharacter:
    """The Legendre symbol ``(. / p)`` as a real character mod ``p``."""
    for chi in real_characters(p):
        if not chi.principal:
            return chi
    raise ValueError(f"no non-principal real character mod {p}")


def l_one(chi: RealCharacter, terms: int = 10**6) -> tuple[float, float]:
    """``L(1, chi) = sum chi(n)/n`` for non-principal real ``chi``.

    Returns ``(value, error_bound)``. The partial sums are averaged over one
    full period past the cut, which cancels the bounded oscillation of the
    character sum; the reported bound is ``modulus / terms``.
    """
    if chi.principal:
        raise PrincipalCharacter("L(1, chi) diverges for the principal character")
    L = chi.modulus
    N = -(-terms // L) * L
    n = np.arange(1, N + L, dtype=np.int64)
    terms_arr = chi.table()[n % L] / n
    partial = np.cumsum(terms_arr)
    value = float(np.mean(partial[N - 1 : N - 1 + L]))
    return value, L / terms


def l_one_digamma(chi: RealCharacter) -> float:
    """Closed form ``-(1/L) sum_a chi(a) psi(a/L)``; an independent oracle for ``l_one``."""
    if chi.principal:
        raise PrincipalCharacter("L(1, chi) diverges for the principal character")
    L = chi.modulus
    return float(-sum(chi(a) * digamma(a / L) for a in range(1, L + 1) if chi(a)) / L)
