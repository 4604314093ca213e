"""Compiled inner loops (numba). Everything here works on int64 arrays.

The Python-facing modules validate inputs and keep all magnitudes well inside
int64; these kernels assume that has been done.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _pmod(x, m):
    r = x % m
    return r + m if r < 0 else r


@njit(cache=True, inline="always")
def _feval(co, x1, x2, x3):
    return (co[0] * x1 * x1 + co[1] * x2 * x2 + co[2] * x3 * x3
            + co[3] * x1 * x2 + co[4] * x1 * x3 + co[5] * x2 * x3)


@njit(cache=True)
def _inv_mod(a, m):
    # extended Euclid; a is a unit mod m
    t, new_t, r, new_r = 0, 1, m, _pmod(a, m)
    while new_r != 0:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    return _pmod(t, m)


# -- solutions mod prime powers ------------------------------------------


@njit(cache=True)
def solutions_mod_p(co, p, nonzero):
    """All x in (Z/p)^3 with F(x) = 0 mod p (optionally excluding x = 0)."""
    count = 0
    for a in range(p):
        for b in range(p):
            for c in range(p):
                if _pmod(_feval(co, a, b, c), p) == 0:
                    if nonzero and a == 0 and b == 0 and c == 0:
                        continue
                    count += 1
    out = np.empty((count, 3), np.int64)
    i = 0
    for a in range(p):
        for b in range(p):
            for c in range(p):
                if _pmod(_feval(co, a, b, c), p) == 0:
                    if nonzero and a == 0 and b == 0 and c == 0:
                        continue
                    out[i, 0] = a
                    out[i, 1] = b
                    out[i, 2] = c
                    i += 1
    return out


@njit(cache=True)
def _lift_data(co, g2, beta, p, pj):
    fb = _feval(co, beta[0], beta[1], beta[2])
    t = _pmod(fb // pj, p)
    g0 = _pmod(g2[0, 0] * beta[0] + g2[0, 1] * beta[1] + g2[0, 2] * beta[2], p)
    g1 = _pmod(g2[1, 0] * beta[0] + g2[1, 1] * beta[1] + g2[1, 2] * beta[2], p)
    gg = _pmod(g2[2, 0] * beta[0] + g2[2, 1] * beta[1] + g2[2, 2] * beta[2], p)
    return t, g0, g1, gg


@njit(cache=True, inline="always")
def _pivot(g0, g1, g2):
    # pivot coordinate with nonzero gradient, then the other two in cyclic order
    if g0 != 0:
        return 0, g0, g1, g2
    if g1 != 0:
        return 1, g1, g2, g0
    return 2, g2, g0, g1


@njit(cache=True, inline="always")
def _place(piv, dp, u, v):
    if piv == 0:
        return dp, u, v
    if piv == 1:
        return v, dp, u
    return u, v, dp


@njit(cache=True)
def lift_solutions(sols, co, g2, p, j):
    """Lift all solutions mod p^j (j >= 1) to solutions mod p^(j+1).

    Uses F(b + p^j d) = F(b) + p^j (A b).d mod p^(j+1), valid for j >= 1,
    which makes the lifting condition linear in d mod p.
    """
    pj = p ** j
    n = sols.shape[0]
    counts = np.empty(n, np.int64)
    total = 0
    for i in range(n):
        t, g0, g1, gg = _lift_data(co, g2, sols[i], p, pj)
        if g0 == 0 and g1 == 0 and gg == 0:
            counts[i] = p * p * p if t == 0 else 0
        else:
            counts[i] = p * p
        total += counts[i]
    out = np.empty((total, 3), np.int64)
    k = 0
    for i in range(n):
        if counts[i] == 0:
            continue
        b0, b1, b2 = sols[i, 0], sols[i, 1], sols[i, 2]
        t, g0, g1, gg = _lift_data(co, g2, sols[i], p, pj)
        if g0 == 0 and g1 == 0 and gg == 0:
            for d0 in range(p):
                for d1 in range(p):
                    for d2 in range(p):
                        out[k, 0] = b0 + pj * d0
                        out[k, 1] = b1 + pj * d1
                        out[k, 2] = b2 + pj * d2
                        k += 1
            continue
        piv, gp, ga, gb = _pivot(g0, g1, gg)
        inv = _inv_mod(gp, p)
        for u in range(p):
            for v in range(p):
                dp = _pmod(-(t + ga * u + gb * v) * inv, p)
                d0, d1, d2 = _place(piv, dp, u, v)
                out[k, 0] = b0 + pj * d0
                out[k, 1] = b1 + pj * d1
                out[k, 2] = b2 + pj * d2
                k += 1
    return out


@njit(cache=True)
def lift_phase_hist(sols, co, g2, p, j, cs, M):
    """Histogram of c.x mod M over the lifts to p^(j+1) of the solutions mod p^j.

    Fuses the last lifting step with the phase histogram so the final (largest)
    solution set is never materialised. ``cs`` has shape (nc, 3).
    """
    pj = p ** j
    nc = cs.shape[0]
    hist = np.zeros((nc, M), np.int64)
    n = sols.shape[0]
    for i in range(n):
        b0, b1, b2 = sols[i, 0], sols[i, 1], sols[i, 2]
        t, g0, g1, gg = _lift_data(co, g2, sols[i], p, pj)
        if g0 == 0 and g1 == 0 and gg == 0:
            if t != 0:
                continue
            for d0 in range(p):
                for d1 in range(p):
                    for d2 in range(p):
                        x0 = b0 + pj * d0
                        x1 = b1 + pj * d1
                        x2 = b2 + pj * d2
                        for ci in range(nc):
                            hist[ci, _pmod(cs[ci, 0] * x0 + cs[ci, 1] * x1 + cs[ci, 2] * x2, M)] += 1
            continue
        piv, gp, ga, gb = _pivot(g0, g1, gg)
        inv = _inv_mod(gp, p)
        for u in range(p):
            for v in range(p):
                dp = _pmod(-(t + ga * u + gb * v) * inv, p)
                d0, d1, d2 = _place(piv, dp, u, v)
                x0 = b0 + pj * d0
                x1 = b1 + pj * d1
                x2 = b2 + pj * d2
                for ci in range(nc):
                    hist[ci, _pmod(cs[ci, 0] * x0 + cs[ci, 1] * x1 + cs[ci, 2] * x2, M)] += 1
    return hist


# -- exhaustive counting -----------------------------------------------------


@njit(cache=True)
def count_exhaustive(co, m, gamma, Lc, prim_primes):
    """#{x mod m : F(x) = 0 mod m, x = gamma mod Lc, p does not divide x for p in prim_primes}."""
    count = 0
    np_ = prim_primes.shape[0]
    for a in range(m):
        if _pmod(a - gamma[0], Lc) != 0:
            continue
        for b in range(m):
            if _pmod(b - gamma[1], Lc) != 0:
                continue
            for c in range(m):
                if _pmod(c - gamma[2], Lc) != 0:
                    continue
                if _pmod(_feval(co, a, b, c), m) != 0:
                    continue
                ok = True
                for i in range(np_):
                    p = prim_primes[i]
                    if a % p == 0 and b % p == 0 and c % p == 0:
                        ok = False
                        break
                if ok:
                    count += 1
    return count


# -- literal exponential sums ----------------------------------------------


@njit(cache=True)
def direct_sum_hist(co, q, L, lam, cs):
    """Joint histogram for the literal complete sums.

    Runs over sigma in (Z/qL)^3, y = L sigma + lam, keeps L^2 | F(y) and
    records H[ci, n, k] with n = F(y)/L^2 mod q and k = c.sigma mod qL.
    """
    M = q * L
    L2 = L * L
    nc = cs.shape[0]
    H = np.zeros((nc, q, M), np.int64)
    for s1 in range(M):
        y1 = L * s1 + lam[0]
        for s2 in range(M):
            y2 = L * s2 + lam[1]
            for s3 in range(M):
                y3 = L * s3 + lam[2]
                fy = _feval(co, y1, y2, y3)
                if fy % L2 != 0:
                    continue
                n = _pmod(fy // L2, q)
                for ci in range(nc):
                    k = _pmod(cs[ci, 0] * s1 + cs[ci, 1] * s2 + cs[ci, 2] * s3, M)
                    H[ci, n, k] += 1
    return H


# -- lattice points on the cone --------------------------------------------


@njit(cache=True, inline="always")
def _put(out, n, x1, x2, x3):
    if n < out.shape[0]:
        out[n, 0] = x1
        out[n, 1] = x2
        out[n, 2] = x3
    return n + 1


# bit r is set iff r is a square mod 64
_SQUARE_MASK64 = 0x0202021202030213


@njit(cache=True, nogil=True)
def cone_points(co, x1_lo, x1_hi, step1, res1, x2_lo, x2_hi, step2, res2, x3_lo, x3_hi, out):
    """Integer solutions of F = 0 with x1 in [x1_lo, x1_hi], per-x1 x2 windows.

    ``x2_lo``/``x2_hi`` are arrays indexed by x1 - x1_lo. Only x1 = res1 mod step1
    and x2 = res2 mod step2 are visited. x3 is solved exactly from the quadratic
    (or linear) equation and kept if it lies in [x3_lo, x3_hi]. The caller keeps
    the discriminant below 2^62.

    Solutions are written to ``out`` (shape (cap, 3)); the return value is the
    total number found, which exceeds cap when ``out`` was too small.
    """
    a, b, c, d, e, f = co[0], co[1], co[2], co[3], co[4], co[5]
    n = 0
    den = 2 * c
    x1 = x1_lo + _pmod(res1 - x1_lo, step1)
    while x1 <= x1_hi:
        i = x1 - x1_lo
        lo = x2_lo[i]
        hi = x2_hi[i]
        x2 = lo + _pmod(res2 - lo, step2)
        while x2 <= hi:
            beta = e * x1 + f * x2
            gam = a * x1 * x1 + b * x2 * x2 + d * x1 * x2
            if c != 0:
                D = beta * beta - 4 * c * gam
                if D >= 0 and (_SQUARE_MASK64 >> (D & 63)) & 1:
                    r = np.int64(math.sqrt(float(D)))
                    while r * r > D:
                        r -= 1
                    while (r + 1) * (r + 1) <= D:
                        r += 1
                    if r * r == D:
                        num = -beta + r
                        if num % den == 0:
                            x3 = num // den
                            if x3_lo <= x3 <= x3_hi:
                                n = _put(out, n, x1, x2, x3)
                        if r != 0:
                            num = -beta - r
                            if num % den == 0:
                                x3 = num // den
                                if x3_lo <= x3 <= x3_hi:
                                    n = _put(out, n, x1, x2, x3)
            elif beta != 0:
                if gam % beta == 0:
                    x3 = -gam // beta
                    if x3_lo <= x3 <= x3_hi:
                        n = _put(out, n, x1, x2, x3)
            elif gam == 0:
                for x3 in range(x3_lo, x3_hi + 1):
                    n = _put(out, n, x1, x2, x3)
            x2 += step2
        x1 += step1
    return n
