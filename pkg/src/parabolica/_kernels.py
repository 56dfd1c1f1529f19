"""Compiled inner loops.  Maps are polynomials z -> sum coeffs[k] z^k with
coeffs[0] == 0 and degree at most 3.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numba import njit, prange

FAIL = np.nan + 0j


@njit(cache=True, inline="always")
def _f(c, z):
    return ((c[3] * z + c[2]) * z + c[1]) * z


@njit(cache=True, inline="always")
def _df(c, z):
    return (3.0 * c[3] * z + 2.0 * c[2]) * z + c[1]


@njit(cache=True, inline="always")
def _horner(s, z):
    acc = 0j
    for k in range(s.shape[0] - 1, -1, -1):
        acc = acc * z + s[k]
    return acc


@njit(cache=True, inline="always")
def _dhorner(s, z):
    acc = 0j
    for k in range(s.shape[0] - 1, 0, -1):
        acc = acc * z + k * s[k]
    return acc


@njit(cache=True)
def fatou_values(c, hinv, A, beta, c1, q, steps, escape, zs):
    """Extended Fatou coordinate, its derivative and the direction of arrival.

    E(z) = u - beta log u + c1/u - steps/q evaluated after ``steps`` single
    steps, where u = -1/(q A zeta^q) and zeta = hinv(z_steps).
    """
    n = zs.shape[0]
    E = np.empty(n, dtype=np.complex128)
    dE = np.empty(n, dtype=np.complex128)
    zeta_out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        z = zs[i]
        dz = 1.0 + 0j
        bad = False
        for _ in range(steps):
            dz *= _df(c, z)
            z = _f(c, z)
            if abs(z) > escape:
                bad = True
                break
        if bad or not (abs(z) < 1.0) or z == 0:
            E[i] = FAIL
            dE[i] = FAIL
            zeta_out[i] = FAIL
            continue
        zeta = _horner(hinv, z)
        dzeta = _dhorner(hinv, z) * dz
        zq = zeta ** q
        u = -1.0 / (q * A * zq)
        du = dzeta / (A * zq * zeta)
        if u.real < 0.25 * steps / q:
            # the orbit is still far from the petal: too slow to resolve
            E[i] = FAIL
            dE[i] = FAIL
            zeta_out[i] = FAIL
            continue
        E[i] = u - beta * cmath.log(u) + c1 / u - steps / q
        dE[i] = (1.0 - beta / u - c1 / (u * u)) * du
        zeta_out[i] = zeta
    return E, dE, zeta_out


@njit(cache=True)
def orbit_points(c, z, steps):
    out = np.empty(steps + 1, dtype=np.complex128)
    out[0] = z
    for k in range(steps):
        z = _f(c, z)
        out[k + 1] = z
    return out


@njit(cache=True)
def escape_potential(c, zs, radius, max_iter):
    """Green potential from the first iterate beyond ``radius``; 0 if bounded."""
    n = zs.shape[0]
    out = np.zeros(n)
    deg = 3.0 if c[3] != 0 else 2.0
    lead = abs(c[3]) if c[3] != 0 else abs(c[2])
    shift = math.log(lead) / (deg - 1.0)
    for i in range(n):
        z = zs[i]
        for k in range(max_iter):
            if abs(z) > radius:
                # log|phi(w)| = log|w| + shift + sum_j d^-(j+1) log|f(w_j)/(lead w_j^d)|
                g = math.log(abs(z)) + shift
                w = z
                scale = 1.0 / deg
                for _ in range(8):
                    wn = _f(c, w)
                    g += scale * math.log(abs(wn) / (lead * abs(w) ** deg))
                    w = wn
                    scale /= deg
                    if abs(w) > 1e60:
                        break
                out[i] = g / deg**k
                break
            z = _f(c, z)
    return out


@njit(cache=True)
def _classify_orbit(c, z, qA, q, v0, rmax, budget, u_entry):
    """Return (status, steps, direction) for one critical orbit.

    status 0: escaped, 1: entered a petal, 2: undecided, 3: hit the
    parabolic point itself.
    """
    for k in range(budget):
        if abs(z) > rmax:
            return 0, k, -1
        if z == 0:
            return 3, k, -1
        if abs(z) < 0.5:
            u = -1.0 / (qA * z ** q)
            if u.real > u_entry and abs(u.imag) < u.real:
                return 1, k, _direction(z, q, v0)
        z = _f(c, z)
    return 2, budget, -1


@njit(cache=True, inline="always")
def _direction(z, q, v0):
    # index of the nearest attracting direction v0 * exp(2 pi i j / q)
    ang = cmath.phase(z / v0)
    return int(round(ang * q / (2 * math.pi))) % q


@njit(cache=True)
def _pattern_start(c, z, steps, q, p, e_last, v0):
    """First orbit index from which eps_{n+1} = eps_n + p holds up to entry."""
    if q == 1:
        return 0
    orbit = np.empty(steps + 1, dtype=np.complex128)
    orbit[0] = z
    for k in range(steps):
        orbit[k + 1] = _f(c, orbit[k])
    start = 0
    for k in range(steps - 1, -1, -1):
        if _direction(orbit[k], q, v0) != (e_last - (steps - k) * p) % q:
            start = k + 1
            break
    return start


@njit(cache=True, parallel=True)
def classify_grid(lam, avals, As, q, p, rmin, esc_budget, par_budget, u_entry,
                  dp_vals, dp_radius, dp_tol):
    """Per-parameter class codes for rendering.

    Codes: 0 exterior, 1 adjacent, 1+m bitransitive(m) for 1 <= m < q,
    q+1 capture, q+2 double-parabolic-near, q+3 undecided, q+4 a critical
    orbit lands exactly on 0.
    """
    n = avals.shape[0]
    s3 = cmath.sqrt(3.0 * lam)
    codes = np.empty(n, dtype=np.int32)
    info = np.zeros(n, dtype=np.int32)
    budget = esc_budget + par_budget
    for i in prange(n):
        a = avals[i]
        cc = np.zeros(4, dtype=np.complex128)
        cc[1] = lam
        cc[2] = a
        cc[3] = 1.0
        rmax = max(rmin, abs(a) + 2.0)
        A = As[i]
        near = False
        for j in range(dp_vals.shape[0]):
            if abs(a - dp_vals[j]) < dp_radius * (1.0 + abs(dp_vals[j])):
                near = True
        if near and abs(A) < dp_tol:
            codes[i] = q + 2
            continue
        if a == 0:
            r = cmath.sqrt(-3.0 * lam)
        else:
            r = a * cmath.sqrt(1.0 - 3.0 * lam / (a * a))
        cp = (-a + r) / 3.0
        cm = (-a - r) / 3.0
        if A == 0:
            codes[i] = q + 2 if near else q + 3
            continue
        qA = q * A
        v0 = (-1.0 / qA) ** (1.0 / q)
        v0 = v0 / abs(v0)
        s1, k1, d1 = _classify_orbit(cc, cp, qA, q, v0, rmax, budget, u_entry)
        s2, k2, d2 = _classify_orbit(cc, cm, qA, q, v0, rmax, budget, u_entry)
        if s1 == 0 or s2 == 0:
            codes[i] = 0
            info[i] = k1 if s1 == 0 else k2
            continue
        if s1 == 3 or s2 == 3:
            codes[i] = q + 4
            info[i] = k1 if s1 == 3 else k2
            continue
        if s1 == 2 or s2 == 2:
            codes[i] = q + 2 if near else q + 3
            continue
        t1 = _pattern_start(cc, cp, k1, q, p, d1, v0)
        t2 = _pattern_start(cc, cm, k2, q, p, d2, v0)
        if t1 > 0 or t2 > 0:
            codes[i] = q + 1
            info[i] = max(t1, t2)
            continue
        e1 = (d1 - k1 * p) % q
        e2 = (d2 - k2 * p) % q
        m = (e2 - e1) % q
        # c+ and c- trade places across the cut of the odd root; the half
        # plane bounded by the line through sqrt(3 lam) restores the portrait
        if m != 0 and (a * np.conj(s3)).imag < 0:
            m = q - m
        codes[i] = 1 + m
    return codes, info


@njit(cache=True)
def _mul_trunc(a, b, n):
    out = np.zeros(n + 1, dtype=np.complex128)
    for i in range(n + 1):
        if a[i] == 0:
            continue
        for j in range(n + 1 - i):
            out[i + j] += a[i] * b[j]
    return out


@njit(cache=True)
def series_compose_k(outer, inner, n):
    res = np.zeros(n + 1, dtype=np.complex128)
    res[0] = outer[0]
    power = np.zeros(n + 1, dtype=np.complex128)
    power[0] = 1.0
    for k in range(1, n + 1):
        power = _mul_trunc(power, inner, n)
        if outer[k] != 0:
            for j in range(n + 1):
                res[j] += outer[k] * power[j]
    return res


@njit(cache=True)
def series_inverse_k(f, n):
    g = np.zeros(n + 1, dtype=np.complex128)
    g[1] = 1.0 / f[1]
    for _ in range(n):
        err = series_compose_k(f, g, n)
        err[1] -= 1.0
        for j in range(n + 1):
            g[j] -= err[j] / f[1]
    return g


@njit(cache=True)
def normal_form_kernel(coeffs, lam, q, order):
    """(H, H^-1, g, g^q): z = H(zeta) conjugates f to g, which keeps only the
    terms zeta^k with k = 1 mod q through ``order``."""
    g = np.zeros(order + 1, dtype=np.complex128)
    for k in range(min(coeffs.shape[0], order + 1)):
        g[k] = coeffs[k]
    H = np.zeros(order + 1, dtype=np.complex128)
    H[1] = 1.0
    if q > 1:
        for k in range(2, order + 1):
            if k % q == 1 or g[k] == 0:
                continue
            d = g[k] / (lam**k - lam)
            h = np.zeros(order + 1, dtype=np.complex128)
            h[1] = 1.0
            h[k] = d
            g = series_compose_k(series_inverse_k(h, order), series_compose_k(g, h, order), order)
            H = series_compose_k(H, h, order)
    gq = g.copy()
    for _ in range(q - 1):
        gq = series_compose_k(g, gq, order)
    return H, series_inverse_k(H, order), g, gq
