"""Böttcher coordinates, external rays, attracting Fatou coordinates and basin
addresses for the cubic family and its quadratic model.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .algebra import TruncatedSeries
from .angles import angle, doubling_cycle, fmt, theta_m
from .dynamics import Slice, critical_pair, f_a

TWO_PI = 2 * math.pi


# -- polynomial maps ----------------------------------------------------------

@dataclass(frozen=True)
class PolyMap:
    """Monic polynomial of degree 2 or 3 fixing 0: coeffs ascending, length 4."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.zeros(4, dtype=complex)
        src = np.asarray(self.coeffs, dtype=complex)
        c[: len(src)] = src
        if c[0] != 0:
            raise ValueError("map must fix 0")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def cubic(cls, lam: complex, a: complex) -> "PolyMap":
        return cls(np.array([0, lam, a, 1], dtype=complex))

    @classmethod
    def model(cls, lam: complex) -> "PolyMap":
        return cls(np.array([0, lam, 1, 0], dtype=complex))

    @property
    def degree(self) -> int:
        return 3 if self.coeffs[3] != 0 else 2

    @property
    def lam(self) -> complex:
        return complex(self.coeffs[1])

    def __call__(self, z):
        c = self.coeffs
        return ((c[3] * z + c[2]) * z + c[1]) * z

    def deriv(self, z):
        c = self.coeffs
        return (3 * c[3] * z + 2 * c[2]) * z + c[1]

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def critical_points(self) -> tuple[complex, ...]:
        c = self.coeffs
        if self.degree == 2:
            return (complex(-c[1] / (2 * c[2])),)
        cp, cm = critical_pair(complex(c[1]), complex(c[2]))
        return (complex(cp), complex(cm))

    def escape_radius(self) -> float:
        return 2.0 + float(np.abs(self.coeffs[1:]).sum())


def _map_of(sl_or_map, a=None) -> PolyMap:
    if isinstance(sl_or_map, PolyMap):
        return sl_or_map
    if isinstance(sl_or_map, Slice):
        return PolyMap.cubic(sl_or_map.lam, a)
    return PolyMap.cubic(complex(sl_or_map), a)


# -- Böttcher coordinate and Green potential --------------------------------

def _log_phi(fm: PolyMap, z: complex, dz: complex, n: int, wrt_a: bool = False):
    with np.errstate(over="ignore", invalid="ignore"):
        return _log_phi_raw(fm, z, dz, n, wrt_a)


def _log_phi_raw(fm: PolyMap, z: complex, dz: complex, n: int, wrt_a: bool):
    """log phi(f^n(z)) and its derivative, by the product formula at f^n(z).

    ``dz`` seeds forward-mode differentiation; with ``wrt_a`` the variable is
    the z^2 coefficient of the map.
    """
    c = fm.coeffs
    d = fm.degree
    for _ in range(n):
        nz = ((c[3] * z + c[2]) * z + c[1]) * z
        dz = ((3 * c[3] * z + 2 * c[2]) * z + c[1]) * dz + (z * z if wrt_a else 0)
        z = nz
        if not math.isfinite(abs(z)) or abs(z) > 1e150:
            return complex("nan"), complex("nan")
    L = cmath.log(z)
    dL = dz / z
    w, dw = z, dz
    scale = 1.0 / d
    for _ in range(60):
        fw = ((c[3] * w + c[2]) * w + c[1]) * w
        dfw = ((3 * c[3] * w + 2 * c[2]) * w + c[1]) * dw + (w * w if wrt_a else 0)
        wd = w**d
        r = fw / wd
        dr = dfw / wd - d * r * dw / w
        step = scale * cmath.log(r)
        L += step
        dL += scale * dr / r
        if abs(step) < 1e-18 or abs(fw) > 1e60:
            break
        w, dw = fw, dfw
        scale /= d
    return L, dL


@dataclass(frozen=True)
class BoettcherMap:
    fmap: PolyMap
    r_out: float = 0.0

    def __post_init__(self):
        if not self.r_out:
            c = self.fmap.coeffs
            object.__setattr__(self, "r_out", float(max(1e3, 100 * (1 + abs(c[1]) + abs(c[2])))))

    @classmethod
    def of(cls, sl_or_lam, a: complex = 0.0) -> "BoettcherMap":
        return cls(_map_of(sl_or_lam, a))

    def __call__(self, z: complex, budget: int = 200) -> complex:
        """phi(z) for escaping z; the root branch is fixed by phi(w) ~ w + a/3
        at each orbit point, walking back from the first iterate beyond r_out.
        """
        fm = self.fmap
        z = complex(z)
        orbit = [z]
        while abs(orbit[-1]) <= self.r_out:
            if len(orbit) > budget:
                raise ValueError("point does not escape within budget")
            orbit.append(complex(fm(orbit[-1])))
        L, _ = _log_phi(fm, orbit[-1], 1.0, 0)
        phi = cmath.exp(L)
        d = fm.degree
        shift = fm.coeffs[2] / 3 if d == 3 else fm.coeffs[1] / 2
        for w in reversed(orbit[:-1]):
            base = phi ** (1.0 / d)
            roots = [base * cmath.exp(2j * math.pi * k / d) for k in range(d)]
            phi = min(roots, key=lambda r: abs(r - (w + shift)))
        return phi

    def residual(self, z: complex) -> float:
        """Relative error of phi(f(z)) = phi(z)^d."""
        p0 = self(z)
        p1 = self(self.fmap(z))
        d = self.fmap.degree
        return abs(p1 - p0**d) / abs(p0) ** d


def boettcher_eval(bmap: BoettcherMap, z: complex) -> complex:
    return bmap(z)


def green_potential(fm_or_slice, z, a: complex | None = None, *, max_iter: int = 500):
    fm = _map_of(fm_or_slice, a)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    out = K.escape_potential(fm.coeffs, zs, 1e8, max_iter)
    return out if np.ndim(z) else float(out[0])


# -- external rays -------------------------------------------------------------

LANDED, CRASHED, BUDGET, REACHED = "Landed", "Crashed", "BudgetExceeded", "Reached"


@dataclass(frozen=True)
class RayTrace:
    plane: str
    angle: Fraction
    points: np.ndarray
    potentials: np.ndarray
    status: str
    endpoint: complex
    sector: int | None = None
    note: str = ""

    def to_rows(self):
        return [(float(g), float(z.real), float(z.imag))
                for g, z in zip(self.potentials, self.points)]

    def to_json(self) -> dict:
        return {
            "plane": self.plane,
            "angle": fmt(self.angle),
            "status": self.status,
            "endpoint": [self.endpoint.real, self.endpoint.imag],
            "sector": self.sector,
            "samples": [[g, x, y] for g, x, y in self.to_rows()],
        }


def _levels(fm: PolyMap, G: float, extra: float = 0.0) -> int:
    d = fm.degree
    c = fm.coeffs
    L0 = max(7.0, math.log(100 * (1 + abs(c[1]) + abs(c[2]) + extra)))
    if G >= L0:
        return 0
    return int(math.ceil(math.log(L0 / G) / math.log(d)))


def _target(t: Fraction, G: float, d: int, n: int) -> tuple[float, float]:
    frac = angle(t * d**n)
    return d**n * G, TWO_PI * float(frac)


def _wrap(x: float) -> float:
    return (x + math.pi) % TWO_PI - math.pi


class _Solver:
    """Newton correction onto {log phi = G + 2 pi i t} in one of the planes."""

    def __init__(self, plane: str, t: Fraction, fm: PolyMap | None = None,
                 lam: complex | None = None):
        self.plane = plane
        self.t = t
        self.fm = fm
        self.lam = lam
        self.cm = None  # tracked free critical point for the parameter plane

    def _eval(self, x: complex, n: int):
        if self.plane == "dynamical":
            return _log_phi(self.fm, x, 1.0, n)
        fm = PolyMap.cubic(self.lam, x)
        cp, cm = critical_pair(self.lam, x)
        cp, cm = complex(cp), complex(cm)
        if self.cm is not None and abs(cp - self.cm) < abs(cm - self.cm):
            cp, cm = cm, cp
        v = complex(fm(cm))
        return _log_phi(fm, v, cm * cm, n, wrt_a=True) + (cm,)

    def solve(self, x: complex, G: float, max_iter: int = 60):
        fm = self.fm if self.plane == "dynamical" else PolyMap.cubic(self.lam, x)
        n = _levels(fm, G, abs(x) if self.plane == "parameter" else 0.0)
        re_t, im_t = _target(self.t, G, fm.degree, n)
        scale = max(1.0, re_t)
        for _ in range(max_iter):
            out = self._eval(x, n)
            L, dL = out[0], out[1]
            if not (cmath.isfinite(L) and cmath.isfinite(dL)) or dL == 0:
                return None
            h = complex(L.real - re_t, _wrap(L.imag - im_t))
            step = h / dL
            x = x - step
            if abs(h) < 1e-12 * scale or abs(step) < 1e-14 * (1 + abs(x)):
                if self.plane == "parameter":
                    self.cm = self._eval(x, n)[2]
                return x
        return None


def _trace(solver: _Solver, x0: complex, plane: str, t: Fraction, target: float,
           start: float = 8.0, substeps: int = 8, max_samples: int = 400,
           max_refine: int = 12, sector: int | None = None) -> RayTrace:
    x = solver.solve(x0, start)
    if x is None:
        return RayTrace(plane, t, np.array([x0]), np.array([start]), CRASHED, x0, sector,
                        "initial Newton correction failed")
    pts, pots = [x], [start]
    G = start
    status = REACHED
    note = ""
    while G / 2 >= target * (1 - 1e-12):
        Gn = G / 2
        k = substeps
        saved_cm = solver.cm
        while True:
            y, ok = x, True
            for j in range(1, k + 1):
                y = solver.solve(y, G * (Gn / G) ** (j / k))
                if y is None:
                    ok = False
                    break
            if ok:
                break
            solver.cm = saved_cm
            k *= 2
            if k > substeps * 2**max_refine:
                break
        if not ok:
            status, note = CRASHED, f"Newton continuation failed below potential {G:.3g}"
            break
        x, G = y, Gn
        pts.append(x)
        pots.append(G)
        if len(pts) >= max_samples:
            status = BUDGET
            break
    pts_a = np.array(pts)
    if status == REACHED and len(pts) > 21:
        steps = np.abs(np.diff(pts_a[-21:]))
        if steps[-1] < 1e-6 and np.all(np.diff(steps) <= 1e-15):
            status = LANDED
    return RayTrace(plane, t, pts_a, np.array(pots), status, complex(pts_a[-1]), sector, note)


def trace_dynamical_ray(fm_or_slice, a, t, target_potential: float, **kw) -> RayTrace:
    fm = _map_of(fm_or_slice, a)
    t = angle(t)
    d = fm.degree
    G0 = kw.pop("start", 8.0)
    shift = fm.coeffs[2] / 3 if d == 3 else fm.coeffs[1] / 2
    x0 = cmath.exp(G0 + TWO_PI * 1j * float(t)) - shift
    return _trace(_Solver("dynamical", t, fm=fm), x0, "dynamical", t, target_potential,
                  start=G0, **kw)


def parameter_seeds(lam: complex, t, G: float) -> list[complex]:
    """a with Phi(a) ~ 4 a^3 / 27 = exp(G + 2 pi i t): the three branches."""
    t = angle(t)
    r = (27 * math.exp(G) / 4) ** (1 / 3)
    return [r * cmath.exp(TWO_PI * 1j * float((t + j) / 3)) for j in range(3)]


def trace_parameter_ray(sl: Slice, t, target_potential: float, sector: int = 0,
                        **kw) -> RayTrace:
    t = angle(t)
    G0 = kw.pop("start", 8.0)
    x0 = parameter_seeds(sl.lam, t, G0)[sector % 3]
    solver = _Solver("parameter", t, lam=sl.lam)
    return _trace(solver, x0, "parameter", t, target_potential, start=G0, sector=sector, **kw)


def extrapolate_landing(trace: RayTrace, below: float = 1e-20) -> complex:
    """Landing estimate for a ray whose distance to its endpoint decays like
    1/sqrt(log(1/G)), as at double parabolic parameters.

    Fits a quadratic in x = log(1/G)^(-1/2) to the samples with G < ``below``
    and returns its value at x = 0. Trace to a very small potential first
    (1e-200 works); at G = 1e-5 such rays are still ~0.1-0.4 away.
    """
    sel = trace.potentials < below
    if np.count_nonzero(sel) < 4:
        raise ValueError("too few samples below the fitting potential")
    x = 1 / np.sqrt(np.log(1 / trace.potentials[sel]))
    V = np.vander(x, 3, increasing=True)
    coef = np.linalg.lstsq(V, trace.points[sel], rcond=None)[0]
    return complex(coef[0])


def parameter_phi(sl: Slice, a: complex, G_hint: float = 1.0) -> complex:
    """Phi(a) = phi_a(v_-(a)) for a with escaping free critical value."""
    fm = PolyMap.cubic(sl.lam, a)
    _, cm = critical_pair(sl.lam, a)
    v = complex(fm(complex(cm)))
    return BoettcherMap(fm)(v)


# -- landing at the parabolic point --------------------------------------------

def _pullback(fm: PolyMap, y: complex, q: int, x0: complex, iters: int = 50) -> complex | None:
    x = x0
    for _ in range(iters):
        w, dw = x, 1.0 + 0j
        for _ in range(q):
            dw = fm.deriv(w) * dw
            w = fm(w)
        if dw == 0:
            return None
        step = (w - y) / dw
        x -= step
        if abs(step) < 1e-15 * (1 + abs(x)):
            return x
    return x


def landing_point(fm: PolyMap, t, q: int, *, potential: float = 1e-10,
                  pullbacks: int = 2000) -> tuple[complex, bool]:
    """Follow the q-periodic ray t down, then pull back along it.

    Returns (estimate, repelling).  A repelling landing point is reached
    geometrically; at a parabolic point the pullbacks creep towards it.
    """
    ray = trace_dynamical_ray(fm, None, t, potential)
    x = ray.endpoint
    prev = x
    for _ in range(pullbacks):
        nx = _pullback(fm, x, q, x)
        if nx is None:
            break
        prev, x = x, nx
    w = x
    for _ in range(q):
        w = fm(w)
    repelling = abs(x - prev) < 1e-11 and abs(w - x) < 1e-10 and abs(x) > 1e-3
    return x, repelling


def lands_at_zero(sl: Slice, a: complex, t, **kw) -> bool:
    fm = PolyMap.cubic(sl.lam, a)
    x, repelling = landing_point(fm, t, sl.q, **kw)
    return not repelling and abs(x) < 0.75


@lru_cache(maxsize=256)
def portrait_index(sl: Slice, a: complex) -> tuple[int, ...]:
    """Indices m of the cycles Theta_m whose rays land at 0."""
    return tuple(m for m in range(sl.q + 1)
                 if lands_at_zero(sl, a, theta_m(sl.p, sl.q, m).angles[0]))


# -- attracting Fatou coordinates ------------------------------------------------

PETAL_U = 32.0


def _normal_form(fm: PolyMap, q: int, order: int):
    """Remove the non-resonant terms z^k, k != 1 mod q, through ``order``.

    Returns (H, g): z = H(zeta) conjugates f to the truncated normal form g.
    """
    H, _, g, _ = K.normal_form_kernel(np.asarray(fm.coeffs, dtype=complex),
                                      complex(fm.lam), q, order)
    return TruncatedSeries(H, order), TruncatedSeries(g, order)


class FatouChart:
    """Attracting Fatou coordinate E with E(f(z)) = E(z) + 1/q.

    E is normalised to vanish at ``reference`` (by default the critical point
    of largest Re E), and directions of arrival are labelled so that the
    reference arrives in direction 0; f adds p to the label.
    """

    def __init__(self, fmap: PolyMap, q: int, *, steps: int | None = None,
                 reference: complex | None = None):
        self.fmap = fmap
        self.q = q
        lam = fmap.lam
        self.p = round(q * cmath.phase(lam) / TWO_PI) % q if q > 1 else 0
        order = 4 * q + 1
        H, Hinv, _, gq = K.normal_form_kernel(np.asarray(fmap.coeffs, dtype=complex),
                                              complex(lam), q, order)
        self.A = complex(gq[q + 1])
        if abs(self.A) < 1e-12:
            raise ValueError("degenerate parabolic point: A vanishes")
        self.B = complex(gq[2 * q + 1])
        self.beta = (q + 1) / (2 * q) - self.B / (q * self.A**2)
        # next term of the asymptotic expansion: with u -> u + 1 + beta/u + gamma/u^2
        # the chart u - beta log u + c1/u is exact to O(u^-2) for c1 = gamma - beta (beta - 1/2)
        A, B, C = self.A, self.B, complex(gq[3 * q + 1])
        p3 = -q * C + q * (q + 1) * A * B - q * (q + 1) * (q + 2) * A**3 / 6
        gamma = -p3 / (q * A) ** 3
        self.c1 = gamma - self.beta * (self.beta - 0.5)
        self.hser = H
        self.hinv = Hinv
        v0 = (-1 / (q * self.A)) ** (1 / q)
        self.v0 = v0 / abs(v0)
        self.steps = steps if steps is not None else 10**4 * q
        self.escape = 10 * fmap.escape_radius()
        self.offset = 0j
        self.anchor = 0
        if reference is None:
            crit = [c for c in fmap.critical_points() if math.isfinite(self._raw1(c)[0].real)]
            if not crit:
                raise ValueError("no critical point in the parabolic basin")
            reference = max(crit, key=lambda c: self._raw1(c)[0].real)
        self.reference = complex(reference)
        E0, _, d0 = self._raw1(self.reference)
        if not math.isfinite(E0.real):
            raise ValueError("reference point is not in the parabolic basin")
        self.offset, self.anchor = E0, d0

    # raw evaluation
    def _raw(self, zs, steps=None):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        E, dE, zeta = K.fatou_values(self.fmap.coeffs, self.hinv, self.A, self.beta, self.c1,
                                     self.q, steps or self.steps, self.escape, zs)
        with np.errstate(invalid="ignore"):
            d = np.rint(self.q * np.angle(zeta / self.v0) / TWO_PI)
        d = np.where(np.isfinite(d), d, -1).astype(int) % max(self.q, 1)
        return E, dE, d

    def _raw1(self, z):
        E, dE, d = self._raw(z)
        return complex(E[0]), complex(dE[0]), int(d[0])

    def evaluate(self, z, steps: int | None = None):
        """(E, dE/dz, label) for an array of points; NaN outside the basin.

        Fewer ``steps`` give a cheaper value good to roughly steps^-2.
        """
        E, dE, d = self._raw(z, steps)
        return E - self.offset, dE, (d - self.anchor) % self.q

    def __call__(self, z):
        E = self.evaluate(z)[0]
        return E if np.ndim(z) else complex(E[0])

    def label(self, z) -> int:
        return int(self.evaluate(z)[2][0])

    def abel_residual(self, z) -> float:
        w = self.fmap.iterate(complex(z), self.q)
        return abs(self(w) - self(z) - 1)

    # petal-region model: u-coordinate of the normal form
    def u_of(self, z):
        zeta = np.polynomial.polynomial.polyval(z, self.hinv)
        return -1 / (self.q * self.A * zeta**self.q)

    def in_entry_region(self, z) -> bool:
        if abs(z) > 0.5:
            return False
        u = self.u_of(z)
        if not (u.real > PETAL_U and abs(u.imag) < u.real):
            return False
        # the return map is u -> u + 1 + O(1/u) wherever the truncated
        # conjugacy is still trustworthy
        u1 = self.u_of(self.fmap.iterate(complex(z), self.q))
        return abs(u1 - u - 1) < 0.25

    def _seed(self, w: complex, k: int) -> complex:
        """Asymptotic inverse: a point of label k with E close to w (Re w large)."""
        target = w + self.offset
        u = target
        for _ in range(50):
            step = ((u - self.beta * cmath.log(u) + self.c1 / u - target)
                    / (1 - self.beta / u - self.c1 / (u * u)))
            u -= step
            if abs(step) < 1e-15 * abs(u):
                break
        zq = -1 / (self.q * self.A * u)
        r = zq ** (1 / self.q)
        want = self.v0 * cmath.exp(TWO_PI * 1j * ((self.anchor + k) % self.q) / self.q)
        roots = [r * cmath.exp(TWO_PI * 1j * j / self.q) for j in range(self.q)]
        zeta = min(roots, key=lambda x: abs(x / abs(x) - want))
        return complex(np.polynomial.polynomial.polyval(zeta, self.hser))

    def _newton(self, z: complex, w: complex, k: int, iters: int = 16,
                steps: int | None = None):
        # E carries ~1e-10 of rounding from the long orbit; coarse charts more
        tol = 1e-9 if steps is None else 1e-7
        for _ in range(iters):
            E, dE, lab = self.evaluate(z, steps)
            E, dE = complex(E[0]), complex(dE[0])
            if not (cmath.isfinite(E) and dE != 0) or int(lab[0]) != k:
                return None
            step = (E - w) / dE
            z = z - step
            if abs(step) < tol * (1 + abs(z)):
                E, dE, _ = self.evaluate(z, steps)
                return z - complex(E[0] - w) / complex(dE[0])
        return None

    def _newton_double(self, z: complex, w: complex, k: int, iters: int = 40,
                       steps: int | None = None):
        tol = 1e-9 if steps is None else 1e-7
        for _ in range(iters):
            E, dE, lab = self.evaluate(z, steps)
            E, dE = complex(E[0]), complex(dE[0])
            if not (cmath.isfinite(E) and dE != 0) or int(lab[0]) != k:
                return None
            if abs(E - w) < tol * (1 + abs(w)):
                return z
            z = z - 2 * (E - w) / dE
        return None

    def solve(self, w: complex, k: int, guess: complex) -> complex | None:
        return self._newton(guess, w, k)

    def psi(self, w: complex, k: int = 0, *, start: float = 12.0, hmax: float = 2.0) -> complex:
        """Inverse of E along the horizontal line from +infinity to w, sheet k.

        The path is followed with a cheap short-orbit chart and polished with
        the full one at the end.
        """
        w = complex(w)
        coarse = max(self.steps // 50, 50)
        # the asymptotic seed needs |u| well beyond the log and 1/u corrections
        start = max(start, 3 * abs(self.beta), 3 * math.sqrt(abs(self.c1)))
        x0 = max(w.real, start - self.offset.real)
        z = self._seed(complex(x0, w.imag), k)
        z = self._newton(z, complex(x0, w.imag), k, steps=coarse)
        if z is None:
            raise ValueError("Fatou inverse seed failed")
        x, h = x0, hmax
        double = False
        while x > w.real:
            xn = max(w.real, x - h)
            _, dE, _ = self.evaluate(z, coarse)
            guess = z - (x - xn) / dE[0]
            zn = self._newton(guess, complex(xn, w.imag), k, steps=coarse)
            # a large Newton correction means the tangent step overshot and
            # may have landed near another preimage
            if zn is None or abs(zn - guess) > 0.25 * abs(guess - z):
                h /= 2
                if h < 1e-4:
                    # close to a critical point of E the tangent step is off
                    # by a factor 2; finish with Newton for a double root
                    double = True
                    break
                continue
            z, x = zn, xn
            h = min(2 * h, hmax)
        zf = None if double else self._newton(z, w, k)
        if zf is None:
            zf = self._newton_double(z, w, k)
        if zf is None:
            raise ValueError(f"Fatou inverse continuation stalled at Re w = {x:.6g}")
        return zf

    def in_petal(self, z: complex, k: int | None = None, level: float = 0.0,
                 tol: float = 1e-7) -> bool:
        """z lies in the petal {Re E > level} reached from direction k."""
        E, _, lab = self.evaluate(z)
        E, lab = complex(E[0]), int(lab[0])
        if not cmath.isfinite(E) or E.real <= level or (k is not None and lab != k):
            return False
        try:
            return abs(self.psi(E, lab) - z) < tol * (1 + abs(z))
        except ValueError:
            return False


def fatou_attracting(sl: Slice, a: complex, m: int = 0) -> FatouChart:
    """Fatou chart of f_a normalised at a critical point of the immediate basin.

    With m = 0 the reference is the critical point of largest Re E; otherwise
    it is the critical point arriving m sectors further on.
    """
    fm = PolyMap.cubic(sl.lam, a)
    chart = FatouChart(fm, sl.q)
    if m % max(sl.q, 1) == 0:
        return chart
    for c in fm.critical_points():
        E, _, lab = chart.evaluate(complex(c))
        if np.isfinite(E[0]) and int(lab[0]) == m % sl.q:
            return FatouChart(fm, sl.q, reference=complex(c))
    raise ValueError(f"no critical point of f_a arrives in sector {m}")


@dataclass(frozen=True)
class PetalChain:
    """Petals P^n_k with n p + k = m (mod q) and f(P^n_k) = P^{n-1}_{k+p}.

    P^n_k is the part of the immediate basin in direction k where
    Re E > level - n/q, reached along horizontal lines.
    """

    chart: FatouChart
    m: int
    level: float = 0.0
    depth: int = 2

    @property
    def labels(self) -> list[tuple[int, int]]:
        q, p = self.chart.q, self.chart.p
        return [(n, (self.m - n * p) % q) for n in range(self.depth, -self.depth - 1, -1)]

    def image_label(self, n: int, k: int) -> tuple[int, int]:
        return n - 1, (k + self.chart.p) % self.chart.q

    def cut(self, n: int) -> float:
        return self.level - n / self.chart.q

    def contains(self, z: complex, n: int) -> bool:
        k = (self.m - n * self.chart.p) % self.chart.q
        return self.chart.in_petal(z, k, self.cut(n))


# -- sectors cut out by the rays landing at 0 ----------------------------------

class SectorMap:
    """Sectors at the parabolic point bounded by a cycle of landing rays."""

    def __init__(self, chart: FatouChart, angles, *, potential: float = 1e-10):
        from matplotlib.path import Path

        self.chart = chart
        self.angles = tuple(sorted(angle(t) for t in angles))
        q = len(self.angles)
        if q != chart.q:
            raise ValueError("need one ray per attracting direction")
        self.rays = [trace_dynamical_ray(chart.fmap, None, t, potential) for t in self.angles]
        self.labels = []
        self.paths = []
        if q == 1:
            return
        for i in range(q):
            r0, r1 = self.rays[i], self.rays[(i + 1) % q]
            t0 = float(self.angles[i])
            t1 = float(self.angles[(i + 1) % q])
            if t1 <= t0:
                t1 += 1
            R = abs(r0.points[0])
            arc = R * np.exp(TWO_PI * 1j * np.linspace(t0, t1, 64))
            ring = np.concatenate([[0j], r0.points[::-1], arc, r1.points, [0j]])
            self.paths.append(Path(np.column_stack([ring.real, ring.imag])))
        for path in self.paths:
            hits = [k for k in range(q) if path.contains_point(self._probe(k))]
            self.labels.append(hits[0] if len(hits) == 1 else -1)
        if sorted(self.labels) != list(range(q)):
            raise ValueError(f"sector labelling failed: {self.labels}")

    def _probe(self, k: int):
        z = self.chart._seed(complex(200.0, 0.0) - self.chart.offset, k)
        return (z.real, z.imag)

    @classmethod
    def model(cls, chart: FatouChart, p: int, q: int, **kw) -> "SectorMap":
        return cls(chart, doubling_cycle(p, q).angles if q > 1 else (Fraction(0),), **kw)

    @classmethod
    def cubic(cls, chart: FatouChart, sl: Slice, a: complex, **kw) -> "SectorMap":
        hits = portrait_index(sl, complex(a))
        if not hits:
            raise ValueError("no cycle of rays lands at the parabolic point")
        return cls(chart, theta_m(sl.p, sl.q, hits[0]).angles, **kw)

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.full(z.shape, -1, dtype=int)
        if self.chart.q == 1:
            out[:] = 0
            return out
        pts = np.column_stack([z.real, z.imag])
        for path, lab in zip(self.paths, self.labels):
            inside = path.contains_points(pts, radius=1e-6)
            out[inside & (out < 0)] = lab
        return out


# -- basin addresses --------------------------------------------------------------

@dataclass(frozen=True)
class BasinAddress:
    """Sector and preimage-bit itinerary of a basin point up to its first entry
    into the petal region, plus the entry sector and the Fatou value."""

    sectors: tuple[int, ...]
    bits: tuple[int, ...]
    entry: int
    value: complex

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def omega(self) -> Fraction:
        return sum((Fraction(b, 2 ** (j + 1)) for j, b in enumerate(self.bits)), Fraction(0))

    def shift(self, p: int, q: int) -> "BasinAddress":
        """Address of f(z) from the address of z."""
        if self.depth == 0:
            return BasinAddress((), (), (self.entry + p) % q, self.value + 1 / q)
        return BasinAddress(self.sectors[1:], self.bits[1:], self.entry, self.value + 1 / q)

    def same(self, other: "BasinAddress", tol: float = 1e-8) -> bool:
        return (self.sectors == other.sectors and self.bits == other.bits
                and self.entry == other.entry and abs(self.value - other.value) < tol)


def _side(fm: PolyMap, x: complex) -> int:
    """Which preimage: 1 when x lies beyond the line through the (reference)
    critical point perpendicular to the direction of 0."""
    c = fm.coeffs
    if fm.degree == 2:
        crit = -c[1] / (2 * c[2])
    else:
        crit = min(fm.critical_points(), key=abs)
    return int(((x - crit) / (0 - crit)).real < 0)


def extend_fatou_address(chart: FatouChart, sectors: SectorMap, z: complex,
                         *, budget: int = 500) -> BasinAddress:
    fm = chart.fmap
    if not cmath.isfinite(chart(z)):
        raise ValueError("point is not in the parabolic basin")
    orbit = [complex(z)]
    while not chart.in_entry_region(orbit[-1]):
        if len(orbit) > budget:
            raise ValueError("orbit did not reach the petal region within budget")
        orbit.append(complex(fm(orbit[-1])))
    pre = orbit[:-1]
    secs = tuple(int(s) for s in sectors(pre)) if pre else ()
    bits = tuple(_side(fm, x) for x in pre)
    # the value is read at the entry point so that the shift rule is exact
    value = chart(orbit[-1]) - len(pre) / chart.q
    entry = chart.label(orbit[-1])
    return BasinAddress(secs, bits, entry, value)


def invert_address_in_model(chart: FatouChart, addr: BasinAddress) -> complex:
    """The point of the model basin with the given address."""
    fm = chart.fmap
    if fm.degree != 2:
        raise ValueError("inversion is implemented for the quadratic model")
    lam = fm.lam
    q = chart.q
    w = addr.value + addr.depth / q
    y = chart._newton(chart._seed(w, addr.entry), w, addr.entry, iters=40)
    n = q
    while (y is None or not chart.in_entry_region(y)) and n <= 64 * q:
        # near the edge of the entry region Newton can settle on another
        # preimage; solve deeper in the petal and pull back along the branch
        # of the inverse that fixes 0
        k = (addr.entry + n * chart.p) % q
        y = chart._newton(chart._seed(w + n / q, k), w + n / q, k, iters=40)
        if y is not None:
            for _ in range(n):
                r = cmath.sqrt(lam * lam + 4 * y)
                y = min(((-lam + r) / 2, (-lam - r) / 2), key=lambda x: abs(x - y / lam))
        n *= 4
    if y is None or not chart.in_entry_region(y):
        raise ValueError("address value does not lie in the petal region")
    crit = -lam / 2
    for b in reversed(addr.bits):
        r = cmath.sqrt(y + lam * lam / 4)
        if (r / (0 - crit)).real < 0:
            r = -r
        y = crit + (-r if b else r)
    return y
