"""Parameter-plane classification, locus images, the component
parametrisations and the double covering onto the quadratic model basin.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _kernels as K
from .coords import (BasinAddress, FatouChart, PolyMap, _side, invert_address_in_model)
from .dynamics import Family, Slice, critical_pair, double_parabolic_params, parabolic_coefficient

EXTERIOR = "Exterior"
ADJACENT = "Adjacent"
BITRANSITIVE = "Bitransitive"
CAPTURE = "Capture"
DP_NEAR = "DoubleParabolicNear"
MP_NEAR = "MisiurewiczParabolicNear"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Budget:
    """Iteration budgets and tolerances for classification."""

    escape: int = 200
    parabolic: int | None = None
    u_entry: float = 32.0
    dp_tol: float = 1e-6
    dp_radius: float = 0.02
    escape_radius: float = 10.0

    def parabolic_for(self, q: int) -> int:
        return self.parabolic if self.parabolic is not None else 10**4 * q

    def __post_init__(self):
        if self.escape < 1 or (self.parabolic is not None and self.parabolic < 1):
            raise ValueError("budgets must be positive")
        if min(self.u_entry, self.dp_tol, self.dp_radius, self.escape_radius) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class ParamClass:
    tag: str
    m: int | None = None
    depth: int | None = None
    iterations: int = 0

    def code(self, q: int) -> int:
        return {EXTERIOR: 0, ADJACENT: 1, CAPTURE: q + 1, DP_NEAR: q + 2,
                UNDECIDED: q + 3, MP_NEAR: q + 4}.get(self.tag, 1 + (self.m or 0))

    @classmethod
    def from_code(cls, code: int, info: int, q: int) -> "ParamClass":
        if code == 0:
            return cls(EXTERIOR, iterations=info)
        if code == 1:
            return cls(ADJACENT, m=0, depth=0)
        if 2 <= code <= q:
            return cls(BITRANSITIVE, m=code - 1, depth=0)
        if code == q + 1:
            return cls(CAPTURE, depth=info)
        if code == q + 2:
            return cls(DP_NEAR)
        if code == q + 4:
            return cls(MP_NEAR, iterations=info)
        return cls(UNDECIDED)

    def relabel_negated(self, q: int) -> "ParamClass":
        """Class expected at -a given the class at a."""
        if self.tag == BITRANSITIVE:
            return ParamClass(BITRANSITIVE, q - self.m, self.depth, self.iterations)
        return self


@lru_cache(maxsize=64)
def _dp_values(sl: Slice) -> np.ndarray:
    return np.array(double_parabolic_params(sl, classify=False).values, dtype=complex)


def classify_codes(sl: Slice, avals, budget: Budget = Budget()) -> tuple[np.ndarray, np.ndarray]:
    """Class codes (see ``ParamClass.from_code``) and diagnostics for many a."""
    av = np.ascontiguousarray(np.asarray(avals, dtype=complex).ravel())
    A = parabolic_coefficient(sl, Family.F_A)
    As = np.asarray(A.poly(av), dtype=complex).reshape(av.shape)
    q = sl.q
    p = sl.p % q if q > 1 else 0
    codes, info = K.classify_grid(
        complex(sl.lam), av, As, q, p, budget.escape_radius, budget.escape,
        budget.parabolic_for(q), budget.u_entry, _dp_values(sl), budget.dp_radius,
        budget.dp_tol)
    shape = np.shape(avals)
    return codes.reshape(shape), info.reshape(shape)


def classify_param(sl: Slice, a: complex, budget: Budget = Budget()) -> ParamClass:
    codes, info = classify_codes(sl, [complex(a)], budget)
    return ParamClass.from_code(int(codes[0]), int(info[0]), sl.q)


# -- rendering ------------------------------------------------------------------

PALETTE = {
    "exterior": (236, 236, 236),
    "adjacent": (31, 119, 180),
    "capture": (255, 127, 14),
    "dp": (214, 39, 40),
    "undecided": (0, 0, 0),
    "mp": (227, 119, 194),
}
BITRANSITIVE_COLOURS = [(44, 160, 44), (148, 103, 189), (140, 86, 75), (188, 189, 34),
                        (23, 190, 207), (127, 127, 127), (174, 199, 232), (152, 223, 138)]


def palette(q: int) -> np.ndarray:
    rows = [PALETTE["exterior"], PALETTE["adjacent"]]
    rows += [BITRANSITIVE_COLOURS[(m - 1) % len(BITRANSITIVE_COLOURS)] for m in range(1, q)]
    rows += [PALETTE["capture"], PALETTE["dp"], PALETTE["undecided"], PALETTE["mp"]]
    return np.array(rows, dtype=np.uint8)


@dataclass(frozen=True)
class LocusImage:
    slice: Slice
    center: complex
    width: float
    resolution: int
    codes: np.ndarray
    info: np.ndarray = field(repr=False)

    def params(self) -> np.ndarray:
        return pixel_grid(self.center, self.width, self.resolution)

    def rgb(self) -> np.ndarray:
        return palette(self.slice.q)[self.codes]

    def write_ppm(self, path) -> None:
        n = self.resolution
        with open(path, "wb") as fh:
            fh.write(f"P6\n{n} {n}\n255\n".encode("ascii"))
            fh.write(np.ascontiguousarray(self.rgb()).tobytes())

    def write_png(self, path) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plt.imsave(path, self.rgb())

    def write_csv(self, path) -> None:
        np.savetxt(path, self.codes, fmt="%d", delimiter=",")

    def symmetry_agreement(self) -> float:
        """Fraction of pixels whose class matches the relabelled class at -a.

        Only meaningful for windows centred at 0, where negation is a
        180 degree rotation of the pixel grid.
        """
        q = self.slice.q
        rot = self.codes[::-1, ::-1]
        expect = rot.copy()
        bit = (rot >= 2) & (rot <= q)
        expect[bit] = 1 + (q - (rot[bit] - 1))
        return float(np.mean(expect == self.codes))


def pixel_grid(center: complex, width: float, n: int) -> np.ndarray:
    # offsets are exact odd multiples of width / (2n), so a window centred at
    # 0 is exactly symmetric under negation
    off = (np.arange(n) - (n - 1) / 2) * (width / n)
    return complex(center) + off[None, :] - 1j * off[:, None]


def set_threads(n: int | None = None) -> int:
    import numba

    if n is None:
        env = os.environ.get("PARABOLICA_THREADS")
        n = int(env) if env else numba.config.NUMBA_NUM_THREADS
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def render_locus(sl: Slice, center: complex = 0j, width: float = 5.0, resolution: int = 512,
                 budget: Budget = Budget(), threads: int | None = None) -> LocusImage:
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    set_threads(threads)
    grid = pixel_grid(center, width, resolution)
    codes, info = classify_codes(sl, grid, budget)
    return LocusImage(sl, complex(center), float(width), resolution, codes, info)


# -- Fatou data of the free critical point -----------------------------------------

@lru_cache(maxsize=8)
def model_chart(lam: complex, q: int) -> FatouChart:
    return FatouChart(PolyMap.model(lam), q)


@dataclass(frozen=True)
class CriticalFatouData:
    """c_b has the larger Re E and normalises E; w = E(c_f); k = label of c_f."""

    a: complex
    c_b: complex
    c_f: complex
    w: complex
    k: int
    chart: FatouChart = field(repr=False, compare=False)


def steps_to_sector(sl: Slice, k: int) -> int:
    """Smallest j >= 0 with f^j carrying sector 0 to sector k."""
    return next(j for j in range(sl.q) if (j * sl.pp - k) % sl.q == 0)


def _relative(sl: Slice, fm: PolyMap, ref: complex, other: complex, steps: int | None = None):
    try:
        chart = FatouChart(fm, sl.q, reference=ref, steps=steps)
    except ValueError:
        return None
    E, _, lab = chart.evaluate(other)
    w = complex(E[0])
    if not cmath.isfinite(w):
        return None
    return CriticalFatouData(fm.coeffs[2], complex(ref), complex(other), w, int(lab[0]), chart)


def critical_fatou_data(sl: Slice, a: complex, steps: int | None = None) -> CriticalFatouData | None:
    """Fatou data of the free critical point relative to the designated one.

    The designated critical point c_b is the one for which the other lies
    behind the orbit of c_b in its own sector: Re w < -j/q, where f^j carries
    the sector of c_b to that of c_f.  In a single sector this is the critical
    point of larger Re E.
    """
    fm = PolyMap.cubic(sl.lam, a)
    cs = [complex(c) for c in fm.critical_points()]
    first = None
    for ref, other in ((cs[0], cs[1]), (cs[1], cs[0])):
        d = _relative(sl, fm, ref, other, steps)
        if d is None:
            continue
        if d.w.real < -steps_to_sector(sl, d.k) / sl.q:
            return d
        first = first or d
    return None


def is_principal(data: CriticalFatouData, tol: float = 1e-4) -> bool:
    """Both critical points are reached by horizontal continuation from the petal.

    c_b must bound the petal, otherwise it sits in a preimage component of
    the basin (a capture parameter) even though its Re E is larger.  Critical
    points are critical for E too, so inverting E near them recovers them only
    to about the square root of the rounding level of E; other branches land
    far away, hence the loose tolerance.
    """
    try:
        zb = data.chart.psi(0j, 0)
        zf = data.chart.psi(data.w, data.k)
    except ValueError:
        return False
    return (abs(zb - data.c_b) < tol * (1 + abs(data.c_b))
            and abs(zf - data.c_f) < tol * (1 + abs(data.c_f)))


def psi_parametrize(sl: Slice, a: complex, hint: str | None = None) -> complex:
    """Model point carrying the Fatou data of the free critical value.

    Adjacent and bitransitive parameters use horizontal continuation in the
    model; capture parameters go through the basin address of c_f.
    """
    data = critical_fatou_data(sl, a)
    if data is None:
        raise ValueError("free critical point is not resolved in the parabolic basin")
    q, p = sl.q, sl.pp
    mchart = model_chart(sl.lam, q)
    if hint != CAPTURE and is_principal(data):
        return mchart.psi(data.w + 1 / q, (data.k + p) % q)
    # address of c_f in the cubic basin, read in the model
    fm = data.chart.fmap
    orbit = [data.c_f]
    while not data.chart.in_entry_region(orbit[-1]):
        if len(orbit) > 500:
            raise ValueError("free critical orbit is too slow to address")
        orbit.append(complex(fm(orbit[-1])))
    bits = tuple(_side(fm, x) for x in orbit[1:-1])
    entry = data.chart.label(orbit[-1])
    value = data.chart(orbit[-1]) - (len(orbit) - 2) / q
    return invert_address_in_model(mchart, BasinAddress((), bits, entry, value))


# -- the double covering ---------------------------------------------------------

@dataclass(frozen=True)
class CoveringSample:
    a: complex
    z: complex
    sheet: int
    w: complex
    k: int
    principal: bool

    def to_json(self) -> dict:
        return {"a": [self.a.real, self.a.imag], "z": [self.z.real, self.z.imag],
                "sheet": self.sheet, "w": [self.w.real, self.w.imag], "k": self.k,
                "principal": self.principal}


def sheet_of(sl: Slice, a: complex) -> int:
    return int((complex(a) * complex(np.conj(cmath.sqrt(3 * sl.lam)))).imag < 0)


def covering_eval(sl: Slice, a: complex) -> CoveringSample:
    """G(a) = psi_P(w(a)) on sheet k of the model, where w(a) = E(c_f) - E(c_b)."""
    data = critical_fatou_data(sl, a)
    if data is None:
        raise ValueError("parameter is not in the parabolic connectedness locus interior")
    principal = bool(is_principal(data))
    if not principal:
        raise ValueError("free critical point is off the principal part (capture or boundary)")
    if abs(data.w.imag) < 1e-6:
        raise ValueError("parameter lies on the balance curve; sheet is ambiguous")
    z = model_chart(sl.lam, sl.q).psi(data.w, data.k)
    return CoveringSample(complex(a), z, sheet_of(sl, a), data.w, data.k, principal)


@lru_cache(maxsize=16)
def _base_grid(sl: Slice, radius: float = 2.6, step: float = 0.1):
    xs = np.arange(-radius, radius + 1e-9, step)
    out = []
    for x in xs:
        for y in xs:
            d = critical_fatou_data(sl, complex(x, y))
            if d is not None and abs(d.w.imag) > 1e-3:
                out.append((d.a, d.w, d.k))
    return tuple(out)


def _w_newton(sl: Slice, a: complex, target: complex, k: int, *, coarse: bool = False,
              iters: int = 25):
    """Solve w(a) = target by Newton with a finite-difference derivative."""
    steps = 500 * sl.q if coarse else None
    tol = 1e-6 if coarse else 1e-9
    for _ in range(iters):
        d = critical_fatou_data(sl, a, steps)
        if d is None or d.k != k:
            return None
        r = d.w - target
        if abs(r) < tol * (1 + abs(target)):
            return a
        h = 1e-6 * (1 + abs(a))
        d2 = critical_fatou_data(sl, a + h, steps)
        if d2 is None or d2.k != k:
            return None
        dw = (d2.w - d.w) / h
        if dw == 0:
            return None
        a = a - r / dw
    return None


def _homotopy(sl: Slice, a0: complex, w0: complex, target: complex, k: int):
    a, t, h = a0, 0.0, 1.0
    while t < 1:
        tn = min(1.0, t + h)
        an = _w_newton(sl, a, w0 + tn * (target - w0), k, coarse=True)
        if an is None:
            h /= 2
            if h < 1e-3:
                return None
            continue
        a, t = an, tn
        h = min(1.0, 2 * h)
    return _w_newton(sl, a, target, k)


@dataclass(frozen=True)
class FiberReport:
    z: complex
    w: complex
    k: int
    fibers: tuple[CoveringSample, ...]
    residuals: tuple[float, ...]
    status: str

    @property
    def count(self) -> int:
        return len(self.fibers)

    def to_json(self) -> dict:
        return {"z": [self.z.real, self.z.imag], "w": [self.w.real, self.w.imag],
                "k": self.k, "status": self.status, "count": self.count,
                "fibers": [f.to_json() for f in self.fibers],
                "residuals": list(self.residuals)}


def covering_fibers(sl: Slice, z: complex, *, seeds: int = 40, extra: int = 2) -> FiberReport:
    """All parameters a found with G(a) = z.

    Homotopies in w start from base samples ordered by distance in w, same
    half plane first; the search stops ``extra`` attempts after the first
    success so that a surplus fiber still has a chance to show up.
    """
    mchart = model_chart(sl.lam, sl.q)
    E, _, lab = mchart.evaluate(z)
    w, k = complex(E[0]), int(lab[0])
    if not cmath.isfinite(w):
        return FiberReport(complex(z), w, -1, (), (), "not-in-basin")
    if w.real >= -steps_to_sector(sl, k) / sl.q:
        return FiberReport(complex(z), w, k, (), (), "no-fiber")
    base = [b for b in _base_grid(sl) if b[2] == k]
    base.sort(key=lambda b: (np.sign(b[1].imag) != np.sign(w.imag), abs(b[1] - w)))
    tried: list[complex] = []
    fibers: list[CoveringSample] = []
    left = None
    for a0, w0, _ in base[:seeds]:
        if left is not None:
            if left == 0:
                break
            left -= 1
        a = _homotopy(sl, a0, w0, w, k)
        if a is None:
            continue
        # w(-a) = w(a) exactly, so candidates come in pairs
        for b in (a, -a):
            if any(abs(b - c) < 1e-6 for c in tried):
                continue
            tried.append(b)
            try:
                s = covering_eval(sl, b)
            except ValueError:
                continue
            if abs(s.z - z) > 1e-6:
                continue
            fibers.append(s)
        if fibers and left is None:
            left = extra
    fibers.sort(key=lambda f: f.sheet)
    res = tuple(abs(f.z - z) for f in fibers)
    return FiberReport(complex(z), w, k, tuple(fibers), res, "ok" if fibers else "no-solution")


def model_samples(sl: Slice, n: int, seed: int = 0) -> list[complex]:
    """Fixed-seed model basin points off the excluded petals.

    In sector k the petal reaches down to Re E = -j/q with f^j carrying
    sector 0 to sector k; samples take Re E in (-1.5, -0.05) below that.
    """
    rng = np.random.default_rng(seed)
    mchart = model_chart(sl.lam, sl.q)
    out = []
    while len(out) < n:
        k = int(rng.integers(sl.q))
        re = rng.uniform(-1.5, -0.05) - steps_to_sector(sl, k) / sl.q
        im = rng.uniform(0.05, 1.0) * rng.choice([-1.0, 1.0])
        try:
            out.append(mchart.psi(complex(re, im), k))
        except ValueError:
            continue
    return out


# -- the balance curve ------------------------------------------------------------

@dataclass(frozen=True)
class SpecialCurveApprox:
    m: int
    points: np.ndarray
    levels: np.ndarray
    residuals: np.ndarray
    note: str = ""


def _balance(sl: Slice, a: complex, m: int):
    """E(f^j c_-) - E(c_+) with j the first iterate landing in the sector of c_+."""
    fm = PolyMap.cubic(sl.lam, a)
    cp, cm = (complex(x) for x in critical_pair(sl.lam, a))
    try:
        chart = FatouChart(fm, sl.q, reference=cp)
    except ValueError:
        return None
    E, _, lab = chart.evaluate(cm)
    if not cmath.isfinite(complex(E[0])) or int(lab[0]) != m:
        return None
    p = sl.pp
    j = next(j for j in range(sl.q) if (m + j * p) % sl.q == 0)
    return complex(E[0]) + j / sl.q


def special_curve(sl: Slice, m: int = 0, samples: int = 40, *, step: float = 0.05,
                  seed_radius: float = 2.0) -> SpecialCurveApprox:
    """Continuation of {Re F = 0} with F(a) = E(f^j c_-) - E(c_+), parametrised by Im F."""
    if samples < 2:
        raise ValueError("need at least two samples")

    def solve(a, level):
        for _ in range(30):
            F = _balance(sl, a, m)
            if F is None:
                return None
            r = F - 1j * level
            if abs(r) < 1e-9:
                return a
            h = 1e-6 * (1 + abs(a))
            F2 = _balance(sl, a + h, m)
            if F2 is None:
                return None
            a = a - r / ((F2 - F) / h)
        return None

    seed = None
    best = math.inf
    xs = np.linspace(-seed_radius, seed_radius, 21)
    for x in xs:
        for y in xs:
            F = _balance(sl, complex(x, y), m)
            if F is not None and abs(F.real) < best:
                best, seed = abs(F.real), (complex(x, y), F.imag)
    if seed is None:
        return SpecialCurveApprox(m, np.array([]), np.array([]), np.array([]), "no seed")
    a0 = solve(seed[0], seed[1])
    if a0 is None:
        return SpecialCurveApprox(m, np.array([]), np.array([]), np.array([]), "seed failed")
    branches = []
    notes = []
    for direction in (1, -1):
        a, s, h = a0, seed[1], step
        pts = []
        while len(pts) < samples // 2:
            an = solve(a, s + direction * h)
            if an is None:
                h /= 2
                if h < 1e-4:
                    notes.append(f"stopped at level {s:.6g}")
                    break
                continue
            a, s = an, s + direction * h
            pts.append((s, a))
        branches.append(pts)
    pts = sorted(branches[0] + branches[1] + [(seed[1], a0)], key=lambda t: t[0])
    lv = np.array([t[0] for t in pts])
    av = np.array([t[1] for t in pts])
    res = np.array([abs(_balance(sl, a, m).real) for a in av])
    return SpecialCurveApprox(m, av, lv, res, "; ".join(notes))
