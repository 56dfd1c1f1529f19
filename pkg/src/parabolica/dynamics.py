"""The cubic families on a parabolic slice, their conjugacies, critical points,
return-map coefficients at 0 and the double parabolic parameters.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
from scipy.signal import convolve2d

from .algebra import DensePolynomial, RootSet, poly_roots
from .angles import cycle_at_position, theta_m

VANISH_TOL = 1e-10
DP_RESIDUAL = 1e-8
DEDUP_RTOL = 1e-7
CROSS_TOL = 1e-7


@dataclass(frozen=True)
class Slice:
    """Multiplier lambda = exp(2 pi i p/q) at the fixed point 0."""

    p: int
    q: int
    lam: complex = field(init=False)

    def __post_init__(self):
        if self.q < 1 or gcd(self.p, self.q) != 1:
            raise ValueError(f"invalid rotation {self.p}/{self.q}")
        # reduce p into 0..q-1 for the angle, keep the user's p for display
        object.__setattr__(self, "lam", cmath.exp(2j * cmath.pi * Fraction(self.p % self.q, self.q)))

    @classmethod
    def parse(cls, text: str) -> "Slice":
        p, _, q = text.partition("/")
        return cls(int(p), int(q or 1))

    @property
    def rotation(self) -> Fraction:
        return Fraction(self.p % self.q, self.q)

    @property
    def pp(self) -> int:
        """p reduced mod q: the sector shift under one step."""
        return self.p % self.q

    @property
    def sqrt3_over_lam(self) -> complex:
        return cmath.sqrt(3 / self.lam)

    @property
    def sqrt3lam(self) -> complex:
        # coupled with sqrt(3/lam) so that the conjugacy holds exactly
        return self.lam * self.sqrt3_over_lam

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


class Family(str, enum.Enum):
    F_A = "F_a"
    G_C = "G_c"
    GHAT_S = "GHAT_s"


@dataclass(frozen=True)
class FamilyParam:
    family: Family
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "value", complex(self.value))
        if self.family is not Family.F_A and self.value == 0:
            raise ValueError(f"{self.family.value} parameter must be nonzero")


def family_coeffs(sl: Slice, param: FamilyParam) -> np.ndarray:
    """Ascending coefficients of the cubic (constant term 0)."""
    lam, v = sl.lam, param.value
    if param.family is Family.F_A:
        return np.array([0, lam, v, 1], dtype=complex)
    if param.family is Family.G_C:
        return np.array([0, lam, -lam * (1 + 1 / v) / 2, lam / (3 * v)], dtype=complex)
    return np.array([0, lam, -lam * (v + 1 / v) / 2, lam / 3], dtype=complex)


def eval_family(sl: Slice, param: FamilyParam, z):
    c = family_coeffs(sl, param)
    return ((c[3] * z + c[2]) * z + c[1]) * z


def f_a(lam: complex, a: complex, z):
    return z * (lam + z * (a + z))


def df_a(lam: complex, a: complex, z):
    return lam + z * (2 * a + 3 * z)


def sigma(sl: Slice, s: complex) -> complex:
    return -sl.sqrt3lam * (s + 1 / s) / 2


def convert_param(src: FamilyParam, target: Family | str, sl: Slice,
                  branch: int | None = None) -> FamilyParam:
    """Move a parameter between the three families.

    ``branch`` (+1 or -1) picks the inverse branch: the sign of sqrt(c) or the
    root of sigma(s) = a with |s| >= 1 (+1) or |s| <= 1 (-1).
    """
    target = Family(target)
    if target is src.family:
        raise ValueError("source and target family coincide")
    if src.family is Family.GHAT_S:
        s = src.value
    elif src.family is Family.G_C:
        if branch is None:
            raise ValueError("branch of sqrt(c) required")
        s = branch * cmath.sqrt(src.value)
    else:
        if branch is None:
            raise ValueError("branch of sigma^-1 required")
        # s + 1/s = w  ->  s^2 - w s + 1 = 0
        w = -2 * src.value / sl.sqrt3lam
        r = cmath.sqrt(w * w - 4)
        s1, s2 = (w + r) / 2, (w - r) / 2
        big, small = (s1, s2) if abs(s1) >= abs(s2) else (s2, s1)
        s = big if branch > 0 else small
        if s == 0:
            raise ValueError("degenerate inverse branch")
    if target is Family.GHAT_S:
        return FamilyParam(Family.GHAT_S, s)
    if target is Family.G_C:
        return FamilyParam(Family.G_C, s * s)
    return FamilyParam(Family.F_A, sigma(sl, s))


@dataclass(frozen=True)
class CriticalData:
    c_plus: complex
    c_minus: complex
    v_plus: complex
    v_minus: complex
    root: complex  # the continued value of sqrt(a^2 - 3 lam)
    degenerate: bool = False
    ambiguous: bool = False


def base_point(sl: Slice) -> complex:
    return 10.0 * (1 + abs(sl.lam))


def critical_points(sl: Slice, a: complex, path=None, *, tol: float = 1e-9,
                    steps: int = 256) -> CriticalData:
    """c_+- = (-a +- sqrt(a^2 - 3 lam))/3 with the root continued along a path
    from a large positive real base point (straight segment by default).
    """
    lam = sl.lam
    a = complex(a)
    if path is None:
        a0 = base_point(sl)
        path = a0 + (a - a0) * np.linspace(0.0, 1.0, steps + 1)
    path = np.asarray(path, dtype=complex)
    r = cmath.sqrt(path[0] ** 2 - 3 * lam)
    if r.real < 0:
        r = -r
    ambiguous = False
    for b in path[1:]:
        disc = b * b - 3 * lam
        if abs(disc) < tol * (1 + abs(b) ** 2):
            ambiguous = True
        cand = cmath.sqrt(disc)
        r = cand if abs(cand - r) <= abs(cand + r) else -cand
    disc = a * a - 3 * lam
    degenerate = abs(disc) < tol * (1 + abs(a) ** 2)
    cp = (-a + r) / 3
    cm = (-a - r) / 3
    return CriticalData(cp, cm, f_a(lam, a, cp), f_a(lam, a, cm), r,
                        degenerate, ambiguous and not degenerate)


def odd_root(lam: complex, a):
    """sqrt(a^2 - 3 lam) as a * sqrt(1 - 3 lam / a^2): odd in a, ~a at infinity."""
    a = np.asarray(a, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a * np.sqrt(1 - 3 * lam / (a * a))
    return np.where(a == 0, np.sqrt(-3 * lam + 0j), r)


def critical_pair(lam: complex, a):
    """(c_+, c_-) using the odd branch; c_+ -> 0 and c_- escapes as a -> oo."""
    r = odd_root(lam, a)
    return (-a + r) / 3, (-a - r) / 3


# -- return map coefficients ------------------------------------------------

@dataclass(frozen=True)
class ParabolicCoefficient:
    """Coefficient of z^{q+1} in the q-th iterate, as a polynomial.

    For family F_a the variable is a.  For family G_c the variable is
    t = 1/c, so ``poly`` is C(1/t) and its degree in t is the degree of
    C(1/c) as a polynomial in c.
    """

    slice: Slice
    family: Family
    poly: DensePolynomial
    series: np.ndarray  # [z-degree, parameter-degree]
    max_intermediate: float

    def __call__(self, x):
        if self.family is Family.G_C:
            return self.poly(1 / np.asarray(x, dtype=complex))
        return self.poly(x)

    @property
    def degree(self) -> int:
        return self.poly.degree


class SliceInconsistency(ArithmeticError):
    pass


def _bivariate_iterate(base: np.ndarray, n: int, order: int, cap: int) -> np.ndarray:
    """n-th iterate of z -> sum_k base[k](x) z^k truncated to z^order, x-degree cap."""
    def mul(u, v):
        w = convolve2d(u, v)
        return w[: order + 1, : cap + 1]

    one = np.zeros((order + 1, cap + 1), dtype=complex)
    one[1, 0] = 1.0
    g = one
    for _ in range(n):
        out = np.zeros_like(g)
        power = np.zeros_like(g)
        power[0, 0] = 1.0
        for k in range(1, base.shape[0]):
            power = mul(power, g)
            coeff = np.zeros((1, cap + 1), dtype=complex)
            coeff[0, : base.shape[1]] = base[k]
            out += mul(power, coeff)
        g = out
    return g


def parabolic_coefficient(sl: Slice, family: Family | str = Family.F_A,
                          order: int | None = None) -> ParabolicCoefficient:
    family = Family(family)
    q, lam = sl.q, sl.lam
    order = order or q + 3
    cap = 3 * q
    base = np.zeros((4, 2), dtype=complex)
    base[1, 0] = lam
    if family is Family.F_A:
        base[2, 1] = 1.0
        base[3, 0] = 1.0
    elif family is Family.G_C:
        base[2, 0] = base[2, 1] = -lam / 2
        base[3, 1] = lam / 3
    else:
        raise ValueError("coefficient polynomial defined for F_a and G_c")
    g = _bivariate_iterate(base, q, order, cap)
    inter = np.abs(g[2 : q + 1]).max() if q >= 2 else 0.0
    if inter > VANISH_TOL or abs(g[1, 0] - 1) > VANISH_TOL:
        raise SliceInconsistency(
            f"return map is not tangent to identity to order q (residual {inter:.3g})")
    return ParabolicCoefficient(sl, family, DensePolynomial(g[q + 1]), g, float(inter))


def return_series(sl: Slice, a: complex, order: int) -> np.ndarray:
    """Numeric Taylor coefficients of f_a^q at 0 through z^order."""
    base = np.array([[0], [sl.lam], [a], [1]], dtype=complex)
    g = _bivariate_iterate(base, sl.q, order, 0)
    return g[:, 0]


# -- double parabolic parameters ------------------------------------------

@dataclass(frozen=True)
class DoubleParabolic:
    a: complex
    type_m: int
    wake_angles: tuple[Fraction, ...]  # alpha-, alpha+, beta-, beta+
    residual: float


@dataclass(frozen=True)
class DoubleParabolicSet:
    slice: Slice
    params: tuple[DoubleParabolic, ...]
    a_degree: int
    cross_check: float
    c_roots: RootSet

    @property
    def values(self) -> list[complex]:
        return [d.a for d in self.params]

    def to_json(self) -> dict:
        return {
            "p": self.slice.p,
            "q": self.slice.q,
            "a_degree": self.a_degree,
            "params": [
                {"re": d.a.real, "im": d.a.imag, "type_m": d.type_m,
                 "wake_angles": [f"{t.numerator}/{t.denominator}" for t in d.wake_angles],
                 "residual": d.residual}
                for d in self.params
            ],
        }


class DoubleParabolicError(ArithmeticError):
    pass


def _dedup(values: list[complex]) -> list[complex]:
    kept: list[list[complex]] = []
    for v in values:
        for grp in kept:
            if abs(grp[0] - v) < DEDUP_RTOL * (1 + abs(v)):
                grp.append(v)
                break
        else:
            kept.append([v])
    return [complex(np.mean(g)) for g in kept]


def _polish(A: ParabolicCoefficient, a: complex) -> complex:
    dA = A.poly.derivative()
    for _ in range(4):
        d = dA(a)
        if d == 0:
            break
        step = A.poly(a) / d
        if abs(A.poly(a - step)) >= abs(A.poly(a)):
            break
        a = a - step
    return complex(a)


def transported_roots(sl: Slice) -> tuple[list[complex], RootSet]:
    C = parabolic_coefficient(sl, Family.G_C)
    if C.degree != sl.q:
        raise DoubleParabolicError(f"degree of C(1/c) is {C.degree}, expected {sl.q}")
    roots = poly_roots(C.poly)
    cands = []
    for t in roots.roots:
        c = 1 / t
        for sgn in (1, -1):
            cands.append(sigma(sl, sgn * cmath.sqrt(c)))
    return _dedup(cands), roots


def double_parabolic_params(sl: Slice, *, classify: bool = True) -> DoubleParabolicSet:
    """The q parameters where the z^{q+1} coefficient of f_a^q vanishes."""
    A = parabolic_coefficient(sl, Family.F_A)
    vals, croots = transported_roots(sl)
    if len(vals) != sl.q:
        raise DoubleParabolicError(f"found {len(vals)} distinct parameters, expected {sl.q}")
    vals = [_polish(A, a) for a in vals]
    res = [float(abs(A.poly(a))) for a in vals]
    if max(res) >= DP_RESIDUAL:
        raise DoubleParabolicError(f"|A| = {max(res):.3g} at a transported root")

    aroots = poly_roots(A.poly).roots if A.degree >= 1 else ()
    cross = 0.0
    for r in aroots:
        cross = max(cross, min(abs(r - v) for v in vals))
    for v in vals:
        if aroots:
            cross = max(cross, min(abs(r - v) for r in aroots))
    if cross > CROSS_TOL:
        raise DoubleParabolicError(f"A-roots and transported C-roots differ by {cross:.3g}")

    types = [_try_type(sl, a) for a in vals] if classify else [None] * len(vals)
    if classify:
        # the negation pairing fixes labels the landing test leaves open
        for i, a in enumerate(vals):
            j = min(range(len(vals)), key=lambda k: abs(vals[k] + a))
            if types[i] is not None and types[j] is None:
                types[j] = sl.q - 1 - types[i]
    out = []
    for a, m, r in zip(vals, types, res):
        wake = wake_angles(sl, m) if m is not None else ()
        out.append(DoubleParabolic(a, -1 if m is None else m, wake, r))
    out.sort(key=lambda d: (d.type_m, d.a.real, d.a.imag))
    return DoubleParabolicSet(sl, tuple(out), A.degree, cross, croots)


def _try_type(sl: Slice, a: complex) -> int | None:
    try:
        return classify_double_parabolic_type(sl, a)
    except DoubleParabolicError:
        return None


def wake_angles(sl: Slice, m: int) -> tuple[Fraction, ...]:
    """alpha-, alpha+ (cycle at position m) and beta-, beta+ (position m+1).

    The 2q rays of both cycles cut the plane into 2q sectors at 0. The
    critical values sit in the two narrowest ones and the parameter rays that
    land at the double parabolic parameter carry the angles bounding these two
    sectors. When the two sectors are adjacent the shared angle appears twice:
    it lands from two different sheets of the cubic covering.
    """
    lo = cycle_at_position(sl.p, sl.q, m)
    hi = cycle_at_position(sl.p, sl.q, m + 1)
    pts = sorted([(t, 0) for t in lo.angles] + [(t, 1) for t in hi.angles])
    n = len(pts)
    gaps = [((pts[(i + 1) % n][0] - pts[i][0]) % 1, i) for i in range(n)]
    narrow = sorted(i for _, i in sorted(gaps)[:2])
    alpha, beta = [], []
    for i in narrow:
        for t, side in (pts[i], pts[(i + 1) % n]):
            (alpha if side == 0 else beta).append(t)
    if len(alpha) != 2 or len(beta) != 2:
        raise DoubleParabolicError(f"sectors at 0 do not alternate between the cycles at {m}, {m + 1}")
    return tuple(alpha) + tuple(beta)


def classify_double_parabolic_type(sl: Slice, a_dp: complex, **kw) -> int:
    """Position m such that the rays of the cycles at positions m, m+1 land at 0."""
    from .coords import lands_at_zero

    A = parabolic_coefficient(sl, Family.F_A)
    if abs(A.poly(a_dp)) >= 1e-6:
        raise DoubleParabolicError("parameter is not double parabolic")
    if sl.q == 1:
        return 0
    hits = [m for m in range(sl.q + 1)
            if lands_at_zero(sl, a_dp, cycle_at_position(sl.p, sl.q, m).angles[0], **kw)]
    if len(hits) != 2 or hits[1] != hits[0] + 1:
        raise DoubleParabolicError(f"portrait classification failed: cycles {hits} land at 0")
    return hits[0]
