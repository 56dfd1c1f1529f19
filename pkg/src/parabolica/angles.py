"""Exact combinatorics of t -> d*t on the circle R/Z."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd

Angle = Fraction


def angle(value) -> Fraction:
    """Coerce to an exact angle in [0, 1)."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    t = Fraction(value)
    return t - (t.numerator // t.denominator)


def fmt(t: Fraction) -> str:
    return f"{t.numerator}/{t.denominator}"


def _ccw(a: Fraction, b: Fraction) -> Fraction:
    """Length of the counterclockwise arc from a to b, in (0, 1]."""
    d = angle(b - a)
    return d if d else Fraction(1)


@dataclass(frozen=True)
class RotationCycle:
    """A periodic cycle of angles under multiplication by d.

    ``angles`` is sorted; ``base`` marks theta_0 and the orbit runs
    theta_{i+1} = d * theta_i.  ``gaps[i]`` is the ccw arc from theta_i to its
    ccw neighbour in the cycle.
    """

    angles: tuple[Fraction, ...]
    d: int
    rotation: Fraction
    base: int = 0

    @property
    def q(self) -> int:
        return len(self.angles)

    @property
    def orbit(self) -> tuple[Fraction, ...]:
        out = [self.angles[self.base]]
        for _ in range(self.q - 1):
            out.append(angle(self.d * out[-1]))
        return tuple(out)

    @property
    def gaps(self) -> tuple[Fraction, ...]:
        q = self.q
        pos = {t: k for k, t in enumerate(self.angles)}
        return tuple(
            _ccw(t, self.angles[(pos[t] + 1) % q]) if q > 1 else Fraction(1)
            for t in self.orbit
        )

    def as_set(self) -> frozenset:
        return frozenset(self.angles)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RotationCycle):
            return NotImplemented
        return self.d == other.d and self.as_set() == other.as_set()

    def __hash__(self) -> int:
        return hash((self.d, self.as_set()))

    def shifted(self, delta: Fraction) -> "RotationCycle":
        base_angle = angle(self.angles[self.base] + delta)
        pts = tuple(sorted(angle(t + delta) for t in self.angles))
        return RotationCycle(pts, self.d, self.rotation, pts.index(base_angle))

    def to_json(self, m: int | None = None, p: int | None = None) -> dict:
        out = {
            "d": self.d,
            "p": self.rotation.numerator if p is None else p,
            "q": self.q,
            "angles": [fmt(t) for t in self.orbit],
            "gaps": [fmt(g) for g in self.gaps],
        }
        if m is not None:
            out["m"] = m
        return out


@dataclass(frozen=True)
class Preperiodic:
    """Marker for an angle that is not periodic: tail length and its cycle."""

    tail: int
    cycle: RotationCycle | None


def rotation_of(points: tuple[Fraction, ...], d: int) -> Fraction | None:
    """Rotation number if x d permutes the sorted points as a rotation."""
    q = len(points)
    if q == 1:
        return Fraction(0) if angle(d * points[0]) == points[0] else None
    pos = {t: k for k, t in enumerate(points)}
    image = [pos.get(angle(d * t)) for t in points]
    if None in image:
        return None
    shift = (image[0] - 0) % q
    if any((image[k] - k) % q != shift for k in range(q)):
        return None
    return Fraction(shift, q)


def orbit_under_mul(t, d: int):
    """Cycle through t, or a Preperiodic marker."""
    if d < 2:
        raise ValueError("multiplier must be at least 2")
    t = angle(t)
    seen: dict[Fraction, int] = {}
    orbit = []
    x = t
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = angle(d * x)
    start = seen[x]
    cyc_pts = tuple(sorted(orbit[start:]))
    rot = rotation_of(cyc_pts, d)
    # a periodic orbit need not be rotation-like; report None then
    cyc = RotationCycle(cyc_pts, d, rot if rot is not None else Fraction(-1),
                        cyc_pts.index(orbit[start]))
    if start == 0:
        return cyc
    return Preperiodic(start, cyc)


def enumerate_cycles(d: int, p: int, q: int) -> list[RotationCycle]:
    """All cycles of rotation number p/q under x d, by brute force."""
    if gcd(p, q) != 1:
        raise ValueError("p and q must be coprime")
    if q == 1:
        p = 0
    target = Fraction(p % q, q)
    den = d**q - 1
    found: dict[frozenset, RotationCycle] = {}
    taken = set()
    for k in range(den):
        if k in taken:
            continue
        orbit = [k]
        x = (k * d) % den
        while x != k and len(orbit) <= q:
            orbit.append(x)
            x = (x * d) % den
        taken.update(orbit)
        if len(orbit) != q:
            continue
        pts = tuple(sorted(Fraction(n, den) for n in orbit))
        if rotation_of(pts, d) == target:
            c = RotationCycle(pts, d, Fraction(p, q) if q > 1 else Fraction(0),
                              pts.index(Fraction(k, den)))
            found[c.as_set()] = c
    return sorted(found.values(), key=lambda c: c.angles)


def goldberg_count(d: int, q: int) -> int:
    return comb(d + q - 2, q)


def _gap_defects(q: int, m: int) -> list[int]:
    # extra full turns picked up at the critical sectors
    e = [0] * q
    if m == 0:
        e[0] = 2
    else:
        e[0] = 1
        e[m] = 1
    return e


def solve_gaps(q: int, m: int) -> tuple[Fraction, ...]:
    """Exact solution of 3 d_i = d_{i+1} + e_i around the cycle."""
    e = _gap_defects(q, m)
    # d_q = 3^q d_0 - sum_i 3^{q-1-i} e_i must equal d_0
    s = sum(3 ** (q - 1 - i) * e[i] for i in range(q))
    d0 = Fraction(s, 3**q - 1)
    gaps = [d0]
    for i in range(q - 1):
        gaps.append(3 * gaps[-1] - e[i])
    return tuple(gaps)


def theta_m(p: int, q: int, m: int) -> RotationCycle:
    """The rotation cycle under x3 whose gap pattern has critical sectors 0 and m."""
    if gcd(p, q) != 1:
        raise ValueError("p and q must be coprime")
    if not 0 <= m <= q:
        raise ValueError(f"m must lie in 0..{q}")
    if m > q // 2:
        # the half turn swaps the roles of the two critical gaps: the old
        # theta_{q-m} becomes the new base, so that gap d_0 again borders
        # the first critical sector
        src = theta_m(p, q, q - m)
        half = src.shifted(Fraction(1, 2))
        base = angle(src.orbit[(q - m) % q] + Fraction(1, 2))
        return RotationCycle(half.angles, 3, half.rotation, half.angles.index(base))
    if q == 1:
        p = 0
    gaps = solve_gaps(q, m)
    # sorted gap G_k belongs to orbit index i with i p = k (mod q)
    pinv = pow(p, -1, q) if q > 1 else 0
    sorted_gaps = [gaps[(k * pinv) % q] for k in range(q)]
    # theta_1 = 3 theta_0 sits p steps ccw of theta_0
    span = sum(sorted_gaps[:p]) if q > 1 else Fraction(1)
    theta0 = angle(span / 2)
    pts = [theta0]
    for g in sorted_gaps[:-1]:
        pts.append(angle(pts[-1] + g))
    srt = tuple(sorted(pts))
    cyc = RotationCycle(srt, 3, Fraction(p, q) if q > 1 else Fraction(0),
                        srt.index(theta0))
    if rotation_of(srt, 3) != cyc.rotation or angle(3 * theta0) != pts[p % q if q > 1 else 0]:
        raise ArithmeticError("gap reconstruction failed")
    return cyc


def position_index(p: int, q: int, m: int) -> int:
    """Angular position of the second critical gap of theta_m, counted in the
    sorted cycle; it equals m when p = 1."""
    if m in (0, q) or q == 1:
        return m
    return (m * p) % q


def cycle_at_position(p: int, q: int, k: int) -> RotationCycle:
    """theta_m whose second critical gap sits k places ccw of the first."""
    if k in (0, q) or q == 1:
        return theta_m(p, q, k)
    return theta_m(p, q, (k * pow(p, -1, q)) % q)


def reflect_cycle(c: RotationCycle) -> RotationCycle:
    pts = tuple(sorted(angle(1 - t) for t in c.angles))
    base = pts.index(angle(1 - c.angles[c.base]))
    rot = angle(1 - c.rotation) if c.q > 1 else Fraction(0)
    return RotationCycle(pts, c.d, rot, base)


def angle_preimages(t, d: int, depth: int = 1) -> list[Fraction]:
    if depth < 1:
        raise ValueError("depth must be positive")
    t = angle(t)
    n = d**depth
    return sorted(angle((t + k) / n) for k in range(n))


def doubling_cycle(p: int, q: int) -> RotationCycle:
    """The unique p/q cycle under doubling."""
    (c,) = enumerate_cycles(2, p, q)
    return c
