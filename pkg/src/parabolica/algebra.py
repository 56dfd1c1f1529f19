"""Numeric kernels: exact rationals, truncated power series, dense polynomials
and a simultaneous (Aberth-Ehrlich) root finder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# Angles and gap lengths are exact; Fraction already keeps itself reduced
# with a positive denominator.
ExactRational = Fraction

TRIM_RTOL = 1e-9
ROOT_RTOL = 1e-10
MAX_SWEEPS = 500


class SeriesError(ValueError):
    pass


def _as_coeffs(values: Iterable[complex]) -> np.ndarray:
    return np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                      dtype=complex).copy()


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series sum c_k z^k known through z^order."""

    coeffs: np.ndarray
    order: int

    def __init__(self, coeffs: Sequence[complex], order: int | None = None):
        c = _as_coeffs(coeffs)
        if order is None:
            order = len(c) - 1
        if order < 1:
            raise SeriesError("order must be at least 1")
        full = np.zeros(order + 1, dtype=complex)
        n = min(len(c), order + 1)
        full[:n] = c[:n]
        full.flags.writeable = False
        object.__setattr__(self, "coeffs", full)
        object.__setattr__(self, "order", order)

    @classmethod
    def identity(cls, order: int) -> "TruncatedSeries":
        return cls([0, 1], order)

    def __getitem__(self, k: int) -> complex:
        return complex(self.coeffs[k]) if k <= self.order else 0j

    def _check(self, other: "TruncatedSeries") -> None:
        if other.order != self.order:
            raise SeriesError("series orders differ")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.coeffs + other.coeffs, self.order)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.coeffs - other.coeffs, self.order)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            prod = np.convolve(self.coeffs, other.coeffs)[: self.order + 1]
            return TruncatedSeries(prod, self.order)
        return TruncatedSeries(self.coeffs * complex(other), self.order)

    __rmul__ = __mul__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self.coeffs, self.order)

    def __call__(self, z):
        # Horner on the truncation; numpy handles arrays of points
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def allclose(self, other: "TruncatedSeries", rtol: float = 1e-12) -> bool:
        scale = 1.0 + max(np.abs(self.coeffs).max(), np.abs(other.coeffs).max())
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= rtol * scale))


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """Coefficients of outer(inner(z)) through the common order."""
    outer._check(inner)
    if inner.coeffs[0] != 0:
        raise SeriesError("inner series must have zero constant term")
    n = outer.order
    result = np.zeros(n + 1, dtype=complex)
    result[0] = outer.coeffs[0]
    power = np.zeros(n + 1, dtype=complex)
    power[0] = 1.0
    for k in range(1, n + 1):
        power = np.convolve(power, inner.coeffs)[: n + 1]
        if outer.coeffs[k] != 0:
            result += outer.coeffs[k] * power
    return TruncatedSeries(result, n)


def series_self_iterate(f: TruncatedSeries, n: int) -> TruncatedSeries:
    if n < 1:
        raise SeriesError("iteration count must be positive")
    g = f
    for _ in range(n - 1):
        g = series_compose(f, g)
    return g


def series_inverse(f: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of a series tangent to a nonzero multiple of z."""
    if f.coeffs[0] != 0 or f.coeffs[1] == 0:
        raise SeriesError("series is not locally invertible at 0")
    n = f.order
    g = TruncatedSeries([0, 1 / f.coeffs[1]], n)
    # each Newton-free correction pass fixes one more coefficient
    for _ in range(n):
        err = series_compose(f, g) - TruncatedSeries.identity(n)
        g = g - err * (1 / f.coeffs[1])
    return g


def _trim(c: np.ndarray, rtol: float) -> np.ndarray:
    if len(c) == 0:
        return np.zeros(1, dtype=complex)
    tol = rtol * (1.0 + np.abs(c).max())
    last = len(c) - 1
    while last > 0 and abs(c[last]) < tol:
        last -= 1
    return c[: last + 1]


@dataclass(frozen=True)
class DensePolynomial:
    """Polynomial with complex coefficients in ascending degree."""

    coeffs: np.ndarray = field(repr=True)

    def __init__(self, coeffs: Sequence[complex], rtol: float = TRIM_RTOL):
        c = _trim(_as_coeffs(coeffs), rtol)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def __add__(self, other: "DensePolynomial") -> "DensePolynomial":
        return DensePolynomial(np.polynomial.polynomial.polyadd(self.coeffs, other.coeffs))

    def __mul__(self, other):
        if isinstance(other, DensePolynomial):
            return DensePolynomial(np.polynomial.polynomial.polymul(self.coeffs, other.coeffs))
        return DensePolynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def derivative(self) -> "DensePolynomial":
        if self.degree == 0:
            return DensePolynomial([0])
        return DensePolynomial(np.polynomial.polynomial.polyder(self.coeffs))

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> "DensePolynomial":
        return cls(np.polynomial.polynomial.polyfromroots(roots))


@dataclass(frozen=True)
class RootSet:
    roots: tuple[complex, ...]
    residuals: tuple[float, ...]
    converged: bool = True
    sweeps: int = 0

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


class RootFindingError(RuntimeError):
    def __init__(self, message: str, best: RootSet):
        super().__init__(message)
        self.best = best


def _bounded_residual(c: np.ndarray, z: complex) -> float:
    # |p(z)| plus a rounding-error bound for Horner's rule
    val = 0j
    mag = 0.0
    az = abs(z)
    for k in range(len(c) - 1, -1, -1):
        val = val * z + c[k]
        mag = mag * az + abs(c[k])
    return abs(val) + 4 * np.finfo(float).eps * len(c) * mag


def poly_roots(p: DensePolynomial, *, strict: bool = True) -> RootSet:
    """All roots of p by Aberth-Ehrlich simultaneous iteration.

    With strict=True a RootFindingError carrying the best iterate is raised
    when the sweep budget runs out; otherwise the result is flagged.
    """
    c = np.asarray(p.coeffs, dtype=complex)
    deg = len(c) - 1
    if deg < 1:
        raise ValueError("polynomial must have degree at least 1")
    lead = c[-1]
    tol = ROOT_RTOL * (1.0 + np.abs(c).max())

    radius = 1.0 + np.max(np.abs(c[:-1] / lead)) ** (1.0 / deg)
    # offset angle avoids starting symmetric configurations on symmetric inputs
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = radius * np.exp(1j * angles)
    dc = np.polynomial.polynomial.polyder(c)

    done = np.zeros(deg, dtype=bool)
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        for i in range(deg):
            if done[i]:
                continue
            pv = np.polynomial.polynomial.polyval(z[i], c)
            if abs(pv) < tol:
                done[i] = True
                continue
            ratio = pv / np.polynomial.polynomial.polyval(z[i], dc)
            diff = z[i] - np.delete(z, i)
            rep = np.sum(1.0 / diff) if deg > 1 else 0.0
            z[i] = z[i] - ratio / (1.0 - ratio * rep)
        if done.all():
            break
    # polish: a few plain Newton steps tighten clustered roots
    for i in range(deg):
        for _ in range(3):
            d = np.polynomial.polynomial.polyval(z[i], dc)
            if d == 0:
                break
            step = np.polynomial.polynomial.polyval(z[i], c) / d
            cand = z[i] - step
            if abs(np.polynomial.polynomial.polyval(cand, c)) < abs(
                np.polynomial.polynomial.polyval(z[i], c)
            ):
                z[i] = cand
    res = tuple(_bounded_residual(c, complex(r)) for r in z)
    ok = all(abs(np.polynomial.polynomial.polyval(r, c)) < tol for r in z)
    out = RootSet(tuple(complex(r) for r in z), res, ok, sweeps)
    if not ok and strict:
        raise RootFindingError("root iteration did not converge", out)
    return out
