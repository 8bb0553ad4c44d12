"""A quasiconvex graph that is neither convex nor C^1 on any interval.

phi_K(x) = int_0^x f_K(t) dt - x^2 with f_K(t) = sum_{k<=K} 2^-k 1{q_k < t}
for an enumeration q_1, q_2, ... of the rationals in (0, 1).  The second
derivative is the measure -2 dx + sum_k 2^-k delta_{q_k}: every interval
carries a point mass, yet most dyadic intervals have negative total mass.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from ..errors import InputError
from .curves import PiecewiseQuadratic

ENUMERATIONS = ("stern-brocot", "cantor-diagonal")


def enumerate_rationals(count, order="stern-brocot"):
    """First ``count`` rationals of (0, 1) in a deterministic order.

    ``stern-brocot`` lists the tree breadth first (1/2, 1/3, 2/3, 1/4, 2/5,
    3/5, 3/4, ...); ``cantor-diagonal`` lists p/q in lowest terms by
    increasing q, then p (1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...).
    """
    if count < 1:
        raise InputError("count must be >= 1")
    out = []
    if order == "stern-brocot":
        row = [Fraction(0), Fraction(1)]
        while len(out) < count:
            level = [Fraction(a.numerator + b.numerator, a.denominator + b.denominator)
                     for a, b in zip(row[:-1], row[1:])]
            out.extend(level)
            merged = [row[0]]
            for m, b in zip(level, row[1:]):
                merged.extend((m, b))
            row = merged
    elif order == "cantor-diagonal":
        q = 2
        while len(out) < count:
            out.extend(Fraction(p, q) for p in range(1, q) if gcd(p, q) == 1)
            q += 1
    else:
        raise InputError(f"enumeration must be one of {ENUMERATIONS}")
    return out[:count]


@dataclass(frozen=True, eq=False)
class PathologicalCurve:
    """Exact truncated curve phi_K on [0, 1] together with its rationals."""

    K: int
    enumeration: str
    rationals: tuple
    curve: PiecewiseQuadratic

    @property
    def tail_mass(self):
        """Mass of the discarded point masses, sum_{k>K} 2^-k = 2^-K."""
        return 2.0 ** (-self.K)

    def __call__(self, x):
        return self.curve(x)

    def derivative(self, x):
        return self.curve.derivative(x)


def pathological_curve(K=4096, enumeration="stern-brocot"):
    """Build phi_K as an exact piecewise quadratic with breakpoints at the q_k."""
    if int(K) != K or K < 1:
        raise InputError("K must be a positive integer")
    if enumeration not in ENUMERATIONS:
        raise InputError(f"enumeration must be one of {ENUMERATIONS}")
    qs = enumerate_rationals(int(K), enumeration)
    qf = np.array([float(q) for q in qs])
    weights = 2.0 ** (-np.arange(1, K + 1, dtype=float))
    order = np.argsort(qf, kind="stable")
    knots = np.concatenate([[0.0], qf[order], [1.0]])
    # f_K is constant between consecutive knots; F[i] = mass of q's at or left of knot i
    F = np.concatenate([[0.0], np.cumsum(weights[order])])
    widths = np.diff(knots)
    # phi at knots: integral of f minus x^2
    integral = np.concatenate([[0.0], np.cumsum(F * widths)])
    values = integral[:-1] - knots[:-1] ** 2
    c1 = F - 2.0 * knots[:-1]
    coeffs = np.column_stack([values, c1, -np.ones_like(c1)])
    curve = PiecewiseQuadratic(knots, coeffs, {"K": int(K), "enumeration": enumeration})
    return PathologicalCurve(int(K), enumeration, tuple(qs), curve)


@dataclass(frozen=True)
class MeasureReport:
    level: int
    masses: np.ndarray          # float values of phi''(I) per dyadic interval
    nonnegative: np.ndarray     # exact sign test, boolean per interval
    count_nonnegative: int
    bound_holds: bool           # count_nonnegative <= level


def second_derivative_measure(curve: PathologicalCurve, level: int) -> MeasureReport:
    """Exact phi''(I) = -2|I| + sum_{q_k in I} 2^-k on the 2^j dyadic
    intervals I = [m 2^-j, (m+1) 2^-j) of (0, 1).

    The computation is done in integers scaled by 2^K, so the sign of each
    mass is exact.  Point masses at dyadic endpoints go to the interval on
    their right (left-closed convention).
    """
    j = int(level)
    if j < 1:
        raise InputError("level must be >= 1")
    n = 2**j
    shift = max(curve.K, j)
    scaled = [-(2 << (shift - j))] * n
    for k, q in enumerate(curve.rationals, start=1):
        m = (q.numerator * n) // q.denominator
        scaled[m] += 1 << (shift - k)
    nonneg = np.array([v >= 0 for v in scaled])
    denom = Fraction(2) ** shift
    masses = np.array([float(Fraction(v) / denom) for v in scaled])
    count = int(nonneg.sum())
    return MeasureReport(j, masses, nonneg, count, count <= j)
