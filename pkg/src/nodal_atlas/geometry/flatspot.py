"""Almost flat spots of convex graphs.

For a convex phi on [-a, a] and a scale r, the search slides a window of
half-width r over candidate bases y in [-a/2, a/2] and picks the window with
the least second-derivative mass, measured by the one-sided difference
quotients D+phi(y + r) - D-phi(y - r).  The support line at the minimiser
then approximates phi to order r^2 on the window.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError

CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class SupportPlane:
    base: float
    slope: float
    value: float  # phi(base)

    def __call__(self, x):
        return self.value + self.slope * (np.asarray(x, dtype=float) - self.base)


@dataclass(frozen=True)
class FlatSpot:
    base: float
    plane: SupportPlane
    defect: float
    r: float
    score: float

    @property
    def ratio(self):
        return self.defect / self.r**2


def check_convex(phi, a, step, tol=CONVEXITY_TOL):
    """Raise InputError at the first negative second difference on [-a, a]."""
    x = np.arange(-a + step, a - step / 2, step)
    x = x[np.abs(x) <= a - step]
    sd = phi(x - step) - 2 * phi(x) + phi(x + step)
    scale = max(1.0, float(np.max(np.abs(phi(x)))))
    bad = np.flatnonzero(sd < -tol * scale)
    if len(bad):
        i = bad[0]
        raise InputError(f"graph is not convex: second difference {sd[i]:.3e} at x = {x[i]:.6g}")


def total_variation_of_slope(phi, a, n=20001):
    """TV of phi' on [-a, a] for convex phi equals phi'(a-) - phi'(-a+)."""
    x = np.linspace(-a, a, n)
    d = np.diff(phi(x)) / np.diff(x)
    return float(d[-1] - d[0])


def find_flat_spot(phi, r, a, base_step=None, quotient_step=None, defect_samples=1025):
    """Locate an almost flat spot of the convex graph ``phi`` on [-a, a].

    ``phi`` is a callable; if it has a ``derivative`` method the analytic
    slope (clamped to the discrete one-sided quotients) is used for the
    support line, otherwise the midpoint of the two one-sided quotients.
    Candidate bases are spaced r/16 and quotients use step r/64 unless
    overridden.
    """
    r = float(r)
    a = float(a)
    if not (0 < r < a / 2):
        raise InputError(f"need 0 < r < a/2 (r = {r}, a = {a})")
    h_base = r / 16 if base_step is None else base_step
    delta = r / 64 if quotient_step is None else quotient_step
    check_convex(phi, a, delta)

    n_base = int(np.floor((a / 2) / h_base + 1e-9))
    ys = h_base * np.arange(-n_base, n_base + 1)

    def dplus(x):
        return (phi(x + delta) - phi(x)) / delta

    def dminus(x):
        return (phi(x) - phi(x - delta)) / delta

    score = dplus(ys + r) - dminus(ys - r)
    tie = 1e-12 * max(1.0, float(np.max(np.abs(score))))
    i = int(np.flatnonzero(score <= score.min() + tie)[0])  # smallest minimising base
    y = float(ys[i])
    lo, hi = float(dminus(y)), float(dplus(y))
    if hasattr(phi, "derivative"):
        slope = float(np.clip(phi.derivative(y), lo, hi))
    else:
        slope = 0.5 * (lo + hi)
    plane = SupportPlane(y, slope, float(phi(y)))
    xs = np.linspace(y - r, y + r, defect_samples)
    defect = float(np.max(phi(xs) - plane(xs)))
    return FlatSpot(y, plane, max(defect, 0.0), r, float(score[i]))


def support_violation(phi, plane: SupportPlane, a, step):
    """min over the sample grid of phi - P (>= -tol for a valid support line)."""
    x = np.arange(-a, a + step / 2, step)
    x = x[np.abs(x) <= a]
    return float(np.min(phi(x) - plane(x)))
