"""Coefficient fields A(x) for the operator -div(A grad)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

KINDS = ("identity", "constant-SPD", "preset-analytic")
ANALYTIC_PRESETS = ("scalar-linear", "rotating")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Symmetric uniformly elliptic matrix field.

    Presets (``kind='preset-analytic'``):

    * ``scalar-linear``: A(x) = (1 + gamma (x - c).a) A0 with unit vector a;
      Lipschitz constant gamma |A0|.
    * ``rotating``: A(x) = R(k x_1) diag(l1, l2) R(k x_1)^T with
      k = gamma / (l1 - l2); Lipschitz constant gamma.
    """

    kind: str = "identity"
    params: dict = field(default_factory=dict)
    Lambda: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"coefficient kind must be one of {KINDS}")
        if self.Lambda < 1:
            raise InputError("ellipticity bound Lambda must be >= 1")
        if self.gamma < 0:
            raise InputError("Lipschitz bound gamma must be >= 0")
        if self.kind == "constant-SPD":
            m = np.asarray(self.params.get("matrix"), dtype=float)
            if m.shape != (2, 2) or not np.allclose(m, m.T, atol=1e-14):
                raise InputError("constant-SPD needs a symmetric 2x2 'matrix'")
            self._check_spd(m[None], np.zeros((1, 2)))
        if self.kind == "preset-analytic":
            name = self.params.get("name")
            if name not in ANALYTIC_PRESETS:
                raise InputError(f"analytic preset must be one of {ANALYTIC_PRESETS}")

    @property
    def is_constant(self):
        return self.kind != "preset-analytic" or self.gamma == 0.0

    def _check_spd(self, mats, pts):
        ev = np.linalg.eigvalsh(mats)
        lo, hi = 1.0 / self.Lambda, self.Lambda
        bad = np.flatnonzero((ev[:, 0] < lo * (1 - 1e-12)) | (ev[:, 1] > hi * (1 + 1e-12)))
        if len(bad):
            i = bad[0]
            raise InputError(
                f"A(x) violates ellipticity {lo:.4g} <= eig <= {hi:.4g} at x = {pts[i].tolist()} "
                f"(eigenvalues {ev[i].tolist()})")

    def __call__(self, pts, check=True):
        """Evaluate A at points; returns an (n, 2, 2) array."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = len(pts)
        if self.kind == "identity":
            out = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
        elif self.kind == "constant-SPD":
            out = np.broadcast_to(np.asarray(self.params["matrix"], dtype=float), (n, 2, 2)).copy()
        else:
            name = self.params["name"]
            if name == "scalar-linear":
                a = np.asarray(self.params.get("direction", [1.0, 0.0]), dtype=float)
                a = a / np.linalg.norm(a)
                c = np.asarray(self.params.get("center", [0.0, 0.0]), dtype=float)
                A0 = np.asarray(self.params.get("matrix", np.eye(2)), dtype=float)
                s = 1.0 + self.gamma * ((pts - c) @ a) / max(np.linalg.norm(A0, 2), 1e-300)
                out = s[:, None, None] * A0[None]
            else:  # rotating
                l1, l2 = self.params.get("eigenvalues", [1.25, 0.8])
                k = self.gamma / (l1 - l2)
                th = k * pts[:, 0]
                c, s = np.cos(th), np.sin(th)
                out = np.empty((n, 2, 2))
                out[:, 0, 0] = l1 * c * c + l2 * s * s
                out[:, 1, 1] = l1 * s * s + l2 * c * c
                out[:, 0, 1] = out[:, 1, 0] = (l1 - l2) * c * s
        if check:
            self._check_spd(out, pts)
        return out

    def spot_check_lipschitz(self, pts, seed=0, pairs=1000):
        """Largest observed |A(x) - A(y)| / |x - y| over random pairs of pts."""
        rng = np.random.default_rng(seed)
        pts = np.asarray(pts, dtype=float)
        i = rng.integers(0, len(pts), pairs)
        j = rng.integers(0, len(pts), pairs)
        keep = i != j
        d = np.linalg.norm(pts[i[keep]] - pts[j[keep]], axis=1)
        keep2 = d > 0
        diff = self(pts[i[keep]][keep2]) - self(pts[j[keep]][keep2])
        return float(np.max(np.linalg.norm(diff, ord=2, axis=(1, 2)) / d[keep2])) if keep2.any() else 0.0

    def to_dict(self):
        return {"kind": self.kind, "params": _jsonable(self.params), "Lambda": self.Lambda,
                "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d):
        return cls(d.get("kind", "identity"), dict(d.get("params", {})),
                   float(d.get("Lambda", 1.0)), float(d.get("gamma", 0.0)))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def identity():
    return CoefficientField("identity")


def constant(matrix, Lambda=None):
    m = np.asarray(matrix, dtype=float)
    ev = np.linalg.eigvalsh(m)
    lam = max(ev[-1], 1.0 / ev[0], 1.0) if Lambda is None else Lambda
    return CoefficientField("constant-SPD", {"matrix": m.tolist()}, float(lam), 0.0)
