"""Closed-form boundary curves from the two-time-scale perturbation expansion.

Each curve has the form a = a0 + a1 q + a2 q^2.  Around a = 0 the coupled
and decoupled systems share the boundaries -q^2/2 and q^2/(2 alpha).  The
curve from a = 1 and its mirror from a = -1/alpha pick up a coupling
correction proportional to s^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundaryCurve, CurveMethod, ParameterError, TrapParams, _cos_sin_2theta


@dataclass(frozen=True)
class MultiscaleCoeffs:
    a0: float
    a1: float
    a2: float

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return self.a0 + self.a1 * q + self.a2 * q ** 2


def _coupling(c: float, s: float, alpha: float) -> float:
    return c * c / 8.0 + 2.0 * s * s * (5.0 + alpha) / ((1.0 + alpha) * (9.0 + alpha))


def coupled_coeffs(alpha: float, theta: float) -> dict[str, MultiscaleCoeffs]:
    """Expansion coefficients of the four coupled boundaries.

    The first-order term uses |cos 2theta|, which selects the branch bounding
    the primary region for every theta in [0, 90].
    """
    p = TrapParams(0.0, 0.0, alpha, theta)
    c, s = _cos_sin_2theta(p.theta)
    c = abs(c)
    al = p.alpha
    k_pos = _coupling(c, s, al)
    k_neg = _coupling(c, s, 1.0 / al)
    return {
        "a0_lower": MultiscaleCoeffs(0.0, 0.0, -0.5),
        "a0_upper": MultiscaleCoeffs(0.0, 0.0, 0.5 / al),
        "a1_coupled": MultiscaleCoeffs(1.0, -c, -k_pos),
        "a_neg_coupled": MultiscaleCoeffs(-1.0 / al, c / al, k_neg / al),
    }


def decoupled_coeffs(alpha: float) -> dict[str, MultiscaleCoeffs]:
    """Both branches of the classical a = 1 +- q - q^2/8 pair and their y-axis images."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha!r}")
    al = float(alpha)
    return {
        "a1_minus": MultiscaleCoeffs(1.0, -1.0, -0.125),
        "a1_plus": MultiscaleCoeffs(1.0, 1.0, -0.125),
        "aneg_minus": MultiscaleCoeffs(-1.0 / al, 1.0 / al, 0.125 / al),
        "aneg_plus": MultiscaleCoeffs(-1.0 / al, -1.0 / al, 0.125 / al),
    }


def _q_grid(q_samples) -> np.ndarray:
    q = np.unique(np.asarray(q_samples, dtype=float))
    if q.size and (q[0] < 0 or not np.all(np.isfinite(q))):
        raise ValueError("q samples must be finite and non-negative")
    return q


def _curves(coeffs, q, method):
    return [BoundaryCurve(label=name, method=method,
                          points=[(float(x), float(y)) for x, y in zip(q, c(q))])
            for name, c in coeffs.items()]


def coupled_boundaries(alpha: float, theta: float, q_samples) -> list[BoundaryCurve]:
    """Sample the four coupled boundary curves on ``q_samples`` (q >= 0)."""
    return _curves(coupled_coeffs(alpha, theta), _q_grid(q_samples), CurveMethod.MULTISCALE)


def decoupled_boundaries(alpha: float, q_samples) -> list[BoundaryCurve]:
    """Sample the classical single-variable boundaries used as an overlay."""
    return _curves(decoupled_coeffs(alpha), _q_grid(q_samples), CurveMethod.DECOUPLED_MULTISCALE)


def decoupled_primary_region(alpha: float, q, a) -> np.ndarray:
    """Mask of points enclosed by the decoupled boundary overlay near the origin.

    Inside means above both -q^2/2 and the lower a = -1/alpha branch, and
    below both q^2/(2 alpha) and the lower a = 1 branch.
    """
    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    d = decoupled_coeffs(alpha)
    lower = np.maximum(-0.5 * q ** 2, d["aneg_minus"](q))
    upper = np.minimum(0.5 * q ** 2 / alpha, d["a1_minus"](q))
    return (a > lower) & (a < upper)
