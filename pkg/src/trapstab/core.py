"""Parametrization of the coupled two-variable Mathieu system.

The radial motion of an ion near the centre of a surface trap obeys

    x'' + a x + 2q (c x + s y) cos 2tau = 0
    y'' - alpha a y + 2q (s x - c y) cos 2tau = 0

with c = cos 2theta, s = sin 2theta.  Coordinates are aligned with the DC
principal axes and theta is the angle between the RF and DC axes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Raised for operating points outside the supported parameter domain."""


def normalize_theta(theta: float) -> float:
    """Fold an angle in degrees into [0, 90].

    The equations of motion only see 2*theta, and theta -> 180 - theta is
    undone by the reflection y -> -y, so every angle has an equivalent in
    [0, 90].
    """
    if not math.isfinite(theta):
        raise ParameterError(f"theta must be finite, got {theta!r}")
    t = math.fmod(theta, 180.0)
    if t < 0.0:
        t += 180.0
    if t > 90.0:
        t = 180.0 - t
    return t


def _cos_sin_2theta(theta: float) -> tuple[float, float]:
    # exact at the special angles; theta > 45 is folded so that the
    # pair (theta, 90 - theta) gives c -> -c, s -> s bit-for-bit
    if theta == 0.0:
        return 1.0, 0.0
    if theta == 45.0:
        return 0.0, 1.0
    if theta == 90.0:
        return -1.0, 0.0
    if theta > 45.0:
        phi = math.radians(2.0 * (90.0 - theta))
        return -math.cos(phi), math.sin(phi)
    phi = math.radians(2.0 * theta)
    return math.cos(phi), math.sin(phi)


@dataclass(frozen=True)
class TrapParams:
    """Dimensionless operating point (q, a, alpha, theta).

    ``theta`` is in degrees and is normalized into [0, 90] on construction.
    ``a`` may take either sign; ``alpha`` must be strictly positive.
    """

    q: float
    a: float
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        for name in ("q", "a", "alpha", "theta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0.0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha!r}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "theta", normalize_theta(float(self.theta)))

    @property
    def c(self) -> float:
        return _cos_sin_2theta(self.theta)[0]

    @property
    def s(self) -> float:
        return _cos_sin_2theta(self.theta)[1]

    def with_a(self, a: float) -> TrapParams:
        return TrapParams(self.q, a, self.alpha, self.theta)


@dataclass(frozen=True)
class CoefficientMatrices:
    """DC stiffness matrix ``A`` (diagonal) and traceless RF matrix ``Q``."""

    A: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        for m in (self.A, self.Q):
            m.setflags(write=False)

    def stiffness(self, tau: float) -> np.ndarray:
        """Return ``A + 2 Q cos(2 tau)``, the instantaneous restoring matrix."""
        return self.A + 2.0 * self.Q * math.cos(2.0 * tau)


def build_matrices(params: TrapParams) -> CoefficientMatrices:
    """Construct the coefficient matrices for an operating point.

    Q is built from q*cos(2 theta) and q*sin(2 theta) with Q22 set to -Q11,
    so its trace vanishes exactly.
    """
    c, s = _cos_sin_2theta(params.theta)
    q11 = params.q * c
    q12 = params.q * s
    A = np.array([[params.a, 0.0], [0.0, -params.alpha * params.a]])
    Q = np.array([[q11, q12], [q12, -q11]])
    return CoefficientMatrices(A=A, Q=Q)


def generator(tau: float, m: CoefficientMatrices) -> np.ndarray:
    """4x4 matrix G(tau) of the first-order system u' = G(tau) u."""
    G = np.zeros((4, 4))
    G[:2, 2:] = np.eye(2)
    G[2:, :2] = -m.stiffness(tau)
    return G


def rhs(tau: float, u, m: CoefficientMatrices) -> np.ndarray:
    """Time derivative of the state ``u = (x, y, x', y')`` at scaled time tau."""
    u = np.asarray(u, dtype=float)
    K = m.stiffness(tau)
    du = np.empty(4)
    du[:2] = u[2:]
    du[2:] = -(K @ u[:2])
    return du


class CurveMethod(str, enum.Enum):
    HILL = "Hill"
    MULTISCALE = "MultiScale"
    DECOUPLED_MULTISCALE = "DecoupledMultiScale"


@dataclass
class BoundaryCurve:
    """A labelled polyline in the (q, a) plane, ordered by strictly increasing q."""

    label: str
    method: CurveMethod
    points: list[tuple[float, float]] = field(default_factory=list)
    truncated: bool = False

    def __post_init__(self):
        self.method = CurveMethod(self.method)
        qs = [p[0] for p in self.points]
        if any(q1 <= q0 for q0, q1 in zip(qs, qs[1:])):
            raise ValueError(f"curve {self.label!r}: q must be strictly increasing")

    @property
    def q(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def a(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=float)
