"""Monodromy ("mapping at a period") of the coupled Mathieu system.

The fundamental solution matrix is propagated over one forcing period
T = pi with the classical fixed-step fourth-order Runge-Kutta scheme.  All
four columns are advanced together.  The batch kernel keeps cells in the
innermost loop so LLVM can vectorize across operating points.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import TrapParams, _cos_sin_2theta

# prefer OpenMP so numba does not probe (and warn about) an old TBB first
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# symplectic form with the (x, y, x', y') ordering
J4 = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])

_CHUNK = 256


class Method(str, enum.Enum):
    RK4 = "RK4"


class IntegrationOverflowError(ArithmeticError):
    """The propagated solution matrix stopped being finite."""


@dataclass(frozen=True)
class IntegratorConfig:
    steps_per_period: int = 2048
    method: Method = Method.RK4

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if int(self.steps_per_period) != self.steps_per_period or self.steps_per_period < 16:
            raise ValueError(f"steps_per_period must be an integer >= 16, got {self.steps_per_period!r}")
        object.__setattr__(self, "steps_per_period", int(self.steps_per_period))


@dataclass(frozen=True)
class MonodromyMatrix:
    m: np.ndarray
    params: TrapParams

    def symplectic_residual(self) -> float:
        return symplectic_residual(self.m)

    def det_residual(self) -> float:
        return abs(float(np.linalg.det(self.m)) - 1.0)


def symplectic_residual(m: np.ndarray) -> float:
    """max-norm of U^T J U - J."""
    return float(np.abs(m.T @ J4 @ m - J4).max())


@numba.njit(cache=True)
def _cos_table(nsteps):
    h = math.pi / nsteps
    tab = np.empty((nsteps, 3))
    for n in range(nsteps):
        t = n * h
        tab[n, 0] = math.cos(2.0 * t)
        tab[n, 1] = math.cos(2.0 * t + h)
        tab[n, 2] = math.cos(2.0 * (t + h))
    return tab


@numba.njit(cache=True)
def _rk4_block(a1, a2, q11, q12, tab, out):
    # a1, a2: diagonal of A; q11, q12: entries of Q (Q22 = -q11)
    n = a1.shape[0]
    nsteps = tab.shape[0]
    h = math.pi / nsteps
    hh = 0.5 * h
    h6 = h / 6.0
    S = np.zeros((4, 4, n))
    for col in range(4):
        for k in range(n):
            S[col, col, k] = 1.0
    for step in range(nsteps):
        c0 = 2.0 * tab[step, 0]
        cm = 2.0 * tab[step, 1]
        c1 = 2.0 * tab[step, 2]
        for col in range(4):
            for k in range(n):
                x = S[0, col, k]
                y = S[1, col, k]
                u = S[2, col, k]
                v = S[3, col, k]
                m11 = a1[k] + q11[k] * c0
                m12 = q12[k] * c0
                m22 = a2[k] - q11[k] * c0
                k1u = -(m11 * x + m12 * y)
                k1v = -(m12 * x + m22 * y)
                m11 = a1[k] + q11[k] * cm
                m12 = q12[k] * cm
                m22 = a2[k] - q11[k] * cm
                xx = x + hh * u
                yy = y + hh * v
                k2x = u + hh * k1u
                k2y = v + hh * k1v
                k2u = -(m11 * xx + m12 * yy)
                k2v = -(m12 * xx + m22 * yy)
                xx = x + hh * k2x
                yy = y + hh * k2y
                k3x = u + hh * k2u
                k3y = v + hh * k2v
                k3u = -(m11 * xx + m12 * yy)
                k3v = -(m12 * xx + m22 * yy)
                m11 = a1[k] + q11[k] * c1
                m12 = q12[k] * c1
                m22 = a2[k] - q11[k] * c1
                xx = x + h * k3x
                yy = y + h * k3y
                k4x = u + h * k3u
                k4y = v + h * k3v
                k4u = -(m11 * xx + m12 * yy)
                k4v = -(m12 * xx + m22 * yy)
                S[0, col, k] = x + h6 * (u + 2.0 * k2x + 2.0 * k3x + k4x)
                S[1, col, k] = y + h6 * (v + 2.0 * k2y + 2.0 * k3y + k4y)
                S[2, col, k] = u + h6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
                S[3, col, k] = v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    for k in range(n):
        for i in range(4):
            for j in range(4):
                out[k, i, j] = S[i, j, k]


@numba.njit(cache=True, parallel=True)
def _rk4_batch(a1, a2, q11, q12, tab, out, chunk):
    n = a1.shape[0]
    nchunks = (n + chunk - 1) // chunk
    for c in numba.prange(nchunks):
        lo = c * chunk
        hi = min(lo + chunk, n)
        _rk4_block(a1[lo:hi], a2[lo:hi], q11[lo:hi], q12[lo:hi], tab, out[lo:hi])


@numba.njit(cache=True)
def _rk4_scalar2(a, q, tab):
    nsteps = tab.shape[0]
    h = math.pi / nsteps
    hh = 0.5 * h
    h6 = h / 6.0
    out = np.empty((2, 2))
    for col in range(2):
        x = 1.0 if col == 0 else 0.0
        u = 1.0 - x
        for step in range(nsteps):
            m0 = a + 2.0 * q * tab[step, 0]
            mm = a + 2.0 * q * tab[step, 1]
            m1 = a + 2.0 * q * tab[step, 2]
            k1u = -m0 * x
            k2x = u + hh * k1u
            k2u = -mm * (x + hh * u)
            k3x = u + hh * k2u
            k3u = -mm * (x + hh * k2x)
            k4x = u + h * k3u
            k4u = -m1 * (x + h * k3x)
            x, u = (x + h6 * (u + 2.0 * k2x + 2.0 * k3x + k4x),
                    u + h6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u))
        out[0, col] = x
        out[1, col] = u
    return out


_tables: dict[int, np.ndarray] = {}


def cos_table(nsteps: int) -> np.ndarray:
    tab = _tables.get(nsteps)
    if tab is None:
        tab = _cos_table(nsteps)
        tab.setflags(write=False)
        _tables[nsteps] = tab
    return tab


def monodromy_batch(q, a, alpha: float, theta: float,
                    cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Monodromy matrices for many (q, a) points sharing alpha and theta.

    Returns an array of shape ``(n, 4, 4)``.  Non-finite results are left in
    place; callers decide whether that is fatal.
    """
    q = np.ascontiguousarray(q, dtype=float).ravel()
    a = np.ascontiguousarray(a, dtype=float).ravel()
    if q.shape != a.shape:
        raise ValueError("q and a must have the same length")
    probe = TrapParams(0.0, 0.0, alpha, theta)
    c, s = _cos_sin_2theta(probe.theta)
    a1 = a
    a2 = -probe.alpha * a
    q11 = q * c
    q12 = q * s
    out = np.empty((q.size, 4, 4))
    if q.size:
        _rk4_batch(a1, a2, q11, q12, cos_table(cfg.steps_per_period), out, _CHUNK)
    return out


def monodromy(params: TrapParams, cfg: IntegratorConfig = IntegratorConfig()) -> MonodromyMatrix:
    """Mapping at a period U(pi) for one operating point.

    Raises
    ------
    IntegrationOverflowError
        If any entry of U(pi) is not finite.
    """
    m = monodromy_batch([params.q], [params.a], params.alpha, params.theta, cfg)[0]
    if not np.all(np.isfinite(m)):
        raise IntegrationOverflowError(
            f"non-finite monodromy at q={params.q!r}, a={params.a!r}, "
            f"alpha={params.alpha!r}, theta={params.theta!r}")
    m.setflags(write=False)
    return MonodromyMatrix(m=m, params=params)


def monodromy_2x2(a_eff: float, q_eff: float, cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Monodromy of the single-variable equation x'' + (a + 2q cos 2tau) x = 0."""
    if not (math.isfinite(a_eff) and math.isfinite(q_eff)):
        raise ValueError("a_eff and q_eff must be finite")
    m = _rk4_scalar2(float(a_eff), float(q_eff), cos_table(cfg.steps_per_period))
    if not np.all(np.isfinite(m)):
        raise IntegrationOverflowError(f"non-finite monodromy at a={a_eff!r}, q={q_eff!r}")
    return m


def set_threads(n: int | None) -> int:
    """Cap numba parallelism; ``0`` or ``None`` means all available threads."""
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if not n else max(1, min(int(n), limit))
    numba.set_num_threads(n)
    return n
