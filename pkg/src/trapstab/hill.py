"""Truncated infinite-determinant (Hill) method for the coupled system.

Substituting x(tau) = exp(i nu tau) sum_n b_n exp(2 i n tau), with b_n a
2-vector, into the equations of motion gives the block-tridiagonal system

    (-(nu + 2n)^2 I + A) b_n + Q (b_{n-1} + b_{n+1}) = 0,

so the diagonal blocks are diag(-(nu+2n)^2 + a, -(nu+2n)^2 - alpha a) and
every off-diagonal block is Q.  With nu = 0 or 1 the Floquet multiplier is
+1 or -1 and the zeros of the determinant trace natural-resonance
boundaries.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import BoundaryCurve, CurveMethod, TrapParams, _cos_sin_2theta

DEFAULT_ORDER = 20
ZERO_DIAGONAL = 1e-12
_PIVOT_TOL = 1e-10


class CurveTruncatedWarning(UserWarning):
    """A Hill boundary left the search bracket and was cut short."""


@dataclass(frozen=True)
class HillDeterminant:
    value: float
    unnormalized_rows: tuple[int, ...]
    sign: float


def _check(nu, order):
    if nu not in (0, 1):
        raise ValueError(f"nu must be 0 or 1, got {nu!r}")
    if int(order) != order or order < 3:
        raise ValueError(f"order must be an integer >= 3, got {order!r}")


def _diagonals(nu, a, alpha, order):
    n = np.arange(-order, order + 1)
    w2 = (nu + 2.0 * n) ** 2
    dx = a[:, None] - w2[None, :]
    dy = -alpha * a[:, None] - w2[None, :]
    return dx, dy


def _dense(nu, a, alpha, q11, q12, order, normalize=True):
    n = np.arange(-order, order + 1)
    K = n.size
    B = np.zeros((2 * K, 2 * K))
    w2 = (nu + 2.0 * n) ** 2
    B[0::2, 0::2] = np.diag(a - w2)
    B[1::2, 1::2] = np.diag(-alpha * a - w2)
    Q = np.array([[q11, q12], [q12, -q11]])
    for k in range(K - 1):
        B[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = Q
        B[2 * k + 2:2 * k + 4, 2 * k:2 * k + 2] = Q
    if normalize:
        d = np.diag(B).copy()
        r = np.where(np.abs(d) < ZERO_DIAGONAL, 1.0, d)
        B = B / r[:, None]
    return B


def hill_matrix(nu: int, params: TrapParams, order: int = DEFAULT_ORDER,
                normalize: bool = False) -> np.ndarray:
    """Dense truncated coefficient matrix with rows ordered (x_n, y_n), n = -N..N."""
    _check(nu, order)
    c, s = _cos_sin_2theta(params.theta)
    return _dense(nu, params.a, params.alpha, params.q * c, params.q * s, order, normalize)


def _hill_det_vec(nu, a, alpha, q11, q12, order):
    """Normalized determinant and sign of the row scalings, vectorized over ``a``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    dx, dy = _diagonals(nu, a, alpha, order)
    rx = np.where(np.abs(dx) < ZERO_DIAGONAL, 1.0, dx)
    ry = np.where(np.abs(dy) < ZERO_DIAGONAL, 1.0, dy)
    # normalized diagonal entries are 1 except on fallback rows
    ex = dx / rx
    ey = dy / ry
    det = np.ones(a.size)
    bad = np.zeros(a.size, dtype=bool)
    # Schur complement S = [[s11, s12], [s21, s22]] of the leading blocks
    s11, s12, s21, s22 = ex[:, 0].copy(), np.zeros(a.size), np.zeros(a.size), ey[:, 0].copy()
    # rows with a singular pivot go non-finite here and are redone densely below
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(1, 2 * order + 1):
            ds = s11 * s22 - s12 * s21
            scale = np.maximum(np.abs(s11) + np.abs(s12), np.abs(s21) + np.abs(s22)) ** 2
            bad |= ~(np.abs(ds) > _PIVOT_TOL * scale)
            det *= ds
            i11, i12, i21, i22 = s22 / ds, -s12 / ds, -s21 / ds, s11 / ds
            # L = R_k Q, Uprev = R_{k-1} Q; S_k = D_k - L S^{-1} Uprev
            u11, u12 = q11 / rx[:, k - 1], q12 / rx[:, k - 1]
            u21, u22 = q12 / ry[:, k - 1], -q11 / ry[:, k - 1]
            l11, l12 = q11 / rx[:, k], q12 / rx[:, k]
            l21, l22 = q12 / ry[:, k], -q11 / ry[:, k]
            t11 = i11 * u11 + i12 * u21
            t12 = i11 * u12 + i12 * u22
            t21 = i21 * u11 + i22 * u21
            t22 = i21 * u12 + i22 * u22
            s11 = ex[:, k] - (l11 * t11 + l12 * t21)
            s12 = -(l11 * t12 + l12 * t22)
            s21 = -(l21 * t11 + l22 * t21)
            s22 = ey[:, k] - (l21 * t12 + l22 * t22)
        det *= s11 * s22 - s12 * s21
    bad |= ~np.isfinite(det)
    for i in np.flatnonzero(bad):
        det[i] = np.linalg.det(_dense(nu, a[i], alpha, q11, q12, order))
    sign = np.prod(np.sign(rx), axis=1) * np.prod(np.sign(ry), axis=1)
    flagged = np.abs(dx) < ZERO_DIAGONAL, np.abs(dy) < ZERO_DIAGONAL
    return det, sign, flagged


def hill_det(nu: int, params: TrapParams, order: int = DEFAULT_ORDER,
             return_flags: bool = False) -> float | HillDeterminant:
    """Row-normalized truncated Hill determinant.

    Each row is divided by its diagonal entry; rows whose diagonal entry is
    within 1e-12 of zero are left unscaled and reported when
    ``return_flags`` is set, as row indices into :func:`hill_matrix`.
    Evaluation uses block elimination on the 2x2 blocks, falling back to a
    pivoted dense LU when a leading block is numerically singular.
    """
    _check(nu, order)
    c, s = _cos_sin_2theta(params.theta)
    det, sign, (fx, fy) = _hill_det_vec(nu, [params.a], params.alpha, params.q * c, params.q * s, order)
    value = float(det[0])
    if not return_flags:
        return value
    rows = sorted([2 * int(k) for k in np.flatnonzero(fx[0])] + [2 * int(k) + 1 for k in np.flatnonzero(fy[0])])
    return HillDeterminant(value=value, unnormalized_rows=tuple(rows), sign=float(sign[0]))


def _signed_det(nu, a, alpha, q11, q12, order):
    # same sign as the unnormalized determinant; no sign flips at the poles
    det, sign, _ = _hill_det_vec(nu, a, alpha, q11, q12, order)
    return det * sign


def hill_roots(nu: int, alpha: float, theta: float, q: float, order: int = DEFAULT_ORDER,
               a_bracket: tuple[float, float] = (-3.0, 2.0), scan_step: float = 1e-3,
               tol: float = 1e-8) -> np.ndarray:
    """All sign-change roots in ``a`` of the Hill determinant at fixed q.

    The bracket is scanned at ``scan_step`` and each sign change is refined
    by bisection until the bracketing interval is at most ``tol``.
    """
    _check(nu, order)
    theta = TrapParams(q, 0.0, alpha, theta).theta
    c, s = _cos_sin_2theta(theta)
    q11, q12 = q * c, q * s
    lo_a, hi_a = map(float, a_bracket)
    npts = max(3, int(math.ceil((hi_a - lo_a) / scan_step)) + 1)
    grid = np.linspace(lo_a, hi_a, npts)
    f = _signed_det(nu, grid, alpha, q11, q12, order)
    sg = np.sign(f)
    exact = np.flatnonzero(sg == 0)
    idx = np.flatnonzero(sg[:-1] * sg[1:] < 0)
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    flo = sg[idx].copy()
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = np.sign(_signed_det(nu, mid, alpha, q11, q12, order))
        same = fm == flo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(mid == lo) and np.all(mid == hi):
            break
    roots = np.concatenate([0.5 * (lo + hi), grid[exact]])
    return np.sort(roots)


def _string_curves(samples, bracket, label_prefix):
    """Connect per-q roots into curves by nearest-neighbour continuation."""
    lo_a, hi_a = bracket
    finished: list[list[tuple[float, float]]] = []
    truncated: list[bool] = []
    active: list[list[tuple[float, float]]] = []

    def close(curve):
        # a curve whose linear extrapolation leaves the bracket was cut by it
        cut = False
        if len(curve) >= 2:
            (q0, a0), (q1, a1) = curve[-2], curve[-1]
            nxt = a1 + (a1 - a0)
            cut = nxt < lo_a or nxt > hi_a
        finished.append(curve)
        truncated.append(cut)

    for q, roots in samples:
        roots = list(roots)
        if len(roots) >= 2:
            thr = 5.0 * float(np.median(np.diff(roots)))
        else:
            thr = hi_a - lo_a
        pairs = sorted(((abs(cur[-1][1] - r), ci, ri)
                        for ci, cur in enumerate(active) for ri, r in enumerate(roots)))
        used_c, used_r = set(), set()
        for d, ci, ri in pairs:
            if ci in used_c or ri in used_r or d > thr:
                continue
            used_c.add(ci)
            used_r.add(ri)
            active[ci].append((q, roots[ri]))
        still = []
        for ci, cur in enumerate(active):
            if ci in used_c:
                still.append(cur)
            else:
                close(cur)
        for ri, r in enumerate(roots):
            if ri not in used_r:
                still.append([(q, r)])
        active = still
    for cur in active:
        finished.append(cur)
        truncated.append(False)
    order = sorted(range(len(finished)), key=lambda k: (finished[k][0][0], finished[k][0][1]))
    curves = []
    for n, k in enumerate(order):
        curves.append(BoundaryCurve(label=f"{label_prefix} #{n}", method=CurveMethod.HILL,
                                    points=finished[k], truncated=truncated[k]))
    return curves


def hill_boundary(nu: int, alpha: float, theta: float, q_samples, order: int = DEFAULT_ORDER,
                  a_bracket: tuple[float, float] = (-3.0, 2.0), scan_step: float = 1e-3,
                  tol: float = 1e-8) -> list[BoundaryCurve]:
    """Natural-resonance boundary curves for multiplier +1 (nu=0) or -1 (nu=1).

    Curves that run out of ``a_bracket`` are returned with ``truncated`` set
    and a :class:`CurveTruncatedWarning` is issued for each.
    """
    qs = np.unique(np.asarray(q_samples, dtype=float))
    samples = [(float(q), hill_roots(nu, alpha, theta, float(q), order, a_bracket, scan_step, tol))
               for q in qs]
    curves = _string_curves(samples, tuple(map(float, a_bracket)), f"hill nu={nu}")
    for cur in curves:
        if cur.truncated:
            q_end, a_end = cur.points[-1]
            warnings.warn(f"{cur.label} left the bracket {tuple(a_bracket)} after q={q_end:.6g} "
                          f"(a={a_end:.6g})", CurveTruncatedWarning, stacklevel=2)
    return curves
