"""Floquet multipliers, stability classification and eigenvalue tracing."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import TrapParams
from .integrator import IntegratorConfig, MonodromyMatrix, monodromy, monodromy_batch

TOL_UNIT = 1e-6
TOL_DEGENERATE = 1e-6
SPECTRUM_RESIDUAL_TOL = 1e-8


class SpectrumError(ArithmeticError):
    """Eigenvalues could not be obtained to the required residual."""


class InconsistentSpectrumError(ArithmeticError):
    """An odd number of unit-modulus multipliers; the spectrum is not symplectic."""


class Stability(str, enum.Enum):
    FULLY_STABLE = "FullyStable"
    PARTIALLY_STABLE = "PartiallyStable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"
    ERROR = "Error"


# integer codes used in grid arrays
CODES = {
    Stability.FULLY_STABLE: 0,
    Stability.PARTIALLY_STABLE: 1,
    Stability.MARGINAL: 2,
    Stability.UNSTABLE: 3,
    Stability.ERROR: 4,
}
LABELS = {v: k for k, v in CODES.items()}


@dataclass(frozen=True)
class EigenSpectrum:
    values: np.ndarray
    residual: float

    def moduli(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class StabilityClass:
    label: Stability
    unit_count: int

    def __post_init__(self):
        expected = {4: (Stability.FULLY_STABLE, Stability.MARGINAL),
                    2: (Stability.PARTIALLY_STABLE,),
                    0: (Stability.UNSTABLE,),
                    -1: (Stability.ERROR,)}
        if self.label not in expected.get(self.unit_count, ()):
            raise ValueError(f"label {self.label} inconsistent with unit_count {self.unit_count}")

    @property
    def code(self) -> int:
        return CODES[self.label]


ERROR_CLASS = StabilityClass(Stability.ERROR, -1)


def _charpoly_residual(m: np.ndarray, values: np.ndarray) -> np.ndarray:
    coeffs = np.poly(m)
    return np.abs(np.polyval(coeffs, values))


def spectrum(m: MonodromyMatrix | np.ndarray) -> EigenSpectrum:
    """Four Floquet multipliers of a monodromy matrix.

    The residual stored on the result is ``max |p(lambda)|`` for the
    characteristic polynomial ``p`` of ``m``.
    """
    mat = m.m if isinstance(m, MonodromyMatrix) else np.asarray(m, dtype=float)
    if not np.all(np.isfinite(mat)):
        raise SpectrumError("monodromy matrix has non-finite entries")
    try:
        values = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigensolver failed: {exc}") from exc
    residual = float(_charpoly_residual(mat, values).max())
    scale = max(1.0, float(np.linalg.norm(mat, 2))) ** 4
    if residual / scale > SPECTRUM_RESIDUAL_TOL:
        raise SpectrumError(f"characteristic residual {residual:.3e} exceeds tolerance (scale {scale:.3e})")
    return EigenSpectrum(values=values, residual=residual)


def classify_values(values: np.ndarray, tol_unit: float = TOL_UNIT,
                    tol_degenerate: float = TOL_DEGENERATE) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classification of stacked spectra of shape ``(n, 4)``.

    Returns ``(codes, unit_counts)``.  Rows with non-finite values or an odd
    unit count come back with the error code and unit count -1.
    """
    values = np.asarray(values)
    finite = np.all(np.isfinite(values), axis=1)
    on_circle = np.abs(np.abs(values) - 1.0) <= tol_unit
    counts = on_circle.sum(axis=1)
    gaps = np.abs(values[:, :, None] - values[:, None, :])
    iu = np.triu_indices(4, 1)
    min_gap = gaps[:, iu[0], iu[1]].min(axis=1)

    codes = np.full(values.shape[0], CODES[Stability.UNSTABLE], dtype=np.int8)
    codes[counts == 2] = CODES[Stability.PARTIALLY_STABLE]
    codes[counts == 4] = CODES[Stability.FULLY_STABLE]
    codes[(counts == 4) & (min_gap <= tol_degenerate)] = CODES[Stability.MARGINAL]
    bad = ~finite | (counts % 2 == 1)
    codes[bad] = CODES[Stability.ERROR]
    counts = counts.astype(np.int8)
    counts[bad] = -1
    return codes, counts


def classify(s: EigenSpectrum, tol_unit: float = TOL_UNIT,
             tol_degenerate: float = TOL_DEGENERATE) -> StabilityClass:
    """Stability label from the number of unit-modulus multipliers.

    Four distinct unit multipliers mean full stability; a coincident pair
    among them is reported as Marginal.
    """
    values = np.asarray(s.values).reshape(1, 4)
    on_circle = int((np.abs(np.abs(values) - 1.0) <= tol_unit).sum())
    if on_circle % 2:
        raise InconsistentSpectrumError(
            f"{on_circle} multipliers on the unit circle: {s.values!r}")
    codes, counts = classify_values(values, tol_unit, tol_degenerate)
    return StabilityClass(LABELS[int(codes[0])], int(counts[0]))


def spectra_batch(ms: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack of 4x4 matrices; rows with non-finite input are NaN."""
    ms = np.asarray(ms, dtype=float)
    out = np.full(ms.shape[:-1], np.nan, dtype=complex)
    ok = np.all(np.isfinite(ms), axis=(1, 2))
    if ok.any():
        out[ok] = np.linalg.eigvals(ms[ok])
    return out


def classify_point(params: TrapParams, cfg: IntegratorConfig = IntegratorConfig(),
                   tol_unit: float = TOL_UNIT, tol_degenerate: float = TOL_DEGENERATE) -> StabilityClass:
    return classify(spectrum(monodromy(params, cfg)), tol_unit, tol_degenerate)


# -- eigenvalue tracing -------------------------------------------------------

@dataclass(frozen=True)
class Collision:
    a: float
    location: complex
    on_real_axis: bool
    distance: float
    counts: tuple[int, int]


@dataclass
class EigenTrace:
    path: list[tuple[TrapParams, EigenSpectrum, StabilityClass]] = field(default_factory=list)
    collisions: list[Collision] = field(default_factory=list)


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    best = min(itertools.permutations(range(4)),
               key=lambda p: float(np.abs(cur[list(p)] - prev).sum()))
    return cur[list(best)]


def _line_eval(q, a, alpha, theta, cfg, tol_unit, tol_degenerate):
    s = spectrum(monodromy(TrapParams(q, a, alpha, theta), cfg))
    return s, classify(s, tol_unit, tol_degenerate)


def locate_collision(q: float, a_lo: float, a_hi: float, alpha: float, theta: float,
                     cfg: IntegratorConfig = IntegratorConfig(), bisect_tol: float = 1e-10,
                     tol_unit: float = TOL_UNIT, tol_degenerate: float = TOL_DEGENERATE,
                     axis_tol: float = 1e-4) -> Collision:
    """Bisect a change of unit count on the segment [a_lo, a_hi] at fixed q.

    The colliding pair is taken among the multipliers that leave the unit
    circle across the refined bracket, choosing the two closest to each
    other on the stable side.
    """
    s_lo, c_lo = _line_eval(q, a_lo, alpha, theta, cfg, tol_unit, tol_degenerate)
    s_hi, c_hi = _line_eval(q, a_hi, alpha, theta, cfg, tol_unit, tol_degenerate)
    if c_lo.unit_count == c_hi.unit_count:
        raise ValueError("unit count does not change across the bracket")
    counts = (c_lo.unit_count, c_hi.unit_count)
    lo, hi = a_lo, a_hi
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s_mid, c_mid = _line_eval(q, mid, alpha, theta, cfg, tol_unit, tol_degenerate)
        if c_mid.unit_count == c_lo.unit_count:
            lo, s_lo = mid, s_mid
        else:
            hi, s_hi, c_hi = mid, s_mid, c_mid
    if c_lo.unit_count >= c_hi.unit_count:
        stable, other, a_at = s_lo.values, s_hi.values, lo
    else:
        stable, other, a_at = s_hi.values, s_lo.values, hi
    other = _match(stable, other)
    on_stable = np.abs(np.abs(stable) - 1.0) <= tol_unit
    leaving = on_stable & (np.abs(np.abs(other) - 1.0) > tol_unit)
    idx = np.flatnonzero(leaving)
    if idx.size < 2:
        idx = np.flatnonzero(on_stable)
    if idx.size < 2:
        idx = np.arange(4)
    i, j = min(itertools.combinations(idx, 2), key=lambda p: abs(stable[p[0]] - stable[p[1]]))
    li, lj = stable[i], stable[j]
    return Collision(
        a=float(a_at),
        location=complex(0.5 * (li + lj)),
        on_real_axis=bool(max(abs(li.imag), abs(lj.imag)) < axis_tol),
        distance=float(abs(li - lj)),
        counts=counts,
    )


def trace_eigenvalues(alpha: float, theta: float, q_fixed: float, a_range: tuple[float, float],
                      steps: int, cfg: IntegratorConfig = IntegratorConfig(),
                      tol_unit: float = TOL_UNIT, tol_degenerate: float = TOL_DEGENERATE,
                      bisect_tol: float = 1e-10, axis_tol: float = 1e-4) -> EigenTrace:
    """Follow the four multipliers along the line q = q_fixed.

    Eigenvalues are reordered step to step by nearest-neighbour matching, so
    column k of the trace is a continuous branch at adequate resolution.
    Every change of unit count between neighbouring samples is refined to a
    :class:`Collision`.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    a0, a1 = map(float, a_range)
    if not a0 < a1:
        raise ValueError("a_range must be increasing")
    grid = np.linspace(a0, a1, steps)
    U = monodromy_batch(np.full(steps, float(q_fixed)), grid, alpha, theta, cfg)
    trace = EigenTrace()
    prev_vals = None
    for a, m in zip(grid, U):
        s = spectrum(m)
        c = classify(s, tol_unit, tol_degenerate)
        vals = s.values if prev_vals is None else _match(prev_vals, s.values)
        s = EigenSpectrum(values=vals, residual=s.residual)
        trace.path.append((TrapParams(q_fixed, float(a), alpha, theta), s, c))
        prev_vals = vals
    for (p0, _, c0), (p1, _, c1) in zip(trace.path, trace.path[1:]):
        if c0.unit_count != c1.unit_count:
            trace.collisions.append(locate_collision(
                q_fixed, p0.a, p1.a, alpha, theta, cfg, bisect_tol, tol_unit, tol_degenerate, axis_tol))
    return trace
