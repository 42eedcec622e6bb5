"""Classified raster of the (q, a) plane at fixed alpha and theta."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TrapParams
from .floquet import (CODES, LABELS, TOL_DEGENERATE, TOL_UNIT, Stability, StabilityClass,
                      classify_values, spectra_batch)
from .integrator import IntegratorConfig, monodromy_batch

# cells per integration batch; bounds memory for large grids
_BATCH = 65536


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    a_min: float
    a_max: float
    nq: int
    na: int

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValueError("q_min must be < q_max")
        if not self.a_min < self.a_max:
            raise ValueError("a_min must be < a_max")
        if self.nq < 2 or self.na < 2:
            raise ValueError("nq and na must be >= 2")

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.nq

    @property
    def da(self) -> float:
        return (self.a_max - self.a_min) / self.na

    def q_centers(self) -> np.ndarray:
        return self.q_min + (np.arange(self.nq) + 0.5) * self.dq

    def a_centers(self) -> np.ndarray:
        return self.a_min + (np.arange(self.na) + 0.5) * self.da


@dataclass
class StabilityGrid:
    """Stability classes on cell centres.

    ``codes[i, j]`` and ``unit_counts[i, j]`` refer to ``q_i`` and ``a_j``;
    flattening in C order gives the row-major cell list.
    """

    spec: GridSpec
    alpha: float
    theta: float
    codes: np.ndarray
    unit_counts: np.ndarray
    cfg: IntegratorConfig

    def cell(self, i: int, j: int) -> StabilityClass:
        return StabilityClass(LABELS[int(self.codes[i, j])], int(self.unit_counts[i, j]))

    @property
    def cells(self) -> list[StabilityClass]:
        return [self.cell(i, j) for i in range(self.spec.nq) for j in range(self.spec.na)]

    def mask(self, label: Stability) -> np.ndarray:
        return self.codes == CODES[label]

    def count(self, label: Stability) -> int:
        return int(self.mask(label).sum())

    @property
    def n_errors(self) -> int:
        return self.count(Stability.ERROR)


def sweep_grid(alpha: float, theta: float, spec: GridSpec,
               cfg: IntegratorConfig = IntegratorConfig(),
               tol_unit: float = TOL_UNIT, tol_degenerate: float = TOL_DEGENERATE) -> StabilityGrid:
    """Classify every cell centre of ``spec``.

    Cells whose monodromy is not finite, or whose spectrum is inconsistent,
    are marked with the error class instead of aborting the sweep.
    """
    theta = TrapParams(0.0, 0.0, alpha, theta).theta
    qc = spec.q_centers()
    ac = spec.a_centers()
    Q, A = np.meshgrid(qc, ac, indexing="ij")
    qf, af = Q.ravel(), A.ravel()
    codes = np.empty(qf.size, dtype=np.int8)
    counts = np.empty(qf.size, dtype=np.int8)
    for lo in range(0, qf.size, _BATCH):
        hi = min(lo + _BATCH, qf.size)
        U = monodromy_batch(qf[lo:hi], af[lo:hi], alpha, theta, cfg)
        codes[lo:hi], counts[lo:hi] = classify_values(spectra_batch(U), tol_unit, tol_degenerate)
    shape = (spec.nq, spec.na)
    return StabilityGrid(spec=spec, alpha=float(alpha), theta=theta,
                         codes=codes.reshape(shape), unit_counts=counts.reshape(shape), cfg=cfg)
