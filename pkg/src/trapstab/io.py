"""Readers and writers for the CSV, PGM and manifest outputs.

Floats are written with 17 significant digits so that a file read back
reproduces the in-memory values exactly.  Line endings are LF.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import BoundaryCurve, CurveMethod
from .floquet import CODES, LABELS, EigenTrace, Stability
from .sweep import StabilityGrid

PGM_LEVELS = {
    Stability.FULLY_STABLE: 0,
    Stability.PARTIALLY_STABLE: 128,
    Stability.MARGINAL: 192,
    Stability.UNSTABLE: 255,
    Stability.ERROR: 64,
}


def fmt(x: float) -> str:
    return "%.17g" % x


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_grid_csv(path, grid: StabilityGrid) -> None:
    qc, ac = grid.spec.q_centers(), grid.spec.a_centers()
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["q", "a", "class", "unit_count"])
        for i, q in enumerate(qc):
            for j, a in enumerate(ac):
                code = int(grid.codes[i, j])
                w.writerow([fmt(q), fmt(a), LABELS[code].value, int(grid.unit_counts[i, j])])


def read_grid_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(q, a, codes, unit_counts)`` as 2-D arrays indexed [i, j]."""
    rows = list(csv.DictReader(open(path, newline="")))
    q = np.array([float(r["q"]) for r in rows])
    a = np.array([float(r["a"]) for r in rows])
    codes = np.array([CODES[Stability(r["class"])] for r in rows], dtype=np.int8)
    counts = np.array([int(r["unit_count"]) for r in rows], dtype=np.int8)
    nq = np.unique(q).size
    na = np.unique(a).size
    shape = (nq, na)
    return q.reshape(shape), a.reshape(shape), codes.reshape(shape), counts.reshape(shape)


def write_grid_pgm(path, grid: StabilityGrid) -> None:
    """Plain (P2) graymap: q runs left to right, a runs bottom to top."""
    lut = np.zeros(max(CODES.values()) + 1, dtype=int)
    for label, level in PGM_LEVELS.items():
        lut[CODES[label]] = level
    img = lut[grid.codes.T[::-1, :]]
    with open(path, "w", newline="\n") as fh:
        fh.write(f"P2\n{grid.spec.nq} {grid.spec.na}\n255\n")
        for row in img:
            fh.write(" ".join(str(v) for v in row) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in open(path):
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    width, height, _ = map(int, tokens[1:4])
    return np.array(tokens[4:], dtype=int).reshape(height, width)


def write_curves_csv(path, curves: list[BoundaryCurve]) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["label", "method", "q", "a"])
        for cur in curves:
            for q, a in cur.points:
                w.writerow([cur.label, cur.method.value, fmt(q), fmt(a)])


def read_curves_csv(path) -> list[BoundaryCurve]:
    curves: dict[tuple[str, str], list] = {}
    for r in csv.DictReader(open(path, newline="")):
        curves.setdefault((r["label"], r["method"]), []).append((float(r["q"]), float(r["a"])))
    return [BoundaryCurve(label=k[0], method=CurveMethod(k[1]), points=v) for k, v in curves.items()]


def write_trace_csv(path, trace: EigenTrace) -> None:
    header = ["a"] + [f"{p}{k}" for k in range(1, 5) for p in ("re", "im")] + ["unit_count"]
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(header)
        for params, spec, cls in trace.path:
            row = [fmt(params.a)]
            for v in spec.values:
                row += [fmt(v.real), fmt(v.imag)]
            w.writerow(row + [cls.unit_count])


def write_collisions_csv(path, trace: EigenTrace) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["a", "loc_re", "loc_im", "on_real_axis"])
        for c in trace.collisions:
            w.writerow([fmt(c.a), fmt(c.location.real), fmt(c.location.imag),
                        "true" if c.on_real_axis else "false"])


def read_table(path) -> list[dict[str, str]]:
    return list(csv.DictReader(open(path, newline="")))


def write_manifest(path, entries: dict) -> None:
    """Flat ``key=value`` text; non-string values are JSON encoded."""
    with open(path, "w", newline="\n") as fh:
        for key, value in entries.items():
            text = value if isinstance(value, str) else json.dumps(value)
            fh.write(f"{key}={text}\n")


def read_manifest(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        out[key] = value
    return out

