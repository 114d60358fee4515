"""Finite-scale Haar functional on the image of an approximation.

``I(f) = delta * sum_h f(j(h))`` with ``1/delta`` the number of grid images
inside a reference compact ``V``. Sums use ``math.fsum`` (correctly rounded),
so values do not depend on summation order or thread count.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .covering import _greedy
from .group_models import CompactRegion, GroupModel, SLACK


@dataclass
class TestFunction:
    """A test function on a group model.

    ``kind`` is one of ``constant``, ``bump``, ``trig`` or ``sampled``.
    ``analytic_integral`` is the integral against the Haar measure normalized
    to total mass 1 on a compact model, when known. ``lipschitz`` is an upper
    bound for the Lipschitz constant in the model metric, when known.
    """

    __test__ = False  # not a pytest class

    kind: str
    params: dict = field(default_factory=dict)
    support: CompactRegion | None = None
    analytic_integral: float | None = None
    lipschitz: float | None = None

    def evaluate(self, m: GroupModel, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        p = self.params
        if self.kind == "constant":
            return np.full(len(pts), float(p.get("value", 1.0)))
        if self.kind == "bump":
            d = m.dist(pts, np.asarray(p["center"], dtype=float))
            return p.get("height", 1.0) * np.maximum(0.0, 1.0 - d / p["width"])
        if self.kind == "trig":
            return np.prod(np.sin(2 * math.pi * p.get("freq", 1) * pts) ** 2, axis=-1)
        if self.kind == "sampled":
            tree = cKDTree(m.chart(np.asarray(p["points"], dtype=float)), boxsize=m.boxsize)
            _, idx = tree.query(m.chart(pts), p=np.inf)
            return np.asarray(p["values"], dtype=float)[idx]
        raise ValueError(f"unknown test function kind {self.kind!r}")

    def shifted(self, m: GroupModel, h) -> "ShiftedFunction":
        return ShiftedFunction(self, np.asarray(h, dtype=float))


@dataclass
class ShiftedFunction:
    """``l_h f``, i.e. ``a -> f(h a)``."""

    base: TestFunction
    h: np.ndarray

    def evaluate(self, m: GroupModel, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.base.evaluate(m, m.canonical(m.mul(self.h[None, :], pts)))


def constant(value: float = 1.0) -> TestFunction:
    return TestFunction("constant", {"value": float(value)}, None, float(value), 0.0)


def bump(m: GroupModel, center, width: float, height: float = 1.0) -> TestFunction:
    """Tent ``height * max(0, 1 - d(x, center)/width)`` in the model metric."""
    if not width > 0:
        raise ValueError("bump width must be positive")
    center = tuple(float(c) for c in center)
    support = m.clip(CompactRegion(tuple((c - width, c + width) for c in center)))
    analytic = None
    if m.kind == "compact" and m.periods and all(width <= P / 2 for P in m.periods):
        # Chebyshev tent: mass of the level sets of d is 2^d d s^(d-1) ds
        d = m.dim
        analytic = height * (2 * width) ** d / (d + 1)
    return TestFunction("bump", {"center": list(center), "width": float(width),
                                 "height": float(height)},
                        support, analytic, height / width)


def trig(m: GroupModel, freq: int = 1) -> TestFunction:
    """``prod_i sin^2(2 pi freq x_i)``; integral ``2^-dim`` on circle and torus."""
    analytic = 0.5 ** m.dim if (m.periods and freq >= 1) else None
    lip = 2 * math.pi * freq * m.dim
    return TestFunction("trig", {"freq": int(freq)}, m.full_region(), analytic, lip)


def sampled(points, values) -> TestFunction:
    """Nearest-sample interpolation of user data (piecewise constant)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    if len(points) != len(values):
        raise ValueError("points and values differ in length")
    bounds = tuple((float(lo), float(hi)) for lo, hi in zip(points.min(axis=0), points.max(axis=0)))
    return TestFunction("sampled", {"points": points.tolist(), "values": values.tolist()},
                        CompactRegion(bounds))


def lipschitz_estimate(m: GroupModel, f, region: CompactRegion, spacing: float) -> float:
    """Largest finite-difference slope over lattice neighbors in ``region``."""
    pts = m.lattice_points(region, spacing)
    vals = f.evaluate(m, pts)
    tree = cKDTree(m.chart(pts), boxsize=m.boxsize)
    pairs = tree.query_pairs(1.5 * spacing, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return 0.0
    d = m.dist(pts[pairs[:, 0]], pts[pairs[:, 1]])
    ok = d > SLACK
    slopes = np.abs(vals[pairs[ok, 0]] - vals[pairs[ok, 1]]) / d[ok]
    return float(slopes.max()) if len(slopes) else 0.0


@dataclass(frozen=True)
class HaarEstimate:
    value: float
    delta: float
    reference_V: CompactRegion
    grid_size: int
    count_in_V: int

    def to_json(self):
        return {"value": self.value, "delta": self.delta, "V": self.reference_V.to_json(),
                "grid_size": self.grid_size, "count_in_V": self.count_in_V}


def _embedding(q) -> tuple[GroupModel, np.ndarray]:
    return q.model, np.atleast_2d(np.asarray(q.embedding, dtype=float))


def estimate_functional(q, f, V: CompactRegion) -> HaarEstimate:
    m, J = _embedding(q)
    count = int(np.count_nonzero(m.contains(V, J)))
    if count == 0:
        raise ValueError("no grid image lies in the reference compact V")
    delta = 1.0 / count
    return HaarEstimate(delta * math.fsum(f.evaluate(m, J)), delta, V, len(J), count)


@dataclass(frozen=True)
class ShiftMargin:
    shift: tuple
    value: float
    shifted_value: float
    tol: float

    @property
    def margin(self) -> float:
        return self.value - self.shifted_value

    @property
    def violated(self) -> bool:
        return self.margin < -self.tol

    def to_json(self):
        return {"shift": list(self.shift), "value": self.value,
                "shifted_value": self.shifted_value, "margin": self.margin, "tol": self.tol}


def left_shift_check(q, f, V: CompactRegion, shifts, u_radius: float,
                     lipschitz: float | None = None, factor: float = 5.0) -> list[ShiftMargin]:
    """``I(f) - I(l_h f)`` per shift; tolerance ``factor * u_radius * Lip(f)``."""
    m, _ = _embedding(q)
    lip = f.lipschitz if lipschitz is None else lipschitz
    if lip is None:
        raise ValueError("no Lipschitz bound known; pass lipschitz=")
    base = estimate_functional(q, f, V).value
    tol = factor * u_radius * lip
    out = []
    for h in shifts:
        h = tuple(float(x) for x in h)
        shifted = estimate_functional(q, f.shifted(m, h), V).value
        out.append(ShiftMargin(h, base, shifted, tol))
    return out


def invariance_profile(q, f, V: CompactRegion, shifts) -> list[dict]:
    """Relative deviations ``|I(l_h f) - I(f)| / I(f)`` per shift."""
    m, _ = _embedding(q)
    base = estimate_functional(q, f, V).value
    rows = []
    for h in shifts:
        h = tuple(float(x) for x in h)
        shifted = estimate_functional(q, f.shifted(m, h), V).value
        dev = abs(shifted - base) / base if base else float("nan")
        rows.append({"shift": list(h), "value": base, "shifted_value": shifted, "deviation": dev})
    return rows


def translate_cover_constant(m: GroupModel, X: CompactRegion, V: CompactRegion,
                             spacing: float) -> int:
    """Number of translates ``a V`` (``a`` on a lattice over ``X``) a greedy
    cover needs to cover a sample lattice of ``X``; an upper bound for
    ``I(f) / sup f`` when ``f`` is supported in ``X``."""
    samples = m.lattice_points(X, spacing / 2)
    cands = m.lattice_points(X, spacing)
    incidence = []
    for a in cands:
        moved = m.canonical(m.mul(m.inv(a[None, :]), samples))
        incidence.append(np.flatnonzero(m.contains(V, moved)))
    return len(_greedy(incidence, len(samples)))


CSV_COLUMNS = ["u_radius", "grid_size", "delta", "value", "analytic", "abs_error",
               "min_margin", "max_deviation"]


def sweep_row(q, f, V: CompactRegion, shifts, u_radius: float) -> dict:
    est = estimate_functional(q, f, V)
    prof = invariance_profile(q, f, V, shifts) if shifts else []
    margins = [r["value"] - r["shifted_value"] for r in prof]
    analytic = f.analytic_integral
    return {"u_radius": u_radius, "grid_size": est.grid_size, "delta": est.delta,
            "value": est.value, "analytic": analytic,
            "abs_error": abs(est.value - analytic) if analytic is not None else None,
            "min_margin": min(margins) if margins else None,
            "max_deviation": max(r["deviation"] for r in prof) if prof else None}


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else repr(r[c]) if isinstance(r[c], float) else r[c]
                    for c in columns])
    return buf.getvalue()
