"""Coordinatized desk-scale models of locally compact groups.

Elements are plain tuples of numbers at the API boundary; internally every
model works on float64 arrays of shape ``(..., dim)`` so that products,
inverses and distances broadcast over whole grids at once.

Neighborhoods are metric balls about the identity and ``gU`` is the left
translate, so membership of ``x`` in ``gU`` is ``distance(g^-1 x, e) <= r``.
That quantity is :func:`left_distance`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SLACK = 1e-9
DEFAULT_CAP = 200_000

Element = tuple


class CapExceeded(ValueError):
    """Raised when a lattice or grid would exceed the configured point cap."""


@dataclass(frozen=True)
class CompactRegion:
    """Per-coordinate closed box ``[lo_i, hi_i]`` in model coordinates."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"region bounds must be finite, got {bounds}")
            if hi < lo:
                raise ValueError(f"empty region: {lo} > {hi}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @classmethod
    def point(cls, p: Sequence[float]) -> "CompactRegion":
        return cls(tuple((float(x), float(x)) for x in p))

    def hull(self, other: "CompactRegion") -> "CompactRegion":
        return CompactRegion(tuple((min(a[0], b[0]), max(a[1], b[1]))
                                   for a, b in zip(self.bounds, other.bounds)))

    def to_json(self):
        return [list(b) for b in self.bounds]


@dataclass(frozen=True)
class Neighborhood:
    """Closed metric ball of the given radius about the identity."""

    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"neighborhood radius must be positive, got {self.radius}")


def _axis_values(lo: float, hi: float, spacing: float, discrete: bool) -> np.ndarray:
    if discrete:
        step = max(1, int(math.floor(spacing)))
        a, b = math.ceil(lo - SLACK), math.floor(hi + SLACK)
        if b < a:
            return np.empty(0)
        vals = list(range(a, b + 1, step))
        if vals[-1] != b:
            vals.append(b)
        return np.array(vals, dtype=float)
    if hi - lo <= SLACK:
        return np.array([lo])
    count = math.ceil((hi - lo) / spacing - SLACK)
    vals = lo + spacing * np.arange(count + 1)
    vals[-1] = hi
    return vals


class GroupModel:
    """Base class; subclasses implement the vectorized primitives.

    ``chart`` maps coordinates to R^d where the model metric ``dist`` is the
    Chebyshev distance (``boxsize`` gives periods for wrapped axes). That is
    what lets neighbor searches use a KD-tree.
    """

    name = "abstract"
    dim = 1
    kind = "compact"  # compact | discrete | noncompact-continuous
    unimodular = True
    exact = False
    invariant_metric = False
    periods: tuple | None = None

    @property
    def identity(self) -> tuple:
        raise NotImplementedError

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inv(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dist(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.max(np.abs(self.chart(a) - self.chart(b)), axis=-1)

    def chart(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=float)

    @property
    def boxsize(self):
        return None

    def canonical(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=float)

    def left_reach(self, centers: np.ndarray, radius: float) -> np.ndarray:
        """Chart radius around each center that contains its left ball."""
        return np.full(len(centers), radius)

    def right_reach(self, centers: np.ndarray, radius: float) -> np.ndarray:
        """Chart radius around each center that contains its right ball ``U c``."""
        return self.left_reach(centers, radius)

    def cover_lattice(self, region: CompactRegion, radius: float,
                      cap: int = DEFAULT_CAP) -> np.ndarray:
        """Points whose left balls of ``radius`` should cover ``region``;
        exact for translation-invariant metrics, a first guess otherwise."""
        return self.lattice_points(region, 2 * radius, cap)

    def full_region(self) -> CompactRegion | None:
        return None

    def contains(self, region: CompactRegion, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(len(pts), dtype=bool)
        for axis, (lo, hi) in enumerate(region.bounds):
            x = pts[:, axis]
            period = self.periods[axis] if self.periods else None
            if period is not None:
                if hi - lo >= period - SLACK:
                    continue
                ok &= np.mod(x - lo + SLACK, period) <= (hi - lo) + 2 * SLACK
            else:
                ok &= (x >= lo - SLACK) & (x <= hi + SLACK)
        return ok

    def lattice_points(self, region: CompactRegion, spacing: float,
                       cap: int = DEFAULT_CAP) -> np.ndarray:
        """Deterministic grid covering ``region`` within ``spacing``."""
        if not spacing > 0:
            raise ValueError(f"spacing must be positive, got {spacing}")
        self._check_region(region)
        axes = [self._lattice_axis(axis, lo, hi, spacing)
                for axis, (lo, hi) in enumerate(region.bounds)]
        total = math.prod(len(a) for a in axes)
        if total > cap:
            raise CapExceeded(f"lattice of {total} points exceeds cap {cap}")
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        pts = self.from_chart_lattice(pts)
        return _sorted_unique(self.canonical(pts))

    def _lattice_axis(self, axis, lo, hi, spacing):
        return _axis_values(lo, hi, spacing, self.exact)

    def from_chart_lattice(self, pts: np.ndarray) -> np.ndarray:
        return pts

    def inflate(self, region: CompactRegion, radius: float) -> CompactRegion:
        """A box containing every left ball of ``radius`` centered in ``region``."""
        return CompactRegion(tuple((lo - radius, hi + radius) for lo, hi in region.bounds))

    def right_inflate(self, region: CompactRegion, radius: float) -> CompactRegion:
        """A box containing every right ball ``U c`` with ``c`` in ``region``."""
        return self.inflate(region, radius)

    def product_hull(self, a: CompactRegion, b: CompactRegion) -> CompactRegion:
        """Bounding box of the product set ``a * b``."""
        full = self.full_region()
        if full is not None:
            return full
        raise NotImplementedError

    def _check_region(self, region: CompactRegion):
        if region.dim != self.dim:
            raise ValueError(f"{self.name}: region has dimension {region.dim}, expected {self.dim}")

    def clip(self, region: CompactRegion) -> CompactRegion:
        full = self.full_region()
        if full is None:
            return region
        out = []
        for (lo, hi), (flo, fhi), period in zip(region.bounds, full.bounds,
                                                 self.periods or (None,) * self.dim):
            if period is not None and hi - lo >= period:
                out.append((flo, fhi))
            elif period is None:
                out.append((max(lo, flo), min(hi, fhi)))
            else:
                out.append((lo, hi))
        return CompactRegion(tuple(out))

    def __repr__(self):
        return f"<GroupModel {self.name}>"


def _sorted_unique(pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return pts
    pts = np.round(pts, 12) + 0.0  # +0.0 folds -0.0
    pts = np.unique(pts, axis=0)  # lexicographic
    return pts


class Cyclic(GroupModel):
    kind = "discrete"
    exact = True
    invariant_metric = True

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("cyclic group order must be positive")
        self.n = int(n)
        self.name = f"cyclic:{self.n}"
        self.periods = (float(self.n),)

    @property
    def identity(self):
        return (0,)

    def mul(self, a, b):
        return np.mod(np.asarray(a) + np.asarray(b), self.n)

    def inv(self, a):
        return np.mod(-np.asarray(a, dtype=float), self.n) + 0.0

    def dist(self, a, b):
        d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))[..., 0] % self.n
        return np.minimum(d, self.n - d)

    def canonical(self, a):
        return np.mod(np.rint(np.asarray(a, dtype=float)), self.n)

    @property
    def boxsize(self):
        return [float(self.n)]

    def full_region(self):
        return CompactRegion(((0, self.n - 1),))

    def _lattice_axis(self, axis, lo, hi, spacing):
        if hi - lo >= self.n - 1:
            lo, hi = 0, self.n - 1
        return _axis_values(lo, hi, spacing, True)


class Integers(GroupModel):
    name = "integers"
    kind = "discrete"
    exact = True
    invariant_metric = True

    @property
    def identity(self):
        return (0,)

    def mul(self, a, b):
        return np.asarray(a, dtype=float) + np.asarray(b, dtype=float)

    def inv(self, a):
        return -np.asarray(a, dtype=float) + 0.0

    def canonical(self, a):
        return np.rint(np.asarray(a, dtype=float))

    def product_hull(self, a, b):
        (alo, ahi), (blo, bhi) = a.bounds[0], b.bounds[0]
        return CompactRegion(((alo + blo, ahi + bhi),))


class Circle(GroupModel):
    name = "circle"
    kind = "compact"
    invariant_metric = True
    periods = (1.0,)

    @property
    def identity(self):
        return (0.0,)

    def mul(self, a, b):
        return np.mod(np.asarray(a, dtype=float) + np.asarray(b, dtype=float), 1.0)

    def inv(self, a):
        return np.mod(-np.asarray(a, dtype=float), 1.0)

    def dist(self, a, b):
        d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), 1.0)
        return np.max(np.minimum(d, 1.0 - d), axis=-1)

    def canonical(self, a):
        a = np.mod(np.asarray(a, dtype=float), 1.0)
        return np.where(a >= 1.0 - 1e-12, 0.0, a)

    @property
    def boxsize(self):
        return [1.0] * self.dim

    def chart(self, a):
        return self.canonical(a)

    def full_region(self):
        return CompactRegion(((0.0, 1.0),) * self.dim)


class Torus(Circle):
    name = "torus"
    dim = 2
    periods = (1.0, 1.0)

    @property
    def identity(self):
        return (0.0, 0.0)


class Affine(GroupModel):
    """Maps ``x -> a x + b`` with ``a > 0``; coordinates ``(a, b)``.

    The metric is ``max(|log a1 - log a2|, |b1 - b2|)``. It is not invariant
    under either translation, and the group is not unimodular.
    """

    name = "affine"
    dim = 2
    kind = "noncompact-continuous"
    unimodular = False

    @property
    def identity(self):
        return (1.0, 0.0)

    def mul(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a = x[..., 0] * y[..., 0]
        b = x[..., 0] * y[..., 1] + x[..., 1]
        return np.stack(np.broadcast_arrays(a, b), axis=-1)

    def inv(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x[..., 0] <= 0):
            raise ValueError("affine element with non-positive scale is not invertible")
        return np.stack([1.0 / x[..., 0], -x[..., 1] / x[..., 0] + 0.0], axis=-1)

    def chart(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.stack([np.log(x[..., 0]), x[..., 1]], axis=-1)

    def from_chart_lattice(self, pts):
        return np.stack([np.exp(pts[:, 0]), pts[:, 1]], axis=-1)

    def _lattice_axis(self, axis, lo, hi, spacing):
        if axis == 0:
            if lo <= 0:
                raise ValueError("affine scale bounds must be positive")
            return _axis_values(math.log(lo), math.log(hi), spacing, False)
        return _axis_values(lo, hi, spacing, False)

    def left_reach(self, centers, radius):
        return radius * np.maximum(1.0, np.asarray(centers)[:, 0])

    def right_reach(self, centers, radius):
        return radius + math.expm1(radius) * np.abs(np.asarray(centers)[:, 1])

    def cover_lattice(self, region, radius, cap=DEFAULT_CAP):
        # the left ball about (a, b) is |log a' - log a| <= r, |b' - b| <= a r
        (alo, ahi), (blo, bhi) = region.bounds
        levels = np.exp(_axis_values(math.log(alo), math.log(ahi), 2 * radius, False))
        cols = [_axis_values(blo, bhi, 2 * a * radius, False) for a in levels]
        total = sum(len(c) for c in cols)
        if total > cap:
            raise CapExceeded(f"cover lattice of {total} points exceeds cap {cap}")
        pts = np.concatenate([np.stack([np.full(len(c), a), c], axis=-1)
                              for a, c in zip(levels, cols)])
        return _sorted_unique(pts)

    def inflate(self, region, radius):
        (alo, ahi), (blo, bhi) = region.bounds
        return CompactRegion(((alo * math.exp(-radius), ahi * math.exp(radius)),
                              (blo - ahi * radius, bhi + ahi * radius)))

    def right_inflate(self, region, radius):
        (alo, ahi), (blo, bhi) = region.bounds
        grow = radius + math.expm1(radius) * max(abs(blo), abs(bhi))
        return CompactRegion(((alo * math.exp(-radius), ahi * math.exp(radius)),
                              (blo - grow, bhi + grow)))

    def product_hull(self, p, q):
        (a1lo, a1hi), (b1lo, b1hi) = p.bounds
        (a2lo, a2hi), (b2lo, b2hi) = q.bounds
        bs = [a1 * b2 + b1 for a1 in (a1lo, a1hi) for b2 in (b2lo, b2hi) for b1 in (b1lo, b1hi)]
        return CompactRegion(((a1lo * a2lo, a1hi * a2hi), (min(bs), max(bs))))


class Heisenberg(GroupModel):
    """Integer upper unitriangular 3x3 matrices, coordinates ``(x, y, z)``
    for ``[[1, x, z], [0, 1, y], [0, 0, 1]]``."""

    name = "heisenberg"
    dim = 3
    kind = "discrete"
    exact = True

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        x = p[..., 0] + q[..., 0]
        y = p[..., 1] + q[..., 1]
        z = p[..., 2] + q[..., 2] + p[..., 0] * q[..., 1]
        return np.stack(np.broadcast_arrays(x, y, z), axis=-1)

    def inv(self, p):
        p = np.asarray(p, dtype=float)
        return np.stack([-p[..., 0], -p[..., 1], -p[..., 2] + p[..., 0] * p[..., 1]], axis=-1) + 0.0

    def canonical(self, a):
        return np.rint(np.asarray(a, dtype=float))

    def left_reach(self, centers, radius):
        return radius * (1.0 + np.abs(np.asarray(centers)[:, 0]))

    def inflate(self, region, radius):
        (xlo, xhi), (ylo, yhi), (zlo, zhi) = region.bounds
        xm = max(abs(xlo), abs(xhi))
        return CompactRegion(((xlo - radius, xhi + radius), (ylo - radius, yhi + radius),
                              (zlo - radius * (1 + xm), zhi + radius * (1 + xm))))

    def right_reach(self, centers, radius):
        return radius * (1.0 + np.abs(np.asarray(centers)[:, 1]))

    def right_inflate(self, region, radius):
        (xlo, xhi), (ylo, yhi), (zlo, zhi) = region.bounds
        ym = max(abs(ylo), abs(yhi))
        return CompactRegion(((xlo - radius, xhi + radius), (ylo - radius, yhi + radius),
                              (zlo - radius * (1 + ym), zhi + radius * (1 + ym))))

    def product_hull(self, p, q):
        (x1lo, x1hi), (y1lo, y1hi), (z1lo, z1hi) = p.bounds
        (x2lo, x2hi), (y2lo, y2hi), (z2lo, z2hi) = q.bounds
        cross = [x1 * y2 for x1 in (x1lo, x1hi) for y2 in (y2lo, y2hi)]
        return CompactRegion(((x1lo + x2lo, x1hi + x2hi), (y1lo + y2lo, y1hi + y2hi),
                              (z1lo + z2lo + min(cross), z1hi + z2hi + max(cross))))


class Opposite(GroupModel):
    """The opposite group: ``a * b = b a`` in the base model.

    Left balls here are right balls of the base, so running the left
    quasigroup construction on ``Opposite(m)`` and transposing the table gives
    the mirrored right quasigroup construction for ``m``.
    """

    def __init__(self, base: GroupModel):
        self.base = base
        self.name = base.name
        for attr in ("dim", "kind", "unimodular", "exact", "invariant_metric", "periods"):
            setattr(self, attr, getattr(base, attr))

    @property
    def identity(self):
        return self.base.identity

    def mul(self, a, b):
        return self.base.mul(b, a)

    def inv(self, a):
        return self.base.inv(a)

    def dist(self, a, b):
        return self.base.dist(a, b)

    def chart(self, a):
        return self.base.chart(a)

    @property
    def boxsize(self):
        return self.base.boxsize

    def canonical(self, a):
        return self.base.canonical(a)

    def left_reach(self, centers, radius):
        return self.base.right_reach(centers, radius)

    def right_reach(self, centers, radius):
        return self.base.left_reach(centers, radius)

    def cover_lattice(self, region, radius, cap=DEFAULT_CAP):
        if self.base.invariant_metric:
            return self.base.cover_lattice(region, radius, cap)
        return self.base.lattice_points(region, 2 * radius, cap)

    def full_region(self):
        return self.base.full_region()

    def contains(self, region, points):
        return self.base.contains(region, points)

    def lattice_points(self, region, spacing, cap=DEFAULT_CAP):
        return self.base.lattice_points(region, spacing, cap)

    def inflate(self, region, radius):
        return self.base.right_inflate(region, radius)

    def right_inflate(self, region, radius):
        return self.base.inflate(region, radius)

    def product_hull(self, a, b):
        return self.base.product_hull(b, a)

    def __repr__(self):
        return f"<GroupModel {self.name} (opposite)>"


_REGISTRY = {
    "integers": Integers,
    "circle": Circle,
    "torus": Torus,
    "affine": Affine,
    "heisenberg": Heisenberg,
}


def get_model(name: str) -> GroupModel:
    """Resolve a model by name: ``circle``, ``torus``, ``affine``,
    ``integers``, ``heisenberg`` or ``cyclic:N`` (also ``Z_N``)."""
    key = name.strip().lower()
    m = re.fullmatch(r"(?:cyclic:|z_?)(\d+)", key)
    if m:
        return Cyclic(int(m.group(1)))
    if key in ("z", "zwindow", "integer-window"):
        key = "integers"
    try:
        return _REGISTRY[key]()
    except KeyError:
        raise ValueError(f"unknown group model {name!r}") from None


def model_names() -> list[str]:
    return sorted(_REGISTRY) + ["cyclic:N"]


# element-level API ---------------------------------------------------------

def _as_array(m: GroupModel, a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.shape[-1:] != (m.dim,):
        raise ValueError(f"{m.name}: expected {m.dim} coordinates, got shape {arr.shape}")
    return arr


def to_element(m: GroupModel, arr) -> tuple:
    arr = np.asarray(arr, dtype=float)
    if m.exact:
        return tuple(int(round(v)) for v in arr)
    return tuple(float(v) for v in arr)


def identity(m: GroupModel) -> tuple:
    return tuple(m.identity)


def multiply(m: GroupModel, a, b) -> tuple:
    return to_element(m, m.canonical(m.mul(_as_array(m, a), _as_array(m, b))))


def invert(m: GroupModel, a) -> tuple:
    return to_element(m, m.canonical(m.inv(_as_array(m, a))))


def distance(m: GroupModel, a, b) -> float:
    return float(m.dist(_as_array(m, a), _as_array(m, b)))


def left_distance(m: GroupModel, center, x) -> np.ndarray:
    """``distance(center^-1 x, e)``, vectorized; ``x`` lies in ``center U``
    iff this is at most ``U.radius``."""
    center = np.asarray(center, dtype=float)
    x = np.asarray(x, dtype=float)
    e = np.asarray(m.identity, dtype=float)
    return m.dist(m.mul(m.inv(center), x), e)


def in_left_ball(m: GroupModel, center, x, radius: float) -> np.ndarray:
    return left_distance(m, center, x) <= radius + SLACK


def lattice_points(m: GroupModel, region: CompactRegion, spacing: float,
                   cap: int = DEFAULT_CAP) -> list[tuple]:
    return [to_element(m, p) for p in m.lattice_points(region, spacing, cap)]
