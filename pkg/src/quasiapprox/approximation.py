"""Finite left (right) quasigroup approximations of group models.

Pipeline: pick a neighborhood ``O`` with ``O O^-1`` inside ``U`` and a
compact ``K`` containing ``C C`` and ``C U``; grid ``K`` by ``O``; build the
candidate sets ``A[g, h]`` (grid points within ``2 O.radius`` of ``g h`` when
both factors lie in ``C``, the whole grid otherwise); then solve one SDR per
row. A failed SDR means the grid was not good enough, and the pipeline
retries with ``O`` halved.

Right quasigroups are the mirror image: the same row construction runs in the
opposite group (so every left ball becomes a right ball ``U g``), and the
table is transposed. Grid and homomorphism conditions are then checked in
that mirrored form, ``j(x * y)`` in ``U j(x) j(y)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .covering import Cover, build_grid
from .group_models import (DEFAULT_CAP, SLACK, CompactRegion, GroupModel, Neighborhood,
                           Opposite, get_model, left_distance, to_element)
from .matching import SetSystem, sdr

SCHEMA_VERSION = 1
MAX_RETRIES = 4
DISTORTION_SAMPLES = 10_000


class HallViolation(Exception):
    """Row (column) ``line`` has index set ``subset`` of other factors whose
    candidate sets jointly hold only ``union_size < len(subset)`` elements."""

    def __init__(self, line: int, subset: tuple, union_size: int, side: str = "left"):
        super().__init__(f"Hall violation in {'row' if side == 'left' else 'column'} {line}: "
                         f"{len(subset)} sets share {union_size} candidates")
        self.line = line
        self.subset = tuple(subset)
        self.union_size = union_size
        self.side = side


class ApproximationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class ApproximationProblem:
    model: GroupModel
    C: CompactRegion
    U: Neighborhood
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.C.dim != self.model.dim:
            raise ValueError(f"region dimension {self.C.dim} does not match {self.model.name}")

    def to_json(self):
        return {"model": self.model.name, "C": self.C.to_json(),
                "U": self.U.radius, "side": self.side}


def working_model(p: ApproximationProblem) -> GroupModel:
    """The model the row construction runs in: the opposite group for right
    quasigroups."""
    return Opposite(p.model) if p.side == "right" else p.model


@dataclass
class CandidateFamily:
    """Sparse ``A[g, h]``: only pairs with both factors in ``C`` are stored
    (CSR over the ``|C| x |C|`` block, row-major); all others are the full grid.

    ``model`` is the working model, so for ``side == "right"`` products are
    taken in the opposite group and ``A[g, h]`` sits near ``h g``."""

    model: GroupModel
    grid: Cover
    c_index: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    radius: float
    O: Neighborhood | None = None
    K: CompactRegion | None = None
    side: str = "left"

    @property
    def n(self) -> int:
        return len(self.grid)

    def _pos(self):
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[self.c_index] = np.arange(len(self.c_index))
        return pos

    def candidates(self, g: int, h: int) -> np.ndarray:
        pos = self._pos()
        if pos[g] < 0 or pos[h] < 0:
            return np.arange(self.n)
        slot = pos[g] * len(self.c_index) + pos[h]
        return self.indices[self.indptr[slot]:self.indptr[slot + 1]]

    def local_sets(self, line_pos: int) -> list[np.ndarray]:
        """Candidate sets along one stored row."""
        c = len(self.c_index)
        slots = line_pos * c + np.arange(c)
        return [self.indices[self.indptr[s]:self.indptr[s + 1]] for s in slots]


@dataclass
class FiniteLeftQuasigroup:
    """Operation table plus embedding ``j`` (row ``i`` of ``embedding`` is
    ``j(i)``). For ``side == "right"`` the columns, not rows, permute."""

    table: np.ndarray
    embedding: np.ndarray
    model: GroupModel
    side: str = "left"

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64)
        self.embedding = np.atleast_2d(np.asarray(self.embedding, dtype=float))

    @property
    def n(self) -> int:
        return len(self.table)

    def lines_permute(self) -> bool:
        t = self.table if self.side == "left" else self.table.T
        target = np.arange(self.n)
        return bool(np.all(np.sort(t, axis=1) == target))

    def embedding_injective(self) -> bool:
        return len(np.unique(np.round(self.embedding, 12), axis=0)) == self.n

    def left_divide(self, b: int, a: int) -> int:
        """The unique ``x`` with ``a * x = b``."""
        hits = np.flatnonzero(self.table[a] == b)
        if len(hits) != 1:
            raise ValueError(f"row {a} is not a permutation")
        return int(hits[0])

    def right_divide(self, b: int, a: int) -> int:
        """The unique ``x`` with ``x * a = b``."""
        hits = np.flatnonzero(self.table[:, a] == b)
        if len(hits) != 1:
            raise ValueError(f"column {a} is not a permutation")
        return int(hits[0])

    def element(self, i: int) -> tuple:
        return to_element(self.model, self.embedding[i])


@dataclass
class ApproximationReport:
    grid_defect: float
    hom_defect: float
    qualifying_pairs: int
    retries: int = 0
    u_radius: float = 0.0
    witness: tuple | None = None
    n: int = 0
    o_radius: float | None = None

    @property
    def passed(self) -> bool:
        return (self.grid_defect <= self.u_radius + SLACK
                and self.hom_defect <= self.u_radius + SLACK)

    def to_json(self):
        return {"grid_defect": self.grid_defect, "hom_defect": self.hom_defect,
                "qualifying_pairs": self.qualifying_pairs, "retries": self.retries,
                "u_radius": self.u_radius, "passed": self.passed,
                "witness": list(self.witness) if self.witness is not None else None,
                "n": self.n, "o_radius": self.o_radius}


# parameters ---------------------------------------------------------------

def _ball_samples(m: GroupModel, radius: float, rng: np.random.Generator, count: int) -> np.ndarray:
    e = np.asarray(m.identity, dtype=float)
    box = m.inflate(CompactRegion.point(e), radius)
    pts = [m.lattice_points(box, radius / 8)]
    lo = np.array([b[0] for b in box.bounds])
    hi = np.array([b[1] for b in box.bounds])
    pts.append(m.canonical(rng.uniform(lo, hi, size=(count, m.dim))))
    pts = np.concatenate(pts)
    return pts[m.dist(pts, e) <= radius + SLACK]


def _product_spread(m: GroupModel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``distance(x y^-1, e)`` for paired rows of ``x`` and ``y``."""
    e = np.asarray(m.identity, dtype=float)
    return m.dist(m.mul(x, m.inv(y)), e)


def estimate_distortion(m: GroupModel, radius: float, seed: int = 0) -> float:
    """Largest sampled ratio ``d(x y^-1, e) / (2 radius)`` over ``x, y`` in
    the ``radius`` ball; 1 for a translation-invariant metric."""
    rng = np.random.default_rng(seed)
    pts = _ball_samples(m, radius, rng, 400)
    if len(pts) < 2:
        return 1.0
    i, j = np.triu_indices(len(pts), k=1)
    spread = np.concatenate([_product_spread(m, pts[i], pts[j]), _product_spread(m, pts[j], pts[i])])
    return max(1.0, float(spread.max()) / (2 * radius))


def oo_inverse_fits(m: GroupModel, O: Neighborhood, U: Neighborhood,
                    samples: int = DISTORTION_SAMPLES, seed: int = 1) -> bool:
    """Monte-Carlo check that ``O O^-1`` lies in ``U``."""
    rng = np.random.default_rng(seed)
    pts = _ball_samples(m, O.radius, rng, 2 * samples)
    if len(pts) < 2:
        return 2 * O.radius <= U.radius + SLACK
    a = rng.integers(0, len(pts), size=samples)
    b = rng.integers(0, len(pts), size=samples)
    return bool(np.all(_product_spread(m, pts[a], pts[b]) <= U.radius + SLACK))


def choose_parameters(p: ApproximationProblem, max_shrink: int = 30):
    """Return ``(O, K)`` with ``O O^-1`` inside ``U`` and ``K`` containing
    ``C C``, ``C U`` and one ``O`` margin."""
    m, U = working_model(p), p.U
    half = U.radius / 2
    if m.invariant_metric:
        r = half
    else:
        excess = estimate_distortion(m, half) - 1.0
        r = half / (1.0 + 2.0 * excess)
        for _ in range(max_shrink):
            if oo_inverse_fits(m, Neighborhood(r), U):
                break
            r *= 0.8
        else:
            raise ApproximationFailed("could not find O with O O^-1 inside U; "
                                      "metric distortion estimate did not converge")
    O = Neighborhood(r)
    return O, _compact_for(p, O)


def _compact_for(p: ApproximationProblem, O: Neighborhood) -> CompactRegion:
    m = working_model(p)
    full = m.full_region()
    if full is not None:
        return full
    K = m.product_hull(p.C, p.C).hull(m.inflate(p.C, p.U.radius))
    return m.inflate(K, O.radius)


# candidates and solving ------------------------------------------------------

def build_candidates(p: ApproximationProblem, O: Neighborhood, K: CompactRegion,
                     cap: int = DEFAULT_CAP) -> CandidateFamily:
    m = working_model(p)
    grid = build_grid(m, K, O, cap)
    F = grid.centers
    c_index = np.flatnonzero(m.contains(p.C, F))
    radius = 2 * O.radius
    tree = cKDTree(m.chart(F), boxsize=m.boxsize)
    c = len(c_index)
    counts = np.zeros(c * c, dtype=np.int64)
    chunks = []
    for gp, g in enumerate(c_index):
        prods = m.canonical(m.mul(F[g][None, :], F[c_index]))
        reach = m.left_reach(prods, radius) * (1 + 1e-9) + 2 * SLACK
        hits = tree.query_ball_point(m.chart(prods), reach, p=np.inf, return_sorted=True)
        owner = np.repeat(np.arange(c), [len(hh) for hh in hits])
        cand = np.fromiter((x for hh in hits for x in hh), dtype=np.int64, count=len(owner))
        if len(cand):
            keep = left_distance(m, prods[owner], F[cand]) <= radius + SLACK
            owner, cand = owner[keep], cand[keep]
        counts[gp * c:(gp + 1) * c] = np.bincount(owner, minlength=c)
        chunks.append(cand)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    indices = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return CandidateFamily(m, grid, c_index, indptr, indices, radius, O, K, p.side)


def _solve_line(cf: CandidateFamily, line_pos: int):
    sets = cf.local_sets(line_pos)
    system = SetSystem(cf.n, tuple(tuple(s.tolist()) for s in sets))
    return sdr(system), system


def solve_left_quasigroup(cf: CandidateFamily, threads: int = 1) -> FiniteLeftQuasigroup:
    """One SDR per stored row; raises :class:`HallViolation` for the first
    line, in index order, that fails. For ``cf.side == "right"`` the rows of
    the opposite-group table become the columns of the result."""
    n, c_index = cf.n, cf.c_index
    in_c = np.zeros(n, dtype=bool)
    in_c[c_index] = True
    outside = np.flatnonzero(~in_c)
    lines = range(len(c_index))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda lp: _solve_line(cf, lp), lines))
    else:
        results = [_solve_line(cf, lp) for lp in lines]
    # lines through points outside C carry no constraint: identity permutation
    table = np.tile(np.arange(n, dtype=np.int64), (n, 1))
    for lp, (res, system) in zip(lines, results):
        line = int(c_index[lp])
        if not res.ok:
            subset = tuple(int(c_index[k]) for k in res.violator)
            raise HallViolation(line, subset, system.union_size(res.violator), cf.side)
        reps = np.array(res.representatives, dtype=np.int64)
        used = np.zeros(n, dtype=bool)
        used[reps] = True
        leftover = np.flatnonzero(~used)
        table[line, c_index] = reps
        table[line, outside] = leftover
    base = getattr(cf.model, "base", cf.model)
    if cf.side == "right":
        table = table.T.copy()
    return FiniteLeftQuasigroup(table, cf.grid.centers.copy(), base, cf.side)


def build_approximation(p: ApproximationProblem, max_retries: int = MAX_RETRIES,
                        cap: int = DEFAULT_CAP, threads: int = 1):
    """Construct and verify; returns ``(quasigroup, report)``."""
    O, _ = choose_parameters(p)
    retries = 0
    while True:
        K = _compact_for(p, O)
        cf = build_candidates(p, O, K, cap)
        try:
            q = solve_left_quasigroup(cf, threads)
            break
        except HallViolation as exc:
            if retries >= max_retries:
                raise ApproximationFailed(f"retries exhausted: {exc}") from exc
            retries += 1
            O = Neighborhood(O.radius / 2)
    report = verify_approximation(q, p)
    report.retries = retries
    report.o_radius = O.radius
    return q, report


# verification --------------------------------------------------------------

def _nearest_left_distance(m: GroupModel, centers: np.ndarray, points: np.ndarray,
                           chunk: int = 256) -> np.ndarray:
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        pts = points[s:s + chunk]
        d = left_distance(m, centers[None, :, :], pts[:, None, :])
        out[s:s + chunk] = d.min(axis=1)
    return out


def verify_approximation(q: FiniteLeftQuasigroup, p: ApproximationProblem) -> ApproximationReport:
    """Grid check on ``C`` sampled at ``U.radius/4`` and homomorphism check
    over all pairs with ``j(x), j(y), j(x) j(y)`` in ``C``; both by direct scan.
    Right quasigroups are checked in mirrored form via the opposite group."""
    m, C, U = working_model(p), p.C, p.U
    table = q.table.T if p.side == "right" else q.table
    J = q.embedding
    samples = m.lattice_points(C, U.radius / 4)
    grid_defect = float(_nearest_left_distance(m, J, samples).max()) if len(samples) else 0.0
    X = np.flatnonzero(m.contains(C, J))
    hom_defect, pairs, witness = 0.0, 0, None
    for s in range(0, len(X), 128):
        xs = X[s:s + 128]
        prod = m.canonical(m.mul(J[xs][:, None, :], J[X][None, :, :]))
        qual = m.contains(C, prod.reshape(-1, m.dim)).reshape(prod.shape[:2])
        got = J[table[np.ix_(xs, X)]]
        defect = np.where(qual, left_distance(m, prod, got), 0.0)
        pairs += int(qual.sum())
        if defect.size:
            hom_defect = max(hom_defect, float(defect.max()))
        bad = np.argwhere(defect > U.radius + SLACK)
        if witness is None and len(bad):
            a, b = bad[0]
            witness = (int(xs[a]), int(X[b]))
            if p.side == "right":  # opposite-group pair (x, y) is y x here
                witness = witness[::-1]
    return ApproximationReport(grid_defect, hom_defect, pairs,
                               u_radius=U.radius, witness=witness, n=q.n)


# serialization --------------------------------------------------------------

def approximation_to_json(q: FiniteLeftQuasigroup, p: ApproximationProblem,
                          report: ApproximationReport) -> dict:
    emb = [list(q.element(i)) for i in range(q.n)]
    return {"schema_version": SCHEMA_VERSION, **p.to_json(), "n": q.n,
            "table": q.table.ravel().tolist(), "embedding": emb, "report": report.to_json()}


def approximation_from_json(data: dict):
    m = get_model(data["model"])
    p = ApproximationProblem(m, CompactRegion(tuple(tuple(b) for b in data["C"])),
                             Neighborhood(float(data["U"])), data.get("side", "left"))
    n = int(data["n"])
    table = np.asarray(data["table"], dtype=np.int64)
    if table.size != n * n:
        raise ValueError(f"table has {table.size} entries, expected {n * n}")
    emb = np.asarray(data["embedding"], dtype=float)
    if emb.shape != (n, m.dim):
        raise ValueError(f"embedding has shape {emb.shape}, expected {(n, m.dim)}")
    return FiniteLeftQuasigroup(table.reshape(n, n), emb, m, p.side), p
