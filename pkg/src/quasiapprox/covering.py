"""Grids and covering numbers ``(A:O)`` under left-translated metric balls."""
from __future__ import annotations

import functools
import heapq
import operator
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .group_models import (DEFAULT_CAP, SLACK, CapExceeded, CompactRegion, GroupModel,
                           Neighborhood, left_distance)

EXACT_CANDIDATE_LIMIT = 24


@dataclass
class Cover:
    centers: np.ndarray
    radius: float

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if len(self.centers) == 0:
            raise ValueError("a cover needs at least one center")

    def __len__(self):
        return len(self.centers)

    def covers(self, m: GroupModel, points) -> np.ndarray:
        inc = ball_incidence(m, self.centers, points, self.radius)
        hit = np.zeros(len(np.atleast_2d(points)), dtype=bool)
        for idx in inc:
            hit[idx] = True
        return hit

    def to_json(self):
        return {"centers": self.centers.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class CoveringNumber:
    value: int
    exact: bool


def ball_incidence(m: GroupModel, centers, points, radius: float) -> list[np.ndarray]:
    """For each center ``c``, the sorted indices of ``points`` inside ``cU``
    where ``U`` is the closed ball of ``radius`` (with float slack)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return [np.empty(0, dtype=np.int64) for _ in centers]
    tree = cKDTree(m.chart(points), boxsize=m.boxsize)
    reach = m.left_reach(centers, radius) * (1 + 1e-9) + 2 * SLACK
    hits = tree.query_ball_point(m.chart(centers), reach, p=np.inf, return_sorted=True)
    out = []
    for c, cand in zip(centers, hits):
        cand = np.asarray(cand, dtype=np.int64)
        if len(cand):
            keep = left_distance(m, c, points[cand]) <= radius + SLACK
            cand = cand[keep]
        out.append(cand)
    return out


def _greedy(incidence: list[np.ndarray], n_points: int) -> list[int]:
    """Lazy greedy set cover; ties go to the lowest candidate index."""
    covered = np.zeros(n_points, dtype=bool)
    heap = [(-len(idx), i) for i, idx in enumerate(incidence)]
    heapq.heapify(heap)
    chosen = []
    remaining = n_points
    while remaining and heap:
        neg, i = heapq.heappop(heap)
        gain = int(np.count_nonzero(~covered[incidence[i]]))
        if gain == 0:
            continue
        if gain < -neg:
            heapq.heappush(heap, (-gain, i))
            continue
        chosen.append(i)
        covered[incidence[i]] = True
        remaining -= gain
    if remaining:
        raise ValueError(f"{remaining} points cannot be covered by any candidate")
    return chosen


def _prune(chosen: list[int], incidence: list[np.ndarray], n_points: int) -> list[int]:
    count = np.zeros(n_points, dtype=np.int64)
    for i in chosen:
        count[incidence[i]] += 1
    kept = []
    for i in chosen:
        if len(incidence[i]) and np.all(count[incidence[i]] >= 2):
            count[incidence[i]] -= 1
        else:
            kept.append(i)
    return kept


def build_grid(m: GroupModel, K: CompactRegion, O: Neighborhood, cap: int = DEFAULT_CAP) -> Cover:
    """O-grid of ``K``, checked on a sample lattice at ``O.radius/4``.

    The model's cover lattice is tried first; if it leaves samples uncovered
    (metric distortion), a lazy greedy set cover over a lattice at
    ``O.radius/2`` is used instead. Redundant centers are pruned either way.
    """
    r = O.radius
    samples = m.lattice_points(K, r / 4, cap)
    candidates = m.cover_lattice(K, r, cap)
    incidence = ball_incidence(m, candidates, samples, r)
    if _coverage(incidence, len(samples)).all():
        chosen = list(range(len(candidates)))
    else:
        candidates = m.lattice_points(K, r / 2, cap)
        incidence = ball_incidence(m, candidates, samples, r)
        seen = _coverage(incidence, len(samples))
        if not seen.all():
            extra = samples[~seen]
            candidates = np.concatenate([candidates, extra])
            incidence += ball_incidence(m, extra, samples, r)
        if len(candidates) > cap:
            raise CapExceeded(f"{len(candidates)} grid candidates exceed cap {cap}")
        chosen = _greedy(incidence, len(samples))
    chosen = _prune(chosen, incidence, len(samples))
    centers = candidates[sorted(chosen)]
    order = np.lexsort(centers.T[::-1])
    return Cover(centers[order], r)


def _coverage(incidence, n_points) -> np.ndarray:
    seen = np.zeros(n_points, dtype=bool)
    for idx in incidence:
        seen[idx] = True
    return seen


def covering_number_exact(points, candidates, radius: float, m: GroupModel) -> CoveringNumber:
    """Minimum number of ``radius``-balls centered at ``candidates`` covering
    ``points``, by branch and bound on bitmasks."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if len(candidates) > EXACT_CANDIDATE_LIMIT:
        raise ValueError(f"exact covering limited to {EXACT_CANDIDATE_LIMIT} candidates, "
                         f"got {len(candidates)}; use covering_number_greedy")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    if n == 0:
        return CoveringNumber(0, True)
    masks = []
    for idx in ball_incidence(m, candidates, points, radius):
        mask = 0
        for i in idx:
            mask |= 1 << int(i)
        masks.append(mask)
    full = (1 << n) - 1
    if functools.reduce(operator.or_, masks, 0) != full:
        raise ValueError("points cannot be covered by the candidates")
    covering = [[c for c, mk in enumerate(masks) if mk >> p & 1] for p in range(n)]
    best = [len(masks) + 1]
    widest = max(bin(mk).count("1") for mk in masks)

    def search(covered: int, used: int):
        if covered == full:
            best[0] = min(best[0], used)
            return
        left = n - bin(covered).count("1")
        if used + -(-left // widest) >= best[0]:
            return
        # branch on the uncovered point with the fewest covering candidates
        pick = min((p for p in range(n) if not covered >> p & 1), key=lambda p: len(covering[p]))
        for c in sorted(covering[pick], key=lambda c: -bin(masks[c] & ~covered).count("1")):
            search(covered | masks[c], used + 1)

    search(0, 0)
    return CoveringNumber(best[0], True)


def covering_number_greedy(points, candidates, radius: float, m: GroupModel) -> CoveringNumber:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return CoveringNumber(0, False)
    incidence = ball_incidence(m, candidates, points, radius)
    return CoveringNumber(len(_greedy(incidence, len(points))), False)
