"""Bipartite maximum matching and systems of distinct representatives.

Sets are on the left, universe elements on the right. Everything runs in
index order, so a given system always yields the same matching.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class SetSystem:
    universe_size: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sets = tuple(tuple(sorted(set(int(x) for x in s))) for s in self.sets)
        for k, s in enumerate(sets):
            if s and (s[0] < 0 or s[-1] >= self.universe_size):
                raise ValueError(f"set {k} has elements outside [0, {self.universe_size})")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def of(cls, universe_size: int, sets: Sequence[Sequence[int]]) -> "SetSystem":
        return cls(universe_size, tuple(tuple(s) for s in sets))

    def union_size(self, indices) -> int:
        return len(set().union(*(self.sets[k] for k in indices)))


@dataclass(frozen=True)
class SdrResult:
    representatives: tuple[int, ...] | None = None
    violator: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.representatives is None) == (self.violator is None):
            raise ValueError("exactly one of representatives / violator must be set")

    @property
    def ok(self) -> bool:
        return self.representatives is not None

    def check(self, system: SetSystem) -> bool:
        """Verify whichever branch is populated directly against ``system``."""
        if self.ok:
            reps = self.representatives
            return (len(reps) == len(system.sets) and len(set(reps)) == len(reps)
                    and all(r in s for r, s in zip(reps, system.sets)))
        return system.union_size(self.violator) < len(self.violator)


def _hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int):
    m = len(adj)
    match_l = [-1] * m
    match_r = [-1] * n_right
    while True:
        dist = [-1] * m
        queue = deque()
        for u in range(m):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return match_l, match_r
        pos = [0] * m
        for root in range(m):
            if match_l[root] != -1 or dist[root] != 0:
                continue
            stack, via = [root], []
            while stack:
                u = stack[-1]
                nbrs = adj[u]
                step = None
                while pos[u] < len(nbrs):
                    v = nbrs[pos[u]]
                    pos[u] += 1
                    w = match_r[v]
                    if w == -1 or dist[w] == dist[u] + 1:
                        step = (v, w)
                        break
                if step is None:
                    dist[u] = -2
                    stack.pop()
                    if via:
                        via.pop()
                    continue
                v, w = step
                via.append(v)
                if w == -1:
                    for uu, vv in zip(stack, via):
                        match_l[uu] = vv
                        match_r[vv] = uu
                    break
                stack.append(w)


def max_matching(system: SetSystem) -> dict[int, int]:
    """Maximum matching as ``{set index: element index}``."""
    match_l, _ = _hopcroft_karp(system.sets, system.universe_size)
    return {u: v for u, v in enumerate(match_l) if v != -1}


def _alternating_tree(adj, match_r, root) -> list[int]:
    seen_l, seen_r = {root}, set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            w = match_r[v]
            if w != -1 and w not in seen_l:
                seen_l.add(w)
                queue.append(w)
    return sorted(seen_l)


def sdr(system: SetSystem) -> SdrResult:
    """Representatives if every set can be matched, else a Hall violator
    (sets reachable by alternating paths from the first unmatched set)."""
    match_l, match_r = _hopcroft_karp(system.sets, system.universe_size)
    for u, v in enumerate(match_l):
        if v == -1:
            return SdrResult(violator=tuple(_alternating_tree(system.sets, match_r, u)))
    return SdrResult(representatives=tuple(match_l))
