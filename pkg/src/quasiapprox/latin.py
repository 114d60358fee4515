"""Latin squares, latin rectangles and embedding of partial tables.

An ``n x n`` partial table on ``k`` symbols is embedded in a latin square of
order ``r = max(2n, k)`` in three steps, each a sequence of SDR problems:

1. fill the empty cells row by row (every empty cell sees at least
   ``r - 2n + 2`` free symbols, so Hall's condition is automatic);
2. widen the full ``n x n`` block to an ``n x r`` latin rectangle by
   edge-colouring the row/missing-symbol graph with ``r - n`` colours
   (pad to a regular bipartite multigraph, peel perfect matchings);
3. add the remaining ``r - n`` rows with :func:`extend_rectangle`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .group_models import CompactRegion, GroupModel, to_element
from .matching import SetSystem, sdr


@dataclass(frozen=True)
class LatinCheck:
    ok: bool
    witness: tuple | None = None  # ("row" | "col", index, symbol)

    def __bool__(self):
        return self.ok


def verify_latin(table) -> LatinCheck:
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"expected a square table, got shape {t.shape}")
    n = len(t)
    for axis, label in ((0, "row"), (1, "col")):
        for i in range(n):
            line = t[i] if axis == 0 else t[:, i]
            seen = set()
            for s in line.tolist():
                if s in seen or not (0 <= s < n):
                    return LatinCheck(False, (label, i, s))
                seen.add(s)
    return LatinCheck(True)


def _is_rectangle(rows: np.ndarray, n_symbols: int) -> bool:
    if rows.size == 0:
        return True
    if rows.min() < 0 or rows.max() >= n_symbols:
        return False
    return (all(len(set(r)) == len(r) for r in rows.tolist())
            and all(len(set(c)) == len(c) for c in rows.T.tolist()))


def extend_rectangle(rect, n: int | None = None) -> np.ndarray:
    """Add one row to an ``r x n`` latin rectangle on symbols ``0..n-1``."""
    rows = np.asarray(rect, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if n is None:
        n = rows.shape[1]
    if rows.shape[1] != n or not _is_rectangle(rows, n):
        raise ValueError("input is not a latin rectangle")
    if len(rows) >= n:
        raise ValueError("rectangle is already square")
    full = set(range(n))
    sets = [sorted(full - set(rows[:, c].tolist())) for c in range(n)]
    res = sdr(SetSystem.of(n, sets))
    if not res.ok:  # regular bipartite graph; cannot happen for valid input
        raise RuntimeError("latin rectangle extension failed")
    return np.vstack([rows, np.array(res.representatives, dtype=np.int64)])


def complete_rectangle(rect, n: int | None = None) -> np.ndarray:
    rows = np.asarray(rect, dtype=np.int64)
    n = rows.shape[1] if n is None else n
    while len(rows) < n:
        rows = extend_rectangle(rows, n)
    return rows


@dataclass(frozen=True)
class LatinSquare:
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        check = verify_latin(t)
        if not check:
            raise ValueError(f"not a latin square: {check.witness}")
        object.__setattr__(self, "table", t)

    @property
    def order(self) -> int:
        return len(self.table)

    def to_json(self):
        return self.table.tolist()


@dataclass
class PartialLatinSquare:
    """``n x n`` table with some cells filled by symbol labels.

    ``symbols`` is the declared alphabet (defaults to the sorted labels in
    use); its length is the symbol count ``k``. Repeats within a row or a
    column are rejected here rather than during embedding.
    """

    order: int
    cells: dict[tuple[int, int], Hashable]
    symbols: list = field(default=None)

    def __post_init__(self):
        used = []
        rows: dict[int, set] = {}
        cols: dict[int, set] = {}
        for (i, j), s in sorted(self.cells.items(), key=lambda kv: kv[0]):
            if not (0 <= i < self.order and 0 <= j < self.order):
                raise ValueError(f"cell {(i, j)} outside a {self.order}x{self.order} table")
            if s in rows.setdefault(i, set()):
                raise ValueError(f"symbol {s!r} repeated in row {i}")
            if s in cols.setdefault(j, set()):
                raise ValueError(f"symbol {s!r} repeated in column {j}")
            rows[i].add(s)
            cols[j].add(s)
            used.append(s)
        if self.symbols is None:
            self.symbols = sorted(set(used))
        else:
            self.symbols = list(self.symbols)
            if len(set(self.symbols)) != len(self.symbols):
                raise ValueError("declared symbols must be distinct")
            missing = set(used) - set(self.symbols)
            if missing:
                raise ValueError(f"cells use undeclared symbols {sorted(missing, key=repr)}")

    @property
    def symbol_count(self) -> int:
        return len(self.symbols)

    @classmethod
    def from_triples(cls, n: int, triples, symbols=None) -> "PartialLatinSquare":
        return cls(n, {(int(i), int(j)): s for i, j, s in triples}, symbols)

    def triples(self) -> list:
        return [[i, j, s] for (i, j), s in sorted(self.cells.items())]


@dataclass
class LatinEmbedding:
    square: LatinSquare
    symbol_index: dict  # label -> symbol index of the square
    partial: PartialLatinSquare

    @property
    def order(self) -> int:
        return self.square.order

    def restriction_matches(self) -> bool:
        t = self.square.table
        return all(t[i, j] == self.symbol_index[s] for (i, j), s in self.partial.cells.items())


def embedding_order(n: int, k: int) -> int:
    return max(2 * n, k)


def _fill_block(block: np.ndarray, r: int) -> np.ndarray:
    n = len(block)
    for i in range(n):
        empty = [j for j in range(n) if block[i, j] < 0]
        if not empty:
            continue
        row_used = set(block[i][block[i] >= 0].tolist())
        sets = []
        for j in empty:
            col = block[:, j]
            col_used = set(col[col >= 0].tolist())
            sets.append([s for s in range(r) if s not in row_used and s not in col_used])
        res = sdr(SetSystem.of(r, sets))
        if not res.ok:
            raise RuntimeError("empty-cell fill failed")
        for j, s in zip(empty, res.representatives):
            block[i, j] = s
    return block


def _widen(block: np.ndarray, r: int) -> np.ndarray:
    n = len(block)
    delta = r - n
    if delta == 0:
        return block
    missing = [sorted(set(range(r)) - set(row.tolist())) for row in block]
    degree = np.zeros(r, dtype=np.int64)
    for ms in missing:
        degree[ms] += 1
    # multiplicity[v][s]: real rows 0..n-1 then delta padding rows
    mult = np.zeros((r, r), dtype=np.int64)
    for i, ms in enumerate(missing):
        mult[i, ms] = 1
    pad, filled = n, 0
    for s in range(r):
        need = delta - int(degree[s])
        while need:
            take = min(need, delta - filled)
            mult[pad, s] += take
            need -= take
            filled += take
            if filled == delta:
                pad, filled = pad + 1, 0
    out = np.empty((n, r), dtype=np.int64)
    out[:, :n] = block
    for colour in range(delta):
        sets = [np.flatnonzero(mult[v]).tolist() for v in range(r)]
        res = sdr(SetSystem.of(r, sets))
        if not res.ok:
            raise RuntimeError("regular multigraph without perfect matching")
        for v, s in enumerate(res.representatives):
            mult[v, s] -= 1
        out[:, n + colour] = res.representatives[:n]
    return out


def embed_partial(p: PartialLatinSquare) -> LatinEmbedding:
    """Embed ``p`` in a latin square of order ``max(2n, k)``.

    Labels are mapped to symbol indices by their position in ``p.symbols``.
    """
    n, k = p.order, p.symbol_count
    r = embedding_order(n, k)
    index = {s: i for i, s in enumerate(p.symbols)}
    if not p.cells:
        # nothing to respect: row i of the cyclic square is shifted by i
        cyclic = (np.arange(r)[:, None] + np.arange(r)[None, :]) % r
        return LatinEmbedding(LatinSquare(cyclic), index, p)
    block = np.full((n, n), -1, dtype=np.int64)
    for (i, j), s in p.cells.items():
        block[i, j] = index[s]
    block = _fill_block(block, r)
    rect = _widen(block, r)
    square = LatinSquare(complete_rectangle(rect, r))
    return LatinEmbedding(square, index, p)


@dataclass
class GroupWindow:
    """Finite fragment ``S`` of a discrete group. Products are recorded only
    when they land in ``universe`` (``None`` means the whole group)."""

    model: GroupModel
    elements: list
    universe: CompactRegion | None = None

    def __post_init__(self):
        if not self.model.exact:
            raise ValueError(f"{self.model.name} is not a discrete model")
        self.elements = [to_element(self.model, e) for e in self.elements]
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("window elements must be distinct")
        if self.universe is not None:
            inside = self.model.contains(self.universe, np.array(self.elements, dtype=float))
            if not inside.all():
                raise ValueError("window elements must lie in the universe")

    @property
    def partial_products(self) -> dict:
        m = self.model
        pts = np.array(self.elements, dtype=float)
        prod = m.canonical(m.mul(pts[:, None, :], pts[None, :, :]))
        n = len(pts)
        keep = np.ones((n, n), dtype=bool)
        if self.universe is not None:
            keep = m.contains(self.universe, prod.reshape(-1, m.dim)).reshape(n, n)
        return {(i, j): to_element(m, prod[i, j]) for i in range(n) for j in range(n) if keep[i, j]}


def window_to_partial(w: GroupWindow) -> PartialLatinSquare:
    """Rows and columns indexed by ``S``; the alphabet lists ``S`` first (so
    row ``i``, column ``i`` and symbol ``i`` are the same element), then the
    extra products in sorted order."""
    cells = w.partial_products
    extra = sorted(set(cells.values()) - set(w.elements))
    return PartialLatinSquare(len(w.elements), cells, list(w.elements) + extra)


def box_window(model: GroupModel, radius: int, universe: CompactRegion | None = None) -> GroupWindow:
    """All lattice elements with every coordinate in ``[-radius, radius]``."""
    region = CompactRegion(((-radius, radius),) * model.dim)
    pts = model.lattice_points(region, 1)
    return GroupWindow(model, [tuple(p) for p in pts], universe)


def square_from_rows(rows: Sequence[Sequence[int]]) -> LatinSquare:
    return LatinSquare(np.asarray(rows, dtype=np.int64))
