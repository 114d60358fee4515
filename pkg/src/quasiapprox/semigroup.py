"""Finite semigroups given by index tables: ideals, maximal ideal chains,
quotients, classification, Rees matrix semigroups and group extraction.

Zero convention: a zero is always an explicit element. ``quotient`` collapses
the ideal to a zero placed last, so the quotient by the empty ideal is the
semigroup with a zero adjoined. ``rees_construct`` likewise appends its zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

ZERO_SEMIGROUP = "zero-semigroup"
ZERO_SIMPLE = "0-simple"
GROUP = "group"
OTHER = "other"


@dataclass(frozen=True)
class AssociativityCheck:
    ok: bool
    witness: tuple | None = None  # (a, b, c) with (ab)c != a(bc)

    def __bool__(self):
        return self.ok


def verify_associativity(table) -> AssociativityCheck:
    """Full triple scan, one vectorized slice per left factor."""
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"expected a square table, got shape {t.shape}")
    n = len(t)
    if n and (t.min() < 0 or t.max() >= n):
        raise ValueError("table entries out of range")
    for a in range(n):
        left = t[t[a]]        # [b, c] -> (ab)c
        right = t[a][t]       # [b, c] -> a(bc)
        bad = np.argwhere(left != right)
        if len(bad):
            b, c = bad[0]
            return AssociativityCheck(False, (a, int(b), int(c)))
    return AssociativityCheck(True)


def _find_zero(t: np.ndarray) -> int | None:
    n = len(t)
    zs = [z for z in range(n) if np.all(t[z] == z) and np.all(t[:, z] == z)]
    assert len(zs) <= 1, "a zero is unique"
    return zs[0] if zs else None


@dataclass(frozen=True, eq=False)
class FiniteSemigroup:
    """Associative ``n x n`` index table. ``labels`` optionally names each
    element (for sub- and quotient semigroups: indices in the parent)."""

    table: np.ndarray
    zero: int | None = None
    labels: tuple | None = None

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        check = verify_associativity(t)
        if not check:
            raise ValueError(f"table is not associative at {check.witness}")
        object.__setattr__(self, "table", t)
        found = _find_zero(t)
        if self.zero is not None and self.zero != found:
            raise ValueError(f"element {self.zero} is not a zero")
        object.__setattr__(self, "zero", found)
        if self.labels is not None and len(self.labels) != len(t):
            raise ValueError("one label per element expected")

    @property
    def n(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def to_json(self):
        return {"n": self.n, "table": self.table.tolist(), "zero": self.zero}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteSemigroup":
        t = np.asarray(data["table"], dtype=np.int64)
        if "n" in data and t.shape != (int(data["n"]), int(data["n"])):
            raise ValueError(f"table shape {t.shape} does not match n={data['n']}")
        return cls(t, data.get("zero"))


def find_zero(s: FiniteSemigroup) -> int | None:
    return s.zero


# ideals ---------------------------------------------------------------------

def principal_ideal(s: FiniteSemigroup, x: int) -> frozenset:
    """``S^1 x S^1``: ``x``, ``Sx``, ``xS`` and ``SxS``."""
    t = s.table
    mask = np.zeros(s.n, dtype=bool)
    mask[x] = True
    mask[t[:, x]] = True
    mask[t[x]] = True
    mask[t[t[:, x]].ravel()] = True
    return frozenset(np.flatnonzero(mask).tolist())


def principal_ideal_matrix(s: FiniteSemigroup) -> np.ndarray:
    """Row ``x`` is the membership mask of ``S^1 x S^1``."""
    out = np.zeros((s.n, s.n), dtype=bool)
    for x in range(s.n):
        out[x, list(principal_ideal(s, x))] = True
    return out


def is_ideal(s: FiniteSemigroup, ideal) -> bool:
    idx = np.array(sorted(ideal), dtype=np.int64)
    if len(idx) == 0:
        return True
    mask = np.zeros(s.n, dtype=bool)
    mask[idx] = True
    return bool(mask[s.table[:, idx]].all() and mask[s.table[idx, :]].all())


@dataclass
class IdealChain:
    """``S = I_0 > I_1 > ... > I_r > empty``; ``certified`` records that every
    step was checked to be an ideal with nothing strictly in between."""

    chain: list
    certified: bool = False

    def to_json(self):
        return {"chain": [sorted(i) for i in self.chain], "certified": self.certified}


def _next_level(P: np.ndarray, level: frozenset) -> frozenset:
    members = sorted(level)
    # x is on top inside the level when no member's principal ideal strictly contains its own
    for x in members:
        if not any(P[y, x] and not P[x, y] for y in members):
            jclass = {y for y in members if P[x, y] and P[y, x]}
            return level - jclass
    raise AssertionError("finite level without a maximal J-class")


def maximal_ideal_chain(s: FiniteSemigroup) -> IdealChain:
    """Repeatedly drop the lowest-index maximal J-class of the current level.

    The remainder is an ideal, and any ideal strictly between it and the
    current level contains a dropped element and so its whole principal
    ideal; both facts are checked for every step.
    """
    P = principal_ideal_matrix(s)
    level = frozenset(range(s.n))
    chain = [level]
    ok = True
    while level:
        nxt = _next_level(P, level)
        ok &= is_ideal(s, nxt) and nxt < level
        for z in level - nxt:
            ok &= (nxt | set(np.flatnonzero(P[z]).tolist())) == level
        chain.append(nxt)
        level = nxt
    return IdealChain(chain, ok)


# quotients and classification ------------------------------------------------

def subsemigroup(s: FiniteSemigroup, elements) -> FiniteSemigroup:
    """Restriction to ``elements``; labels are the indices in ``s``."""
    idx = sorted(set(int(e) for e in elements))
    pos = np.full(s.n, -1, dtype=np.int64)
    pos[idx] = np.arange(len(idx))
    table = pos[s.table[np.ix_(idx, idx)]]
    if (table < 0).any():
        raise ValueError("elements are not closed under the product")
    return FiniteSemigroup(table, labels=tuple(idx))


def quotient(s: FiniteSemigroup, ideal) -> FiniteSemigroup:
    """``(S \\ I)`` plus a zero placed last; products landing in ``I`` become
    the zero. The empty ideal gives ``S`` with a zero adjoined. Labels are
    the indices in ``s``, with ``None`` for the zero."""
    ideal = frozenset(int(i) for i in ideal)
    if not is_ideal(s, ideal):
        raise ValueError("not an ideal")
    keep = [e for e in range(s.n) if e not in ideal]
    z = len(keep)
    pos = np.full(s.n, z, dtype=np.int64)
    pos[keep] = np.arange(z)
    table = np.full((z + 1, z + 1), z, dtype=np.int64)
    if keep:
        table[:z, :z] = pos[s.table[np.ix_(keep, keep)]]
    return FiniteSemigroup(table, labels=tuple(keep) + (None,))


def chain_factors(s: FiniteSemigroup, chain: IdealChain | None = None) -> list[FiniteSemigroup]:
    """``I_k / I_{k+1}`` for consecutive levels of the chain; labels are
    indices in ``s`` (``None`` for the collapsed zero)."""
    chain = chain or maximal_ideal_chain(s)
    out = []
    for upper, lower in zip(chain.chain, chain.chain[1:]):
        part = subsemigroup(s, upper)
        local = {e: k for k, e in enumerate(part.labels)}
        q = quotient(part, [local[e] for e in lower])
        labels = tuple(None if k is None else part.labels[k] for k in q.labels)
        out.append(FiniteSemigroup(q.table, labels=labels))
    return out


@dataclass(frozen=True)
class Classification:
    verdict: str
    witness: dict = field(default_factory=dict)

    def to_json(self):
        return {"verdict": self.verdict, "witness": self.witness}


def group_identity(s: FiniteSemigroup) -> int | None:
    """Identity index if ``s`` is a group, else ``None``."""
    t = s.table
    ar = np.arange(s.n)
    units = [e for e in range(s.n) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    if not units:
        return None
    e = units[0]
    for a in range(s.n):
        if not np.any((t[a] == e) & (t[:, a] == e)):
            return None
    return e


def classify(s: FiniteSemigroup) -> Classification:
    t, z = s.table, s.zero
    if z is not None and np.all(t == z):
        return Classification(ZERO_SEMIGROUP)
    e = group_identity(s)
    if e is not None:
        return Classification(GROUP, {"identity": e})
    if z is not None:
        for x in range(s.n):
            if x == z:
                continue
            ideal = principal_ideal(s, x)
            if len(ideal) != s.n:
                return Classification(OTHER, {"proper_ideal": sorted(ideal), "generator": x})
        return Classification(ZERO_SIMPLE)
    for x in range(s.n):
        ideal = principal_ideal(s, x)
        if len(ideal) != s.n:
            return Classification(OTHER, {"proper_ideal": sorted(ideal), "generator": x})
    return Classification(OTHER, {"simple_without_zero": True})


# Rees matrix semigroups ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReesParams:
    """``sandwich[i][j]`` is an element index of ``H`` or ``None`` for zero;
    shape ``n_rows x m_cols``."""

    n_rows: int
    m_cols: int
    H: FiniteSemigroup
    sandwich: tuple

    def __post_init__(self):
        if self.n_rows < 1 or self.m_cols < 1:
            raise ValueError("Rees dimensions must be positive")
        if group_identity(self.H) is None:
            raise ValueError("H must be a group")
        rows = tuple(tuple(None if v is None else int(v) for v in r) for r in self.sandwich)
        if len(rows) != self.n_rows or any(len(r) != self.m_cols for r in rows):
            raise ValueError(f"sandwich must be {self.n_rows}x{self.m_cols}")
        if any(v is not None and not 0 <= v < self.H.n for r in rows for v in r):
            raise ValueError("sandwich entries must be elements of H or None")
        object.__setattr__(self, "sandwich", rows)

    @property
    def regular(self) -> bool:
        rho = self.sandwich
        return (all(any(v is not None for v in r) for r in rho)
                and all(any(r[j] is not None for r in rho) for j in range(self.m_cols)))


def rees_index(p: ReesParams, i: int, j: int, h: int) -> int:
    return (i * p.m_cols + j) * p.H.n + h


def rees_construct(p: ReesParams) -> FiniteSemigroup:
    """``(i1, j1, h1)(i2, j2, h2) = (i1, j2, h1 rho(i2, j1) h2)``, or zero
    when ``rho(i2, j1)`` is zero. Elements are ordered ``(i, j, h)``
    lexicographically with the zero last."""
    n, m, k = p.n_rows, p.m_cols, p.H.n
    size = n * m * k
    H = p.H.table
    table = np.full((size + 1, size + 1), size, dtype=np.int64)
    for (i1, j1, h1), (i2, j2, h2) in itertools.product(
            itertools.product(range(n), range(m), range(k)), repeat=2):
        r = p.sandwich[i2][j1]
        if r is None:
            continue
        table[rees_index(p, i1, j1, h1), rees_index(p, i2, j2, h2)] = \
            rees_index(p, i1, j2, int(H[H[h1, r], h2]))
    labels = tuple(itertools.product(range(n), range(m), range(k))) + (None,)
    return FiniteSemigroup(table, labels=labels)


def sandwich(s: FiniteSemigroup, x: int) -> FiniteSemigroup:
    """The subsemigroup ``x S x``."""
    elems = np.unique(s.table[s.table[x]][:, x])
    return subsemigroup(s, elems.tolist())


def adjoin_zero(s: FiniteSemigroup) -> FiniteSemigroup:
    return quotient(s, ())


def adjoin_identity(s: FiniteSemigroup) -> FiniteSemigroup:
    n = s.n
    table = np.empty((n + 1, n + 1), dtype=np.int64)
    table[:n, :n] = s.table
    table[n, :] = np.arange(n + 1)
    table[:, n] = np.arange(n + 1)
    return FiniteSemigroup(table)


# group extraction --------------------------------------------------------------

@dataclass
class Extraction:
    """``group`` is ``None`` on failure; ``embedding[g]`` is the index in the
    input semigroup of group element ``g``; ``stages`` logs each step."""

    group: FiniteSemigroup | None
    embedding: tuple
    verdict: str
    stages: list

    def to_json(self):
        return {"verdict": self.verdict,
                "group": self.group.to_json() if self.group is not None else None,
                "embedding": list(self.embedding), "stages": self.stages}


def extract_group(s: FiniteSemigroup, near_unit: int) -> Extraction:
    """Chain level holding ``near_unit``, its factor, the sandwich at
    ``near_unit`` and finally that sandwich without its zero."""
    if not 0 <= near_unit < s.n:
        raise ValueError(f"near_unit {near_unit} outside 0..{s.n - 1}")
    stages = []
    chain = maximal_ideal_chain(s)
    stages.append({"stage": "chain", "levels": len(chain.chain), "certified": chain.certified})
    k = next(k for k, (a, b) in enumerate(zip(chain.chain, chain.chain[1:]))
             if near_unit in a and near_unit not in b)
    factor = chain_factors(s, chain)[k]
    verdict = classify(factor)
    stages.append({"stage": "factor", "level": k, "size": factor.n, "verdict": verdict.verdict})
    if verdict.verdict == ZERO_SEMIGROUP:
        return Extraction(None, (), ZERO_SEMIGROUP, stages)
    x = factor.labels.index(near_unit)
    F = sandwich(factor, x)
    f_verdict = classify(F)
    stages.append({"stage": "sandwich", "size": F.n, "verdict": f_verdict.verdict})
    if f_verdict.verdict == ZERO_SEMIGROUP:
        return Extraction(None, (), ZERO_SEMIGROUP, stages)
    nonzero = [i for i in range(F.n) if i != F.zero]
    try:
        G = subsemigroup(F, nonzero)
    except ValueError:
        stages.append({"stage": "strip-zero", "closed": False})
        return Extraction(None, (), OTHER, stages)
    e = group_identity(G)
    stages.append({"stage": "strip-zero", "closed": True, "size": G.n, "group": e is not None})
    if e is None:
        return Extraction(None, (), OTHER, stages)
    # G labels index F, F labels index the factor, factor labels index s
    embedding = tuple(factor.labels[F.labels[i]] for i in G.labels)
    return Extraction(FiniteSemigroup(G.table), embedding, GROUP, stages)


# generators of test material ---------------------------------------------------

def cyclic_group(n: int) -> FiniteSemigroup:
    a = np.arange(n)
    return FiniteSemigroup((a[:, None] + a[None, :]) % n)


def direct_product(a: FiniteSemigroup, b: FiniteSemigroup) -> FiniteSemigroup:
    na, nb = a.n, b.n
    i = np.arange(na * nb)
    x, y = i // nb, i % nb
    table = a.table[x[:, None], x[None, :]] * nb + b.table[y[:, None], y[None, :]]
    return FiniteSemigroup(table)


def transformation_semigroup(generators) -> FiniteSemigroup:
    """Closure of maps on ``{0..k-1}`` (tuples) under composition; the
    product ``f g`` means apply ``f`` then ``g``. Elements in discovery order."""
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    elems, index = [], {}
    frontier = []
    for g in gens:
        if g not in index:
            index[g] = len(elems)
            elems.append(g)
            frontier.append(g)
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                h = tuple(g[v] for v in f)
                if h not in index:
                    index[h] = len(elems)
                    elems.append(h)
                    nxt.append(h)
        frontier = nxt
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for a, f in enumerate(elems):
        for b, g in enumerate(elems):
            table[a, b] = index[tuple(g[v] for v in f)]
    return FiniteSemigroup(table, labels=tuple(elems))


def _quaternion_group() -> FiniteSemigroup:
    # elements +-1, +-i, +-j, +-k as (sign, unit) with unit 0..3
    unit_mul = {(0, u): (1, u) for u in range(4)}
    unit_mul.update({(u, 0): (1, u) for u in range(4)})
    for u in (1, 2, 3):
        unit_mul[(u, u)] = (-1, 0)
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        unit_mul[(a, b)] = (1, c)
        unit_mul[(b, a)] = (-1, c)
    elems = [(s, u) for s in (1, -1) for u in range(4)]
    idx = {e: k for k, e in enumerate(elems)}
    table = np.empty((8, 8), dtype=np.int64)
    for (s1, u1), (s2, u2) in itertools.product(elems, repeat=2):
        sg, u = unit_mul[(u1, u2)]
        table[idx[(s1, u1)], idx[(s2, u2)]] = idx[(s1 * s2 * sg, u)]
    return FiniteSemigroup(table)


def small_groups() -> dict[str, FiniteSemigroup]:
    """One representative of each isomorphism class of groups of order <= 8."""
    z = cyclic_group
    s3 = transformation_semigroup([(1, 0, 2), (1, 2, 0)])
    d4 = transformation_semigroup([(1, 2, 3, 0), (3, 2, 1, 0)])
    return {"Z1": z(1), "Z2": z(2), "Z3": z(3), "Z4": z(4), "Z2xZ2": direct_product(z(2), z(2)),
            "Z5": z(5), "Z6": z(6), "S3": FiniteSemigroup(s3.table), "Z7": z(7), "Z8": z(8),
            "Z4xZ2": direct_product(z(4), z(2)),
            "Z2xZ2xZ2": direct_product(direct_product(z(2), z(2)), z(2)),
            "D4": FiniteSemigroup(d4.table), "Q8": _quaternion_group()}


def _cell_consistent(t: list, n: int, a: int, b: int) -> bool:
    """Check every triple that uses the freshly set cell ``(a, b)``, among
    those whose two bracketings are both defined (``-1`` marks empty)."""
    v = t[a][b]
    for z in range(n):
        bz = t[b][z]  # (ab)z against a(bz)
        if bz >= 0 and t[v][z] >= 0 and t[a][bz] >= 0 and t[v][z] != t[a][bz]:
            return False
        xa = t[z][a]  # (za)b against z(ab)
        if xa >= 0 and t[xa][b] >= 0 and t[z][v] >= 0 and t[xa][b] != t[z][v]:
            return False
    for x in range(n):
        row = t[x]
        for y in range(n):
            if row[y] == a:  # (xy)b = v against x(yb)
                yb = t[y][b]
                if yb >= 0 and row[yb] >= 0 and row[yb] != v:
                    return False
            if row[y] == b:  # a(xy) = v against (ax)y
                ax = t[a][x]
                if ax >= 0 and t[ax][y] >= 0 and t[ax][y] != v:
                    return False
    return True


def all_associative_tables(n: int):
    """Every associative table on ``{0..n-1}`` (labeled, not up to
    isomorphism), by backtracking over cells in row-major order."""
    t = [[-1] * n for _ in range(n)]
    cells = [(a, b) for a in range(n) for b in range(n)]

    def fill(k):
        if k == len(cells):
            yield np.array(t, dtype=np.int64)
            return
        a, b = cells[k]
        for v in range(n):
            t[a][b] = v
            if _cell_consistent(t, n, a, b):
                yield from fill(k + 1)
        t[a][b] = -1

    yield from fill(0)


def random_semigroup(rng: np.random.Generator, max_order: int = 8, max_tries: int = 1000):
    """Random associative table of order ``<= max_order``: close a few random
    self-maps of a small set under composition, optionally adjoin a zero or
    an identity, and reject anything too large or non-associative."""
    for _ in range(max_tries):
        points = int(rng.integers(2, 5))
        gens = [tuple(rng.integers(0, points, size=points).tolist())
                for _ in range(int(rng.integers(1, 4)))]
        try:
            s = transformation_semigroup(gens)
        except ValueError:
            continue
        s = FiniteSemigroup(s.table)
        extra = rng.integers(0, 3)
        if extra == 1 and s.zero is None:
            s = FiniteSemigroup(adjoin_zero(s).table)
        elif extra == 2:
            s = adjoin_identity(s)
        if s.n <= max_order and verify_associativity(s.table):
            return s
    raise RuntimeError("no small semigroup found; raise max_tries")
