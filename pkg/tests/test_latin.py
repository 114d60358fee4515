import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasiapprox.group_models import CompactRegion, get_model
from quasiapprox.latin import (GroupWindow, PartialLatinSquare, box_window, embed_partial,
                               embedding_order, extend_rectangle, complete_rectangle,
                               square_from_rows, verify_latin, window_to_partial)

from oracles import heisenberg_from_matrix, heisenberg_matrix


def test_verify_latin_examples():
    z3 = [[(i + j) % 3 for j in range(3)] for i in range(3)]
    assert verify_latin(z3)
    bad = [[0, 0, 2], [1, 2, 0], [2, 0, 1]]
    check = verify_latin(bad)
    assert not check and check.witness == ("row", 0, 0)


def test_extend_rectangle_examples():
    assert extend_rectangle([[0, 1]]).tolist() == [[0, 1], [1, 0]]
    assert extend_rectangle([[0, 1, 2], [1, 2, 0]]).tolist()[-1] == [2, 0, 1]
    with pytest.raises(ValueError):
        extend_rectangle([[0, 0]])


@given(st.integers(1, 7), st.integers(0, 6), st.randoms(use_true_random=False))
def test_random_rectangles_complete(n, r, rnd):
    r = min(r, n - 1)
    rows = complete_rectangle(np.array([[(i + j) % n for j in range(n)] for i in range(1)]), n)
    perm_r = list(range(n))
    perm_c = list(range(n))
    perm_s = list(range(n))
    rnd.shuffle(perm_r), rnd.shuffle(perm_c), rnd.shuffle(perm_s)
    square = np.array(perm_s)[rows[np.ix_(perm_r, perm_c)]]
    rect = square[:max(r, 1)]
    full = complete_rectangle(rect, n)
    assert verify_latin(full)
    assert np.array_equal(full[:len(rect)], rect)


def test_embed_small_partial_with_three_symbols():
    p = PartialLatinSquare(2, {(0, 0): "a", (0, 1): "b", (1, 0): "c"})
    assert p.symbol_count == 3
    emb = embed_partial(p)
    assert emb.order == 4
    assert verify_latin(emb.square.table) and emb.restriction_matches()


@pytest.mark.parametrize("n", [1, 3, 5])
def test_empty_partial_gives_cyclic_square(n):
    emb = embed_partial(PartialLatinSquare(n, {}))
    r = 2 * n
    assert emb.square.table.tolist() == [[(i + j) % r for j in range(r)] for i in range(r)]


def test_integer_window_embedding():
    w = GroupWindow(get_model("integers"), [(v,) for v in range(-2, 3)])
    p = window_to_partial(w)
    assert p.symbol_count == 9
    emb = embed_partial(p)
    assert emb.order == 10
    t = emb.square.table
    for i, (a,) in enumerate(w.elements):
        for j, (b,) in enumerate(w.elements):
            assert t[i, j] == emb.symbol_index[(a + b,)]


def test_window_examples():
    z4 = window_to_partial(box_window(get_model("cyclic:4"), 3))
    assert len(z4.cells) == 16 and z4.symbol_count == 4
    small = window_to_partial(GroupWindow(get_model("integers"), [(-1,), (0,), (1,)]))
    assert small.symbols[3:] == [(-2,), (2,)]
    assert small.cells[(0, 0)] == (-2,) and small.cells[(2, 2)] == (2,)


def test_universe_restricts_products():
    w = GroupWindow(get_model("integers"), [(-1,), (0,), (1,)], CompactRegion(((-1, 1),)))
    p = window_to_partial(w)
    assert (0, 0) not in p.cells and (2, 2) not in p.cells
    assert p.symbol_count == 3


def test_heisenberg_window_against_matrices():
    m = get_model("heisenberg")
    w = box_window(m, 1)
    p = window_to_partial(w)
    for (i, j), prod in p.cells.items():
        M = heisenberg_matrix(w.elements[i]) @ heisenberg_matrix(w.elements[j])
        assert prod == tuple(int(v) for v in heisenberg_from_matrix(M))
    emb = embed_partial(p)
    assert emb.order == embedding_order(p.order, p.symbol_count)
    assert verify_latin(emb.square.table) and emb.restriction_matches()


@st.composite
def partials(draw):
    n = draw(st.integers(1, 6))
    k = draw(st.integers(1, 2 * n + 3))
    cells = {}
    rows, cols = {}, {}
    for i in range(n):
        for j in range(n):
            if draw(st.booleans()):
                s = draw(st.integers(0, k - 1))
                if s not in rows.get(i, set()) and s not in cols.get(j, set()):
                    cells[(i, j)] = s
                    rows.setdefault(i, set()).add(s)
                    cols.setdefault(j, set()).add(s)
    return PartialLatinSquare(n, cells, list(range(k)))


@given(partials())
def test_embedding_of_arbitrary_partials(p):
    emb = embed_partial(p)
    assert emb.order == max(2 * p.order, p.symbol_count)
    assert verify_latin(emb.square.table)
    assert emb.restriction_matches()


def test_partial_rejects_repeats():
    with pytest.raises(ValueError):
        PartialLatinSquare(2, {(0, 0): 1, (0, 1): 1})
    with pytest.raises(ValueError):
        PartialLatinSquare(2, {(0, 0): 1, (1, 0): 1})
    with pytest.raises(ValueError):
        PartialLatinSquare(2, {(0, 0): 5}, symbols=[1, 2])


def test_window_requires_discrete_model():
    with pytest.raises(ValueError):
        GroupWindow(get_model("circle"), [(0.0,)])


def test_square_from_rows():
    assert square_from_rows([[0, 1], [1, 0]]).order == 2
    with pytest.raises(ValueError):
        square_from_rows([[0, 1], [0, 1]])
