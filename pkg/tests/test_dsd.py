import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapecomp import experiments as ex
from shapecomp.composer import assemble, objective
from shapecomp.dsd import beta_objective, beta_of, decompose, format_report
from shapecomp.grid import Grid, ShapeMask


def test_inst_a_shapelets(inst_a):
    dic, delta = inst_a
    dec = decompose(list(dic.shapes), delta)
    assert [s.tolist() for s in dec.shapelets] == [[0], [1, 2], [3]]
    assert dec.bearing.tolist() == [[1, 0], [1, 1], [0, 1]]
    assert dec.p.tolist() == [0, 2, 1] and dec.q.tolist() == [1, 0, 0]


def test_single_shape():
    g = Grid((3, 3))
    s = ShapeMask.from_cells(g, [1, 4, 5])
    dec = decompose([s])
    assert dec.n_shapelets == 1 and dec.bearing.tolist() == [[1]]
    assert dec.shapelets[0].tolist() == [1, 4, 5]


def test_beta_examples(inst_a):
    dic, delta = inst_a
    dec = decompose(list(dic.shapes), delta)
    assert beta_of(dec, [1, -1]).tolist() == [1, 0, -1]
    assert beta_of(dec, [0, 0]).tolist() == [0, 0, 0]
    assert beta_of(dec, [1, 1]).tolist() == [1, 2, 1]
    assert beta_objective(dec, [1, 0, -1]) == -1.0
    assert beta_objective(dec, [0, 0, 0]) == 0.0
    assert beta_objective(dec, [0, 0, 0], include_uncovered=True) == 0.0
    assert beta_objective(dec, [1, 1, 1]) == 2.0


def test_report_lists_every_shapelet(inst_a):
    dic, delta = inst_a
    text = format_report(decompose(list(dic.shapes), delta))
    assert "shapelets: 3" in text and "np.float64" not in text


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_shapelets_partition_covered_cells(seed):
    dic, delta = ex.random_problem(seed, max_cells=150, max_shapes=8)
    dec = decompose(list(dic.shapes), delta)
    cells = np.concatenate(dec.shapelets)
    covered = np.flatnonzero(np.asarray(dic.membership().sum(axis=1)).ravel() > 0)
    assert np.array_equal(np.sort(cells), covered)
    assert dec.n_shapelets <= min(2 ** dic.n_shapes - 1, covered.size)
    assert len({tuple(r) for r in dec.bearing.tolist()}) == dec.n_shapelets


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_objective_identity(seed):
    dic, delta = ex.random_problem(seed, max_cells=120, max_shapes=6)
    dec = decompose(list(dic.shapes), delta)
    pd = assemble(delta, dic, tau=1.0)
    alpha = np.random.default_rng(seed).normal(size=dic.n_shapes)
    # uncovered rows are zero rows of A, so each adds max(0, b_i) = 0
    assert dec.uncovered_constant == 0.0
    lhs = objective(pd, alpha)
    rhs = beta_objective(dec, beta_of(dec, alpha)) + dec.uncovered_constant
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * (1 + np.abs(pd.b).sum()))
