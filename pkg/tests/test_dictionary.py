import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapecomp import glyphs
from shapecomp.dictionary import (EllipseTemplate, PlacementPdf, build_grid_dictionary, build_ocr_dictionary,
                                  correlation_field, excess_kurtosis, pdf_from_field, regular_lattice,
                                  rotate_bitmap, sample_centroids, smooth_round)
from shapecomp.errors import DegenerateInputError
from shapecomp.grid import Grid, mask_from_bitmap
from shapecomp.imaging import DeltaField


def test_sphere_family_count_3d():
    g = Grid((40, 40, 40))
    fams = [(EllipseTemplate((r, r, r), name=f"s{n}"), (n, n, n)) for r, n in ((4.0, 6), (2.5, 10), (1.0, 20))]
    d = build_grid_dictionary(g, fams)
    assert d.count_before_drop == 6 ** 3 + 10 ** 3 + 20 ** 3 == 9216


def test_single_point_lattice():
    g = Grid((10, 10))
    d = build_grid_dictionary(g, [(EllipseTemplate((2.0, 2.0)), np.array([[5.0, 5.0]]))])
    assert d.n_shapes == 1


def test_two_families_two_by_two():
    g = Grid((10, 10))
    pts = regular_lattice(g, (2, 2))
    d = build_grid_dictionary(g, [(EllipseTemplate((1.0, 1.0), name="a"), pts),
                                  (EllipseTemplate((2.0, 1.0), name="b"), pts)])
    assert d.n_shapes == 8
    fams = [m["family"] for m in d.meta]
    assert fams.count("a") == 4 and fams.count("b") == 4
    assert [m["pose"]["center"] for m in d.meta[:4]] == pts.tolist()


def test_correlation_constant_field():
    g = Grid((9, 9))
    f = correlation_field(DeltaField(g, np.ones(81)), np.ones((3, 3)))
    assert f.reshape(9, 9)[4, 4] == -9.0


def test_correlation_single_cell_is_negated_delta():
    rng = np.random.default_rng(0)
    g = Grid((6, 7))
    d = rng.normal(size=g.size)
    assert np.array_equal(correlation_field(DeltaField(g, d), np.ones((1, 1))), -d)


def test_correlation_peak_at_translate():
    g = Grid((12, 12))
    bm = glyphs.glyph("F", 1)
    off = np.array([3, 4])
    d = np.ones(g.size)
    d[mask_from_bitmap(g, bm, off).cells] = -1.0
    f = correlation_field(DeltaField(g, d), bm)
    # exhaustive sweep: the unique maximum is the translate's center cell
    assert np.flatnonzero(f == f.max()).tolist() == [g.index(off + np.array(bm.shape) // 2)]


def test_smooth_round_examples():
    z = np.array([0.0, 0.5, 1.0])
    r = smooth_round(z, 0.3)
    assert r[1] == 0.5
    assert r[2] == pytest.approx(0.5 + np.arctan(5 / 3) / np.pi)
    # the closed form evaluates to 0.82798, not the often quoted 0.8312
    assert r[2] == pytest.approx(0.8279791303773694, abs=1e-15)
    hard = smooth_round(np.array([0.0, 0.9, 1.0]), 1e-9)
    assert hard[1] == pytest.approx(1.0, abs=1e-8)


def test_smooth_round_constant_field():
    with pytest.raises(DegenerateInputError):
        smooth_round(np.ones(4), 0.1)


def test_sampling_point_mass():
    g = Grid((3, 3))
    w = np.zeros(9)
    w[4] = 1.0
    assert set(sample_centroids(PlacementPdf(g, w), 50, seed=2).tolist()) == {4}


def test_sampling_uniform_frequencies():
    g = Grid((2, 2))
    s = sample_centroids(PlacementPdf(g, np.ones(4)), 100_000, seed=5)
    freq = np.bincount(s, minlength=4) / s.size
    assert np.all(np.abs(freq - 0.25) < 0.02 * 0.25 * 4)
    assert np.array_equal(s, sample_centroids(PlacementPdf(g, np.ones(4)), 100_000, seed=5))


def test_pdf_from_field_is_positive():
    pdf = pdf_from_field(Grid((2, 2)), [3.0, 1.0, 1.0, 2.0])
    assert np.all(pdf.weights > 0) and pdf.weights.sum() == pytest.approx(1.0)


def test_kurtosis_examples():
    assert excess_kurtosis([-1.0, 1.0] * 50) == pytest.approx(-2.0)
    rng = np.random.default_rng(0)
    assert abs(excess_kurtosis(rng.standard_normal(100_000))) < 0.1
    spike = np.zeros(100)
    spike[0] = 1.0
    assert excess_kurtosis(spike) > 3


def test_rotate_bitmap_identity_and_quarter():
    bm = glyphs.glyph("L", 1)
    assert np.array_equal(rotate_bitmap(bm, 0.0), bm)
    assert rotate_bitmap(bm, 90.0).sum() == bm.sum()


def test_ocr_dictionary_deterministic_and_labelled():
    g = Grid((12, 14))
    bm = glyphs.glyph("T", 1)
    d = np.ones(g.size)
    d[mask_from_bitmap(g, bm, (3, 4)).cells] = -1.0
    delta = DeltaField(g, d)
    gl = {"T": bm, "O": glyphs.glyph("O", 1)}
    a = build_ocr_dictionary(delta, gl, samples=20, top_k=1, angles=(0.0,), seed=3)
    b = build_ocr_dictionary(delta, gl, samples=20, top_k=1, angles=(0.0,), seed=3)
    assert a.meta == b.meta
    assert {m["family"] for m in a.meta} <= {"T", "O"}
    assert len({(m["family"], tuple(m["pose"]["center"])) for m in a.meta}) == a.n_shapes


@settings(max_examples=40, deadline=None)
@given(vals=st.lists(st.floats(-100, 100), min_size=2, max_size=30), eps=st.floats(1e-3, 1.0))
def test_smooth_round_range_and_monotone(vals, eps):
    v = np.array(vals)
    if np.ptp(v) == 0:
        return
    r = smooth_round(v, eps)
    assert np.all((r > 0) & (r < 1))
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(r[order]) >= 0)
