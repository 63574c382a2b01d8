import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapecomp.grid import Grid
from shapecomp.imaging import Image, add_gaussian_noise, chan_vese_delta, kmeans2


def test_kmeans_binary_image():
    v = np.zeros(16)
    v[:3] = 1.0
    u_in, u_out = kmeans2(Image(Grid((4, 4)), v[:, None]))
    assert u_in.tolist() == [1.0] and u_out.tolist() == [0.0]


def test_kmeans_two_levels():
    v = np.full(16, 0.1)
    v[[2, 7, 9]] = 0.9
    u_in, u_out = kmeans2(Image(Grid((4, 4)), v[:, None]))
    assert u_in[0] == pytest.approx(0.9) and u_out[0] == pytest.approx(0.1)


def test_kmeans_two_channel_clusters():
    v = np.tile([[0.9, 0.1]], (20, 1))
    v[::2] = [0.1, 0.9]
    u_in, u_out = kmeans2(Image(Grid((4, 5)), v))
    got = sorted([tuple(u_in), tuple(u_out)])
    assert np.allclose(got, [(0.1, 0.9), (0.9, 0.1)], atol=1e-12)


def test_chan_vese_formula():
    g = Grid((2, 2))
    d = chan_vese_delta(Image(g, np.full((4, 1), 0.9)), np.array([1.0]), np.array([0.0]))
    assert np.allclose(d.delta, 0.01 - 0.81)
    mid = chan_vese_delta(Image(g, np.full((4, 1), 0.5)), np.array([1.0]), np.array([0.0]))
    assert np.all(mid.delta == 0.0)
    bg = chan_vese_delta(Image(g, np.full((4, 1), 0.2)), np.array([0.7]), np.array([0.2]))
    assert np.allclose(bg.delta, 0.25)


def test_noise_inf_is_identity():
    im = Image(Grid((3, 3)), np.arange(9.0)[:, None])
    assert np.array_equal(add_gaussian_noise(im, np.inf).values, im.values)


def test_noise_zero_db_variance():
    rng = np.random.default_rng(1)
    im = Image(Grid((100, 120)), rng.uniform(0.5, 1.5, (12000, 1)))
    noisy = add_gaussian_noise(im, 0.0, seed=3)
    var = np.var(noisy.values - im.values)
    assert abs(var / np.mean(im.values ** 2) - 1.0) < 0.05


def test_noise_deterministic():
    im = Image(Grid((5, 5)), np.ones((25, 1)))
    a = add_gaussian_noise(im, -3.0, seed=7).values
    b = add_gaussian_noise(im, -3.0, seed=7).values
    assert np.array_equal(a, b)


@settings(max_examples=50, deadline=None)
@given(u=st.floats(-2, 2), ui=st.floats(-2, 2), ue=st.floats(-2, 2))
def test_chan_vese_sign_matches_nearest_mean(u, ui, ue):
    d = chan_vese_delta(Image(Grid((1, 2)), np.full((2, 1), u)), np.array([ui]), np.array([ue]))
    expected = (u - ui) ** 2 - (u - ue) ** 2
    assert d.delta[0] == pytest.approx(expected, abs=1e-12)
