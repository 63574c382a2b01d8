import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapecomp import pnm
from shapecomp.composer import Composition
from shapecomp.dictionary import Dictionary
from shapecomp.errors import FormatError
from shapecomp.formats import (decode_runs, encode_runs, parse_config, read_alpha, read_composition,
                               read_delta, read_dictionary, write_alpha, write_composition, write_config,
                               write_delta, write_dictionary)
from shapecomp.grid import Grid, ShapeMask
from shapecomp.imaging import DeltaField, Image


def test_delta_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    d = DeltaField(Grid((3, 5), (0.5, 2.0)), rng.normal(size=15))
    write_delta(tmp_path / "d.txt", d)
    back = read_delta(tmp_path / "d.txt")
    assert back.grid == d.grid and np.array_equal(back.delta, d.delta)


def test_delta_bad_count(tmp_path):
    (tmp_path / "d.txt").write_text("DELTA1\ndims 2 2\nspacing 1 1\n1\n2\n")
    with pytest.raises(FormatError):
        read_delta(tmp_path / "d.txt")


def test_dictionary_roundtrip(inst_a, tmp_path):
    dic, _ = inst_a
    dic = Dictionary(dic.grid, dic.shapes, ({"family": "a", "pose": {"x": [1, 2]}}, {"family": "b", "pose": {}}))
    write_dictionary(tmp_path / "D.txt", dic)
    back = read_dictionary(tmp_path / "D.txt")
    assert back.grid == dic.grid and back.meta == dic.meta
    assert all(np.array_equal(a.cells, b.cells) for a, b in zip(back.shapes, dic.shapes))


def test_dictionary_not_dict1(tmp_path):
    (tmp_path / "D.txt").write_text("hello\n")
    with pytest.raises(FormatError):
        read_dictionary(tmp_path / "D.txt")


def test_alpha_roundtrip_exact(tmp_path):
    a = np.array([1.0, -1.0, 0.1 + 0.2, -0.0, 1e-300])
    write_alpha(tmp_path / "a.csv", a)
    assert np.array_equal(read_alpha(tmp_path / "a.csv"), a)
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "index,value"


def test_alpha_bad_header(tmp_path):
    (tmp_path / "a.csv").write_text("1,2\n")
    with pytest.raises(FormatError):
        read_alpha(tmp_path / "a.csv")


def test_composition_roundtrip(tmp_path):
    for comp in (Composition((0, 3), (1,)), Composition((), ()), Composition((2,), ())):
        write_composition(tmp_path / "c.txt", comp)
        assert read_composition(tmp_path / "c.txt") == comp


def test_config_parse(tmp_path):
    cfg = parse_config("# comment\na = 1\n\nb= x = y  # tail\n")
    assert cfg == {"a": "1", "b": "x = y"}
    with pytest.raises(FormatError):
        parse_config("novalue\n")
    write_config(tmp_path / "m", {"z": 1, "a": "q"})
    assert (tmp_path / "m").read_text() == "a = q\nz = 1\n"


def test_pnm_roundtrip(tmp_path):
    arr = np.array([[0.0, 1.0], [0.5, 0.25]])
    pnm.write_pgm(tmp_path / "g.pgm", arr)
    back = pnm.read_pnm(tmp_path / "g.pgm").to_array()
    assert np.allclose(back.reshape(2, 2), arr, atol=1 / 255)
    rgb = np.zeros((2, 3, 3))
    rgb[0, 1] = (1.0, 0.0, 0.0)
    pnm.write_ppm(tmp_path / "c.ppm", rgb)
    img = pnm.read_pnm(tmp_path / "c.ppm")
    assert img.channels == 3 and img.values.shape == (6, 3)


def test_volume_roundtrip(tmp_path):
    g = Grid((2, 3, 4), (1.0, 0.5, 2.0))
    im = Image(g, np.arange(24.0)[:, None])
    pnm.write_volume(tmp_path / "v.vol", im)
    back = pnm.read_volume(tmp_path / "v.vol")
    assert back.grid == g and np.array_equal(back.values, im.values)


@settings(max_examples=60, deadline=None)
@given(cells=st.sets(st.integers(0, 500)))
def test_runs_roundtrip(cells):
    c = np.array(sorted(cells), dtype=np.int64)
    assert np.array_equal(decode_runs(encode_runs(c)), c)
