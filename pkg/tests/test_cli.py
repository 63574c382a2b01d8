import json
import subprocess
import sys

import numpy as np
import pytest

from shapecomp.cli import main
from shapecomp.composer import Composition
from shapecomp.dictionary import Dictionary
from shapecomp.formats import read_alpha, read_dictionary, write_alpha, write_composition, write_dictionary


@pytest.fixture
def inst_dir(tmp_path):
    assert main(["synth", "inst-a", "-o", str(tmp_path / "inst")]) == 0
    return tmp_path / "inst"


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_segment_inst_a(inst_dir, tmp_path):
    out = tmp_path / "seg"
    rc = main(["segment", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--tau", "2", "-o", str(out)])
    assert rc == 0
    assert read_alpha(out / "alpha.csv") == pytest.approx([1.0, -1.0], abs=1e-9)
    rep = json.loads((out / "report.json").read_text())
    assert rep["objective_G"] == pytest.approx(-1.0) and rep["energy_E"] == -1.0
    for name in ("region.pgm", "overlay.ppm", "report.txt", "run.meta"):
        assert (out / name).exists()


def test_segment_admm(inst_dir, tmp_path):
    out = tmp_path / "seg"
    rc = main(["segment", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--tau", "2", "--method", "admm", "-o", str(out)])
    assert rc == 0
    assert read_alpha(out / "alpha.csv") == pytest.approx([1.0, -1.0], abs=1e-3)


def test_segment_zero_budget_warns(inst_dir, tmp_path, capsys):
    rc = main(["segment", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--tau", "0", "-o", str(tmp_path / "z")])
    assert rc == 0 and "empty" in capsys.readouterr().err


def test_segment_sweep_monotone(inst_dir, tmp_path):
    out = tmp_path / "sw"
    rc = main(["segment", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--tau", "0.5,1,2,3", "-o", str(out)])
    assert rc == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    g = [float(r.split(",")[2]) for r in rows]
    assert len(g) == 4 and all(b <= a + 1e-12 for a, b in zip(g, g[1:]))
    assert sorted(p.name for p in out.iterdir() if p.is_dir()) == ["tau_0.5", "tau_1.0", "tau_2.0", "tau_3.0"]


def test_certify_inst_a(inst_dir, tmp_path):
    write_alpha(tmp_path / "a.csv", [1.0, -1.0])
    rc = main(["certify", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--alpha", str(tmp_path / "a.csv"), "--composition", str(inst_dir / "composition.txt"),
               "-o", str(tmp_path / "c")])
    assert rc == 0
    cert = json.loads((tmp_path / "c" / "certificate.json").read_text())
    assert cert["feasible"] and 0 < cert["eta_c"] < 0.5


def test_certify_duplicate_shape_fails(inst_dir, tmp_path):
    dic = read_dictionary(inst_dir / "dict.txt")
    write_dictionary(tmp_path / "dup.txt", Dictionary(dic.grid, (*dic.shapes, dic.shapes[0])))
    rc = main(["certify", "--delta", str(inst_dir / "delta.txt"), "--dict", str(tmp_path / "dup.txt"),
               "--composition", str(inst_dir / "composition.txt"), "-o", str(tmp_path / "c")])
    assert rc == 3
    rep = json.loads((tmp_path / "c" / "recovery.json").read_text())
    assert rep["coh_j"]["2"] == 1.0 and not rep["conditions"]["coherence"]


def test_certify_fractional_beta(inst_dir, tmp_path):
    write_alpha(tmp_path / "a.csv", [0.5, 0.0])
    rc = main(["certify", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
               "--alpha", str(tmp_path / "a.csv"), "-o", str(tmp_path / "c")])
    assert rc == 3


def test_missing_file_is_io_error(tmp_path):
    rc = main(["segment", "--delta", str(tmp_path / "nope.txt"), "--dict", str(tmp_path / "nope2.txt"),
               "-o", str(tmp_path / "x")])
    assert rc == 1


def test_dsd_and_solvers(inst_dir, tmp_path):
    d, D = str(inst_dir / "delta.txt"), str(inst_dir / "dict.txt")
    assert main(["dsd", "--dict", D, "--delta", d, "-o", str(tmp_path / "dsd")]) == 0
    assert "shapelets: 3" in (tmp_path / "dsd" / "dsd.txt").read_text()
    assert main(["solve-lp", "--dict", D, "--delta", d, "--tau", "2", "--mps", "p.mps", "--method", "lp-primal",
                 "-o", str(tmp_path / "lp")]) == 0
    assert "ROWS" in (tmp_path / "lp" / "p.mps").read_text()
    assert read_alpha(tmp_path / "lp" / "alpha.csv") == pytest.approx([1.0, -1.0])
    assert main(["solve-admm", "--dict", D, "--delta", d, "--tau", "2", "-o", str(tmp_path / "ad")]) == 0
    assert (tmp_path / "ad" / "trace.csv").read_text().startswith("iter,primal_res,dual_res,objective")


def test_dict_lattice(tmp_path):
    rc = main(["dict", "lattice", "--grid", "20x20", "--ellipse", "3", "--ellipse", "4,2", "--lattice", "2x2",
               "-o", str(tmp_path)])
    assert rc == 0
    dic = read_dictionary(tmp_path / "dict.txt")
    assert dic.n_shapes == 8 and dic.meta[0]["pose"]["semi_axes"] == [3.0, 3.0]


def test_replay_bit_identical(inst_dir, tmp_path):
    args = ["segment", "--delta", str(inst_dir / "delta.txt"), "--dict", str(inst_dir / "dict.txt"),
            "--tau", "2", "--method", "admm", "--xi", "0.5"]
    assert main([*args, "-o", str(tmp_path / "r1")]) == 0
    assert main(["segment", "--config", str(tmp_path / "r1" / "run.meta"), "-o", str(tmp_path / "r2")]) == 0
    assert _files(tmp_path / "r1") == _files(tmp_path / "r2")


def test_ocr_clean_single_letter(tmp_path):
    assert main(["synth", "ocr", "--word", "K", "--snr-db", "inf", "-o", str(tmp_path / "s")]) == 0
    rc = main(["ocr", "--delta", str(tmp_path / "s" / "delta.txt"), "--glyphs", str(tmp_path / "s" / "glyphs"),
               "--letters", "K", "--length", "1", "--angles", "0", "-o", str(tmp_path / "o")])
    assert rc == 0
    letter, r, c = (tmp_path / "o" / "found.txt").read_text().split()
    tr = (tmp_path / "s" / "truth.txt").read_text().split()
    assert letter == "K" and abs(int(r) - int(tr[1])) <= 3 and abs(int(c) - int(tr[2])) <= 2


def test_ocr_clean_word(tmp_path):
    assert main(["synth", "ocr", "--word", "CAT", "--snr-db", "inf", "-o", str(tmp_path / "s")]) == 0
    rc = main(["ocr", "--delta", str(tmp_path / "s" / "delta.txt"), "--glyphs", str(tmp_path / "s" / "glyphs"),
               "--length", "3", "--angles", "0", "-o", str(tmp_path / "o")])
    assert rc == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["word"] == "CAT"


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "shapecomp.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "shapecomp" in r.stdout
