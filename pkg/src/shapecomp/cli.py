"""``shapecomp`` command line.

Every command writes its artifacts plus a ``run.meta`` file into ``--out``.
``run.meta`` lists the resolved options as ``key = value`` lines and can be
passed back with ``--config`` to repeat the run exactly.

Exit codes: 0 ok, 1 I/O or format error, 2 indeterminate certificate,
3 condition violated, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, experiments, formats, glyphs, pnm
from .admm import solve_admm, write_trace
from .composer import AlphaVector, Composition, assemble, energy
from .dictionary import Dictionary, EllipseTemplate, build_grid_dictionary, build_ocr_dictionary
from .dsd import decompose, format_report
from .errors import (BoundsViolatedError, FormatError, HypothesisViolatedError, LinkageNotUniqueError,
                     RedundantCompositionError, ShapeCompError, SingularSystemError)
from .grid import Grid, ShapeMask
from .imaging import DeltaField, Image, chan_vese_delta, kmeans2
from .lp import build_dual, build_primal, build_primal_regularized, export_mps, solve_csc

EXIT_OK, EXIT_IO, EXIT_INDETERMINATE, EXIT_VIOLATED, EXIT_SOLVER = 0, 1, 2, 3, 4

_CONDITION_ERRORS = (RedundantCompositionError, LinkageNotUniqueError, SingularSystemError,
                     BoundsViolatedError, HypothesisViolatedError)


class SolverFailure(Exception):
    pass


# --- option parsing helpers ------------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in str(text).replace("x", ",").split(",") if t.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in str(text).replace("x", ",").split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _meta_value(v) -> str:
    if isinstance(v, list):
        return ";".join(_meta_value(x) for x in v)
    if isinstance(v, tuple):
        return ",".join(_meta_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_SKIP_META = {"func", "config", "out", "command"}


def write_meta(out: Path, ns: argparse.Namespace) -> None:
    entries = {k: _meta_value(v) for k, v in vars(ns).items() if k not in _SKIP_META and v is not None}
    entries["command"] = ns.command
    entries["version"] = __version__
    formats.write_config(out / "run.meta", entries)


def _config_path(argv) -> str | None:
    for k, a in enumerate(argv):
        if a == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _apply_config(sub: argparse.ArgumentParser, command: str, path) -> None:
    """Use a ``key = value`` file as defaults for `sub`; explicit flags still win."""
    cfg = formats.read_config(path)
    if cfg.get("command", command) != command:
        raise FormatError(f"{path}: recorded for command {cfg['command']!r}, not {command!r}")
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k in ("command", "version"):
            continue
        if k not in known:
            raise FormatError(f"{path}: unknown key {k!r}")
        act = known[k]
        if act.nargs == 0:
            defaults[k] = _bool(v)
        elif isinstance(act, argparse._AppendAction):
            defaults[k] = [act.type(x) for x in v.split(";") if x.strip()]
        else:
            defaults[k] = act.type(v) if act.type is not None else v
    sub.set_defaults(**defaults)
    for act in sub._actions:
        if act.dest in defaults:
            act.required = False


# --- loading ---------------------------------------------------------------------------------


def load_image(path) -> Image:
    p = Path(path)
    if p.suffix.lower() in (".pgm", ".ppm", ".pnm"):
        return pnm.read_pnm(p)
    return pnm.read_volume(p)


def load_delta(ns) -> tuple[object, Image | None]:
    """Delta from ``--delta`` or from ``--image`` via k-means and Chan-Vese terms."""
    if getattr(ns, "delta", None):
        return formats.read_delta(ns.delta), None
    if not getattr(ns, "image", None):
        raise FormatError("either --delta or --image is required")
    img = load_image(ns.image)
    u_in, u_out = kmeans2(img, seed=ns.seed)
    return chan_vese_delta(img, u_in, u_out), img


def load_glyphs(directory) -> dict[str, np.ndarray]:
    """Glyph bitmaps from ``<LETTER>.pgm`` files; ink is any value >= 0.5."""
    files = sorted(Path(directory).glob("*.pgm"))
    if not files:
        raise FileNotFoundError(f"no .pgm glyphs in {directory}")
    out = {}
    for f in files:
        img = pnm.read_pnm(f)
        out[f.stem.upper()] = img.to_array() >= 0.5
    return out


def _problem(ns, delta, dictionary):
    if ns.lam is not None:
        return assemble(delta, dictionary, lam=ns.lam)
    return assemble(delta, dictionary, tau=ns.tau)


# --- artifacts ---------------------------------------------------------------------------------


def region_mask(dictionary, alpha, threshold: float = 0.5) -> np.ndarray:
    return analysis.level_function(dictionary, alpha) >= threshold


def boundary(mask2d: np.ndarray) -> np.ndarray:
    """Cells of the mask with a 4-neighbour outside it (or on the image border)."""
    m = np.asarray(mask2d, dtype=bool)
    pad = np.pad(m, 1, constant_values=False)
    inner = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
    return m & ~inner


def _display(grid: Grid, image: Image | None, delta) -> np.ndarray:
    if image is not None:
        vals = image.values if image.channels == 3 else np.repeat(image.values[:, :1], 3, axis=1)
        return np.clip(vals, 0.0, 1.0)
    d = -np.asarray(delta.delta)
    span = np.ptp(d)
    g = (d - d.min()) / span if span > 0 else np.zeros_like(d)
    return np.repeat(g[:, None], 3, axis=1)


def write_region_artifacts(out: Path, dictionary, alpha, delta, image, threshold: float) -> np.ndarray:
    grid = dictionary.grid
    mask = region_mask(dictionary, alpha, threshold)
    if grid.ndim > 2:
        pnm.write_volume(out / "region.vol", Image(grid, mask.astype(float)))
        return mask
    dims = grid.dims if grid.ndim == 2 else (1, grid.dims[0])
    m2 = mask.reshape(dims)
    pnm.write_pgm(out / "region.pgm", m2.astype(float))
    rgb = _display(grid, image, delta).reshape(*dims, 3).copy()
    rgb[boundary(m2)] = (1.0, 0.0, 0.0)
    pnm.write_ppm(out / "overlay.ppm", rgb)
    return mask


def write_report(out: Path, name: str, data: dict) -> None:
    plain = analysis._plain(data)
    (out / f"{name}.json").write_text(json.dumps(plain, indent=2, sort_keys=True) + "\n")
    lines = [f"{k}: {json.dumps(v) if isinstance(v, (list, dict)) else v}" for k, v in plain.items()]
    (out / f"{name}.txt").write_text("\n".join(lines) + "\n")


def _solve(ns, pd):
    if ns.method == "admm":
        res = solve_admm(pd, xi=ns.xi, max_iters=ns.max_iters, tol_primal=ns.tol, tol_dual=ns.tol,
                         workers=ns.workers)
        return res.alpha, res.status, res.iterations, res
    res = solve_csc(pd, method=ns.method, backend=ns.backend)
    if res.status != "optimal":
        raise SolverFailure(f"LP solver returned {res.status}")
    return res.alpha, res.status, res.iterations, res


def _solve_report(ns, pd, dictionary, delta, alpha, status, iters) -> dict:
    comp = AlphaVector(alpha).composition()
    diag = analysis.epsilon_diagnostics(dictionary, delta, alpha, check=False)
    return {
        "method": ns.method,
        "status": status,
        "iterations": iters,
        "tau": pd.tau,
        "lambda": pd.lam,
        "n_cells": pd.n_rows,
        "n_shapes": pd.n_shapes,
        "objective_G": diag.G,
        "l1_norm": float(np.abs(alpha).sum()),
        "i_plus": list(comp.i_plus),
        "i_minus": list(comp.i_minus),
        "energy_E": energy(comp, dictionary, delta),
        "eps_1plus": diag.eps_1plus,
        "eps_0minus": diag.eps_0minus,
        "characterizes": diag.characterizes,
    }


# --- commands ----------------------------------------------------------------------------------


def cmd_segment(ns) -> int:
    delta, image = load_delta(ns)
    dictionary = formats.read_dictionary(ns.dict)
    budgets = [("lam", v) for v in ns.lam] if ns.lam else [("tau", v) for v in ns.tau]
    sweep = len(budgets) > 1
    rows = []
    for key, val in budgets:
        out = ns.out / f"{key}_{_meta_value(val)}" if sweep else ns.out
        out.mkdir(parents=True, exist_ok=True)
        pd = assemble(delta, dictionary, **{key: val})
        alpha, status, iters, _ = _solve(ns, pd)
        formats.write_alpha(out / "alpha.csv", alpha)
        mask = write_region_artifacts(out, dictionary, alpha, delta, image, ns.threshold)
        rep = _solve_report(ns, pd, dictionary, delta, alpha, status, iters)
        rep["region_cells"] = int(mask.sum())
        write_report(out, "report", rep)
        rows.append((key, val, rep["objective_G"], rep["i_plus"], rep["i_minus"]))
        if not mask.any():
            print(f"warning: {key}={val}: recovered region is empty", file=sys.stderr)
    if sweep:
        lines = ["budget,value,objective_G,i_plus,i_minus"]
        lines += [f"{k},{_meta_value(v)},{g!r},{' '.join(map(str, ip))},{' '.join(map(str, im))}"
                  for k, v, g, ip, im in rows]
        (ns.out / "sweep.csv").write_text("\n".join(lines) + "\n")
    for key, val, g, ip, im in rows:
        print(f"{key}={val}: G={g:.10g} I+={ip} I-={im}")
    return EXIT_OK


def cmd_solve_lp(ns) -> int:
    delta = formats.read_delta(ns.delta)
    dictionary = formats.read_dictionary(ns.dict)
    pd = _problem(ns, delta, dictionary)
    if ns.mps:
        if ns.method == "lp-dual":
            lp = build_dual(pd)
        else:
            lp = build_primal(pd) if pd.tau is not None else build_primal_regularized(pd)
        export_mps(lp, ns.out / ns.mps)
    res = solve_csc(pd, method=ns.method, backend=ns.backend)
    if res.status != "optimal":
        write_report(ns.out, "report", {"method": ns.method, "status": res.status})
        raise SolverFailure(f"LP solver returned {res.status}")
    formats.write_alpha(ns.out / "alpha.csv", res.alpha)
    rep = _solve_report(ns, pd, dictionary, delta, res.alpha, res.status, res.iterations)
    rep["lp_objective"] = res.lp_objective
    rep["recovery"] = res.recovery
    write_report(ns.out, "report", rep)
    print(f"{res.status}: G={res.objective:.12g} iterations={res.iterations}")
    return EXIT_OK


def cmd_solve_admm(ns) -> int:
    delta = formats.read_delta(ns.delta)
    dictionary = formats.read_dictionary(ns.dict)
    pd = _problem(ns, delta, dictionary)
    res = solve_admm(pd, xi=ns.xi, max_iters=ns.max_iters, tol_primal=ns.tol, tol_dual=ns.tol,
                     workers=ns.workers)
    formats.write_alpha(ns.out / "alpha.csv", res.alpha)
    write_trace(ns.out / "trace.csv", res)
    ns_m = argparse.Namespace(**{**vars(ns), "method": "admm"})
    rep = _solve_report(ns_m, pd, dictionary, delta, res.alpha, res.status, res.iterations)
    rep["posed_objective"] = res.objective
    write_report(ns.out, "report", rep)
    print(f"{res.status}: objective={res.objective:.12g} iterations={res.iterations}")
    if not res.converged:
        raise SolverFailure(f"ADMM stopped after {res.iterations} iterations without converging")
    return EXIT_OK


def cmd_dsd(ns) -> int:
    dictionary = formats.read_dictionary(ns.dict)
    delta = formats.read_delta(ns.delta) if ns.delta else None
    dec = decompose(dictionary.shapes, delta)
    (ns.out / "dsd.txt").write_text(format_report(dec))
    print(f"{dec.n_shapelets} shapelets for {dec.n_shapes} shapes")
    return EXIT_OK


def cmd_dict(ns) -> int:
    if ns.kind == "lattice":
        if ns.delta:
            grid = formats.read_delta(ns.delta).grid
        elif ns.grid:
            grid = Grid(ns.grid, ns.spacing or None)
        else:
            raise FormatError("lattice dictionaries need --grid or --delta")
        families = []
        lattice = ns.lattice or tuple([7] * grid.ndim)
        for axes in ns.ellipse:
            axes = tuple(axes) * (grid.ndim if len(axes) == 1 else 1)
            families.append((EllipseTemplate(axes, name="ellipse" + "x".join(f"{a:g}" for a in axes)), lattice))
        if not families:
            raise FormatError("give at least one --ellipse")
        dic = build_grid_dictionary(grid, families)
    else:
        delta, _ = load_delta(ns)
        gl = load_glyphs(ns.glyphs)
        if ns.letters:
            gl = {ch: gl[ch] for ch in ns.letters.upper()}
        dic = build_ocr_dictionary(delta, gl, samples=ns.samples, top_k=ns.top_k, eps_r=ns.eps_r,
                                   angles=ns.angles, seed=ns.seed)
    formats.write_dictionary(ns.out / "dict.txt", dic)
    print(f"{dic.n_shapes} shapes ({dic.count_before_drop} before dropping)")
    return EXIT_OK


def cmd_certify(ns) -> int:
    delta = formats.read_delta(ns.delta)
    dictionary = formats.read_dictionary(ns.dict)
    codes = []
    summary = {}
    if ns.alpha:
        alpha = formats.read_alpha(ns.alpha)
        tau = ns.tau if ns.tau is not None else float(np.abs(alpha).sum())
        try:
            cert = analysis.check_unique_optimality(decompose(dictionary.shapes, delta), alpha, tau)
        except HypothesisViolatedError as exc:
            write_report(ns.out, "certificate", {"status": "hypothesis-violated", "reason": str(exc)})
            summary["certificate"] = "hypothesis-violated"
            codes.append(EXIT_VIOLATED)
        else:
            write_report(ns.out, "certificate", cert.to_dict())
            summary["certificate"] = cert.status
            codes.append({"feasible": EXIT_OK, "indeterminate": EXIT_INDETERMINATE}.get(cert.status, EXIT_VIOLATED))
    if ns.composition:
        comp = formats.read_composition(ns.composition)
        try:
            rep = analysis.check_recovery(dictionary, delta, comp, eta_c=ns.eta_c)
        except _CONDITION_ERRORS as exc:
            write_report(ns.out, "recovery", {"conditions_met": False, "reason": f"{type(exc).__name__}: {exc}"})
            summary["recovery"] = "violated"
            codes.append(EXIT_VIOLATED)
        else:
            write_report(ns.out, "recovery", rep.to_dict())
            summary["recovery"] = "met" if rep.conditions_met else "violated"
            if not rep.conditions_met:
                summary["failed_conditions"] = [k for k, v in rep.conditions.items() if not v]
            codes.append(EXIT_OK if rep.conditions_met else EXIT_VIOLATED)
    if not codes:
        raise FormatError("certify needs --alpha and/or --composition")
    for k, v in summary.items():
        print(f"{k}: {v}")
    return max(codes)  # violated > indeterminate > ok


def cmd_ocr(ns) -> int:
    delta, image = load_delta(ns)
    gl = load_glyphs(ns.glyphs)
    if ns.letters:
        gl = {ch: gl[ch] for ch in ns.letters.upper()}
    dic = build_ocr_dictionary(delta, gl, samples=ns.samples, top_k=ns.top_k, eps_r=ns.eps_r,
                               angles=ns.angles, seed=ns.seed)
    pd = assemble(delta, dic, tau=float(ns.length))
    res = solve_csc(pd, method=ns.method, backend=ns.backend)
    if res.status != "optimal":
        raise SolverFailure(f"LP solver returned {res.status}")
    found = experiments.read_word(dic, res.alpha)
    formats.write_dictionary(ns.out / "dict.txt", dic)
    formats.write_alpha(ns.out / "alpha.csv", res.alpha)
    write_region_artifacts(ns.out, dic, res.alpha, delta, image, ns.threshold)
    word = "".join(f[0] for f in found)
    (ns.out / "found.txt").write_text("".join(f"{ch} {c[0]} {c[1]}\n" for ch, c in found))
    write_report(ns.out, "report", {"word": word, "letters": [[ch, list(c)] for ch, c in found],
                                    "n_shapes": dic.n_shapes, "objective_G": res.objective,
                                    "status": res.status, "iterations": res.iterations})
    print(word)
    return EXIT_OK


def cmd_synth(ns) -> int:
    out = ns.out
    if ns.kind == "inst-a":
        grid = Grid((1, 4))  # the 4-cell line as a single row
        dic = Dictionary(grid, (ShapeMask.from_cells(grid, [0, 1, 2]), ShapeMask.from_cells(grid, [1, 2, 3])))
        formats.write_delta(out / "delta.txt", DeltaField(grid, [-1.0, 1.0, 1.0, 1.0]))
        formats.write_dictionary(out / "dict.txt", dic)
        formats.write_composition(out / "composition.txt", Composition((0,), (1,)))
    elif ns.kind == "disks":
        sc = experiments.two_disk_scene(size=ns.size, snr_db=ns.snr_db, seed=ns.seed)
        formats.write_delta(out / "delta.txt", experiments.scene_delta(sc.image, seed=ns.seed))
        formats.write_dictionary(out / "dict.txt", sc.dictionary)
        pnm.write_pgm(out / "image.pgm", np.clip(sc.image.to_array(), 0, 1))
        pnm.write_pgm(out / "clean.pgm", sc.clean.to_array())
        (out / "truth.txt").write_text(f"dominant {sc.dominant}\nsecondary {sc.secondary}\n")
    elif ns.kind == "ocr":
        sc = experiments.ocr_scene(ns.word.upper(), snr_db=ns.snr_db, seed=ns.seed, scale=ns.scale)
        formats.write_delta(out / "delta.txt", experiments.scene_delta(sc.image, seed=ns.seed))
        pnm.write_pgm(out / "image.pgm", np.clip(sc.image.to_array(), 0, 1))
        gdir = out / "glyphs"
        gdir.mkdir(exist_ok=True)
        for ch, bm in glyphs.font(ns.scale).items():
            pnm.write_pgm(gdir / f"{ch}.pgm", bm.astype(float))
        (out / "truth.txt").write_text("".join(f"{ch} {c[0]} {c[1]}\n" for ch, c in zip(sc.word, sc.centers)))
    print(f"wrote {ns.kind} instance to {out}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------------------


def _common(p):
    p.add_argument("-o", "--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--config", help="key = value file (e.g. a previous run.meta) supplying defaults")
    p.add_argument("--seed", type=int, default=0)


def _problem_args(p, sweep=False):
    p.add_argument("--dict", required=True, help="DICT1 dictionary file")
    g = p.add_mutually_exclusive_group()
    if sweep:
        g.add_argument("--tau", type=_floats, default=(1.0,), help="budget, or comma-separated sweep")
        g.add_argument("--lam", type=_floats, help="l1 weight, or comma-separated sweep")
    else:
        g.add_argument("--tau", type=float, help="l1 budget (default 1)")
        g.add_argument("--lam", type=float, help="l1 weight (regularized form)")


def _lp_args(p, methods=("lp-primal", "lp-dual")):
    p.add_argument("--method", choices=methods, default="lp-dual")
    p.add_argument("--backend", choices=("simplex", "highs"), default="simplex")


def _admm_args(p):
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapecomp", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"shapecomp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="solve for a composition and draw the recovered region")
    _common(p)
    p.add_argument("--image", help="PGM/PPM image or raw volume")
    p.add_argument("--delta", help="DELTA1 file (instead of --image)")
    _problem_args(p, sweep=True)
    _lp_args(p, ("lp-primal", "lp-dual", "admm"))
    _admm_args(p)
    p.add_argument("--threshold", type=float, default=0.5, help="region is L_alpha >= threshold")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("certify", help="optimality certificate and recovery conditions")
    _common(p)
    p.add_argument("--dict", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--alpha", help="alpha.csv to certify as the unique minimizer")
    p.add_argument("--tau", type=float, help="budget for the certificate (default ||alpha||_1)")
    p.add_argument("--composition", help="target composition for the recovery conditions")
    p.add_argument("--eta-c", type=float, help="fixed eta_c (default: middle of the admissible range)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("ocr", help="read a word with a correlation-sampled glyph dictionary")
    _common(p)
    p.add_argument("--image")
    p.add_argument("--delta")
    p.add_argument("--glyphs", required=True, help="directory of <LETTER>.pgm bitmaps")
    p.add_argument("--length", type=int, required=True, help="expected number of letters (tau)")
    p.add_argument("--letters", help="restrict to these letters")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--eps-r", type=float, default=0.002)
    p.add_argument("--angles", type=_floats, default=(-15.0, 0.0, 15.0))
    p.add_argument("--threshold", type=float, default=0.5)
    _lp_args(p)
    p.set_defaults(func=cmd_ocr)

    p = sub.add_parser("dict", help="build a dictionary file")
    _common(p)
    p.add_argument("kind", choices=("lattice", "ocr"))
    p.add_argument("--grid", type=_ints, help="grid dims, e.g. 64x64")
    p.add_argument("--spacing", type=_floats)
    p.add_argument("--ellipse", type=_floats, action="append", default=[],
                   help="semi-axes (one value for a disk); repeatable")
    p.add_argument("--lattice", type=_ints, help="lattice points per axis, e.g. 7x7")
    p.add_argument("--image")
    p.add_argument("--delta")
    p.add_argument("--glyphs")
    p.add_argument("--letters")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--eps-r", type=float, default=0.002)
    p.add_argument("--angles", type=_floats, default=(-15.0, 0.0, 15.0))
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("dsd", help="disjoint shapelet decomposition report")
    _common(p)
    p.add_argument("--dict", required=True)
    p.add_argument("--delta")
    p.set_defaults(func=cmd_dsd)

    p = sub.add_parser("solve-lp", help="solve by linear programming")
    _common(p)
    p.add_argument("--delta", required=True)
    _problem_args(p)
    _lp_args(p)
    p.add_argument("--mps", help="also export the LP to this file (in --out)")
    p.set_defaults(func=cmd_solve_lp)

    p = sub.add_parser("solve-admm", help="solve by consensus ADMM")
    _common(p)
    p.add_argument("--delta", required=True)
    _problem_args(p)
    _admm_args(p)
    p.set_defaults(func=cmd_solve_admm)

    p = sub.add_parser("synth", help="write a synthetic instance")
    _common(p)
    p.add_argument("kind", choices=("inst-a", "disks", "ocr"))
    p.add_argument("--snr-db", type=float, default=-5.0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--word", default="FIS")
    p.add_argument("--scale", type=int, default=2)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = _config_path(argv)
        if cfg is not None:
            command = next((a for a in argv if not a.startswith("-")), None)
            subs = parser._subparsers._group_actions[0].choices
            if command not in subs:
                parser.error("the command must come first")
            _apply_config(subs[command], command, cfg)
        ns = parser.parse_args(argv)
        if getattr(ns, "tau", None) is None and getattr(ns, "lam", None) is None and ns.command in ("solve-lp", "solve-admm"):
            ns.tau = 1.0
        ns.out.mkdir(parents=True, exist_ok=True)
        write_meta(ns.out, ns)
        return ns.func(ns)
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except _CONDITION_ERRORS as exc:
        print(f"condition violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    except ShapeCompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
