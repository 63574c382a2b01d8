"""Synthetic instances: random problems, LOC fuzzers, a disk scene and an OCR scene."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import glyphs as glyphmod
from .analysis import is_redundant, linkage
from .composer import AlphaVector, Composition, assemble, realize
from .dictionary import (Dictionary, EllipseTemplate, build_grid_dictionary, build_ocr_dictionary,
                         regular_lattice)
from .errors import EmptyMaskError, LinkageNotUniqueError, RedundantCompositionError
from .grid import Grid, ShapeMask, mask_from_bitmap, rasterize_ellipsoid
from .imaging import DeltaField, Image, add_gaussian_noise, chan_vese_delta, kmeans2
from .lp import solve_csc


def random_disk(rng: np.random.Generator, grid: Grid, r_range=(2.0, 6.0), center=None) -> ShapeMask:
    while True:
        r = rng.uniform(*r_range)
        c = np.asarray(center, float) if center is not None else rng.uniform(0, 1, grid.ndim) * grid.extent
        try:
            return rasterize_ellipsoid(grid, c, [r] * grid.ndim)
        except EmptyMaskError:
            center = None


def random_masks(rng: np.random.Generator, grid: Grid, n_shapes: int, density: float | None = None) -> Dictionary:
    """Dictionary of independent random cell subsets (nonempty)."""
    shapes = []
    for _ in range(n_shapes):
        p = density if density is not None else rng.uniform(0.05, 0.5)
        flags = rng.random(grid.size) < p
        if not flags.any():
            flags[rng.integers(grid.size)] = True
        shapes.append(ShapeMask.from_bool(grid, flags))
    return Dictionary(grid, tuple(shapes))


def random_problem(seed: int, max_cells: int = 400, max_shapes: int = 12, delta_scale: float | None = None):
    """Random (dictionary, delta) pair with a mix of structured and unstructured shapes.

    Delta is standard normal times `delta_scale`, which by default is drawn
    from {1e-3, 1, 1e3}.
    """
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(2, 21))
    cols = int(rng.integers(2, max(3, max_cells // rows + 1)))
    grid = Grid((rows, cols), tuple(rng.choice([0.5, 1.0, 2.0], 2)))
    n = int(rng.integers(1, max_shapes + 1))
    if rng.random() < 0.5:
        dic = random_masks(rng, grid, n)
    else:
        r_hi = max(1.0, min(grid.extent) / 2)
        dic = Dictionary(grid, tuple(random_disk(rng, grid, (0.6 * r_hi / 2, r_hi)) for _ in range(n)))
    scale = rng.choice([1e-3, 1.0, 1e3])
    delta = DeltaField(grid, rng.normal(size=grid.size) * (scale if delta_scale is None else delta_scale))
    return dic, delta


# --- LOC instances -----------------------------------------------------------


@dataclass(eq=False)
class LocInstance:
    dictionary: Dictionary
    delta: DeltaField
    comp: Composition
    flipped: np.ndarray

    @property
    def tau(self) -> float:
        return float(np.abs(linkage(self.dictionary, self.comp).alpha_r).sum())


def loc_delta(dictionary: Dictionary, comp: Composition, rng: np.random.Generator,
              mag=(0.5, 1.5), flip_frac: float = 0.0, covered_only: bool = False) -> tuple[DeltaField, np.ndarray]:
    """Field negative on the realized region and positive elsewhere, then sign flips.

    ``floor(flip_frac * N)`` cells are flipped, drawn from all cells or, with
    `covered_only`, from cells covered by some dictionary shape.
    """
    grid = dictionary.grid
    inside = realize(comp, dictionary).to_bool()
    m = rng.uniform(*mag, size=grid.size)
    d = np.where(inside, -m, m)
    pool = np.arange(grid.size)
    if covered_only:
        pool = np.flatnonzero(np.asarray(dictionary.membership().sum(axis=1)).ravel() > 0)
    n_flip = min(int(np.floor(flip_frac * grid.size)), pool.size)
    flipped = rng.choice(pool, size=n_flip, replace=False) if n_flip else np.zeros(0, dtype=np.int64)
    d[flipped] = -d[flipped]
    return DeltaField(grid, d), np.sort(flipped)


def random_composition_dictionary(rng: np.random.Generator, grid: Grid, n_plus: int, n_minus: int,
                                  n_exterior: int, exterior: str = "mixed"):
    """Random disks: `n_plus` targets, `n_minus` holes cut from them and exterior shapes.

    Exterior shapes are placed anywhere (``mixed``), or rejected when they touch
    the target elements (``disjoint``). Returns the shuffled dictionary and the
    composition in dictionary indices, or None when the draw is not basic.
    """
    size = min(grid.extent)
    plus = [random_disk(rng, grid, (0.12 * size, 0.25 * size)) for _ in range(n_plus)]
    minus = []
    for _ in range(n_minus):
        host = plus[int(rng.integers(n_plus))]
        c = (grid.coords(host.cells[int(rng.integers(len(host)))]) + 0.5) * grid.spacing
        minus.append(random_disk(rng, grid, (0.06 * size, 0.15 * size), center=c))
    occupied = np.zeros(grid.size, dtype=bool)
    for s in plus + minus:
        occupied[s.cells] = True
    ext = []
    tries = 0
    while len(ext) < n_exterior and tries < 200 * max(1, n_exterior):
        tries += 1
        s = random_disk(rng, grid, (0.08 * size, 0.25 * size))
        if exterior == "disjoint" and occupied[s.cells].any():
            continue
        ext.append(s)
    shapes = plus + minus + ext
    order = rng.permutation(len(shapes))
    pos = np.empty(len(shapes), dtype=np.int64)
    pos[order] = np.arange(len(shapes))
    dic = Dictionary(grid, tuple(shapes[k] for k in order))
    comp = Composition(tuple(int(pos[k]) for k in range(n_plus)),
                       tuple(int(pos[n_plus + k]) for k in range(n_minus)))
    if len(set(dic.shapes)) != len(dic.shapes):
        return None
    try:
        if is_redundant(dic, comp):
            return None
        linkage(dic, comp)
    except (LinkageNotUniqueError, RedundantCompositionError):
        return None
    return dic, comp


def random_loc_instance(seed: int, size: int = 20, max_plus: int = 2, max_minus: int = 1,
                        n_exterior: int | None = None, flip_frac: float = 0.0,
                        exterior: str = "mixed", covered_only: bool = True) -> LocInstance:
    """Draw until the target composition is basic and non-redundant."""
    rng = np.random.default_rng(seed)
    grid = Grid((size, size))
    while True:
        n_plus = int(rng.integers(1, max_plus + 1))
        n_minus = int(rng.integers(0, max_minus + 1))
        n_ext = int(rng.integers(0, 5)) if n_exterior is None else n_exterior
        got = random_composition_dictionary(rng, grid, n_plus, n_minus, n_ext, exterior)
        if got is None:
            continue
        dic, comp = got
        if realize(comp, dic).is_empty:
            continue
        delta, flipped = loc_delta(dic, comp, rng, flip_frac=flip_frac, covered_only=covered_only)
        return LocInstance(dic, delta, comp, flipped)


def recovered_exactly(inst: LocInstance, alpha, tol: float = 1e-6) -> bool:
    """Support and signs equal the target and values equal its linkage coefficients."""
    lr = linkage(inst.dictionary, inst.comp)
    target = lr.as_alpha(inst.dictionary.n_shapes)
    alpha = np.asarray(alpha, dtype=float)
    return (AlphaVector(alpha).composition() == inst.comp) and bool(np.max(np.abs(alpha - target)) <= tol)


# --- two-disk scene --------------------------------------------------------------


@dataclass(eq=False)
class DiskScene:
    image: Image
    clean: Image
    dictionary: Dictionary
    dominant: int
    secondary: int


def disk_dictionary(grid: Grid, radii=(5.0, 8.0, 11.0, 14.0), lattice=(7, 7)) -> Dictionary:
    pts = regular_lattice(grid, lattice)
    return build_grid_dictionary(grid, [(EllipseTemplate((r, r), name=f"disk{r:g}"), pts) for r in radii])


def two_disk_scene(size: int = 64, snr_db: float = -5.0, seed: int = 0) -> DiskScene:
    """Two bright disks from the dictionary on a dark background, plus Gaussian noise.

    The dominant disk is the larger one; both have unit intensity.
    """
    grid = Grid((size, size))
    dic = disk_dictionary(grid)
    pts = regular_lattice(grid, (7, 7))

    def find(radius, point):
        for j, m in enumerate(dic.meta):
            if m["pose"]["semi_axes"][0] == radius and np.allclose(m["pose"]["center"], pts[point]):
                return j
        raise KeyError((radius, point))

    big = find(14.0, 7 * 2 + 2)
    small = find(8.0, 7 * 4 + 5)
    img = np.zeros(grid.size)
    img[dic.shapes[big].cells] = 1.0
    img[dic.shapes[small].cells] = 1.0
    clean = Image(grid, img[:, None])
    noisy = add_gaussian_noise(clean, snr_db, seed=seed)
    return DiskScene(noisy, clean, dic, big, small)


def scene_delta(image: Image, seed: int = 0) -> DeltaField:
    u_in, u_out = kmeans2(image, seed=seed)
    return chan_vese_delta(image, u_in, u_out)


# --- OCR scene -----------------------------------------------------------------


@dataclass(eq=False)
class OcrScene:
    image: Image
    word: str
    centers: list  # (row, col) cell of each letter's bitmap center
    glyphs: dict


def ocr_scene(word: str = "FIS", snr_db: float = 0.0, seed: int = 0, scale: int = 2, gap: int = 3,
              margin: int = 4, bright_ink: bool = True) -> OcrScene:
    """Word image from the built-in font scaled by `scale`.

    Ink is 1 on a 0 page by default (like the disk scene); `bright_ink=False`
    gives dark ink on a bright page, which at fixed SNR means stronger noise.
    """
    gl = glyphmod.font(scale)
    h, w = next(iter(gl.values())).shape
    rows = h + 2 * margin
    cols = len(word) * w + (len(word) - 1) * gap + 2 * margin
    grid = Grid((rows, cols))
    ink = np.zeros(grid.size, dtype=bool)
    centers = []
    for k, ch in enumerate(word):
        off = np.array([margin, margin + k * (w + gap)])
        ink[mask_from_bitmap(grid, gl[ch], off).cells] = True
        centers.append(tuple(int(v) for v in off + np.array(gl[ch].shape) // 2))
    clean = Image(grid, np.where(ink == bright_ink, 1.0, 0.0)[:, None])
    return OcrScene(add_gaussian_noise(clean, snr_db, seed=seed), word, centers, gl)


def read_word(dictionary: Dictionary, alpha, tol: float | None = None) -> list[tuple[str, tuple]]:
    """Positive-support elements as (letter, center), left to right."""
    comp = AlphaVector(np.asarray(alpha, dtype=float)).composition(tol)
    found = [(dictionary.meta[j]["family"], tuple(dictionary.meta[j]["pose"]["center"])) for j in comp.i_plus]
    return sorted(found, key=lambda t: (t[1][1], t[1][0], t[0]))


def word_correct(scene: OcrScene, found) -> bool:
    """Letters match in order and each center lies within its glyph's extent of the truth."""
    if [f[0] for f in found] != list(scene.word):
        return False
    h, w = next(iter(scene.glyphs.values())).shape
    return all(abs(c[0] - t[0]) <= h // 2 and abs(c[1] - t[1]) <= w // 2
               for (_, c), t in zip(found, scene.centers))


def ocr_trial(scene: OcrScene, dictionary: Dictionary, delta: DeltaField, method: str = "lp-dual",
              backend: str = "simplex"):
    pd = assemble(delta, dictionary, tau=float(len(scene.word)))
    res = solve_csc(pd, method=method, backend=backend)
    found = read_word(dictionary, res.alpha)
    return word_correct(scene, found), found, res


def ocr_dictionary(scene: OcrScene, delta: DeltaField, seed: int, samples: int = 50,
                   letters: str | None = None, angles=(0.0,), top_k: int = 10, eps_r: float = 0.002,
                   boost=None) -> Dictionary:
    gl = scene.glyphs if letters is None else {ch: scene.glyphs[ch] for ch in letters}
    return build_ocr_dictionary(delta, gl, samples=samples, top_k=top_k, angles=angles, eps_r=eps_r,
                                seed=seed, boost=boost)


def frequent_letters(found_lists, k: int = 10) -> str:
    """Letters recovered most often over a set of runs (ties alphabetical)."""
    counts = Counter(f[0] for found in found_lists for f in found)
    return "".join(ch for ch, _ in sorted(counts.items(), key=lambda t: (-t[1], t[0]))[:k])


@dataclass
class OcrCampaign:
    seeds: list
    initial: list  # per-seed success on the sampled 26-letter dictionary
    refined: list  # per-seed success on the dense dictionary of frequent letters
    letters: str
    found: list = field(repr=False)
    sizes: list = field(repr=False)

    @property
    def initial_rate(self) -> float:
        return sum(self.initial) / len(self.seeds)

    @property
    def refined_rate(self) -> float:
        return sum(self.refined) / len(self.seeds)


def ocr_campaign(seeds, word: str = "FIS", snr_db: float = 0.0, samples: int = 50, dense: int = 5,
                 top_letters: int = 10, eps_r: float = 0.002, method: str = "lp-dual",
                 backend: str = "simplex", scene_opts: dict | None = None) -> OcrCampaign:
    """Two-stage OCR experiment.

    Stage one samples `samples` poses per letter (all 26) and solves each seed.
    The `top_letters` letters recovered most often across seeds then get
    ``dense * samples`` poses each, and every seed is solved again with that
    refined dictionary only.
    """
    seeds = list(seeds)
    scenes, initial, found, sizes = [], [], [], []
    for seed in seeds:
        sc = ocr_scene(word, snr_db=snr_db, seed=seed, **(scene_opts or {}))
        delta = scene_delta(sc.image)
        dic = ocr_dictionary(sc, delta, seed, samples=samples, eps_r=eps_r)
        ok, f, _ = ocr_trial(sc, dic, delta, method, backend)
        scenes.append((sc, delta))
        initial.append(ok)
        found.append(f)
        sizes.append(dic.n_shapes)
    letters = frequent_letters(found, top_letters)
    refined = []
    for seed, (sc, delta) in zip(seeds, scenes):
        dic = ocr_dictionary(sc, delta, seed, samples=dense * samples, letters=letters, top_k=0, eps_r=eps_r)
        ok, f, _ = ocr_trial(sc, dic, delta, method, backend)
        refined.append(ok)
    return OcrCampaign(seeds, initial, refined, letters, found, sizes)
