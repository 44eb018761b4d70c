"""The 3-regular tree embedded in the hyperbolic plane by reflections.

Three disjoint geodesics are spanned by three equal arcs on the ideal
boundary, rotated by 120 degrees; the group generated by the three
reflections acts simply transitively on the orbit of the disk center,
and reduced words over {0, 1, 2} index the orbit points, which form a
3-regular tree.  The module also estimates the tube constant: the
geodesic joining the two ideal limits of a bi-infinite tree path stays
within a bounded distance of the path's vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Geodesic,
    GeodesicFrame,
    HPoint,
    Isometry,
    ORIGIN,
    dist,
    dist_arrays,
    ideal_from_disk_angle,
    polar_around_origin,
    reflection_in,
    to_disk,
    to_hyperboloid,
)
from .sampling import BooleanSample, LineSample, WindowError

__all__ = [
    "Word",
    "is_reduced",
    "reduced_words",
    "EmbeddedTree",
    "build_tree",
    "check_separation",
    "estimate_R_prime",
    "RPrimeEstimate",
    "tree_site_reduction",
]

Word = tuple[int, ...]

MAX_DEPTH = 14


def is_reduced(word: Word) -> bool:
    return all(a != b for a, b in zip(word, word[1:])) and all(w in (0, 1, 2) for w in word)


def reduced_words(depth: int):
    """All reduced words of length 1..depth, breadth first."""
    frontier: list[Word] = [()]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for letter in (0, 1, 2):
                if not w or w[-1] != letter:
                    nxt.append(w + (letter,))
        yield from nxt
        frontier = nxt


@dataclass(frozen=True)
class EmbeddedTree:
    """Vertices of the reflection orbit up to a word-length cutoff."""

    arc_length: float
    depth: int
    vertices: dict[Word, complex]  # Poincare disk coordinates
    generator_lines: list[Geodesic]
    reflections: list[Isometry] = field(repr=False)
    uhp_vertices: dict[Word, HPoint] = field(repr=False)

    def edge_length(self) -> float:
        return dist(ORIGIN, self.uhp_vertices[(0,)])

    def words(self) -> list[Word]:
        return list(self.vertices.keys())

    def neighbors(self, w: Word) -> list[Word]:
        out = []
        if w:
            out.append(w[:-1])
        for letter in (0, 1, 2):
            if not w or w[-1] != letter:
                child = w + (letter,)
                if child in self.vertices:
                    out.append(child)
        return out


def build_tree(arc_length: float, depth: int) -> EmbeddedTree:
    """Compose reflections over reduced words of length <= depth.

    The boundary arc A_j is centered at angle 2 pi j / 3 with the given
    arc length; the generator geodesic L_j joins the endpoints of A_j.
    """
    if not 0.0 < arc_length < 2.0 * math.pi / 3.0:
        raise ValueError("arc length must lie in (0, 2 pi / 3)")
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [0, {MAX_DEPTH}]")
    lines = []
    refls = []
    for j in range(3):
        center = 2.0 * math.pi * j / 3.0
        g = Geodesic(
            ideal_from_disk_angle(center - arc_length / 2.0),
            ideal_from_disk_angle(center + arc_length / 2.0),
        )
        lines.append(g)
        refls.append(reflection_in(g))

    vertices: dict[Word, complex] = {(): complex(*to_disk(ORIGIN))}
    uhp: dict[Word, HPoint] = {(): ORIGIN}
    frontier: list[tuple[Word, Isometry]] = [((), Isometry.identity())]
    for _ in range(depth):
        nxt = []
        for w, mat in frontier:
            for letter in (0, 1, 2):
                if w and w[-1] == letter:
                    continue
                w2 = w + (letter,)
                mat2 = mat @ refls[letter]
                p = mat2.apply(ORIGIN)
                vertices[w2] = complex(*to_disk(p))
                uhp[w2] = p
                nxt.append((w2, mat2))
        frontier = nxt
    return EmbeddedTree(arc_length, depth, vertices, lines, refls, uhp)


def check_separation(tree: EmbeddedTree, word: Word) -> bool:
    """True iff the generator line of the word's first letter separates
    the origin from the word's orbit point."""
    if not word:
        raise ValueError("the empty word has no separating line")
    if not is_reduced(word):
        raise ValueError(f"word {word} is not reduced")
    if word not in tree.uhp_vertices:
        raise ValueError(f"word {word} is beyond the tree depth")
    line = tree.generator_lines[word[0]]
    return line.side(ORIGIN) * line.side(tree.uhp_vertices[word]) < 0.0


@dataclass(frozen=True)
class RPrimeEstimate:
    """Empirical tube constants of the embedded tree.

    ``line_to_vertices`` is the largest distance from a sampled point
    of a limit geodesic to the nearest vertex of its path (the tube
    constant); ``vertex_to_line`` is the largest distance from a path
    vertex to its limit geodesic.
    """

    line_to_vertices: float
    vertex_to_line: float
    n_paths: int


def _random_path_words(tree: EmbeddedTree, gen) -> tuple[list[Word], Word, Word]:
    first = gen.choice(3, size=2, replace=False)
    halves = []
    for head in first:
        w: Word = (int(head),)
        while len(w) < tree.depth:
            step = int(gen.integers(0, 2))
            options = [k for k in (0, 1, 2) if k != w[-1]]
            w = w + (options[step],)
        halves.append(w)
    left, right = halves
    path = [left[: k + 1] for k in range(len(left))][::-1] + [()] + [
        right[: k + 1] for k in range(len(right))
    ]
    return path, left, right


def estimate_R_prime(tree: EmbeddedTree, n_paths: int, rng) -> RPrimeEstimate:
    """Sample bi-infinite non-backtracking paths through the origin and
    measure how far their limit geodesics stray from the vertices.

    The limit points are approximated by the Euclidean normalization of
    the deepest vertices' disk coordinates, which converges because
    disk geodesics approach their ideal endpoints in the Euclidean
    metric.
    """
    if tree.depth < 2:
        raise ValueError("need depth >= 2 to walk paths")
    gen = rng.generator() if hasattr(rng, "generator") else rng
    worst_line = 0.0
    worst_vertex = 0.0
    for _ in range(n_paths):
        path, left, right = _random_path_words(tree, gen)
        ang_l = math.atan2(tree.vertices[left].imag, tree.vertices[left].real)
        ang_r = math.atan2(tree.vertices[right].imag, tree.vertices[right].real)
        limit = Geodesic(ideal_from_disk_angle(ang_l), ideal_from_disk_angle(ang_r))
        frame = GeodesicFrame.canonical(limit)
        verts = np.asarray([tree.uhp_vertices[w].as_complex() for w in path])
        w = frame.pullback_array(verts)
        feet = np.log(np.abs(w))
        x, y = w.real, w.imag
        rho = np.abs(w)
        yoff = np.where(x >= 0, np.log(y) - np.log(rho + x), np.log(rho - x) - np.log(y))
        worst_vertex = max(worst_vertex, float(np.abs(yoff).max()))
        ts = np.arange(feet.min(), feet.max() + 0.05, 0.05)
        line_pts = frame._matrix.apply_array(1j * np.exp(ts))
        dmat = dist_arrays(line_pts[:, None], verts[None, :])
        worst_line = max(worst_line, float(dmat.min(axis=1).max()))
    return RPrimeEstimate(worst_line, worst_vertex, n_paths)


def _ball_net_polar(radius: float, mesh: float):
    """(t, psi) net of B(o, radius) with spacing <= mesh, including rim."""
    ts = [np.asarray([0.0])]
    ps = [np.asarray([0.0])]
    radii = np.arange(mesh, radius + mesh / 2.0, mesh)
    if len(radii) == 0 or radii[-1] < radius - 1e-12:
        radii = np.append(radii, radius)
    for rad in radii:
        m = max(4, int(math.ceil(2.0 * math.pi * math.sinh(rad) / mesh)))
        ts.append(np.full(m, rad))
        ps.append(2.0 * math.pi * np.arange(m) / m)
    return np.concatenate(ts), np.concatenate(ps)


def tree_site_reduction(
    tree: EmbeddedTree,
    sample: BooleanSample | LineSample,
    model: str,
    r_prime: float,
) -> set[Word]:
    """Words whose vertex ball B(v, r_prime) lies inside the model's set.

    Vacant: no process point within R + r_prime of the vertex.
    Occupied: a dense net of the ball (mesh 0.05) must sit within
    R - 0.05 of process points, a conservative sufficient test.
    Lines: no sampled line passes within r_prime of the vertex.
    """
    words = tree.words()
    verts = np.asarray([tree.uhp_vertices[w].as_complex() for w in words])
    reach = float(np.arccosh((np.abs(verts) ** 2 + 1.0) / (2.0 * verts.imag)).max())

    if model == "lines":
        if not isinstance(sample, LineSample):
            raise TypeError("lines model needs a LineSample")
        sample.require_window(reach + r_prime, "tree site reduction")
        if len(sample) == 0:
            return set(words)
        w_h = to_hyperboloid(verts)
        normals = np.stack(
            [
                -np.cosh(sample.foot_dist) * np.sin(sample.foot_dir),
                np.cosh(sample.foot_dist) * np.cos(sample.foot_dir),
                np.sinh(sample.foot_dist),
            ],
            axis=-1,
        )
        sinh_d = np.abs(np.einsum("vk,lk->vl", w_h, normals))
        open_mask = np.arcsinh(sinh_d).min(axis=1) >= r_prime
        return {w for w, ok in zip(words, open_mask) if ok}

    if not isinstance(sample, BooleanSample):
        raise TypeError("point models need a BooleanSample")
    R = sample.params.radius
    sample.require_window(reach + r_prime + R, "tree site reduction")
    if model == "vacant":
        if len(sample) == 0:
            return set(words)
        dmat = dist_arrays(verts[:, None], sample.points[None, :])
        open_mask = dmat.min(axis=1) >= R + r_prime
        return {w for w, ok in zip(words, open_mask) if ok}
    if model != "occupied":
        raise ValueError("model must be vacant, occupied, or lines")
    mesh = 0.05
    if len(sample) == 0:
        return set()
    t_net, psi_net = _ball_net_polar(r_prime, mesh)
    out = set()
    for w_word, v in zip(words, verts):
        # net of B(v, r_prime): polar net around origin moved to v
        net = polar_around_origin(t_net, psi_net)
        net = v.imag * net + v.real
        dmat = dist_arrays(net[:, None], sample.points[None, :])
        if bool((dmat.min(axis=1) <= R - mesh).all()):
            out.add(w_word)
    return out
