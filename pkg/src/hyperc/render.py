"""Deterministic SVG scenes of realizations in the Poincare disk.

Geodesics render as circular arcs orthogonal to the boundary circle
(straight chords when diametral), balls as the Euclidean circles they
are in the disk model, and tree edges as geodesic arc segments.  Output
is byte-stable: fixed float formatting, no timestamps.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Geodesic, disk_angle_from_ideal, to_disk
from .sampling import BooleanSample, LineSample
from .treecover import EmbeddedTree

__all__ = ["render_boolean", "render_lines", "render_tree", "write_svg"]

_VIEW = 1.08
_DIAMETRAL_TOL = 1e-9


def _fmt(v: float) -> str:
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _header(size: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{-_VIEW} {-_VIEW} {2 * _VIEW} {2 * _VIEW}">',
        f'<rect x="{-_VIEW}" y="{-_VIEW}" width="{2 * _VIEW}" height="{2 * _VIEW}" fill="white"/>',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.006"/>',
    ]


def _arc_path(theta_a: float, theta_b: float, stroke: str, width: float) -> str:
    """Full geodesic between two boundary angles as one SVG path."""
    p1 = complex(math.cos(theta_a), math.sin(theta_a))
    p2 = complex(math.cos(theta_b), math.sin(theta_b))
    sep = abs(theta_a - theta_b) % (2.0 * math.pi)
    sep = min(sep, 2.0 * math.pi - sep)
    if abs(sep - math.pi) < _DIAMETRAL_TOL:
        return (
            f'<line x1="{_fmt(p1.real)}" y1="{_fmt(p1.imag)}" '
            f'x2="{_fmt(p2.real)}" y2="{_fmt(p2.imag)}" '
            f'stroke="{stroke}" stroke-width="{width}" fill="none"/>'
        )
    delta = sep / 2.0
    signed = math.remainder(theta_b - theta_a, 2.0 * math.pi)
    mu = theta_a + signed / 2.0
    center = complex(math.cos(mu), math.sin(mu)) / math.cos(delta)
    radius = math.tan(delta)
    return _arc_segment(p1, p2, center, radius, stroke, width)


def _arc_segment(p1, p2, center, radius, stroke, width) -> str:
    """A-command arc from p1 to p2 on the circle (center, radius); the
    sweep flag is chosen so the implied center (SVG F.6.5) matches."""
    mid = (p1 + p2) / 2.0
    v = (p1 - p2) / 2.0
    h2 = radius * radius - abs(v) ** 2
    h = math.sqrt(max(h2, 0.0)) / max(abs(v), 1e-300)
    center_sweep1 = mid - 1j * v * h
    sweep = 1 if abs(center_sweep1 - center) <= abs((mid + 1j * v * h) - center) else 0
    return (
        f'<path d="M {_fmt(p1.real)} {_fmt(p1.imag)} '
        f"A {_fmt(radius)} {_fmt(radius)} 0 0 {sweep} "
        f'{_fmt(p2.real)} {_fmt(p2.imag)}" '
        f'stroke="{stroke}" stroke-width="{width}" fill="none"/>'
    )


def _geodesic_element(g: Geodesic, stroke="steelblue", width=0.004) -> str:
    return _arc_path(disk_angle_from_ideal(g.a), disk_angle_from_ideal(g.b), stroke, width)


def _edge_element(w1: complex, w2: complex, stroke="black", width=0.004) -> str:
    """Geodesic segment between two interior disk points."""
    d = w1 * w2.conjugate()
    if abs(d.imag) < 1e-12 * max(abs(d), 1e-12):
        # collinear with the center: the geodesic is a diameter
        return (
            f'<line x1="{_fmt(w1.real)}" y1="{_fmt(w1.imag)}" '
            f'x2="{_fmt(w2.real)}" y2="{_fmt(w2.imag)}" '
            f'stroke="{stroke}" stroke-width="{width}" fill="none"/>'
        )
    # orthocircle through w1, w2: center c with |c|^2 = r^2 + 1
    a1, a2 = abs(w1) ** 2 + 1.0, abs(w2) ** 2 + 1.0
    det = 2.0 * (w1.real * w2.imag - w1.imag * w2.real)
    cx = (a1 * w2.imag - a2 * w1.imag) / det
    cy = (a2 * w1.real - a1 * w2.real) / det
    center = complex(cx, cy)
    radius = math.sqrt(abs(center) ** 2 - 1.0)
    return _arc_segment(w1, w2, center, radius, stroke, width)


def _ball_element(w: complex, R: float, stroke="firebrick", fill="none") -> str:
    """The hyperbolic circle of radius R around disk point w."""
    rho = abs(w)
    d_center = 2.0 * math.atanh(rho)
    t_far = math.tanh((d_center + R) / 2.0)
    t_near = math.tanh((d_center - R) / 2.0)
    r_e = (t_far - t_near) / 2.0
    c_e = (t_far + t_near) / 2.0
    u = w / rho if rho > 0 else complex(1.0, 0.0)
    c = c_e * u
    return (
        f'<circle cx="{_fmt(c.real)}" cy="{_fmt(c.imag)}" r="{_fmt(r_e)}" '
        f'fill="{fill}" stroke="{stroke}" stroke-width="0.003"/>'
    )


def render_boolean(sample: BooleanSample, size: int = 600) -> str:
    """Points of the process with their R-balls."""
    lines = _header(size)
    R = sample.params.radius
    disk = [(complex(z) - 1j) / (complex(z) + 1j) for z in sample.points]
    for w in disk:
        lines.append(_ball_element(w, R, fill="#fde0e0"))
    for w in disk:
        lines.append(
            f'<circle cx="{_fmt(w.real)}" cy="{_fmt(w.imag)}" r="0.006" fill="firebrick"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_lines(sample: LineSample, size: int = 600) -> str:
    """A line-process realization, arcs orthogonal to the boundary."""
    lines = _header(size)
    for g in sample.geodesics():
        lines.append(_geodesic_element(g))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_tree(tree: EmbeddedTree, size: int = 600, show_generators: bool = True) -> str:
    """The embedded tree: vertex orbit, edges, and generator lines."""
    lines = _header(size)
    if show_generators:
        for g in tree.generator_lines:
            lines.append(_geodesic_element(g, stroke="lightsteelblue", width=0.003))
    for w, z in tree.vertices.items():
        for letter in (0, 1, 2):
            if w and w[-1] == letter:
                continue
            child = w + (letter,)
            if child in tree.vertices:
                lines.append(_edge_element(z, tree.vertices[child]))
    for z in tree.vertices.values():
        lines.append(
            f'<circle cx="{_fmt(z.real)}" cy="{_fmt(z.imag)}" r="0.008" fill="black"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(content: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
