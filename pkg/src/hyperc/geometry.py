"""Exact geometry of the hyperbolic plane in upper half-plane coordinates.

Points live in the open upper half-plane (metric |ds|/y); geodesics are
stored by their unordered pair of ideal boundary points, where the
boundary is R together with the single point at infinity.  The Poincare
disk model is available through the standard Cayley transform, which is
used by the samplers and the renderer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "INF",
    "HPoint",
    "Geodesic",
    "Isometry",
    "GeodesicFrame",
    "ORIGIN",
    "dist",
    "frame_point",
    "dist_to_geodesic",
    "dist_to_frame",
    "offset_point",
    "apply_isometry",
    "reflect",
    "reflection_in",
    "to_disk",
    "from_disk",
    "disk_dist",
    "ball_area",
    "ball_circumference",
    "ball_metrics",
    "ideal_from_disk_angle",
    "disk_angle_from_ideal",
]

#: The single ideal point at infinity of the upper half-plane boundary.
INF = math.inf

# cosh(d) arguments below 1 + _COSH_GUARD are expanded as sqrt(2(arg-1))
# to avoid arccosh cancellation for near-coincident points.
_COSH_GUARD = 1e-14


def _acosh_excess(delta: float) -> float:
    """arccosh(1 + delta) computed from the excess delta >= 0, so that
    near-coincident points keep full relative precision."""
    if delta < 0.0:
        delta = 0.0
    if delta < _COSH_GUARD:
        return math.sqrt(2.0 * delta)
    return math.log1p(delta + math.sqrt(delta * (2.0 + delta)))


@dataclass(frozen=True)
class HPoint:
    """A point of H^2 in upper half-plane coordinates, y > 0."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"upper half-plane point needs y > 0, got y={self.y}")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "HPoint":
        return HPoint(float(z.real), float(z.imag))


ORIGIN = HPoint(0.0, 1.0)


def _ideal_ok(a) -> bool:
    return a == INF or (isinstance(a, (int, float)) and math.isfinite(a))


@dataclass(frozen=True)
class Geodesic:
    """An unoriented hyperbolic line given by its two ideal endpoints.

    Endpoints are reals or INF and are normalized so that {a, b}
    compares equal regardless of input order: finite pairs are sorted,
    and INF always sits in the second slot.
    """

    a: float
    b: float

    def __post_init__(self):
        a, b = self.a, self.b
        if not (_ideal_ok(a) and _ideal_ok(b)):
            raise ValueError(f"ideal endpoints must be finite reals or INF: {a}, {b}")
        if a == b:
            raise ValueError("a geodesic needs two distinct ideal endpoints")
        if a == INF or (b != INF and b < a):
            a, b = b, a
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))

    @property
    def vertical(self) -> bool:
        return self.b == INF

    @staticmethod
    def through(p: HPoint, q: HPoint) -> "Geodesic":
        """The unique geodesic through two distinct interior points."""
        if p == q:
            raise ValueError("need two distinct points")
        if abs(p.x - q.x) < 1e-15 * (1.0 + abs(p.x)):
            return Geodesic(p.x, INF)
        # semicircle centered on the real axis through both points
        c = (abs(p.as_complex()) ** 2 - abs(q.as_complex()) ** 2) / (2.0 * (p.x - q.x))
        r = abs(p.as_complex() - c)
        return Geodesic(c - r, c + r)

    def side(self, p: HPoint) -> float:
        """Signed side indicator; opposite signs mean the geodesic separates."""
        if self.vertical:
            return p.x - self.a
        c = 0.5 * (self.a + self.b)
        r = 0.5 * (self.b - self.a)
        return (p.x - c) ** 2 + p.y**2 - r * r


@dataclass(frozen=True)
class Isometry:
    """An isometry of H^2 as a real Mobius matrix [[a, b], [c, d]].

    Positive determinant acts as z -> (az+b)/(cz+d); negative
    determinant acts on the conjugate, z -> (a zbar + b)/(c zbar + d),
    covering reflections.  Composition is matrix multiplication either
    way because the coefficients are real.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError("Mobius coefficients must have nonzero determinant")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(1.0, 0.0, 0.0, 1.0)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def apply(self, p: HPoint) -> HPoint:
        z = p.as_complex()
        if self.det < 0:
            z = z.conjugate()
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return HPoint(w.real, abs(w.imag))

    def apply_ideal(self, x: float) -> float:
        if x == INF:
            return self.a / self.c if self.c != 0 else INF
        den = self.c * x + self.d
        if den == 0:
            return INF
        v = (self.a * x + self.b) / den
        return v if math.isfinite(v) else INF

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self.apply_ideal(g.a), self.apply_ideal(g.b))

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        """Vectorized action on complex upper half-plane coordinates."""
        if self.det < 0:
            z = np.conjugate(z)
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return w.real + 1j * np.abs(w.imag)


def _canonical_matrix(g: Geodesic) -> Isometry:
    # maps the imaginary axis onto g with 0 -> a, INF -> b and i -> the
    # summit of the semicircle (or (a, 1) for vertical lines)
    if g.vertical:
        return Isometry(1.0, g.a, 0.0, 1.0)
    return Isometry(g.b, g.a, 1.0, 1.0)


@dataclass(frozen=True)
class GeodesicFrame:
    """An arclength parameterization of a geodesic.

    ``point(0)`` is ``origin`` and ``point(t)`` moves distance ``t``
    along ``gamma``; ``direction=+1`` runs from ``gamma.a`` toward
    ``gamma.b`` in the normalized endpoint order.
    """

    gamma: Geodesic
    origin: HPoint
    direction: int = 1

    _ON_TOL = 1e-12

    def __post_init__(self):
        if self.direction not in (-1, 1):
            raise ValueError("direction must be +1 or -1")
        d, _ = dist_to_geodesic(self.origin, self.gamma)
        if d > self._ON_TOL:
            raise ValueError(f"frame origin is off its geodesic by {d:.3e}")

    @staticmethod
    def canonical(g: Geodesic) -> "GeodesicFrame":
        m = _canonical_matrix(g)
        return GeodesicFrame(g, m.apply(ORIGIN), 1)

    @staticmethod
    def canonical_axis() -> "GeodesicFrame":
        return GeodesicFrame(Geodesic(0.0, INF), ORIGIN, 1)

    @cached_property
    def _matrix(self) -> Isometry:
        # canonical matrix shifted so that i maps to the frame origin
        m = _canonical_matrix(self.gamma)
        w = m.inverse().apply(self.origin).as_complex()
        s0 = math.log(abs(w))
        e = math.exp(s0 / 2.0)
        return m @ Isometry(e, 0.0, 0.0, 1.0 / e)

    def point(self, t: float) -> HPoint:
        return self._matrix.apply(HPoint(0.0, math.exp(self.direction * t)))

    def pullback(self, p: HPoint) -> complex:
        """Coordinates of p in the frame where the geodesic is the imaginary
        axis and the origin is i; the direction sign is absorbed."""
        w = self._matrix.inverse().apply(p).as_complex()
        if self.direction == -1:
            w = -1.0 / w
            w = complex(w.real, abs(w.imag))
        return w

    def pullback_array(self, z: np.ndarray) -> np.ndarray:
        w = self._matrix.inverse().apply_array(z)
        if self.direction == -1:
            w = -1.0 / w
            w = w.real + 1j * np.abs(w.imag)
        return w


def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance, cosh d = 1 + ((dx)^2 + (dy)^2) / (2 y_p y_q)."""
    delta = ((p.x - q.x) ** 2 + (p.y - q.y) ** 2) / (2.0 * p.y * q.y)
    return _acosh_excess(delta)


def dist_arrays(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Vectorized distance between complex UHP coordinate arrays."""
    delta = (np.abs(z1 - z2) ** 2) / (2.0 * z1.imag * z2.imag)
    delta = np.maximum(delta, 0.0)
    small = delta < _COSH_GUARD
    out = np.arccosh(np.where(small, 2.0, 1.0 + delta))
    return np.where(small, np.sqrt(2.0 * delta), out)


def frame_point(frame: GeodesicFrame, t: float) -> HPoint:
    return frame.point(t)


def axis_coordinates(z: np.ndarray):
    """Foot parameter and signed offset relative to the imaginary axis.

    For z = rho e^{i theta} the foot of the perpendicular is (0, rho)
    and the signed perpendicular distance is log tan(theta/2), positive
    on the x < 0 side (the left of upward travel).
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    rho = np.abs(z)
    u = np.log(rho)
    # tan(theta/2) = y/(rho+x) = (rho-x)/y; pick the cancellation-free form
    yoff = np.where(x >= 0.0, np.log(y) - np.log(rho + x), np.log(rho - x) - np.log(y))
    return u, yoff


def dist_to_frame(p: HPoint, frame: GeodesicFrame):
    """(signed offset, foot parameter) of p relative to the frame."""
    w = frame.pullback(p)
    u, yoff = axis_coordinates(np.asarray([w]))
    return float(yoff[0]), float(u[0])


def dist_to_geodesic(p: HPoint, g: Geodesic):
    """Distance from p to g and the foot parameter in g's canonical frame."""
    m = _canonical_matrix(g)
    w = m.inverse().apply(p).as_complex()
    u, yoff = axis_coordinates(np.asarray([w]))
    return abs(float(yoff[0])), float(u[0])


def offset_point(frame: GeodesicFrame, s: float, y: float) -> HPoint:
    """The point at foot parameter s and signed perpendicular offset y.

    Satisfies cosh d(frame.point(0), result) = cosh s cosh y.
    """
    theta = 2.0 * math.atan(math.exp(frame.direction * y))
    rho = math.exp(frame.direction * s)
    w = HPoint(rho * math.cos(theta), rho * math.sin(theta))
    return frame._matrix.apply(w)


def apply_isometry(m: Isometry, obj):
    if isinstance(obj, HPoint):
        return m.apply(obj)
    if isinstance(obj, Geodesic):
        return m.apply_geodesic(obj)
    raise TypeError(f"cannot apply isometry to {type(obj).__name__}")


def reflection_in(g: Geodesic) -> Isometry:
    """The reflection across g as a negative-determinant Isometry."""
    if g.vertical:
        return Isometry(-1.0, 2.0 * g.a, 0.0, 1.0)
    c = 0.5 * (g.a + g.b)
    r = 0.5 * (g.b - g.a)
    # circle inversion z -> c + r^2/(zbar - c)
    return Isometry(c, r * r - c * c, 1.0, -c)


def reflect(g: Geodesic, p: HPoint) -> HPoint:
    return reflection_in(g).apply(p)


def to_disk(p: HPoint):
    """Cayley transform w = (z - i)/(z + i); sends (0, 1) to the disk center."""
    z = p.as_complex()
    w = (z - 1j) / (z + 1j)
    return (w.real, w.imag)


def from_disk(uv) -> HPoint:
    u, v = uv
    if u * u + v * v >= 1.0:
        raise ValueError(f"disk point must satisfy |(u, v)| < 1, got {uv}")
    w = complex(u, v)
    z = 1j * (1.0 + w) / (1.0 - w)
    return HPoint(z.real, z.imag)


def disk_dist(w1: complex, w2: complex) -> float:
    num = 2.0 * abs(w1 - w2) ** 2
    den = (1.0 - abs(w1) ** 2) * (1.0 - abs(w2) ** 2)
    return _acosh_excess(num / den)


def ideal_from_disk_angle(theta: float) -> float:
    """Boundary circle point e^{i theta} mapped to the UHP ideal boundary."""
    t = math.tan(0.5 * (theta % (2.0 * math.pi)))
    if t == 0.0:
        return INF
    return -1.0 / t


def disk_angle_from_ideal(x: float) -> float:
    """Inverse boundary map; returns an angle in [0, 2 pi)."""
    if x == INF:
        return 0.0
    return (2.0 * math.atan2(-1.0, x)) % (2.0 * math.pi)


def ball_area(r: float) -> float:
    return 2.0 * math.pi * (math.cosh(r) - 1.0)


def ball_circumference(r: float) -> float:
    return 2.0 * math.pi * math.sinh(r)


def ball_metrics(r: float):
    """(area, circumference) of the hyperbolic disk of radius r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return ball_area(r), ball_circumference(r)


def polar_around_origin(t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Points at hyperbolic distance t and direction phi from (0, 1),
    as complex UHP coordinates."""
    w = np.tanh(np.asarray(t) / 2.0) * np.exp(1j * np.asarray(phi))
    z = 1j * (1.0 + w) / (1.0 - w)
    return z.real + 1j * np.abs(z.imag)


# ---------------------------------------------------------------------------
# Hyperboloid-model helpers.  Large upper half-plane coordinates make the
# semicircle representation of near-vertical geodesics ill conditioned; the
# Minkowski form stays well scaled, so the tube and chord computations below
# run on it.  Vectors are [X1, X2, X0] with <u, v> = u1 v1 + u2 v2 - u0 v0.


def to_hyperboloid(z: np.ndarray) -> np.ndarray:
    """Map complex UHP coordinates to hyperboloid vectors, shape (..., 3)."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    n = x * x + y * y
    return np.stack([x / y, (n - 1.0) / (2.0 * y), (n + 1.0) / (2.0 * y)], axis=-1)


def minkowski(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def geodesic_normal(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit spacelike Minkowski normal of the geodesic through p and q."""
    e = np.cross(p, q)
    n = np.stack([e[..., 0], e[..., 1], -e[..., 2]], axis=-1)
    norm = np.sqrt(minkowski(n, n))
    return n / norm[..., None]


def segment_point_distance(p: np.ndarray, q: np.ndarray, w: np.ndarray):
    """Distances (and foot data) from points w to geodesic segments [p, q].

    p, q: (S, 3) hyperboloid endpoints; w: (N, 3) points.  Returns a
    triple (dist, foot, perp) of (S, N) arrays: the distance to the
    segment, the signed foot parameter measured from p toward q, and
    the unsigned perpendicular distance to the full geodesic.
    """
    p = np.atleast_2d(p)
    q = np.atleast_2d(q)
    w = np.atleast_2d(w)
    flip = np.asarray([1.0, 1.0, -1.0])  # turns a plain dot into <.,.>
    n = geodesic_normal(p, q)  # (S, 3)
    c = np.einsum("sk,nk->sn", n * flip, w)  # sinh of the signed offset
    perp = np.arcsinh(np.abs(c))
    w_plane = w[None, :, :] - c[:, :, None] * n[:, None, :]
    norm2 = -minkowski(w_plane, w_plane)
    f = w_plane / np.sqrt(np.maximum(norm2, 1e-300))[:, :, None]
    cosh_l = -minkowski(p, q)  # (S,)
    length = np.arccosh(np.maximum(cosh_l, 1.0))
    fp = -np.einsum("snk,sk->sn", f, p * flip)  # cosh d(f, p)
    fq = -np.einsum("snk,sk->sn", f, q * flip)
    sinh_l = np.maximum(np.sinh(length), 1e-300)[:, None]
    foot = np.arcsinh((np.cosh(length)[:, None] * fp - fq) / sinh_l)
    d_p = np.arccosh(np.maximum(-np.einsum("sk,nk->sn", p * flip, w), 1.0))
    d_q = np.arccosh(np.maximum(-np.einsum("sk,nk->sn", q * flip, w), 1.0))
    between = (fp <= cosh_l[:, None]) & (fq <= cosh_l[:, None])
    dist_seg = np.where(between, perp, np.minimum(d_p, d_q))
    return dist_seg, foot, perp
