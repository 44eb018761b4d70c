"""Closed forms and the integral-equation solver for the decay exponents.

The probability f(r) that a geodesic segment of length r stays inside
the random set decays like e^{-alpha r}.  For the vacant set alpha has
the closed form 2 lambda sinh R; for the occupied set alpha is the
unique positive root of an exponential-moment equation driven by the
hitting-time law G of the first coverage gap; for the line-process
complement f(r) = e^{-lambda r} exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import ball_area
from .sampling import ModelParams

__all__ = [
    "AlphaResult",
    "Quadrature",
    "SolverError",
    "f_vacant",
    "alpha_vacant",
    "lambda_gv",
    "area_crescent",
    "area_crescent_closed_form",
    "hitting_cdf",
    "hitting_density",
    "hitting_H",
    "alpha_occupied",
    "lambda_gc",
    "f_grassmann",
    "lrp_edge_measure",
    "lrp_edge_prob",
]


class SolverError(RuntimeError):
    """Root bracketing or residual control failed."""


@dataclass(frozen=True)
class Quadrature:
    """Tolerances for the adaptive quadratures and the root searches."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_subdivisions: int = 200
    gauss_nodes: int = 160

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class AlphaResult:
    """Occupied-set decay exponent with solver diagnostics.

    ``residual`` is the value of the defining integral minus one at the
    returned exponent and must be below 1e-10 in magnitude.
    """

    alpha: float
    residual: float
    iterations: int


DEFAULT_QUADRATURE = Quadrature()


def f_vacant(r: float, params: ModelParams) -> float:
    """P(segment of length r lies in the vacant set):
    exp(-lambda (2 r sinh R + full ball area)).

    The r-independent factor is the area of the two half-disk end caps
    of the segment's R-neighborhood; at r = 0 this is the probability
    that a fixed point is vacant.
    """
    if r < 0:
        raise ValueError("segment length must be nonnegative")
    lam, R = params.intensity, params.radius
    return math.exp(-lam * (2.0 * r * math.sinh(R) + ball_area(R)))


def alpha_vacant(params: ModelParams) -> float:
    """Vacant-set decay exponent 2 lambda sinh R."""
    return 2.0 * params.intensity * math.sinh(params.radius)


def lambda_gv(R: float) -> float:
    """Critical intensity for lines in the vacant set, 1/(2 sinh R)."""
    if not R > 0:
        raise ValueError("R must be positive")
    return 1.0 / (2.0 * math.sinh(R))


def _crescent_integrand(s: float, R: float) -> float:
    v = math.cosh(R) ** 2 / math.cosh(s) ** 2 - 1.0
    return 2.0 * math.sqrt(max(v, 0.0))


def area_crescent(t: float, R: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Area of the crescent B(gamma(0), R) \\ B(gamma(t), R).

    Equals the area of the band of the ball whose foot parameter lies
    in [-t/2, t/2]; for t >= 2R the balls are disjoint and the crescent
    is the whole ball.  Computed by adaptive quadrature of
    2 sqrt(cosh^2 R / cosh^2 s - 1); the square-root zero at s = R is
    integrable and handled by subdivision.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t >= 2.0 * R:
        return ball_area(R)
    val, _ = integrate.quad(
        _crescent_integrand,
        -t / 2.0,
        t / 2.0,
        args=(R,),
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=q.max_subdivisions,
    )
    return float(val)


def area_crescent_closed_form(t: float, R: float) -> float:
    """Antiderivative oracle for area_crescent:
    4 [cosh R arctan(cosh R u / sqrt(sinh^2 R - u^2)) - arcsin(u / sinh R)]
    with u = sinh(t/2)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    a, k = math.sinh(R), math.cosh(R)
    u = math.sinh(min(t, 2.0 * R) / 2.0)
    if u >= a:
        return ball_area(R)
    return 4.0 * (k * math.atan(k * u / math.sqrt(a * a - u * u)) - math.asin(u / a))


def hitting_cdf(t: float, params: ModelParams, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """G(t) = P(first coverage gap parameter S falls in (0, t)):
    1 - exp(-lambda area of the crescent)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 1.0 - math.exp(-params.intensity * area_crescent(t, params.radius, q))


def hitting_density(s, params: ModelParams, q: Quadrature = DEFAULT_QUADRATURE):
    """G'(s) = lambda 2 sqrt(cosh^2 R / cosh^2(s/2) - 1) e^{-lambda area}."""
    lam, R = params.intensity, params.radius
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    area = np.array([area_crescent(si, R, q) for si in s_arr])
    rate = 2.0 * np.sqrt(np.maximum(np.cosh(R) ** 2 / np.cosh(s_arr / 2.0) ** 2 - 1.0, 0.0))
    out = lam * rate * np.exp(-lam * area)
    return out if np.ndim(s) else float(out[0])


def hitting_H(t: float, params: ModelParams, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """The half-range form: -exp(-4 lambda int_0^{t/2} ...); equals G - 1."""
    lam, R = params.intensity, params.radius
    val, _ = integrate.quad(
        lambda s: math.sqrt(max(math.cosh(R) ** 2 / math.cosh(s) ** 2 - 1.0, 0.0)),
        0.0,
        min(t, 2.0 * R) / 2.0,
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=q.max_subdivisions,
    )
    return -math.exp(-4.0 * lam * val)


def _exponent_nodes(R: float, q: Quadrature):
    """Gauss-Legendre nodes for int_0^{2R} e^{beta s} G'(s) ds after the
    substitution s = 2R - w^2, which removes the square-root zero of G'
    at s = 2R and makes the rule converge spectrally."""
    x, wq = np.polynomial.legendre.leggauss(q.gauss_nodes)
    wmax = math.sqrt(2.0 * R)
    w = 0.5 * wmax * (x + 1.0)
    jac = 0.5 * wmax * wq * 2.0 * w
    s = 2.0 * R - w * w
    area = np.array([area_crescent(si, R, q) for si in s])
    rate = 2.0 * np.sqrt(np.maximum(np.cosh(R) ** 2 / np.cosh(s / 2.0) ** 2 - 1.0, 0.0))
    return s, jac, area, rate


def _exponent_residual(beta: float, lam: float, s, jac, area, rate) -> float:
    gp = lam * rate * np.exp(-lam * area)
    return float(np.dot(jac, np.exp(beta * s) * gp)) - 1.0


def alpha_occupied(
    params: ModelParams, q: Quadrature = DEFAULT_QUADRATURE, _nodes=None
) -> AlphaResult:
    """Occupied-set exponent: the unique beta > 0 with
    int_0^{2R} e^{beta s} G'(s) ds = 1.

    The integral at beta = 0 is P(S > 0) < 1 and grows monotonically in
    beta, so a geometric search brackets the root and bisection to
    width 1e-12 pins it down.
    """
    lam, R = params.intensity, params.radius
    if not lam > 0:
        raise ValueError("occupied exponent needs positive intensity")
    s, jac, area, rate = _nodes if _nodes is not None else _exponent_nodes(R, q)

    def residual(beta):
        return _exponent_residual(beta, lam, s, jac, area, rate)

    iterations = 0
    lo, hi = 0.0, 1.0
    while residual(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if hi > 1e6:
            raise SolverError(
                f"no exponent bracket below 1e6 for lambda={lam}, R={R}"
            )
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    beta = 0.5 * (lo + hi)
    res = residual(beta)
    if abs(res) > 1e-10:
        raise SolverError(f"exponent residual {res:.3e} exceeds 1e-10")
    return AlphaResult(beta, res, iterations)


def lambda_gc(R: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Critical intensity for lines in the occupied set: the lambda at
    which the occupied exponent equals one.

    The exponent is strictly decreasing in lambda, so a geometric
    bracket plus bisection converges; the result satisfies
    |alpha(lambda_gc) - 1| < 1e-8.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    nodes = _exponent_nodes(R, q)

    def excess(lam):
        return alpha_occupied(ModelParams(lam, R), q, _nodes=nodes).alpha - 1.0

    lo = hi = 1.0 / (2.0 * math.sinh(R))  # vacant threshold as a starting scale
    if excess(lo) > 0.0:
        while excess(hi) > 0.0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e9:
                raise SolverError(f"no lambda_gc bracket below 1e9 for R={R}")
    else:
        while excess(lo) < 0.0:
            hi, lo = lo, lo / 2.0
            if lo < 1e-12:
                raise SolverError(f"no lambda_gc bracket above 1e-12 for R={R}")
    while hi - lo > 1e-11 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    check = alpha_occupied(ModelParams(lam, R), q, _nodes=nodes)
    if abs(check.alpha - 1.0) > 1e-8:
        raise SolverError(f"lambda_gc residual |alpha-1| = {abs(check.alpha-1.0):.3e}")
    return lam


def f_grassmann(r: float, intensity: float) -> float:
    """P(segment of length r avoids every line of the process) = e^{-lambda r}."""
    if r < 0:
        raise ValueError("segment length must be nonnegative")
    return math.exp(-intensity * r)


def lrp_edge_measure(x: int, y: int) -> float:
    """Measure of lines with one ideal endpoint in [x, x+1] and the
    other in [y, y+1]: log(n^2 / ((n-1)(n+1))) for gap n = y - x."""
    n = y - x
    if n < 2:
        raise ValueError("intervals must be disjoint and non-adjacent (y >= x + 2)")
    return math.log(n * n / ((n - 1.0) * (n + 1.0)))


def lrp_edge_prob(x: int, y: int, intensity: float, c: float) -> float:
    """Edge probability of the induced long-range percolation on Z:
    c (1 - e^{-lambda measure}); asymptotic to c/|x-y|^2 at lambda = 1."""
    return c * (1.0 - math.exp(-intensity * lrp_edge_measure(x, y)))
