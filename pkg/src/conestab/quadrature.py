"""Integration over the slice and over the boundary trace, plus the
finite-difference machinery for lower-right derivative estimates.

The slice integral is flattened by the unit-Jacobian shear
(x', x_n) -> (x', x_n + lam*|x'|) onto the half-space x_n > 0, then
integrated by tensor Gauss-Legendre in the axis direction times a polar
grid in x' (Gauss-Legendre radii times a uniform sphere grid).  Nodes
never touch the axis x' = 0, where the flow's derivatives live only as
one-sided limits.

The boundary trace integral carries a 1/|x'| weight: written in polar form
it is regular for n >= 3, log-divergent for n = 2 with a nonzero vertex
value, and in the cutoff regime it is integrated on a logarithmic grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .domain import ConeParams
from .errors import DivergentBoundaryIntegral, QuadratureError
from .trial import TrialFunction

__all__ = [
    "QuadratureSpec",
    "LiminfEstimate",
    "integrate_sigma",
    "boundary_integral",
    "liminf_quotient",
    "sigma_grid",
    "trace_grid",
    "sphere_grid",
    "gauss_legendre",
    "compensated_sum",
]

# Composite panels keep long Gauss-Legendre rules well-conditioned across
# the support kinks of the trial families.
_MAX_NODES_PER_PANEL = 32


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and geometry for the quadrature grids.

    ``box_nodes_per_axis`` is used for the axis direction of the sheared
    slice; ``angular_nodes`` is the node count per angular coordinate of
    the sphere grid; ``epsilon_cutoff`` > 0 opts in to the regularized
    trace integral (required to get a finite number in the divergent
    two-dimensional case).
    """

    radial_nodes: int = 64
    angular_nodes: int = 16
    box_nodes_per_axis: int = 64
    support_radius: float = 3.0
    epsilon_cutoff: float = 0.0

    def __post_init__(self):
        for name in ("radial_nodes", "angular_nodes", "box_nodes_per_axis"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {v!r}")
        if not self.support_radius > 0:
            raise ValueError(f"support_radius must be positive, got {self.support_radius!r}")
        if self.epsilon_cutoff < 0:
            raise ValueError(f"epsilon_cutoff must be >= 0, got {self.epsilon_cutoff!r}")


def gauss_legendre(a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with m total nodes on (a, b)."""
    panels = max(1, math.ceil(m / _MAX_NODES_PER_PANEL))
    base = m // panels
    extra = m % panels
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for k in range(panels):
        mk = base + (1 if k < extra else 0)
        if mk == 0:
            continue
        x0, w0 = np.polynomial.legendre.leggauss(mk)
        lo, hi = edges[k], edges[k + 1]
        xs.append(0.5 * (hi - lo) * x0 + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w0)
    return np.concatenate(xs), np.concatenate(ws)


def sphere_grid(d: int, angular_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Product grid on the unit sphere S^d in R^(d+1).

    d = 0 is the two-point sphere {-1, +1} with counting measure; d = 1 a
    uniform circle; d >= 2 a latitude-longitude product with the polar
    sine weights.  Weights sum to the sphere measure.
    """
    if d < 0:
        raise ValueError("sphere dimension must be >= 0")
    if d == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 1:
        m = angular_nodes
        phi = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return pts, np.full(m, 2.0 * np.pi / m)
    # polar angles theta_1..theta_{d-1} in (0, pi), azimuth in (0, 2*pi)
    m = angular_nodes
    theta = np.pi * (np.arange(m) + 0.5) / m
    dtheta = np.pi / m
    base_pts, base_w = sphere_grid(d - 1, angular_nodes)
    # x = (cos t, sin t * y) with y on S^(d-1); weight sin^(d-1) t
    pts = np.concatenate(
        [np.repeat(np.cos(theta), base_pts.shape[0])[:, None],
         np.kron(np.sin(theta)[:, None], base_pts)], axis=1)
    w = np.kron((np.sin(theta) ** (d - 1)) * dtheta, base_w)
    return pts, w


@lru_cache(maxsize=8)
def _sigma_grid_cached(n: int, lam: float, radial_nodes: int, angular_nodes: int,
                       box_nodes: int, support_radius: float):
    r, wr = gauss_legendre(0.0, support_radius, radial_nodes)
    y, wy = gauss_legendre(0.0, support_radius, box_nodes)
    theta, wt = sphere_grid(n - 2, angular_nodes)
    # tensor order: radius (major) x direction x axis (minor)
    m_t = theta.shape[0]
    R = np.repeat(r, m_t)
    XP = (r[:, None, None] * theta[None, :, :]).reshape(-1, n - 1)
    # polar volume element r^(n-2)
    wpol = np.repeat(wr, m_t) * np.tile(wt, r.shape[0]) * R ** (n - 2)
    m_pol = XP.shape[0]
    m_y = y.shape[0]
    pts = np.empty((m_pol * m_y, n))
    pts[:, : n - 1] = np.repeat(XP, m_y, axis=0)
    radii = np.repeat(R, m_y)
    pts[:, n - 1] = np.tile(y, m_pol) + lam * radii
    weights = np.repeat(wpol, m_y) * np.tile(wy, m_pol)
    pts.setflags(write=False)
    weights.setflags(write=False)
    radii.setflags(write=False)
    return pts, weights, radii


def sigma_grid(params: ConeParams, spec: QuadratureSpec):
    """Nodes (m, n), weights (m,) and x'-radii (m,) for the slice integral.

    Nodes lie strictly inside the slice and strictly off the axis; the grid
    is deterministic for a given (params, spec) and cached.
    """
    return _sigma_grid_cached(params.n, params.lam, spec.radial_nodes,
                              spec.angular_nodes, spec.box_nodes_per_axis,
                              spec.support_radius)


def compensated_sum(values: np.ndarray) -> float:
    """Deterministic compensated reduction (chunked pairwise + exact fsum)."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    chunk = 4096
    pad = (-v.size) % chunk
    if pad:
        v = np.concatenate([v, np.zeros(pad)])
    partials = v.reshape(-1, chunk).sum(axis=1)
    return math.fsum(partials.tolist())


def integrate_sigma(params: ConeParams, integrand: Callable[[np.ndarray], np.ndarray],
                    spec: QuadratureSpec) -> float:
    """Integral of ``integrand`` over the slice.

    The grid covers the sheared box {|x'| <= R, 0 < x_n - lam*|x'| <= R}
    with R the spec's support radius, which contains the slice ball of
    radius R; the integrand's support must fit inside it.  ``integrand``
    receives the full (m, n) node array and must return one value per node
    (stacked plane points).  Non-finite node values are rejected.
    """
    pts, weights, _ = sigma_grid(params, spec)
    vals = np.asarray(integrand(pts), dtype=float)
    if vals.shape != weights.shape:
        raise QuadratureError(
            f"integrand returned shape {vals.shape}, expected {weights.shape}")
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand produced non-finite values at quadrature nodes")
    return compensated_sum(vals * weights)


def quadrature_error_estimate(spec: QuadratureSpec, params: ConeParams) -> float:
    """Crude absolute error proxy: the default target of 1e-6 per unit of
    support volume, scaled by the integration box."""
    vol = spec.support_radius ** params.n
    return 1e-6 * max(1.0, vol)


# -- boundary trace integral --------------------------------------------------

def trace_grid(params: ConeParams, spec: QuadratureSpec, r_max: float,
               log_from: float | None = None, radial_power: int | None = None):
    """Nodes on the slice boundary, in polar trace form.

    Returns (pts (m, n), weights (m,), radii (m,)) such that
    sum w * h(pts) approximates the integral of r^p * h(r*theta, lam*r) dr
    dsigma(theta), with p = ``radial_power`` (default n-3, the weight of the
    1/|x'| trace integral).  With ``log_from`` set, radii are Gauss-Legendre
    in log r on (log_from, r_max) with the extra 1/r folded into the
    weights.
    """
    n = params.n
    p = n - 3 if radial_power is None else radial_power
    if log_from is None:
        r, wr = gauss_legendre(0.0, r_max, spec.radial_nodes)
        wr = wr * r ** p
    else:
        u, wu = gauss_legendre(math.log(log_from), math.log(r_max), spec.radial_nodes)
        r = np.exp(u)
        wr = wu * r ** (p + 1)  # du = dr/r
    theta, wt = sphere_grid(n - 2, spec.angular_nodes)
    m_t = theta.shape[0]
    pts = np.empty((r.size * m_t, n))
    pts[:, : n - 1] = np.repeat(r, m_t)[:, None] * np.tile(theta, (r.size, 1))
    radii = np.repeat(r, m_t)
    pts[:, n - 1] = params.lam * radii
    weights = np.repeat(wr, m_t) * np.tile(wt, r.size)
    return pts, weights, radii


def boundary_integral(params: ConeParams, f: TrialFunction,
                      spec: QuadratureSpec) -> float:
    """The weighted trace integral of f^2 / |x'| over the slice boundary
    (without any aperture prefactor).

    Regular for n >= 3.  For n = 2 it is finite only when f vanishes at the
    vertex; a nonzero vertex value without a positive ``epsilon_cutoff``
    raises :class:`DivergentBoundaryIntegral` -- the instability signature,
    reported explicitly rather than returned as a huge number.
    """
    n = params.n
    # the trace vanishes once r*sqrt(1+lam^2) exceeds the support radius
    r_max = min(spec.support_radius,
                f.support_radius / math.sqrt(1.0 + params.lam ** 2))
    cutoff = spec.epsilon_cutoff
    if n == 2 and cutoff == 0.0 and f.value_at_vertex != 0.0:
        raise DivergentBoundaryIntegral(
            "trace integral diverges: two-dimensional slice with nonzero "
            f"vertex value {f.value_at_vertex}; set epsilon_cutoff > 0 to regularize",
            vertex_value=f.value_at_vertex)
    if cutoff > 0.0:
        if cutoff >= r_max:
            return 0.0
        pts, weights, _ = trace_grid(params, spec, r_max, log_from=cutoff)
    else:
        pts, weights, _ = trace_grid(params, spec, r_max)
    vals = f.evaluator(pts) ** 2
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("trace integrand produced non-finite values")
    return compensated_sum(vals * weights)


# -- lower-right derivative estimates -----------------------------------------

@dataclass(frozen=True)
class LiminfEstimate:
    """Dyadic difference quotients with a Richardson-extrapolated limit.

    ``parameters`` decrease strictly to zero; ``converged`` records whether
    the last three quotients agree to the configured tolerance (that flag,
    not the extrapolation, is what acceptance gates on); ``tail_min`` is the
    conservative lower proxy for a liminf.
    """

    parameters: np.ndarray
    quotients: np.ndarray
    extrapolated: float
    converged: bool
    tail_min: float

    def __post_init__(self):
        p = np.asarray(self.parameters, dtype=float)
        q = np.asarray(self.quotients, dtype=float)
        if p.shape != q.shape or p.size < 3:
            raise ValueError("parameter/quotient sequences must match with length >= 3")
        if not np.all(np.diff(p) < 0) or not np.all(p > 0):
            raise ValueError("parameters must be strictly decreasing and positive")
        object.__setattr__(self, "parameters", p)
        object.__setattr__(self, "quotients", q)


def _richardson_tail(quotients: np.ndarray, window: int = 4) -> float:
    """Richardson table on the last ``window`` quotients (step ratio 2,
    integer error orders starting at 1)."""
    tail = list(quotients[-window:]) if len(quotients) >= window else list(quotients)
    level = 1
    while len(tail) > 1:
        factor = 2.0 ** level
        tail = [(factor * tail[i + 1] - tail[i]) / (factor - 1.0)
                for i in range(len(tail) - 1)]
        level += 1
    return float(tail[0])


def liminf_quotient(values: Callable[[float], float], order: int, t0: float,
                    levels: int, rtol: float = 1e-3) -> LiminfEstimate:
    """Difference quotients of ``values`` on the dyadic sequence t0 * 2^-k.

    order 1: (F(t) - F(0)) / t; order 2: 2 (F(t) - F(0)) / t^2.  The
    convergence flag requires the last three quotients to agree within
    ``rtol`` relative to max(1, |tail|), so sequences decaying to zero also
    register as converged once they are absolutely small.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if levels < 3:
        raise ValueError(f"levels must be >= 3, got {levels}")
    if not t0 > 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    f0 = float(values(0.0))
    ts = t0 * 0.5 ** np.arange(levels)
    quotients = np.empty(levels)
    for k, t in enumerate(ts):
        ft = float(values(float(t)))
        if not math.isfinite(ft):
            raise QuadratureError(f"non-finite evaluation at parameter {t}")
        diff = ft - f0
        quotients[k] = diff / t if order == 1 else 2.0 * diff / (t * t)
    tail = quotients[-3:]
    scale = max(1.0, float(np.max(np.abs(tail))))
    converged = bool(np.max(tail) - np.min(tail) <= rtol * scale)
    return LiminfEstimate(
        parameters=ts,
        quotients=quotients,
        extrapolated=_richardson_tail(quotients),
        converged=converged,
        tail_min=float(np.min(tail)),
    )
