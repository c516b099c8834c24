"""The deformation flow of the slice and its exact partial derivatives.

Moving each point of the slice along its foliation curve, proportionally to
a scalar field f, gives the flow

    (x, t)  ->  (x', lam*sqrt(|x'|^2 + t^2 f(x)^2) + x_n - lam*|x'|, t*f(x)).

At smooth points the i-th partial is e_i + alpha_i e_n + beta_i e_(n+1)
with algebraic coefficients; those coefficients are all the downstream
area computations ever need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import AmbientPoint, ConeParams, PlanePoint, classify_plane_point
from .errors import MembershipError, NonSmoothPointError
from .trial import TrialFunction, is_smooth_point

__all__ = [
    "FlowCoefficients",
    "flow_map",
    "flow_partials",
    "flow_coefficients",
    "flow_map_batch",
    "flow_coefficients_batch",
]


@dataclass(frozen=True)
class FlowCoefficients:
    """Per-direction deformation coefficients at one point or a batch.

    ``alpha`` and ``beta`` have shape (..., n); the last component of beta is
    exactly t * (axis-direction partial of f).
    """

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.shape != b.shape:
            raise ValueError(f"alpha/beta shape mismatch: {a.shape} vs {b.shape}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def dimension(self) -> int:
        return self.alpha.shape[-1]


def flow_map_batch(params: ConeParams, f: TrialFunction, pts: np.ndarray,
                   t: float) -> np.ndarray:
    """Flow images of a (..., n) batch, as a (..., n+1) array. No checks."""
    pts = np.asarray(pts, dtype=float)
    xp = pts[..., :-1]
    xn = pts[..., -1]
    r = np.linalg.norm(xp, axis=-1)
    fv = f.evaluator(pts)
    lifted = params.lam * np.sqrt(r * r + (t * fv) ** 2) + xn - params.lam * r
    return np.concatenate([xp, lifted[..., None], (t * fv)[..., None]], axis=-1)


def flow_map(params: ConeParams, f: TrialFunction, x: PlanePoint, t: float) -> AmbientPoint:
    """Image of x under the flow at time t.

    Fixes x when t = 0 or f(x) = 0; the image equals the foliation point of
    x at parameter t*f(x) and lies in the closed container.
    """
    if x.dimension != params.n or f.dimension != params.n:
        raise ValueError("point, field, and cone dimensions must agree")
    if classify_plane_point(params, x) == "outside":
        raise MembershipError("flow_map: point lies outside the closed slice")
    out = flow_map_batch(params, f, x.vector, float(t))
    return AmbientPoint(out[:-2], out[-2], out[-1])


def flow_coefficients_batch(params: ConeParams, f: TrialFunction, pts: np.ndarray,
                            t: float) -> FlowCoefficients:
    """Coefficients alpha, beta on a (..., n) batch. No smoothness checks.

    Callers must feed smooth points (quadrature nodes are generated that
    way); the degenerate normalization sqrt(|x'|^2 + t^2 f^2) = 0 returns
    the limiting alpha = 0.
    """
    pts = np.asarray(pts, dtype=float)
    lam = params.lam
    xp = pts[..., :-1]
    r = np.linalg.norm(xp, axis=-1)
    fv = f.evaluator(pts)
    gv = f.gradient(pts)
    s = np.sqrt(r * r + (t * fv) ** 2)

    s_ok = s > 0.0
    r_ok = r > 0.0
    inv_s = np.where(s_ok, 1.0 / np.where(s_ok, s, 1.0), 0.0)
    inv_r = np.where(r_ok, 1.0 / np.where(r_ok, r, 1.0), 0.0)

    alpha = np.empty_like(gv)
    common = (t * t) * fv * inv_s
    alpha[..., :-1] = lam * (common[..., None] * gv[..., :-1]
                             + xp * (inv_s - inv_r)[..., None])
    alpha[..., -1] = lam * common * gv[..., -1]
    beta = t * gv
    return FlowCoefficients(alpha=alpha, beta=beta)


def flow_coefficients(params: ConeParams, f: TrialFunction, x: PlanePoint,
                      t: float) -> FlowCoefficients:
    """Coefficients at a single smooth point (checked)."""
    _require_smooth(params, f, x)
    return flow_coefficients_batch(params, f, x.vector, float(t))


def flow_partials(params: ConeParams, f: TrialFunction, x: PlanePoint,
                  t: float) -> np.ndarray:
    """The n ambient partial-derivative vectors at a smooth point.

    Returns an (n, n+1) array whose i-th row is e_i + alpha_i e_n +
    beta_i e_(n+1); cross-validated against finite differences of the flow
    map in the test suite.
    """
    coeffs = flow_coefficients(params, f, x, t)
    return partials_from_coefficients(coeffs)


def partials_from_coefficients(coeffs: FlowCoefficients) -> np.ndarray:
    """Assemble (..., n, n+1) derivative vectors from coefficients."""
    a = coeffs.alpha
    b = coeffs.beta
    n = a.shape[-1]
    shape = a.shape[:-1] + (n, n + 1)
    v = np.zeros(shape)
    idx = np.arange(n)
    v[..., idx, idx] = 1.0
    v[..., :, n - 1] += a
    v[..., :, n] += b
    return v


def _require_smooth(params: ConeParams, f: TrialFunction, x: PlanePoint):
    if classify_plane_point(params, x) == "outside":
        raise MembershipError("point lies outside the closed slice")
    if not is_smooth_point(f, x):
        raise NonSmoothPointError(
            "derivatives requested at a non-smooth point (on the axis or on "
            "a kink of the deformation field); quadrature nodes must avoid these"
        )
