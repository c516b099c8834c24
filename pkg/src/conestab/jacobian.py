"""Squared area-distortion factor of the flow, computed three ways.

The three routes are algebraically equal but numerically independent:

* the closed form in the deformation coefficients,
* the squared norm of the wedge product of the partial-derivative vectors
  on its (n+1)-element orthonormal multivector basis,
* a brute-force Gram determinant of the partials (LU elimination with
  partial pivoting, nothing shared with the formula under test).

The module also exposes the main-term/remainder split: the part of J^2
that survives as t -> 0 scaled by t^2, and the higher-order remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ConeParams, PlanePoint
from .errors import QuadratureError
from .flow import FlowCoefficients, flow_coefficients, flow_coefficients_batch, \
    partials_from_coefficients
from .trial import TrialFunction

__all__ = [
    "JacobianBreakdown",
    "jacobian_closed_form",
    "jacobian_gram_oracle",
    "wedge_expansion",
    "remainder",
    "main_term_batch",
    "jacobian_breakdown",
    "remainder_uniform_bound",
]


@dataclass(frozen=True)
class JacobianBreakdown:
    """J^2 at one point, split into its three verification routes."""

    j_squared: float
    main_term: float
    remainder: float
    gram_value: float


def _split(coeffs: FlowCoefficients):
    a = coeffs.alpha
    b = coeffs.beta
    an = a[..., -1]
    bn = b[..., -1]
    sa2 = np.sum(a[..., :-1] ** 2, axis=-1)
    sb2 = np.sum(b[..., :-1] ** 2, axis=-1)
    sab = np.sum(a[..., :-1] * b[..., :-1], axis=-1)
    return an, bn, sa2, sb2, sab


def jacobian_closed_form(coeffs: FlowCoefficients) -> float | np.ndarray:
    """(1+a_n)^2 (1+sum b_i^2) + b_n^2 (1+sum a_i^2) - 2(1+a_n) b_n sum a_i b_i."""
    an, bn, sa2, sb2, sab = _split(coeffs)
    out = (1.0 + an) ** 2 * (1.0 + sb2) + bn ** 2 * (1.0 + sa2) \
        - 2.0 * (1.0 + an) * bn * sab
    return float(out) if np.ndim(out) == 0 else out


def wedge_expansion(coeffs: FlowCoefficients) -> np.ndarray:
    """Multivector coefficients of the wedge of the n partial vectors.

    Shape (..., n+1) on the orthonormal basis: the undeformed component,
    the tilt component, and one mixed component per in-plane direction
    (b_n a_i - (1+a_n) b_i).  The squared Euclidean norm of this list equals
    the closed form.
    """
    a = coeffs.alpha
    b = coeffs.beta
    an = a[..., -1:]
    bn = b[..., -1:]
    mixed = bn * a[..., :-1] - (1.0 + an) * b[..., :-1]
    return np.concatenate([1.0 + an, bn, mixed], axis=-1)


def remainder(coeffs: FlowCoefficients) -> float | np.ndarray:
    """Higher-order part R of J^2; J^2 - R = 1 + 2 a_n + sum_i b_i^2 exactly."""
    an, bn, sa2, sb2, sab = _split(coeffs)
    out = an ** 2 * (1.0 + sb2) + 2.0 * an * sb2 + bn ** 2 * sa2 \
        - 2.0 * (1.0 + an) * bn * sab
    return float(out) if np.ndim(out) == 0 else out


def jacobian_gram_oracle(partials: np.ndarray) -> float | np.ndarray:
    """det of the n x n matrix of inner products of the partial vectors.

    ``partials`` has shape (..., n, n+1).  The determinant goes through LU
    elimination with partial pivoting (LAPACK), independent of the closed
    form; non-finite entries are rejected.
    """
    v = np.asarray(partials, dtype=float)
    if not np.all(np.isfinite(v)):
        raise QuadratureError("gram oracle: non-finite partial-derivative entries")
    gram = v @ np.swapaxes(v, -1, -2)
    out = np.linalg.det(gram)
    return float(out) if np.ndim(out) == 0 else out


def main_term_batch(params: ConeParams, f: TrialFunction, pts: np.ndarray,
                    t: float) -> np.ndarray:
    """1 + t^2 (|grad f|^2 + 2 lam f (axis partial of f)/sqrt(|x'|^2+t^2 f^2))."""
    pts = np.asarray(pts, dtype=float)
    r = np.linalg.norm(pts[..., :-1], axis=-1)
    fv = f.evaluator(pts)
    gv = f.gradient(pts)
    s = np.sqrt(r * r + (t * fv) ** 2)
    inv_s = np.where(s > 0.0, 1.0 / np.where(s > 0.0, s, 1.0), 0.0)
    grad_sq = np.sum(gv * gv, axis=-1)
    return 1.0 + t * t * (grad_sq + 2.0 * params.lam * fv * gv[..., -1] * inv_s)


def jacobian_breakdown(params: ConeParams, f: TrialFunction, x: PlanePoint,
                       t: float) -> JacobianBreakdown:
    """All four views of J^2 at one smooth point of the flow."""
    coeffs = flow_coefficients(params, f, x, t)
    j2 = jacobian_closed_form(coeffs)
    rem = remainder(coeffs)
    gram = jacobian_gram_oracle(partials_from_coefficients(coeffs))
    main = float(main_term_batch(params, f, x.vector[None, :], t)[0])
    return JacobianBreakdown(j_squared=j2, main_term=main, remainder=rem, gram_value=gram)


def remainder_uniform_bound(params: ConeParams, f: TrialFunction) -> float:
    """Certified bound for |R|/t^2, valid for all |t| <= 1 and all points.

    Derived from |a_n| <= lam*L*|t|, |b_i| <= L*|t|, and
    |a_i| <= lam*(L*|t| + 1) with L the Lipschitz bound of f; the loss of a
    radial factor in the middle estimate keeps the constant simple.
    """
    lam = params.lam
    L = f.lipschitz_bound
    m = f.dimension - 1
    return (lam * lam * L * L * (1.0 + L * L)
            + 2.0 * lam * L ** 3 * m
            + m * lam * lam * L * L * (L + 1.0) ** 2
            + 2.0 * (1.0 + lam * L) * m * lam * L * L * (L + 1.0))
