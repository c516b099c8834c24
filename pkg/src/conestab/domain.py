"""Geometry of the convex circular cone, its flat slice, and the foliation.

The container is the region above the conical profile
``lam * sqrt(|x'|^2 + t^2)`` in R^(n+1); the slice is the half-plane cut
out of the hyperplane t = 0 by the same profile.  Through every point of
the closed slice runs one curve of a foliation of the closed container,
obtained by letting the profile's t-argument vary while keeping the height
above the profile fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MembershipError

__all__ = [
    "ConeParams",
    "PlanePoint",
    "AmbientPoint",
    "omega_profile",
    "gamma_curve",
    "foliation_lipschitz_bound",
    "shear_map",
    "classify_plane_point",
    "classify_ambient_point",
    "membership_tolerance",
]


@dataclass(frozen=True)
class ConeParams:
    """Dimension n of the slice and slope ``lam`` of the conical profile.

    ``lam = 0`` is accepted as the degenerate flat half-space reference
    (identity shear, aperture pi); every positive ``lam`` gives a genuine
    cone with aperture ``2*arccot(lam)`` in (0, pi).
    """

    n: int
    lam: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"dimension n must be an integer >= 2, got {self.n!r}")
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0.0:
            raise ValueError(f"aperture parameter must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    @property
    def aperture(self) -> float:
        """Opening angle 2*arccot(lam), in (0, pi] with pi at lam = 0."""
        return 2.0 * math.atan2(1.0, self.lam)


@dataclass(frozen=True)
class PlanePoint:
    """A point x = (x', x_n) of the slice hyperplane R^n."""

    x_prime: np.ndarray
    x_n: float

    def __post_init__(self):
        xp = np.asarray(self.x_prime, dtype=float).reshape(-1)
        xp.setflags(write=False)
        object.__setattr__(self, "x_prime", xp)
        object.__setattr__(self, "x_n", float(self.x_n))

    @classmethod
    def from_vector(cls, vec) -> "PlanePoint":
        vec = np.asarray(vec, dtype=float).reshape(-1)
        return cls(vec[:-1], vec[-1])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x_prime, [self.x_n]])

    @property
    def dimension(self) -> int:
        return self.x_prime.size + 1


@dataclass(frozen=True)
class AmbientPoint:
    """A point (x', x_n, t) of the ambient space R^(n+1)."""

    x_prime: np.ndarray
    x_n: float
    t: float

    def __post_init__(self):
        xp = np.asarray(self.x_prime, dtype=float).reshape(-1)
        xp.setflags(write=False)
        object.__setattr__(self, "x_prime", xp)
        object.__setattr__(self, "x_n", float(self.x_n))
        object.__setattr__(self, "t", float(self.t))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x_prime, [self.x_n, self.t]])

    @property
    def plane_part(self) -> PlanePoint:
        return PlanePoint(self.x_prime, self.x_n)


def membership_tolerance(vec, tol: float | None = None) -> float:
    """Absolute tolerance used to classify boundary points: 1e-12*(1+|x|)."""
    if tol is not None:
        return float(tol)
    norm = float(np.linalg.norm(np.asarray(vec, dtype=float)))
    return 1e-12 * (1.0 + norm)


def omega_profile(params: ConeParams, x_prime, t) -> float | np.ndarray:
    """Profile height lam*sqrt(|x'|^2 + t^2).

    Total, nonnegative, and jointly 1-homogeneous in (x', t).  ``x_prime``
    may carry leading batch axes; ``t`` broadcasts against them.
    """
    xp = np.atleast_1d(np.asarray(x_prime, dtype=float))
    rsq = np.sum(xp * xp, axis=-1)
    out = params.lam * np.sqrt(rsq + np.square(np.asarray(t, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def classify_plane_point(params: ConeParams, x: PlanePoint, tol: float | None = None) -> str:
    """'interior' / 'boundary' / 'outside' relative to the closed slice.

    The vertex classifies as 'boundary' (its height equals the profile, both
    zero there).
    """
    gap = x.x_n - omega_profile(params, x.x_prime, 0.0)
    eps = membership_tolerance(x.vector, tol)
    if gap > eps:
        return "interior"
    if gap >= -eps:
        return "boundary"
    return "outside"


def classify_ambient_point(params: ConeParams, p: AmbientPoint, tol: float | None = None) -> str:
    """'interior' / 'boundary' / 'outside' relative to the closed container."""
    gap = p.x_n - omega_profile(params, p.x_prime, p.t)
    eps = membership_tolerance(p.vector, tol)
    if gap > eps:
        return "interior"
    if gap >= -eps:
        return "boundary"
    return "outside"


def gamma_curve(params: ConeParams, x: PlanePoint, t: float) -> AmbientPoint:
    """Foliation point (x', x_n + profile(x', t) - profile(x', 0), t).

    Requires x in the closed slice; the result lies in the closed container,
    on its boundary exactly when x lies on the slice boundary.
    """
    if x.dimension != params.n:
        raise ValueError(f"point dimension {x.dimension} != slice dimension {params.n}")
    if classify_plane_point(params, x) == "outside":
        raise MembershipError(
            f"gamma_curve: point with height {x.x_n} lies below the profile "
            f"{omega_profile(params, x.x_prime, 0.0)}"
        )
    lift = omega_profile(params, x.x_prime, t) - omega_profile(params, x.x_prime, 0.0)
    return AmbientPoint(x.x_prime, x.x_n + lift, float(t))


def foliation_lipschitz_bound(params: ConeParams) -> float:
    """Certified Lipschitz constant 1 + 2*lam of (x, t) -> foliation point.

    Measured against the 1-norm |x'-y'| + |x_n-y_n| + |t-u| on inputs; the
    profile itself is lam-Lipschitz.
    """
    return 1.0 + 2.0 * params.lam


def shear_map(params: ConeParams, x) -> np.ndarray:
    """Unit-Jacobian flattening (x', x_n) -> (x', x_n + lam*|x'|).

    Maps the open half-space x_n > 0 onto the open slice; accepts a single
    vector or a batch with points on the last axis.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts).copy()
    r = np.linalg.norm(pts[..., :-1], axis=-1)
    pts[..., -1] += params.lam * r
    return pts[0] if single else pts
