"""Randomized invariant suites: the heart of the `verify` command.

Each suite checks one package-level contract over a seeded sample and
reports its worst observed error, so a run is reproducible bit-for-bit
from (config, seed).  The acceptance tests call these functions with the
criterion sample sizes; the CLI calls them with configured sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import (ConeParams, PlanePoint, classify_ambient_point, foliation_lipschitz_bound,
                     gamma_curve, omega_profile)
from .flow import FlowCoefficients, flow_coefficients_batch, partials_from_coefficients
from .jacobian import (jacobian_closed_form, jacobian_gram_oracle, main_term_batch,
                       remainder, remainder_uniform_bound, wedge_expansion)
from .quadrature import QuadratureSpec, boundary_integral
from .stability import kato_constant, lambda_star, shear_transform_check
from .trial import make_radial_bump, make_tensor_bump, sample_smooth_points, standard_battery
from .variation import dirichlet_energy

__all__ = [
    "SuiteResult",
    "jacobian_suite",
    "foliation_suite",
    "remainder_suite",
    "kato_suite",
    "ALL_SUITES",
]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst_error: float
    samples: int
    detail: str = ""


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b) / denom))


def _flow_sample_fields(n: int):
    up = np.zeros(n)
    up[-1] = 1.2
    return [make_radial_bump(up, 0.7, n),
            make_tensor_bump(up * (1.0 / 1.2), 0.5, n, exponent=2)]


def jacobian_suite(random_draws: int = 10_000, flow_samples: int = 1000,
                   seed: int = 0, dims=(2, 3, 4, 6), tol: float = 1e-10,
                   corrupt_closed_form: bool = False) -> SuiteResult:
    """Three-way distortion-factor agreement plus the main/remainder split.

    Random coefficient draws cover the pure multilinear identity beyond the
    configurations a flow can reach; genuine flow samples tie the identity
    back to actual deformations.  ``corrupt_closed_form`` is the negative
    control: it perturbs the closed form and must make the suite fail.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    total = 0
    bad = 1.0 + 3e-7 if corrupt_closed_form else 1.0

    for n in dims:
        draws = rng.uniform(-1.0, 1.0, size=(random_draws, 2 * n))
        coeffs = FlowCoefficients(alpha=draws[:, :n], beta=draws[:, n:])
        closed = jacobian_closed_form(coeffs) * bad
        wedge_sq = np.sum(wedge_expansion(coeffs) ** 2, axis=-1)
        gram = jacobian_gram_oracle(partials_from_coefficients(coeffs))
        algebra_main = 1.0 + 2.0 * coeffs.alpha[:, -1] + np.sum(coeffs.beta ** 2, axis=-1)
        worst = max(worst,
                    _rel_err(closed, wedge_sq),
                    _rel_err(closed, gram),
                    _rel_err(wedge_sq, gram),
                    _rel_err(closed - remainder(coeffs), algebra_main))
        total += random_draws

    params = ConeParams(3, 0.7)
    fields = _flow_sample_fields(3)
    per = max(1, flow_samples // (len(fields) * 5))
    for f in fields:
        pts = sample_smooth_points(params, f, rng, per * 5)
        for t in np.linspace(0.08, 0.75, 5):
            sel = pts[:per] if t < 0.5 else pts[-per:]
            coeffs = flow_coefficients_batch(params, f, sel, float(t))
            closed = jacobian_closed_form(coeffs) * bad
            wedge_sq = np.sum(wedge_expansion(coeffs) ** 2, axis=-1)
            gram = jacobian_gram_oracle(partials_from_coefficients(coeffs))
            main = main_term_batch(params, f, sel, float(t))
            worst = max(worst,
                        _rel_err(closed, wedge_sq),
                        _rel_err(closed, gram),
                        _rel_err(wedge_sq, gram),
                        _rel_err(closed - remainder(coeffs), main))
            total += sel.shape[0]

    return SuiteResult("jacobian", worst <= tol, worst, total,
                       f"three-way and main/remainder agreement over {total} samples")


def _sample_slice_points(params: ConeParams, rng, count: int, boundary: bool):
    n = params.n
    theta = rng.normal(size=(count, n - 1))
    theta /= np.linalg.norm(theta, axis=1, keepdims=True)
    r = rng.uniform(0.0, 2.0, size=count)
    xp = r[:, None] * theta
    y = np.zeros(count) if boundary else rng.uniform(1e-6, 2.0, size=count)
    xn = params.lam * r + y
    return np.concatenate([xp, xn[:, None]], axis=1)


def foliation_suite(pairs: int = 1000, seed: int = 0,
                    lams=(0.0, 0.3, 1.0, 2.5), dims=(2, 3)) -> SuiteResult:
    """Injectivity, boundary invariance, and the certified Lipschitz bound
    of the foliation, on sampled point pairs.  Zero violations allowed."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    total = 0
    per = max(1, pairs // (len(lams) * len(dims)))
    for n in dims:
        for lam in lams:
            params = ConeParams(n, lam)
            bound = foliation_lipschitz_bound(params)
            xs = _sample_slice_points(params, rng, per, boundary=False)
            ys = _sample_slice_points(params, rng, per, boundary=False)
            bs = _sample_slice_points(params, rng, per, boundary=True)
            ts = rng.uniform(-2.0, 2.0, size=per)
            us = rng.uniform(-2.0, 2.0, size=per)
            for i in range(per):
                total += 1
                x = PlanePoint(xs[i, :-1], xs[i, -1])
                y_pt = PlanePoint(ys[i, :-1], ys[i, -1])
                b = PlanePoint(bs[i, :-1], bs[i, -1])
                t, u = float(ts[i]), float(us[i])
                gx = gamma_curve(params, x, t)
                gy = gamma_curve(params, y_pt, u)
                gx_same_t = gamma_curve(params, x, u)
                # (a) curves through distinct points never meet at equal heights
                if np.max(np.abs(gx_same_t.vector - gy.vector)) == 0.0:
                    violations += 1
                # (b) boundary points stay on the container boundary, interior inside
                gb = gamma_curve(params, b, t)
                gap = gb.x_n - omega_profile(params, gb.x_prime, gb.t)
                worst = max(worst, abs(gap))
                if classify_ambient_point(params, gb) != "boundary":
                    violations += 1
                if classify_ambient_point(params, gx) == "outside":
                    violations += 1
                # (c) certified Lipschitz constant in the stated 1-norm
                lhs = float(np.linalg.norm(gx.vector - gy.vector))
                rhs = (np.linalg.norm(x.x_prime - y_pt.x_prime)
                       + abs(x.x_n - y_pt.x_n) + abs(t - u))
                if lhs > bound * rhs * (1.0 + 1e-12) + 1e-12:
                    violations += 1
                    worst = max(worst, lhs - bound * rhs)
    return SuiteResult("foliation", violations == 0, worst, total,
                       f"{violations} violations over {total} sampled pairs")


def remainder_suite(points: int = 1000, max_level: int = 20, seed: int = 0,
                    tail_fraction: float = 1e-3) -> SuiteResult:
    """Uniform bound |R|/t^2 <= C(Lip f) on dyadic t, plus decay of the tail."""
    rng = np.random.default_rng(seed)
    params = ConeParams(3, 0.7)
    worst_ratio = 0.0  # of |R|/t^2 against the certified bound
    total = 0
    passed = True
    detail = []
    for f in _flow_sample_fields(3):
        bound = remainder_uniform_bound(params, f)
        pts = sample_smooth_points(params, f, rng, points)
        sup_by_level = []
        for k in range(max_level + 1):
            t = 2.0 ** (-k)
            coeffs = flow_coefficients_batch(params, f, pts, t)
            ratio = np.max(np.abs(remainder(coeffs))) / (t * t)
            sup_by_level.append(ratio)
            worst_ratio = max(worst_ratio, ratio / bound)
            total += pts.shape[0]
        if max(sup_by_level) > bound:
            passed = False
            detail.append(f"{f.label}: bound {bound:.3g} exceeded")
        if sup_by_level[-1] > tail_fraction * bound:
            passed = False
            detail.append(f"{f.label}: tail {sup_by_level[-1]:.3g} above {tail_fraction} * bound")
    return SuiteResult("remainder", passed, worst_ratio, total,
                       "; ".join(detail) or "uniform bound and tail decay hold")


def kato_suite(dims=(3, 4, 5), battery_size: int = 20,
               specs: dict | None = None, slack: float = 1e-8) -> SuiteResult:
    """Margins of the trace inequality and both links of the threshold chain.

    For each dimension, each aperture parameter in {0, lam*/2, lam*} and each
    battery member: the direct margin, the aperture-vs-constant comparison,
    and the two flattening contracts each must hold with slack >= -1e-8.
    """
    if specs is None:
        specs = {3: QuadratureSpec(64, 16, 64, 3.1),
                 4: QuadratureSpec(48, 10, 48, 3.1),
                 5: QuadratureSpec(32, 8, 32, 3.1)}
    worst_slack = math.inf
    total = 0
    passed = True
    detail = []
    for n in dims:
        spec = specs.get(n, QuadratureSpec(32, 8, 32, 3.1))
        thr = lambda_star(n)
        k = thr.k_n
        battery = standard_battery(n, battery_size)
        for lam in (0.0, 0.5 * thr.lambda_star, thr.lambda_star):
            params = ConeParams(n, lam)
            cfac = k / (1.0 + lam) ** 2
            if lam > cfac * (1.0 + 1e-12):
                passed = False
                detail.append(f"n={n}: aperture link failed at lam={lam}")
            for f in battery:
                energy_f, energy_g, trace = shear_transform_check(params, f, spec)
                checks = (
                    energy_f - cfac * trace,              # direct margin
                    (cfac - lam) * trace,                 # aperture link applied to the trace
                    (1.0 + lam) ** 2 * energy_f - energy_g,   # flattening gradient contract
                    energy_g - k * trace,                 # half-space trace inequality
                )
                worst_slack = min(worst_slack, *checks)
                total += 1
                if min(checks) < -slack:
                    passed = False
                    detail.append(f"n={n}, lam={lam:.4g}, {f.label}: slack {min(checks):.3g}")
    return SuiteResult("kato", passed, worst_slack, total,
                       "; ".join(detail[:4]) or
                       f"all inequality links hold; worst slack {worst_slack:.3g}")


ALL_SUITES = ("jacobian", "foliation", "remainder", "kato")


def run_suites(names, *, random_draws=10_000, flow_samples=1000, pairs=1000,
               points=1000, battery_size=20, seed=0,
               corrupt_closed_form=False) -> list[SuiteResult]:
    """Run the named suites with the given sample counts."""
    out = []
    for name in names:
        if name == "jacobian":
            out.append(jacobian_suite(random_draws, flow_samples, seed,
                                      corrupt_closed_form=corrupt_closed_form))
        elif name == "foliation":
            out.append(foliation_suite(pairs, seed))
        elif name == "remainder":
            out.append(remainder_suite(points, seed=seed))
        elif name == "kato":
            out.append(kato_suite(battery_size=battery_size))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out
