"""Trace constant, threshold aperture, margins, and stability verdicts."""

import math

import numpy as np
import pytest

from conestab.domain import ConeParams
from conestab.quadrature import QuadratureSpec
from conestab.stability import (INCONCLUSIVE, PROVEN_STABLE, UNSTABLE,
                                instability_witness_n2, kato_constant, kato_margin,
                                lambda_star, shear_transform_check, stability_sweep)
from conestab.trial import (make_boundary_bump, make_radial_bump, scaled,
                            standard_battery)

# frozen high-precision references
K3_REFERENCE = 0.2284732905222318
LAMBDA3_REFERENCE = 0.167591979448816
LAMBDA4_REFERENCE = 0.349546212970872

SPEC3 = QuadratureSpec(64, 16, 64, 3.1)


def test_constant_special_values():
    assert kato_constant(4) == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert kato_constant(6) == pytest.approx(math.pi / 2.0, abs=1e-12)
    assert kato_constant(3) == pytest.approx(K3_REFERENCE, abs=1e-12)
    assert abs(kato_constant(3) - 0.228473) <= 1e-6


def test_constant_rejects_degenerate_dimensions():
    for n in (2, 1, 0):
        with pytest.raises(ValueError):
            kato_constant(n)


def test_constant_monotone_and_asymptotic():
    values = [kato_constant(n) for n in range(3, 13)]
    assert np.all(np.diff(values) > 0)
    # ratio against (n-2)/2 climbs toward 1 from below
    ratios = [values[i] / ((n - 2) / 2.0) for i, n in enumerate(range(3, 13))]
    assert np.all(np.diff(ratios) > 0)
    assert 0.4 < ratios[0] < ratios[-1] < 1.0


def test_threshold_values():
    thr3 = lambda_star(3)
    thr4 = lambda_star(4)
    assert abs(thr3.lambda_star - 0.1676) <= 1e-4
    assert abs(thr4.lambda_star - 0.3496) <= 1e-4
    assert thr3.lambda_star == pytest.approx(LAMBDA3_REFERENCE, abs=1e-12)
    assert thr4.lambda_star == pytest.approx(LAMBDA4_REFERENCE, abs=1e-12)


def test_threshold_residual_contract():
    for n in range(3, 13):
        thr = lambda_star(n)
        assert abs(thr.residual) <= 1e-12 * thr.k_n
        cubic = thr.lambda_star * (1 + thr.lambda_star) ** 2
        assert cubic == pytest.approx(thr.k_n, rel=1e-12)


def test_threshold_monotone_in_dimension():
    stars = [lambda_star(n).lambda_star for n in range(3, 13)]
    assert np.all(np.diff(stars) > 0)


def test_margin_zero_field():
    params = ConeParams(3, 0.2)
    zero = scaled(make_boundary_bump(1.0, 3), 0.0)
    assert kato_margin(params, zero, SPEC3) == 0.0


def test_margin_interior_field_is_dirichlet_energy():
    params = ConeParams(3, 0.2)
    f = make_radial_bump([0.0, 0.0, 2.0], 0.8, 3)
    m = kato_margin(params, f, SPEC3)
    assert m > 0.5  # boundary term vanishes; pure Dirichlet energy remains


def test_margin_battery_nonnegative():
    for n in (3, 4):
        thr = lambda_star(n)
        spec = SPEC3 if n == 3 else QuadratureSpec(40, 10, 40, 3.1)
        for lam in (0.0, thr.lambda_star):
            params = ConeParams(n, lam)
            for f in standard_battery(n, 6):
                assert kato_margin(params, f, spec) >= -1e-8


def test_shear_check_identity_at_flat_aperture():
    params = ConeParams(3, 0.0)
    f = make_boundary_bump(1.0, 3)
    energy_f, energy_g, trace = shear_transform_check(params, f, SPEC3)
    assert energy_g == pytest.approx(energy_f, rel=1e-12)
    assert trace >= 0


def test_shear_check_contract_inequalities():
    params = ConeParams(3, 0.3)
    for f in standard_battery(3, 8):
        energy_f, energy_g, trace = shear_transform_check(params, f, SPEC3)
        assert energy_g <= (1 + params.lam) ** 2 * energy_f + 1e-8
        assert energy_g >= kato_constant(3) * trace - 1e-8


def test_shear_check_rejects_two_dims():
    with pytest.raises(ValueError):
        shear_transform_check(ConeParams(2, 0.5), make_boundary_bump(1.0, 2), SPEC3)


def test_witness_two_dims_unstable():
    params = ConeParams(2, 1.0)
    spec = QuadratureSpec(128, 2, 128, 1.5)
    verdict = instability_witness_n2(params, (1e-2, 1e-3, 1e-4, 1e-5, 1e-6), spec=spec)
    assert verdict.regime == UNSTABLE
    assert verdict.witness is not None
    assert verdict.margin < 0
    # strictly decreasing regularized values
    assert all(b < a for a, b in zip(verdict.margins, verdict.margins[1:]))


def test_witness_respects_zero_vertex_value():
    params = ConeParams(2, 1.0)
    f = make_radial_bump([0.0, 1.5], 0.7, 2)  # vanishing vertex value
    verdict = instability_witness_n2(params, (1e-2, 1e-3, 1e-4), f=f,
                                     spec=QuadratureSpec(64, 2, 64, 3.0))
    assert verdict.regime == INCONCLUSIVE


def test_witness_requires_two_dims():
    with pytest.raises(ValueError):
        instability_witness_n2(ConeParams(3, 1.0), (1e-2, 1e-3, 1e-4))


def test_sweep_proved_regime():
    thr = lambda_star(3)
    params = ConeParams(3, 0.5 * thr.lambda_star)
    verdict = stability_sweep(params, standard_battery(3, 8), SPEC3)
    assert verdict.regime == PROVEN_STABLE
    assert verdict.margin > 0
    assert all(m >= -1e-8 for m in verdict.margins)


def test_sweep_finds_witness_far_beyond_threshold():
    thr = lambda_star(3)
    params = ConeParams(3, 1e3 * thr.lambda_star)
    verdict = stability_sweep(params, [make_boundary_bump(1.0, 3)], SPEC3)
    assert verdict.regime == UNSTABLE
    assert verdict.witness is not None
    assert verdict.margin < 0


def test_sweep_empty_battery_inconclusive():
    params = ConeParams(3, 0.05)
    assert stability_sweep(params, [], SPEC3).regime == INCONCLUSIVE


def test_sweep_conservative_slightly_beyond_threshold():
    """Just past the proven regime with well-behaved fields: nothing proven,
    nothing disproven."""
    thr = lambda_star(3)
    params = ConeParams(3, 1.05 * thr.lambda_star)
    verdict = stability_sweep(params, standard_battery(3, 6), SPEC3)
    assert verdict.regime == INCONCLUSIVE


def test_sweep_verdict_invariant_under_field_scaling():
    thr = lambda_star(3)
    battery = standard_battery(3, 4)
    for lam in (0.5 * thr.lambda_star, 1e3 * thr.lambda_star):
        params = ConeParams(3, lam)
        v1 = stability_sweep(params, battery, SPEC3)
        v2 = stability_sweep(params, [scaled(f, 2.0) for f in battery], SPEC3)
        assert v1.regime == v2.regime
        # margins are quadratic in the field
        assert np.allclose(np.asarray(v2.margins), 4.0 * np.asarray(v1.margins),
                           rtol=1e-10, atol=1e-12)


def test_sweep_rejects_two_dims():
    with pytest.raises(ValueError):
        stability_sweep(ConeParams(2, 0.5), [make_boundary_bump(1.0, 2)], SPEC3)
