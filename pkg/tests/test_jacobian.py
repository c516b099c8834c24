"""Distortion-factor algebra: closed form, wedge norm, Gram oracle, remainder."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conestab.domain import ConeParams, PlanePoint
from conestab.errors import QuadratureError
from conestab.flow import FlowCoefficients, flow_coefficients_batch, partials_from_coefficients
from conestab.jacobian import (jacobian_breakdown, jacobian_closed_form,
                               jacobian_gram_oracle, main_term_batch, remainder,
                               remainder_uniform_bound, wedge_expansion)
from conestab.trial import make_radial_bump, make_tensor_bump, sample_smooth_points

SEED = 20260810


def coeffs(alpha, beta):
    return FlowCoefficients(alpha=np.asarray(alpha, float), beta=np.asarray(beta, float))


def test_closed_form_of_undeformed_plane():
    assert jacobian_closed_form(coeffs([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])) == 1.0


def test_closed_form_of_pure_shear_is_one():
    # constant field: beta = 0 and no axis tilt; a shear has unit Gram det
    for a in ([0.5, -0.3, 0.0], [2.0, 1.0, 0.0]):
        assert jacobian_closed_form(coeffs(a, [0.0, 0.0, 0.0])) == pytest.approx(1.0)


def test_closed_form_tilted_plane_two_dims():
    b = 0.7
    assert jacobian_closed_form(coeffs([0.0, 0.0], [0.0, b])) == pytest.approx(1 + b * b)


def test_gram_oracle_identity_basis():
    assert jacobian_gram_oracle(np.eye(3, 4)) == pytest.approx(1.0)


def test_gram_oracle_single_scaled_vector():
    assert jacobian_gram_oracle(np.array([[2.0, 0.0]])) == pytest.approx(4.0)


def test_gram_oracle_rejects_non_finite():
    with pytest.raises(QuadratureError):
        jacobian_gram_oracle(np.array([[np.inf, 0.0]]))


def test_three_way_agreement_on_random_draws(rng):
    for n in (2, 3, 4, 6):
        draws = rng.uniform(-1, 1, size=(10_000, 2 * n))
        c = coeffs(draws[:, :n], draws[:, n:])
        closed = jacobian_closed_form(c)
        wedge_sq = np.sum(wedge_expansion(c) ** 2, axis=-1)
        gram = jacobian_gram_oracle(partials_from_coefficients(c))
        denom = np.maximum(np.maximum(np.abs(closed), np.abs(gram)), 1e-300)
        # wedge and closed form are regroupings of the same polynomial
        assert np.max(np.abs(closed - wedge_sq) / denom) <= 1e-12
        assert np.max(np.abs(closed - gram) / denom) <= 1e-10


def test_wedge_expansion_of_undeformed_plane():
    w = wedge_expansion(coeffs([0.0] * 4, [0.0] * 4))
    assert np.allclose(w, [1.0, 0.0, 0.0, 0.0, 0.0])


def test_wedge_mixed_coefficient_formula():
    a1, a3 = 0.4, -0.2
    b = np.array([0.3, -0.1, 0.8])
    w = wedge_expansion(coeffs([a1, 0.0, a3], b))
    assert w[0] == pytest.approx(1 + a3)
    assert w[1] == pytest.approx(b[2])
    assert w[2] == pytest.approx(b[2] * a1 - (1 + a3) * b[0])
    assert w[3] == pytest.approx(b[2] * 0.0 - (1 + a3) * b[1])


@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=6, max_size=6))
def test_wedge_norm_equals_closed_form(values):
    c = coeffs(values[:3], values[3:])
    closed = jacobian_closed_form(c)
    wedge_sq = float(np.sum(wedge_expansion(c) ** 2))
    assert wedge_sq == pytest.approx(closed, rel=1e-12, abs=1e-12)


def test_remainder_zero_without_deformation():
    assert remainder(coeffs([0.0, 0.0], [0.0, 0.0])) == 0.0


def test_remainder_identity_against_closed_form(rng):
    draws = rng.uniform(-1, 1, size=(5000, 8))
    c = coeffs(draws[:, :4], draws[:, 4:])
    lhs = jacobian_closed_form(c) - remainder(c)
    rhs = 1.0 + 2.0 * c.alpha[:, -1] + np.sum(c.beta ** 2, axis=-1)
    denom = np.maximum(np.abs(rhs), 1.0)
    assert np.max(np.abs(lhs - rhs) / denom) <= 1e-12


def test_remainder_vanishes_off_the_support(rng):
    params = ConeParams(3, 0.8)
    f = make_radial_bump([0.0, 0.0, 1.0], 0.5, 3)
    # points with f = 0 and grad f = 0 in a neighborhood
    pts = np.array([[1.5, 0.2, 2.0], [0.4, 0.4, 2.5], [2.0, 0.0, 2.2]])
    c = flow_coefficients_batch(params, f, pts, 0.7)
    assert np.all(remainder(c) == 0.0)


def test_remainder_uniform_bound_and_decay(rng):
    params = ConeParams(3, 0.7)
    f = make_tensor_bump([0.0, 0.0, 1.1], 0.6, 3, exponent=2)
    bound = remainder_uniform_bound(params, f)
    pts = sample_smooth_points(params, f, rng, 300)
    sup = []
    for k in range(0, 21):
        t = 2.0 ** (-k)
        r = remainder(flow_coefficients_batch(params, f, pts, t))
        sup.append(np.max(np.abs(r)) / t ** 2)
        assert sup[-1] <= bound
    assert sup[-1] <= 1e-3 * bound


def test_main_term_matches_closed_minus_remainder(rng):
    params = ConeParams(3, 1.0)
    f = make_radial_bump([0.0, 0.0, 1.2], 0.8, 3)
    pts = sample_smooth_points(params, f, rng, 400)
    for t in (0.05, 0.4, 0.9):
        c = flow_coefficients_batch(params, f, pts, t)
        lhs = jacobian_closed_form(c) - remainder(c)
        rhs = main_term_batch(params, f, pts, t)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_positivity_at_genuine_coefficients(rng):
    params = ConeParams(3, 1.3)
    f = make_radial_bump([0.0, 0.0, 1.0], 0.6, 3)
    pts = sample_smooth_points(params, f, rng, 500)
    for t in (0.02, 0.1, 0.5):
        j2 = jacobian_closed_form(flow_coefficients_batch(params, f, pts, t))
        assert np.min(j2) > 0.0


def test_breakdown_consistency_at_a_point():
    params = ConeParams(3, 0.9)
    f = make_radial_bump([0.0, 0.0, 1.2], 0.8, 3)
    b = jacobian_breakdown(params, f, PlanePoint([0.3, 0.2], 1.3), 0.2)
    assert b.j_squared == pytest.approx(b.main_term + b.remainder, rel=1e-12)
    assert b.j_squared == pytest.approx(b.gram_value, rel=1e-10)
    assert b.j_squared > 0
