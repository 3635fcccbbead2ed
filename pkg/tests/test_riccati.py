import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import least_squares

from conftest import MODELS, reference
from swanson_forge.catalog import REFERENCE_CONFIGS, ModelId, instantiate, partner_native
from swanson_forge.errors import NoRealRoot
from swanson_forge.params import hermitian_limit, new_couple
from swanson_forge.riccati import (
    matching_residuals,
    printed_case3_partner,
    riccati_residual_profile,
    solve_partner,
)


def brute_force_partner(spec, start):
    """Fit (lambda1, delta1) making the Riccati residual flat, by least squares."""
    xs = spec.sample_points(200)
    r, s = spec.couple.r, spec.couple.s
    target = r * spec.W(xs) ** 2 - spec.Wp(xs) / s

    def flatness(p):
        w = p[0] * spec.f(xs) + p[1] * spec.g(xs)
        wp = p[0] * spec.fp(xs) + p[1] * spec.gp(xs)
        res = w * w - wp - target
        return res - res.mean()

    return least_squares(flatness, start, xtol=1e-15, ftol=1e-15, gtol=1e-15).x


@pytest.mark.parametrize("model", MODELS)
def test_solution_matches_least_squares_oracle(model):
    spec, partner = reference(model)
    fit = brute_force_partner(spec, [1.05 * spec.lambda2, 1.05 * spec.delta2 + 0.01])
    assert fit == pytest.approx([partner.lambda1, partner.delta1], abs=1e-7)


@pytest.mark.parametrize("model", MODELS)
def test_hermitian_limit_returns_base_parameters(model):
    params, _, _ = REFERENCE_CONFIGS[ModelId(model)]
    spec = instantiate(model, params, hermitian_limit())
    partner = solve_partner(spec)
    assert partner.lambda1 == pytest.approx(spec.lambda2, abs=1e-12)
    assert partner.delta1 == pytest.approx(spec.delta2, abs=1e-12)
    assert partner.factorization_offset == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model", MODELS)
def test_limit_continuity(model):
    params, _, _ = REFERENCE_CONFIGS[ModelId(model)]
    spec = instantiate(model, params, new_couple(1e-8, 2e-8), warn=False)
    partner = solve_partner(spec)
    assert partner.lambda1 == pytest.approx(spec.lambda2, abs=1e-6)
    assert partner.delta1 == pytest.approx(spec.delta2, abs=1e-6)


@pytest.mark.parametrize("model", MODELS)
def test_matching_equations_vanish(model):
    spec, partner = reference(model)
    assert max(abs(v) for v in matching_residuals(spec, partner).values()) < 1e-10


def test_golden_rosen_morse_2():
    spec, partner = reference("rosen-morse-2")
    # root of l^2 + l - 2.53287 = 0
    assert partner.lambda1 == pytest.approx((-1 + math.sqrt(1 + 4 * 2.53287)) / 2, abs=1e-5)
    assert partner.lambda1 == pytest.approx(1.16819, abs=1e-5)
    assert partner.delta1 == pytest.approx(0.58055, abs=1e-5)
    assert partner_native(spec, partner)[1] == pytest.approx(0.5 * spec.couple.r, abs=1e-12)


def test_golden_scarf_2():
    spec, partner = reference("scarf-2")
    assert partner.lambda1 == pytest.approx(2.333, abs=5e-3)
    assert partner.delta1 == pytest.approx(1.165, abs=5e-3)
    assert partner.delta1 * (2 * partner.lambda1 + 1) == pytest.approx(6.60207, abs=1e-5)


def test_golden_oscillator_and_offset():
    spec = instantiate("shifted-oscillator", {"a": 2, "b": 0}, new_couple(0.1, 0.3))
    partner = solve_partner(spec)
    a1 = partner_native(spec, partner)[0]
    assert a1 == pytest.approx(3.12694, abs=1e-5)
    assert a1 == pytest.approx(2 * math.sqrt(spec.couple.r), abs=1e-14)
    assert partner.factorization_offset == pytest.approx(-a1 / 2 + 2 / (2 * 0.6), abs=1e-12)
    assert partner.factorization_offset == pytest.approx(0.10319, abs=1e-5)


def test_golden_morse():
    spec, partner = reference("morse")
    a1, b1 = partner_native(spec, partner)
    assert b1 == pytest.approx(1.16465, abs=1e-5)
    assert a1 == pytest.approx(3.49901, abs=1e-4)
    assert b1 == pytest.approx(math.sqrt(spec.couple.r), abs=1e-14)


def test_printed_morse_partner_breaks_constancy():
    spec, partner = reference("morse")
    printed = printed_case3_partner(spec)
    assert partner_native(spec, printed)[0] == pytest.approx(3.6772, abs=2e-4)
    _, std, _ = riccati_residual_profile(spec, printed, spec.sample_points(200))
    assert std > 1e-3
    with pytest.raises(ValueError):
        printed_case3_partner(reference("scarf-2")[0])


def test_oscillator_hermitian_limit_profile_is_flat_zero():
    spec = instantiate("shifted-oscillator", {"a": 2, "b": 0}, hermitian_limit())
    mean, std, _ = riccati_residual_profile(spec, solve_partner(spec), spec.sample_points(200))
    assert abs(mean) < 1e-14 and std < 1e-14


small = st.floats(-0.2, 0.2)


def solve_or_skip(spec):
    """Some couples leave the Eckart partner equation without a real root."""
    try:
        return solve_partner(spec)
    except NoRealRoot:
        assume(False)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(MODELS), small, small)
def test_residual_is_constant_for_random_couples(model, alpha, beta):
    if abs(alpha - beta) < 1e-4:
        return
    params, _, _ = REFERENCE_CONFIGS[ModelId(model)]
    spec = instantiate(model, params, new_couple(alpha, beta), warn=False)
    partner = solve_or_skip(spec)
    assert partner.residual_stddev <= 1e-9
    assert max(abs(v) for v in matching_residuals(spec, partner).values()) < 1e-9 * max(1.0, spec.couple.r * 10)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(MODELS), small, small)
def test_swapping_alpha_beta_keeps_partner(model, alpha, beta):
    # the matching equations involve only r and s, both symmetric in (alpha, beta)
    if abs(alpha - beta) < 1e-4:
        return
    params, _, _ = REFERENCE_CONFIGS[ModelId(model)]
    a = solve_or_skip(instantiate(model, params, new_couple(alpha, beta), warn=False))
    b = solve_partner(instantiate(model, params, new_couple(beta, alpha), warn=False))
    assert (a.lambda1, a.delta1) == pytest.approx((b.lambda1, b.delta1), rel=1e-12, abs=1e-12)
