import math
import warnings

import numpy as np
import pytest

from conftest import MODELS, reference
from swanson_forge.catalog import (
    ConstraintWarning,
    ModelId,
    bound_state_count,
    case_structure_check,
    closed_levels,
    closed_spectrum,
    instantiate,
    model_def,
    normalizability_rule,
    partner_native,
    structure_eval,
)
from swanson_forge.errors import (
    BeyondBoundStates,
    ConstraintViolated,
    OutOfDomain,
    UnknownModel,
    UnknownParameter,
)
from swanson_forge.params import hermitian_limit, new_couple

C = new_couple(0.05, 0.1)


def test_model_ids_are_stable():
    assert MODELS == ["rosen-morse-1", "rosen-morse-2", "eckart", "scarf-1", "scarf-2",
                      "poschl-teller", "morse", "shifted-oscillator"]
    with pytest.raises(UnknownModel):
        model_def("harmonic")


def test_rosen_morse_2_superpotential():
    spec = instantiate("rosen-morse-2", {"a": 1, "b": 0.5}, C)
    assert (spec.lambda2, spec.delta2) == (1.0, 0.5)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(spec.W(x), np.tanh(x) + 0.5)
    s = structure_eval(spec, np.array([0.0]))
    assert (s.f[0], s.g[0], s.W[0], s.int_W[0]) == (0.0, 1.0, 0.5, 0.0)


def test_structure_values():
    morse = instantiate("morse", {"a": 3, "b": 1}, C)
    assert structure_eval(morse, np.array([0.0])).W[0] == pytest.approx(2.0)
    osc = instantiate("shifted-oscillator", {"a": 2, "b": 0}, new_couple(0.1, 0.3))
    s = structure_eval(osc, np.array([3.0]))
    assert s.W[0] == pytest.approx(3.0)
    assert s.int_W[0] == pytest.approx(4.5)


@pytest.mark.parametrize("model", MODELS)
def test_case_identities_hold(model):
    spec, _ = reference(model)
    assert case_structure_check(spec, spec.sample_points(200)) < 1e-12


@pytest.mark.parametrize("model", MODELS)
def test_integral_of_W_by_quadrature(model):
    from scipy.integrate import quad

    spec, _ = reference(model)
    x0 = spec.domain.reference
    for x in spec.sample_points(7)[1:-1]:
        val, _ = quad(lambda t: float(spec.W(np.array([t]))[0]), x0, x, limit=200)
        got = spec.int_W(np.array([x]))[0] - spec.int_W(np.array([x0]))[0]
        assert got == pytest.approx(val, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("model, params, rule", [
    ("eckart", {"a": 1, "b": 0.5}, "b > a²"),
    ("rosen-morse-2", {"a": 1, "b": 2}, "b < a²"),
    ("morse", {"a": -1, "b": 1}, "a > 0, b > 0"),
])
def test_constraints(model, params, rule):
    with pytest.raises(ConstraintViolated) as err:
        instantiate(model, params, C)
    assert err.value.rule == rule


def test_parameter_names_checked():
    with pytest.raises(UnknownParameter):
        instantiate("morse", {"a": 1, "c": 2}, C)
    with pytest.raises(UnknownParameter):
        instantiate("morse", {"a": 1}, C)


def test_out_of_domain():
    spec, _ = reference("poschl-teller")
    with pytest.raises(OutOfDomain):
        spec.check_inside(np.array([-0.5, 1.0]))


def test_normalizability_rules_and_warning():
    rm2 = instantiate("rosen-morse-2", {"a": 1, "b": 0.5}, new_couple(0.1, 0.05), warn=False)
    assert normalizability_rule(rm2) == ("alpha < beta", False)
    with pytest.warns(ConstraintWarning):
        instantiate("rosen-morse-2", {"a": 1, "b": 0.5}, new_couple(0.1, 0.05))
    lim = instantiate("rosen-morse-1", {"a": 2, "b": 1}, hermitian_limit())
    assert normalizability_rule(lim)[1]
    assert normalizability_rule(instantiate("morse", {"a": 3, "b": 1}, C)) is None


@pytest.mark.parametrize("model, count", [
    ("rosen-morse-2", 1), ("eckart", 1), ("poschl-teller", 2), ("scarf-2", 3), ("morse", 4),
    ("rosen-morse-1", math.inf), ("scarf-1", math.inf), ("shifted-oscillator", math.inf),
])
def test_bound_state_counts(model, count):
    spec, partner = reference(model)
    assert bound_state_count(spec, partner) == count


def test_closed_spectrum_values():
    osc = instantiate("shifted-oscillator", {"a": 2, "b": 0}, new_couple(0.1, 0.3))
    from swanson_forge.riccati import solve_partner

    p = solve_partner(osc)
    assert partner_native(osc, p)[0] == pytest.approx(3.12694, abs=1e-5)
    assert closed_spectrum(osc, p, 1) == pytest.approx(1.46028, abs=1e-5)
    assert closed_spectrum(osc, p, 0) == pytest.approx(-1.66667, abs=1e-5)
    spec, partner = reference("scarf-2")
    assert closed_spectrum(spec, partner, 0) == pytest.approx(4 * 0.98 / 0.7225, abs=1e-12)
    assert closed_spectrum(spec, partner, 0, "plus") == closed_spectrum(spec, partner, 1)


def test_levels_beyond_bound_range():
    spec, partner = reference("rosen-morse-2")
    with pytest.raises(BeyondBoundStates):
        closed_spectrum(spec, partner, 1)
    with pytest.raises(BeyondBoundStates):
        closed_spectrum(spec, partner, 0, "plus")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(closed_levels(spec, partner, 3)) == 1


@pytest.mark.parametrize("model", MODELS)
def test_levels_increase(model):
    spec, partner = reference(model)
    levels = closed_levels(spec, partner, 3)
    assert all(b > a for a, b in zip(levels, levels[1:]))
