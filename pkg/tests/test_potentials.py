import numpy as np
import pytest

from conftest import MODELS, reference
from swanson_forge.catalog import ground_constant, instantiate, partner_native
from swanson_forge.params import hermitian_limit, new_couple
from swanson_forge.potentials import (
    convention_offset,
    potential_pair,
    susy_superpotential,
    printed_pair_audit,
    v_swanson_frame,
    v_pair,
)
from swanson_forge.riccati import solve_partner

OSC = instantiate("shifted-oscillator", {"a": 2, "b": 0}, new_couple(0.1, 0.3))
X0 = np.array([0.0])


def test_swanson_frame_potential_values():
    assert v_swanson_frame(OSC, X0)[0] == pytest.approx(-1 / 0.6, abs=1e-12)
    rm2, _ = reference("rosen-morse-2")
    assert v_swanson_frame(rm2, X0)[0] == pytest.approx(-0.83737, abs=1e-5)


@pytest.mark.parametrize("model", MODELS)
def test_hermitian_limit_potential_is_textbook(model):
    spec, _ = reference(model)
    lim = spec.with_couple(hermitian_limit())
    x = lim.sample_points(50)
    assert np.allclose(v_swanson_frame(lim, x), lim.W(x) ** 2 - lim.Wp(x), rtol=1e-13, atol=1e-12)


def test_oscillator_pair_values():
    p = solve_partner(OSC)
    vm, vp = v_pair(OSC, p, X0)
    assert vm[0] == pytest.approx(-3.23014, abs=1e-5)
    assert vp[0] == pytest.approx(-0.10319, abs=1e-5)


@pytest.mark.parametrize("model", MODELS)
def test_pair_against_superpotential_oracle(model):
    spec, partner = reference(model)
    x = spec.sample_points(100)
    w, wp = partner.w(spec, x), partner.wp(spec, x)
    c = ground_constant(spec, partner)
    vm, vp = v_pair(spec, partner, x)
    scale = 1 + np.abs(vm) + np.abs(vp)
    assert np.max(np.abs(vm - (w * w - wp + c)) / scale) < 1e-12
    assert np.max(np.abs(vp - (w * w + wp + c)) / scale) < 1e-12
    assert np.max(np.abs(vp - vm - 2 * wp) / scale) < 1e-12


@pytest.mark.parametrize("model", ["rosen-morse-1", "rosen-morse-2", "eckart"])
def test_first_case_has_no_convention_offset(model):
    spec, partner = reference(model)
    assert convention_offset(spec, partner) == pytest.approx(0.0, abs=1e-10)


def test_convention_offsets():
    p = solve_partner(OSC)
    assert convention_offset(OSC, p) == pytest.approx(-partner_native(OSC, p)[0] / 2, abs=1e-12)
    assert convention_offset(OSC, p) == pytest.approx(-1.56347, abs=1e-5)
    spec, partner = reference("scarf-2")
    assert convention_offset(spec, partner) == pytest.approx(partner.lambda1**2, abs=1e-12)


def test_superpotential_values():
    spec, partner = reference("rosen-morse-2")
    w, _ = susy_superpotential(partner, spec, X0)
    assert w[0] == pytest.approx(0.58055, abs=1e-5)
    spec, partner = reference("morse")
    w, _ = susy_superpotential(partner, spec, np.array([40.0]))
    assert w[0] == pytest.approx(3.49901, abs=1e-4)
    lim = spec.with_couple(hermitian_limit())
    x = lim.sample_points(20)
    w, _ = susy_superpotential(solve_partner(lim), lim, x)
    assert np.allclose(w, lim.W(x), atol=1e-13)


@pytest.mark.parametrize("model", MODELS)
def test_swanson_side_equals_canonical_minus(model):
    spec, partner = reference(model)
    pair = potential_pair(spec, partner)
    x = spec.sample_points(60)
    assert np.allclose(pair.v_minus_swanson(x), pair.v_minus(x), rtol=1e-11, atol=1e-10)


@pytest.mark.parametrize("model, consistent", [
    ("rosen-morse-1", True), ("rosen-morse-2", False), ("eckart", True), ("scarf-1", True),
    ("scarf-2", True), ("poschl-teller", False), ("morse", True), ("shifted-oscillator", True),
])
def test_printed_potential_rows(model, consistent):
    spec, partner = reference(model)
    audit = printed_pair_audit(spec, partner)
    assert (audit["minus"]["consistent"] and audit["plus"]["consistent"]) is consistent
