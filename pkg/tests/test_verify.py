import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import MODELS, reference, reference_config, reference_report
from swanson_forge import eigenfunctions as ef
from swanson_forge import numerics as nm
from swanson_forge import verify
from swanson_forge.catalog import instantiate
from swanson_forge.config import RunConfig
from swanson_forge.errors import EqualParameters, SwansonError
from swanson_forge.params import hermitian_limit
from swanson_forge.potentials import potential_pair
from swanson_forge.riccati import solve_partner


@given(st.floats(0, 10, allow_nan=False), st.floats(0, 10))
def test_check_result_pass_rule(metric, tol):
    c = verify.CheckResult("x", metric, tol)
    assert c.passed == (c.metric <= tol) and c.metric >= 0


def test_nan_metric_fails():
    assert not verify.CheckResult("x", math.nan, 1.0).passed
    assert verify.CheckResult("x", -2.0, 3.0).metric == 2.0


def test_spectrum_check_rosen_morse_2():
    spec, partner = reference("rosen-morse-2")
    res = verify.check_spectrum(spec, partner, nmax=1, N=2000)
    assert res.passed
    assert res.details["levels"][0]["closed"] == pytest.approx(-0.00622, abs=1e-5)
    assert len(res.details["levels"]) == 1


def test_spectrum_check_oscillator():
    spec, partner = reference("shifted-oscillator")
    res = verify.check_spectrum(spec, partner, nmax=4, N=2000)
    assert res.passed and res.metric <= 5e-3
    for row in res.details["levels"]:
        assert row["closed"] == pytest.approx(3.12694 * row["n"] - 1.66667, abs=5e-5)


def test_spectrum_check_hermitian_limit_oscillator():
    spec = instantiate("shifted-oscillator", {"a": 2, "b": 0}, hermitian_limit())
    res = verify.check_spectrum(spec, solve_partner(spec), nmax=3, N=2000)
    assert res.passed
    assert [r["closed"] for r in res.details["levels"]] == pytest.approx([-1, 1, 3, 5])


def limit_oscillator_grid(N=1000):
    spec = instantiate("shifted-oscillator", {"a": 2, "b": 0.5}, hermitian_limit())
    partner = solve_partner(spec)
    return spec, partner, nm.build_grid(spec, N, (-10, 10))


def test_identity_metrics_converge_in_hermitian_limit():
    spec, partner, grid = limit_oscillator_grid()
    pair = potential_pair(spec, partner)
    coarse = verify.identity_metrics(spec, partner, pair, grid)
    fine = verify.identity_metrics(spec, partner, pair, grid.refined())
    for key in coarse:
        assert coarse[key] < 1e-3
        assert coarse[key] / fine[key] > 3.5


def test_pseudo_hermiticity_trivial_in_hermitian_limit():
    spec, partner, grid = limit_oscillator_grid()
    m = verify.pseudo_metrics(spec, partner, potential_pair(spec, partner), grid)
    assert m["pseudo_hermitian_minus"] < 1e-14
    assert m["pseudo_hermitian_plus"] < 1e-14


def test_superalgebra_structure_is_exact():
    spec, partner = reference("scarf-1")
    grid = nm.build_grid(spec, 300)
    m = verify.superalgebra_blocks(spec, partner, grid)
    assert m["QQ"] == 0 and m["QsQs"] == 0
    assert m["anticommutator_block_form"] < 1e-14


def test_perturbed_partner_breaks_intertwining():
    spec, partner = reference("shifted-oscillator")
    pair = potential_pair(spec, partner)
    grid = nm.build_grid(spec, 1000, (-8, 8))
    res = verify.check_factorization_and_intertwining(spec, partner.perturbed(0.1), grid, pair=pair)
    assert not res.passed
    assert res.details["metrics"]["intertwining"] > 1e-3


def test_as_printed_reading_fails_with_linear_term():
    spec, partner = reference("shifted-oscillator")
    pair = potential_pair(spec, partner)
    grid = nm.build_grid(spec, 2000, (-8, 8))
    good = verify.wavefunction_metrics(spec, partner, pair, grid, 2)
    bad = verify.wavefunction_metrics(spec, partner, pair, grid, 2, ef.AS_PRINTED)
    assert max(good.values()) < 1e-3
    assert max(bad.values()) > 1e-2


def test_wavefunction_check_rosen_morse_2():
    report = reference_report("rosen-morse-2")
    assert report.check("wavefunctions").passed


def test_single_check_report():
    report = verify.run_all(reference_config("morse", checks=["spectrum"]))
    assert [c.name for c in report.checks] == ["spectrum"]


def test_invalid_couple_raises_before_checks():
    with pytest.raises(EqualParameters):
        verify.run_all(RunConfig(model="morse", params={"a": 3, "b": 1}, alpha=0.2, beta=0.2))


def test_constraint_violation_surfaces_in_report():
    report = verify.run_all(RunConfig(model="eckart", params={"a": 1, "b": 0.5}, alpha=0.05, beta=0.1,
                                      checks=["riccati", "spectrum"]))
    assert not report.passed
    assert report.input_error["error"] == "ConstraintViolated"
    assert report.input_error["rule"] == "b > a²"
    assert all(c.details["error"] == "ConstraintViolated" for c in report.checks)


def test_check_errors_become_failed_results(monkeypatch):
    def boom(*args, **kwargs):
        raise SwansonError("synthetic")

    monkeypatch.setattr(verify, "check_riccati", boom)
    report = verify.run_all(reference_config("scarf-1", checks=["riccati", "superalgebra"]))
    assert not report.check("riccati").passed
    assert report.check("riccati").details["message"] == "synthetic"
    assert report.check("superalgebra").passed


def strip_timestamp(report):
    d = report.to_dict()
    d.pop("timestamp")
    return json.dumps(d, sort_keys=True, default=str)


def test_report_is_deterministic_and_thread_independent(monkeypatch):
    cfg = reference_config("scarf-2", checks=["spectrum", "operators", "wavefunctions", "nonhermitian"])
    a = verify.run_all(cfg)
    monkeypatch.setenv("SWANSON_FORGE_THREADS", "1")
    b = verify.run_all(cfg)
    assert strip_timestamp(a) == strip_timestamp(b)


@pytest.mark.parametrize("model", MODELS)
def test_reference_reports_pass(model):
    report = reference_report(model)
    failed = [(c.name, c.metric, c.details.get("message")) for c in report.checks if not c.passed]
    assert not failed
    assert [c.name for c in report.checks] == list(verify.CHECK_NAMES)
    spec, partner = reference(model)
    assert report.derived["mu"] == spec.couple.mu
    assert (report.derived["lambda1"], report.derived["delta1"]) == (partner.lambda1, partner.delta1)
    assert {"r", "factorization_offset", "convention_offset"} <= set(report.derived)


def test_findings_never_affect_pass():
    report = reference_report("morse")
    assert report.passed
    assert any(f["flagged"] for f in report.findings)


def test_user_window_is_honoured():
    cfg = reference_config("shifted-oscillator", window=(-9.0, 9.0), checks=["spectrum", "operators"])
    report = verify.run_all(cfg)
    assert report.check("spectrum").details["window"] == [-9.0, 9.0]
    assert report.check("operators").details["window"] == [-9.0, 9.0]
    assert report.passed


def test_gauge_guard_shrinks_window():
    spec, _ = reference("morse")
    lo, hi = verify._shrink_for_gauge(spec, (-40.0, 20.0))
    assert lo > -40.0 and hi == 20.0
    x = np.linspace(lo, hi, 101)
    assert np.max(np.abs(ef.log_gauge(spec, x))) <= ef.GAUGE_GUARD


def test_grid_size_override():
    report = verify.run_all(reference_config("scarf-1", grid_n=600, checks=["spectrum", "nonhermitian"]))
    assert report.check("spectrum").details["N"] == 600
    assert report.check("nonhermitian").details["N"] == 300
    assert report.passed
