import functools

import pytest

from swanson_forge.catalog import REFERENCE_CONFIGS, ModelId, reference_spec
from swanson_forge.config import RunConfig
from swanson_forge.riccati import solve_partner
from swanson_forge.verify import run_all

MODELS = [m.value for m in ModelId]


@functools.lru_cache(maxsize=None)
def reference(model: str):
    spec = reference_spec(model)
    return spec, solve_partner(spec)


def reference_config(model: str, **overrides) -> RunConfig:
    params, alpha, beta = REFERENCE_CONFIGS[ModelId(model)]
    return RunConfig(model=model, params=params, alpha=alpha, beta=beta, **overrides)


@functools.lru_cache(maxsize=None)
def reference_report(model: str):
    return run_all(reference_config(model), timestamp="fixed")


@pytest.fixture(params=MODELS)
def model(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
