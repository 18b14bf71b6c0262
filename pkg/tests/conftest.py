import numpy as np
import pytest

from curl_cotrain import kernels
from curl_cotrain.data_io import SyntheticSpec, generate_synthetic

ACCEPTANCE_RESULTS = {}


def available_backends():
    names = ["python"]
    try:
        kernels.get_backend("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_synthetic():
    """K=3, S=2 views, 20 samples per class; easy enough to train on quickly."""
    return generate_synthetic(
        SyntheticSpec(n_classes=3, n_views=2, dims=(6, 4), samples_per_class=20, spread=2.0, sigma=1.0, seed=7)
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
