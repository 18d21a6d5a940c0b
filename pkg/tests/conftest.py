import numpy as np
import pytest

from hilfspline import _backend, fracint, specfun

BACKENDS = sorted(_backend.available_backends())


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = _backend.available_backends()[request.param]
    monkeypatch.setattr(specfun, "kernels", mod)
    monkeypatch.setattr(fracint, "kernels", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
