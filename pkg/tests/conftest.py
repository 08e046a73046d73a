import numpy as np
import pytest

from mixedadc import backend
from mixedadc.channel import LargeScaleMatrix
from mixedadc.closed_form import SystemConfig


def random_instance(rng, m_range=(4, 16), k_range=(2, 4), m_full=None, spread=1.0):
    """Random ``beta`` with log-normal spread and a random F/L split."""
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    k = int(rng.integers(k_range[0], k_range[1] + 1))
    mf = int(rng.integers(0, m + 1)) if m_full is None else m_full
    beta = np.exp(spread * rng.standard_normal((m, k)))
    return LargeScaleMatrix(beta, mf)


def config_for(beta, rho=10.0, alpha=0.8825, **kw):
    return SystemConfig.for_beta(beta, rho, alpha, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=sorted(backend.AVAILABLE))
def backend_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
