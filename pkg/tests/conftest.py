import math

import numpy as np
import pytest

from squidqkd import protocol
from squidqkd.device import EffectiveParams

N_LARGE = 100_000


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def eff100():
    """Canonical operating point: Omega/nu = 100."""
    return EffectiveParams.from_rates(Omega=100.0, nu=1.0, mu=1e5)


def _dataset(eff, kind, eta, centre, n, seed):
    src = protocol.SourceConfig(V_A=1.0, phi_0=centre, v_0=centre, n_trials=n)
    spec = protocol.ProtocolSpec(src, protocol.ChannelConfig(eta),
                                 protocol.MeasurementScheme(protocol.SchemeKind(kind)),
                                 eff, seed=seed)
    return protocol.run_protocol(spec)


class DatasetCache:
    """Large Monte-Carlo runs shared by several test modules."""

    def __init__(self, eff):
        self.eff = eff
        self._store = {}

    def get(self, kind: str, eta: float, n: int = N_LARGE, seed: int = 2024):
        key = (kind, eta, n, seed)
        if key not in self._store:
            centre = 4.0 if kind == "time-stamped" else 0.0
            self._store[key] = _dataset(self.eff, kind, eta, centre, n, seed)
        return self._store[key]


@pytest.fixture(scope="session")
def datasets(eff100):
    return DatasetCache(eff100)


def gauss_pairs(n, signal, noise, rng, centre=0.0):
    a = rng.normal(centre, math.sqrt(signal), n)
    return np.column_stack([a, a + rng.normal(0.0, math.sqrt(noise), n)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
