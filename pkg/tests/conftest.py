import numpy as np
import pytest

from expdelay import HistoryState


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def smooth_dde_state(tau=1.0, h=0.25):
    """Smooth nontrivial DDE history for stepping tests."""
    return HistoryState.from_callable(
        lambda th: np.exp(th) * np.cos(2.0 * th) + 0.3, "dde", 1, tau, h
    )


def smooth_re_state(tau=2.0, h=0.25):
    return HistoryState.from_callable(
        lambda th: np.sin(1.3 * th) + 0.7, "re", 1, tau, h
    )


@pytest.fixture
def dde_state():
    return smooth_dde_state()


@pytest.fixture
def re_state():
    return smooth_re_state()
