import numpy as np
import pytest

from ctrw.models import CtrwProcess, Erlang, Exponential, GammaRational, JumpModel

WAITING = {
    "exp": Exponential(1.3),
    "erlang2": Erlang(2, 1.0),
    "erlang3": Erlang(3, 2.0),
    "gamma1/2": GammaRational(1, 2, 1.0),
    "gamma3/2": GammaRational(3, 2, 0.7),
}


@pytest.fixture(params=list(WAITING), ids=list(WAITING))
def waiting(request):
    return WAITING[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def proc(waiting, gamma=1.0, kappa=0.0):
    return CtrwProcess(waiting, JumpModel(gamma, kappa))
