import math
import sys

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from uhlmann.models import qwz_field, sticlet_field

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

momenta = st.floats(0.0, 2 * math.pi, allow_nan=False)
wide_momenta = st.floats(-50.0, 50.0, allow_nan=False)
betas = st.floats(0.05, 20.0)


def _gapped(lo, hi, avoid):
    return st.floats(lo, hi).filter(lambda x: min(abs(x - a) for a in avoid) > 0.05)


qwz_u = _gapped(-3.5, 3.5, (-2.0, 0.0, 2.0))
sticlet_t2 = _gapped(-3.5, 3.5, (-2.0, 0.0, 2.0))


@st.composite
def fields(draw):
    if draw(st.booleans()):
        return qwz_field(draw(qwz_u))
    return sticlet_field(draw(sticlet_t2))


@pytest.fixture(params=["qwz", "sticlet"])
def model_field(request):
    return qwz_field(-1.5) if request.param == "qwz" else sticlet_field(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
