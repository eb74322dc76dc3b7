import time
from types import SimpleNamespace

import pytest

from losmimo.orientation import default_curve


@pytest.fixture(scope="session")
def curve_info():
    """The standard worst-case correlation curve plus its build time."""
    t0 = time.monotonic()
    c = default_curve()
    return SimpleNamespace(curve=c, build_seconds=time.monotonic() - t0)


@pytest.fixture(scope="session")
def curve(curve_info):
    return curve_info.curve
