import numpy as np
import pytest
from hypothesis import settings

from reductive.builtins import BUILTINS, builtin_group

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

_GROUPS = {}


def group(name):
    if name not in _GROUPS:
        _GROUPS[name] = builtin_group(name)
    return _GROUPS[name]


@pytest.fixture(params=sorted(BUILTINS))
def any_group(request):
    return group(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def sl2r_vec(mat):
    """Coordinates of a traceless real 2x2 matrix in the (h, s, rot)/sqrt2 basis."""
    from reductive.builtins import sl2r_vbasis

    return np.array([np.trace(mat @ b.T) for b in sl2r_vbasis()])


def sl2r_mat(v):
    from reductive.builtins import sl2r_vbasis

    return sum(c * b for c, b in zip(v, sl2r_vbasis()))


ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
