import math

import numpy as np
import pytest
from hypothesis import strategies as st

from ads_helix.ambient import AmbientParams
from ads_helix.helix_gen import SurfaceParams, admissible_family, assemble, classify_case

# (kappa, tau, lambda, nu) covering every sign of B and both causal characters
PARAM_MATRIX = [
    (4.0, 2.0, 1, 1.0),
    (1.0, 3.0, 1, 0.5),
    (4.0, 2.0, -1, 1.5),
    (4.0, 1.0, -1, 2.0),
    (1.0, 3.0, -1, 1.2),
    (4.0, math.sqrt(2.0), 1, 1.0),
    (1.0, math.sqrt(5.0), 1, 0.5),
    (4.0, 0.5, -1, math.sqrt(4.0 / 3.0)),
    (4.0, 1.0, 1, 1.0),
    (4.0, 0.5, 1, 1.0),
    (4.0, 0.5, -1, 2.0),
    (1.0, 0.3, -1, 1.5),
]

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
vec4s = st.tuples(finite, finite, finite, finite).map(np.array)

_SURFACES = {}


def helix_surface(kappa, tau, lam, nu, xi1=0.5):
    """Cached default surface for one parameter set."""
    key = (kappa, tau, lam, nu, xi1)
    if key not in _SURFACES:
        p, s = AmbientParams(kappa, tau), SurfaceParams(lam, nu)
        case = classify_case(p, s)
        fam, sol = admissible_family(case, p, s, xi1=xi1)
        _SURFACES[key] = (assemble(case, p, s, fam), sol)
    return _SURFACES[key]


@pytest.fixture
def bpos_surface():
    return helix_surface(4.0, 2.0, 1, 1.0)[0]


ACCEPTANCE = {}


def report_criterion(number, ok, detail):
    """Record one acceptance line; printed together at the end of the session."""
    ACCEPTANCE[number] = f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
