import math

import numpy as np
import pytest

from ads_helix import surface as srf
from ads_helix.ambient import AmbientParams, berger_metric, frame_E
from ads_helix.errors import DegenerateSurfaceError, DomainError
from ads_helix.helix_gen import Immersion, curve_b_pos

from conftest import PARAM_MATRIX, helix_surface


def _grid(f, n=9):
    return srf.sample_grid(f, n, n)


def hyperbolic_plane(kappa):
    """The slice ``x4 = 0`` of the quadric, a totally geodesic spacelike surface when tau = 1."""
    r = 2.0 / math.sqrt(kappa)

    def F(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return r * np.stack([np.sinh(x) * np.cos(y), np.sinh(x) * np.sin(y), np.cosh(x), 0 * x], -1)

    return Immersion(F, (0.5, 1.5), (0.0, 1.0))


def test_partials_of_constant_map():
    c = np.array([0.0, 0.0, 1.0, 0.0])
    f = Immersion(lambda x, y: np.broadcast_to(c, np.shape(np.broadcast_arrays(x, y)[0]) + (4,)), (0, 1), (0, 1))
    d = srf.partials(f, 0.5, 0.5, order=4)
    for key in ("x", "xx", "xxx", "xxxx", "y"):
        assert np.max(np.abs(d[key])) == 0.0


def test_partials_against_closed_form_curve():
    p = AmbientParams(4.0, 2.0)
    from ads_helix.helix_gen import SurfaceParams

    s = SurfaceParams(1, 1.0)
    c = s.constants(p)
    g = curve_b_pos(p, s)
    f = Immersion(lambda x, y: g(np.broadcast_arrays(x, y)[0]), (-1.0, 1.0), (0.0, 1.0))
    xs = np.linspace(-0.5, 0.5, 11)
    r1, r3 = math.sqrt(c.w11), math.sqrt(-c.w33)
    a1, a2 = c.alpha1, c.alpha2
    exact = np.stack([-r1 * a1 * np.sin(a1 * xs), -r1 * a1 * np.cos(a1 * xs),
                      -r3 * a2 * np.sin(a2 * xs), r3 * a2 * np.cos(a2 * xs)], -1)
    assert np.max(np.abs(srf.partials(f, xs, 0.5)["x"] - exact)) < 1e-7


def test_fourth_derivative_calibration():
    a = 1.7
    got = srf.derivative(np.sin, np.array([0.3, 0.9]), 4)
    assert np.allclose(got, np.sin([0.3, 0.9]), rtol=1e-4)
    f = Immersion(lambda x, y: np.stack([np.sin(a * x) + 0 * y] * 4, -1), (0, 2), (0, 1))
    d = srf.partials(f, 1.0, 0.5, order=4)["xxxx"][0]
    assert abs(d / (a**4 * math.sin(a)) - 1.0) < 1e-4


def test_partials_reject_boundary():
    f = hyperbolic_plane(4.0)
    with pytest.raises(DomainError):
        srf.partials(f, 0.5, 0.5, order=4)
    with pytest.raises(ValueError):
        srf.partials(f, 1.0, 0.5, order=5)


@pytest.mark.parametrize("prm", PARAM_MATRIX, ids=str)
def test_normal_and_causal_character(prm):
    f, _ = helix_surface(*prm)
    p, lam, nu = f.ambient, f.surf.lam, f.surf.nu
    X, Y = _grid(f)
    N, got = srf.unit_normal(p, f, X, Y, nu)
    assert np.all(got == lam)
    q = f(X, Y)
    fx = srf.partials(f, X, Y)["x"]
    assert np.max(np.abs(berger_metric(p, q, N, fx, check=False))) < 1e-9 * max(1.0, np.max(np.abs(fx)))
    assert np.max(np.abs(berger_metric(p, q, N, N, check=False) - lam)) < 1e-9
    assert np.max(np.abs(srf.angle_function(p, f, X, Y, nu) - nu)) < 1e-7


def test_orientation_flips_normal(bpos_surface):
    f = bpos_surface
    p = f.ambient
    X, Y = _grid(f, 5)
    up = srf.angle_function(p, f, X, Y, 1.0)
    down = srf.angle_function(p, f, X, Y, -1.0)
    assert np.allclose(up, -down)
    assert np.all(up > 0)


@pytest.mark.parametrize("prm", PARAM_MATRIX[::3], ids=str)
def test_tangent_decomposition(prm):
    f, _ = helix_surface(*prm)
    p, lam, nu = f.ambient, f.surf.lam, f.surf.nu
    X, Y = _grid(f)
    td = srf.tangent_decomposition(p, f, X, Y, nu)
    q = f(X, Y)

    def g(u, v):
        return berger_metric(p, q, u, v, check=False)

    assert np.max(np.abs(g(td.T, td.T) + (1 + lam * nu**2))) < 1e-7
    assert np.max(np.abs(g(td.JT, td.JT) - (lam + nu**2))) < 1e-7
    assert np.max(np.abs(g(td.T, td.JT))) < 1e-7
    assert np.max(np.abs(td.T + nu * td.N - frame_E(p, 1, q, check=False))) < 1e-9
    # JT stays tangent and J(JT) = lambda T
    assert np.max(np.abs(g(td.JT, td.N))) < 1e-9
    from ads_helix.ambient import wedge

    jjt = wedge(td.N_frame, td.JT_frame)
    assert np.max(np.abs(jjt - lam * td.T_frame)) < 1e-9


def test_shape_operator_bpos(bpos_surface):
    f = bpos_surface
    p = f.ambient
    X, Y = _grid(f)
    m = srf.shape_operator(p, f, X, Y, 1.0)
    c = 0.5 * p.sqrt_kappa * p.tau
    assert np.max(np.abs(m[..., 0, 0])) < 1e-5
    assert np.max(np.abs(m[..., 0, 1] + c)) < 1e-5
    assert np.max(np.abs(m[..., 1, 0] - c)) < 1e-5


@pytest.mark.parametrize("prm", PARAM_MATRIX, ids=str)
def test_shape_operator_self_adjoint(prm):
    f, _ = helix_surface(*prm)
    p, nu = f.ambient, f.surf.nu
    X, Y = _grid(f, 7)
    sd = srf._shape(p, f, X, Y, nu)
    from ads_helix.ambient import frame_inner

    asym = frame_inner(sd.AT, sd.JT) - frame_inner(sd.AJT, sd.T)
    assert np.max(np.abs(asym)) < 1e-4


def test_totally_geodesic_slice():
    p = AmbientParams(4.0, 1.0)
    f = hyperbolic_plane(4.0)
    X, Y = _grid(f, 7)
    assert np.all(srf.unit_normal(p, f, X, Y)[1] == -1)
    assert np.max(np.abs(srf.shape_operator(p, f, X, Y))) < 1e-5
    # totally geodesic, so K is the ambient sectional curvature -kappa/4
    assert np.max(np.abs(srf.gauss_curvature(p, f, X, Y) + 1.0)) < 1e-5


@pytest.mark.parametrize("prm", PARAM_MATRIX, ids=str)
def test_gauss_curvature(prm):
    f, _ = helix_surface(*prm)
    p, lam, nu = f.ambient, f.surf.lam, f.surf.nu
    X, Y = _grid(f)
    K = srf.gauss_curvature(p, f, X, Y, nu)
    expect = lam * p.kappa * nu**2 * (1 - p.tau**2)
    assert np.max(np.abs(K - expect)) < (1e-5 if p.tau == 1.0 else 1e-4)


def test_gauss_curvature_example(bpos_surface):
    X, Y = _grid(bpos_surface)
    K = srf.gauss_curvature(bpos_surface.ambient, bpos_surface, X, Y, 1.0)
    assert np.max(np.abs(K + 12.0)) < 1e-4


@pytest.mark.parametrize("prm", PARAM_MATRIX, ids=str)
def test_phase_slope(prm):
    f, _ = helix_surface(*prm)
    p, s = f.ambient, f.surf
    X, Y = srf.sample_grid(f, 17, 5)
    _, phi = srf.extract_mu_phi(p, f, X, Y, s.nu)
    assert np.all(phi > -np.pi) and np.all(phi <= np.pi)
    slope = np.diff(srf.unwrap_x(phi), axis=0) / np.diff(X, axis=0)
    expect = -p.sqrt_kappa * s.B(p) / (s.lam * p.tau) if f.case.value != "BZero" else 0.0
    assert np.max(np.abs(slope - expect)) < 1e-4


def test_star_equation(bpos_surface):
    f = bpos_surface
    X, Y = srf.sample_grid(f, 5, 5, inset=4 * srf.OUTER_STEP)
    assert np.max(np.abs(srf.star_residual(f.ambient, f, X, Y, 1.0))) < 1e-3
    assert np.max(srf.codazzi_residual(f.ambient, f, X, Y, 1.0)) < 1e-3


def test_degenerate_immersion_rejected():
    p = AmbientParams(4.0, 1.0)
    line = Immersion(lambda x, y: hyperbolic_plane(4.0)(x, 0.0 * y), (0.5, 1.5), (0.0, 1.0))
    X, Y = _grid(line, 5)
    with pytest.raises(DegenerateSurfaceError):
        srf.unit_normal(p, line, X, Y)


def test_sample_grid_inset():
    f = hyperbolic_plane(4.0)
    X, Y = srf.sample_grid(f, 5, 5, margin=0, inset=0.2)
    assert X.min() == pytest.approx(0.7)
    with pytest.raises(DomainError):
        srf.sample_grid(f, 5, 5, inset=0.6)
