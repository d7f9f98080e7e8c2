import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ads_helix import helix_gen as hg
from ads_helix.ambient import AmbientParams, berger_metric, membership_residual
from ads_helix.errors import ConstraintSingularityError, DegenerateSurfaceError, HopfTubeError, ParameterError
from ads_helix.helix_gen import Case, Profile, SurfaceParams
from ads_helix.paraquaternion import EPSILON, J1, inner
from ads_helix.surface import derivative

from conftest import PARAM_MATRIX, helix_surface


def speed2(p, curve, xs):
    q, v = curve(xs), derivative(curve, xs, 1)
    return inner(v, v), berger_metric(p, q, v, v, check=False)


def test_surface_params_rejected():
    with pytest.raises(ParameterError):
        SurfaceParams(-1, 0.5)
    with pytest.raises(ParameterError):
        SurfaceParams(0, 1.0)
    with pytest.raises(ParameterError):
        SurfaceParams(1, 0.0)


@pytest.mark.parametrize("tau, case", [(2.0, Case.BPos), (math.sqrt(2.0), Case.BZero), (1.0, Case.BNeg)])
def test_classification(tau, case):
    p, s = AmbientParams(4.0, tau), SurfaceParams(1, 1.0)
    assert hg.classify_case(p, s) is case
    if case is Case.BPos:
        assert s.B(p) == 2.0


def test_constants_bpos():
    c = SurfaceParams(1, 1.0).constants(AmbientParams(4.0, 2.0))
    assert c.B == 2.0
    assert c.d == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-14)
    assert c.w11 == pytest.approx(1.0 / (c.d**2 - 1.0), rel=1e-12)
    assert c.w33 == pytest.approx(-4.0 * 2.0 / (8.0 * 2.0) * c.alpha1, rel=1e-14)
    assert c.alpha1 - c.alpha2 == pytest.approx(math.sqrt(4.0) * c.B / 2.0, rel=1e-14)


@settings(max_examples=100)
@given(st.sampled_from([1, -1]), st.floats(1.05, 4.0), st.floats(0.1, 4.0), st.floats(0.25, 9.0))
def test_w11_two_routes(lam, nu, tau, kappa):
    p, s = AmbientParams(kappa, tau), SurfaceParams(lam, nu)
    c = s.constants(p)
    if c.case is not Case.BPos or c.B < 1e-6:
        return
    assert c.d > 1.0
    assert abs(c.w11 - (4.0 / kappa) / (c.d**2 - 1.0)) <= 1e-10 * max(1.0, abs(c.w11))


@pytest.mark.parametrize("prm", [m for m in PARAM_MATRIX if m[1] ** 2 * m[3] ** 2 - m[3] ** 2 - m[2] > 1e-9], ids=str)
def test_curve_b_pos(prm):
    k, t, lam, nu = prm
    p, s = AmbientParams(k, t), SurfaceParams(lam, nu)
    c = s.constants(p)
    g = hg.curve_b_pos(p, s)
    xs = np.linspace(-3.0, 3.0, 100)
    assert np.max(membership_residual(p, g(xs))) < 1e-12
    flat, bent = speed2(p, g, xs)
    assert np.max(np.abs(flat - 4.0 / k * c.alpha1 * c.alpha2)) < 1e-8
    assert np.max(np.abs(bent + lam * (lam + nu**2))) < 1e-8


def test_arclength_curve():
    p, s = AmbientParams(4.0, 2.0), SurfaceParams(1, 1.0)
    c = s.constants(p)
    ga = hg.curve_b_pos_arclength(p, s)
    ss = np.linspace(-2.0, 2.0, 50)
    assert np.max(np.abs(speed2(p, ga, ss)[0] - 1.0)) < 1e-9
    xs = np.linspace(-1.0, 1.0, 50)
    r = math.sqrt(4.0 / p.kappa * c.alpha1 * c.alpha2)
    assert np.max(np.abs(hg.curve_b_pos(p, s)(xs) - ga(xs * r))) < 1e-12


def test_curve_b_zero():
    p, s = AmbientParams(4.0, math.sqrt(2.0)), SurfaceParams(1, 1.0)
    g = hg.curve_b_zero(p, s)
    xs = np.linspace(-2.0, 2.0, 41)
    assert np.max(membership_residual(p, g(xs))) < 1e-12
    assert np.all(g(xs)[:, 1] == 0.0)
    assert np.max(np.abs(speed2(p, g, xs)[1] + 2.0)) < 1e-8


def test_curve_b_neg():
    p, s = AmbientParams(4.0, 1.0), SurfaceParams(1, 1.0)
    c = s.constants(p)
    assert (c.alpha, c.beta) == (1.0, 1.0)
    g = hg.curve_b_neg(p, s)
    xs = np.linspace(-2.0, 2.0, 41)
    assert np.max(membership_residual(p, g(xs))) < 1e-9
    assert np.max(np.abs(speed2(p, g, xs)[1] + 2.0)) < 1e-7


def test_curve_requires_matching_case():
    with pytest.raises(ParameterError):
        hg.curve_b_pos(AmbientParams(4.0, 1.0), SurfaceParams(1, 1.0))


def _project(F, xs, basis):
    """Least-squares coefficients ``w^i`` of ``F(x) = sum_i basis_i(x) w^i``."""
    M = np.stack(basis, -1)
    W, *_ = np.linalg.lstsq(M, F, rcond=None)
    return W


def _table(W):
    return np.array([[inner(a, b) for b in W] for a in W])


@pytest.mark.parametrize("prm", [PARAM_MATRIX[0], PARAM_MATRIX[2], PARAM_MATRIX[4]], ids=str)
def test_inner_products_bpos(prm):
    f, _ = helix_surface(*prm)
    c = f.constants
    xs = np.linspace(*f.x_domain, 64)
    a1, a2 = c.alpha1, c.alpha2
    for y in (0.2, 0.7):
        W = _project(f(xs, y), xs, [np.cos(a1 * xs), np.sin(a1 * xs), np.cos(a2 * xs), np.sin(a2 * xs)])
        w = _table(W)
        expect = np.diag([c.w11, c.w11, c.w33, c.w33])
        assert np.max(np.abs(w - expect)) < 1e-7


@pytest.mark.parametrize("prm", [PARAM_MATRIX[8], PARAM_MATRIX[10]], ids=str)
def test_inner_products_bneg(prm):
    f, _ = helix_surface(*prm)
    c, k = f.constants, f.ambient.kappa
    xs = np.linspace(*f.x_domain, 64)
    a, b = c.alpha, c.beta
    ca, sa, ch, sh = np.cos(a * xs), np.sin(a * xs), np.cosh(b * xs), np.sinh(b * xs)
    for y in (0.2, 0.7):
        w = _table(_project(f(xs, y), xs, [ca * ch, sa * ch, ca * sh, sa * sh]))
        for i, sign in enumerate((1, 1, -1, -1)):
            assert abs(w[i, i] + sign * 4.0 / k) < 1e-7
        assert abs(w[0, 3] - c.w14) < 1e-7
        assert abs(w[1, 2] + c.w14) < 1e-7


@settings(max_examples=30)
@given(*[st.floats(-2.0, 2.0)] * 4, st.sampled_from(["commuting", "anticommuting"]))
def test_family_is_pseudo_orthogonal(xi, xi1, xi2, xi3, branch):
    fam = hg.build_family(branch, xi, xi1, xi2, xi3)
    A = fam.matrix(np.array([0.3]))[0]
    assert np.max(np.abs(A @ EPSILON @ A.T - EPSILON)) < 1e-9 * np.cosh(xi1) ** 2
    assert abs(abs(np.linalg.det(A)) - 1.0) < 1e-10 * np.cosh(xi1) ** 8
    r1 = A[0]
    assert abs(inner(r1, r1) - 1.0) < 1e-10 * np.cosh(xi1) ** 2
    assert abs(inner(r1, r1 @ J1.T)) < 1e-10 * np.cosh(xi1) ** 2
    if branch == "commuting":
        # columns act on the right in F = A gamma, so J1 commutes with A
        assert np.max(np.abs(A @ J1 - J1 @ A)) < 1e-10 * np.cosh(xi1) ** 2


def test_zero_profiles_family():
    A = hg.build_family("commuting", 0.0, 0.0, 0.0, 0.0).matrix(np.array([0.0]))[0]
    assert np.allclose(np.abs(A).sum(axis=0), 1.0)
    assert np.array_equal(A.T @ EPSILON @ A, EPSILON)
    assert np.array_equal(A @ J1, J1 @ A)


def test_constraint_closed_form_bpos():
    c = 0.8
    xi3 = Profile(lambda y: 2.0 * np.sin(y), lambda y: 2.0 * np.cos(y))
    sol = hg.solve_constraint(Case.BPos, c, xi3, (0.0, 1.0), 0.4)
    ys = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(sol.profile(ys) - (0.4 - math.tanh(c) ** 2 * 2.0 * np.sin(ys)))) < 1e-9
    assert sol.max_residual < 1e-8


def test_constraint_trivial_cases():
    ys = np.linspace(0.0, 1.0, 11)
    sol = hg.solve_constraint(Case.BPos, 0.0, Profile.linear(0.0, 3.0), (0.0, 1.0), 0.25)
    assert np.max(np.abs(sol.profile(ys) - 0.25)) < 1e-12
    p, s = AmbientParams(4.0, 1.0), SurfaceParams(1, 1.0)
    sol = hg.solve_constraint(Case.BNeg, 0.0, 0.0, (0.0, 1.0), -0.3, p=p, s=s)
    assert np.max(np.abs(sol.profile(ys) + 0.3)) < 1e-12


@pytest.mark.parametrize("prm", PARAM_MATRIX, ids=str)
def test_admissible_family_residual(prm):
    _, sol = helix_surface(*prm)
    assert sol.max_residual <= 1e-8


def test_constraint_singularity_reported():
    p, s = AmbientParams(1.0, 0.3), SurfaceParams(1, 0.7)
    a, b = abs(s.nu) * math.sqrt(s.lam + s.nu**2), 2 * s.lam * p.tau * s.nu**2
    start = math.asin(-b / (2 * a) / math.tanh(1.0))
    with pytest.raises(ConstraintSingularityError) as err:
        hg.solve_constraint(Case.BNeg, 1.0, Profile.linear(0.0, 1.0), (0.0, 1.0), start, p=p, s=s)
    assert err.value.y == 0.0


def test_assemble_rejections():
    p, s = AmbientParams(4.0, 2.0), SurfaceParams(1, 1.0)
    fam, _ = hg.admissible_family(Case.BPos, p, s, xi1=0.5)
    with pytest.raises(ParameterError):
        hg.assemble(Case.BNeg, p, s, fam)
    anti = hg.IsometryFamily(fam.xi, fam.xi1, fam.xi2, fam.xi3, hg.Branch.anticommuting)
    with pytest.raises(ParameterError):
        hg.assemble(Case.BPos, p, s, anti)
    with pytest.raises(DegenerateSurfaceError):
        hg.assemble(Case.BPos, p, s, hg.identity_family())
    with pytest.raises(HopfTubeError):
        hg.assemble(Case.BPos, p, s, hg.hopf_tube_family(), x_domain=(-0.3, 0.3))
    moving_xi = hg.build_family("commuting", Profile.linear(0.0, 1.0), fam.xi1, fam.xi2, fam.xi3)
    with pytest.raises(ParameterError):
        hg.assemble(Case.BPos, p, s, moving_xi, x_domain=(-0.3, 0.3))


def test_default_domain_without_family():
    p, s = AmbientParams(4.0, 2.0), SurfaceParams(1, 1.0)
    a, b = hg.default_x_domain(p, s)
    spacing = math.pi / (abs(s.nu) * math.sqrt(p.kappa * s.B(p)))
    assert (a, b) == pytest.approx((-spacing / 4, spacing / 4))


def test_mesh_counts(tmp_path, bpos_surface):
    for nx, ny, faces in ((2, 2, 1), (10, 20, 9 * 19)):
        path = hg.export_mesh(bpos_surface, nx, ny, tmp_path / f"m{nx}.mesh")
        header, V, P, F = hg.read_mesh(path)
        assert V.shape == (nx * ny, 4) and P.shape == (nx * ny, 3)
        assert len(F) == faces
        assert F.min() == 1 and F.max() == nx * ny
    assert header == dict(case="BPos", kappa=4.0, tau=2.0, lam=1, nu=1.0)
    with pytest.raises(ValueError):
        hg.export_mesh(bpos_surface, 1, 5, tmp_path / "bad.mesh")


@pytest.mark.parametrize("prm", PARAM_MATRIX[::2], ids=str)
def test_mesh_reload_on_quadric(tmp_path, prm):
    f, _ = helix_surface(*prm)
    _, V, P, _ = hg.read_mesh(hg.export_mesh(f, 9, 7, tmp_path / "s.mesh"))
    assert hg.mesh_membership(f.ambient, V) < 1e-8
    assert np.all(np.isfinite(P))
    X, Y = np.meshgrid(np.linspace(*f.x_domain, 9), np.linspace(*f.y_domain, 7), indexing="ij")
    assert np.array_equal(V, f(X, Y).reshape(-1, 4))


def test_read_mesh_rejects_garbage(tmp_path):
    bad = tmp_path / "x.mesh"
    bad.write_text("v 1 2 3 4 5 6 7\n")
    with pytest.raises(ValueError):
        hg.read_mesh(bad)
