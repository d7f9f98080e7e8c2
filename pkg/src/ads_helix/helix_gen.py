"""Constructive helix surfaces ``F(x, y) = A(y) gamma(x)``.

Three generating curves, one per sign of ``B = nu^2 (tau^2 - 1) - lambda``,
are combined with a one-parameter family ``A(y)`` of pseudo-orthogonal
matrices commuting with J1. The family is parametrized by four angle
profiles ``(xi, xi1, xi2, xi3)``; one of them is obtained by integrating the
case-specific constraint that makes the surface a helix surface.
"""

from dataclasses import dataclass, field
from enum import Enum
import math
import os
import tempfile

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicHermiteSpline

from .ambient import AmbientParams, membership_residual
from .errors import ConstraintSingularityError, DegenerateSurfaceError, HopfTubeError, ParameterError
from .paraquaternion import J1, J2, J3

ZERO_TOL = 1e-12
RK4_STEPS = 2048
AUDIT_POINTS = 256
GUARD = 1e-8


class Case(str, Enum):
    BPos = "BPos"
    BZero = "BZero"
    BNeg = "BNeg"


class Branch(str, Enum):
    commuting = "commuting"
    anticommuting = "anticommuting"


# ---------------------------------------------------------------------------
# parameters and derived constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceParams:
    """Causal character ``lam`` (+1 timelike surface, -1 spacelike) and angle ``nu``."""

    lam: int
    nu: float

    def __post_init__(self):
        if self.lam not in (1, -1):
            raise ParameterError(f"lambda must be +1 or -1, got {self.lam!r}")
        if not np.isfinite(self.nu) or self.nu == 0:
            raise ParameterError("nu must be finite and non-zero")
        if self.lam == -1 and abs(self.nu) <= 1:
            raise ParameterError(f"a spacelike helix surface needs |nu| > 1, got nu={self.nu}")

    def B(self, p):
        return self.nu**2 * (p.tau**2 - 1.0) - self.lam

    def constants(self, p):
        return SurfaceConstants.compute(p, self)


@dataclass(frozen=True)
class SurfaceConstants:
    """Every scalar derived from ``(kappa, tau, lambda, nu)``.

    Case-specific entries are NaN when they do not apply.
    """

    B: float
    case: Case
    a_tilde: float
    b_tilde: float
    D: float
    E: float
    L: float
    alpha1: float = math.nan
    alpha2: float = math.nan
    w11: float = math.nan
    w33: float = math.nan
    d: float = math.nan
    alpha: float = math.nan
    beta: float = math.nan
    w14: float = math.nan

    @classmethod
    def compute(cls, p, s):
        k, t, lam, nu = p.kappa, p.tau, s.lam, s.nu
        sk = math.sqrt(k)
        B = s.B(p)
        a = 0.25 * k * B / t**2 * (lam + nu**2)
        b = -sk * B / (lam * t)
        D = 4.0 / k * (a * b * b + 3.0 * a * a)
        E = (b * b + 2.0 * a) * D - 4.0 / k * a**3
        L = a * (2.0 * lam * (lam + nu**2) / (t * sk) - 4.0 / k * b)
        case = classify_B(B)
        extra = {}
        if case is Case.BPos:
            rb = math.sqrt(B)
            a1 = 0.5 * sk * (abs(nu) * rb + B / t)
            a2 = 0.5 * sk * (abs(nu) * rb - B / t)
            extra = dict(
                alpha1=a1,
                alpha2=a2,
                w11=4.0 * t / (k**1.5 * B) * a2,
                w33=-4.0 * t / (k**1.5 * B) * a1,
                d=(rb + t * abs(nu)) / math.sqrt(lam + nu**2),
            )
        elif case is Case.BNeg:
            extra = dict(
                alpha=-0.5 * sk * B / (lam * t),
                beta=0.5 * abs(nu) * math.sqrt(-k * B),
                w14=4.0 * lam * abs(nu) * t / (k * math.sqrt(-B)),
            )
        return cls(B=B, case=case, a_tilde=a, b_tilde=b, D=D, E=E, L=L, **extra)

    def as_dict(self):
        out = {k: v for k, v in self.__dict__.items() if not (isinstance(v, float) and math.isnan(v))}
        out["case"] = self.case.value
        return out


def classify_B(B):
    if abs(B) < ZERO_TOL:
        return Case.BZero
    return Case.BPos if B > 0 else Case.BNeg


def classify_case(p, s):
    """Sign of ``B`` as a :class:`Case`; ``|B| < 1e-12`` counts as zero."""
    return classify_B(s.B(p))


# ---------------------------------------------------------------------------
# generating curves
# ---------------------------------------------------------------------------


class Curve:
    """A parametrized curve ``x -> R^4`` (vectorized over ``x``)."""

    def __init__(self, func, label):
        self._func = func
        self.label = label

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.moveaxis(np.asarray(self._func(x)), 0, -1)

    def __repr__(self):
        return f"Curve({self.label})"


def _require(case, p, s):
    c = s.constants(p)
    if c.case is not case:
        raise ParameterError(f"parameters give B={c.B:.6g} ({c.case.value}), not {case.value}")
    return c


def curve_b_pos(p, s):
    """Twisted geodesic of a Lorentz torus (B > 0)."""
    c = _require(Case.BPos, p, s)
    if abs(s.nu) * c.B**1.5 < 1e-10:
        raise ParameterError("|nu| B^(3/2) too small: alpha1 and alpha2 nearly coincide")
    r1, r3 = math.sqrt(c.w11), math.sqrt(-c.w33)
    a1, a2, lam = c.alpha1, c.alpha2, s.lam
    return Curve(
        lambda x: [r1 * np.cos(a1 * x), -lam * r1 * np.sin(a1 * x), r3 * np.cos(a2 * x), lam * r3 * np.sin(a2 * x)],
        "BPos",
    )


def curve_b_pos_arclength(p, s):
    """Unit-speed (for ``<,>``) reparametrization of :func:`curve_b_pos` with slope ``d``."""
    c = _require(Case.BPos, p, s)
    d, lam = c.d, s.lam
    h = 0.5 * p.sqrt_kappa
    r = 2.0 / p.sqrt_kappa / math.sqrt(d * d - 1.0)
    return Curve(
        lambda t: [
            r * np.cos(h * d * t),
            -lam * r * np.sin(h * d * t),
            r * d * np.cos(h * t / d),
            lam * r * d * np.sin(h * t / d),
        ],
        "BPos-arclength",
    )


def curve_b_zero(p, s):
    """Straight line of H^3_{1,tau} in the plane ``x2 = x3 - 2/sqrt(kappa) = 0`` (B = 0)."""
    _require(Case.BZero, p, s)
    v = s.nu**2 * p.tau
    r = 2.0 / p.sqrt_kappa
    lam = s.lam
    return Curve(lambda x: [v * x, 0.0 * x, r + 0.0 * x, v * lam * x], "BZero")


def curve_b_neg(p, s):
    """Generating curve for B < 0 (products of trigonometric and hyperbolic terms)."""
    c = _require(Case.BNeg, p, s)
    k, lam, nu = p.kappa, s.lam, s.nu
    root = math.sqrt(-k * c.B)
    c1 = 2.0 * math.sqrt(lam + nu**2) / root
    c3 = 2.0 / p.sqrt_kappa
    c4 = 2.0 * lam * p.tau * abs(nu) / root
    a, b = c.alpha, c.beta

    def f(x):
        ca, sa = np.cos(a * x), np.sin(a * x)
        ch, sh = np.cosh(b * x), np.sinh(b * x)
        return [c1 * ca * sh, c1 * sa * sh, c3 * ca * ch - c4 * sa * sh, c3 * sa * ch + c4 * ca * sh]

    return Curve(f, "BNeg")


def generating_curve(p, s):
    return {Case.BPos: curve_b_pos, Case.BZero: curve_b_zero, Case.BNeg: curve_b_neg}[classify_case(p, s)](p, s)


# ---------------------------------------------------------------------------
# angle profiles and the isometry family
# ---------------------------------------------------------------------------


class Profile:
    """Scalar function of ``y`` with its derivative."""

    def __init__(self, value, deriv=None, label="custom"):
        self._value = value
        self._deriv = deriv
        self.label = label

    def __call__(self, y):
        return np.asarray(self._value(np.asarray(y, dtype=float)), dtype=float) + 0.0 * np.asarray(y, dtype=float)

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        if self._deriv is not None:
            return np.asarray(self._deriv(y), dtype=float) + 0.0 * y
        h = 1e-6
        return (self(y + h) - self(y - h)) / (2.0 * h)

    def __repr__(self):
        return f"Profile({self.label})"

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda y: np.full(np.shape(y), c), lambda y: np.zeros(np.shape(y)), f"const:{c!r}")

    @classmethod
    def linear(cls, c0, slope):
        c0, slope = float(c0), float(slope)
        return cls(lambda y: c0 + slope * y, lambda y: np.full(np.shape(y), slope), f"linear:{c0!r}+{slope!r}y")

    @classmethod
    def coerce(cls, f):
        if isinstance(f, Profile):
            return f
        if callable(f):
            return cls(f)
        return cls.constant(f)


@dataclass(frozen=True)
class IsometryFamily:
    """Curve ``y -> A(y)`` in the pseudo-orthogonal group, (anti)commuting with J1."""

    xi: Profile
    xi1: Profile
    xi2: Profile
    xi3: Profile
    branch: Branch = Branch.commuting

    def first_row(self, y):
        x1, x2, x3 = self.xi1(y), self.xi2(y), self.xi3(y)
        return np.stack(
            [np.cosh(x1) * np.cos(x2), -np.cosh(x1) * np.sin(x2), np.sinh(x1) * np.cos(x3), -np.sinh(x1) * np.sin(x3)],
            axis=-1,
        )

    def matrix(self, y):
        """``A(y)`` with shape ``y.shape + (4, 4)``."""
        r1 = self.first_row(y)
        xi = self.xi(y)[..., None]
        r3 = np.sin(xi) * (r1 @ J2.T) + np.cos(xi) * (r1 @ J3.T)
        sign = 1.0 if self.branch is Branch.commuting else -1.0
        return np.stack([r1, sign * (r1 @ J1.T), r3, sign * (r3 @ J1.T)], axis=-2)

    __call__ = matrix

    def is_xi_constant(self, y_domain, n=33, tol=1e-12):
        ys = np.linspace(*y_domain, n)
        v = self.xi(ys)
        return float(np.max(v) - np.min(v)) <= tol


def build_family(branch, xi, xi1, xi2, xi3):
    """Isometry family from four profiles (callables, :class:`Profile` or constants)."""
    return IsometryFamily(*(Profile.coerce(f) for f in (xi, xi1, xi2, xi3)), branch=Branch(branch))


# ---------------------------------------------------------------------------
# family constraints
# ---------------------------------------------------------------------------


def _bneg_terms(s, tau):
    nu, lam = s.nu, s.lam
    return abs(nu) * math.sqrt(lam + nu**2), 2.0 * lam * tau * nu**2


def constraint_residual(case, family, y, p=None, s=None):
    """Left-hand side of the case constraint evaluated on ``family`` at ``y``."""
    case = Case(case)
    x1, x2, x3 = family.xi1(y), family.xi2(y), family.xi3(y)
    d1, d2, d3 = family.xi1.derivative(y), family.xi2.derivative(y), family.xi3.derivative(y)
    if case is Case.BPos:
        return np.cosh(x1) ** 2 * d2 + np.sinh(x1) ** 2 * d3
    S, C = np.sin(x2 - x3), np.cos(x2 - x3)
    sh2, ch, sh = np.sinh(2.0 * x1), np.cosh(x1) ** 2, np.sinh(x1) ** 2
    if case is Case.BZero:
        lam = s.lam
        dxi = family.xi.derivative(y)
        return (d2 + d3 - dxi) * S * sh2 - 2.0 * lam * (dxi - d2) * ch + 2.0 * (d1 * C + lam * d3 * sh)
    a, b = _bneg_terms(s, p.tau)
    return a * (2.0 * C * d1 + (d2 + d3) * S * sh2) + b * (ch * d2 + sh * d3)


def _rk4(rhs, y0, y1, z0, steps):
    ys = np.linspace(y0, y1, steps + 1)
    zs = np.empty(steps + 1)
    dz = np.empty(steps + 1)
    zs[0] = z0
    h = (y1 - y0) / steps
    for n in range(steps):
        y, z = ys[n], zs[n]
        k1 = rhs(y, z)
        dz[n] = k1
        k2 = rhs(y + h / 2, z + h / 2 * k1)
        k3 = rhs(y + h / 2, z + h / 2 * k2)
        k4 = rhs(y + h, z + h * k3)
        zs[n + 1] = z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(zs[n + 1]):
            raise ConstraintSingularityError(f"constraint integration diverged near y={y:.6g}", y)
    dz[steps] = rhs(ys[steps], zs[steps])
    return ys, zs, dz


def _smooth_dense(ys, zs, dz, tol=1e-11):
    """Globally smooth dense output: Chebyshev interpolant of the Hermite spline through the RK4 nodes.

    A piecewise cubic is only C^1 and its kinks show up in the nested
    differences of the verifier; the interpolant degree grows until it matches
    the nodes to ``tol``.
    """
    spline = CubicHermiteSpline(ys, zs, dz)
    dom = (ys[0], ys[-1])
    scale = max(1.0, float(np.max(np.abs(zs))))
    for deg in (32, 64, 128, 256):
        cheb = Chebyshev.interpolate(spline, deg, domain=dom)
        if np.max(np.abs(cheb(ys) - zs)) <= tol * scale:
            return cheb, cheb.deriv()
    return spline, spline.derivative()


@dataclass
class ConstraintSolution:
    """Solved profile plus its audit."""

    profile: Profile
    max_residual: float
    y_domain: tuple = field(default=(0.0, 1.0))


def solve_constraint(case, xi1, xi3, y_domain=(0.0, 1.0), init=0.0, *, p=None, s=None, xi2=None, xi=0.0,
                     steps=RK4_STEPS):
    """Integrate the case constraint for the free profile with classical RK4.

    For ``BPos`` and ``BNeg`` the unknown is ``xi2`` (``xi`` is a constant);
    for ``BZero`` the unknown is ``xi`` given ``xi1, xi2, xi3``. ``init`` is the
    unknown's value at ``y_domain[0]``. ``BNeg`` and ``BZero`` need the ambient
    and surface parameters.

    Returns:
        ConstraintSolution whose ``max_residual`` is the constraint residual at
        256 collocation points.

    Raises:
        ConstraintSingularityError: the coefficient of the unknown derivative
            dropped below 1e-8, or the integration diverged.
    """
    case = Case(case)
    xi1, xi3 = Profile.coerce(xi1), Profile.coerce(xi3)
    y0, y1 = map(float, y_domain)
    if case is not Case.BPos and s is None:
        raise ParameterError(f"{case.value} constraint needs surface parameters")
    if case is Case.BNeg and p is None:
        raise ParameterError("BNeg constraint needs ambient parameters")

    def guard(coef, y):
        if abs(coef) < GUARD:
            raise ConstraintSingularityError(f"constraint coefficient vanishes at y={y:.6g}", y)

    if case is Case.BPos:

        def rhs(y, z):
            ch = math.cosh(float(xi1(y))) ** 2
            guard(ch, y)
            return -(ch - 1.0) * float(xi3.derivative(y)) / ch

    elif case is Case.BNeg:
        a, b = _bneg_terms(s, p.tau)

        def rhs(y, z):
            x1, x3 = float(xi1(y)), float(xi3(y))
            d1, d3 = float(xi1.derivative(y)), float(xi3.derivative(y))
            S, C = math.sin(z - x3), math.cos(z - x3)
            coef = a * S * math.sinh(2 * x1) + b * math.cosh(x1) ** 2
            guard(coef, y)
            return -(a * (2 * C * d1 + d3 * S * math.sinh(2 * x1)) + b * math.sinh(x1) ** 2 * d3) / coef

    else:
        if xi2 is None:
            raise ParameterError("BZero constraint needs the xi2 profile")
        xi2 = Profile.coerce(xi2)
        lam = s.lam

        def rhs(y, z):
            x1, x2, x3 = float(xi1(y)), float(xi2(y)), float(xi3(y))
            d1, d2, d3 = float(xi1.derivative(y)), float(xi2.derivative(y)), float(xi3.derivative(y))
            S, C = math.sin(x2 - x3), math.cos(x2 - x3)
            sh2, ch, sh = math.sinh(2 * x1), math.cosh(x1) ** 2, math.sinh(x1) ** 2
            coef = S * sh2 + 2 * lam * ch
            guard(coef, y)
            return ((d2 + d3) * S * sh2 + 2 * lam * d2 * ch + 2 * (d1 * C + lam * d3 * sh)) / coef

    ys, zs, dz = _rk4(rhs, y0, y1, float(init), steps)
    solved = Profile(*_smooth_dense(ys, zs, dz), f"rk4:{case.value}")

    if case is Case.BZero:
        fam = build_family(Branch.commuting, solved, xi1, xi2, xi3)
    else:
        fam = build_family(Branch.commuting, xi, xi1, solved, xi3)
    ya = np.linspace(y0, y1, AUDIT_POINTS + 2)[1:-1]
    res = float(np.max(np.abs(constraint_residual(case, fam, ya, p, s))))
    return ConstraintSolution(solved, res, (y0, y1))


def admissible_family(case, p, s, xi1=1.0, xi3_slope=1.0, xi=0.0, xi2=0.0, y_domain=(0.0, 1.0)):
    """Family with ``xi1`` constant, ``xi3 = slope * y`` and the remaining profile solved.

    For ``BZero`` the profile ``xi2`` is held constant and ``xi`` is integrated
    from the value ``xi``; otherwise ``xi`` is constant and ``xi2`` is
    integrated from ``xi2``.
    """
    case = Case(case)
    x1 = Profile.constant(xi1)
    x3 = Profile.linear(0.0, xi3_slope)
    if case is Case.BZero:
        sol = solve_constraint(case, x1, x3, y_domain, xi, p=p, s=s, xi2=Profile.constant(xi2))
        return build_family(Branch.commuting, sol.profile, x1, Profile.constant(xi2), x3), sol
    sol = solve_constraint(case, x1, x3, y_domain, xi2, p=p, s=s, xi=xi)
    return build_family(Branch.commuting, Profile.constant(xi), x1, sol.profile, x3), sol


def identity_family():
    """Constant family ``A(y) = Id`` (xi = pi/2, other profiles zero)."""
    return build_family(Branch.commuting, math.pi / 2, 0.0, 0.0, 0.0)


def hopf_tube_family(speed=1.0):
    """Family acting as the circle action ``q -> cos(t) q + sin(t) J1 q`` with ``t = speed * y``.

    ``F(x, y) = A(y) gamma(x)`` then sweeps ``gamma`` along the Hopf fibers.
    """
    speed = float(speed)
    return build_family(
        Branch.commuting, Profile.linear(math.pi / 2, 2.0 * speed), 0.0, Profile.linear(0.0, speed), 0.0
    )


# ---------------------------------------------------------------------------
# assembly and export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Immersion:
    """Map ``(x, y) -> R^4`` on a rectangle; ``eval`` broadcasts its arguments."""

    eval: object
    x_domain: tuple
    y_domain: tuple

    def __call__(self, x, y):
        return self.eval(x, y)


@dataclass(frozen=True)
class HelixSurface(Immersion):
    case: Case = Case.BPos
    ambient: AmbientParams = None
    surf: SurfaceParams = None
    curve: Curve = None
    family: IsometryFamily = None

    @property
    def constants(self):
        return self.surf.constants(self.ambient)


def default_x_domain(p, s, family=None, y_domain=(0.0, 1.0), nx=121, ny=9):
    """A window in ``x`` on which ``F(x, y) = A(y) gamma(x)`` stays a regular immersion.

    Where ``F_y`` turns parallel to ``F_x`` the entry ``mu = g(A JT, JT)`` of the
    shape operator diverges; for B > 0 these curves repeat every
    ``pi / (|nu| sqrt(kappa B))`` in ``x``. The window width is half that spacing
    for B > 0, ``2 / sqrt(kappa)`` for B = 0, and for B < 0 additionally at most
    twice the inverse exponential rate ``|nu| sqrt(-kappa B)``. Without a family it is centred
    at 0; with one, it slides over a coarse ``(x, y)`` sample of ``mu`` and the
    window with the smallest ``max |mu|`` plus log-growth of ``|F|`` wins
    (near-ties go to the one nearest 0).
    """
    c = s.constants(p)
    if c.case is Case.BPos:
        spacing = math.pi / (abs(s.nu) * math.sqrt(p.kappa * c.B))
        half = 0.25 * spacing
        reach = 2.0 * spacing
    elif c.case is Case.BNeg:
        half = min(1.0 / p.sqrt_kappa, 1.0 / (abs(s.nu) * math.sqrt(-p.kappa * c.B)))
        reach = 4.0 * half
    else:
        half = 1.0 / p.sqrt_kappa
        reach = 4.0 * half
    if family is None:
        return (-half, half)
    from .surface import mu_field

    curve = generating_curve(p, s)

    def F(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.einsum("...ij,...j->...i", family.matrix(y), curve(x))

    xs = np.linspace(-reach, reach, nx)
    ys = np.linspace(y_domain[0], y_domain[1], ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    with np.errstate(all="ignore"):
        mu = np.abs(mu_field(p, F, X, Y, s.nu)) / p.sqrt_kappa
    mu = np.where(np.isfinite(mu), mu, np.inf).max(axis=1)
    # coordinates of a grid point grow exponentially in the B < 0 case; round-off follows
    growth = np.log(np.linalg.norm(F(X, Y), axis=-1).max(axis=1) * p.sqrt_kappa / 2)
    w = int(round(2 * half / (xs[1] - xs[0])))
    worst = np.array([mu[i:i + w + 1].max() + growth[i:i + w + 1].max() for i in range(nx - w)])
    centres = xs[: nx - w] + half
    ok = worst <= worst.min() + 0.05
    centre = float(centres[ok][np.argmin(np.abs(centres[ok]))])
    if not np.isfinite(worst.min()):
        raise DegenerateSurfaceError("no regular x-window found for this family")
    return (centre - half, centre + half)


def assemble(case, p, s, family, x_domain=None, y_domain=(0.0, 1.0), hopf_check=True):
    """``F(x, y) = A(y) gamma(x)`` for the requested case.

    Raises:
        ParameterError: case mismatch, anticommuting branch, or non-constant
            ``xi`` in the B != 0 cases.
        HopfTubeError: the Hopf field is tangent to the assembled surface.
        DegenerateSurfaceError: the map is not an immersion on the domain.
    """
    case = Case(case)
    found = classify_case(p, s)
    if found is not case:
        raise ParameterError(f"requested case {case.value} but parameters give {found.value}")
    if family.branch is not Branch.commuting:
        raise ParameterError("generators only accept families commuting with J1")
    ys = np.linspace(y_domain[0], y_domain[1], 9)
    mats = family.matrix(ys)
    if np.max(np.abs(mats - mats[0])) < 1e-12:
        raise DegenerateSurfaceError("family is constant in y, so F_y = 0 and F is not an immersion")
    curve = generating_curve(p, s)
    if x_domain is None:
        x_domain = default_x_domain(p, s, family, y_domain)

    def F(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        return np.einsum("...ij,...j->...i", family.matrix(y), curve(x))

    srf = HelixSurface(F, tuple(map(float, x_domain)), tuple(map(float, y_domain)), case, p, s, curve, family)
    if hopf_check:
        from .verify import detect_hopf_tube

        rec = detect_hopf_tube(p, srf, (5, 5))
        if rec.passed:
            raise HopfTubeError(f"Hopf tube: max |g(N, E1)| = {rec.residual:.3e}")
    if case is not Case.BZero and not family.is_xi_constant(y_domain):
        raise ParameterError("xi must be constant for B != 0")
    return srf


def export_mesh(srf, nx, ny, path):
    """Write the ``ads-helix v1`` text mesh for an ``nx`` by ``ny`` grid.

    Vertices are listed row-major in ``(x, y)`` (x index outermost), each with
    its four coordinates and a stereographic projection to R^3 from the pole
    ``(0, 0, -2/sqrt(kappa), 0)`` direction. Faces are 1-indexed quads.
    """
    if nx < 2 or ny < 2:
        raise ValueError("mesh needs at least 2 x 2 vertices")
    xs = np.linspace(*srf.x_domain, nx)
    ys = np.linspace(*srf.y_domain, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    V = srf(X, Y).reshape(-1, 4)
    P = stereographic(srf.ambient, V)
    p, s = srf.ambient, srf.surf
    lines = [f"ads-helix v1 {srf.case.value} {p.kappa:.17g} {p.tau:.17g} {s.lam:d} {s.nu:.17g}"]
    lines += ["v " + " ".join(f"{c:.17g}" for c in row) for row in np.hstack([V, P])]
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j + 1
            lines.append(f"f {a} {a + ny} {a + ny + 1} {a + 1}")
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def stereographic(p, V):
    """Map quadric points to R^3 as ``(x1, x2, x4) / (R + sqrt(x3^2 + x4^2))`` with ``R = 2 / sqrt(kappa)``.

    The denominator never drops below ``R``, so the map is finite on the whole quadric.
    """
    V = np.asarray(V, dtype=float)
    R = 2.0 / p.sqrt_kappa
    den = R + np.sqrt(V[..., 2] ** 2 + V[..., 3] ** 2)
    return np.stack([V[..., 0], V[..., 1], V[..., 3]], axis=-1) / den[..., None]


def read_mesh(path):
    """Parse an ``ads-helix v1`` mesh; returns ``(header, vertices (n, 4), projected (n, 3), faces)``."""
    header, verts, faces = None, [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "ads-helix":
                if parts[1] != "v1":
                    raise ValueError(f"unsupported mesh version {parts[1]}")
                header = dict(case=parts[2], kappa=float(parts[3]), tau=float(parts[4]), lam=int(parts[5]),
                              nu=float(parts[6]))
            elif parts[0] == "v":
                verts.append([float(v) for v in parts[1:8]])
            elif parts[0] == "f":
                faces.append([int(v) for v in parts[1:5]])
    if header is None:
        raise ValueError("missing ads-helix header line")
    verts = np.array(verts, dtype=float).reshape(-1, 7)
    return header, verts[:, :4], verts[:, 4:], np.array(faces, dtype=int).reshape(-1, 4)


def mesh_membership(p, V):
    return float(np.max(membership_residual(p, V))) if len(V) else 0.0


def _atomic_write(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
