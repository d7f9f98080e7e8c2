"""Anti-de Sitter space H^3_1(kappa/4) with a Berger-like metric g_tau.

Points live on the quadric ``<q, q> = -4/kappa`` of R^4_2. Tangent vectors are
either plain R^4 arrays or coefficient triples on the g_tau-orthonormal frame
``E1 = X1/tau, E2 = X2, E3 = X3`` (E1 timelike). Vector fields are callables
mapping points ``(..., 4)`` to frame coefficients ``(..., 3)``; a constant
array is accepted wherever a field is expected.

The closed-form connection and curvature are exact tables; the finite
difference routines (:func:`directional_derivative`, :func:`lie_bracket`,
:func:`covariant_derivative`, :func:`curvature_fd`) are their independent
numerical counterparts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FiniteDifferenceError, MembershipError, ParameterError
from .paraquaternion import J1, J2, J3, inner, norm2, to_complex_pair

#: Gram matrix of g_tau on the frame {E1, E2, E3}.
FRAME_METRIC = np.diag([-1.0, 1.0, 1.0])

INPUT_TOL = 1e-6
INTERNAL_TOL = 1e-9
FD_STEP = 1e-5
MIN_STEP = 1e-10


@dataclass(frozen=True)
class AmbientParams:
    """Curvature parameter ``kappa`` and Berger deformation ``tau`` (both > 0)."""

    kappa: float = 4.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "tau"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise ParameterError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def sqrt_kappa(self):
        return float(np.sqrt(self.kappa))

    @property
    def norm2(self):
        """Squared norm ``-4/kappa`` shared by every point of the quadric."""
        return -4.0 / self.kappa


# ---------------------------------------------------------------------------
# membership and frames
# ---------------------------------------------------------------------------


def membership_residual(p, q):
    """``|<q, q> + 4/kappa|`` pointwise."""
    return np.abs(norm2(q) - p.norm2)


def check_on_quadric(p, q, tol=INPUT_TOL):
    res = np.max(membership_residual(p, q))
    if not res <= tol:
        raise MembershipError(f"point off the quadric: residual {res:.3e} > {tol:.1e}")


def check_tangent(p, q, v, tol=INPUT_TOL):
    check_on_quadric(p, q, tol)
    res = np.max(np.abs(inner(q, v)))
    if not res <= tol:
        raise MembershipError(f"vector not tangent: <q, v> = {res:.3e} > {tol:.1e}")


def project_to_quadric(p, q):
    """Rescale ``q`` radially onto the quadric (needs ``<q, q> < 0``)."""
    q = np.asarray(q, dtype=float)
    n2 = norm2(q)
    if np.any(n2 >= 0):
        raise MembershipError("cannot project a non-timelike vector onto the quadric")
    return q * np.sqrt(p.norm2 / n2)[..., None]


def frame_X(p, i, q, check=True):
    """Left-invariant field ``X_i = (sqrt(kappa)/2) * (i, j or k) q``."""
    q = np.asarray(q, dtype=float)
    if check:
        check_on_quadric(p, q)
    mat = {1: J1, 2: J2, 3: J3}[i]
    return 0.5 * p.sqrt_kappa * (q @ mat.T)


def frame_E(p, i, q, check=True):
    """g_tau-orthonormal frame ``E1 = X1/tau, E2 = X2, E3 = X3``."""
    x = frame_X(p, i, q, check)
    return x / p.tau if i == 1 else x


def berger_metric(p, q, u, v, check=True):
    """``g_tau(u, v) = <u, v> + (1 - tau^2) <u, X1> <v, X1>`` at ``q``."""
    q = np.asarray(q, dtype=float)
    if check:
        check_tangent(p, q, u)
        check_tangent(p, q, v)
    x1 = frame_X(p, 1, q, check=False)
    return inner(u, v) + (1.0 - p.tau**2) * inner(u, x1) * inner(v, x1)


def to_frame(p, q, v):
    """Frame coefficients ``(c1, c2, c3)`` of the tangent vector ``v`` at ``q``."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    x1 = frame_X(p, 1, q, check=False)
    x2 = frame_X(p, 2, q, check=False)
    x3 = frame_X(p, 3, q, check=False)
    # v = -<v,X1> X1 + <v,X2> X2 + <v,X3> X3 and X1 = tau E1
    return np.stack([-p.tau * inner(v, x1), inner(v, x2), inner(v, x3)], axis=-1)


def from_frame(p, q, c):
    """R^4 vector at ``q`` with frame coefficients ``c``."""
    q = np.asarray(q, dtype=float)
    c = np.asarray(c, dtype=float)
    return (
        c[..., 0:1] * frame_E(p, 1, q, check=False)
        + c[..., 1:2] * frame_E(p, 2, q, check=False)
        + c[..., 2:3] * frame_E(p, 3, q, check=False)
    )


def frame_inner(u, v):
    """g_tau on frame coefficients: ``-u1 v1 + u2 v2 + u3 v3``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return -u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]


def wedge(u, v):
    """Lorentzian cross product fixed by ``E1^E2 = E3, E2^E3 = -E1, E3^E1 = E2``."""
    c = np.cross(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return c * np.array([-1.0, 1.0, 1.0])


# ---------------------------------------------------------------------------
# closed-form connection and curvature
# ---------------------------------------------------------------------------


def connection_table(p):
    """Array ``G[i, j]`` = frame coefficients of ``nabla_{E_(i+1)} E_(j+1)``."""
    s, t = p.sqrt_kappa, p.tau
    a = s * (t * t - 2.0) / (2.0 * t)
    b = t * s / 2.0
    g = np.zeros((3, 3, 3))
    g[0, 1] = [0.0, 0.0, a]
    g[0, 2] = [0.0, -a, 0.0]
    g[1, 0] = [0.0, 0.0, b]
    g[1, 2] = [b, 0.0, 0.0]
    g[2, 0] = [0.0, -b, 0.0]
    g[2, 1] = [-b, 0.0, 0.0]
    return g


def connection_frame(p, i, j):
    """``nabla_{E_i} E_j`` for ``i, j`` in {1, 2, 3}."""
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("frame indices must be 1, 2 or 3")
    return connection_table(p)[i - 1, j - 1].copy()


def connection_apply(p, x, y, table=None):
    """Tensorial part ``sum_ij x^i y^j nabla_{E_i} E_j`` for coefficient arrays."""
    g = connection_table(p) if table is None else table
    return np.einsum("...i,...j,ijk->...k", np.asarray(x, float), np.asarray(y, float), g)


def curvature_closed(p, X, Y, Z):
    """Closed-form ``R(X, Y) Z`` on frame coefficients (broadcasts)."""
    X, Y, Z = (np.asarray(a, dtype=float) for a in (X, Y, Z))
    k, t2 = p.kappa, p.tau**2
    e1 = np.array([1.0, 0.0, 0.0])
    gyz = frame_inner(Y, Z)[..., None]
    gxz = frame_inner(X, Z)[..., None]
    xe, ye, ze = (-A[..., 0:1] for A in (X, Y, Z))
    first = 0.25 * k * (3.0 * t2 - 4.0) * (gyz * X - gxz * Y)
    second = k * (t2 - 1.0) * (ye * ze * X - xe * ze * Y + gyz * xe * e1 - gxz * ye * e1)
    return first + second


def sectional_curvature(p, X, Y):
    """Sectional curvature ``g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) - g(X,Y)^2)``."""
    num = frame_inner(curvature_closed(p, X, Y, Y), X)
    den = frame_inner(X, X) * frame_inner(Y, Y) - frame_inner(X, Y) ** 2
    return num / den


# ---------------------------------------------------------------------------
# finite-difference oracles
# ---------------------------------------------------------------------------


def _field(F):
    if callable(F):
        return F
    const = np.asarray(F, dtype=float)
    return lambda q: np.broadcast_to(const, np.shape(q)[:-1] + const.shape[-1:]).copy()


def directional_derivative(p, f, q, v, h=FD_STEP):
    """Derivative of ``f`` at ``q`` along the tangent vector ``v`` (R^4).

    Central differences on the curve ``t -> proj(q + t v)``, steps ``h`` and
    ``h/2`` combined by one Richardson level.
    """
    if h < MIN_STEP:
        raise FiniteDifferenceError(f"finite-difference step {h:g} underflows")
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)

    def central(s):
        fp = np.asarray(f(project_to_quadric(p, q + s * v)))
        fm = np.asarray(f(project_to_quadric(p, q - s * v)))
        return (fp - fm) / (2.0 * s)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def lie_bracket(p, X, Y, q, h=FD_STEP):
    """``[X, Y]`` at ``q`` from flat ambient derivatives of the R^4 fields."""
    X, Y = _field(X), _field(Y)
    q = np.asarray(q, dtype=float)
    xv = from_frame(p, q, X(q))
    yv = from_frame(p, q, Y(q))
    dy = directional_derivative(p, lambda r: from_frame(p, r, Y(r)), q, xv, h)
    dx = directional_derivative(p, lambda r: from_frame(p, r, X(r)), q, yv, h)
    return to_frame(p, q, dy - dx)


def covariant_derivative(p, X, Y, q, h=FD_STEP, table=None):
    """``nabla_X Y`` at ``q``: Leibniz rule on the frame with FD coefficient derivatives.

    ``table`` overrides the connection table (used for mutation tests).
    """
    X, Y = _field(X), _field(Y)
    q = np.asarray(q, dtype=float)
    xc = X(q)
    dyc = directional_derivative(p, Y, q, from_frame(p, q, xc), h)
    return dyc + connection_apply(p, xc, Y(q), table)


def curvature_fd(p, X, Y, Z, q, h=1e-3, inner_h=1e-5, table=None, check_tol=1e-3):
    """``R(X,Y)Z = [nabla_X, nabla_Y] Z - nabla_[X,Y] Z`` by nested differences.

    The outer derivative uses step ``h`` (larger than ``inner_h`` to keep the
    nested round-off below 1e-8). The result is recomputed with ``2 h``; if
    the two disagree by more than ``check_tol`` a FiniteDifferenceError is
    raised.
    """
    X, Y, Z = _field(X), _field(Y), _field(Z)
    q = np.asarray(q, dtype=float)

    def nabla(A, B, hh):
        return lambda r: covariant_derivative(p, A, B, r, hh, table)

    def once(hh):
        xy = covariant_derivative(p, X, nabla(Y, Z, inner_h), q, hh, table)
        yx = covariant_derivative(p, Y, nabla(X, Z, inner_h), q, hh, table)
        br = lie_bracket(p, X, Y, q, inner_h)
        return xy - yx - covariant_derivative(p, br, Z, q, inner_h, table)

    r = once(h)
    r2 = once(2.0 * h)
    if np.max(np.abs(r - r2)) > check_tol * max(1.0, float(np.max(np.abs(r)))):
        raise FiniteDifferenceError("curvature estimate unstable under step doubling")
    return r


# ---------------------------------------------------------------------------
# Hopf fibration
# ---------------------------------------------------------------------------


def hopf_map(p, q, check=True):
    """``h(z, w) = (sqrt(kappa)/4) (2 z conj(w), |z|^2 + |w|^2)`` as a triple in R^3_1."""
    q = np.asarray(q, dtype=float)
    if check:
        check_on_quadric(p, q)
    z, w = to_complex_pair(q)
    zw = 2.0 * z * np.conj(w)
    c = p.sqrt_kappa / 4.0
    return c * np.stack([zw.real, zw.imag, np.abs(z) ** 2 + np.abs(w) ** 2], axis=-1)


def covering_map(p, q, check=True):
    """Covering map onto the unit tangent bundle of H^2(kappa).

    Returns ``(base, fiber_vec)``; ``base`` equals :func:`hopf_map`.
    """
    q = np.asarray(q, dtype=float)
    if check:
        check_on_quadric(p, q)
    z, w = to_complex_pair(q)
    s = z**2 + np.conj(w) ** 2
    fib = -0.25 * p.kappa * np.stack([s.real, s.imag, 2.0 * (z * w).real], axis=-1)
    return hopf_map(p, q, check=False), fib


def lorentz3(u, v):
    """Inner product of R^3_1: ``u1 v1 + u2 v2 - u3 v3``."""
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def s1_action(t, q):
    """Circle action ``(z, w) -> (e^{it} z, e^{it} w)`` whose orbits are the Hopf fibers."""
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)[..., None]
    return np.cos(t) * q + np.sin(t) * (q @ J1.T)


def random_points(p, rng, n, spread=1.0):
    """``n`` points on the quadric drawn from a :class:`~ads_helix.rng.SplitMix64`."""
    x12 = rng.uniform(-spread, spread, size=(n, 2))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    r = np.sqrt(x12[:, 0] ** 2 + x12[:, 1] ** 2 - p.norm2)
    return np.column_stack([x12[:, 0], x12[:, 1], r * np.cos(theta), r * np.sin(theta)])
