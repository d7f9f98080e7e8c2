"""Extrinsic geometry of immersed surfaces ``F(x, y)`` in H^3_{1,tau}.

All quantities are computed numerically from the immersion alone, by central
differences with Richardson extrapolation. Every function broadcasts over
arrays of ``x`` and ``y`` so a whole sampling grid is processed at once.

Tangent vectors use step ``1e-3`` with two Richardson levels; normal
derivatives use ``1e-4`` and derivatives of the shape operator ``5e-3``.
"""

from dataclasses import dataclass

import numpy as np

from .ambient import (
    connection_apply,
    frame_inner,
    from_frame,
    sectional_curvature,
    to_frame,
    wedge,
)
from .errors import DegenerateSurfaceError, DomainError, ParameterError

STEP = {1: 1e-5, 2: 1e-3, 3: 4e-3, 4: 8e-3}
NORMAL_STEP = 1e-4
OUTER_STEP = 5e-3
DEGENERATE_DET = 1e-12
# tangents feed two more difference layers, so they use a wide step and two Richardson levels
TANGENT_STEP = 1e-3
STEP_NAMES = {"tangent": TANGENT_STEP, "normal": NORMAL_STEP, "outer": OUTER_STEP, "xx": STEP[2], "xxx": STEP[3], "xxxx": STEP[4]}
E1 = np.array([1.0, 0.0, 0.0])


def _stencil(g, x, h, order):
    if order == 1:
        return (g(x + h) - g(x - h)) / (2 * h)
    if order == 2:
        return (g(x + h) - 2 * g(x) + g(x - h)) / h**2
    if order == 3:
        return (g(x + 2 * h) - 2 * g(x + h) + 2 * g(x - h) - g(x - 2 * h)) / (2 * h**3)
    if order == 4:
        return (g(x + 2 * h) - 4 * g(x + h) + 6 * g(x) - 4 * g(x - h) + g(x - 2 * h)) / h**4
    raise ValueError(f"unsupported derivative order {order}")


def derivative(g, x, order=1, h=None, levels=1):
    """Central difference of order ``order`` with ``levels`` Richardson levels (1 or 2)."""
    h = STEP[order] if h is None else h
    x = np.asarray(x, dtype=float)
    d = [_stencil(g, x, h / 2**k, order) for k in range(levels + 1)]
    r1 = [(4.0 * d[k + 1] - d[k]) / 3.0 for k in range(levels)]
    if levels == 1:
        return r1[0]
    if levels == 2:
        return (16.0 * r1[1] - r1[0]) / 15.0
    raise ValueError("levels must be 1 or 2")


def check_interior(f, x, y, margin_x, margin_y=None):
    margin_y = margin_x if margin_y is None else margin_y
    (x0, x1), (y0, y1) = f.x_domain, f.y_domain
    x = np.asarray(x)
    y = np.asarray(y)
    if np.any(x - margin_x < x0) or np.any(x + margin_x > x1) or np.any(y - margin_y < y0) or np.any(
        y + margin_y > y1
    ):
        raise DomainError("evaluation point too close to the domain boundary for the stencil")


def partials(f, x, y, order=1, steps=None, levels=1):
    """``{'x': F_x, 'xx': ..., 'y': F_y}`` up to ``order`` x-derivatives.

    ``steps`` overrides entries of :data:`STEP` per derivative order. Points
    must lie at least four steps of the widest stencil inside the domain.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError("order must be 1..4")
    steps = STEP if steps is None else {**STEP, **steps}
    check_interior(f, x, y, 4 * steps[order], 4 * steps[1])
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    out = {}
    for n in range(1, order + 1):
        out["x" * n] = derivative(lambda s: f(s, y), x, n, steps[n], levels)
    out["y"] = derivative(lambda s: f(x, s), y, 1, steps[1], levels)
    return out


# ---------------------------------------------------------------------------
# frame-level building blocks
# ---------------------------------------------------------------------------


def _tangents(p, f, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    h = TANGENT_STEP
    q = f(x, y)
    fx = derivative(lambda s: f(s, y), x, 1, h, levels=2)
    fy = derivative(lambda s: f(x, s), y, 1, h, levels=2)
    return q, to_frame(p, q, fx), to_frame(p, q, fy)


def _normal(p, f, x, y, orientation=None, strict=True):
    """Unit normal frame coefficients, ``lambda`` and the tangent coefficients."""
    q, cx, cy = _tangents(p, f, x, y)
    det = frame_inner(cx, cx) * frame_inner(cy, cy) - frame_inner(cx, cy) ** 2
    if strict and np.any(np.abs(det) < DEGENERATE_DET):
        raise DegenerateSurfaceError(
            f"induced metric degenerate (min |det| = {np.min(np.abs(det)):.3e}): "
            "lightlike tangent plane or singular immersion"
        )
    n = wedge(cx, cy)
    nn = frame_inner(n, n)
    lam = np.sign(nn)
    n = n / np.sqrt(np.abs(nn))[..., None]
    if orientation is not None:
        # make lambda * g(N, E1) carry the sign of the requested angle
        flip = np.sign(-lam * n[..., 0]) * np.sign(orientation) < 0
        n = np.where(flip[..., None], -n, n)
    return n, lam, q, cx, cy


def unit_normal(p, f, x, y, orientation=None):
    """Unit normal ``N`` (R^4) and ``lambda = g(N, N)``.

    Args:
        orientation: optional sign; ``N`` is flipped pointwise so that
            ``lambda * g(N, E1)`` has this sign. Without it ``N`` is the
            normalized wedge ``F_x ^ F_y``.

    Raises:
        DegenerateSurfaceError: the induced metric determinant is below 1e-12.
    """
    n, lam, q, _, _ = _normal(p, f, x, y, orientation)
    return from_frame(p, q, n), lam


def angle_function(p, f, x, y, orientation=None):
    """``nu = lambda g(N, E1)``."""
    n, lam, *_ = _normal(p, f, x, y, orientation)
    return -lam * n[..., 0]


@dataclass
class TangentData:
    """Decomposition ``E1 = T + nu N`` with ``JT = N ^ T``.

    ``T``, ``JT`` and ``N`` are R^4 vectors; the ``*_frame`` fields carry the
    same vectors on the orthonormal frame.
    """

    T: np.ndarray
    JT: np.ndarray
    N: np.ndarray
    nu_val: np.ndarray
    lam: np.ndarray
    T_frame: np.ndarray
    JT_frame: np.ndarray
    N_frame: np.ndarray


def _decompose(n, lam):
    nu = -lam * n[..., 0]
    T = E1 - nu[..., None] * n
    JT = wedge(n, T)
    return nu, T, JT


def tangent_decomposition(p, f, x, y, orientation=None):
    n, lam, q, _, _ = _normal(p, f, x, y, orientation)
    nu, T, JT = _decompose(n, lam)
    return TangentData(from_frame(p, q, T), from_frame(p, q, JT), from_frame(p, q, n), nu, lam, T, JT, n)


def _coords_of(cx, cy, v):
    """Solve ``v = a F_x + b F_y`` for tangent ``v`` through the Gram system."""
    gxx, gxy, gyy = frame_inner(cx, cx), frame_inner(cx, cy), frame_inner(cy, cy)
    vx, vy = frame_inner(v, cx), frame_inner(v, cy)
    det = gxx * gyy - gxy**2
    return (vx * gyy - vy * gxy) / det, (vy * gxx - vx * gxy) / det


@dataclass
class ShapeData:
    matrix: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    N: np.ndarray
    T: np.ndarray
    JT: np.ndarray
    AT: np.ndarray
    AJT: np.ndarray
    Ax: np.ndarray
    Ay: np.ndarray
    cx: np.ndarray
    cy: np.ndarray


def _normal_derivatives(p, f, x, y, orientation, h=NORMAL_STEP, strict=True):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))

    def nfield(xx, yy):
        return _normal(p, f, xx, yy, orientation, strict)[0]

    dnx = derivative(lambda s: nfield(s, y), x, 1, h)
    dny = derivative(lambda s: nfield(x, s), y, 1, h)
    return dnx, dny


def _shape(p, f, x, y, orientation=None, table=None, strict=True):
    n, lam, q, cx, cy = _normal(p, f, x, y, orientation, strict)
    dnx, dny = _normal_derivatives(p, f, x, y, orientation, strict=strict)
    # A(v) = -nabla_v N, linear in v: build it on the coordinate basis
    Ax = -(dnx + connection_apply(p, cx, n, table))
    Ay = -(dny + connection_apply(p, cy, n, table))
    nu, T, JT = _decompose(n, lam)

    def A(v):
        a, b = _coords_of(cx, cy, v)
        return a[..., None] * Ax + b[..., None] * Ay

    AT, AJT = A(T), A(JT)
    gTT, gJJ = frame_inner(T, T), frame_inner(JT, JT)
    m = np.empty(np.shape(nu) + (2, 2))
    m[..., 0, 0] = frame_inner(AT, T) / gTT
    m[..., 1, 0] = frame_inner(AT, JT) / gJJ
    m[..., 0, 1] = frame_inner(AJT, T) / gTT
    m[..., 1, 1] = frame_inner(AJT, JT) / gJJ
    return ShapeData(m, lam, nu, n, T, JT, AT, AJT, Ax, Ay, cx, cy)


def shape_operator(p, f, x, y, orientation=None):
    """Matrix of ``A = -nabla N`` on the basis ``{T, JT}`` (columns are images).

    Raises:
        ParameterError: ``{T, JT}`` is degenerate (angle function vanishes).
    """
    sd = _shape(p, f, x, y, orientation)
    if np.any(np.abs(sd.nu) < 1e-12):
        raise ParameterError("basis {T, JT} degenerates where the angle function vanishes")
    return sd.matrix


def gauss_curvature(p, f, x, y, orientation=None):
    """``K = Kbar + lambda det A`` with ``Kbar`` from the closed-form ambient curvature."""
    sd = _shape(p, f, x, y, orientation)
    kbar = sectional_curvature(p, sd.cx, sd.cy)
    return kbar + sd.lam * np.linalg.det(sd.matrix)


def extract_mu_phi(p, f, x, y, orientation=None):
    """``mu`` (the ``(JT, JT)`` entry of ``A``) and the phase ``phi`` of ``N``.

    ``phi`` is ``atan2`` of the E3 and E2 components of ``N`` in ``(-pi, pi]``;
    use :func:`unwrap_x` before fitting slopes along x.
    """
    sd = _shape(p, f, x, y, orientation)
    rad = sd.lam + sd.nu**2
    if np.any(rad <= 0):
        raise ParameterError("lambda + nu^2 must be positive to define phi")
    phi = np.arctan2(sd.N[..., 2], sd.N[..., 1])
    phi = np.where(phi <= -np.pi, phi + 2 * np.pi, phi)
    return sd.matrix[..., 1, 1], phi


def unwrap_x(phi, axis=0):
    """Remove ``2 pi`` jumps along the x-scanline axis."""
    return np.unwrap(phi, axis=axis)


def star_residual(p, f, x, y, orientation=None, h=OUTER_STEP, table=None):
    """``T(mu) + nu mu^2 + kappa nu B`` with ``B`` from the measured angle."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    sd = _shape(p, f, x, y, orientation, table)

    def mu(xx, yy):
        return _shape(p, f, xx, yy, orientation, table).matrix[..., 1, 1]

    dmx = derivative(lambda s: mu(s, y), x, 1, h, levels=2)
    dmy = derivative(lambda s: mu(x, s), y, 1, h, levels=2)
    a, b = _coords_of(sd.cx, sd.cy, sd.T)
    nu, lam = sd.nu, sd.lam
    B = nu**2 * (p.tau**2 - 1.0) - lam
    m = sd.matrix[..., 1, 1]
    return a * dmx + b * dmy + nu * m**2 + p.kappa * nu * B


def codazzi_residual(p, f, x, y, orientation=None, h=OUTER_STEP, table=None):
    """``nabla_x A(d_y) - nabla_y A(d_x)`` minus its closed form on coordinate fields.

    The closed form is ``-kappa lambda nu (1 - tau^2) [g(d_x, T) d_y - g(d_y, T) d_x]``.
    Returns the pointwise sup-norm of the difference of frame coefficients.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    sd = _shape(p, f, x, y, orientation, table)
    dAy_dx = derivative(lambda s: _shape(p, f, s, y, orientation, table).Ay, x, 1, h, levels=2)
    dAx_dy = derivative(lambda s: _shape(p, f, x, s, orientation, table).Ax, y, 1, h, levels=2)
    lhs = dAy_dx + connection_apply(p, sd.cx, sd.Ay, table) - dAx_dy - connection_apply(p, sd.cy, sd.Ax, table)
    lhs = lhs - (sd.lam * frame_inner(lhs, sd.N))[..., None] * sd.N
    coef = -p.kappa * sd.lam * sd.nu * (1.0 - p.tau**2)
    rhs = coef[..., None] * (frame_inner(sd.cx, sd.T)[..., None] * sd.cy - frame_inner(sd.cy, sd.T)[..., None] * sd.cx)
    return np.max(np.abs(lhs - rhs), axis=-1)


def sample_grid(f, nx=33, ny=33, margin=3, inset=0.0):
    """``nx`` by ``ny`` nodes inset ``margin`` cells (and at least ``inset`` in x) from the edges."""
    (x0, x1), (y0, y1) = f.x_domain, f.y_domain
    ix = max(margin * (x1 - x0) / (nx - 1 + 2 * margin), inset)
    iy = margin * (y1 - y0) / (ny - 1 + 2 * margin)
    if 2 * ix >= x1 - x0:
        raise DomainError("x-domain too narrow for the requested inset")
    xs = np.linspace(x0 + ix, x1 - ix, nx)
    ys = np.linspace(y0 + iy, y1 - iy, ny)
    return np.meshgrid(xs, ys, indexing="ij")


def mu_field(p, f, x, y, orientation=None):
    """``mu`` without the degeneracy guard; non-finite where the metric degenerates."""
    return _shape(p, f, x, y, orientation, strict=False).matrix[..., 1, 1]
