"""Verification suite: every check returns records of ``(name, residual, tolerance)``.

Surface checks work on any :class:`~ads_helix.helix_gen.Immersion`; the
ambient self-test draws its sample points from a seeded SplitMix64 stream so a
report is reproducible bit for bit.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from . import ambient as amb
from . import surface as srf
from .errors import DegenerateSurfaceError, ParameterError
from .paraquaternion import J1, inner
from .rng import SplitMix64

HELIX_TOL = 1e-6
SHAPE_TOL = 1e-4
ALGEBRAIC_TOL = 1e-5
NESTED_TOL = 1e-3
HOPF_TUBE_TOL = 1e-8
CURVE_TOL = 1e-8
ODE_STEP = 6.4e-2


@dataclass(frozen=True)
class CheckRecord:
    """One verified identity. ``gating=False`` records are diagnostics kept out of the verdict."""

    name: str
    residual: float
    tolerance: float
    gating: bool = True

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def line(self):
        return f"CHECK {self.name} residual={self.residual:.17g} tol={self.tolerance:.17g} pass={int(self.passed)}"


def _record(name, values, tol, gating=True):
    r = float(np.max(np.abs(values))) if np.size(values) else 0.0
    if not np.isfinite(r):
        r = math.inf
    return CheckRecord(name, r, float(tol), gating)


@dataclass
class VerificationReport:
    records: list
    seed: int = 0
    nx: int = 0
    ny: int = 0
    steps: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return all(r.passed for r in self.records if r.gating)

    def failed(self):
        return [r for r in self.records if r.gating and not r.passed]

    def __getitem__(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_text(self):
        lines = ["# ads-helix verification report", f"SEED {self.seed}", f"GRID {self.nx} {self.ny}"]
        if self.steps:
            lines.append("STEPS " + " ".join(f"{k}={v:.17g}" for k, v in self.steps.items()))
        for k, v in self.meta.items():
            lines.append(f"META {k}={v}")
        info = [r.name for r in self.records if not r.gating]
        if info:
            lines.append("# not in verdict: " + " ".join(info))
        lines += [r.line() for r in self.records]
        lines.append(f"VERDICT {int(self.verdict)}")
        return "\n".join(lines) + "\n"


def thread_count():
    """Worker cap from ``ADS_HELIX_THREADS`` (default: 1 when unset or invalid)."""
    try:
        n = int(os.environ.get("ADS_HELIX_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


def _run_all(jobs, threads=None):
    threads = thread_count() if threads is None else max(1, int(threads))
    if threads == 1:
        results = [job() for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: job(), jobs))
    return [r for group in results for r in group]


def _grid(f, grid, inset=0.0):
    if grid is None:
        grid = (33, 33)
    if len(grid) == 2 and np.ndim(grid[0]) == 0:
        return srf.sample_grid(f, int(grid[0]), int(grid[1]), 3, inset)
    return np.asarray(grid[0], float), np.asarray(grid[1], float)


def _g(p, q, u, v):
    return amb.berger_metric(p, q, u, v, check=False)


def _e1(p, q):
    return (p.sqrt_kappa / (2.0 * p.tau)) * (q @ J1.T)


# ---------------------------------------------------------------------------
# surface checks
# ---------------------------------------------------------------------------


def check_helix_conditions(p, s, f, grid=None):
    """Tangent-length and cross-term conditions characterizing a constant-angle helix.

    ``g(F_x, F_x) = g(E1, F_x) = -lambda (lambda + nu^2)`` and
    ``g(F_x, F_y) = g(F_y, E1)``.
    """
    X, Y = _grid(f, grid)
    q = f(X, Y)
    d = srf.partials(f, X, Y, 1)
    fx, fy = d["x"], d["y"]
    e1 = _e1(p, q)
    target = -s.lam * (s.lam + s.nu**2)
    length = np.maximum(np.abs(_g(p, q, fx, fx) - target), np.abs(_g(p, q, e1, fx) - target))
    cross = _g(p, q, fx, fy) - _g(p, q, fy, e1)
    return [_record("helix.tangent_length", length, HELIX_TOL), _record("helix.cross_term", cross, HELIX_TOL)]


def _tangent_along_T(p, f, X, Y, sd, h=srf.NORMAL_STEP, table=None):
    """Frame coefficients of ``nabla_T T`` for the ambient connection."""

    def tfield(xx, yy):
        n, lam, *_ = srf._normal(p, f, xx, yy, sd.nu)
        return srf._decompose(n, lam)[1]

    dtx = srf.derivative(lambda t: tfield(t, Y), X, 1, h)
    dty = srf.derivative(lambda t: tfield(X, t), Y, 1, h)
    a, b = srf._coords_of(sd.cx, sd.cy, sd.T)
    return a[..., None] * dtx + b[..., None] * dty + amb.connection_apply(p, sd.T, sd.T, table)


def check_structure_equations(p, s, f, grid=None, table=None):
    """Angle, shape matrix, Gauss curvature, ``nabla_T T``, Riccati equation for ``mu`` and Codazzi.

    ``table`` overrides the connection table (mutation tests).

    Raises:
        ParameterError: ``nu = 0`` (the basis ``{T, JT}`` degenerates).
    """
    if s.nu == 0:
        raise ParameterError("structure equations need nu != 0")
    X, Y = _grid(f, grid)
    sd = srf._shape(p, f, X, Y, s.nu, table)
    c = 0.5 * p.sqrt_kappa * p.tau
    m = sd.matrix
    kbar = amb.sectional_curvature(p, sd.cx, sd.cy)
    K = kbar + sd.lam * np.linalg.det(m)
    K_expected = s.lam * p.kappa * s.nu**2 * (1.0 - p.tau**2)
    k_tol = ALGEBRAIC_TOL if p.tau == 1.0 else SHAPE_TOL
    ntt = _tangent_along_T(p, f, X, Y, sd, table=table) - (s.nu * p.tau * p.sqrt_kappa) * sd.JT
    out = [
        _record("angle", sd.nu - s.nu, 1e-7),
        _record("shape.A_of_T", np.maximum(np.abs(m[..., 0, 0]), np.abs(m[..., 1, 0] - c)), SHAPE_TOL),
        _record("shape.A_of_JT", m[..., 0, 1] + s.lam * c, SHAPE_TOL),
        _record("gauss_curvature", K - K_expected, k_tol),
        _record("connection.T_T", ntt, SHAPE_TOL),
    ]
    # Riccati and Codazzi use derivatives of FD quantities; their tolerance is empirical
    Xc, Yc = _grid(f, (max(5, X.shape[0] // 2), max(5, X.shape[1] // 2)), 4 * srf.OUTER_STEP)
    out.append(_record("riccati_mu", srf.star_residual(p, f, Xc, Yc, s.nu, table=table), NESTED_TOL))
    out.append(_record("codazzi", srf.codazzi_residual(p, f, Xc, Yc, s.nu, table=table), NESTED_TOL))
    return out


def position_coefficients(p, s):
    """``(b~^2 + 2 a~, a~^2)`` of the fourth-order position equation."""
    c = s.constants(p)
    return c.b_tilde**2 + 2.0 * c.a_tilde, c.a_tilde**2


def _ode_steps(f):
    """Wide steps for the x-derivatives of order 2..4, shrunk to fit narrow windows."""
    h4 = min(ODE_STEP, (f.x_domain[1] - f.x_domain[0]) / 16.0)
    return {2: h4 / 8.0, 3: h4 / 2.0, 4: h4}


def _scaled(value, *pairs):
    """``|value|`` against ``max(1, sum |u| |v|)`` over the flat products it combines."""
    scale = sum(np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1) for u, v in pairs)
    return np.abs(value) / np.maximum(1.0, scale)


def check_position_odes(p, s, f, grid=None):
    """Position-vector equations along x plus the flat inner-product tables.

    B != 0: ``F'''' + (b~^2 + 2a~) F'' + a~^2 F = 0`` with the residual taken
    relative to ``a~^2 |F|``; B = 0: ``F'' = 0``. Inner products use the flat
    metric of R^4_2, measured against ``max(1, |u| |v|)`` (Euclidean norms).
    """
    from .helix_gen import Case

    steps = _ode_steps(f)
    X, Y = _grid(f, grid, 4 * steps[4])
    c = s.constants(p)
    d = srf.partials(f, X, Y, 4, steps, levels=2)
    F, F1, F2, F3, F4 = f(X, Y), d["x"], d["xx"], d["xxx"], d["xxxx"]
    out = []
    if c.case is Case.BZero:
        out.append(_record("ode.second_derivative", np.linalg.norm(F2, axis=-1), ALGEBRAIC_TOL))
    else:
        c2, c0 = position_coefficients(p, s)
        res = np.linalg.norm(F4 + c2 * F2 + c0 * F, axis=-1)
        out.append(_record("ode.fourth_order", res / (c0 * np.linalg.norm(F, axis=-1)), NESTED_TOL))

    a4 = 4.0 / p.kappa * c.a_tilde
    table = [
        _scaled(inner(F, F) + 4.0 / p.kappa, (F, F)),
        _scaled(inner(F1, F1) - a4, (F1, F1)),
        _scaled(inner(F, F1), (F, F1)),
        _scaled(inner(F1, F2), (F1, F2)),
        _scaled(inner(F2, F2) - c.D, (F2, F2)),
        _scaled(inner(F, F2) + a4, (F, F2)),
        _scaled(inner(F1, F3) + c.D, (F1, F3)),
        _scaled(inner(F2, F3), (F2, F3)),
        _scaled(inner(F, F3), (F, F3)),
        _scaled(inner(F3, F3) - c.E, (F3, F3)),
    ]
    out.append(_record("inner_product_table", np.max(table, axis=0), SHAPE_TOL))
    jF, jF1, jF2 = F @ J1.T, F1 @ J1.T, F2 @ J1.T
    hopf = [
        _scaled(inner(jF, F1) + 2.0 * s.lam * (s.lam + s.nu**2) / (p.tau * p.sqrt_kappa), (F, F1)),
        _scaled(inner(jF, F2), (F, F2)),
        _scaled(inner(jF2, F1) - c.L, (F2, F1)),
        _scaled(inner(jF1, F3), (F1, F3)),
        _scaled(inner(jF1, F2) + inner(jF, F3), (F1, F2), (F, F3)),
        _scaled(inner(jF2, F3) + inner(jF1, F4), (F2, F3), (F1, F4)),
    ]
    out.append(_record("hopf_inner_products", np.max(hopf, axis=0), ALGEBRAIC_TOL))
    return out


def detect_hopf_tube(p, f, grid=None):
    """Record with residual ``max |g(N, E1)|``; ``passed`` means *flagged as a Hopf tube*.

    Kept out of report verdicts (``gating=False``).
    """
    X, Y = _grid(f, grid)
    n, *_ = srf._normal(p, f, X, Y)
    return _record("hopf_tube", n[..., 0], HOPF_TUBE_TOL, gating=False)


def check_general_helix(p, s, curve, xs=None):
    """Constant speed ``sqrt(lambda + nu^2)`` and constant angle ``-lambda sqrt(lambda + nu^2)`` with E1.

    Raises:
        DegenerateSurfaceError: the curve has a null tangent.
    """
    if xs is None:
        from .helix_gen import default_x_domain

        xs = np.linspace(*default_x_domain(p, s), 101)
    xs = np.asarray(xs, float)
    q = curve(xs)
    v = srf.derivative(curve, xs, 1)
    gvv = _g(p, q, v, v)
    if np.any(np.abs(gvv) < 1e-10):
        raise DegenerateSurfaceError("generating curve has a null tangent")
    speed = np.sqrt(np.abs(gvv))
    angle = _g(p, q, v, _e1(p, q)) / speed
    r = math.sqrt(s.lam + s.nu**2)
    return [
        _record("curve.speed", speed - r, CURVE_TOL),
        _record("curve.angle", angle + s.lam * r, CURVE_TOL),
    ]


def check_membership(p, V, name="membership", tol=amb.INPUT_TOL):
    return [_record(name, amb.membership_residual(p, np.asarray(V, float)), tol)]


def verify_surface(p, s, f, grid=(33, 33), seed=0, threads=None, curve=None, table=None):
    """Full report for an immersion; ``curve`` (or ``f.curve``) adds the general-helix checks.

    ``table`` replaces the connection table in the structure equations (mutation tests).
    """
    curve = getattr(f, "curve", None) if curve is None else curve
    jobs = [
        lambda: check_helix_conditions(p, s, f, grid),
        lambda: check_structure_equations(p, s, f, grid, table),
        lambda: check_position_odes(p, s, f, grid),
        lambda: [detect_hopf_tube(p, f, grid)],
    ]
    if curve is not None:
        jobs.append(lambda: check_general_helix(p, s, curve))
    records = _run_all(jobs, threads)
    return VerificationReport(records, seed, int(grid[0]), int(grid[1]), dict(srf.STEP_NAMES))


# ---------------------------------------------------------------------------
# ambient self-test
# ---------------------------------------------------------------------------


def _test_fields():
    """Three smooth non-constant frame-coefficient fields."""

    def X(q):
        return np.stack([1 + 0.3 * q[..., 0], 0.2 * q[..., 1], 0.5 + 0.1 * q[..., 2]], -1)

    def Y(q):
        return np.stack([0.4 * q[..., 3], 1.0 + 0 * q[..., 0], -0.3 * q[..., 0]], -1)

    def Z(q):
        return np.stack([0.1 + 0 * q[..., 0], 0.2 * q[..., 1] * q[..., 2], 1.0 + 0 * q[..., 0]], -1)

    return X, Y, Z


def _const(c):
    c = np.asarray(c, float)
    return lambda q: np.broadcast_to(c, np.shape(q)[:-1] + (3,)).copy()


def ambient_selftest(p, seed=0, n=50, table=None, threads=None):
    """Ambient identities at ``n`` seeded random points.

    ``table`` replaces the connection table in every FD-based check (mutation tests).
    """
    rng = SplitMix64(seed)
    qs = amb.random_points(p, rng, n)
    coeffs = rng.uniform(-1.0, 1.0, size=(4, n, 3))
    ts = rng.uniform(0.0, 2.0 * np.pi, size=(10, 1))
    X, Y, Z = _test_fields()
    e = [_const(v) for v in np.eye(3)]
    rk, t = p.sqrt_kappa, p.tau

    def frame():
        Xs = [amb.frame_X(p, i, qs) for i in (1, 2, 3)]
        gram = np.array([[inner(a, b) for b in Xs] for a in Xs])
        return [_record("frame.orthonormal", gram - np.diag([-1.0, 1.0, 1.0])[:, :, None], amb.INTERNAL_TOL)]

    def brackets():
        expect = [((0, 1), [0, 0, -rk / t]), ((1, 2), [t * rk, 0, 0]), ((0, 2), [0, rk / t, 0])]
        res = [amb.lie_bracket(p, e[i], e[j], qs) - np.array(v) for (i, j), v in expect]
        return [_record("brackets", np.array(res), 1e-6)]

    def torsion():
        nxy = amb.covariant_derivative(p, X, Y, qs, table=table)
        nyx = amb.covariant_derivative(p, Y, X, qs, table=table)
        return [_record("torsion_free", nxy - nyx - amb.lie_bracket(p, X, Y, qs), 1e-6)]

    def compat():
        xv = amb.from_frame(p, qs, X(qs))
        lhs = amb.directional_derivative(p, lambda r: amb.frame_inner(Y(r), Z(r)), qs, xv)
        rhs = amb.frame_inner(amb.covariant_derivative(p, X, Y, qs, table=table), Z(qs)) + amb.frame_inner(
            Y(qs), amb.covariant_derivative(p, X, Z, qs, table=table)
        )
        return [_record("metric_compatible", lhs - rhs, 1e-6)]

    def killing():
        hopf_field = _const([t, 0.0, 0.0])
        a = amb.frame_inner(amb.covariant_derivative(p, Y, hopf_field, qs, table=table), Z(qs))
        b = amb.frame_inner(amb.covariant_derivative(p, Z, hopf_field, qs, table=table), Y(qs))
        axis = amb.covariant_derivative(p, X, e[0], qs, table=table) + 0.5 * t * rk * amb.wedge(X(qs), [1, 0, 0])
        return [_record("killing_hopf", a + b, 1e-6), _record("hopf_axis_derivative", axis, 1e-6)]

    def curvature():
        fd = amb.curvature_fd(p, X, Y, Z, qs, table=table)
        return [_record("curvature_fd_vs_closed", fd - amb.curvature_closed(p, X(qs), Y(qs), Z(qs)), 1e-5)]

    def algebraic():
        a, b, c, d = coeffs
        R = amb.curvature_closed
        bianchi = R(p, a, b, c) + R(p, b, c, a) + R(p, c, a, b)
        pair = amb.frame_inner(R(p, a, b, c), d) - amb.frame_inner(R(p, c, d, a), b)
        out = [_record("bianchi", bianchi, 1e-12), _record("pair_symmetry", pair, 1e-10)]
        if t == 1.0:
            out.append(_record("constant_curvature", amb.sectional_curvature(p, a, b) + p.kappa / 4.0, 1e-10))
        return out

    def hopf():
        base = amb.hopf_map(p, qs)
        moved = amb.hopf_map(p, amb.s1_action(ts, qs[None]), check=False)
        b2, fib = amb.covering_map(p, qs)
        on_plane = np.maximum(np.abs(amb.lorentz3(base, base) + 1.0 / p.kappa), np.maximum(-base[..., 2], 0.0))
        bundle = np.stack([amb.lorentz3(fib, fib) - 1.0, amb.lorentz3(base, fib), np.max(np.abs(b2 - base), -1)])
        return [
            _record("hopf.fiber_invariance", moved - base, 1e-10),
            _record("hopf.image", on_plane, 1e-9),
            _record("covering.unit_tangent_bundle", bundle, 1e-9),
        ]

    records = _run_all([frame, brackets, torsion, compat, killing, curvature, algebraic, hopf], threads)
    return VerificationReport(
        records, seed, n, 1, {"fd": amb.FD_STEP, "curvature_outer": 1e-3},
        {"kappa": f"{p.kappa:.17g}", "tau": f"{p.tau:.17g}"},
    )
