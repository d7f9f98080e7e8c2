"""``ads-helix``: generate helix surfaces, verify them, and run the ambient self-test.

Exit codes: 0 ok, 1 I/O, 2 invalid parameters, 3 degenerate geometry
(Hopf tube, singular immersion), 4 verification failure.
"""

import argparse
from dataclasses import dataclass, field
import json
import math
import sys

import numpy as np

from . import helix_gen as hg
from .ambient import INPUT_TOL, AmbientParams, membership_residual
from .errors import (
    ConstraintSingularityError,
    DegenerateSurfaceError,
    DomainError,
    ParameterError,
)
from .verify import CheckRecord, VerificationReport, ambient_selftest, verify_surface

EXIT_OK, EXIT_IO, EXIT_PARAMS, EXIT_DEGENERATE, EXIT_VERIFY = 0, 1, 2, 3, 4
SIDECAR_FORMAT = "ads-helix-sidecar v1"
DEFAULT_FAMILY = "const-xi1:0.5,linear-xi3:1"
# the generators classify |B| < 1e-12 as zero; the command line also accepts
# parameters typed with ~12 significant digits and snaps tau onto B = 0
SNAP_TOL = 1e-10


@dataclass
class RunConfig:
    command: str
    kappa: float = 4.0
    tau: float = 1.0
    lam: int = None
    nu: float = None
    case: str = None
    family: str = DEFAULT_FAMILY
    grid: tuple = (33, 33)
    x_domain: tuple = None
    y_domain: tuple = (0.0, 1.0)
    seed: int = 0
    out: str = None
    mesh: str = None
    notes: dict = field(default_factory=dict)

    def ambient(self):
        return AmbientParams(self.kappa, self.tau)

    def surface(self):
        if self.lam is None or self.nu is None:
            raise ParameterError("--lambda and --nu are required")
        return hg.SurfaceParams(self.lam, self.nu)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def parse_grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 33x33, got {text!r}") from None
    if nx < 5 or ny < 5:
        raise argparse.ArgumentTypeError("grid needs at least 5 nodes per direction")
    return nx, ny


def parse_interval(text):
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval must look like a:b, got {text!r}") from None
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise argparse.ArgumentTypeError(f"interval needs finite a < b, got {text!r}")
    return a, b


def parse_lambda(text):
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"lambda must be 1 or -1, got {text!r}") from None
    if v not in (1, -1) or float(text) != v:
        raise argparse.ArgumentTypeError(f"lambda must be 1 or -1, got {text!r}")
    return v


def parse_family(text):
    """Preset grammar: ``identity``, ``hopf-tube[:speed]`` or a comma list of
    ``const-xi1:<c>``, ``linear-xi3[:<slope>]``, ``xi:<v>``, ``xi2:<v>``.

    Returns a dict describing the preset.
    """
    text = text.strip()
    if text == "identity":
        return {"kind": "identity"}
    if text.startswith("hopf-tube"):
        _, _, speed = text.partition(":")
        return {"kind": "hopf-tube", "speed": float(speed) if speed else 1.0}
    out = {"kind": "admissible", "xi1": 0.5, "xi3_slope": 1.0, "xi": 0.0, "xi2": 0.0}
    for part in text.split(","):
        name, _, val = part.strip().partition(":")
        try:
            if name == "const-xi1":
                out["xi1"] = float(val)
            elif name == "linear-xi3":
                out["xi3_slope"] = float(val) if val else 1.0
            elif name in ("xi", "xi2"):
                out[name] = float(val)
            else:
                raise ParameterError(f"unknown family term {name!r}")
        except ValueError:
            raise ParameterError(f"bad number in family term {part!r}") from None
    return out


def build_family(cfg, p, s, case):
    preset = parse_family(cfg.family)
    if preset["kind"] == "identity":
        return hg.identity_family(), None
    if preset["kind"] == "hopf-tube":
        return hg.hopf_tube_family(preset["speed"]), None
    fam, sol = hg.admissible_family(
        case, p, s, preset["xi1"], preset["xi3_slope"], preset["xi"], preset["xi2"], cfg.y_domain
    )
    return fam, sol


def _snap_tau(cfg):
    """Move ``tau`` onto ``B = 0`` when ``|B|`` is below the command-line tolerance."""
    if cfg.case not in (None, "BZero") or cfg.lam is None or cfg.nu is None:
        return
    B = cfg.nu**2 * (cfg.tau**2 - 1.0) - cfg.lam
    if hg.ZERO_TOL <= abs(B) < SNAP_TOL and 1.0 + cfg.lam / cfg.nu**2 > 0:
        exact = math.sqrt(1.0 + cfg.lam / cfg.nu**2)
        cfg.notes["tau_input"] = cfg.tau
        cfg.tau = exact


def _common(sp, tau_default=1.0):
    sp.add_argument("--kappa", type=float, default=4.0)
    sp.add_argument("--tau", type=float, default=tau_default)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)


def _surface_flags(sp, required):
    sp.add_argument("--lambda", dest="lam", type=parse_lambda, required=required)
    sp.add_argument("--nu", type=float, required=required)
    sp.add_argument("--case", choices=[c.value for c in hg.Case])
    sp.add_argument("--grid", type=parse_grid, default=(33, 33), help="NXxNY")
    sp.add_argument("--xdomain", type=parse_interval, help="a:b (write --xdomain=-1:1 for negative a)")
    sp.add_argument("--ydomain", type=parse_interval, default=(0.0, 1.0), help="a:b")
    sp.add_argument("--family", default=DEFAULT_FAMILY)


def build_parser():
    parser = argparse.ArgumentParser(prog="ads-helix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", help="write a mesh and a JSON sidecar")
    _common(gen)
    _surface_flags(gen, True)
    ver = sub.add_parser("verify", help="verify a generated mesh (or parameters)")
    ver.add_argument("mesh", nargs="?", help="mesh written by generate; its sidecar is MESH.json")
    _common(ver)
    _surface_flags(ver, False)
    st = sub.add_parser("selftest", help="ambient identities at seeded random points")
    _common(st, tau_default=0.5)
    return parser


def config_from_args(args):
    cfg = RunConfig(args.command, args.kappa, args.tau, seed=args.seed, out=args.out)
    if args.command in ("generate", "verify"):
        cfg.lam, cfg.nu, cfg.case = args.lam, args.nu, args.case
        cfg.family, cfg.grid = args.family, args.grid
        cfg.x_domain, cfg.y_domain = args.xdomain, args.ydomain
    if args.command == "verify":
        cfg.mesh = args.mesh
    _snap_tau(cfg)
    cfg.ambient()
    if args.command == "generate" or (args.command == "verify" and cfg.mesh is None):
        cfg.surface()
        parse_family(cfg.family)
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def make_surface(cfg):
    p, s = cfg.ambient(), cfg.surface()
    case = hg.Case(cfg.case) if cfg.case else hg.classify_case(p, s)
    fam, sol = build_family(cfg, p, s, case)
    srf = hg.assemble(case, p, s, fam, cfg.x_domain, cfg.y_domain)
    return srf, sol


def sidecar_dict(cfg, srf, sol):
    p, s = srf.ambient, srf.surf
    d = {
        "format": SIDECAR_FORMAT,
        "kappa": p.kappa,
        "tau": p.tau,
        "lambda": s.lam,
        "nu": s.nu,
        "case": srf.case.value,
        "family": cfg.family,
        "x_domain": list(srf.x_domain),
        "y_domain": list(srf.y_domain),
        "grid": list(cfg.grid),
        "seed": cfg.seed,
        "constants": srf.constants.as_dict(),
    }
    if sol is not None:
        d["constraint_residual"] = sol.max_residual
    d.update(cfg.notes)
    return d


def cmd_generate(cfg):
    srf, sol = make_surface(cfg)
    out = cfg.out or "helix.mesh"
    hg.export_mesh(srf, cfg.grid[0], cfg.grid[1], out)
    side = sidecar_dict(cfg, srf, sol)
    hg._atomic_write(out + ".json", json.dumps(side, indent=2, sort_keys=True) + "\n")
    print(f"case {srf.case.value}")
    for k, v in side["constants"].items():
        if k != "case":
            print(f"{k} {_fmt(v)}")
    print(f"x_domain {_fmt(srf.x_domain[0])} {_fmt(srf.x_domain[1])}")
    print(f"mesh {out}")
    return EXIT_OK


def config_from_sidecar(path, base):
    with open(path) as fh:
        d = json.load(fh)
    if d.get("format") != SIDECAR_FORMAT:
        raise ParameterError(f"{path}: not an ads-helix sidecar")
    return RunConfig(
        "verify", d["kappa"], d["tau"], int(d["lambda"]), d["nu"], d["case"], d["family"],
        tuple(d["grid"]), tuple(d["x_domain"]), tuple(d["y_domain"]), int(d.get("seed", 0)), base.out, base.mesh,
    )


def mesh_records(srf, header, V, grid):
    """Mesh-level checks: quadric membership, agreement with the regenerated surface, header."""
    p, s = srf.ambient, srf.surf
    X, Y = np.meshgrid(np.linspace(*srf.x_domain, grid[0]), np.linspace(*srf.y_domain, grid[1]), indexing="ij")
    expect = srf(X, Y).reshape(-1, 4)
    scale = np.maximum(1.0, np.linalg.norm(expect, axis=-1))
    same = [header["kappa"] - p.kappa, header["tau"] - p.tau, header["lam"] - s.lam, header["nu"] - s.nu]
    return [
        CheckRecord("mesh.membership", float(np.max(membership_residual(p, V))), INPUT_TOL),
        CheckRecord("mesh.matches_surface", float(np.max(np.linalg.norm(V - expect, axis=-1) / scale)), 1e-12),
        CheckRecord("mesh.header", float(np.max(np.abs(same))) + float(header["case"] != srf.case.value), 0.0),
    ]


def cmd_verify(cfg):
    extra = []
    if cfg.mesh is not None:
        try:
            header, V, _, _ = hg.read_mesh(cfg.mesh)
        except ValueError as e:
            raise OSError(f"{cfg.mesh}: {e}") from None
        run = config_from_sidecar(cfg.mesh + ".json", cfg)
        if len(V) != run.grid[0] * run.grid[1]:
            raise OSError(f"mesh has {len(V)} vertices, sidecar grid is {run.grid[0]}x{run.grid[1]}")
        srf, _ = make_surface(run)
        extra = mesh_records(srf, header, V, run.grid)
        cfg = run
    else:
        srf, _ = make_surface(cfg)
    report = verify_surface(srf.ambient, srf.surf, srf, cfg.grid, cfg.seed)
    report.records = extra + report.records
    report.meta.update(case=srf.case.value, kappa=_fmt(srf.ambient.kappa), tau=_fmt(srf.ambient.tau),
                       **{"lambda": srf.surf.lam}, nu=_fmt(srf.surf.nu))
    return _emit(report, cfg.out)


def cmd_selftest(cfg):
    return _emit(ambient_selftest(cfg.ambient(), cfg.seed), cfg.out)


def _emit(report: VerificationReport, out):
    text = report.to_text()
    if out:
        hg._atomic_write(out, text)
    sys.stdout.write(text)
    return EXIT_OK if report.verdict else EXIT_VERIFY


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "selftest": cmd_selftest}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"ads-helix: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateSurfaceError, ConstraintSingularityError) as e:
        print(f"ads-helix: degenerate geometry: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ParameterError, DomainError, ValueError) as e:
        print(f"ads-helix: invalid parameters: {e}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
