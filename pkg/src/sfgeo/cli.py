"""
Command-line interface.

Exit codes: 0 success, 1 certification failure, 2 invalid input (flags,
files or schema).
"""

import argparse
import sys

import numpy as np

from . import io
from .ambient import SpaceForm
from .concircular import ConcircularField
from .config import DEFAULT_TOLERANCES, RunConfig, default_step
from .curves import HelixCase1Spec, certify_helix, helix_defect, synthesize_case1
from .errors import CertificationError, DomainError, GeometryError
from .geodesics import (GeodesicState, formula_consistency, geodesic_defect, geodesic_is_helix,
                        helix_roundtrip, integrate_geodesic)
from .surfaces import (ConcircularSurface, integrate_profile, make_umbilical,
                       surface_concircularity_defect, vertex_of)


class UsageError(Exception):
    """Invalid flag values; exits with status 2."""


def _space_form(C):
    if C == 0:
        raise UsageError("flat case out of scope (C must be nonzero)")
    return SpaceForm(C)


def _vector(text, name):
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"{name} must be four comma-separated numbers") from None
    if v.shape != (4,):
        raise UsageError(f"{name} must be four comma-separated numbers")
    return v


def _positive(name, value):
    if not value > 0:
        raise UsageError(f"{name} must be positive")
    return value


def _config(args):
    step = args.step if getattr(args, "step", None) is not None else default_step()
    _positive("--step", step)
    return RunConfig(seed=getattr(args, "seed", 42), step=step,
                     output_path=getattr(args, "out", None), format=getattr(args, "format", "json"))


def _emit(cfg, text):
    if cfg.output_path:
        io.write_text(cfg.output_path, text)


def _fmt(x):
    return repr(float(x))


def cmd_helix_synth(args):
    cfg = _config(args)
    sf = _space_form(args.C)
    try:
        spec = HelixCase1Spec(rho=args.rho, m=args.m, mu0=args.mu0, dmu0=args.dmu0)
    except GeometryError as exc:
        raise UsageError(str(exc)) from None
    _positive("--smax", args.smax)
    hel = synthesize_case1(sf, spec, s_range=(0.0, args.smax), step=cfg.step)
    lam, dev = helix_defect(hel.curve, hel.axis)
    if cfg.format == "csv":
        _emit(cfg, io.curve_to_csv(hel.curve))
    elif cfg.format == "json":
        _emit(cfg, io.dumps(io.curve_to_dict(hel.curve, hel.axis, hel.lam)))
    else:
        raise UsageError("helix synth writes json or csv")
    print(f"lambda = {_fmt(lam)}")
    print(f"lambda (closed form) = {_fmt(hel.lam)}")
    print(f"helix deviation = {dev:.3e}")
    print(f"arclength window = [{_fmt(hel.s_range[0])}, {_fmt(hel.s_range[1])}]"
          + (" (truncated where kappa <= 1e-4)" if hel.truncated else ""))
    print("axis p0 = " + ",".join(_fmt(x) for x in hel.axis.p0))
    ok = dev <= args.tol
    print("certified" if ok else f"NOT certified: deviation above {args.tol:g}")
    return 0 if ok else 1


def _load_curve(path):
    try:
        return io.read_curve_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (io.SchemaError, GeometryError) as exc:
        raise UsageError(str(exc)) from None


def cmd_helix_verify(args):
    curve, axis = _load_curve(args.curve)
    if args.axis is not None:
        axis = ConcircularField(curve.sf, _vector(args.axis, "--axis"))
    try:
        rep = certify_helix(curve, axis, tol=args.tol, residual_tol=DEFAULT_TOLERANCES["residual"])
    except GeometryError as exc:
        print(f"not a helix: {exc}")
        return 1
    r = rep.structure_residuals
    print(f"structure residuals = {r[0]:.3e} {r[1]:.3e} {r[2]:.3e}")
    if rep.mu_residuals is not None:
        print(f"mu residuals = {rep.mu_residuals[0]:.3e} {rep.mu_residuals[1]:.3e}")
    print(f"class = {rep.classification}")
    print(f"lambda = {_fmt(rep.lam)}")
    print(f"helix deviation = {rep.deviation:.3e}")
    print("certified" if rep.certified else "NOT a concircular helix")
    return 0 if rep.certified else 1


def _kappa_delta(args):
    k0, k1, w = args.kappa0, args.kappa1, args.omega
    return lambda t: k0 + k1 * np.sin(w * t)


def cmd_surface_build(args):
    cfg = _config(args)
    sf = _space_form(args.C)
    try:
        Q = make_umbilical(sf, _vector(args.p0, "--p0"), args.d)
    except GeometryError as exc:
        raise UsageError(str(exc)) from None
    _positive("--tmax", args.tmax)
    if not args.zmin < args.zmax:
        raise UsageError("--zmin must be below --zmax")
    prof = integrate_profile(Q, _kappa_delta(args), t_range=(0.0, args.tmax), step=cfg.step)
    S = ConcircularSurface(prof, args.angle, (args.zmin, args.zmax))
    r = surface_concircularity_defect(S)
    angle_gap = abs((r.angle - args.angle + np.pi) % (2 * np.pi) - np.pi)
    print(f"umbilical k = {_fmt(Q.k)}, c = {_fmt(Q.c)}, A = {_fmt(Q.A)}")
    print(f"lambda mean = {_fmt(r.lam_mean)} (A cos a = {_fmt(S.lam_expected)})")
    print(f"concircularity deviation = {r.deviation:.3e}")
    print(f"recovered angle = {_fmt(r.angle)} (gap {angle_gap:.3e})")
    if abs(np.cos(args.angle)) <= 1e-8:
        v = vertex_of(S)
        print("vertex = absent" if v is None else "vertex = " + ",".join(_fmt(x) for x in v))
    if cfg.format == "obj":
        _emit(cfg, io.patch_to_obj(S, args.nu, args.nv))
    else:
        _emit(cfg, io.dumps(io.surface_to_dict(S)))
    ok = r.deviation <= args.tol and angle_gap <= args.tol
    print("certified" if ok else "NOT certified")
    return 0 if ok else 1


def cmd_surface_from_helix(args):
    cfg = _config(args)
    curve, axis = _load_curve(args.curve)
    if not args.zmin < args.zmax:
        raise UsageError("--zmin must be below --zmax")
    z_range = (args.zmin, args.zmax)
    try:
        rep = helix_roundtrip(curve, axis, z_range=z_range)
    except CertificationError as exc:
        print(f"certification failed at stage {exc.stage}: {exc}")
        return 1
    print(f"lambda = {_fmt(rep.lam)}")
    print(f"concircularity deviation = {rep.patch.concircularity_deviation:.3e}")
    print(f"section gap = {rep.section_gap:.3e}")
    print(f"section geodesic defect = {rep.geodesic_defect:.3e}")
    print(f"re-integration gap = {rep.reintegration_gap:.3e}")
    if cfg.format == "obj":
        _emit(cfg, io.patch_to_obj(rep.patch, args.nu, args.nv))
    else:
        _emit(cfg, io.dumps(io.ruled_to_dict(curve, rep.patch.axis, z_range)))
    print("certified")
    return 0


def _load_surface(path):
    try:
        return io.surface_from_dict(io.read_json(path))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except io.SchemaError as exc:
        raise UsageError(str(exc)) from None


def cmd_surface_export(args):
    from .surfaces import RuledHelixPatch
    obj = _load_surface(args.surface)
    if isinstance(obj, tuple):
        curve, axis, z_range = obj
        if axis is None:
            raise UsageError("helix surface file has no axis")
        patch = RuledHelixPatch(curve, axis, None, z_range)
    else:
        patch = obj
    io.write_text(args.out, io.patch_to_obj(patch, args.nu, args.nv))
    print(f"wrote {args.nu * args.nv} vertices to {args.out}")
    return 0


def cmd_geodesic_integrate(args):
    cfg = _config(args)
    S = _load_surface(args.surface)
    if isinstance(S, tuple):
        raise UsageError("geodesic integrate needs a concircular surface built by 'surface build'")
    _positive("--length", args.length)
    init = GeodesicState(args.t0, args.z0, args.theta)
    try:
        sol = integrate_geodesic(S, init, (0.0, args.length), cfg.step)
    except DomainError as exc:
        print(f"integration failed: {exc}")
        return 1
    speed = sol.unit_speed_defect()
    gd = geodesic_defect(S, sol)
    print(f"unit-speed defect = {speed:.3e}")
    print(f"geodesic defect = {gd.defect:.3e}")
    ok = gd.defect <= cfg.tol("geodesic")
    if np.min(np.abs(sol.kappa_pred)) >= 1e-3:
        fc = formula_consistency(S, sol)
        lam, dev = geodesic_is_helix(S, sol)
        print(f"curvature gap = {fc.kappa_gap:.3e}, torsion gap = {fc.tau_gap:.3e}, "
              f"binormal gap = {fc.binormal_gap:.3e}")
        print(f"helix lambda = {_fmt(lam)}, deviation = {dev:.3e}")
        ok = ok and max(fc.kappa_gap, fc.tau_gap) <= cfg.tol("oracle") and dev <= cfg.tol("geodesic")
    else:
        print("curvature below 1e-3 somewhere: Frenet comparison skipped")
    if cfg.format == "csv":
        _emit(cfg, io.curve_to_csv(sol.embedded))
    elif cfg.format == "json":
        _emit(cfg, io.dumps(io.geodesic_to_dict(sol, args.surface)))
    else:
        raise UsageError("geodesic integrate writes json or csv")
    print("certified" if ok else "NOT certified")
    return 0 if ok else 1


def cmd_check_theorems(args):
    from .theorems import format_table, run_all
    cfg = _config(args)
    results = run_all(cfg)
    print(format_table(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("FAILED: " + "; ".join(failed))
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="sfgeo", description="Concircular curves and surfaces in space forms.")
    sub = p.add_subparsers(dest="command", required=True)

    def step_flag(q):
        q.add_argument("--step", type=float, default=None,
                       help="RK4 step (default $SFGEO_STEP or 1e-3)")

    helix = sub.add_parser("helix", help="concircular helices").add_subparsers(dest="action", required=True)
    q = helix.add_parser("synth", help="synthesize a constant-Lancret-curvature helix")
    q.add_argument("--C", type=float, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--m", type=float, required=True)
    q.add_argument("--mu0", type=float, required=True)
    q.add_argument("--dmu0", type=float, default=0.0)
    q.add_argument("--smax", type=float, default=2.0)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--out")
    q.add_argument("--format", choices=("json", "csv"), default="json")
    step_flag(q)
    q.set_defaults(func=cmd_helix_synth)

    q = helix.add_parser("verify", help="certify a curve file as a concircular helix")
    q.add_argument("curve")
    q.add_argument("--axis", help="p0 as x1,x2,x3,x4 (default: from file, else fitted)")
    q.add_argument("--tol", type=float, default=1e-6)
    q.set_defaults(func=cmd_helix_verify)

    surf = sub.add_parser("surface", help="concircular surfaces").add_subparsers(dest="action", required=True)
    q = surf.add_parser("build", help="ruled surface over a profile curve of an umbilical surface")
    q.add_argument("--C", type=float, required=True)
    q.add_argument("--p0", default="0,0,0,1", help="unit normal direction of the umbilical plane")
    q.add_argument("--d", type=float, default=0.0, help="offset <p, p0> = d")
    q.add_argument("--kappa0", type=float, default=0.5)
    q.add_argument("--kappa1", type=float, default=0.0)
    q.add_argument("--omega", type=float, default=1.0)
    q.add_argument("--angle", type=float, required=True)
    q.add_argument("--tmax", type=float, default=1.0)
    q.add_argument("--zmin", type=float, default=-0.5)
    q.add_argument("--zmax", type=float, default=0.5)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--nu", type=int, default=33)
    q.add_argument("--nv", type=int, default=17)
    q.add_argument("--out")
    q.add_argument("--format", choices=("json", "obj"), default="json")
    step_flag(q)
    q.set_defaults(func=cmd_surface_build)

    q = surf.add_parser("from-helix", help="ruled surface realizing a helix as a geodesic")
    q.add_argument("curve")
    q.add_argument("--zmin", type=float, default=-0.3)
    q.add_argument("--zmax", type=float, default=0.3)
    q.add_argument("--nu", type=int, default=33)
    q.add_argument("--nv", type=int, default=17)
    q.add_argument("--out")
    q.add_argument("--format", choices=("json", "obj"), default="json")
    q.set_defaults(func=cmd_surface_from_helix)

    q = surf.add_parser("export", help="export a surface file as OBJ")
    q.add_argument("surface")
    q.add_argument("--out", required=True)
    q.add_argument("--nu", type=int, default=33)
    q.add_argument("--nv", type=int, default=17)
    q.set_defaults(func=cmd_surface_export)

    geo = sub.add_parser("geodesic", help="surface geodesics").add_subparsers(dest="action", required=True)
    q = geo.add_parser("integrate", help="integrate a geodesic of a concircular surface")
    q.add_argument("surface")
    q.add_argument("--t0", type=float, required=True)
    q.add_argument("--z0", type=float, default=0.0)
    q.add_argument("--theta", type=float, required=True)
    q.add_argument("--length", type=float, default=0.5)
    q.add_argument("--out")
    q.add_argument("--format", choices=("json", "csv"), default="json")
    step_flag(q)
    q.set_defaults(func=cmd_geodesic_integrate)

    q = sub.add_parser("check-theorems", help="run the numerical certification suite")
    q.add_argument("--seed", type=int, default=42)
    step_flag(q)
    q.set_defaults(func=cmd_check_theorems)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, io.SchemaError) as exc:
        print(f"sfgeo: error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, CertificationError) as exc:
        print(f"sfgeo: failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"sfgeo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
