"""Command-line interface: analyze, criteria, region, simulate, benchmark."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import BENCHMARKS, DEFAULT_COUPLING, example2, load_benchmark
from .dynamics import IntegratorConfig, integrate
from .errors import (AuxboundError, DefectiveMatrix, EmptyCertifiedInterval,
                     HorizonInconclusive, KappaNonNegative, NegativeRadius, NoBracket,
                     SpecError)
from .pipeline import analyze
from .regions import PolarScanConfig, compare_regions, ellipsoid_projection, scan_plane

log = logging.getLogger("auxbound")

EXIT_OK, EXIT_INPUT, EXIT_INAPPLICABLE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, (set, tuple)):
            return list(o)
        return super().default(o)


def _finite(obj):
    """Replace inf/nan by strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(_finite(json.loads(json.dumps(data, cls=_Encoder))),
                                     indent=2) + "\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in r])


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise SpecError(f"--param expects key=value, got '{item}'")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError as exc:
            raise SpecError(f"--param {k}: '{v}' is not a number") from exc
    return params


def _load(args):
    from .system import load_spec

    params = _parse_params(args.param)
    if args.benchmark_spec:
        if args.benchmark_spec in ("vdp", "duffing", "duffing_forced"):
            params.setdefault("d", DEFAULT_COUPLING)
        spec = load_benchmark(args.benchmark_spec, params)
    elif args.spec:
        spec = load_spec(args.spec, params)
    else:
        raise SpecError("one of --spec or --benchmark-spec is required")
    if args.t0 is not None:
        spec = spec.with_t0(args.t0)
    return spec


def _out(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise SpecError(f"output directory {out} is not writable")
    return out


def _manifest(args, out, spec=None):
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("func", "command", "spec", "out") and v is not None}
    data = {"command": args.command, "spec_path": getattr(args, "spec", None), "output_dir": str(out),
            "overrides": overrides, "version": __version__}
    if spec is not None:
        data["resolved_spec"] = spec.to_json()
    write_json(out / "manifest.json", data)


def _integrator(args, horizon):
    return IntegratorConfig(rtol=args.rtol, atol=args.atol, horizon=horizon)


# -- commands ------------------------------------------------------------------

def cmd_analyze(args):
    from .plotting import plot_envelopes

    spec = _load(args)
    out = _out(args)
    _manifest(args, out, spec)
    an = analyze(spec, horizon=args.horizon)
    report = an.to_dict()
    write_json(out / "analysis.json", report)
    t = np.linspace(spec.t0, spec.t0 + min(an.horizon, 50.0), 2001)
    g, gm, f = an.maps.G_norm(t), an.maps.G_minus_norm(t), an.maps.F_norm(t)
    write_csv(out / "envelopes.csv", ["t", "norm_G", "norm_G_minus", "norm_F"],
              zip(t.tolist(), np.broadcast_to(g, t.shape).tolist(),
                  np.broadcast_to(gm, t.shape).tolist(), np.broadcast_to(f, t.shape).tolist()))
    plot_envelopes(t, {"||G(t)||": np.broadcast_to(g, t.shape),
                       "||G_-(t)||": np.broadcast_to(gm, t.shape),
                       "||F(t)||": np.broadcast_to(f, t.shape)}, out / "envelopes.png")
    lines = [f"system: {spec.name or args.spec}",
             f"eigenvalues: {', '.join(f'{a:.6g}{b:+.6g}i' for a, b in zip(an.eig.alpha, an.eig.beta))}",
             f"||V|| = {an.eig.norm_V:.6g}, ||V^-1|| = {an.eig.norm_V_inv:.6g}, "
             f"cond = {an.eig.cond_V:.6g}",
             f"Gs = {an.env.Gs:.6g}, kappa+ = {an.env.kappa_plus:.6g}, sigma = {report['sigma']:.6g}",
             f"z_hat_max = {report['z_hat_max']:.6g}",
             an.aux.describe()]
    if an.fixed is not None:
        lines.append("fixed points: " + ", ".join(f"{r.z:.6g} ({r.stability})"
                                                  for r in an.fixed.roots)
                     + f"  [case {an.fixed.case}]")
    lines += [f"note: {n}" for n in an.notes]
    _summary(out, lines)
    return EXIT_OK


def cmd_criteria(args):
    from .criteria import compute_rho, compute_Zs
    from .plotting import plot_radius_profile

    spec = _load(args)
    out = _out(args)
    _manifest(args, out, spec)
    an = analyze(spec, horizon=args.horizon)
    rep = an.best_criteria(n_grid=args.zhat_grid)
    data = rep.to_dict()
    if an.F0 > 0:
        data["notes"].append("stability estimates refer to the system with F0 = 0")
    write_json(out / "criteria.json", data)
    lin = an.linear_aux(conservative=rep.variant == "conservative")
    top = max([e.z_interval[1] for e in rep.estimates if e.z_interval] + [0.0])
    rows, zs, ratio, zf = [], [], [], []
    if top > 0:
        for z in top * np.arange(1, args.zhat_grid + 1) / args.zhat_grid:
            Zs, ok = compute_Zs(lin, z, strict=False)
            rho, ok_r = compute_rho(lin, z, strict=False) if an.F0 > 0 else (0.0, True)
            r1 = z / Zs if ok else float("nan")
            r2 = (z - an.F0 * rho) / Zs if (ok and ok_r) else float("nan")
            rows.append([float(z), Zs, rho, r1, r2, int(ok), int(ok_r)])
            zs.append(z)
            ratio.append(r1)
            zf.append(r2)
        write_csv(out / "radius_profile.csv",
                  ["z_hat", "Z_s", "rho", "z_hat_over_Z_s", "z_F", "Z_s_attained",
                   "rho_attained"], rows)
        series, labels = [ratio], ["z_hat / Z_s"]
        if an.F0 > 0:
            series.append(zf)
            labels.append("z_F")
        plot_radius_profile(zs, series, out / "radius_profile.png", labels)
    lines = [f"stable: {rep.stable}", f"asymptotically stable: {rep.asymptotically_stable}",
             f"fired: {', '.join(rep.fired) or 'none'}",
             f"Z_s = {rep.Z_s}, rho = {rep.rho}, nu = {rep.nu}, phi = {rep.phi}",
             f"z_hat* = {rep.z_hat_star}"]
    lines += [f"estimate: {e.kind} radius {e.radius:.6g} via {e.provenance}"
              + (f", gain {e.gain:.4g}" if e.gain is not None else "") for e in rep.estimates]
    lines += [f"note: {n}" for n in data["notes"]]
    _summary(out, lines)
    if rep.stable == "horizon-inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _planes(args, n):
    if args.planes:
        planes = []
        for chunk in args.planes.split(";"):
            i, j = (int(v) - 1 for v in chunk.split(","))
            planes.append((i, j))
        return tuple(planes)
    if n == 4:
        return ((0, 1), (2, 3))
    return ((0, 1),)


def certified_estimates(an, use_threshold=True, n_grid=101):
    """Region estimates from the criteria plus the auxiliary threshold, if any."""
    notes, estimates = [], []
    rep = an.best_criteria(n_grid=n_grid)
    want = "trapping" if an.F0 > 0 else None
    for e in rep.estimates:
        if want is None or e.kind == want:
            estimates.append(e)
    notes += rep.notes
    if use_threshold:
        try:
            estimates.append(an.threshold())
        except (NoBracket, AuxboundError) as exc:
            notes.append(f"threshold: {exc}")
    return estimates, notes, rep


def cmd_region(args):
    from .plotting import plot_region

    spec = _load(args)
    out = _out(args)
    _manifest(args, out, spec)
    an = analyze(spec, horizon=args.horizon)
    estimates, notes, _ = certified_estimates(an, n_grid=args.zhat_grid)
    planes = _planes(args, spec.n)
    inner_scale = [ellipsoid_projection(e, an.eig, p).radius_at(np.linspace(0, 2 * np.pi, 73)).min()
                   for e in estimates for p in planes if e.radius > 0]
    start = args.radial_start or (0.5 * min(inner_scale) if inner_scale else 0.01)
    cap = args.radial_cap or max(10 * start, 4 * max(inner_scale, default=start))
    cfg = PolarScanConfig(angle_step=args.angle_step, radial_start=start, radial_cap=cap,
                          horizon=args.scan_horizon, planes=planes, rtol=args.rtol,
                          atol=args.atol)
    containment = []
    for plane in planes:
        tag = f"x{plane[0] + 1}_x{plane[1] + 1}"
        boundary = scan_plane(spec, plane, cfg)
        write_csv(out / f"region_{tag}.csv", ["angle_rad", "radius", "x_i", "x_j", "status"],
                  [[p.angle, p.radius, p.x_i, p.x_j, p.status] for p in boundary.points])
        curves = []
        for e in estimates:
            if e.radius <= 0:
                continue
            curve = ellipsoid_projection(e, an.eig, plane)
            label = f"{e.provenance} ({e.kind})"
            curves.append((label, curve))
            write_csv(out / f"ellipse_{e.provenance}_{tag}.csv",
                      ["angle_rad", "radius", "x_i", "x_j", "status"],
                      [[float(a), float(math.hypot(*pt)), float(pt[0]), float(pt[1]), "certified"]
                       for a, pt in zip(curve.angles, curve.points)])
            rep = compare_regions(curve, boundary)
            containment.append({"plane": list(plane), "estimate": e.to_dict(),
                                "violations": rep.violations, "min_ratio": rep.min_ratio,
                                "mean_ratio": rep.mean_ratio, "n_compared": rep.n_compared,
                                "passed": rep.passed})
        plot_region(boundary, curves, out / f"region_{tag}.png")
    write_json(out / "containment.json", {"scan": asdict(cfg), "results": containment,
                                          "notes": notes})
    lines = [f"plane {c['plane']}: {c['estimate']['provenance']} "
             f"{'PASS' if c['passed'] else 'FAIL'} (min ratio {c['min_ratio']:.4g})"
             for c in containment] or ["no certified region to compare"]
    lines += [f"note: {n}" for n in notes]
    _summary(out, lines, "region_summary.txt")
    return EXIT_OK


def cmd_simulate(args):
    from .dynamics import verify_bound
    from .plotting import plot_bound

    spec = _load(args)
    out = _out(args)
    _manifest(args, out, spec)
    an = analyze(spec, horizon=args.horizon)
    if args.x0:
        x0 = np.array([float(v) for v in args.x0.split(",")])
        if x0.shape != (spec.n,):
            raise SpecError(f"--x0 needs {spec.n} comma-separated values")
    else:
        z0 = args.z0 if args.z0 is not None else 0.0
        e1 = np.zeros(spec.n)
        e1[0] = 1.0
        x0 = e1 * (z0 / an.maps.z0(e1))
    horizon = args.horizon or 100.0
    check = verify_bound(spec, an.eig, an.aux, x0, _integrator(args, horizon))
    traj = check.trajectory
    xn = np.linalg.norm(traj.states[:, :spec.n], axis=1)
    z = traj.states[:, spec.n]
    write_csv(out / "trajectory.csv", ["t", "norm_x", "z", "normV_z"],
              zip(traj.times.tolist(), xn.tolist(), z.tolist(), (an.eig.norm_V * z).tolist()))
    plot_bound(traj.times, xn, an.eig.norm_V * z, out / "trajectory.png")
    write_json(out / "simulation.json", {"x0": x0, "z0": an.maps.z0(x0),
                                          "termination": traj.termination,
                                          "max_excess": check.max_excess,
                                          "bound_holds": check.passed,
                                          "steps": check.n_steps})
    _summary(out, [f"x0 = {x0.tolist()}", f"termination: {traj.termination}",
                   f"bound ||x|| <= ||V|| z holds: {check.passed} "
                   f"(max excess {check.max_excess:.3g})"])
    return EXIT_OK


def cmd_benchmark(args):
    out = _out(args)
    _manifest(args, out)
    if args.name == "example2":
        res = example2()
        rows, lines = [], []
        for label, value, expected, tol in res.checks():
            ok = abs(value - expected) <= tol
            rows.append([label, value, expected, tol, "PASS" if ok else "FAIL"])
            lines.append(f"{label:22s} {value:.6f}  expected {expected:.6f} +- {tol:g}  "
                         f"{'PASS' if ok else 'FAIL'}")
        lines.append(f"fixed-point case: {res.case}; runtime {res.seconds:.3f} s")
        write_csv(out / "example2.csv", ["quantity", "value", "expected", "tolerance", "status"],
                  rows)
        write_json(out / "example2.json", asdict(res))
        _summary(out, lines)
        return EXIT_OK
    args.benchmark_spec, args.spec = args.name, None
    sub = out / args.name
    args.out = str(sub)
    code = cmd_criteria(args)
    if code == EXIT_OK:
        code = cmd_region(args)
    return code


def _summary(out, lines, name="summary.txt"):
    text = "\n".join(lines) + "\n"
    (Path(out) / name).write_text(text)
    sys.stdout.write(text)


# -- argument parsing ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="auxbound", description=__doc__)
    p.add_argument("--log-level", default=os.environ.get("AUXBOUND_LOG", "WARNING"))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_spec=True):
        if need_spec:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--spec", help="system description (JSON)")
            g.add_argument("--benchmark-spec", choices=BENCHMARKS,
                           help="use a shipped benchmark system")
            sp.add_argument("--param", action="append", metavar="KEY=VALUE",
                            help="override a spec parameter (repeatable)")
            sp.add_argument("--t0", type=float)
        sp.add_argument("--out", default="auxbound-out")
        sp.add_argument("--horizon", type=float, help="analysis / simulation horizon")
        sp.add_argument("--rtol", type=float, default=1e-8)
        sp.add_argument("--atol", type=float, default=1e-10)
        sp.add_argument("--zhat-grid", type=int, default=101)
        sp.add_argument("--seed", type=int, default=0)

    def region_flags(sp):
        sp.add_argument("--angle-step", type=float, default=math.pi / 60)
        sp.add_argument("--planes", help="coordinate planes, 1-based: '1,2;3,4'")
        sp.add_argument("--radial-start", type=float)
        sp.add_argument("--radial-cap", type=float)
        sp.add_argument("--scan-horizon", type=float, default=100.0)

    sp = sub.add_parser("analyze", help="decomposition, majorants, auxiliary equation")
    common(sp)
    sp.set_defaults(func=cmd_analyze)
    sp = sub.add_parser("criteria", help="stability / boundedness criteria and radii")
    common(sp)
    sp.set_defaults(func=cmd_criteria)
    sp = sub.add_parser("region", help="scan boundaries and check certified ellipsoids")
    common(sp)
    region_flags(sp)
    sp.set_defaults(func=cmd_region)
    sp = sub.add_parser("simulate", help="trajectory with its auxiliary bound")
    common(sp)
    sp.add_argument("--x0", help="comma-separated initial state")
    sp.add_argument("--z0", type=float, help="initial ||V^-1 x0|| along x1")
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("benchmark", help="scripted reproduction runs")
    sp.add_argument("name", choices=("example2",) + BENCHMARKS)
    common(sp, need_spec=False)
    region_flags(sp)
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.set_defaults(func=cmd_benchmark, t0=None, spec=None, benchmark_spec=None)
    return p


def _error(kind, exc, code):
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": str(exc),
                                           "exit_code": code}}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (SpecError, FileNotFoundError, PermissionError) as exc:
        return _error(type(exc).__name__, exc, EXIT_INPUT)
    except (DefectiveMatrix, KappaNonNegative, EmptyCertifiedInterval, NegativeRadius) as exc:
        return _error(type(exc).__name__, exc, EXIT_INAPPLICABLE)
    except HorizonInconclusive as exc:
        return _error(type(exc).__name__, exc, EXIT_INCONCLUSIVE)
    except AuxboundError as exc:
        return _error(type(exc).__name__, exc, EXIT_INAPPLICABLE)


if __name__ == "__main__":
    sys.exit(main())
