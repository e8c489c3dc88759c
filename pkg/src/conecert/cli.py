"""Command-line front end: certify, solve, curves, envelope-demo.

Exit codes: 0 when the requested run certified/converged/passed, 1 when it
ran but the verdict is negative (not certified, unconverged, inadmissible
curves, demo check failed), 2 on usage or configuration errors.  All
emitted artifacts are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .certifier import certificate_json, certify
from .cone import GridFunction
from .config import ProblemConfig, build_problem, load_config
from .envelope2d import (
    annulus_fixed_point_scan,
    cc_envelope,
    envelope_condition_check,
    polar_jump_operator,
    polygon_diameter,
    hausdorff_distance,
)
from .errors import ConecertError, DivergenceError
from .expressions import parse_expression
from .hammerstein import annulus_seed, apply_T, solve_fixed_point
from .nonlinearity import classify_curve

__all__ = ["main"]


def _meta(cfg: ProblemConfig, grid_n: int, seed: int) -> dict:
    return {
        "config_name": cfg.name,
        "grid_n": grid_n,
        "seed": seed,
        "tool": f"conecert {__version__}",
    }


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _certify_from_config(cfg: ProblemConfig, problem, grid_n: int, seed: int):
    """Run the certifier, scanning the configured eps list in order."""
    cc = cfg.certify
    cert = None
    for eps in cc.eps_values:
        cert = certify(problem, cc.rho1, cc.rho2, eps, margin=cc.margin,
                       branch=cc.branch, meta=_meta(cfg, grid_n, seed))
        if cert.certified:
            break
    return cert


def cmd_certify(args) -> int:
    cfg = load_config(args.config)
    if cfg.certify is None:
        raise ConecertError("this config has no [certify] section")
    grid_n = args.grid or cfg.grid_n
    problem = build_problem(cfg, grid_n=grid_n,
                            base_dir=os.path.dirname(os.path.abspath(args.config)))
    os.makedirs(args.out, exist_ok=True)

    if args.rho_scan:
        pairs = []
        for item in args.rho_scan.split(","):
            try:
                r1, r2 = (float(v) for v in item.split(":"))
            except ValueError:
                raise ConecertError(
                    f"--rho-scan expects rho1:rho2 pairs, got {item!r}")
            pairs.append((r1, r2))
        results = []
        best = None
        for r1, r2 in pairs:
            cert = None
            for eps in cfg.certify.eps_values:
                cert = certify(problem, r1, r2, eps, margin=cfg.certify.margin,
                               branch=cfg.certify.branch,
                               meta=_meta(cfg, grid_n, args.seed))
                if cert.certified:
                    break
            results.append({"rho1": r1, "rho2": r2, "eps": cert.eps,
                            "verdict": cert.verdict,
                            "worst_margin": min(c.margin for c in cert.conditions)})
            if best is None or (cert.certified and not best.certified):
                best = cert
        _write(os.path.join(args.out, "certificate_scan.json"),
               json.dumps(results, sort_keys=True, indent=2) + "\n")
        cert = best
    else:
        cert = _certify_from_config(cfg, problem, grid_n, args.seed)

    _write(os.path.join(args.out, "certificate.json"), certificate_json(cert))
    print(f"verdict: {cert.verdict} (branch {cert.branch}, "
          f"annulus {cert.annulus})")
    return 0 if cert.certified else 1


def _load_certificate_annulus(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return tuple(float(v) for v in data["annulus"])


def _initial_iterate(cfg: ProblemConfig, problem, annulus):
    mode = cfg.solve.init if cfg.solve else "zero"
    if mode == "zero":
        return GridFunction.zeros(problem.grid)
    if mode == "annulus":
        if annulus is None:
            raise ConecertError(
                "init = annulus needs a certificate (file or [certify] section)")
        return annulus_seed(problem, annulus[0], annulus[1])
    expr = parse_expression(mode[len("expr:"):], ("t",))
    return GridFunction.from_callable(
        problem.grid, lambda t: np.broadcast_to(
            np.asarray(expr(t=t), dtype=float), t.shape))


def _solution_csv(problem, sol, meta: dict) -> str:
    Tu = apply_T(problem, sol.u)
    lines = [f"# {k}: {v}" for k, v in sorted(meta.items())]
    lines.append("t,u,Tu,residual")
    for t, u, tu in zip(problem.grid.nodes, sol.u.values, Tu.values):
        lines.append(f"{float(t)!r},{float(u)!r},{float(tu)!r},"
                     f"{abs(float(u) - float(tu))!r}")
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    grid_n = args.grid or cfg.grid_n
    problem = build_problem(cfg, grid_n=grid_n,
                            base_dir=os.path.dirname(os.path.abspath(args.config)))
    os.makedirs(args.out, exist_ok=True)

    cert = None
    annulus = None
    if args.certificate:
        annulus = _load_certificate_annulus(args.certificate)
        cert_verdict = "unknown"
    elif cfg.certify is not None:
        cert = _certify_from_config(cfg, problem, grid_n, args.seed)
        annulus = cert.annulus
        cert_verdict = cert.verdict
    else:
        cert_verdict = "absent"

    solve_cfg = cfg.solve
    theta = solve_cfg.theta if solve_cfg else 0.5
    tol = solve_cfg.tol if solve_cfg else 1e-8
    max_iter = solve_cfg.max_iter if solve_cfg else 200

    init = _initial_iterate(cfg, problem, annulus)
    try:
        sol = solve_fixed_point(problem, init, theta=theta, tol=tol,
                                max_iter=max_iter, certificate=annulus)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 1

    meta = _meta(cfg, grid_n, args.seed)
    meta.update({
        "theta": theta, "tol": tol, "max_iter": max_iter,
        "converged": sol.converged, "iterations": sol.iterations,
        "residual_sup": sol.residual_sup, "norm": sol.norm,
        "in_cone": sol.in_cone, "annulus_ok": sol.annulus_ok,
        "q_bound_ok": sol.q_bound_ok,
    })
    _write(os.path.join(args.out, "solution.csv"),
           _solution_csv(problem, sol, meta))
    if args.plot:
        Tu = apply_T(problem, sol.u)
        _write(os.path.join(args.out, "solution.svg"),
               _svg_lines(problem.grid.nodes,
                          [("u", sol.u.values), ("Tu", Tu.values)],
                          title="fixed-point iterate"))

    status = "converged" if sol.converged else "unconverged"
    print(f"{status}: iterations={sol.iterations} "
          f"residual={sol.residual_sup:.3e} norm={sol.norm:.6g} "
          f"in_cone={sol.in_cone} annulus_ok={sol.annulus_ok} "
          f"q_bound_ok={sol.q_bound_ok}")
    if not sol.converged and cert_verdict == "certified":
        print("certified but not located: the certificate guarantees a "
              "fixed point, but the iteration did not reach it")
    return 0 if sol.converged else 1


def cmd_curves(args) -> int:
    cfg = load_config(args.config)
    grid_n = args.grid or cfg.grid_n
    problem = build_problem(cfg, grid_n=grid_n,
                            base_dir=os.path.dirname(os.path.abspath(args.config)))
    os.makedirs(args.out, exist_ok=True)

    lines = []
    all_ok = True
    for curve in problem.f.curves:
        report = classify_curve(curve, problem.f, problem.weight, problem.grid)
        all_ok &= report.passed
        lines.append(
            f"{curve.label or 'curve'}: declared={curve.kind} "
            f"checked={report.checked} passed={report.passed} "
            f"worst_margin={report.worst_margin!r} "
            f"at={report.worst_point} inequality={report.inequality} "
            f"gamma2={report.gamma2_source}"
        )
    if not problem.f.curves:
        lines.append("no declared curves")
    lines.append(f"all admissible: {'yes' if all_ok else 'no'}")
    text = "\n".join(lines) + "\n"
    _write(os.path.join(args.out, "curves.txt"), text)
    print(text, end="")
    return 0 if all_ok else 1


def cmd_envelope_demo(args) -> int:
    if not (0 < args.r < args.R):
        raise ConecertError("need 0 < r < R")
    os.makedirs(args.out, exist_ok=True)
    T = polar_jump_operator(args.r)

    diag = (args.r / np.sqrt(2.0), args.r / np.sqrt(2.0))
    approx = cc_envelope(T, diag)
    triangle = np.array([[0.0, 0.0], [args.r, 0.0], [0.0, args.r]])
    tri_dist = hausdorff_distance(approx.intersection, triangle)
    for i, (eps, hull) in enumerate(zip(approx.eps_ladder, approx.hulls)):
        rows = ["x,y"] + [f"{float(p[0])!r},{float(p[1])!r}" for p in hull]
        _write(os.path.join(args.out, f"envelope_hull_eps{i}.csv"),
               "\n".join(rows) + f"\n# eps = {float(eps)!r}\n")

    off = (0.5 * args.r, 0.5 * args.r)
    off_approx = cc_envelope(T, off)
    off_diam = polygon_diameter(off_approx.intersection)

    scan = annulus_fixed_point_scan(T, args.r, args.R, n=args.grid)
    condition = envelope_condition_check(T, np.asarray(diag), approx)

    passed = (tri_dist < 1e-2 * args.r and off_diam < 1e-6
              and scan.min_residual > 0.05 * args.r and condition)
    report = "\n".join([
        f"r = {float(args.r)!r}, R = {float(args.R)!r}, scan grid = {args.grid}",
        f"envelope at the diagonal circle point: hull-to-triangle "
        f"Hausdorff distance = {float(tri_dist)!r}",
        f"envelope at an off-circle point: diameter = {float(off_diam)!r}",
        f"fixed-point compatibility at the diagonal point: {condition}",
        f"annulus scan: min residual = {float(scan.min_residual)!r} at "
        f"rho={float(scan.argmin_polar[0])!r}, "
        f"theta={float(scan.argmin_polar[1])!r}",
        f"pass: {'yes' if passed else 'no'}",
    ]) + "\n"
    _write(os.path.join(args.out, "envelope_scan.txt"), report)
    print(report, end="")

    if args.plot:
        polys = [(f"eps={e:.4g}", hull)
                 for e, hull in zip(approx.eps_ladder, approx.hulls)]
        _write(os.path.join(args.out, "envelope.svg"),
               _svg_polygons(polys, extra_points=[diag],
                             title="envelope hulls at the diagonal point"))
    return 0 if passed else 1


def _svg_header(w: int, h: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="10" y="16" font-size="12" font-family="monospace">'
        f'{title}</text>',
    ]


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _svg_lines(xs, series, title: str, w: int = 640, h: int = 420) -> str:
    xs = np.asarray(xs, dtype=float)
    all_y = np.concatenate([np.asarray(ys, dtype=float) for _, ys in series])
    y_lo, y_hi = float(np.min(all_y)), float(np.max(all_y))
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad, pw, ph = 40, w - 80, h - 80

    def sx(x):
        return pad + pw * (x - xs[0]) / (xs[-1] - xs[0])

    def sy(y):
        return h - pad - ph * (y - y_lo) / (y_hi - y_lo)

    out = _svg_header(w, h, title)
    out.append(f'<rect x="{pad}" y="{pad}" width="{pw}" height="{ph}" '
               'fill="none" stroke="#999"/>')
    for i, (label, ys) in enumerate(series):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        out.append(f'<text x="{pad + 8 + 90 * i}" y="{h - 12}" font-size="11" '
                   f'font-family="monospace" fill="{color}">{label}</text>')
    out.append(f'<text x="{pad}" y="{pad - 6}" font-size="10" '
               f'font-family="monospace">y in [{y_lo:.4g}, {y_hi:.4g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _svg_polygons(polygons, extra_points=(), title: str = "",
                  w: int = 480, h: int = 480) -> str:
    allp = np.vstack([np.asarray(v, dtype=float).reshape(-1, 2)
                      for _, v in polygons] +
                     [np.asarray(extra_points, dtype=float).reshape(-1, 2)]
                     if extra_points else
                     [np.asarray(v, dtype=float).reshape(-1, 2)
                      for _, v in polygons])
    lo = float(np.min(allp)) - 0.1
    hi = float(np.max(allp)) + 0.1
    pad, size = 40, w - 80

    def s(v):
        return pad + size * (v - lo) / (hi - lo)

    out = _svg_header(w, h, title)
    for i, (label, verts) in enumerate(polygons):
        verts = np.asarray(verts, dtype=float).reshape(-1, 2)
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        pts = " ".join(f"{s(p[0]):.2f},{h - s(p[1]):.2f}" for p in verts)
        out.append(f'<polygon points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.2"/>')
        out.append(f'<text x="{pad}" y="{pad + 14 * (i + 1)}" font-size="10" '
                   f'font-family="monospace" fill="{color}">{label}</text>')
    for p in extra_points:
        out.append(f'<circle cx="{s(p[0]):.2f}" cy="{h - s(p[1]):.2f}" r="3" '
                   'fill="#000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conecert",
        description="existence certificates and numerical solutions for "
                    "positive solutions of boundary value problems with "
                    "jump nonlinearities",
    )
    parser.add_argument("--version", action="version",
                        version=f"conecert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="problem file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid", type=int, default=None,
                       help="override the grid node count")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded in artifacts and used by "
                            "randomized probes")
        p.add_argument("--plot", action="store_true",
                       help="also emit SVG plots")

    p = sub.add_parser("certify", help="emit an existence certificate")
    common(p)
    p.add_argument("--rho-scan", default=None,
                   help="comma list of rho1:rho2 pairs to scan")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("solve", help="run the damped fixed-point iteration")
    common(p)
    p.add_argument("--certificate", default=None,
                   help="certificate.json to take the annulus from")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("curves", help="classify the declared jump curves")
    common(p)
    p.set_defaults(fn=cmd_curves)

    p = sub.add_parser("envelope-demo",
                       help="run the planar envelope worked example")
    common(p, needs_config=False)
    p.add_argument("--r", type=float, default=1.0, help="circle radius")
    p.add_argument("--R", type=float, default=2.0, help="outer radius")
    p.set_defaults(fn=cmd_envelope_demo)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 1
    except ConecertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
