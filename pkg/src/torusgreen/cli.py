"""Command line front end.

Subcommands: lattice-info, critpoints, disks, hitchin-check, pvi-check,
basins, liouville-check, scan.  Complex literals are written `a+bi` (no
whitespace, exponent notation allowed, `i`/`2i` pure-imaginary forms).
Exit codes: 0 success, 2 usage error, 3 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

import numpy as np

from . import figures
from .critpoints import (
    FinderOptions,
    InternalConsistencyError,
    find_critical_points_G,
    find_critical_points_Gp,
)
from .degeneracy import all_disks, boundary_intersection_angle
from .dynamics import (
    FinderShortfallError,
    OrbitOptions,
    attracting_fixed_points,
    g_map,
    make_antimap,
)
from .elliptic import DomainError, make_lattice, reduce_to_cell, torus_distance, wp
from .green import hessian_Gp
from .hitchin import (
    BranchJumpError,
    InversionError,
    f_rs,
    hessian_via_hitchin,
    jacobian_f,
    pvi_residual,
    wp_inverse,
)
from .liouville import developing_maps_from, pde_residual
from .scan import ScanConfig, run_scan, samples_to_csv, samples_to_json

USAGE_ERROR = 2
CONSISTENCY_ERROR = 3

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_RE_FULL = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)i$")
_RE_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_RE_REAL = re.compile(rf"^(?P<re>[+-]?{_NUM})$")


class UsageError(ValueError):
    pass


def parse_complex(token: str) -> complex:
    """Parse `a+bi` CLI literals; raises UsageError on malformed input."""
    t = token.strip()
    m = _RE_FULL.match(t)
    if m:
        im = m.group("im")
        if im in ("+", "-"):
            im += "1"
        return complex(float(m.group("re")), float(im))
    m = _RE_IMAG.match(t)
    if m:
        im = m.group("im")
        if im in ("", "+", "-"):
            im += "1"
        return complex(0.0, float(im))
    m = _RE_REAL.match(t)
    if m:
        return complex(float(m.group("re")), 0.0)
    raise UsageError(f"malformed complex literal: {token!r}")


def format_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


def _cplx(z: complex | None):
    return None if z is None else {"re": z.real, "im": z.imag}


def _emit(payload: dict, args) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        _emit_text(payload)


def _emit_text(payload: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, val in payload.items():
        if isinstance(val, dict) and set(val) == {"re", "im"}:
            print(f"{pad}{key}: {format_complex(complex(val['re'], val['im']))}")
        elif isinstance(val, dict):
            print(f"{pad}{key}:")
            _emit_text(val, indent + 1)
        elif isinstance(val, list):
            print(f"{pad}{key}:")
            for item in val:
                if isinstance(item, dict) and set(item) == {"re", "im"}:
                    print(f"{pad}  {format_complex(complex(item['re'], item['im']))}")
                elif isinstance(item, dict):
                    _emit_text(item, indent + 1)
                    print()
                else:
                    print(f"{pad}  {item}")
        else:
            print(f"{pad}{key}: {val}")


def _point_payload(c) -> dict:
    return {
        "z": _cplx(c.location.z),
        "r": c.location.r,
        "s": c.location.s,
        "kind": c.kind,
        "det": c.hessian.det,
        "classification": c.classification,
        "local_degree": c.local_degree,
        "residual": c.gradient_residual,
    }


def cmd_lattice_info(args) -> int:
    L = make_lattice(args.tau)
    legendre = abs(L.tau * L.eta1 - L.eta2 - 2j * math.pi)
    payload = {
        "tau": _cplx(L.tau),
        "im_tau": L.im_tau,
        "omega": [_cplx(w) for w in L.omega],
        "eta1": _cplx(L.eta1),
        "eta2": _cplx(L.eta2),
        "e1": _cplx(L.e1),
        "e2": _cplx(L.e2),
        "e3": _cplx(L.e3),
        "g2": _cplx(L.g2),
        "g3": _cplx(L.g3),
        "nome": _cplx(L.nome),
        "legendre_residual": legendre,
    }
    _emit(payload, args)
    return 0


def cmd_critpoints(args) -> int:
    L = make_lattice(args.tau)
    opts = FinderOptions(newton_tol=args.tol) if args.tol else FinderOptions()
    if args.p is None:
        cs = find_critical_points_G(L, opts)
    else:
        cs = find_critical_points_Gp(args.p, L, opts)
    payload = {
        "tau": _cplx(L.tau),
        "p": _cplx(cs.p),
        "count": cs.count,
        "degree_sum": cs.degree_sum,
        "all_nondegenerate": cs.all_nondegenerate,
        "points": [_point_payload(c) for c in cs.points],
    }
    _emit(payload, args)
    return 0


def cmd_disks(args) -> int:
    L = make_lattice(args.tau)
    entries = []
    for d in all_disks(L):
        entries.append(
            {
                "k": d.k,
                "kind": d.kind,
                "center": _cplx(d.center),
                "radius": d.radius,
                "alpha": _cplx(d.alpha),
                "e_k": _cplx(d.ek),
                "flipped": d.flipped,
                "condition": d.condition,
            }
        )
    angle = boundary_intersection_angle(L, 0, 2)
    payload = {
        "tau": _cplx(L.tau),
        "disks": entries,
        "b0_b2_intersection_angle": angle,
    }
    _emit(payload, args)
    if args.figure:
        figures.disk_figure(L, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_hitchin_check(args) -> int:
    L = make_lattice(args.tau)
    sample = f_rs(args.r, args.s, L)
    payload = {
        "tau": _cplx(L.tau),
        "r": args.r,
        "s": args.s,
        "f": _cplx(sample.f_value) if sample.finite else "infinity",
        "in_U": sample.in_U,
    }
    if sample.in_U:
        p, _ = wp_inverse(sample.f_value, L)
        jac = jacobian_f(args.r, args.s, L)
        q = args.r + args.s * L.tau
        payload.update(
            {
                "p": _cplx(p),
                "det_jac": float(np.linalg.det(jac)),
                "hessian_cross_check": {
                    "via_f": hessian_via_hitchin(args.r, args.s, L),
                    "direct": hessian_Gp(q, p, L).det,
                },
                "pvi_residual": pvi_residual(args.r, args.s, args.tau, args.dtau),
            }
        )
    _emit(payload, args)
    return 0


def cmd_pvi_check(args) -> int:
    res_h = pvi_residual(args.r, args.s, args.tau, args.dtau, five_point=args.five_point)
    res_2h = pvi_residual(args.r, args.s, args.tau, 2.0 * args.dtau, five_point=args.five_point)
    payload = {
        "tau": _cplx(args.tau),
        "r": args.r,
        "s": args.s,
        "dtau": args.dtau,
        "residual": res_h,
        "residual_2h": res_2h,
        "step_ratio": res_2h / res_h if res_h > 0 else math.inf,
    }
    _emit(payload, args)
    return 0


def cmd_basins(args) -> int:
    L = make_lattice(args.tau)
    P = make_antimap(args.p, L)
    fps = attracting_fixed_points(P, OrbitOptions(max_iter=args.max_iter))
    n = args.grid
    ticks = (np.arange(n) + 0.5) / n
    rr, ss = np.meshgrid(ticks, ticks, indexing="ij")
    z = (rr + ss * L.tau).ravel()
    cur = z.copy()
    state = np.zeros(z.shape, dtype=int)  # 0 running, 1 settled, 2 escaped
    for _ in range(args.max_iter):
        act = state == 0
        if not act.any():
            break
        zi = cur[act]
        escaped = (
            np.minimum(torus_distance(zi, P.p, L), torus_distance(zi, -P.p, L)) < 1e-3
        )
        znew = reduce_to_cell(g_map(g_map(zi, P), P), L)
        moved = torus_distance(znew, zi, L)
        escaped |= ~np.isfinite(moved)
        settled = ~escaped & (moved < 1e-9)
        cur[act] = np.where(escaped, zi, znew)
        state[act] = np.where(escaped, 2, np.where(settled, 1, 0))
    labels = np.full(z.shape, -1, dtype=int)
    for gi in np.flatnonzero(state == 1):
        for li, f in enumerate(fps):
            if torus_distance(cur[gi], f, L) < 1e-5:
                labels[gi] = li
                break
    rows = ["re,im,label"]
    for zi, lab in zip(z, labels):
        rows.append(f"{zi.real:.12g},{zi.imag:.12g},{lab}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"{len(z)} orbits, {len(fps)} attracting fixed points -> {args.out}")
    else:
        sys.stdout.write(text)
    if args.figure:
        figures.basin_figure(z.real, z.imag, labels, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_liouville_check(args) -> int:
    L = make_lattice(args.tau)
    cs = find_critical_points_Gp(args.p, L)
    maps = developing_maps_from(cs, L)
    if not maps:
        payload = {
            "tau": _cplx(L.tau),
            "p": _cplx(complex(args.p)),
            "count": cs.count,
            "solutions": 0,
            "note": "no nontrivial critical points: no solution family exists",
        }
        _emit(payload, args)
        return 0
    D = maps[0]
    sol = pde_residual(D, L, beta=args.beta, grid_n=args.grid, rho=args.rho)
    payload = {
        "tau": _cplx(L.tau),
        "p": _cplx(D.p),
        "q": _cplx(D.q),
        "beta": sol.beta,
        "grid": sol.grid_n,
        "rho": sol.rho,
        "solutions": len(maps),
        "residual_max": sol.residual_max,
        "residual_mean": sol.residual_mean,
        "evaluated": sol.evaluated,
        "skipped": sol.skipped,
        "mass": sol.mass,
        "mass_target": 8.0 * math.pi,
    }
    _emit(payload, args)
    if args.out:
        n = sol.grid_n
        ticks = (np.arange(n) + 0.5) / n
        with open(args.out, "w") as fh:
            fh.write("re,im,u\n")
            for i in range(n):
                for j in range(n):
                    zij = ticks[i] + ticks[j] * L.tau
                    fh.write(f"{zij.real:.12g},{zij.imag:.12g},{sol.u[i, j]:.12g}\n")
        print(f"field dump -> {args.out}", file=sys.stderr)
    if args.figure:
        figures.field_figure(sol.u, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_scan(args) -> int:
    cfg = ScanConfig(
        tau=args.tau,
        grid=args.grid,
        mode=args.mode,
        seed_density=args.seed_density,
        out=args.out,
        fmt=args.format,
        workers=args.workers,
        wp_window=tuple(args.window) if args.window else None,
        p_window=tuple(args.p_window) if args.p_window else None,
    )
    samples, summary = run_scan(cfg)
    text = (
        samples_to_csv(samples)
        if cfg.fmt == "csv"
        else samples_to_json(cfg, samples, summary)
    )
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"scan: {summary['evaluated']} samples ({summary['excluded']} excluded, "
        f"{summary['invalid']} invalid, {summary['menu_violations']} menu violations)",
        file=sys.stderr,
    )
    for key, cnt in summary["histogram"].items():
        print(f"  {key}: {cnt}", file=sys.stderr)
    if args.figure:
        figures.phase_figure(samples, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    if summary["menu_violations"] > 0:
        return CONSISTENCY_ERROR
    return 0


def _add_common(sp, with_p=False):
    sp.add_argument("--tau", type=parse_complex, required=True, help="lattice parameter a+bi")
    if with_p:
        sp.add_argument("--p", type=parse_complex, default=None, help="pole location a+bi")
    sp.add_argument("--tol", type=float, default=None, help="solver tolerance override")
    sp.add_argument("--json", action="store_true", help="JSON output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="torusgreen",
        description="Green functions on flat tori: critical points, degeneracy "
        "geometry, and explicit curvature-equation solutions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("lattice-info", help="lattice constants for tau")
    _add_common(sp)
    sp.set_defaults(func=cmd_lattice_info)

    sp = sub.add_parser("critpoints", help="critical points of G (or G_p with --p)")
    _add_common(sp, with_p=True)
    sp.set_defaults(func=cmd_critpoints)

    sp = sub.add_parser("disks", help="degeneracy regions B_0..B_3")
    _add_common(sp)
    sp.add_argument("--figure", default=None, help="render the regions to this file")
    sp.set_defaults(func=cmd_disks)

    sp = sub.add_parser("hitchin-check", help="f(r,s), inversion and Jacobian checks")
    _add_common(sp)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--dtau", type=float, default=1e-3)
    sp.set_defaults(func=cmd_hitchin_check)

    sp = sub.add_parser("pvi-check", help="second-derivative residual along a tau line")
    _add_common(sp)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--dtau", type=float, default=1e-3)
    sp.add_argument("--five-point", action="store_true")
    sp.set_defaults(func=cmd_pvi_check)

    sp = sub.add_parser("basins", help="attraction basin raster for the fixed point map")
    _add_common(sp, with_p=True)
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--max-iter", type=int, default=2000)
    sp.add_argument("--out", default=None, help="CSV path (default stdout)")
    sp.add_argument("--figure", default=None)
    sp.set_defaults(func=cmd_basins)

    sp = sub.add_parser("liouville-check", help="residual of the explicit solution field")
    _add_common(sp, with_p=True)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--rho", type=float, default=0.05)
    sp.add_argument("--out", default=None, help="CSV field dump path")
    sp.add_argument("--figure", default=None)
    sp.set_defaults(func=cmd_liouville_check)

    sp = sub.add_parser("scan", help="sweep p (or wp(p)) and report counts")
    _add_common(sp)
    sp.add_argument("--mode", choices=("p", "wp"), default="p")
    sp.add_argument("--grid", type=int, default=32)
    sp.add_argument("--seed-density", type=int, default=16)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument(
        "--window",
        type=float,
        nargs=4,
        default=None,
        metavar=("RE0", "RE1", "IM0", "IM1"),
        help="wp-mode rectangle (default [-6pi, 6pi]^2)",
    )
    sp.add_argument(
        "--p-window",
        type=float,
        nargs=4,
        default=None,
        metavar=("R0", "R1", "S0", "S1"),
        help="p-mode (r, s) window (default the whole cell)",
    )
    sp.add_argument("--figure", default=None)
    sp.set_defaults(func=cmd_scan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself; normalize to a return code
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (InternalConsistencyError, FinderShortfallError, InversionError, BranchJumpError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return CONSISTENCY_ERROR


if __name__ == "__main__":
    sys.exit(main())
