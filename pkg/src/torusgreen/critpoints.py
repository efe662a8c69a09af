"""Locate, deduplicate and classify all critical points of G and G_p.

The finder runs capped Newton iterations on the real gradient (gx, gy) with
the analytic Hessian as Jacobian, starting from a uniform (r, s) seed grid
plus the half periods plus small rings around the poles.  The gradient field
is lattice periodic, so every iterate is reduced back to the fundamental
cell; results are deduplicated on the torus metric and closed under negation
(G and G_p are even, so nontrivial critical points come in +/- pairs and the
half periods are critical by symmetry).

Counts obey:  G has 3 or 5 critical points, G_p (p not a half period) has
4, 6, 8 or 10.  When every point is non-degenerate the local degrees
sign(det D^2) sum to -1 for G and -2 for G_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .elliptic import LatticeData, TorusPoint
from .green import HessianData, _make_hessian, gradient_and_hessian_arrays, wp


class InternalConsistencyError(RuntimeError):
    """The finder produced a set violating a structural guarantee."""


class DegenerateSetError(RuntimeError):
    """Degree bookkeeping requested on a set with degenerate points."""


@dataclass(frozen=True)
class FinderOptions:
    newton_tol: float = 1e-11
    dedupe_radius: float = 1e-6
    seed_density: int = 16
    max_iter: int = 50
    step_cap: float = 0.25  # in lattice diameters
    det_tol_factor: float = 1e-9  # degeneracy tolerance = factor / Im(tau)^2
    # near a degenerate critical point the gradient vanishes quadratically
    # along the null direction, so |grad| < newton_tol marks out a smear of
    # width ~sqrt(newton_tol); clusters closer than this merge when one side
    # is degenerate (a fold closer than sqrt(tol) is unresolvable anyway)
    degenerate_merge_radius: float = 2e-4


@dataclass(frozen=True)
class CriticalPoint:
    location: TorusPoint
    kind: str  # "trivial" | "nontrivial"
    hessian: HessianData
    classification: str  # "saddle" | "minimum" | "degenerate"
    local_degree: int
    gradient_residual: float


@dataclass
class CriticalSet:
    points: list[CriticalPoint]
    count: int
    degree_sum: int | None
    all_nondegenerate: bool
    tau: complex
    p: complex | None = None

    @property
    def trivial(self) -> list[CriticalPoint]:
        return [c for c in self.points if c.kind == "trivial"]

    @property
    def nontrivial(self) -> list[CriticalPoint]:
        return [c for c in self.points if c.kind == "nontrivial"]

    def nontrivial_pairs(self) -> list[tuple[CriticalPoint, CriticalPoint]]:
        """The +/- pairs among nontrivial points, one tuple per orbit."""
        pairs, used = [], set()
        pts = self.nontrivial
        for i, c in enumerate(pts):
            if i in used:
                continue
            for j in range(i + 1, len(pts)):
                if j in used:
                    continue
                # partner is -c modulo the lattice
                d = _tdist(pts[j].location.z, -c.location.z, self.tau)
                if d < 1e-6:
                    pairs.append((c, pts[j]))
                    used.update((i, j))
                    break
        return pairs


def _tdist(z1, z2, tau):
    im = tau.imag
    d = np.asarray(z1, dtype=complex) - np.asarray(z2, dtype=complex)
    s = d.imag / im
    r = d.real - s * tau.real
    d0 = (r - np.round(r)) + (s - np.round(s)) * tau
    return np.abs(d0)


def classify(hessian: HessianData, tol: float) -> str:
    """saddle / minimum / degenerate from det and trace.

    trace = 1/Im tau > 0 always, so det > tol can only be a minimum.
    """
    if hessian.det < -tol:
        return "saddle"
    if hessian.det > tol:
        return "minimum"
    return "degenerate"


def seed_grid(L: LatticeData, density: int, p: complex | None = None) -> list[TorusPoint]:
    """density x density uniform seeds plus half periods plus pole rings.

    All seeds have (r, s) in [0, 1)^2.
    """
    if density < 16:
        raise ValueError("seed density must be >= 16")
    ticks = (np.arange(density) + 0.5) / density
    rr, ss = np.meshgrid(ticks, ticks, indexing="ij")
    pts = [(float(r), float(s)) for r, s in zip(rr.ravel(), ss.ravel())]
    pts += [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
    if p is not None:
        ring_r = 0.07 * min(1.0, L.im_tau)
        for center in (complex(p), -complex(p)):
            for k in range(8):
                zc = center + ring_r * np.exp(2j * math.pi * (k + 0.5) / 8.0)
                s = zc.imag / L.im_tau
                r = zc.real - s * L.tau.real
                pts.append((r % 1.0, s % 1.0))
    return [
        TorusPoint(z=r + s * L.tau, r=r, s=s, cell=(0, 0)) for r, s in pts
    ]


def _newton_solve(z0: np.ndarray, p, L: LatticeData, opts: FinderOptions) -> np.ndarray:
    """Capped Newton on the real gradient from the seed array; converged roots."""
    z = np.asarray(z0, dtype=complex).copy()
    cap = opts.step_cap * max(1.0, abs(L.tau))
    alive = np.ones(z.shape, dtype=bool)
    done = np.zeros(z.shape, dtype=bool)
    for _ in range(opts.max_iter):
        idx = alive & ~done
        if not idx.any():
            break
        gx, gy, gxx, gxy, gyy = gradient_and_hessian_arrays(z[idx], p, L)
        res = np.hypot(gx, gy)
        det = gxx * gyy - gxy * gxy
        bad = ~np.isfinite(res) | (np.abs(det) < 1e-14)
        conv = (res < opts.newton_tol) & ~bad
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = (-gx * gyy + gy * gxy) / det
            dy = (-gy * gxx + gx * gxy) / det
            norm = np.hypot(dx, dy)
            scale = np.where(norm > cap, cap / np.where(norm == 0, 1.0, norm), 1.0)
            step = (dx + 1j * dy) * scale
        zi = z[idx]
        znew = zi + np.where(conv | bad, 0.0, step)
        # the gradient field is lattice periodic: keep iterates in the cell
        s = znew.imag / L.im_tau
        r = znew.real - s * L.tau.real
        znew = (r - np.floor(r)) + (s - np.floor(s)) * L.tau
        z[idx] = znew
        sub_done = done[idx]
        sub_done |= conv
        done[idx] = sub_done
        sub_alive = alive[idx]
        sub_alive &= ~bad
        alive[idx] = sub_alive
    if not done.any():
        return np.empty(0, dtype=complex)
    zc = z[done]
    gx, gy, *_ = gradient_and_hessian_arrays(zc, p, L)
    ok = np.hypot(gx, gy) < opts.newton_tol
    return zc[ok]


def _dedupe(zs: np.ndarray, L: LatticeData, radius: float) -> list[complex]:
    """Cluster on the torus metric; representative = lexicographic min (r, s)."""
    reps: list[complex] = []
    coords: list[tuple[float, float]] = []
    order = sorted(
        (complex(z) for z in zs),
        key=lambda z: (round(z.real, 9), round(z.imag, 9)),
    )
    for z in order:
        s = z.imag / L.im_tau
        r = z.real - s * L.tau.real
        r, s = r % 1.0, s % 1.0
        hit = False
        for i, w in enumerate(reps):
            if _tdist(z, w, L.tau) < radius:
                if (r, s) < coords[i]:
                    reps[i] = r + s * L.tau
                    coords[i] = (r, s)
                hit = True
                break
        if not hit:
            reps.append(r + s * L.tau)
            coords.append((r, s))
    return reps


def _grad_residual(z: complex, p, L: LatticeData) -> float:
    gx, gy, *_ = gradient_and_hessian_arrays(np.array([z]), p, L)
    return float(np.hypot(gx, gy)[0])


def _build_point(z: complex, kind: str, p, L: LatticeData, det_tol: float) -> CriticalPoint:
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    loc = TorusPoint(z=z, r=r, s=s, cell=(int(math.floor(r)), int(math.floor(s))))
    if p is None:
        A = wp(z, L) + L.eta1
    else:
        A = 0.5 * (wp(z + p, L) + wp(z - p, L)) + L.eta1
    hess = _make_hessian(A, L)
    cls = classify(hess, det_tol)
    deg = 0 if cls == "degenerate" else (1 if hess.det > 0 else -1)
    return CriticalPoint(
        location=loc,
        kind=kind,
        hessian=hess,
        classification=cls,
        local_degree=deg,
        gradient_residual=_grad_residual(z, p, L),
    )


def _merge_degenerate_smears(
    points: list[CriticalPoint], L: LatticeData, opts: FinderOptions
) -> list[CriticalPoint]:
    """Collapse clusters of converged iterates around a degenerate point.

    Preference inside a merged cluster: the exact half period if present,
    otherwise the member with the smallest |det| (closest to the degenerate
    center).  Clusters only merge when at least one side is degenerate.
    """

    def better(a: CriticalPoint, b: CriticalPoint) -> CriticalPoint:
        if (a.kind == "trivial") != (b.kind == "trivial"):
            return a if a.kind == "trivial" else b
        return a if abs(a.hessian.det) <= abs(b.hessian.det) else b

    # absorbers (degenerate, then trivial, then smallest |det|) must enter the
    # merged list before the smear points that fall into their radius
    ordered = sorted(
        points,
        key=lambda c: (
            c.classification != "degenerate",
            c.kind != "trivial",
            abs(c.hessian.det),
        ),
    )
    merged: list[CriticalPoint] = []
    for c in ordered:
        hit = None
        for i, m in enumerate(merged):
            close = _tdist(c.location.z, m.location.z, L.tau) < opts.degenerate_merge_radius
            if close and ("degenerate" in (c.classification, m.classification)):
                hit = i
                break
        if hit is None:
            merged.append(c)
        else:
            merged[hit] = better(merged[hit], c)
    return merged


def _find(p, L: LatticeData, opts: FinderOptions) -> CriticalSet:
    seeds = seed_grid(L, opts.seed_density, p=p)
    z0 = np.array([t.z for t in seeds], dtype=complex)
    roots = _newton_solve(z0, p, L, opts)

    half = [L.half_period(k) for k in (0, 1, 2, 3)]
    if p is None:
        half = half[1:]  # 0 is the pole of G
    for h in half:
        if _grad_residual(h, p, L) > max(opts.newton_tol, 1e-10):
            raise InternalConsistencyError(
                f"half period {h} failed the gradient check for tau={L.tau}, p={p}"
            )

    # half periods by construction, everything closed under negation
    candidates = list(half) + [complex(z) for z in roots]
    candidates += [-z for z in roots]
    reps = _dedupe(np.array(candidates, dtype=complex), L, opts.dedupe_radius)

    det_tol = opts.det_tol_factor / L.im_tau**2
    hp = [L.half_period(k) for k in range(4)]
    points = []
    for z in reps:
        dists = [float(_tdist(z, h, L.tau)) for h in hp]
        k = int(np.argmin(dists))
        if dists[k] < 1e-8:
            # trivial points are exact by symmetry: use the clean representative
            z, kind = hp[k], "trivial"
        else:
            kind = "nontrivial"
        points.append(_build_point(z, kind, p, L, det_tol))
    points = _merge_degenerate_smears(points, L, opts)
    points.sort(key=lambda c: (round(c.location.r % 1.0, 9), round(c.location.s % 1.0, 9)))

    expected = {3, 5} if p is None else {4, 6, 8, 10}
    count = len(points)
    if count not in expected:
        raise InternalConsistencyError(
            f"found {count} critical points for tau={L.tau}, p={p}; expected one of {sorted(expected)}"
        )
    all_nd = all(c.classification != "degenerate" for c in points)
    degree_sum = sum(c.local_degree for c in points) if all_nd else None
    return CriticalSet(
        points=points,
        count=count,
        degree_sum=degree_sum,
        all_nondegenerate=all_nd,
        tau=L.tau,
        p=p,
    )


def find_critical_points_G(L: LatticeData, opts: FinderOptions | None = None) -> CriticalSet:
    """All critical points of G on the torus (3 or 5 of them)."""
    return _find(None, L, opts or FinderOptions())


def find_critical_points_Gp(
    p: complex, L: LatticeData, opts: FinderOptions | None = None
) -> CriticalSet:
    """All critical points of G_p on the torus.

    For p a half period G_p(z) = G(z - p); that case delegates to the G
    finder and shifts the result (count 3 or 5 rather than 4..10).
    """
    p = complex(p)
    opts = opts or FinderOptions()
    on_half = min(_tdist(p, L.half_period(k), L.tau) for k in range(4)) < 1e-12
    if on_half:
        base = _find(None, L, opts)
        shifted = [
            replace(c, location=TorusPoint.from_z(c.location.z + p, L))
            for c in base.points
        ]
        return CriticalSet(
            points=shifted,
            count=base.count,
            degree_sum=base.degree_sum,
            all_nondegenerate=base.all_nondegenerate,
            tau=L.tau,
            p=p,
        )
    return _find(p, L, opts)


def verify_degree(cs: CriticalSet) -> bool:
    """Check sum of local degrees: -2 for G_p, -1 for G.

    Raises DegenerateSetError when any point is degenerate (the sum is then
    undefined).
    """
    if not cs.all_nondegenerate:
        raise DegenerateSetError("degree sum undefined: degenerate critical point present")
    expected = -1 if cs.p is None else -2
    return sum(c.local_degree for c in cs.points) == expected
