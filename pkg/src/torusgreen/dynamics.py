"""The anti-meromorphic self-map whose fixed points are the critical points of G_p.

With a = pi/Im tau - eta1 and b = -pi/Im tau (both determined by the lattice),

    g(z) = -(1/2b) * (conj(zeta(z+p)) + conj(zeta(z-p)) + 2*conj(a)*conj(z)),

which commutes with lattice translations (g(z + w) = g(z) + w) and is odd.
Its fixed points are exactly the critical points of G_p, with

    conj(dbar g(z)) = (wp(z+p) + wp(z-p) - 2a) / (2b),
    J_phi(z) = 1 - |dbar g(z)|^2 = 4 Im tau^2 * det D^2 G_p(z),

so attracting fixed points (|dbar g| < 1) correspond to the minima.  The
displacement phi(z) = z - g(z) has two anti-holomorphic simple poles at +/-p
and hence degree -2; counting signed preimages of a regular value gives the
degree probe used as an independent check on the critical point bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    PI,
    LatticeData,
    reduce_to_cell,
    torus_distance,
    wp_raw,
    zeta_wp_raw,
)


class FinderShortfallError(RuntimeError):
    """A dynamics search returned fewer solutions than the theory guarantees."""


class IrregularValueError(RuntimeError):
    """Degree probe hit a preimage with vanishing Jacobian."""


@dataclass(frozen=True)
class AntiMapParams:
    a: complex
    b: float
    p: complex
    L: LatticeData


@dataclass(frozen=True)
class OrbitOptions:
    max_iter: int = 2000
    grid: int = 12
    conv_tol: float = 1e-9
    pole_margin: float = 1e-3
    attract_margin: float = 1e-9


def make_antimap(p: complex, L: LatticeData) -> AntiMapParams:
    p = complex(p)
    if min(torus_distance(p, L.half_period(k), L) for k in range(4)) < 1e-12:
        raise ValueError("p must not be a half period")
    return AntiMapParams(a=PI / L.im_tau - L.eta1, b=-PI / L.im_tau, p=p, L=L)


def _zeta_sum(z, P: AntiMapParams):
    zp, _ = zeta_wp_raw(np.asarray(z, dtype=complex) + P.p, P.L)
    zm, _ = zeta_wp_raw(np.asarray(z, dtype=complex) - P.p, P.L)
    return zp + zm


def g_map(z, P: AntiMapParams):
    """g(z); commutes with lattice translations and is odd."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    zs = _zeta_sum(z, P)
    val = -(np.conj(zs) + 2.0 * np.conj(P.a) * np.conj(np.asarray(z, dtype=complex))) / (2.0 * P.b)
    return complex(val[()]) if scalar else val


def dbar_g(z, P: AntiMapParams):
    """The anti-holomorphic multiplier dbar g(z)."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    z = np.asarray(z, dtype=complex)
    wpp = wp_raw(z + P.p, P.L)
    wpm = wp_raw(z - P.p, P.L)
    val = np.conj((wpp + wpm - 2.0 * P.a) / (2.0 * P.b))
    return complex(val[()]) if scalar else val


def j_phi(z, P: AntiMapParams):
    """Jacobian of phi = z - g(z):  1 - |dbar g|^2."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    val = 1.0 - np.abs(dbar_g(z, P)) ** 2
    return float(val[()]) if scalar else val


def _grid_seeds(P: AntiMapParams, n: int) -> np.ndarray:
    ticks_r = (np.arange(n) + 0.413) / n
    ticks_s = (np.arange(n) + 0.291) / n
    rr, ss = np.meshgrid(ticks_r, ticks_s, indexing="ij")
    return (rr + ss * P.L.tau).ravel().astype(complex)


def critical_points_of_g(P: AntiMapParams) -> list[complex]:
    """The four solutions of wp(z+p) + wp(z-p) = 2a modulo the lattice.

    They form two pairs +/-c1, +/-c2.  Raises FinderShortfallError if the
    multistart Newton cannot account for all four.
    """
    from .elliptic import wp_prime_raw

    target = 2.0 * P.a
    for n in (12, 24, 48):
        z = _grid_seeds(P, n)
        for _ in range(60):
            fv = wp_raw(z + P.p, P.L) + wp_raw(z - P.p, P.L) - target
            dv = wp_prime_raw(z + P.p, P.L) + wp_prime_raw(z - P.p, P.L)
            step = fv / dv
            nrm = np.abs(step)
            step = np.where(nrm > 0.2, step * (0.2 / np.where(nrm == 0, 1, nrm)), step)
            z = reduce_to_cell(z - step, P.L)
        fv = wp_raw(z + P.p, P.L) + wp_raw(z - P.p, P.L) - target
        good = z[np.abs(fv) < 1e-10 * (1.0 + abs(target))]
        roots: list[complex] = []
        for zi in np.concatenate([good, -good]):
            zi = complex(reduce_to_cell(zi, P.L))
            if all(torus_distance(zi, w, P.L) > 1e-6 for w in roots):
                roots.append(zi)
        if len(roots) == 4:
            return sorted(roots, key=lambda w: (round(w.real, 9), round(w.imag, 9)))
    raise FinderShortfallError(
        f"found {len(roots)} critical points of g (need 4) for tau={P.L.tau}, p={P.p}"
    )


def _newton_phi(z0: np.ndarray, P: AntiMapParams, w: complex, iters: int = 60) -> np.ndarray:
    """Newton for phi(z) = w using the exact real Jacobian I - Dg."""
    z = np.asarray(z0, dtype=complex).copy()
    for _ in range(iters):
        c = dbar_g(z, P)
        res = z - g_map(z, P) - w
        det = 1.0 - np.abs(c) ** 2
        # Dphi = [[1-Re c, -Im c], [-Im c, 1+Re c]]
        rx, ry = res.real, res.imag
        dx = ((1.0 + c.real) * rx + c.imag * ry) / det
        dy = (c.imag * rx + (1.0 - c.real) * ry) / det
        step = dx + 1j * dy
        nrm = np.abs(step)
        step = np.where(nrm > 0.25, step * (0.25 / np.where(nrm == 0, 1, nrm)), step)
        z = reduce_to_cell(z - step, P.L)
    res = np.abs(z - g_map(z, P) - w)
    return z[np.isfinite(res) & (res < 1e-10)]


def attracting_fixed_points(P: AntiMapParams, opts: OrbitOptions | None = None) -> list[complex]:
    """Attracting fixed points of g, found by orbit iteration of h = g o g.

    Orbits start from the critical points of g and from grid seeds; once an
    orbit settles it is polished by Newton on phi(z) = z - g(z).  Orbits that
    come within ``pole_margin`` of the poles +/-p are labeled escaping and
    dropped.  At most 4 points can come back.
    """
    opts = opts or OrbitOptions()
    seeds = np.array(
        critical_points_of_g(P) + list(_grid_seeds(P, opts.grid)), dtype=complex
    )
    z = reduce_to_cell(seeds, P.L)
    alive = np.ones(z.shape, dtype=bool)
    settled = np.zeros(z.shape, dtype=bool)
    for _ in range(opts.max_iter):
        idx = alive & ~settled
        if not idx.any():
            break
        zi = z[idx]
        near_pole = (
            np.minimum(
                torus_distance(zi, P.p, P.L), torus_distance(zi, -P.p, P.L)
            )
            < opts.pole_margin
        )
        znew = reduce_to_cell(g_map(g_map(zi, P), P), P.L)
        stepd = torus_distance(znew, zi, P.L)
        ok = np.isfinite(stepd) & ~near_pole
        sub_alive = alive[idx]
        sub_alive &= ok
        alive[idx] = sub_alive
        conv = ok & (stepd < opts.conv_tol)
        sub_settled = settled[idx]
        sub_settled |= conv
        settled[idx] = sub_settled
        zi = np.where(ok, znew, zi)
        z[idx] = zi
    cands = z[settled & alive]
    if cands.size == 0:
        return []
    polished = _newton_phi(cands, P, 0j)
    out: list[complex] = []
    for zi in polished:
        zi = complex(reduce_to_cell(zi, P.L))
        mult = abs(dbar_g(zi, P))
        if mult < 1.0 - opts.attract_margin and all(
            torus_distance(zi, w, P.L) > 1e-6 for w in out
        ):
            out.append(zi)
    if len(out) > 4:
        raise FinderShortfallError(
            f"{len(out)} attracting fixed points found; at most 4 can exist"
        )
    return sorted(out, key=lambda w: (round(w.real, 9), round(w.imag, 9)))


def phi_degree_probe(P: AntiMapParams, w: complex = 0j, grid: int = 20) -> int:
    """Signed preimage count N+ - N- of w under phi; -2 at regular values.

    Raises IrregularValueError when a preimage sits on the J_phi = 0 locus.
    """
    w = complex(w)
    seeds = list(_grid_seeds(P, grid))
    # the two large-|w| preimages sit at distance ~ 1/(2|b||w|) from the poles;
    # ring them at matched radii so Newton starts inside the contraction basin
    r_w = 1.0 / (2.0 * abs(P.b) * (abs(w) + 1.0))
    for center in (P.p, -P.p):
        for radius in (0.5 * r_w, r_w, 2.0 * r_w, 0.03):
            for k in range(8):
                seeds.append(center + radius * np.exp(2j * math.pi * (k + 0.3) / 8))
    roots = _newton_phi(np.array(seeds, dtype=complex), P, w)
    uniq: list[complex] = []
    for zi in roots:
        zi = complex(reduce_to_cell(zi, P.L))
        if all(torus_distance(zi, u, P.L) > 1e-6 for u in uniq):
            uniq.append(zi)
    if len(uniq) > 10:
        raise FinderShortfallError(f"{len(uniq)} preimages found; at most 10 can exist")
    deg = 0
    floor = 1e-8 / P.L.im_tau**2
    for zi in uniq:
        j = j_phi(zi, P)
        if abs(j) < floor:
            raise IrregularValueError(f"preimage {zi} has |J_phi| = {abs(j):.2e}")
        deg += 1 if j > 0 else -1
    return deg
