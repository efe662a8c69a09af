"""The map f(r,s) tying pole locations to nontrivial critical points.

For fixed tau,

    f(r, s) = wp(q) + wp'(q) / (2 (zeta(q) - r*eta1 - s*eta2)),   q = r + s*tau,

(Hitchin's formula) sends (r, s) to wp(p) where +/-p are the poles for which
q is a nontrivial critical point of G_p.  On the open set U where f is
finite and avoids {e1, e2, e3} the analytic Jacobian is assembled from

    f_r = wp'(p) * (wp(q+p) + wp(q-p) + 2*eta1) / (wp(q-p) - wp(q+p)),
    f_s = wp'(p) * (tau*(wp(q+p) + wp(q-p) + 2*eta1) - 4*pi*i) / (wp(q-p) - wp(q+p)),

and the Hessian determinant of G_p at q is recovered through

    det D^2 G_p(q) = -(c / (16*pi^2*Im tau)) * det J,
    c = |wp(q-p) - wp(q+p)|^2 / |wp'(p)|^2 > 0,

which is the cross-check used against the direct Hessian.  The same sample
path p_{r,s}(tau), followed along a line in tau with the +/- branch tracked
by continuity, satisfies the elliptic Painleve VI equation

    p''(tau) = -(1/32 pi^2) * sum_k wp'(p + omega_k/2; tau),

whose finite-difference residual is exposed for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    PI,
    LatticeData,
    make_lattice,
    reduce_to_cell,
    wp,
    wp_prime,
    wp_prime_raw,
    wp_raw,
    zeta_w,
)

_E_TOL = 1e-9
_DENOM_TOL = 1e-12


class InversionError(RuntimeError):
    """Multistart Newton failed to invert wp."""


class BranchJumpError(RuntimeError):
    """Continuity tracking of +/-p lost its branch along the tau line."""


@dataclass(frozen=True)
class HitchinSample:
    r: float
    s: float
    q: complex
    f_value: complex  # inf+inf*j when the denominator vanishes
    denom: complex
    in_U: bool

    @property
    def finite(self) -> bool:
        return not (math.isinf(self.f_value.real) or math.isinf(self.f_value.imag))


def _check_rs(r: float, s: float):
    if abs(2 * r - round(2 * r)) < 1e-12 and abs(2 * s - round(2 * s)) < 1e-12:
        raise ValueError(f"(r, s)=({r}, {s}) lies in (1/2)Z^2")


def f_rs(r: float, s: float, L: LatticeData) -> HitchinSample:
    """Evaluate f at (r, s) not in (1/2)Z^2."""
    _check_rs(r, s)
    q = r + s * L.tau
    denom = 2.0 * (zeta_w(q, L) - r * L.eta1 - s * L.eta2)
    if abs(denom) < _DENOM_TOL * (1.0 + abs(wp_prime(q, L))):
        return HitchinSample(r=r, s=s, q=q, f_value=complex(math.inf, math.inf),
                             denom=denom, in_U=False)
    fv = wp(q, L) + wp_prime(q, L) / denom
    near_e = any(abs(fv - ek) < _E_TOL * (1.0 + abs(fv)) for ek in L.e)
    return HitchinSample(r=r, s=s, q=q, f_value=fv, denom=denom, in_U=not near_e)


def wp_inverse(c: complex, L: LatticeData, seeds: int = 64) -> tuple[complex, complex]:
    """The pair +/-p with wp(p) = c, canonical representative first.

    The pair degenerates to (omega_k/2, omega_k/2) when c = e_k.  Raises
    InversionError if the multistart Newton finds nothing.
    """
    c = complex(c)
    for k, ek in enumerate(L.e, start=1):
        if abs(c - ek) < 1e-9 * (1.0 + abs(ek)):
            h = L.half_period(k)
            return (h, h)

    side = int(round(math.sqrt(seeds)))
    ticks_r = (np.arange(side) + 0.412) / side
    ticks_s = (np.arange(side) + 0.277) / (2 * side)  # half cell: one of each +/- orbit
    rr, ss = np.meshgrid(ticks_r, ticks_s, indexing="ij")
    z = (rr + ss * L.tau).ravel().astype(complex)
    if abs(c) > 4.0:
        # wp ~ 1/z^2 near 0: both square roots as extra seeds
        root = 1.0 / np.sqrt(c)
        z = np.concatenate([z, [root, -root, 1j * root]])

    for _ in range(60):
        w = wp_raw(z, L)
        dw = wp_prime_raw(z, L)
        step = (w - c) / dw
        nrm = np.abs(step)
        step = np.where(nrm > 0.2, step * (0.2 / np.where(nrm == 0, 1, nrm)), step)
        z = z - step
        z = reduce_to_cell(z, L)
    w = wp_raw(z, L)
    ok = np.abs(w - c) < 1e-10 * (1.0 + abs(c))
    if not ok.any():
        raise InversionError(f"wp inversion failed for c={c}, tau={L.tau}")
    zc = z[ok]
    # all solutions are +/-p mod the lattice; canonicalize lexicographically
    cands = []
    for zi in np.concatenate([zc, -zc]):
        zi = complex(reduce_to_cell(zi, L))
        s = zi.imag / L.im_tau
        r = zi.real - s * L.tau.real
        cands.append(((round(r % 1.0, 10), round(s % 1.0, 10)), zi))
    cands.sort(key=lambda t: t[0])
    p = cands[0][1]
    minus = complex(reduce_to_cell(-p, L))
    return (p, minus)


def _jac_pieces(r: float, s: float, L: LatticeData, sample: HitchinSample | None = None):
    sample = sample or f_rs(r, s, L)
    if not sample.in_U:
        raise ValueError(f"(r, s)=({r}, {s}) not in U (f infinite or near a branch value)")
    q = sample.q
    p, _ = wp_inverse(sample.f_value, L)
    wqp = wp(q + p, L)
    wqm = wp(q - p, L)
    B = wqm - wqp
    if abs(B) < 1e-10 * (1.0 + abs(wqm)):
        raise ValueError("wp(q-p) = wp(q+p): inconsistent in_U sample")
    A = wqp + wqm + 2.0 * L.eta1
    wpp = wp_prime(p, L)
    f_r = wpp * A / B
    f_s = wpp * (L.tau * A - 4j * PI) / B
    return sample, p, A, B, f_r, f_s


def jacobian_f(r: float, s: float, L: LatticeData) -> np.ndarray:
    """Analytic 2x2 Jacobian of (Re f, Im f) with respect to (r, s)."""
    _, _, _, _, f_r, f_s = _jac_pieces(r, s, L)
    return np.array([[f_r.real, f_s.real], [f_r.imag, f_s.imag]])


def hessian_via_hitchin(r: float, s: float, L: LatticeData) -> float:
    """det D^2 G_p(q) recovered from the Jacobian of f (independent route)."""
    _, p, _, B, f_r, f_s = _jac_pieces(r, s, L)
    c = abs(B) ** 2 / abs(wp_prime(p, L)) ** 2
    det_j = f_r.real * f_s.imag - f_r.imag * f_s.real
    return -(c / (16.0 * PI * PI * L.im_tau)) * det_j


def _tracked_p(r: float, s: float, tau: complex, anchor: complex | None):
    """p_{r,s}(tau) as a point of C, branch chosen nearest to the anchor."""
    L = make_lattice(tau)
    sample = f_rs(r, s, L)
    if not sample.in_U:
        raise ValueError(f"(r, s)=({r}, {s}) not in U at tau={tau}")
    p, _ = wp_inverse(sample.f_value, L)
    if anchor is None:
        return p, L
    best, best_d = None, math.inf
    for base in (p, -p):
        for mshift in (-1, 0, 1):
            for nshift in (-1, 0, 1):
                cand = base + mshift + nshift * tau
                d = abs(cand - anchor)
                if d < best_d:
                    best, best_d = cand, d
    if best_d > 0.1:
        raise BranchJumpError(
            f"branch tracking jumped by {best_d:.3g} at tau={tau}"
        )
    return best, L


def pvi_residual(
    r: float,
    s: float,
    tau: complex,
    dtau: float,
    direction: complex = 1j,
    five_point: bool = False,
) -> float:
    """|p'' + (1/32 pi^2) sum_k wp'(p + omega_k/2)| along a tau line.

    p'' is taken by symmetric differences with step dtau in the given unit
    direction (default: the imaginary direction); the five-point stencil cuts
    the truncation error at the cost of two more lattice builds.
    """
    u = complex(direction)
    u /= abs(u)
    p0, L0 = _tracked_p(r, s, complex(tau), None)
    offsets = (-2, -1, 1, 2) if five_point else (-1, 1)
    ps = {}
    for j in offsets:
        ps[j], _ = _tracked_p(r, s, complex(tau) + j * dtau * u, p0)
    if five_point:
        second = (-ps[2] + 16.0 * ps[1] - 30.0 * p0 + 16.0 * ps[-1] - ps[-2]) / (
            12.0 * dtau * dtau
        )
    else:
        second = (ps[1] - 2.0 * p0 + ps[-1]) / (dtau * dtau)
    second /= u * u
    rhs = sum(wp_prime(p0 + L0.half_period(k), L0) for k in range(4))
    return abs(second + rhs / (32.0 * PI * PI))
