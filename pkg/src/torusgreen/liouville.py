"""Explicit solutions of Delta u + e^u = 4*pi*(delta_p + delta_{-p}).

Every nontrivial critical point q = r + s*tau of G_p generates the
meromorphic developing map

    f(z) = exp(2*(r*eta1 + s*eta2)*z) * sigma(z - q) / sigma(z + q),

with unimodular multipliers f(z+1) = e^{-4 pi i s} f(z) and
f(z+tau) = e^{4 pi i r} f(z), a simple zero at q, a simple pole at -q and
f' vanishing exactly at +/-p.  The one-parameter family

    u_beta(z) = log( 8 |beta f'(z)|^2 / (1 + |beta f(z)|^2)^2 ),   beta > 0,

is then a solution field away from +/-p, even exactly when beta = 1, with
total mass integral e^{u_beta} = 8*pi.  u_beta is evaluated through logs of
|f| and |f'/f| (log-derivative route), which stays stable arbitrarily close
to the zero q and the pole -q where the direct sigma quotient would over- or
underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import (
    PI,
    LatticeData,
    LatticePoleError,
    decompose_rs,
    sigma_w,
    torus_distance,
    zeta_w,
    zeta_wp_raw,
)

_LOG8 = math.log(8.0)


@dataclass(frozen=True)
class DevelopingMap:
    q: complex
    r: float
    s: float
    p: complex
    mult1: complex  # e^{-4 pi i s}
    mult2: complex  # e^{+4 pi i r}


@dataclass
class SolutionField:
    """Sampled u_beta over the cell with finite-difference residual stats."""

    beta: float
    grid_n: int
    rho: float
    residual_max: float
    residual_mean: float
    evaluated: int
    skipped: int
    mass: float
    u: np.ndarray = field(repr=False)  # (grid_n, grid_n), nan at punctured nodes


def make_developing_map(q: complex, p: complex, L: LatticeData) -> DevelopingMap:
    """Build the developing map data for a nontrivial critical point q of G_p.

    Validates the defining relation zeta(q+p) + zeta(q-p) = 2*(r*eta1 + s*eta2)
    to 1e-9.
    """
    q, p = complex(q), complex(p)
    r, s = decompose_rs(q, L)
    resid = abs(zeta_w(q + p, L) + zeta_w(q - p, L) - 2.0 * (r * L.eta1 + s * L.eta2))
    if resid > 1e-9:
        raise ValueError(
            f"q={q} is not a critical point of G_p (relation residual {resid:.2e})"
        )
    return DevelopingMap(
        q=q,
        r=r,
        s=s,
        p=p,
        mult1=cmath.exp(-4j * PI * s),
        mult2=cmath.exp(4j * PI * r),
    )


def developing_maps_from(cs, L: LatticeData) -> list[DevelopingMap]:
    """One DevelopingMap per +/- pair of nontrivial critical points.

    The number of maps is (count - 4)/2 and ranges over 0..3.
    """
    out = []
    for cp_plus, _ in cs.nontrivial_pairs():
        out.append(make_developing_map(cp_plus.location.z, cs.p, L))
    return out


def _c2(D: DevelopingMap, L: LatticeData) -> complex:
    return 2.0 * (D.r * L.eta1 + D.s * L.eta2)


def developing_f(z, D: DevelopingMap, L: LatticeData):
    """f(z) itself (complex); pole at -q modulo the lattice."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    z = np.asarray(z, dtype=complex)
    if bool(np.any(torus_distance(z, -D.q, L) < 1e-12)):
        raise LatticePoleError(-D.q, "developing_f")
    val = np.exp(_c2(D, L) * z) * sigma_w(z - D.q, L) / sigma_w(z + D.q, L)
    return complex(val[()]) if scalar else val


def developing_f_prime(z, D: DevelopingMap, L: LatticeData):
    """f'(z) = f(z) * (2*(r*eta1+s*eta2) + zeta(z-q) - zeta(z+q)).

    The product form is exact at z = q, where f vanishes and the log
    derivative has its pole.
    """
    scalar = np.isscalar(z) or isinstance(z, complex)
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    at_q = torus_distance(z, D.q, L) < 1e-10
    gen = ~at_q
    if gen.any():
        zg = z[gen]
        zm, _ = zeta_wp_raw(zg - D.q, L)
        zp, _ = zeta_wp_raw(zg + D.q, L)
        out[gen] = developing_f(zg, D, L) * (_c2(D, L) + zm - zp)
    if at_q.any():
        # f'(q) = e^{c2 q} / sigma(2q); f' inherits the multipliers of f, so
        # z = q + m + n*tau picks up mult1^m * mult2^n
        d = z[at_q] - D.q
        n_sh = np.round(d.imag / L.im_tau)
        m_sh = np.round(d.real - n_sh * L.tau.real)
        fpq = cmath.exp(_c2(D, L) * D.q) / sigma_w(2.0 * D.q, L)
        out[at_q] = fpq * D.mult1**m_sh * D.mult2**n_sh
    return complex(out[()]) if scalar else out


def _log_abs_f(z, D: DevelopingMap, L: LatticeData):
    """log|f| and log|f'/f| as arrays; +/-inf only at exact zeros and poles."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (
            (_c2(D, L) * z).real
            + np.log(np.abs(sigma_w(z - D.q, L)))
            - np.log(np.abs(sigma_w(z + D.q, L)))
        )
        zm, _ = zeta_wp_raw(z - D.q, L)
        zp, _ = zeta_wp_raw(z + D.q, L)
        logfpf = np.log(np.abs(_c2(D, L) + zm - zp))
    return logf, logfpf


def u_beta(z, beta: float, D: DevelopingMap, L: LatticeData):
    """u_beta(z), doubly periodic, with log singularities at +/-p.

    Exact special values at the zero/pole of f:
    u_beta(q) = log(8 beta^2 |f'(q)|^2) and u_beta(-q) = log(8 |f'(q)|^2 / beta^2).
    Returns -inf at the punctures +/-p.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    scalar = np.isscalar(z) or isinstance(z, complex)
    shape = np.shape(np.asarray(z))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    logb = math.log(beta)
    at_q = torus_distance(z, D.q, L) < 1e-12
    at_mq = torus_distance(z, -D.q, L) < 1e-12
    at_p = (torus_distance(z, D.p, L) < 1e-12) | (torus_distance(z, -D.p, L) < 1e-12)
    out = np.empty(z.shape, dtype=float)
    gen = ~(at_q | at_mq | at_p)
    if gen.any():
        logf, logfpf = _log_abs_f(z[gen], D, L)
        out[gen] = (
            _LOG8
            + 2.0 * logb
            + 2.0 * logf
            + 2.0 * logfpf
            - 2.0 * np.logaddexp(0.0, 2.0 * (logb + logf))
        )
    if at_q.any() or at_mq.any():
        log_fpq = math.log(abs(cmath.exp(_c2(D, L) * D.q) / sigma_w(2.0 * D.q, L)))
        out[at_q] = _LOG8 + 2.0 * logb + 2.0 * log_fpq
        out[at_mq] = _LOG8 - 2.0 * logb + 2.0 * log_fpq
    out[at_p] = -math.inf
    return float(out[0]) if scalar else out.reshape(shape)


def pde_residual(
    D: DevelopingMap,
    L: LatticeData,
    beta: float = 1.0,
    grid_n: int = 512,
    rho: float = 0.05,
) -> SolutionField:
    """Sample u_beta on a grid_n x grid_n cell grid and measure |Delta u + e^u|.

    The Laplacian uses the 5-point stencil with step h = 1/grid_n in the x/y
    directions (u is doubly periodic, so shifted points are evaluated
    directly).  Nodes within rho of a puncture are excluded; nodes whose
    stencil touches the punctured disks are skipped and counted.  The mass
    integral of e^u over the cell gets a ring correction of (pi rho^2 / 2)
    times the mean of e^u on each puncture circle (the local e^u ~ C|z-p|^2
    profile makes the omitted disk mass about that size).
    """
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    diam = abs(1.0 + L.tau)
    if rho < 4.0 * diam / grid_n:
        raise ValueError(f"rho must be >= {4.0 * diam / grid_n:.4g} at this grid")
    h = 1.0 / grid_n
    ticks = (np.arange(grid_n) + 0.5) / grid_n
    rr, ss = np.meshgrid(ticks, ticks, indexing="ij")
    zc = (rr + ss * L.tau).ravel()

    def dmin(zz):
        return np.minimum(torus_distance(zz, D.p, L), torus_distance(zz, -D.p, L))

    inc = dmin(zc) > rho
    uc = np.full(zc.shape, np.nan)
    uc[inc] = u_beta(zc[inc], beta, D, L)

    neigh = [zc + h, zc - h, zc + 1j * h, zc - 1j * h]
    usable = inc.copy()
    for zn in neigh:
        usable &= dmin(zn) > rho
    lap = np.zeros(zc.shape)
    for zn in neigh:
        un = np.full(zc.shape, np.nan)
        un[usable] = u_beta(zn[usable], beta, D, L)
        lap = lap + np.where(usable, un, 0.0)
    lap = (lap - 4.0 * np.where(usable, uc, 0.0)) / (h * h)
    res = np.abs(lap + np.exp(np.where(usable, uc, 0.0)))[usable]

    # mass with puncture ring correction
    mass = float(np.exp(uc[inc]).sum() * (L.im_tau / grid_n**2))
    ring = np.exp(2j * PI * (np.arange(64) + 0.5) / 64.0) * rho
    for center in (D.p, -D.p):
        ring_u = u_beta(center + ring, beta, D, L)
        mass += (PI * rho * rho / 2.0) * float(np.exp(ring_u).mean())

    return SolutionField(
        beta=beta,
        grid_n=grid_n,
        rho=rho,
        residual_max=float(res.max()),
        residual_mean=float(res.mean()),
        evaluated=int(usable.sum()),
        skipped=int((inc & ~usable).sum()),
        mass=mass,
        u=uc.reshape(grid_n, grid_n),
    )
