"""Weierstrass elliptic functions on the lattice Z + Z*tau, Im tau > 0.

All four classical functions (wp, wp', zeta, sigma) are evaluated through the
first Jacobi theta function and its v-derivatives,

    theta1(v) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v),   q = e^{i pi tau},

after reducing the argument to the centered fundamental cell
|r|, |s| <= 1/2 (z = r + s*tau).  With psi = theta1'/theta1 the identities

    zeta(z) = eta1*z + pi*psi(pi*z)
    wp(z)   = -eta1 - pi^2 * psi'(pi*z)
    wp'(z)  = -pi^3 * psi''(pi*z)
    sigma(z) = exp(eta1*z^2/2) * theta1(pi*z) / (pi * theta1'(0))

hold exactly, and the quasi-periodicity corrections for zeta and sigma are
applied in closed form.  The quasi-period eta1 comes from the theta nulls,
eta1 = -pi^2 theta1'''(0) / (3 theta1'(0)), and eta2 = tau*eta1 - 2*pi*i so
the Legendre relation is exact by construction.

Conditioning: near the Im tau >= 0.05 floor the theta nulls suffer heavy
alternating cancellation (|q| -> 1), so the series frame is the SL(2, Z)
reduction tau_eval of tau into the fundamental domain.  The lattice scales
exactly, (1/mu) * (Z + Z tau) = Z + Z tau_eval with mu = c*tau + d, and
homogeneity maps values back:

    wp(z; tau) = wp(z/mu; tau_eval) / mu^2,    zeta(z; tau) = zeta(z/mu; tau_eval) / mu,
    wp'(z; tau) = wp'(z/mu; tau_eval) / mu^3,  sigma(z; tau) = mu * sigma(z/mu; tau_eval).

In the reduced frame Im tau_eval >= sqrt(3)/2, so |q| <= 0.066, the series
needs at most ~6 terms and every constant comes out at full double
precision.  Im tau >= 0.05 remains the documented envelope (double
precision only, no arbitrary precision).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi

#: Smallest supported Im tau (documented envelope; normalize flatter tori upstream).
MIN_IM_TAU = 0.05

#: Distance from a lattice point below which wp/zeta inputs count as poles.
POLE_TOL = 1e-12

_MAX_TERMS = 64
_CHUNK = 1 << 17  # theta evaluation block size, keeps temporaries ~100 MB


class DomainError(ValueError):
    """Raised for tau outside the supported half-plane Im tau >= MIN_IM_TAU."""


class LatticePoleError(ArithmeticError):
    """wp or zeta was evaluated at (numerically) a lattice point.

    Carries the offending lattice point in ``lattice_point``.
    """

    def __init__(self, lattice_point: complex, func: str = "wp"):
        self.lattice_point = lattice_point
        super().__init__(f"{func} has a pole at lattice point {lattice_point}")


@dataclass(frozen=True)
class LatticeData:
    """All tau-dependent constants of the lattice Z + Z*tau.

    Immutable after construction; safe to share across workers.
    """

    tau: complex
    omega: tuple[complex, complex, complex, complex]  # 0, 1, tau, 1+tau
    eta1: complex
    eta2: complex
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    nome: complex
    im_tau: float
    # series frame (SL(2,Z)-reduced) and theta tables (private)
    _tau_eval: complex = field(repr=False, default=0j)
    _mu: complex = field(repr=False, default=1 + 0j)  # c*tau + d; lattice scale to the frame
    _im_eval: float = field(repr=False, default=0.0)
    _eta1_eval: complex = field(repr=False, default=0j)
    _eta2_eval: complex = field(repr=False, default=0j)
    _odd: np.ndarray = field(repr=False, default=None)
    _c0: np.ndarray = field(repr=False, default=None)
    _c1: np.ndarray = field(repr=False, default=None)
    _c2: np.ndarray = field(repr=False, default=None)
    _c3: np.ndarray = field(repr=False, default=None)
    _theta1p0: complex = field(repr=False, default=0j)

    @property
    def e(self) -> tuple[complex, complex, complex]:
        return (self.e1, self.e2, self.e3)

    def half_period(self, k: int) -> complex:
        """omega_k / 2 for k = 0..3."""
        return self.omega[k] / 2.0


def _to_fundamental_domain(tau: complex):
    """Gauss reduction of tau into |Re| <= 1/2, |tau| >= 1.

    Returns (a, b, c, d) with tau_eval = (a*tau + b)/(c*tau + d).
    """
    a, b, c, d = 1, 0, 0, 1
    t = complex(tau)
    for _ in range(256):
        shift = int(round(t.real))
        if shift != 0:
            t -= shift
            a, b = a - shift * c, b - shift * d
        if abs(t) < 1.0 - 1e-12:
            t = -1.0 / t
            a, b, c, d = -c, -d, a, b
        else:
            break
    return a, b, c, d


def make_lattice(tau: complex) -> LatticeData:
    """Build the constant tables for the lattice Z + Z*tau.

    Raises DomainError unless Im tau >= MIN_IM_TAU.
    """
    tau = complex(tau)
    if tau.imag <= 0.0:
        raise DomainError(f"Im tau must be positive, got tau={tau}")
    if tau.imag < MIN_IM_TAU:
        raise DomainError(
            f"Im tau >= {MIN_IM_TAU} required for the supported envelope, got tau={tau}"
        )
    im_tau = tau.imag

    a, b, c, d = _to_fundamental_domain(tau)
    mu = c * tau + d
    tau_eval = (a * tau + b) / mu
    im_eval = tau_eval.imag

    # Growth-adjusted term magnitudes in the reduced cell decay like
    # exp(-pi*Im tau_eval*(n^2 - 1/4)); stop once below 1e-17 of the leading
    # term.  Im tau_eval >= sqrt(3)/2, so six terms always suffice.
    nterms = int(math.ceil(math.sqrt(39.2 / (PI * im_eval)))) + 2
    nterms = max(4, min(_MAX_TERMS, nterms))
    n = np.arange(nterms)
    odd = (2 * n + 1).astype(float)
    # c_n = 2*(-1)^n q^{(n+1/2)^2}, computed straight from tau_eval for stability
    c0 = 2.0 * (-1.0) ** n * np.exp(1j * PI * tau_eval * (n + 0.5) ** 2)
    c1 = c0 * odd
    c2 = c0 * odd**2
    c3 = c0 * odd**3

    theta1p0 = complex(c1.sum())          # theta1'(0)
    theta1ppp0 = complex(-c3.sum())       # theta1'''(0)
    eta1_eval = -PI**2 * theta1ppp0 / (3.0 * theta1p0)
    eta2_eval = tau_eval * eta1_eval - TWO_PI * 1j
    # the vector 1/mu expands as a*1 - c*tau_eval in the reduced lattice
    eta1 = (a * eta1_eval - c * eta2_eval) / mu
    eta2 = tau * eta1 - TWO_PI * 1j

    def wp_frame(z: complex) -> complex:
        # wp(z; tau) = wp(z/mu; tau_eval) / mu^2, reduced in the eval frame
        w = z / mu
        s = w.imag / im_eval
        r = w.real - s * tau_eval.real
        w0 = w - math.floor(r + 0.5) - math.floor(s + 0.5) * tau_eval
        arg = PI * w0 * odd
        sv, cv = np.sin(arg), np.cos(arg)
        t0 = sv @ c0
        t1 = cv @ c1
        t2 = -(sv @ c2)
        psi = t1 / t0
        return complex(-(eta1_eval + PI**2 * (t2 / t0 - psi * psi))) / mu**2

    e1_ = wp_frame(0.5)
    e2_ = wp_frame(tau / 2.0)
    e3_ = wp_frame((1.0 + tau) / 2.0)
    g2 = -4.0 * (e1_ * e2_ + e1_ * e3_ + e2_ * e3_)
    g3 = 4.0 * e1_ * e2_ * e3_

    return LatticeData(
        tau=tau,
        omega=(0j, 1.0 + 0j, tau, 1.0 + tau),
        eta1=eta1,
        eta2=eta2,
        e1=e1_,
        e2=e2_,
        e3=e3_,
        g2=g2,
        g3=g3,
        nome=cmath.exp(1j * PI * tau),
        im_tau=im_tau,
        _tau_eval=tau_eval,
        _mu=mu,
        _im_eval=im_eval,
        _eta1_eval=eta1_eval,
        _eta2_eval=eta2_eval,
        _odd=odd,
        _c0=c0,
        _c1=c1,
        _c2=c2,
        _c3=c3,
        _theta1p0=theta1p0,
    )


def decompose_rs(z: complex, L: LatticeData) -> tuple[float, float]:
    """Real coordinates (r, s) with z = r + s*tau."""
    z = complex(z)
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    return (r, s)


@dataclass(frozen=True)
class TorusPoint:
    """A complex point with its (r, s) coordinates and lattice cell.

    ``cell`` = (m, n) is chosen so that z - m - n*tau lies in the fundamental
    cell [0,1) + [0,1)*tau.
    """

    z: complex
    r: float
    s: float
    cell: tuple[int, int]

    @classmethod
    def from_z(cls, z: complex, L: LatticeData) -> "TorusPoint":
        r, s = decompose_rs(z, L)
        return cls(z=complex(z), r=r, s=s, cell=(int(math.floor(r)), int(math.floor(s))))

    def reduced(self, L: LatticeData) -> complex:
        return self.z - self.cell[0] - self.cell[1] * L.tau


# ---------------------------------------------------------------------------
# argument reduction and the theta engine (all in the evaluation frame)
# ---------------------------------------------------------------------------

def _reduce_eval(z, L: LatticeData):
    """Map z to the eval frame and reduce to the centered cell there.

    Returns (w0, m, n) with z/mu = w0 + m + n*tau_eval and the reduced
    coordinates in [-1/2, 1/2).
    """
    w = np.asarray(z, dtype=complex) / L._mu
    s = w.imag / L._im_eval
    r = w.real - s * L._tau_eval.real
    m = np.floor(r + 0.5)
    n = np.floor(s + 0.5)
    w0 = w - m - n * L._tau_eval
    return w0, m, n


def _theta_block(v: np.ndarray, L: LatticeData, order: int):
    """theta1 and its first `order` v-derivatives at v (flat complex array)."""
    out = [np.empty(v.shape, dtype=complex) for _ in range(order + 1)]
    for lo in range(0, v.size, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, v.size))
        arg = np.multiply.outer(v[sl], L._odd)
        sv = np.sin(arg)
        cv = np.cos(arg)
        out[0][sl] = sv @ L._c0
        if order >= 1:
            out[1][sl] = cv @ L._c1
        if order >= 2:
            out[2][sl] = -(sv @ L._c2)
        if order >= 3:
            out[3][sl] = -(cv @ L._c3)
    return out


def _pole_mask(z0: np.ndarray) -> np.ndarray:
    return np.abs(z0) < POLE_TOL


def _raise_if_pole(w0, m, n, L: LatticeData, func: str):
    mask = _pole_mask(np.atleast_1d(w0))
    if mask.any():
        i = int(np.argmax(mask))
        mm = np.atleast_1d(m).ravel()[i]
        nn = np.atleast_1d(n).ravel()[i]
        raise LatticePoleError(complex(L._mu * (mm + nn * L._tau_eval)), func)


def _finish(out: np.ndarray, scalar: bool):
    return complex(out[()]) if scalar else out


def wp(z, L: LatticeData):
    """Weierstrass wp(z).  Raises LatticePoleError on lattice points."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    w0, m, n = _reduce_eval(z, L)
    _raise_if_pole(w0, m, n, L, "wp")
    t0, t1, t2 = _theta_block(PI * np.atleast_1d(w0).ravel(), L, 2)
    psi = t1 / t0
    val = -(L._eta1_eval + PI**2 * (t2 / t0 - psi * psi)) / L._mu**2
    return _finish(val.reshape(np.shape(w0)), scalar)


def wp_prime(z, L: LatticeData):
    """Derivative wp'(z).  Raises LatticePoleError on lattice points."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    w0, m, n = _reduce_eval(z, L)
    _raise_if_pole(w0, m, n, L, "wp_prime")
    t0, t1, t2, t3 = _theta_block(PI * np.atleast_1d(w0).ravel(), L, 3)
    psi = t1 / t0
    psi2 = t3 / t0 - 3.0 * (t2 / t0) * psi + 2.0 * psi**3
    val = -(PI**3) * psi2 / L._mu**3
    return _finish(val.reshape(np.shape(w0)), scalar)


def zeta_w(z, L: LatticeData):
    """Weierstrass zeta(z), with exact quasi-period corrections."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    w0, m, n = _reduce_eval(z, L)
    _raise_if_pole(w0, m, n, L, "zeta")
    t0, t1 = _theta_block(PI * np.atleast_1d(w0).ravel(), L, 1)
    psi = (t1 / t0).reshape(np.shape(w0))
    val = (L._eta1_eval * w0 + PI * psi + m * L._eta1_eval + n * L._eta2_eval) / L._mu
    return _finish(np.asarray(val), scalar)


def sigma_w(z, L: LatticeData):
    """Weierstrass sigma(z); entire, returns exactly 0 on lattice points."""
    scalar = np.isscalar(z) or isinstance(z, complex)
    w0, m, n = _reduce_eval(z, L)
    mask = _pole_mask(w0)
    t0 = _theta_block(PI * np.atleast_1d(w0).ravel(), L, 0)[0].reshape(np.shape(w0))
    base = np.exp(L._eta1_eval * w0 * w0 / 2.0) * t0 / (PI * L._theta1p0)
    # sigma(w0 + m + n*t) = (-1)^{m+n+mn} exp((m*eta1+n*eta2)(w0 + (m+n*t)/2)) sigma(w0)
    eta = m * L._eta1_eval + n * L._eta2_eval
    sign = np.where((m + n + m * n) % 2 == 0, 1.0, -1.0)
    val = L._mu * base * sign * np.exp(eta * (w0 + (m + n * L._tau_eval) / 2.0))
    val = np.where(mask, 0j, val)
    return _finish(np.asarray(val), scalar)


def zeta_wp_raw(z, L: LatticeData):
    """zeta and wp from one theta block; poles give nan instead of raising.

    Internal workhorse for the root finders, which discard nan seeds.
    """
    w0, m, n = _reduce_eval(z, L)
    mask = _pole_mask(w0)
    w0safe = np.where(mask, 0.25, w0)
    t0, t1, t2 = _theta_block(PI * np.atleast_1d(w0safe).ravel(), L, 2)
    shape = np.shape(w0)
    psi = (t1 / t0).reshape(shape)
    ze = (L._eta1_eval * w0safe + PI * psi + m * L._eta1_eval + n * L._eta2_eval) / L._mu
    w = -(L._eta1_eval + PI**2 * ((t2 / t0).reshape(shape) - psi * psi)) / L._mu**2
    nanc = complex(np.nan, np.nan)
    return np.where(mask, nanc, ze), np.where(mask, nanc, w)


def wp_raw(z, L: LatticeData):
    """Array wp with nan at poles (no exception)."""
    return zeta_wp_raw(z, L)[1]


def wp_prime_raw(z, L: LatticeData):
    """Array wp' with nan at poles (no exception)."""
    w0, _, _ = _reduce_eval(z, L)
    mask = _pole_mask(w0)
    w0safe = np.where(mask, 0.25, w0)
    t0, t1, t2, t3 = _theta_block(PI * np.atleast_1d(w0safe).ravel(), L, 3)
    shape = np.shape(w0)
    psi = (t1 / t0).reshape(shape)
    psi2 = (t3 / t0).reshape(shape) - 3.0 * (t2 / t0).reshape(shape) * psi + 2.0 * psi**3
    val = -(PI**3) * psi2 / L._mu**3
    return np.where(mask, complex(np.nan, np.nan), val)


def theta1_abs(z, L: LatticeData):
    """|theta1| and the reduced argument, both in the evaluation frame.

    The Green value built from these differs from the tau-frame one only by
    an additive constant (the value is conformally natural).
    """
    w0, _, _ = _reduce_eval(z, L)
    t0 = _theta_block(PI * np.atleast_1d(w0).ravel(), L, 0)[0].reshape(np.shape(w0))
    return np.abs(t0), w0


# ---------------------------------------------------------------------------
# torus metric helpers
# ---------------------------------------------------------------------------

def torus_distance(z1, z2, L: LatticeData):
    """Distance between points of C / (Z + Z*tau): min over nearby shifts."""
    d = np.asarray(z1, dtype=complex) - np.asarray(z2, dtype=complex)
    s = d.imag / L.im_tau
    r = d.real - s * L.tau.real
    d0 = d - np.floor(r + 0.5) - np.floor(s + 0.5) * L.tau
    return np.abs(d0)


def reduce_to_cell(z, L: LatticeData):
    """Representative of z in the fundamental cell [0,1) + [0,1)*tau."""
    z = np.asarray(z, dtype=complex)
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    return (r - np.floor(r)) + (s - np.floor(s)) * L.tau


# ---------------------------------------------------------------------------
# modular transformation residual (test oracle)
# ---------------------------------------------------------------------------

def modular_transform_check(z: complex, tau: complex, abcd) -> float:
    """Max relative residual of the SL(2,Z) transformation laws at z.

    Checks the wp, zeta, g2 laws together with the parity rules that permute
    e1, e3 under tau -> (a*tau+b)/(c*tau+d).  Intended purely as an oracle.
    """
    (a, b), (c, d) = abcd
    a, b, c, d = int(a), int(b), int(c), int(d)
    if a * d - b * c != 1:
        raise ValueError("abcd must have determinant 1")
    L = make_lattice(tau)
    mu = c * tau + d
    tau2 = (a * tau + b) / mu
    L2 = make_lattice(tau2)

    def rel(lhs, rhs):
        return abs(lhs - rhs) / (1.0 + abs(rhs))

    res = [
        rel(wp(z / mu, L2), mu**2 * wp(z, L)),
        rel(zeta_w(z / mu, L2), mu * zeta_w(z, L)),
        rel(L2.g2, mu**4 * L.g2),
    ]
    e = (L.e1, L.e2, L.e3)
    # e1 law keyed on (c, d) parity, e3 law on (a+c, b+d) parity
    src1 = {(0, 1): 0, (1, 0): 1, (1, 1): 2}[(c % 2, d % 2)]
    src3 = {(0, 1): 0, (1, 0): 1, (1, 1): 2}[((a + c) % 2, (b + d) % 2)]
    res.append(rel(L2.e1, mu**2 * e[src1]))
    res.append(rel(L2.e3, mu**2 * e[src3]))
    return max(res)
