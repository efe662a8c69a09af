"""Gradients, Hessians and relative values of the torus Green functions.

G is the Green function of the torus with singularity at 0 and G_p(z) is the
symmetrized two-pole version (G(z+p) + G(z-p)) / 2.  The complex gradient is

    -4*pi * dG/dz = zeta(z) - r*eta1 - s*eta2,        z = r + s*tau,

and the real gradient convention used throughout is

    gx = 2*Re dG/dz,   gy = -2*Im dG/dz.

Second derivatives in closed form (A = wp(z) + eta1, and the average of the
two shifted values for G_p):

    2*pi*Gxx = Re A,  2*pi*Gxy = -Im A,  2*pi*Gyy = -Re A + 2*pi/Im tau,

so the trace is identically 1/Im tau and every non-degenerate critical point
with positive determinant is a local minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    PI,
    TWO_PI,
    LatticeData,
    TorusPoint,
    theta1_abs,
    zeta_w,
    zeta_wp_raw,
    wp,
)


@dataclass(frozen=True)
class GreenGradient:
    """Complex derivative dG/dz together with the real gradient (gx, gy)."""

    dGdz: complex
    gx: float
    gy: float

    @property
    def norm(self) -> float:
        return math.hypot(self.gx, self.gy)


@dataclass(frozen=True)
class HessianData:
    gxx: float
    gxy: float
    gyy: float
    det: float
    trace: float


def _as_complex(z) -> complex:
    if isinstance(z, TorusPoint):
        return z.z
    return complex(z)


def _make_gradient(dGdz: complex) -> GreenGradient:
    return GreenGradient(dGdz=dGdz, gx=2.0 * dGdz.real, gy=-2.0 * dGdz.imag)


def _make_hessian(A: complex, L: LatticeData) -> HessianData:
    gxx = A.real / TWO_PI
    gxy = -A.imag / TWO_PI
    gyy = (-A.real + TWO_PI / L.im_tau) / TWO_PI
    return HessianData(
        gxx=gxx,
        gxy=gxy,
        gyy=gyy,
        det=gxx * gyy - gxy * gxy,
        trace=gxx + gyy,
    )


def grad_G(z, L: LatticeData) -> GreenGradient:
    """Gradient of G at z (complex or TorusPoint).  Pole at lattice points."""
    z = _as_complex(z)
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    dGdz = -(zeta_w(z, L) - r * L.eta1 - s * L.eta2) / (4.0 * PI)
    return _make_gradient(dGdz)


def grad_Gp(z, p: complex, L: LatticeData) -> GreenGradient:
    """Gradient of G_p at z; (r, s) are the coordinates of z itself."""
    z = _as_complex(z)
    p = complex(p)
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    dGdz = -(zeta_w(z + p, L) + zeta_w(z - p, L) - 2.0 * (r * L.eta1 + s * L.eta2)) / (8.0 * PI)
    return _make_gradient(dGdz)


def hessian_G(z, L: LatticeData) -> HessianData:
    z = _as_complex(z)
    return _make_hessian(wp(z, L) + L.eta1, L)


def hessian_Gp(z, p: complex, L: LatticeData) -> HessianData:
    z = _as_complex(z)
    p = complex(p)
    A = 0.5 * (wp(z + p, L) + wp(z - p, L)) + L.eta1
    return _make_hessian(A, L)


def hessian_Gp_det_closed(z, p: complex, L: LatticeData) -> float:
    """det D^2 G_p from the closed form

        (1 / (4 Im tau^2)) * (1 - |(wp(z+p)+wp(z-p)+2*eta1) * Im tau / (2*pi) - 1|^2),

    algebraically identical to the entry-wise determinant; kept as a guard on
    the entry-wise path.
    """
    z = _as_complex(z)
    B = wp(z + p, L) + wp(z - p, L) + 2.0 * L.eta1
    t = B * L.im_tau / TWO_PI - 1.0
    return (1.0 - abs(t) ** 2) / (4.0 * L.im_tau**2)


def green_value_rel(z, L: LatticeData):
    """G up to an additive constant (the zero-mean normalization is NOT applied).

    Computed from the doubly periodic combination

        -log|theta1(pi*z)| / (2*pi) + (Im z)^2 / (2 Im tau)

    in the series frame (the value is conformally natural, so the frame only
    shifts the constant); +inf at lattice points.
    """
    scalar = np.isscalar(z) or isinstance(z, complex)
    if isinstance(z, TorusPoint):
        z, scalar = z.z, True
    a, w0 = theta1_abs(z, L)
    with np.errstate(divide="ignore"):
        val = -np.log(a) / TWO_PI + w0.imag**2 / (2.0 * L._im_eval)
    return float(val[()]) if scalar else val


# ---------------------------------------------------------------------------
# vectorized internals for the root finders
# ---------------------------------------------------------------------------

def gradient_and_hessian_arrays(z, p, L: LatticeData):
    """(gx, gy, gxx, gxy, gyy) as float arrays; p=None means G, else G_p.

    Pole entries propagate as nan so that Newton iterations can discard them.
    """
    z = np.asarray(z, dtype=complex)
    s = z.imag / L.im_tau
    r = z.real - s * L.tau.real
    if p is None:
        ze, w = zeta_wp_raw(z, L)
        dGdz = -(ze - r * L.eta1 - s * L.eta2) / (4.0 * PI)
        A = w + L.eta1
    else:
        zp, wpp = zeta_wp_raw(z + p, L)
        zm, wpm = zeta_wp_raw(z - p, L)
        dGdz = -(zp + zm - 2.0 * (r * L.eta1 + s * L.eta2)) / (8.0 * PI)
        A = 0.5 * (wpp + wpm) + L.eta1
    gx = 2.0 * dGdz.real
    gy = -2.0 * dGdz.imag
    gxx = A.real / TWO_PI
    gxy = -A.imag / TWO_PI
    gyy = (-A.real + TWO_PI / L.im_tau) / TWO_PI
    return gx, gy, gxx, gxy, gyy
