"""Disk/half-plane geometry governing degeneracy of the trivial critical points.

For each k the region B_k in the wp(p)-plane marks where the half period
omega_k/2 flips between saddle and minimum of G_p:

    B_0 = { w : |w - (pi/Im tau - eta1)| < pi/Im tau },

and for k = 1..3, with

    alpha_k = (pi/Im tau - (eta1 + e_k)) / (3 e_k^2 - g2/4),
    beta_k  = pi / (|3 e_k^2 - g2/4| * Im tau),

B_k is the disk of center e_k + conj(alpha_k)/(|alpha_k|^2 - beta_k^2) and
radius beta_k/||alpha_k|^2 - beta_k^2| when |alpha_k| != beta_k, and the half
plane Re(alpha_k (w - e_k)) > 1/2 otherwise.  The half-plane case happens
exactly when omega_k/2 is a degenerate critical point of G itself, and at
most one k can be in that case.

det D^2 G_p(omega_k/2) is positive iff wp(p) lies inside B_k, EXCEPT when
|alpha_k| < beta_k (omega_k/2 is a minimum of G), where the orientation
flips: positive iff wp(p) lies outside the closure.  The direct formula

    det D^2 G_p(omega_k/2)
        = (1/4 pi^2) (pi^2/Im tau^2 - |wp(p - omega_k/2) - (pi/Im tau - eta1)|^2)

is implemented independently so the two routes can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .elliptic import PI, LatticeData, torus_distance, wp

#: relative width of the boundary band reported as sign 0
BOUNDARY_BAND = 1e-9

#: relative threshold deciding the half-plane (degenerate) case
HALFPLANE_TOL = 1e-9

_MENU = {0: (6, 10), 1: (4, 8), 2: (6,)}


@dataclass(frozen=True)
class AlphaBeta:
    alpha: tuple[complex, complex, complex]
    beta: tuple[float, float, float]


@dataclass(frozen=True)
class DiskOrHalfPlane:
    """Either an open disk or an open half plane in the wp(p)-plane.

    Disk: |w - center| < radius.  Half plane: Re(alpha*(w - ek)) > 1/2.
    ``flipped`` records whether membership corresponds to det < 0 rather than
    det > 0 at the half period (the |alpha_k| < beta_k case); ``condition``
    grows like beta/||alpha|-beta| as the half-plane degeneracy is approached.
    """

    k: int
    kind: str  # "disk" | "halfplane"
    center: complex | None
    radius: float | None
    alpha: complex | None
    ek: complex
    flipped: bool
    condition: float

    def signed_distance(self, w: complex) -> float:
        """Negative inside, positive outside, scale-normalized."""
        if self.kind == "disk":
            return (abs(w - self.center) - self.radius) / self.radius
        return (0.5 - (self.alpha * (w - self.ek)).real) / 0.5

    def membership(self, w: complex, band: float = BOUNDARY_BAND) -> str:
        d = self.signed_distance(w)
        if abs(d) < band:
            return "boundary"
        return "inside" if d < 0 else "outside"


@dataclass(frozen=True)
class RegionClassification:
    """Signs of det D^2 G_p at the four half periods for a given wp(p)."""

    wp_p: complex
    signs: tuple[int, int, int, int]
    m: int
    memberships: tuple[str, str, str, str]
    menu: tuple[int, ...]


def alpha_beta(L: LatticeData) -> AlphaBeta:
    alphas, betas = [], []
    for ek in (L.e1, L.e2, L.e3):
        den = 3.0 * ek * ek - L.g2 / 4.0
        alphas.append((PI / L.im_tau - (L.eta1 + ek)) / den)
        betas.append(PI / (abs(den) * L.im_tau))
    return AlphaBeta(alpha=tuple(alphas), beta=tuple(betas))


def disk_B0(L: LatticeData) -> DiskOrHalfPlane:
    center = PI / L.im_tau - L.eta1
    return DiskOrHalfPlane(
        k=0,
        kind="disk",
        center=center,
        radius=PI / L.im_tau,
        alpha=None,
        ek=0j,
        flipped=False,
        condition=1.0,
    )


def disk_Bk(L: LatticeData, k: int) -> DiskOrHalfPlane:
    if k == 0:
        return disk_B0(L)
    if k not in (1, 2, 3):
        raise ValueError("k must be 0..3")
    ab = alpha_beta(L)
    a, b = ab.alpha[k - 1], ab.beta[k - 1]
    ek = L.e[k - 1]
    gap = abs(abs(a) - b)
    if gap < HALFPLANE_TOL * b:
        return DiskOrHalfPlane(
            k=k,
            kind="halfplane",
            center=None,
            radius=None,
            alpha=a,
            ek=ek,
            flipped=False,
            condition=math.inf,
        )
    den = abs(a) ** 2 - b * b
    return DiskOrHalfPlane(
        k=k,
        kind="disk",
        center=ek + a.conjugate() / den,
        radius=b / abs(den),
        alpha=a,
        ek=ek,
        flipped=(abs(a) < b),
        condition=b / gap,
    )


def all_disks(L: LatticeData) -> list[DiskOrHalfPlane]:
    return [disk_Bk(L, k) for k in range(4)]


def half_period_sign(p: complex, k: int, L: LatticeData, band: float = BOUNDARY_BAND) -> int:
    """Sign of det D^2 G_p(omega_k/2) by the direct formula; 0 within the band."""
    p = complex(p)
    if min(torus_distance(p, L.half_period(j), L) for j in range(4)) < 1e-12:
        raise ValueError("p must not be a half period")
    c0 = PI / L.im_tau - L.eta1
    r0 = PI / L.im_tau
    dist = abs(wp(p - L.half_period(k), L) - c0)
    if abs(dist - r0) < band * r0:
        return 0
    val = (r0 * r0 - dist * dist) / (4.0 * PI * PI)
    return 1 if val > 0 else -1


def classify_region(wp_p: complex, L: LatticeData, band: float = BOUNDARY_BAND) -> RegionClassification:
    """Region data for a given value wp(p): memberships, signs and m.

    The predicted menu of critical point counts is (6, 10) for m = 0,
    (4, 8) for m = 1 and (6,) for m = 2.
    """
    wp_p = complex(wp_p)
    disks = all_disks(L)
    for ek in L.e:
        if abs(wp_p - ek) < 1e-12 * (1.0 + abs(ek)):
            raise ValueError("wp_p must avoid the branch values e1, e2, e3")
    memberships, signs = [], []
    for d in disks:
        mem = d.membership(wp_p, band)
        memberships.append(mem)
        if mem == "boundary":
            signs.append(0)
        else:
            inside = mem == "inside"
            positive = (inside != d.flipped)
            signs.append(1 if positive else -1)
    m = sum(1 for s in signs if s > 0)
    return RegionClassification(
        wp_p=wp_p,
        signs=tuple(signs),
        m=m,
        memberships=tuple(memberships),
        menu=_MENU.get(m, ()),
    )


def boundary_intersection_angle(L: LatticeData, j: int, k: int) -> float | None:
    """Intersection angle (radians) of the boundary circles of B_j and B_k.

    None when either region is a half plane or the circles do not meet.
    """
    dj, dk = disk_Bk(L, j), disk_Bk(L, k)
    if dj.kind != "disk" or dk.kind != "disk":
        return None
    d = abs(dj.center - dk.center)
    if d > dj.radius + dk.radius or d < abs(dj.radius - dk.radius):
        return None
    cosang = (dj.radius**2 + dk.radius**2 - d * d) / (2.0 * dj.radius * dk.radius)
    return math.acos(max(-1.0, min(1.0, cosang)))
