import math

import numpy as np
import pytest

from torusgreen import (
    classify_region,
    disk_B0,
    disk_Bk,
    find_critical_points_Gp,
    half_period_sign,
    hessian_Gp,
    make_lattice,
    torus_distance,
    wp,
)
from torusgreen.degeneracy import all_disks, boundary_intersection_angle
from torusgreen.hitchin import wp_inverse

PI = math.pi


# ---------------------------------------------------------------------------
# disk constants for the two symmetric lattices
# ---------------------------------------------------------------------------

def test_disks_square(L_square):
    b0 = disk_B0(L_square)
    assert abs(b0.center) < 1e-12 and abs(b0.radius - PI) < 1e-12
    b3 = disk_Bk(L_square, 3)
    assert abs(b3.center) < 2e-3 * PI
    assert abs(b3.radius - 4.78927 * PI) < 2e-3 * PI
    assert b3.flipped  # omega_3/2 is the minimum of G at tau = i
    b1 = disk_Bk(L_square, 1)
    assert abs(b1.center - (-3.3435 * PI)) < 2e-3 * PI
    assert abs(b1.radius - 2.5278 * PI) < 2e-3 * PI
    assert not b1.flipped
    b2 = disk_Bk(L_square, 2)
    assert abs(b2.center + b1.center) < 1e-9 * abs(b1.center)
    assert abs(b2.radius - b1.radius) < 1e-9 * b1.radius
    # e3 = 0 sits inside B_0
    assert b0.membership(L_square.e3) == "inside"


def test_disks_rhombic(L_rhombic):
    b0 = disk_B0(L_rhombic)
    assert abs(b0.center) < 1e-12
    assert abs(b0.radius - 2.0 * PI / math.sqrt(3.0)) < 1e-12
    b1 = disk_Bk(L_rhombic, 1)
    assert abs(b1.center - (-7.1816 * PI)) < 2e-3 * PI
    assert abs(b1.radius - 5.5715 * PI) < 2e-3 * PI
    # B2 and B3 are the rotations -e^{+-i pi/3} B1
    rot = complex(math.cos(PI / 3), math.sin(PI / 3))
    b2, b3 = disk_Bk(L_rhombic, 2), disk_Bk(L_rhombic, 3)
    assert abs(b2.center - (-rot) * b1.center) < 1e-8 * abs(b1.center)
    assert abs(b3.center - (-rot.conjugate()) * b1.center) < 1e-8 * abs(b1.center)
    assert abs(b2.radius - b1.radius) < 1e-8 * b1.radius


def test_disk_B0_rect_from_constants(L_rect):
    d = disk_B0(L_rect)
    assert abs(d.center - (PI / 2.0 - L_rect.eta1)) < 1e-13
    assert abs(d.center - (-1.7187964545050938)) < 1e-12  # pi/2 - eta1(2i)
    assert abs(d.radius - PI / 2.0) < 1e-13


def test_boundaries_pairwise_distinct(all_lattices):
    for L in all_lattices:
        disks = all_disks(L)
        for i in range(4):
            for j in range(i + 1, 4):
                di, dj = disks[i], disks[j]
                same_center = abs(di.center - dj.center) < 1e-9 * (1 + abs(di.center))
                same_radius = abs(di.radius - dj.radius) < 1e-9 * (1 + di.radius)
                assert not (same_center and same_radius)


def test_boundary_intersection_angle(L_square):
    # B2 and B3 overlap at tau = i (e1 lies in both), so their boundaries meet
    ang = boundary_intersection_angle(L_square, 2, 3)
    assert ang is not None and 0.0 < ang < PI
    # B1 and B2 are disjoint at tau = i
    assert boundary_intersection_angle(L_square, 1, 2) is None


# ---------------------------------------------------------------------------
# signs at half periods
# ---------------------------------------------------------------------------

def test_half_period_sign_square_regions(L_square):
    e1 = L_square.e1.real
    # region B2 \ closure(B3): signs (-,-,+,+), m = 2
    w = 5.5 * PI + 0j
    rc = classify_region(w, L_square)
    assert rc.signs == (-1, -1, 1, 1) and rc.m == 2 and rc.menu == (6,)
    # far outside everything: positive only at k = 3 (flipped), m = 1
    w = 40.0 * PI + 5j
    rc = classify_region(w, L_square)
    assert rc.signs == (-1, -1, -1, 1) and rc.m == 1 and rc.menu == (4, 8)
    # inside B0 only: m = 1 through k = 0
    rc = classify_region(0.5j * PI, L_square)
    assert rc.signs[0] == 1 and rc.m >= 1


def test_half_period_sign_matches_membership_prediction():
    rng = np.random.default_rng(23)
    agree = 0
    for _ in range(500):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
        L = make_lattice(tau)
        p = rng.uniform(0.03, 0.97) + rng.uniform(0.03, 0.97) * tau
        if min(torus_distance(p, L.half_period(k), L) for k in range(4)) < 1e-3:
            continue
        rc = classify_region(wp(p, L), L)
        if "boundary" in rc.memberships:
            continue
        for k in range(4):
            assert half_period_sign(p, k, L) == rc.signs[k]
        agree += 1
    assert agree > 400


def test_half_period_sign_is_hessian_sign(L_square, L_generic):
    rng = np.random.default_rng(29)
    for L in (L_square, L_generic):
        for _ in range(20):
            p = rng.uniform(0.06, 0.94) + rng.uniform(0.06, 0.94) * L.tau
            if min(torus_distance(p, L.half_period(k), L) for k in range(4)) < 0.05:
                continue
            for k in range(4):
                det = hessian_Gp(L.half_period(k), p, L).det
                s = half_period_sign(p, k, L)
                if s != 0:
                    assert s == (1 if det > 0 else -1)


def test_boundary_band_reports_zero(L_square):
    # pick wp(p) exactly on the circle |w| = pi (the k = 0 boundary)
    w = PI * complex(math.cos(0.7), math.sin(0.7))
    p, _ = wp_inverse(w, L_square)
    assert half_period_sign(p, 0, L_square) == 0
    rc = classify_region(wp(p, L_square), L_square)
    assert rc.memberships[0] == "boundary" and rc.signs[0] == 0


def test_sign_errors_on_half_period(L_square):
    with pytest.raises(ValueError):
        half_period_sign(0.5 + 0j, 1, L_square)
    with pytest.raises(ValueError):
        classify_region(L_square.e1, L_square)


# ---------------------------------------------------------------------------
# consistency with the finder
# ---------------------------------------------------------------------------

def test_menu_consistency_random():
    rng = np.random.default_rng(31)
    done = 0
    while done < 12:
        tau = complex(rng.uniform(-0.4, 0.4), rng.uniform(0.6, 1.6))
        L = make_lattice(tau)
        p = rng.uniform(0.08, 0.92) + rng.uniform(0.08, 0.92) * tau
        if min(torus_distance(p, L.half_period(k), L) for k in range(4)) < 0.05:
            continue
        rc = classify_region(wp(p, L), L)
        if "boundary" in rc.memberships:
            continue
        cs = find_critical_points_Gp(p, L)
        if cs.all_nondegenerate:
            assert cs.count in rc.menu, (tau, p, cs.count, rc)
            done += 1
    assert done == 12


def test_m_at_most_two_on_samples():
    rng = np.random.default_rng(37)
    for _ in range(150):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
        L = make_lattice(tau)
        p = rng.uniform(0.04, 0.96) + rng.uniform(0.04, 0.96) * tau
        if min(torus_distance(p, L.half_period(k), L) for k in range(4)) < 1e-3:
            continue
        rc = classify_region(wp(p, L), L)
        assert rc.m <= 2


# on the segment from e^{i pi/3} to i where det D^2 G((1+tau)/2) crosses zero
# (bisected to ~2^-80; (1+tau)/2 is then a degenerate critical point of G)
TAU_DEGENERATE = 0.3197869194948038 + 0.9143133531713309j


def test_degenerate_curve_halfplane():
    L = make_lattice(TAU_DEGENERATE)
    from torusgreen import hessian_G

    assert abs(hessian_G((1 + L.tau) / 2, L).det) < 1e-12
    d3 = disk_Bk(L, 3)
    assert d3.kind == "halfplane"
    assert disk_Bk(L, 1).kind == "disk" and disk_Bk(L, 2).kind == "disk"
    # half-plane membership keeps the unflipped orientation of the k=3 sign
    for t, expect in ((0.7, 1), (0.3, -1)):
        w = d3.ek + t / d3.alpha
        rc = classify_region(w, L)
        assert rc.memberships[3] == ("inside" if expect > 0 else "outside")
        assert rc.signs[3] == expect
        p, _ = wp_inverse(w, L)
        assert half_period_sign(p, 3, L) == expect


def test_degenerate_curve_finder_reports_flag():
    # G on the degenerate-curve torus: 3 critical points, one degenerate,
    # reported with local degree 0 and undefined degree sum (not guessed)
    from torusgreen import find_critical_points_G
    from torusgreen.critpoints import DegenerateSetError
    from torusgreen import verify_degree as vd

    L = make_lattice(TAU_DEGENERATE)
    cs = find_critical_points_G(L)
    assert cs.count == 3
    assert not cs.all_nondegenerate
    assert cs.degree_sum is None
    degenerate = [c for c in cs.points if c.classification == "degenerate"]
    assert len(degenerate) == 1
    assert degenerate[0].kind == "trivial"
    assert degenerate[0].local_degree == 0
    assert torus_distance(degenerate[0].location.z, (1 + L.tau) / 2, L) < 1e-10
    with pytest.raises(DegenerateSetError):
        vd(cs)


def test_small_p_regime_rhombic(L_rhombic):
    # rhombic torus, p close to 0: exactly 6 points and the nontrivial pair
    # stays near the two minima of G at +-(1+tau)/3
    q = (1.0 + L_rhombic.tau) / 3.0
    for p in (0.025, 0.04 * 1j * L_rhombic.tau / abs(L_rhombic.tau), 0.03 + 0.02j):
        cs = find_critical_points_Gp(p, L_rhombic)
        assert cs.count == 6
        assert cs.all_nondegenerate
        minima = [c for c in cs.points if c.classification == "minimum"]
        assert len(minima) == 2
        for c in minima:
            assert min(
                torus_distance(c.location.z, t, L_rhombic) for t in (q, -q)
            ) < 0.12
