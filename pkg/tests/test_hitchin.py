import math

import numpy as np
import pytest

from torusgreen import (
    f_rs,
    find_critical_points_Gp,
    grad_Gp,
    hessian_Gp,
    hessian_via_hitchin,
    jacobian_f,
    pvi_residual,
    torus_distance,
    wp,
    wp_inverse,
)
from torusgreen.hitchin import _jac_pieces


def test_f_parity(L_square, L_generic):
    rng = np.random.default_rng(41)
    for L in (L_square, L_generic):
        for _ in range(10):
            r, s = rng.uniform(0.05, 0.45, 2)
            a = f_rs(r, s, L)
            b = f_rs(-r, -s, L)
            if a.finite:
                assert abs(a.f_value - b.f_value) < 1e-9 * (1.0 + abs(a.f_value))


def test_f_infinite_at_rhombic_third(L_rhombic):
    # (1+tau)/3 is a critical point of G itself, so the denominator vanishes
    sample = f_rs(1.0 / 3.0, 1.0 / 3.0, L_rhombic)
    assert not sample.finite
    assert not sample.in_U
    assert abs(sample.denom) < 1e-9


def test_f_rejects_half_integer_grid(L_square):
    with pytest.raises(ValueError):
        f_rs(0.5, 0.0, L_square)
    with pytest.raises(ValueError):
        f_rs(0.5, 0.5, L_square)


def test_round_trip_square(L_square):
    sample = f_rs(0.3, 0.3, L_square)
    assert sample.in_U
    p, mp = wp_inverse(sample.f_value, L_square)
    assert abs(wp(p, L_square) - sample.f_value) < 1e-10 * (1 + abs(sample.f_value))
    assert torus_distance(mp, -p, L_square) < 1e-10
    assert grad_Gp(0.3 + 0.3j, p, L_square).norm < 1e-8
    # and the finder recovers q among the critical points
    cs = find_critical_points_Gp(p, L_square)
    dmin = min(torus_distance(0.3 + 0.3j, c.location.z, L_square) for c in cs.points)
    assert dmin < 1e-8


def test_wp_inverse_cases(L_square):
    h1, h1b = wp_inverse(L_square.e1, L_square)
    assert torus_distance(h1, 0.5, L_square) < 1e-9 and h1 == h1b
    z = 0.3 + 0.1j
    p, mp = wp_inverse(wp(z, L_square), L_square)
    assert min(torus_distance(p, z, L_square), torus_distance(p, -z, L_square)) < 1e-9
    # e3(i) = 0, so c = 0 inverts to the half period (1+i)/2
    p0, _ = wp_inverse(0j, L_square)
    assert torus_distance(p0, 0.5 + 0.5j, L_square) < 1e-9
    # large |c| lands near the lattice points
    big, _ = wp_inverse(4000.0 + 3000.0j, L_square)
    assert min(torus_distance(big, w, L_square) for w in (0j,)) < 0.05


def test_jacobian_matches_fd(L_square):
    rng = np.random.default_rng(43)
    eps = 1e-6
    checked = 0
    while checked < 50:
        r, s = rng.uniform(0.08, 0.92, 2)
        if abs(2 * r - round(2 * r)) < 0.02 and abs(2 * s - round(2 * s)) < 0.02:
            continue
        sample = f_rs(r, s, L_square)
        if not sample.in_U:
            continue
        neighbors = [
            f_rs(r + eps, s, L_square), f_rs(r - eps, s, L_square),
            f_rs(r, s + eps, L_square), f_rs(r, s - eps, L_square),
        ]
        if not all(n.finite for n in neighbors):
            continue
        J = jacobian_f(r, s, L_square)
        fr = (neighbors[0].f_value - neighbors[1].f_value) / (2 * eps)
        fs = (neighbors[2].f_value - neighbors[3].f_value) / (2 * eps)
        J_fd = np.array([[fr.real, fs.real], [fr.imag, fs.imag]])
        scale = np.abs(J_fd).max()
        assert np.abs(J - J_fd).max() < 1e-5 * scale, (r, s)
        checked += 1


def test_jacobian_parity(L_square):
    # f(-r,-s) = f(r,s) forces J(-r,-s) = -J(r,s)
    r, s = 0.31, 0.22
    J1 = jacobian_f(r, s, L_square)
    J2 = jacobian_f(-r, -s, L_square)
    assert np.abs(J1 + J2).max() < 1e-7 * np.abs(J1).max()


def test_hessian_via_hitchin_matches_direct(L_square, L_rhombic):
    rng = np.random.default_rng(47)
    for L in (L_square, L_rhombic):
        checked = 0
        while checked < 20:
            r, s = rng.uniform(0.06, 0.94, 2)
            if min(abs(2 * r - round(2 * r)), abs(2 * s - round(2 * s))) < 0.02:
                continue
            sample = f_rs(r, s, L)
            if not sample.in_U:
                continue
            p, _ = wp_inverse(sample.f_value, L)
            via_f = hessian_via_hitchin(r, s, L)
            direct = hessian_Gp(r + s * L.tau, p, L).det
            assert abs(via_f - direct) < 1e-6 * (1.0 + abs(direct))
            checked += 1


def test_cpq_positive(L_square):
    rng = np.random.default_rng(53)
    for _ in range(20):
        r, s = rng.uniform(0.1, 0.9, 2)
        sample = f_rs(r, s, L_square)
        if not sample.in_U:
            continue
        _, p, _, B, _, _ = _jac_pieces(r, s, L_square, sample)
        from torusgreen import wp_prime
        c = abs(B) ** 2 / abs(wp_prime(p, L_square)) ** 2
        assert c > 0


def test_preimage_count_bounded(L_square):
    # solutions in [0,1)^2 of f(r,s) = wp(p): at most 6 (three +/- pairs)
    p = 0.3 + 0.2j
    target = wp(p, L_square)
    cs = find_critical_points_Gp(p, L_square)
    nontrivial = cs.nontrivial
    assert len(nontrivial) <= 6
    found = set()
    n = 48
    for i in range(n):
        for j in range(n):
            r, s = (i + 0.5) / n, (j + 0.5) / n
            sample = f_rs(r, s, L_square)
            if sample.finite and abs(sample.f_value - target) < 0.5:
                dmin = min(
                    torus_distance(r + s * 1j, c.location.z, L_square)
                    for c in nontrivial
                ) if nontrivial else math.inf
                if dmin < 0.1:
                    found.add(min(
                        range(len(nontrivial)),
                        key=lambda k: torus_distance(r + s * 1j, nontrivial[k].location.z, L_square),
                    ))
    assert len(found) == len(nontrivial)


# ---------------------------------------------------------------------------
# elliptic Painleve VI residual
# ---------------------------------------------------------------------------

def test_pvi_residual_square():
    res = pvi_residual(0.3, 0.3, 1j, 1e-3)
    assert res < 1e-4


def test_pvi_second_order_convergence():
    r1 = pvi_residual(0.3, 0.3, 1j, 1e-3)
    r2 = pvi_residual(0.3, 0.3, 1j, 2e-3)
    assert 3.5 <= r2 / r1 <= 4.5


def test_pvi_five_point_is_tighter():
    r3 = pvi_residual(0.3, 0.3, 1j, 1e-3)
    r5 = pvi_residual(0.3, 0.3, 1j, 1e-3, five_point=True)
    assert r5 < r3


def test_pvi_real_direction():
    assert pvi_residual(0.3, 0.3, 1j, 1e-3, direction=1.0) < 1e-4


def test_pvi_excluded_outside_U(L_rhombic):
    with pytest.raises(ValueError):
        pvi_residual(1.0 / 3.0, 1.0 / 3.0, L_rhombic.tau, 1e-3)
