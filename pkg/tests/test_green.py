import math

import numpy as np

from torusgreen import (
    grad_G,
    grad_Gp,
    green_value_rel,
    hessian_G,
    hessian_Gp,
    make_lattice,
)
from torusgreen.green import hessian_Gp_det_closed

PI = math.pi


def test_half_periods_critical_for_G(all_lattices):
    for L in all_lattices:
        for k in (1, 2, 3):
            assert grad_G(L.half_period(k), L).norm < 1e-13


def test_rhombic_nontrivial_critical_point(L_rhombic):
    q = (1.0 + L_rhombic.tau) / 3.0
    assert grad_G(q, L_rhombic).norm < 1e-10
    assert grad_G(-q, L_rhombic).norm < 1e-10


def test_grad_G_matches_fd_of_value(L_square):
    z0 = 0.31 + 0.27j
    h = 1e-5
    g = grad_G(z0, L_square)
    fd_gx = (green_value_rel(z0 + h, L_square) - green_value_rel(z0 - h, L_square)) / (2 * h)
    fd_gy = (green_value_rel(z0 + 1j * h, L_square) - green_value_rel(z0 - 1j * h, L_square)) / (2 * h)
    assert abs(fd_gx - g.gx) < 1e-6
    assert abs(fd_gy - g.gy) < 1e-6


def test_half_periods_critical_for_Gp(all_lattices):
    rng = np.random.default_rng(3)
    for L in all_lattices:
        p = rng.uniform(0.1, 0.4) + rng.uniform(0.1, 0.4) * L.tau
        for k in range(4):
            assert grad_Gp(L.half_period(k), p, L).norm < 1e-12


def test_grad_Gp_odd(L_square):
    rng = np.random.default_rng(4)
    p = 0.23 + 0.31j
    for _ in range(10):
        z = rng.uniform(0.05, 0.95) + rng.uniform(0.05, 0.95) * 1j
        a = grad_Gp(z, p, L_square)
        b = grad_Gp(-z, p, L_square)
        scale = 1.0 + a.norm
        assert abs(a.gx + b.gx) < 1e-11 * scale
        assert abs(a.gy + b.gy) < 1e-11 * scale


def test_hessian_trace(all_lattices):
    rng = np.random.default_rng(5)
    for L in all_lattices:
        for _ in range(10):
            z = rng.uniform(0.05, 0.95) + rng.uniform(0.05, 0.95) * L.tau
            assert abs(hessian_G(z, L).trace - 1.0 / L.im_tau) < 1e-10
            p = rng.uniform(0.1, 0.45) + rng.uniform(0.1, 0.45) * L.tau
            assert abs(hessian_Gp(z, p, L).trace - 1.0 / L.im_tau) < 1e-10


def test_hessian_det_consistency(hessian_pairs=20):
    L = make_lattice(0.3 + 1.2j)
    rng = np.random.default_rng(6)
    p = 0.21 + 0.17 * L.tau
    for _ in range(hessian_pairs):
        z = rng.uniform(0.03, 0.97) + rng.uniform(0.03, 0.97) * L.tau
        det_entries = hessian_Gp(z, p, L).det
        det_closed = hessian_Gp_det_closed(z, p, L)
        assert abs(det_entries - det_closed) < 1e-12 * (1.0 + abs(det_closed))


def test_hessian_matches_fd_of_value(L_square):
    z0 = 0.2 + 0.4j
    h = 1e-4
    gv = lambda zz: green_value_rel(zz, L_square)
    H = hessian_G(z0, L_square)
    gxx = (gv(z0 + h) - 2 * gv(z0) + gv(z0 - h)) / h**2
    gyy = (gv(z0 + 1j * h) - 2 * gv(z0) + gv(z0 - 1j * h)) / h**2
    gxy = (gv(z0 + h + 1j * h) - gv(z0 + h - 1j * h) - gv(z0 - h + 1j * h) + gv(z0 - h - 1j * h)) / (4 * h * h)
    assert abs(gxx - H.gxx) < 1e-4
    assert abs(gyy - H.gyy) < 1e-4
    assert abs(gxy - H.gxy) < 1e-4


def test_hessian_sign_examples(L_rhombic):
    q = (1.0 + L_rhombic.tau) / 3.0
    assert hessian_G(q, L_rhombic).det > 0
    assert hessian_G(-q, L_rhombic).det > 0
    tau = 1 + math.sqrt(3) * 1j
    L = make_lattice(tau)
    p = tau / 4.0
    for z in (0j, 0.5 + 0j, tau / 2.0, (1 + tau) / 2.0):
        assert hessian_Gp(z, p, L).det < 0


def test_value_symmetries(L_square, L_generic):
    rng = np.random.default_rng(7)
    for L in (L_square, L_generic):
        for _ in range(8):
            z = rng.uniform(0.05, 0.95) + rng.uniform(0.05, 0.95) * L.tau
            v = green_value_rel(z, L)
            assert abs(v - green_value_rel(-z, L)) < 1e-11
            assert abs(v - green_value_rel(z + 1, L)) < 1e-11
            assert abs(v - green_value_rel(z + L.tau, L)) < 1e-11


def test_value_unbounded_at_pole(L_square):
    assert green_value_rel(0j, L_square) == math.inf
    # the Green function rises to +infinity at the source
    assert green_value_rel(1e-4 + 0j, L_square) > green_value_rel(0.3 + 0.4j, L_square)
