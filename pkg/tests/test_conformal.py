"""Half-tangent map, its inverse, and the derived factors."""

import numpy as np

from muskat import conformal


def test_P_at_zero():
    assert abs(conformal.map_P(0.0 + 0.0j)) < 1e-14


def test_P_at_half_pi():
    assert abs(conformal.map_P(np.pi / 2 + 0.0j) - 1.0) < 1e-14


def test_P_periodicity():
    w = 0.7 + 0.4j
    assert abs(conformal.map_P(w + 2 * np.pi) - conformal.map_P(w)) < 1e-12


def test_P_inv_fixed_points():
    assert abs(conformal.map_P_inv(0.0 + 0.0j)) < 1e-14
    assert abs(conformal.map_P_inv(1.0 + 0.0j) - np.pi / 2) < 1e-12


def test_P_round_trip_away_from_singular_points():
    # sample zeta on the range of the chosen sheet (P of admissible w),
    # where the inverse is exact; off the sheet P(P^{-1}) flips the sign
    rng = np.random.default_rng(2)
    count = 0
    while count < 100:
        w = rng.uniform(-3, 3) + 1j * rng.uniform(-1.5, 1.5)
        if abs(w) < 0.3 or min(abs(w - np.pi), abs(w + np.pi)) < 0.3:
            continue
        zeta = conformal.map_P(w)
        if np.min(np.abs(zeta - conformal.Q_POINTS)) < 0.2:
            continue
        back = conformal.map_P(conformal.map_P_inv(zeta))
        assert abs(back - zeta) < 1e-12
        count += 1


def test_P_inv_two_to_one_sign():
    zeta = 1.3 - 0.4j
    back = conformal.map_P(conformal.map_P_inv(zeta))
    assert min(abs(back - zeta), abs(back + zeta)) < 1e-12


def test_dP_dw_at_half_pi():
    assert abs(conformal.dP_dw(np.pi / 2 + 0.0j) - 0.5) < 1e-8


def test_dP_dw_finite_difference():
    rng = np.random.default_rng(4)
    h = 1e-6
    done = 0
    while done < 50:
        w = rng.uniform(-2.5, 2.5) + 1j * rng.uniform(-1.5, 1.5)
        if abs(w) < 0.3 or min(abs(w - np.pi), abs(w + np.pi)) < 0.3:
            continue
        fd = (conformal.map_P(w + h) - conformal.map_P(w - h)) / (2 * h)
        val = conformal.dP_dw(w)
        assert abs(val - fd) / abs(fd) < 1e-6
        done += 1


def test_dP_dw_blows_up_at_branch_point():
    assert abs(conformal.dP_dw(1e-4 + 0.0j)) > 10.0


def test_q_factor_at_one():
    assert abs(conformal.q_factor(np.array([1.0 + 0.0j]))[0] - 0.25) < 1e-8


def test_q_factor_near_q0():
    zeta = 0.1 * np.exp(1j * np.linspace(0.2, 1.2, 5))
    q2 = conformal.q_factor(zeta)
    expected = 1.0 / (16 * np.abs(zeta) ** 2)
    assert np.max(np.abs(q2 / expected - 1.0)) < 0.1


def test_q_factor_positive_on_admissible_curve(tilde_curve):
    assert np.min(conformal.q_factor(tilde_curve.z)) > 0.0


def test_grad_p2_inv_at_one():
    g = conformal.grad_P2_inv(np.array([1.0 + 0.0j]))[0]
    assert abs(g[0]) < 1e-10
    assert abs(g[1] - 2.0) < 1e-10


def test_grad_p2_inv_orthogonal_to_p1():
    # Cauchy-Riemann: grad(Re w) . grad(Im w) = 0 for the holomorphic inverse
    rng = np.random.default_rng(6)
    h = 1e-6
    done = 0
    while done < 50:
        zeta = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
        if np.min(np.abs(zeta - conformal.Q_POINTS)) < 0.3:
            continue
        g = conformal.grad_P2_inv(np.array([zeta]))[0]
        gp = 4.0 * zeta / (1.0 + zeta ** 4)   # holomorphic derivative
        g1 = np.array([gp.real, -gp.imag])    # grad of Re P^{-1}
        assert abs(g1[0] * g[0] + g1[1] * g[1]) < 1e-10
        done += 1


def test_grad_p2_inv_finite_difference():
    rng = np.random.default_rng(8)
    h = 1e-6
    done = 0
    while done < 50:
        zeta = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
        if np.min(np.abs(zeta - conformal.Q_POINTS)) < 0.3:
            continue
        g = conformal.grad_P2_inv(np.array([zeta]))[0]
        p2 = lambda z: conformal.map_P_inv(z).imag
        fx = (p2(zeta + h) - p2(zeta - h)) / (2 * h)
        fy = (p2(zeta + 1j * h) - p2(zeta - 1j * h)) / (2 * h)
        scale = max(abs(fx), abs(fy))
        assert abs(g[0] - fx) / scale < 1e-6
        assert abs(g[1] - fy) / scale < 1e-6
        done += 1


def test_singular_points_on_unit_circle():
    q = conformal.Q_POINTS
    assert abs(q[0]) == 0.0
    assert np.max(np.abs(np.abs(q[1:]) - 1.0)) < 1e-14
