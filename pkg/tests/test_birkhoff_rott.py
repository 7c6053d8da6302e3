"""Singular-integral evaluation and the second-kind vorticity solve."""

import numpy as np
import pytest

from muskat import birkhoff_rott as br
from muskat import contour
from muskat.errors import GeometryError

from conftest import random_closed_curve


def test_br_flat_constant_strength_is_zero(flat_curve):
    vel = br.br_eval(flat_curve, np.ones(flat_curve.n))
    assert np.max(np.abs(vel)) < 1e-13


def test_br_circle_constant_strength_tangential(unit_circle):
    # constant strength on the unit circle induces the purely tangential
    # average field tau / 2
    vel = br.br_eval(unit_circle, np.ones(unit_circle.n))
    exact = unit_circle.tangent() / 2.0
    assert np.max(np.abs(vel - exact)) < 1e-12


def test_br_linearity(splash_curve):
    rng = np.random.default_rng(7)
    a = rng.standard_normal(splash_curve.n)
    b = rng.standard_normal(splash_curve.n)
    kern = br.remainder_matrix(splash_curve)
    lhs = br.br_eval(splash_curve, 2.0 * a - 3.0 * b, kern)
    rhs = 2.0 * br.br_eval(splash_curve, a, kern) - \
        3.0 * br.br_eval(splash_curve, b, kern)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_solve_residual_physical(splash_curve, params):
    omega = br.solve_omega(splash_curve, params)
    kern = br.remainder_matrix(splash_curve)
    resid = omega + br.br_operator_apply(splash_curve, omega, kern) - \
        br.vorticity_forcing(splash_curve, params)
    assert np.max(np.abs(resid)) < 1e-8


def test_solve_residual_tilde(tilde_curve, params):
    omega = br.solve_omega(tilde_curve, params, domain="tilde")
    kern = br.remainder_matrix(tilde_curve)
    resid = omega + br.br_operator_apply(tilde_curve, omega, kern) - \
        br.vorticity_forcing(tilde_curve, params, domain="tilde")
    assert np.max(np.abs(resid)) < 1e-8


def test_solve_random_curve_corpus(params):
    rng = np.random.default_rng(2026)
    for _ in range(20):
        curve = random_closed_curve(rng)
        omega = br.solve_omega(curve, params)
        kern = br.remainder_matrix(curve)
        resid = omega + br.br_operator_apply(curve, omega, kern) - \
            br.vorticity_forcing(curve, params)
        assert np.max(np.abs(resid)) < 1e-8


def test_picard_matches_krylov(splash_curve, params):
    a = br.solve_omega(splash_curve, params)
    b = br.picard_omega(splash_curve, params)
    assert np.max(np.abs(a - b)) < 1e-8


def test_closed_curve_omega_mean_free(unit_circle, params):
    omega = br.solve_omega(unit_circle, params)
    assert abs(np.mean(omega)) < 1e-12


def test_small_amplitude_linearization(params):
    # for z = alpha + i eps cos(alpha), omega = 2 (rho0/mu0) eps sin(alpha)
    # to first order in eps
    eps = 1e-6
    alpha = np.linspace(-np.pi, np.pi, 256, endpoint=False)
    curve = contour.SampledCurve(alpha, alpha.copy(), eps * np.cos(alpha),
                                 contour.GRAPH)
    omega = br.solve_omega(curve, params)
    pred = 2.0 * params.ratio * eps * np.sin(alpha)
    assert np.max(np.abs(omega - pred)) < 1e-10


def test_surface_velocity_normal_component(splash_curve, params):
    # the tangential correction omega z_alpha / (2|z_alpha|^2) must not
    # change the normal velocity: n . u equals n . BR
    omega = br.solve_omega(splash_curve, params)
    kern = br.remainder_matrix(splash_curve)
    u = br.surface_velocity(splash_curve, omega, kern)
    v = br.br_eval(splash_curve, omega, kern)
    tau = splash_curve.tangent()
    normal = 1j * tau / np.abs(tau)
    nu = np.real(np.conjugate(normal) * u)
    nv = np.real(np.conjugate(normal) * v)
    assert np.max(np.abs(nu - nv)) < 1e-12


def test_velocity_field_flat_jump(flat_curve):
    # a flat sheet with omega = 1 induces uniform horizontal streams of
    # opposite sign on the two sides, total jump of magnitude 1
    above = br.velocity_field(flat_curve, np.ones(flat_curve.n), 5.0j)
    below = br.velocity_field(flat_curve, np.ones(flat_curve.n), -5.0j)
    assert abs(above - (-0.5)) < 1e-12
    assert abs(below - 0.5) < 1e-12


def test_velocity_field_far_decay(unit_circle):
    # mean-free strength: the far field decays at least like 1/|x|
    omega = np.sin(2.0 * unit_circle.alpha)
    near = abs(br.velocity_field(unit_circle, omega, 4.0 + 0.0j))
    far = abs(br.velocity_field(unit_circle, omega, 40.0 + 0.0j))
    assert far < near / 9.0


def test_velocity_field_rejects_near_point(flat_curve):
    with pytest.raises(GeometryError):
        br.velocity_field(flat_curve, np.ones(flat_curve.n), 0.01j)


def test_fluid_params_validation():
    with pytest.raises(GeometryError):
        br.FluidParams(rho0=-1.0)
