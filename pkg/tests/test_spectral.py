"""Fourier-multiplier operators checked against closed forms."""

import numpy as np

from muskat import spectral

ALPHA64 = np.linspace(-np.pi, np.pi, 64, endpoint=False)


def random_bandlimited(rng, n=64, kmax=20):
    f = np.zeros(n)
    alpha = np.linspace(-np.pi, np.pi, n, endpoint=False)
    for k in range(1, kmax + 1):
        f += rng.standard_normal() * np.cos(k * alpha)
        f += rng.standard_normal() * np.sin(k * alpha)
    return f


def test_deriv_sin3():
    err = spectral.deriv(np.sin(3 * ALPHA64)) - 3 * np.cos(3 * ALPHA64)
    assert np.max(np.abs(err)) < 1e-12


def test_deriv_constant():
    assert np.max(np.abs(spectral.deriv(np.ones(64)))) == 0.0


def test_deriv_exp_sin():
    f = np.exp(np.sin(ALPHA64))
    err = spectral.deriv(f) - np.cos(ALPHA64) * f
    assert np.max(np.abs(err)) < 1e-10


def test_hilbert_cos3():
    err = spectral.hilbert(np.cos(3 * ALPHA64)) - np.sin(3 * ALPHA64)
    assert np.max(np.abs(err)) < 1e-12


def test_hilbert_constant():
    assert np.max(np.abs(spectral.hilbert(np.ones(64)))) == 0.0


def test_hilbert_involution():
    rng = np.random.default_rng(7)
    f = random_bandlimited(rng)
    err = spectral.hilbert(spectral.hilbert(f)) + (f - np.mean(f))
    assert np.max(np.abs(err)) < 1e-12


def test_lambda_cos():
    err = spectral.lambda_op(np.cos(ALPHA64)) - np.cos(ALPHA64)
    assert np.max(np.abs(err)) < 1e-12


def test_lambda_constant():
    assert np.max(np.abs(spectral.lambda_op(np.ones(64)))) == 0.0


def test_lambda_is_hilbert_of_deriv():
    rng = np.random.default_rng(11)
    f = random_bandlimited(rng)
    err = spectral.lambda_op(f) - spectral.hilbert(spectral.deriv(f))
    assert np.max(np.abs(err)) < 1e-12


def test_sobolev_zero_function():
    assert spectral.sobolev_norm(np.zeros(64), order=3) == 0.0


def test_sobolev_cos_l2():
    val = spectral.sobolev_norm(np.cos(ALPHA64), order=0)
    assert abs(val - np.sqrt(np.pi)) < 1e-12


def test_sobolev_cos2_order3():
    val = spectral.sobolev_norm(np.cos(2 * ALPHA64), order=3)
    assert abs(val - np.sqrt(65 * np.pi)) < 1e-12


def test_krasny_zero_threshold_identity():
    rng = np.random.default_rng(3)
    f = random_bandlimited(rng)
    assert np.array_equal(spectral.krasny_filter(f, 0.0), f)


def test_krasny_removes_constructed_noise():
    f = np.cos(ALPHA64) + 1e-15 * np.cos(20 * ALPHA64)
    out = spectral.krasny_filter(f, 1e-13)
    assert np.max(np.abs(out - np.cos(ALPHA64))) < 1e-14
    assert spectral.mode_amplitude(out, 20) == 0.0


def test_krasny_idempotent():
    rng = np.random.default_rng(5)
    f = random_bandlimited(rng) + 1e-14 * np.cos(30 * ALPHA64)
    once = spectral.krasny_filter(f, 1e-10)
    twice = spectral.krasny_filter(once, 1e-10)
    assert np.max(np.abs(once - twice)) < 1e-13


def test_exp_filter_preserves_low_modes():
    f = np.cos(3 * ALPHA64) + np.sin(5 * ALPHA64)
    assert np.max(np.abs(spectral.exp_filter(f) - f)) < 1e-10


def test_exp_filter_kills_nyquist_band():
    assert np.max(np.abs(spectral.exp_filter(np.cos(32 * ALPHA64)))) < 1e-14
    assert np.max(np.abs(spectral.exp_filter(np.cos(31 * ALPHA64)))) < 1e-4


def test_trig_interp_matches_samples():
    rng = np.random.default_rng(9)
    f = random_bandlimited(rng)
    out = spectral.trig_interp(f, ALPHA64)
    assert np.max(np.abs(out - f)) < 1e-12


def test_running_integral_of_cos():
    val = spectral.running_integral(np.cos(ALPHA64))
    exact = np.sin(ALPHA64) - np.sin(-np.pi)
    assert np.max(np.abs(val - exact)) < 1e-12
