"""Shared fixtures: curves and states reused across the test modules."""

import numpy as np
import pytest

from muskat import birkhoff_rott as br
from muskat import conformal
from muskat import contour
from muskat import evolution


@pytest.fixture(scope="session")
def params():
    return br.FluidParams()


@pytest.fixture(scope="session")
def branch():
    return conformal.BranchSpec()


@pytest.fixture(scope="session")
def flat_curve():
    alpha = np.linspace(-np.pi, np.pi, 256, endpoint=False)
    return contour.SampledCurve(alpha, alpha.copy(), np.zeros(256),
                                contour.GRAPH)


@pytest.fixture(scope="session")
def unit_circle():
    alpha = np.linspace(-np.pi, np.pi, 256, endpoint=False)
    return contour.SampledCurve(alpha, np.cos(alpha), np.sin(alpha),
                                contour.CLOSED)


@pytest.fixture(scope="session")
def splash_curve():
    return contour.make_splash_curve(contour.SplashCurveParams(neck_width=0.05))


@pytest.fixture(scope="session")
def open_curve():
    """An admissible splash-family member held well open (smooth data)."""
    return contour.make_splash_curve(contour.SplashCurveParams(neck_width=0.4))


@pytest.fixture(scope="session")
def tilde_curve(splash_curve, branch):
    return contour.resample_uniform(contour.to_tilde(splash_curve, branch))


@pytest.fixture(scope="session")
def tilde_state(tilde_curve, params, branch):
    state = evolution.EvolutionState(domain=evolution.TILDE, curve=tilde_curve,
                                     params=params, branch=branch)
    state.omega = br.solve_omega(tilde_curve, params, domain="tilde")
    return state


def perturbed_splash_state(n=256, amplitude=1e-3, seed=0):
    """The reference near-splash initial state: tilde pullback of the
    almost-touching family member bumped by a deterministic low-mode
    profile (the same construction the command-line splash scenario uses)."""
    rng = np.random.default_rng(seed)
    base = contour.make_splash_curve(contour.SplashCurveParams(neck_width=0.05,
                                                               n=n))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
    profile = (np.cos(2.0 * base.alpha + phase[0]),
               np.sin(3.0 * base.alpha + phase[1]))
    curve = contour.perturb(base, amplitude, profile)
    branch = conformal.BranchSpec()
    tilde = contour.resample_uniform(contour.to_tilde(curve, branch))
    return evolution.EvolutionState(domain=evolution.TILDE, curve=tilde,
                                    branch=branch)


def run_splash(n=256, error_tol=1e-9, amplitude=1e-3):
    state = perturbed_splash_state(n=n, amplitude=amplitude)
    controls = evolution.StepControls(error_tol=error_tol, t_max=1.0)
    return evolution.run(state, controls)


@pytest.fixture(scope="session")
def splash_trajectory():
    """Shared reference splash run (n = 256, default tolerance)."""
    return run_splash()


def random_closed_curve(rng, n=256, modes=6, scale=0.15):
    """Smooth random admissible closed curve around the unit circle."""
    alpha = np.linspace(-np.pi, np.pi, n, endpoint=False)
    z = np.exp(1j * alpha)
    for k in range(1, modes + 1):
        amp = scale / k ** 2
        z = z * (1.0 + amp * (rng.standard_normal() * np.cos(k * alpha)
                              + rng.standard_normal() * np.sin(k * alpha)))
    return contour.SampledCurve(alpha, z.real, z.imag, contour.CLOSED)
