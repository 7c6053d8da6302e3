"""Measured functionals along a run.

Everything observable about a state or a trajectory lives here: the
Rayleigh-Taylor function sigma in both domains, the third-order energy
with its component breakdown, splash monitoring with the touchdown-time
estimate, and the H^1 distance used by the paired stability experiment.
"""

import numpy as np
from dataclasses import dataclass, field

from . import spectral
from . import conformal
from . import contour
from . import birkhoff_rott as br
from . import evolution
from .errors import MuskatError, SingularityError

# a curve closer than this to a q-point counts as touching it for the
# purposes of energy blow-up attribution
Q_TOUCH_TOL = 1e-12


# below this, min sigma is reported as outside the stable regime
SIGMA_POSITIVE_TOL = 1e-6

# number of trailing (t, d) records used for the touchdown extrapolation
_FIT_POINTS = 5


@dataclass
class DiagnosticsRecord:
    """One row of the per-step diagnostics series."""
    t: float
    e3: float
    e3_parts: dict
    sigma_min: float
    chord_arc: float
    min_dist: float
    mean_omega: float
    dt: float
    blow_up: str = ""


@dataclass
class StabilityRecord:
    t: float
    h1_dist: float
    growth_exponent: float


def _perp_dot(vec, tangent):
    """Dot product of a complex-represented vector with z_alpha^perp.

    With the convention (x1, x2)^perp = (-x2, x1), the perpendicular of
    the tangent is i * z_alpha, and a . b = Re(conj(a) b).
    """
    return np.real(np.conjugate(vec) * (1j * tangent))


def rayleigh_taylor_physical(curve, omega, params):
    """sigma = mu0 BR . z_alpha^perp + rho0 d_alpha z1 on the samples.

    For a curve whose interface self-distance is below one grid cell
    (including an exactly self-touching splash curve) the direct
    quadrature loses accuracy at the near-contact samples, so sigma is
    evaluated on the separated conformal image instead; under the
    transported parameterization the two definitions agree pointwise.
    """
    try:
        dist, _ = contour.interface_min_distance(curve, contour.CONTACT_ETA)
        cell = (2.0 * np.pi / curve.n) * float(np.min(curve.speed()))
        if dist < cell:
            tilde = contour.to_tilde(curve)
            tilde_omega = br.solve_omega(tilde, params, "tilde")
            sigma, _ = rayleigh_taylor_tilde(tilde, tilde_omega, params)
            return sigma
    except MuskatError:
        pass
    vec = br.br_eval(curve, np.asarray(omega, dtype=float))
    return params.mu0 * _perp_dot(vec, curve.tangent()) \
        + params.rho0 * np.real(curve.tangent())


def rayleigh_taylor_tilde(curve, omega, params, branch=conformal.BranchSpec()):
    """sigma on a transformed curve, plus min over alpha of Q^2 sigma.

    sigma = mu0 BR(z, omega) . z_alpha^perp + rho0 grad(Im P^{-1})(z) . z_alpha^perp;
    the second term replaces the flat hydrostatic gradient of the
    physical formula with its image under the inverse map.
    """
    tangent = curve.tangent()
    vec = br.br_eval(curve, np.asarray(omega, dtype=float))
    grad = conformal.grad_P2_inv(curve.z)
    perp1, perp2 = -np.imag(tangent), np.real(tangent)
    gravity = grad[..., 0] * perp1 + grad[..., 1] * perp2
    sigma = params.mu0 * _perp_dot(vec, tangent) + params.rho0 * gravity
    q2 = conformal.q_factor(curve.z, branch)
    return sigma, float(np.min(q2 * sigma))


def sigma_for_state(state):
    """Rayleigh-Taylor samples and their reportable minimum for a state.

    In the tilde domain the minimum of Q^2 sigma is reported (that is
    the quantity the energy bounds); in the physical domain the minimum
    of sigma itself.
    """
    omega = state.omega
    if omega is None:
        omega = br.solve_omega(state.curve, state.params, state.domain)
    if state.domain == evolution.TILDE:
        sigma, smin = rayleigh_taylor_tilde(state.curve, omega, state.params,
                                            state.branch)
    else:
        sigma = rayleigh_taylor_physical(state.curve, omega, state.params)
        smin = float(np.min(sigma))
    return sigma, smin


def m_q_distances(curve):
    """min over alpha of |z(alpha) - q^l| for the five singular points.

    The grid minimizer is refined with one Newton step on the squared
    distance so that near misses are measured at sub-grid accuracy.
    """
    out = np.empty(conformal.Q_POINTS.size)
    zaa = curve.second_derivative()
    tangent = curve.tangent()
    for l, q in enumerate(conformal.Q_POINTS):
        sep = curve.z - q
        i = int(np.argmin(np.abs(sep)))
        alpha = curve.alpha[i]
        fp = 2.0 * np.real(np.conjugate(sep[i]) * tangent[i])
        fpp = 2.0 * np.real(np.abs(tangent[i]) ** 2
                            + np.conjugate(sep[i]) * zaa[i])
        if fpp > 0.0:
            alpha = alpha - fp / fpp
        refined = abs(complex(curve.at(np.array([alpha]))[0]) - q)
        out[l] = min(refined, float(np.abs(sep[i])))
    return out


@dataclass
class EnergyBreakdown:
    e3: float
    parts: dict
    blow_up: str = ""


def energy_e3(state):
    """Third-order energy of a tilde state with its component breakdown.

    e3 = ||z||_{H^3}^2 + sup(F)^2 + 1/min(Q^2 sigma) + sum_l 1/m(q^l).
    A nonpositive or vanishing denominator flags the energy as infinite
    and names the violating component instead of raising.
    """
    if state.domain != evolution.TILDE:
        raise ValueError("the energy functional is defined on tilde states")
    curve = state.curve
    parts = {}
    blow_up = ""
    h3 = spectral.sobolev_norm(curve.periodic_z1(), 3) ** 2 \
        + spectral.sobolev_norm(curve.z2, 3) ** 2
    parts["h3_norm2"] = float(h3)
    # singular-point distances first: a curve touching a q-point also
    # breaks the sigma evaluation, and the zero distance is the cause
    # that should be named
    mq = m_q_distances(curve)
    for l, m in enumerate(mq):
        key = "inv_m_q%d" % l
        if m > Q_TOUCH_TOL:
            parts[key] = 1.0 / float(m)
        else:
            parts[key] = float("inf")
            blow_up = blow_up or "m(q%d)" % l
    f_sup = contour.f_functional(curve)
    parts["f_sup2"] = float(f_sup) ** 2
    if not np.isfinite(f_sup):
        blow_up = blow_up or "F"
    try:
        sigma, smin = sigma_for_state(state)
    except SingularityError:
        smin = 0.0
    if smin > 0.0:
        parts["inv_m_q2_sigma"] = 1.0 / smin
    else:
        parts["inv_m_q2_sigma"] = float("inf")
        blow_up = blow_up or "m(Q^2 sigma)"
    e3 = float(sum(parts.values()))
    return EnergyBreakdown(e3=e3, parts=parts, blow_up=blow_up)


def diagnostics_record(state, dt=0.0):
    """Assemble the full per-step record for a state."""
    omega = state.omega
    if omega is None:
        omega = br.solve_omega(state.curve, state.params, state.domain)
    _, sigma_min = sigma_for_state(state)
    if state.domain == evolution.TILDE:
        energy = energy_e3(state)
        e3, parts, blow_up = energy.e3, energy.parts, energy.blow_up
        physical = contour.from_tilde(state.curve, state.branch)
    else:
        e3, parts, blow_up = float("nan"), {}, ""
        physical = state.curve
    dist, _ = contour.interface_min_distance(physical, contour.CONTACT_ETA)
    return DiagnosticsRecord(
        t=state.t, e3=e3, e3_parts=parts, sigma_min=sigma_min,
        chord_arc=contour.chord_arc_constant(physical), min_dist=dist,
        mean_omega=float(np.mean(omega)), dt=dt, blow_up=blow_up)


def h1_distance(x, y):
    """H^1 norm of the component-wise difference of two sampled curves."""
    if x.n != y.n or x.mode != y.mode:
        raise ValueError("curves must share the grid size and mode")
    d1 = x.z1 - y.z1
    d2 = x.z2 - y.z2
    return float(np.sqrt(spectral.sobolev_norm(d1, 1) ** 2
                         + spectral.sobolev_norm(d2, 1) ** 2))


def geometric_h1_distance(x, y, refine=8):
    """H^1 distance after reparameterizing y onto x by nearest points.

    Two evolutions of the same interface agree geometrically but not
    pointwise when their tangential motions differ, so y is first
    re-sampled at the parameters whose images are closest to each x
    sample.
    """
    dense = np.linspace(-np.pi, np.pi, refine * max(x.n, y.n) + 1)
    yz = y.at(dense)
    phi = np.empty(x.n)
    xz = x.z
    for i in range(x.n):
        j = int(np.argmin(np.abs(yz - xz[i])))
        beta = dense[j]
        # one Newton step on the squared distance along y
        for _ in range(3):
            pos = complex(y.at(np.array([beta]))[0])
            tan = complex(y.tangent_at(np.array([beta]))[0])
            fp = 2.0 * (np.conjugate(pos - xz[i]) * tan).real
            fpp = 2.0 * abs(tan) ** 2
            beta = beta - fp / fpp
        phi[i] = beta
    resampled = y.at(phi)
    matched = contour.SampledCurve(x.alpha, resampled.real, resampled.imag,
                                   x.mode)
    return h1_distance(x, matched)


def splash_monitor(trajectory):
    """Touchdown report for a finished trajectory.

    When the run stopped on the splash threshold, the time of contact
    is estimated by extrapolating a quadratic fit of the last few
    (t, min_dist) records down to zero distance; a poor or non-monotone
    fit is flagged rather than treated as an error.
    """
    times = np.asarray(trajectory.times, dtype=float)
    dists = np.asarray(trajectory.min_dists, dtype=float)
    is_splash = trajectory.stop_cause == evolution.STOP_SPLASH
    alpha1 = alpha2 = float("nan")
    x_s = (float("nan"), float("nan"))
    failures = []
    t_s = float("nan")
    if trajectory.states:
        final = trajectory.final
        dist, pair = evolution.physical_min_distance(final)
        alpha1, alpha2 = float(pair[0]), float(pair[1])
        if final.domain == evolution.TILDE:
            physical = contour.from_tilde(final.curve, final.branch)
        else:
            physical = final.curve
        za = physical.at(np.array([alpha1]))[0]
        zb = physical.at(np.array([alpha2]))[0]
        mid = 0.5 * (za + zb)
        x_s = (float(mid.real), float(mid.imag))
        min_distance = float(dist)
    else:
        min_distance = float(dists[-1]) if dists.size else float("nan")
    if is_splash:
        k = min(_FIT_POINTS, times.size)
        ts, ds = times[-k:], dists[-k:]
        if np.any(np.diff(ds) >= 0.0):
            failures.append("low confidence: distance tail is not monotone")
        order = min(2, k - 1)
        coeffs = np.polyfit(ts, ds, order)
        fit_resid = float(np.max(np.abs(np.polyval(coeffs, ts) - ds)))
        d_range = float(np.max(ds) - np.min(ds))
        if d_range > 0.0 and fit_resid > 0.01 * d_range:
            failures.append("low confidence: extrapolation fit residual "
                            "%.2e exceeds 1%% of the distance range" % fit_resid)
        roots = np.roots(coeffs)
        ahead = [r.real for r in roots
                 if abs(r.imag) < 1e-9 * max(1.0, abs(r.real))
                 and r.real >= ts[-1] - 1e-12]
        if ahead:
            t_s = float(min(ahead))
        else:
            t_s = float(ts[-1])
            failures.append("low confidence: no forward root, "
                            "reporting the stop time")
    return contour.SplashReport(alpha1=alpha1, alpha2=alpha2, x_s=x_s,
                                min_distance=min_distance,
                                is_splash=is_splash, failures=failures,
                                t_s=t_s)


def decay_rate_fit(times, amplitudes):
    """Least-squares slope of log amplitude versus time."""
    times = np.asarray(times, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    if times.size < 10:
        raise ValueError("need at least 10 samples for a rate fit")
    if np.any(amplitudes <= 0.0):
        raise ValueError("amplitudes must be positive for a log fit")
    slope, _ = np.polyfit(times, np.log(amplitudes), 1)
    return float(slope)


def growth_exponent(times, values):
    """Running log-slope of a positive series; first entry is zero."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0.0):
        raise ValueError("growth exponent needs positive values")
    out = np.zeros(times.size)
    if times.size > 1:
        logs = np.log(values)
        out[1:] = np.diff(logs) / np.diff(times)
    return out
