"""Time integration of the interface.

Two equivalent formulations are integrated with one code path:

  physical:  z_t = BR(z, omega) + c z_alpha            (graph curves)
  tilde:     z_t = Q^2 BR(z, omega) + c z_alpha        (closed curves,
             the image of the physical interface under the half-tangent map)

The tangential coefficient c equalizes arclength: it is chosen so the
rate of change of |z_alpha| is independent of alpha, which keeps an
initially uniform parameterization uniform for all time.  The physical
domain reuses the construction with Q^2 = 1.

Stepping is an embedded Cash-Karp Runge-Kutta 4(5) pair with a CFL cap,
spectral filtering of round-off noise after each accepted step, and a
fresh vorticity solve per stage (warm started).
"""

import numpy as np
from dataclasses import dataclass, field, replace

from . import spectral
from . import conformal
from . import contour
from . import birkhoff_rott as br
from .errors import GeometryError, StiffnessError, ConvergenceError

PHYSICAL = "physical"
TILDE = "tilde"

STOP_TMAX = "t_max"
STOP_SPLASH = "splash"
STOP_GEOMETRY = "geometry"
STOP_STIFFNESS = "stiffness"
STOP_CONVERGENCE = "convergence"

Q_SAFETY_DISTANCE = 1e-2

# Cash-Karp tableau
_CK_A = [
    [],
    [1.0 / 5.0],
    [3.0 / 40.0, 9.0 / 40.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
    [1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0,
     44275.0 / 110592.0, 253.0 / 4096.0],
]
_CK_B5 = np.array([37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0,
                   0.0, 512.0 / 1771.0])
_CK_B4 = np.array([2825.0 / 27648.0, 0.0, 18575.0 / 48384.0,
                   13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0])


@dataclass
class EvolutionState:
    domain: str
    curve: contour.SampledCurve
    params: br.FluidParams = field(default_factory=br.FluidParams)
    branch: conformal.BranchSpec = field(default_factory=conformal.BranchSpec)
    t: float = 0.0
    omega: np.ndarray = None
    frame: str = "rest"

    def __post_init__(self):
        if self.domain not in (PHYSICAL, TILDE):
            raise GeometryError("unknown evolution domain %r" % (self.domain,))
        expected = contour.CLOSED if self.domain == TILDE else contour.GRAPH
        if self.curve.mode != expected:
            raise GeometryError("%s evolution needs a %s-mode curve"
                                % (self.domain, expected))

    def check_admissible(self):
        if np.min(self.curve.speed()) <= 0:
            raise GeometryError("degenerate tangent at t = %.6g" % self.t)
        if contour.chord_arc_constant(self.curve) <= 0:
            raise GeometryError("chord-arc constant vanished at t = %.6g"
                                % self.t)
        if self.domain == TILDE:
            q_gap = np.min(np.abs(self.curve.z[:, np.newaxis]
                                  - conformal.Q_POINTS[np.newaxis, :]))
            if q_gap <= Q_SAFETY_DISTANCE:
                raise GeometryError("curve within %.1e of a singular point "
                                    "at t = %.6g" % (q_gap, self.t))


@dataclass
class StepControls:
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 5e-2
    error_tol: float = 1e-9
    cfl_safety: float = 0.4
    filter_threshold: float = 1e-13
    splash_delta: float = None  # resolved by run() when left unset
    t_max: float = 1.0
    max_steps: int = 100000

    def __post_init__(self):
        if not self.dt_min <= self.dt_init <= self.dt_max:
            raise GeometryError("need dt_min <= dt_init <= dt_max")
        if self.error_tol <= 0:
            raise GeometryError("error_tol must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise GeometryError("cfl_safety must lie in (0, 1]")


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    error_estimates: list = field(default_factory=list)
    min_dists: list = field(default_factory=list)
    stop_cause: str = ""
    stop_detail: str = ""

    @property
    def final(self):
        return self.states[-1]

    @property
    def error_sum(self):
        return float(np.sum(self.error_estimates))


def q_squared(state):
    """Conformal speed factor along the curve (identically 1 physically)."""
    if state.domain == PHYSICAL:
        return np.ones(state.curve.n)
    return conformal.q_factor(state.curve.z, state.branch)


def _complex_deriv(values):
    return spectral.deriv(values.real) + 1j * spectral.deriv(values.imag)


def tangential_term(curve, br_vec, q2):
    """Arclength-equalizing tangential coefficient.

    c(alpha) = ((alpha+pi)/2pi) int_T G dbeta - int_{-pi}^alpha G dbeta
    with G = d_beta(Q^2 BR) . z_beta / |z_beta|^2; both endpoints give 0.
    """
    tau = curve.tangent()
    sp2 = np.abs(tau) ** 2
    if np.min(sp2) == 0.0:
        raise GeometryError("degenerate tangent in tangential term")
    w = np.asarray(q2, dtype=float) * np.asarray(br_vec, dtype=complex)
    g = np.real(np.conjugate(tau) * _complex_deriv(w)) / sp2
    return (curve.alpha + np.pi) * float(np.mean(g)) - spectral.running_integral(g)


def _equalized_tangential(curve, w):
    """Tangential coefficient of the equal-arclength construction.

    The analytic formula satisfies the equalization identity up to the
    aliasing floor of the spectral product rule; the small residual
    drift this leaves behind is removed after each accepted step by
    re-polishing the samples, which is far better conditioned than
    trying to cancel aliasing with extra tangential velocity.
    """
    tau = curve.tangent()
    sp2 = np.abs(tau) ** 2
    g = np.real(np.conjugate(tau) * _complex_deriv(w)) / sp2
    return (curve.alpha + np.pi) * float(np.mean(g)) \
        - spectral.running_integral(g)


def rhs(state, warm_omega=None, equalize=True):
    """Full right side of the contour equation at the given state.

    Returns (velocity samples as complex numbers, info dict); the info
    carries the solved omega, the Birkhoff-Rott values, Q^2 and c for
    reuse by diagnostics and step control.
    """
    kernel = br.remainder_matrix(state.curve)
    omega = br.solve_omega(state.curve, state.params, state.domain,
                           warm_start=warm_omega, kernel=kernel)
    vec = br.br_eval(state.curve, omega, kernel)
    q2 = q_squared(state)
    w = q2 * vec
    if equalize:
        c = _equalized_tangential(state.curve, w)
    else:
        c = tangential_term(state.curve, vec, q2)
    velocity = w + c * state.curve.tangent()
    return velocity, {"omega": omega, "br": vec, "q2": q2, "c": c}


def _advance_curve(curve, delta_z):
    return contour.SampledCurve(curve.alpha, curve.z1 + delta_z.real,
                                curve.z2 + delta_z.imag, curve.mode)


def _filtered(curve, threshold):
    # the exponential filter suppresses the aliasing-driven growth of the
    # marginally resolved top spectral band; the hard cutoff then removes
    # round-off debris below the Krasny threshold
    z1 = spectral.krasny_filter(spectral.exp_filter(curve.periodic_z1()),
                                threshold)
    if curve.mode == contour.GRAPH:
        z1 = z1 + curve.alpha
    z2 = spectral.krasny_filter(spectral.exp_filter(curve.z2), threshold)
    return contour.SampledCurve(curve.alpha, z1, z2, curve.mode)


def cfl_limit(state, info, controls):
    """dt cap: a fraction of the grid-crossing time of the fastest sample."""
    speed = state.curve.speed()
    transport = np.abs(info["q2"] * np.abs(info["br"])
                       + np.abs(info["c"]) * speed)
    fastest = float(np.max(transport))
    if fastest == 0.0:
        return controls.dt_max
    return controls.cfl_safety * (2.0 * np.pi / state.curve.n) \
        * float(np.min(speed)) / fastest


def step(state, controls, dt, warm_omega=None, first_stage=None):
    """One embedded RK 4(5) attempt.

    Returns (new_state or None, rk_error, dissipation); None means the
    error test failed and the caller should retry with a smaller dt.
    rk_error is the embedded-pair estimate used for step control;
    dissipation is the H^1 size of the smoothing/uniformity adjustments
    applied after the advance, charged to the recorded error accounting
    but not to the dt controller.  The first_stage pair (velocity,
    info), when supplied, reuses the right side already evaluated at the
    current state.
    """
    if first_stage is None:
        first_stage = rhs(state, warm_omega)
    velocity0, info0 = first_stage
    stages = [velocity0]
    omega_seed = info0["omega"]
    for i in range(1, 6):
        dz = dt * sum(a * k for a, k in zip(_CK_A[i], stages))
        trial = replace(state, curve=_advance_curve(state.curve, dz),
                        t=state.t + dt * float(np.sum(_CK_A[i])))
        velocity, info = rhs(trial, omega_seed)
        omega_seed = info["omega"]
        stages.append(velocity)
    dz5 = dt * sum(b * k for b, k in zip(_CK_B5, stages))
    dz4 = dt * sum(b * k for b, k in zip(_CK_B4, stages))
    error = float(np.max(np.abs(dz5 - dz4)))
    if error > controls.error_tol:
        return None, error, 0.0
    raw = _advance_curve(state.curve, dz5)
    curve = _filtered(raw, controls.filter_threshold)
    if state.domain == TILDE:
        # The grid derivative of a tangential product has an aliasing
        # component that no choice of c can cancel, so discrete
        # uniformity degrades slowly even with the equalized c. A tiny
        # minimum-norm adjustment of the samples restores it exactly.
        speed = curve.speed()
        if float(np.std(speed) / np.mean(speed)) > 1e-10:
            curve = contour._polish_uniform(curve, 1e-11)
    dissipation = (spectral.sobolev_norm(curve.periodic_z1()
                                         - raw.periodic_z1(), 1)
                   + spectral.sobolev_norm(curve.z2 - raw.z2, 1))
    new_state = replace(state, curve=curve, t=state.t + dt, omega=None)
    new_state.check_admissible()
    new_state.omega = br.solve_omega(curve, state.params, state.domain,
                                     warm_start=omega_seed)
    return new_state, error, dissipation


def physical_min_distance(state):
    """Self-distance of the physical interface (tilde states pulled back)."""
    if state.domain == TILDE:
        curve = contour.from_tilde(state.curve, state.branch)
    else:
        curve = state.curve
    dist, pair = contour.interface_min_distance(curve, contour.CONTACT_ETA)
    return dist, pair


def default_splash_delta(state):
    """Stop distance for splash runs.

    Chosen well below the splash-family neck width so the approach phase
    is observable, yet far above the interpolation accuracy of the
    distance functional and above the scale at which the pinching
    interface enters the protected neighborhood of the map's singular
    points; independent of n so refinement studies stop at a comparable
    geometric configuration.
    """
    return 1e-2


def run(state, controls=StepControls(), observer=None):
    """Integrate until t_max, splash, or loss of admissibility.

    The observer, when given, is called as observer(step_index, state,
    info_dict) after every accepted step.
    """
    controls = replace(controls, splash_delta=(
        controls.splash_delta if controls.splash_delta is not None
        else default_splash_delta(state)))
    traj = Trajectory()
    state.check_admissible()
    if state.omega is None:
        state.omega = br.solve_omega(state.curve, state.params, state.domain)
    dist, _ = physical_min_distance(state)
    traj.times.append(state.t)
    traj.states.append(state)
    traj.min_dists.append(dist)
    dt = min(controls.dt_init, controls.dt_max)
    accepted = 0
    first_stage = None
    while accepted < controls.max_steps:
        if state.t >= controls.t_max - 1e-14:
            traj.stop_cause = STOP_TMAX
            traj.stop_detail = "reached t_max = %.6g" % controls.t_max
            return traj
        try:
            if first_stage is None:
                first_stage = rhs(state, state.omega)
                dt = min(dt, cfl_limit(state, first_stage[1], controls))
            dt = min(dt, controls.t_max - state.t, controls.dt_max)
            if dt < controls.dt_min:
                traj.stop_cause = STOP_STIFFNESS
                traj.stop_detail = "time step underflow (dt = %.3e)" % dt
                return traj
            new_state, error, dissipation = step(state, controls, dt,
                                                 first_stage=first_stage)
        except GeometryError as exc:
            traj.stop_cause = STOP_GEOMETRY
            traj.stop_detail = str(exc)
            return traj
        except ConvergenceError as exc:
            traj.stop_cause = STOP_CONVERGENCE
            traj.stop_detail = str(exc)
            return traj
        if new_state is None:
            dt = max(0.2 * dt, dt * 0.9 * (controls.error_tol
                                           / max(error, 1e-300)) ** 0.2)
            if dt < controls.dt_min:
                traj.stop_cause = STOP_STIFFNESS
                traj.stop_detail = "time step underflow (dt = %.3e)" % dt
                return traj
            continue
        state = new_state
        first_stage = None
        accepted += 1
        dist, _ = physical_min_distance(state)
        traj.times.append(state.t)
        traj.states.append(state)
        traj.dts.append(dt)
        traj.error_estimates.append(error + dissipation)
        traj.min_dists.append(dist)
        if observer is not None:
            observer(accepted, state, {"dt": dt, "error": error,
                                       "min_dist": dist})
        if dist <= controls.splash_delta:
            traj.stop_cause = STOP_SPLASH
            traj.stop_detail = ("interface self-distance %.6e reached the "
                                "stop threshold %.6e" % (dist, controls.splash_delta))
            return traj
        growth = 0.9 * (controls.error_tol / max(error, 1e-300)) ** 0.2
        dt = dt * min(5.0, max(0.2, growth))
    traj.stop_cause = STOP_TMAX
    traj.stop_detail = "step budget exhausted at t = %.6g" % state.t
    return traj


def run_paired(state_a, state_b, controls=StepControls()):
    """Advance two states with a shared time grid (the smaller of the two
    proposed steps), recording both trajectories; used by the stability
    experiment so distances compare at identical times."""
    controls = replace(controls, splash_delta=(
        controls.splash_delta if controls.splash_delta is not None
        else default_splash_delta(state_a)))
    for s in (state_a, state_b):
        s.check_admissible()
        if s.omega is None:
            s.omega = br.solve_omega(s.curve, s.params, s.domain)
    traj_a, traj_b = Trajectory(), Trajectory()
    for traj, s in ((traj_a, state_a), (traj_b, state_b)):
        traj.times.append(s.t)
        traj.states.append(s)
        traj.min_dists.append(physical_min_distance(s)[0])
    dt = min(controls.dt_init, controls.dt_max)
    accepted = 0
    stage_a = stage_b = None
    while accepted < controls.max_steps:
        if state_a.t >= controls.t_max - 1e-14:
            for traj in (traj_a, traj_b):
                traj.stop_cause = STOP_TMAX
                traj.stop_detail = "reached t_max = %.6g" % controls.t_max
            return traj_a, traj_b
        try:
            if stage_a is None:
                stage_a = rhs(state_a, state_a.omega)
                stage_b = rhs(state_b, state_b.omega)
                dt = min(dt, cfl_limit(state_a, stage_a[1], controls),
                         cfl_limit(state_b, stage_b[1], controls))
            dt = min(dt, controls.t_max - state_a.t, controls.dt_max)
            if dt < controls.dt_min:
                for traj in (traj_a, traj_b):
                    traj.stop_cause = STOP_STIFFNESS
                    traj.stop_detail = "time step underflow"
                return traj_a, traj_b
            new_a, err_a, dis_a = step(state_a, controls, dt,
                                       first_stage=stage_a)
            new_b, err_b, dis_b = (None, 0.0, 0.0)
            if new_a is not None:
                new_b, err_b, dis_b = step(state_b, controls, dt,
                                           first_stage=stage_b)
        except (GeometryError, ConvergenceError) as exc:
            cause = STOP_GEOMETRY if isinstance(exc, GeometryError) \
                else STOP_CONVERGENCE
            for traj in (traj_a, traj_b):
                traj.stop_cause = cause
                traj.stop_detail = str(exc)
            return traj_a, traj_b
        error = max(err_a, err_b)
        if new_a is None or new_b is None:
            dt = max(0.2 * dt, dt * 0.9 * (controls.error_tol
                                           / max(error, 1e-300)) ** 0.2)
            if dt < controls.dt_min:
                for traj in (traj_a, traj_b):
                    traj.stop_cause = STOP_STIFFNESS
                    traj.stop_detail = "time step underflow"
                return traj_a, traj_b
            continue
        state_a, state_b = new_a, new_b
        stage_a = stage_b = None
        accepted += 1
        stop = ""
        for traj, s, err in ((traj_a, state_a, err_a + dis_a),
                             (traj_b, state_b, err_b + dis_b)):
            dist, _ = physical_min_distance(s)
            traj.times.append(s.t)
            traj.states.append(s)
            traj.dts.append(dt)
            traj.error_estimates.append(err)
            traj.min_dists.append(dist)
            if dist <= controls.splash_delta:
                stop = ("interface self-distance %.6e reached the stop "
                        "threshold" % dist)
        if stop:
            for traj in (traj_a, traj_b):
                traj.stop_cause = STOP_SPLASH
                traj.stop_detail = stop
            return traj_a, traj_b
        growth = 0.9 * (controls.error_tol / max(error, 1e-300)) ** 0.2
        dt = dt * min(5.0, max(0.2, growth))
    for traj in (traj_a, traj_b):
        traj.stop_cause = STOP_TMAX
        traj.stop_detail = "step budget exhausted"
    return traj_a, traj_b


def to_moving_frame(state, direction="forward"):
    """Shift a physical state to/from the frame rising with the fluid.

    The frame moves vertically at speed rho0/mu0; positions shift by
    (0, (rho0/mu0) t) and the state is tagged so velocity diagnostics
    know to add or remove the constant drift (0, rho0/mu0).
    """
    if state.domain != PHYSICAL:
        raise GeometryError("moving frame applies to physical states only")
    lift = state.params.ratio * state.t
    if direction == "forward":
        if state.frame == "moving":
            raise GeometryError("state is already in the moving frame")
        curve = contour.SampledCurve(state.curve.alpha, state.curve.z1,
                                     state.curve.z2 + lift, state.curve.mode)
        return replace(state, curve=curve, frame="moving")
    if direction == "inverse":
        if state.frame != "moving":
            raise GeometryError("state is not in the moving frame")
        curve = contour.SampledCurve(state.curve.alpha, state.curve.z1,
                                     state.curve.z2 - lift, state.curve.mode)
        return replace(state, curve=curve, frame="rest")
    raise GeometryError("direction must be 'forward' or 'inverse'")


def frame_velocity_offset(state):
    """Constant drift carried by a moving-frame state."""
    if state.frame == "moving":
        return 1j * state.params.ratio
    return 0j


def flat_rhs_jacobian(params, n=256, delta=1e-7):
    """Finite-difference Jacobian of the height dynamics at the flat state.

    Column j holds d(rhs_2)/d(z2_j): the flat graph is perturbed one
    sample at a time and the vertical component of the right side is
    differenced.  Used as an independent oracle for linear decay rates.
    """
    alpha = spectral.grid(n)
    jac = np.zeros((n, n))
    for j in range(n):
        bump = np.zeros(n)
        bump[j] = delta
        for sign in (1.0, -1.0):
            curve = contour.SampledCurve(alpha, alpha, sign * bump, contour.GRAPH)
            state = EvolutionState(PHYSICAL, curve, params)
            velocity, _ = rhs(state)
            jac[:, j] += sign * velocity.imag / (2.0 * delta)
    return jac


def flat_mode_rate(jacobian, k):
    """Decay rate of wavenumber k from the flat-state Jacobian.

    cos(k alpha) is an eigenvector of the linearized height dynamics, so
    the rate is its Rayleigh quotient under the assembled matrix.
    """
    n = jacobian.shape[0]
    mode = np.cos(k * spectral.grid(n))
    return float(mode @ (jacobian @ mode) / (mode @ mode))
