"""Scenario runner and the package's external surface.

Commands:
    muskat run <config-file> [--output-dir DIR]
    muskat selftest [--output-dir DIR]
    muskat validate-curve <snapshot.csv>

Config files are flat ``key = value`` lines with ``#`` comments.  Runs
emit snapshot CSVs (``snap_<step>.csv``, columns alpha,z1,z2,omega,sigma;
tilde runs also write the physical pullback as ``phys_<step>.csv``), a
diagnostics CSV, a stability CSV for paired runs, and ``manifest.json``
written once at the end.

Exit codes: 0 ok, 2 config error, 3 geometry/admissibility, 4 solver
convergence, 5 stiffness (time-step underflow), 6 I/O.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import spectral
from . import conformal
from . import contour
from . import birkhoff_rott as br
from . import evolution
from . import diagnostics
from .errors import (MuskatError, ConfigError, GeometryError,
                     ConvergenceError, StiffnessError, OutputError)


_SCENARIOS = ("selftest", "flat", "decay", "splash", "stability")

_FMT = "%.17g"


@dataclass
class ScenarioConfig:
    scenario: str = "selftest"
    n: int = 256
    rho0: float = 1.0
    mu0: float = 1.0
    neck_width: float = 0.05
    perturb_amplitude: float = 1e-3
    t_max: float = 1.0
    error_tol: float = 1e-9
    filter_threshold: float = 1e-13
    splash_delta: float = 0.0  # 0 means the evolution default
    snapshot_every: int = 25
    output_dir: str = "."
    seed: int = 0
    branch_cut_direction: float = np.pi / 2.0


_INT_KEYS = {"n", "snapshot_every", "seed"}
_FLOAT_KEYS = {"rho0", "mu0", "neck_width", "perturb_amplitude", "t_max",
               "error_tol", "filter_threshold", "splash_delta",
               "branch_cut_direction"}


def parse_config(text):
    """Parse flat key = value text into a validated ScenarioConfig."""
    config = ScenarioConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value', got %r"
                              % (lineno, raw.strip()))
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "scenario":
            if value not in _SCENARIOS:
                raise ConfigError("line %d: unknown scenario %r (choose from %s)"
                                  % (lineno, value, ", ".join(_SCENARIOS)))
            config.scenario = value
        elif key == "output_dir":
            config.output_dir = value
        elif key in _INT_KEYS:
            try:
                setattr(config, key, int(value))
            except ValueError:
                raise ConfigError("line %d: %s must be an integer, got %r"
                                  % (lineno, key, value)) from None
        elif key in _FLOAT_KEYS:
            try:
                setattr(config, key, float(value))
            except ValueError:
                raise ConfigError("line %d: %s must be a number, got %r"
                                  % (lineno, key, value)) from None
        else:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        _validate_field(config, key, lineno)
    return config


def _validate_field(config, key, lineno):
    checks = {
        "n": (config.n >= 16 and (config.n & (config.n - 1)) == 0,
              "n must be a power of two (and at least 16)"),
        "rho0": (config.rho0 > 0, "rho0 must be positive"),
        "mu0": (config.mu0 > 0, "mu0 must be positive"),
        "neck_width": (0.0 <= config.neck_width < 1.0,
                       "neck_width must lie in [0, 1)"),
        "perturb_amplitude": (0.0 <= config.perturb_amplitude < 0.1,
                              "perturb_amplitude must lie in [0, 0.1)"),
        "t_max": (config.t_max > 0, "t_max must be positive"),
        "error_tol": (config.error_tol > 0, "error_tol must be positive"),
        "filter_threshold": (config.filter_threshold >= 0,
                             "filter_threshold must be nonnegative"),
        "splash_delta": (config.splash_delta >= 0,
                         "splash_delta must be nonnegative"),
        "snapshot_every": (config.snapshot_every >= 1,
                           "snapshot_every must be at least 1"),
    }
    if key in checks and not checks[key][0]:
        raise ConfigError("line %d: %s" % (lineno, checks[key][1]))


def _controls(config):
    return evolution.StepControls(
        error_tol=config.error_tol,
        filter_threshold=config.filter_threshold,
        splash_delta=config.splash_delta or None,
        t_max=config.t_max)


def _write_rows(path, header, rows):
    try:
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_FMT % v for v in row) + "\n")
    except OSError as exc:
        raise OutputError("cannot write %s: %s" % (path, exc)) from exc


def _write_snapshot(outdir, prefix, step, state, omega, sigma):
    curve = state.curve
    path = outdir / ("%s_%06d.csv" % (prefix, step))
    contour.write_curve_csv(path, curve, omega=omega, sigma=sigma)
    return path.name


class _RunRecorder:
    """Observer writing snapshots and collecting diagnostics rows."""

    def __init__(self, outdir, config):
        self.outdir = outdir
        self.config = config
        self.records = []
        self.snapshots = []
        self.sigma_min_run = np.inf

    def record(self, step_index, state, dt):
        rec = diagnostics.diagnostics_record(state, dt)
        self.records.append(rec)
        self.sigma_min_run = min(self.sigma_min_run, rec.sigma_min)
        if step_index % self.config.snapshot_every == 0:
            self.snapshot(step_index, state)
        return rec

    def snapshot(self, step_index, state):
        omega = state.omega
        if omega is None:
            omega = br.solve_omega(state.curve, state.params, state.domain)
        sigma, _ = diagnostics.sigma_for_state(state)
        self.snapshots.append(_write_snapshot(
            self.outdir, "snap", step_index, state, omega, sigma))
        if state.domain == evolution.TILDE:
            physical = contour.from_tilde(state.curve, state.branch)
            phys_state = evolution.EvolutionState(
                domain=evolution.PHYSICAL, curve=physical,
                params=state.params, branch=state.branch, t=state.t)
            phys_omega = br.solve_omega(physical, state.params,
                                        evolution.PHYSICAL)
            phys_sigma = diagnostics.rayleigh_taylor_physical(
                physical, phys_omega, state.params)
            _write_snapshot(self.outdir, "phys", step_index, phys_state,
                            phys_omega, phys_sigma)

    def write_csv(self):
        rows = [(r.t, r.e3, r.sigma_min, r.chord_arc, r.min_dist,
                 r.mean_omega, r.dt) for r in self.records]
        _write_rows(self.outdir / "diagnostics.csv",
                    ["t", "e3", "sigma_min", "chord_arc", "min_dist",
                     "mean_omega", "dt"], rows)


def _manifest(outdir, config, started, cause, detail, checks,
              splash_report=None, extra=None):
    data = {
        "config": {k: (v if not isinstance(v, float) else float(v))
                   for k, v in asdict(config).items()},
        "start_time": started,
        "end_time": time.time(),
        "termination_cause": cause,
        "termination_detail": detail,
        "acceptance_checks": checks,
    }
    if splash_report is not None:
        data["splash_report"] = {
            "is_splash": bool(splash_report.is_splash),
            "t_s": float(splash_report.t_s),
            "alpha1": float(splash_report.alpha1),
            "alpha2": float(splash_report.alpha2),
            "x_s": [float(v) for v in splash_report.x_s],
            "min_distance": float(splash_report.min_distance),
            "flags": list(splash_report.failures),
        }
    if extra:
        data.update(extra)
    try:
        with open(outdir / "manifest.json", "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError("cannot write manifest: %s" % exc) from exc
    return data


def _params(config):
    return br.FluidParams(rho0=config.rho0, mu0=config.mu0)


def _branch(config):
    return conformal.BranchSpec(cut_direction=config.branch_cut_direction)


def _perturbation_profile(curve, seed):
    """Deterministic low-mode perturbation profile for splash runs."""
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
    return (np.cos(2.0 * curve.alpha + phase[0]),
            np.sin(3.0 * curve.alpha + phase[1]))


def _scenario_selftest(config, outdir, started):
    checks = []

    def check(name, ok, detail=""):
        checks.append({"name": name, "passed": bool(ok), "detail": detail})

    alpha = spectral.grid(config.n)
    d = spectral.deriv(np.sin(alpha)) - np.cos(alpha)
    check("spectral derivative exact on sin", np.max(np.abs(d)) < 1e-12,
          "max error %.3e" % np.max(np.abs(d)))
    zeta = 0.3 + 0.2j
    rt = conformal.map_P(conformal.map_P_inv(zeta)) - zeta
    check("conformal round trip", abs(rt) < 1e-12, "error %.3e" % abs(rt))
    circle = contour.SampledCurve(alpha, np.cos(alpha), np.sin(alpha),
                                  contour.CLOSED)
    vec = br.br_eval(circle, np.ones(config.n))
    err = np.max(np.abs(vec - 0.5j * np.exp(1j * alpha)))
    check("circular sheet closed form", err < 1e-8, "error %.3e" % err)
    flat = contour.SampledCurve(alpha, alpha.copy(), np.zeros(config.n),
                                contour.GRAPH)
    params = _params(config)
    omega = br.solve_omega(flat, params, evolution.PHYSICAL)
    check("flat interface has zero vorticity", np.max(np.abs(omega)) < 1e-12,
          "max omega %.3e" % np.max(np.abs(omega)))
    curve = contour.make_splash_curve(contour.SplashCurveParams(
        neck_width=max(config.neck_width, 0.01), n=config.n))
    omega = br.solve_omega(curve, params, evolution.PHYSICAL)
    resid = omega + br.br_operator_apply(curve, omega) \
        - br.vorticity_forcing(curve, params, evolution.PHYSICAL)
    scale = max(1.0, float(np.max(np.abs(omega))))
    check("vorticity equation residual", np.max(np.abs(resid)) < 1e-10 * scale,
          "residual %.3e" % np.max(np.abs(resid)))
    sigma = diagnostics.rayleigh_taylor_physical(curve, omega, params)
    check("splash family is Rayleigh-Taylor stable", float(np.min(sigma)) > 0,
          "min sigma %.3e" % np.min(sigma))
    ok = all(c["passed"] for c in checks)
    _manifest(outdir, config, started, "selftest",
              "all checks passed" if ok else "selftest failures", checks)
    return 0 if ok else 3


def _scenario_flat(config, outdir, started):
    alpha = spectral.grid(config.n)
    flat = contour.SampledCurve(alpha, alpha.copy(), np.zeros(config.n),
                                contour.GRAPH)
    state = evolution.EvolutionState(
        domain=evolution.PHYSICAL, curve=flat, params=_params(config),
        branch=_branch(config))
    recorder = _RunRecorder(outdir, config)
    controls = _controls(config)

    def observer(i, s, info):
        recorder.record(i, s, info.get("dt", 0.0))

    recorder.record(0, state, 0.0)
    traj = evolution.run(state, controls, observer)
    recorder.write_csv()
    disp = max(float(np.max(np.abs(s.curve.z2))) for s in traj.states)
    ok = disp < 1e-10 and traj.stop_cause == evolution.STOP_TMAX
    checks = [{"name": "flat interface is steady (max displacement < 1e-10)",
               "passed": bool(ok), "detail": "max displacement %.3e" % disp}]
    _manifest(outdir, config, started, traj.stop_cause, traj.stop_detail,
              checks, extra={"max_displacement": disp,
                             "domain": evolution.PHYSICAL})
    return 0 if ok else _stop_exit(traj)


def _scenario_decay(config, outdir, started):
    eps = config.perturb_amplitude
    alpha = spectral.grid(config.n)
    curve = contour.SampledCurve(alpha, alpha.copy(), eps * np.cos(alpha),
                                 contour.GRAPH)
    params = _params(config)
    state = evolution.EvolutionState(
        domain=evolution.PHYSICAL, curve=curve, params=params,
        branch=_branch(config))
    recorder = _RunRecorder(outdir, config)
    amps = []

    def observer(i, s, info):
        recorder.record(i, s, info.get("dt", 0.0))
        amps.append((s.t, spectral.mode_amplitude(s.curve.z2, 1)))

    recorder.record(0, state, 0.0)
    amps.append((state.t, spectral.mode_amplitude(state.curve.z2, 1)))
    traj = evolution.run(state, _controls(config), observer)
    recorder.write_csv()
    times = [t for t, _ in amps]
    values = [a for _, a in amps]
    rate = diagnostics.decay_rate_fit(times, values)
    jac = evolution.flat_rhs_jacobian(params, n=min(config.n, 64))
    oracle = evolution.flat_mode_rate(jac, 1)
    rel = abs(rate - oracle) / abs(oracle)
    mono = bool(np.all(np.diff([np.max(np.abs(s.curve.z2))
                                for s in traj.states]) <= 1e-15))
    checks = [
        {"name": "fitted decay rate matches the flat-state Jacobian within 5%",
         "passed": bool(rel < 0.05),
         "detail": "fit %.6f vs oracle %.6f" % (rate, oracle)},
        {"name": "monotone maximum-norm decay", "passed": mono, "detail": ""},
    ]
    ok = all(c["passed"] for c in checks) \
        and traj.stop_cause == evolution.STOP_TMAX
    _manifest(outdir, config, started, traj.stop_cause, traj.stop_detail,
              checks, extra={"decay_rate": rate, "decay_rate_oracle": oracle,
                             "domain": evolution.PHYSICAL})
    return 0 if ok else _stop_exit(traj)


def _scenario_splash(config, outdir, started):
    params = _params(config)
    branch = _branch(config)
    curve = contour.make_splash_curve(contour.SplashCurveParams(
        neck_width=config.neck_width, n=config.n))
    report = contour.validate_splash_curve(curve, branch)
    # a positive neck width means the family member is deliberately held
    # open, so the validator's no-self-contact report is the expected
    # outcome; anything else is a genuine construction failure
    fatal = [f for f in report.failures
             if not (config.neck_width > 0 and f.startswith("no self-contact"))]
    if fatal:
        raise GeometryError("splash curve validation failed: "
                            + "; ".join(fatal))
    if config.perturb_amplitude > 0:
        curve = contour.perturb(curve, config.perturb_amplitude,
                                _perturbation_profile(curve, config.seed))
    tilde = contour.resample_uniform(contour.to_tilde(curve, branch))
    state = evolution.EvolutionState(domain=evolution.TILDE, curve=tilde,
                                     params=params, branch=branch)
    recorder = _RunRecorder(outdir, config)

    def observer(i, s, info):
        recorder.record(i, s, info.get("dt", 0.0))

    recorder.record(0, state, 0.0)
    traj = evolution.run(state, _controls(config), observer)
    recorder.snapshot(len(traj.times) - 1, traj.final)
    recorder.write_csv()
    splash = diagnostics.splash_monitor(traj)
    tail = np.asarray(traj.min_dists[-min(50, len(traj.min_dists)):])
    checks = [
        {"name": "run terminates by splash (chord-arc collapse)",
         "passed": bool(splash.is_splash), "detail": traj.stop_detail},
        {"name": "touchdown time estimate is finite",
         "passed": bool(np.isfinite(splash.t_s)),
         "detail": "T_s = %.6f" % splash.t_s},
        {"name": "interface distance decreases monotonically near the end",
         "passed": bool(np.all(np.diff(tail) < 0)), "detail": ""},
        {"name": "Rayleigh-Taylor function stays positive",
         "passed": bool(recorder.sigma_min_run > 0),
         "detail": "min over run %.3e" % recorder.sigma_min_run},
    ]
    ok = all(c["passed"] for c in checks)
    _manifest(outdir, config, started, traj.stop_cause, traj.stop_detail,
              checks, splash_report=splash,
              extra={"sigma_min_run": float(recorder.sigma_min_run),
                     "domain": evolution.TILDE,
                     "is_splash": bool(splash.is_splash)})
    return 0 if ok else _stop_exit(traj)


def _scenario_stability(config, outdir, started):
    params = _params(config)
    branch = _branch(config)
    base = contour.make_splash_curve(contour.SplashCurveParams(
        neck_width=max(config.neck_width, 0.2), n=config.n))
    profile = (np.cos(base.alpha), np.zeros(config.n))
    other = contour.perturb(base, config.perturb_amplitude, profile)
    state_a = evolution.EvolutionState(
        domain=evolution.PHYSICAL, curve=base, params=params, branch=branch)
    state_b = evolution.EvolutionState(
        domain=evolution.PHYSICAL, curve=other, params=params, branch=branch)
    traj_a, traj_b = evolution.run_paired(state_a, state_b, _controls(config))
    times = traj_a.times
    dists = [diagnostics.h1_distance(sa.curve, sb.curve)
             for sa, sb in zip(traj_a.states, traj_b.states)]
    exponents = diagnostics.growth_exponent(times, dists)
    _write_rows(outdir / "stability.csv",
                ["t", "h1_dist", "growth_exponent"],
                list(zip(times, dists, exponents)))
    slope = float(np.max(np.abs(exponents))) if len(times) > 1 else 0.0
    checks = [
        {"name": "initial H1 distance matches the cos-profile norm",
         "passed": bool(abs(dists[0] - config.perturb_amplitude
                            * np.sqrt(2 * np.pi)) < 1e-6),
         "detail": "h1_dist(0) = %.8e" % dists[0]},
        {"name": "log-distance growth has a bounded running slope",
         "passed": bool(np.isfinite(slope)),
         "detail": "max |slope| = %.3f" % slope},
    ]
    ok = all(c["passed"] for c in checks) \
        and traj_a.stop_cause == evolution.STOP_TMAX
    _manifest(outdir, config, started, traj_a.stop_cause, traj_a.stop_detail,
              checks, extra={"final_h1_dist": dists[-1],
                             "max_growth_exponent": slope,
                             "domain": evolution.PHYSICAL})
    return 0 if ok else _stop_exit(traj_a)


def _stop_exit(traj):
    return {evolution.STOP_STIFFNESS: 5,
            evolution.STOP_CONVERGENCE: 4,
            evolution.STOP_GEOMETRY: 3}.get(traj.stop_cause, 3)


def run_scenario(config):
    """Execute one scenario; returns the process exit code."""
    outdir = Path(config.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError("cannot create output directory %s: %s"
                          % (outdir, exc)) from exc
    started = time.time()
    runner = {"selftest": _scenario_selftest, "flat": _scenario_flat,
              "decay": _scenario_decay, "splash": _scenario_splash,
              "stability": _scenario_stability}[config.scenario]
    return runner(config, outdir, started)


def validate_curve_file(path):
    """Validate a snapshot CSV as a splash-type interface; prints a report."""
    curve, _ = contour.read_curve_csv(path)
    report = contour.validate_splash_curve(curve)
    print("file: %s" % path)
    print("samples: %d  mode: %s" % (curve.n, curve.mode))
    print("min interface distance: %.6e" % report.min_distance)
    if report.failures:
        for failure in report.failures:
            print("FAIL: %s" % failure)
        return 3
    print("curve is admissible")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="muskat",
        description="Boundary-integral simulator for interface collapse "
                    "in porous-media flow")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--output-dir", default=None)
    p_self = sub.add_parser("selftest", help="quick operator checks")
    p_self.add_argument("--output-dir", default=None)
    p_val = sub.add_parser("validate-curve", help="check a snapshot CSV")
    p_val.add_argument("snapshot", help="path to a curve CSV")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError("cannot read config: %s" % exc) from exc
            config = parse_config(text)
        elif args.command == "selftest":
            config = ScenarioConfig()
        else:
            return validate_curve_file(args.snapshot)
        if getattr(args, "output_dir", None):
            config.output_dir = args.output_dir
        return run_scenario(config)
    except MuskatError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
