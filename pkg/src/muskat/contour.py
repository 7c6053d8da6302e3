"""Discrete interface curves.

A curve is a uniformly sampled map alpha -> (z1(alpha), z2(alpha)) on the
grid of spectral.grid.  Two topologies are supported: "graph" curves satisfy
z(alpha + 2pi) = z(alpha) + (2pi, 0) and describe a fluid region below a
periodic interface; "closed" curves are plain 2pi-periodic loops.

This module provides the splash-curve family (a pocket of vacuum pinched
to a controllable neck over a periodic base), its validator, geometric
functionals (chord-arc constant, the F functional, minimum self-distance)
and transport of curves between the physical strip and the image of the
square-root-of-tangent map.
"""

import csv

import numpy as np
from dataclasses import dataclass, field

from . import spectral
from . import conformal
from .errors import GeometryError, OutputError

GRAPH = "graph"
CLOSED = "closed"

# distance below which two distinct-parameter samples count as touching
CONTACT_TOL = 1e-4
# parameter separation excluded when hunting for self-contacts
CONTACT_ETA = 0.5


@dataclass
class SampledCurve:
    alpha: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    mode: str = GRAPH

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.z1 = np.asarray(self.z1, dtype=float)
        self.z2 = np.asarray(self.z2, dtype=float)
        spectral.check_grid(self.alpha)
        if self.mode not in (GRAPH, CLOSED):
            raise GeometryError("unknown curve mode %r" % (self.mode,))
        if self.z1.shape != self.alpha.shape or self.z2.shape != self.alpha.shape:
            raise GeometryError("sample arrays must match the grid")
        if not (np.all(np.isfinite(self.z1)) and np.all(np.isfinite(self.z2))):
            raise GeometryError("curve samples must be finite")

    @property
    def n(self):
        return self.alpha.size

    @property
    def z(self):
        """Samples as complex numbers z1 + i z2."""
        return self.z1 + 1j * self.z2

    def periodic_z1(self):
        """The periodic content of z1 (z1 - alpha for graph curves)."""
        if self.mode == GRAPH:
            return self.z1 - self.alpha
        return self.z1

    def tangent(self):
        """Complex dz/dalpha by spectral differentiation."""
        dz1 = spectral.deriv(self.periodic_z1())
        if self.mode == GRAPH:
            dz1 = dz1 + 1.0
        return dz1 + 1j * spectral.deriv(self.z2)

    def speed(self):
        return np.abs(self.tangent())

    def second_derivative(self):
        return spectral.deriv(self.periodic_z1(), 2) + 1j * spectral.deriv(self.z2, 2)

    def at(self, points):
        """Trigonometric interpolation of (z1, z2) at arbitrary parameters."""
        points = np.asarray(points, dtype=float)
        p1 = spectral.trig_interp(self.periodic_z1(), points)
        z2 = spectral.trig_interp(self.z2, points)
        if self.mode == GRAPH:
            p1 = p1 + points
        return p1 + 1j * z2

    def tangent_at(self, points):
        points = np.asarray(points, dtype=float)
        d1 = spectral.trig_interp(spectral.deriv(self.periodic_z1()), points)
        if self.mode == GRAPH:
            d1 = d1 + 1.0
        return d1 + 1j * spectral.trig_interp(spectral.deriv(self.z2), points)

    def copy(self):
        return SampledCurve(self.alpha.copy(), self.z1.copy(), self.z2.copy(),
                            self.mode)


@dataclass(frozen=True)
class SplashCurveParams:
    """Shape controls for the pinched-pocket family.

    neck_width: gap between the two nearly touching branches (0 gives
        an exact self-contact); opening_angle: parameter of the contact
    points (the pocket occupies |alpha| < opening_angle); depth: vertical
    extent from the contact height down to the pocket bottom; asymmetry:
    skews the two towers flanking the neck (0 gives a mirror-symmetric
    curve); n: sample count.
    """
    neck_width: float = 0.05
    opening_angle: float = 1.1
    depth: float = 1.15
    asymmetry: float = 0.0
    n: int = 256

    def __post_init__(self):
        if self.neck_width < 0:
            raise GeometryError("neck_width must be nonnegative")
        if not 0.3 < self.opening_angle < 2.0:
            raise GeometryError("opening_angle outside the supported range")
        if self.depth <= 0:
            raise GeometryError("depth must be positive")
        if self.n < 16:
            raise GeometryError("n too small")


@dataclass
class SplashReport:
    alpha1: float
    alpha2: float
    x_s: tuple
    min_distance: float
    is_splash: bool
    failures: list = field(default_factory=list)
    t_s: float = float("nan")


# fixed vertical layout of the family; depth slides the pocket floor
_NECK_HEIGHT = 0.45
_TOWER_HEIGHT = 0.9
_POCKET_HALF_WIDTH = 0.4
_MODES = 8
_SMOOTHNESS = 3.0


def _min_norm_solve(rows, rhs, weights):
    """Smallest weighted-norm coefficient vector satisfying rows @ c = rhs.

    weights are prior standard deviations per coefficient; penalizing
    high modes keeps the interpolant from oscillating.
    """
    a = np.asarray(rows, dtype=float)
    scaled = a * weights[np.newaxis, :]
    y, *_ = np.linalg.lstsq(scaled, np.asarray(rhs, dtype=float), rcond=None)
    return weights * y


def _trig_rows(points, n_modes, derivative=0, with_mean=False):
    """Rows of [sin k a | cos k a] (optionally prefixed by a constant column)
    or their derivatives, evaluated at the given parameters."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    k = np.arange(1, n_modes + 1)[np.newaxis, :]
    a = points[:, np.newaxis]
    if derivative == 0:
        sin_part, cos_part = np.sin(k * a), np.cos(k * a)
    else:
        sin_part, cos_part = k * np.cos(k * a), -k * np.sin(k * a)
    blocks = [sin_part, cos_part]
    if with_mean:
        mean_col = np.full((points.size, 1), 1.0 if derivative == 0 else 0.0)
        blocks.insert(0, mean_col)
    return np.hstack(blocks)


def _eval_series(coeffs, points, n_modes, with_mean=False):
    return _trig_rows(points, n_modes, 0, with_mean) @ coeffs


def make_splash_curve(params=SplashCurveParams()):
    """Build a graph curve whose interface pinches to a gap of neck_width.

    The pocket hangs below the neck height, flanked by two towers; the
    contact parameters are +-opening_angle, where both the positions and
    the x1-tangency conditions are imposed as exact linear constraints on
    a low-mode trigonometric ansatz.  The remaining freedom is fixed by a
    smoothest-interpolant (weighted minimum norm) solve.
    """
    astar = params.opening_angle
    g = params.neck_width
    y_s = _NECK_HEIGHT
    y_p = y_s - params.depth
    a_t = 0.5 * (astar + np.pi)       # tower crest parameters +-a_t
    a_b = 0.5 * astar                 # pocket shoulder parameters +-a_b

    k = np.arange(1, _MODES + 1, dtype=float)
    w_modes = k ** (-_SMOOTHNESS)
    weights1 = np.concatenate([w_modes, w_modes])

    # x1 = alpha + trig series; pin the neck gap with flat tangency and
    # hold the pocket shoulders open so the branches do not fold back.
    pts = np.array([-astar, astar, -a_b, a_b])
    targets = np.array([-g / 2, g / 2, -_POCKET_HALF_WIDTH, _POCKET_HALF_WIDTH])
    rows1 = np.vstack([
        _trig_rows(pts, _MODES, 0),
        _trig_rows(np.array([-astar, astar, -a_b, a_b]), _MODES, 1),
    ])
    rhs1 = np.concatenate([targets - pts, -np.ones(4)])  # series' = -1 where z1' = 0
    c1 = _min_norm_solve(rows1, rhs1, weights1)

    # x2 = mean + trig series; pocket floor, periodic base, equal contact
    # heights, and tower crests skewed by the asymmetry parameter.
    weights2 = np.concatenate([[1.0], w_modes, w_modes])
    pts2 = np.array([0.0, np.pi, -astar, astar, -a_t, a_t])
    targets2 = np.array([y_p, y_p, y_s, y_s,
                         _TOWER_HEIGHT + params.asymmetry,
                         _TOWER_HEIGHT - params.asymmetry])
    rows2 = np.vstack([
        _trig_rows(pts2, _MODES, 0, with_mean=True),
        _trig_rows(np.array([-a_t, a_t]), _MODES, 1, with_mean=True),
    ])
    rhs2 = np.concatenate([targets2, np.zeros(2)])
    c2 = _min_norm_solve(rows2, rhs2, weights2)

    alpha = spectral.grid(params.n)
    z1 = alpha + _eval_series(c1, alpha, _MODES)
    z2 = _eval_series(c2, alpha, _MODES, with_mean=True)
    curve = SampledCurve(alpha, z1, z2, GRAPH)
    if np.min(curve.speed()) <= 0:
        raise GeometryError("splash-curve parameters produce a degenerate tangent")
    return curve


def perturb(curve, amplitude, profile):
    """curve + amplitude * profile, where profile is a (p1, p2) pair."""
    p1, p2 = profile
    out = SampledCurve(curve.alpha,
                       curve.z1 + amplitude * np.asarray(p1, dtype=float),
                       curve.z2 + amplitude * np.asarray(p2, dtype=float),
                       curve.mode)
    if np.min(out.speed()) <= 0:
        raise GeometryError("perturbation degenerates the tangent")
    return out


def _pair_displacements(curve):
    """All pairwise z(alpha_i) - z(alpha_j), with the nearest horizontal
    period image taken in graph mode.  Returns (complex matrix, dist_T)."""
    z = curve.z
    diff = z[:, np.newaxis] - z[np.newaxis, :]
    if curve.mode == GRAPH:
        shift = 2.0 * np.pi * np.round(diff.real / (2.0 * np.pi))
        diff = diff - shift
    da = np.abs(curve.alpha[:, np.newaxis] - curve.alpha[np.newaxis, :])
    dist_t = np.minimum(da, 2.0 * np.pi - da)
    return diff, dist_t


def chord_arc_constant(curve):
    """min over sample pairs of |z(a) - z(b)| / dist_T(a, b)."""
    diff, dist_t = _pair_displacements(curve)
    mask = dist_t > 0
    ratios = np.abs(diff[mask]) / dist_t[mask]
    return float(np.min(ratios))


def f_functional(curve):
    """sup |beta| / |z(a) - z(a - beta)| over the double grid, including
    the beta -> 0 limit 1 / |z_alpha|.  Returns inf for touching curves."""
    diff, dist_t = _pair_displacements(curve)
    mask = dist_t > 0
    chords = np.abs(diff[mask])
    if np.min(chords) == 0.0:
        return float("inf")
    best = float(np.max(dist_t[mask] / chords))
    return max(best, float(1.0 / np.min(curve.speed())))


def _quadratic_refine(values, i, j, step):
    """Sub-grid minimum of a 3x3 patch of a distance matrix around (i, j).

    Fits d(u, v) = quadratic via central differences and clamps the
    offsets to one grid cell.  Returns (du, dv) in parameter units.
    """
    n = values.shape[0]
    patch = values[np.ix_([(i - 1) % n, i, (i + 1) % n],
                          [(j - 1) % n, j, (j + 1) % n])]
    if not np.all(np.isfinite(patch)):
        return 0.0, 0.0
    gu = 0.5 * (patch[2, 1] - patch[0, 1])
    gv = 0.5 * (patch[1, 2] - patch[1, 0])
    huu = patch[2, 1] - 2.0 * patch[1, 1] + patch[0, 1]
    hvv = patch[1, 2] - 2.0 * patch[1, 1] + patch[1, 0]
    huv = 0.25 * (patch[2, 2] - patch[2, 0] - patch[0, 2] + patch[0, 0])
    hess = np.array([[huu, huv], [huv, hvv]])
    grad = np.array([gu, gv])
    if not (np.all(np.isfinite(hess)) and np.all(np.isfinite(grad))):
        return 0.0, 0.0
    try:
        offset = -np.linalg.solve(hess, grad)
    except np.linalg.LinAlgError:
        offset = np.zeros(2)
    offset = np.clip(offset, -1.0, 1.0)
    return offset[0] * step, offset[1] * step


def _refine_pair(curve, a, b):
    """Polish a near-contact pair to the stationary point of the squared
    chord length, via damped least-squares Newton on its gradient."""
    x = np.array([a, b], dtype=float)
    za, zb = curve.at(x[0]), curve.at(x[1])
    shift = 0.0
    if curve.mode == GRAPH:
        shift = 2.0 * np.pi * np.round((za - zb).real / (2.0 * np.pi))
    for _ in range(80):
        za, zb = curve.at(x[0]), curve.at(x[1])
        ta, tb = curve.tangent_at(x[0]), curve.tangent_at(x[1])
        d = za - zb - shift
        grad = np.array([(d.conjugate() * ta).real, -(d.conjugate() * tb).real])
        saa = curve.second_derivative()
        ka = spectral.trig_interp(saa.real, x[0]) + 1j * spectral.trig_interp(saa.imag, x[0])
        kb = spectral.trig_interp(saa.real, x[1]) + 1j * spectral.trig_interp(saa.imag, x[1])
        haa = (np.abs(ta) ** 2 + (d.conjugate() * ka).real)
        hbb = (np.abs(tb) ** 2 - (d.conjugate() * kb).real)
        hab = -(ta.conjugate() * tb).real
        hess = np.array([[haa, hab], [hab, hbb]])
        if not (np.all(np.isfinite(hess)) and np.all(np.isfinite(grad))):
            break
        step, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
        norm = np.max(np.abs(step))
        if norm > 0.2:
            step = step * (0.2 / norm)
        x = x + step
        if np.max(np.abs(step)) < 1e-15:
            break
    return x[0], x[1]


def _arclength_separation(curve):
    """Pairwise along-the-curve distance between samples, wrapped over the
    total length.  Also returns the cumulative arclength samples and the
    total length, for point queries."""
    speed = curve.speed()
    rate = float(np.mean(speed))
    total = 2.0 * np.pi * rate
    s = spectral.running_integral(speed)
    ds = np.abs(s[:, np.newaxis] - s[np.newaxis, :])
    return np.minimum(ds, total - ds), s - rate * (curve.alpha + np.pi), rate, total


def interface_min_distance(curve, eta=0.5):
    """Minimum of |z(a) - z(b)| over pairs whose separation along the curve
    is at least eta (arclength units), with sub-grid refinement.  Returns
    (distance, (a, b)).

    The exclusion is in arclength rather than parameter so that the answer
    does not depend on how the parameterization distributes samples: a
    pullback that crowds many parameters into a short physical arc must
    not hide a genuine near-contact behind the neighbor exclusion.
    """
    if eta <= 0.0:
        raise GeometryError("eta must be positive")
    diff, _ = _pair_displacements(curve)
    dist_s, s_per, rate, total = _arclength_separation(curve)
    if eta >= 0.5 * total:
        raise GeometryError("eta must be below half the curve length")
    d = np.abs(diff)
    d[dist_s < eta] = np.inf
    i, j = np.unravel_index(np.argmin(d), d.shape)
    step = 2.0 * np.pi / curve.n
    du, dv = _quadratic_refine(d, i, j, step)
    a, b = _refine_pair(curve, curve.alpha[i] + du, curve.alpha[j] + dv)
    grid_val = d[i, j]
    if np.isfinite(a) and np.isfinite(b):
        sa = spectral.trig_interp(s_per, a) + rate * (a + np.pi)
        sb = spectral.trig_interp(s_per, b) + rate * (b + np.pi)
        sep = abs(sa - sb) % total
        sep = min(sep, total - sep)
    else:
        sep = -1.0
    if sep < eta - 1e-12:
        # the refinement left the admissible region (the minimum sits on
        # the arclength-separation boundary); keep the grid answer
        return float(grid_val), (float(curve.alpha[i]), float(curve.alpha[j]))
    za, zb = curve.at(a), curve.at(b)
    gap = za - zb
    if curve.mode == GRAPH:
        gap = gap - 2.0 * np.pi * np.round(gap.real / (2.0 * np.pi))
    refined = abs(gap)
    if refined > grid_val:  # refinement must not lose to the raw grid
        return float(grid_val), (float(curve.alpha[i]), float(curve.alpha[j]))
    return float(refined), (float(a), float(b))


def _contact_clusters(curve, tol, eta):
    """Group grid pairs closer than tol into connected clusters; each
    cluster is one candidate self-contact."""
    diff, _ = _pair_displacements(curve)
    dist_s, _, _, _ = _arclength_separation(curve)
    d = np.abs(diff)
    d[dist_s < eta] = np.inf
    close = np.argwhere(d < tol)
    close = close[close[:, 0] < close[:, 1]]
    if close.size == 0:
        return []
    step = 2.0 * np.pi / curve.n
    clusters = []
    for i, j in close:
        placed = False
        for cluster in clusters:
            ci, cj = cluster[-1]
            ra = min(abs(i - ci), curve.n - abs(i - ci))
            rb = min(abs(j - cj), curve.n - abs(j - cj))
            if max(ra, rb) * step < 4.0 * eta / 5.0 and max(ra, rb) <= max(4, curve.n // 16):
                cluster.append((i, j))
                placed = True
                break
        if not placed:
            clusters.append([(i, j)])
    return clusters


def validate_splash_curve(curve, branch=conformal.BranchSpec(), contact_tol=CONTACT_TOL):
    """Check the admissibility conditions of a candidate splash curve.

    A passing curve has exactly one self-contact pair, x1-tangency (or the
    matched-slope condition) at the contact, a nondegenerate tangent, and
    an image under the half-tangent map that stays clear of the singular
    points and remains injective.  Failures are reported, not raised.
    """
    failures = []
    speed = curve.speed()
    if np.min(speed) <= 0:
        failures.append("degenerate tangent: min |z_alpha| <= 0")

    dist, (a1, a2) = interface_min_distance(curve, CONTACT_ETA)
    touching = dist < contact_tol
    if touching:
        clusters = _contact_clusters(curve, max(10 * dist, contact_tol), CONTACT_ETA)
        if len(clusters) > 1:
            failures.append("multiple self-contacts (%d found)" % len(clusters))
    else:
        failures.append("no self-contact (min distance %.3e)" % dist)

    t1, t2 = curve.tangent_at(a1), curve.tangent_at(a2)
    flat = max(abs(t1.real), abs(t2.real))
    matched = abs(t1.real / abs(t1) + t2.real / abs(t2))
    if touching and flat > 1e-8 and matched > 1e-8:
        failures.append("contact tangency violated (|dz1|=%.3e, slope sum %.3e)"
                        % (flat, matched))

    if curve.mode == GRAPH:
        try:
            tilde = to_tilde(curve, branch)
            q_dist = np.min(np.abs(tilde.z[:, np.newaxis]
                                   - conformal.Q_POINTS[np.newaxis, :]))
            if q_dist <= 1e-2:
                failures.append("transformed image too close to a singular point "
                                "(distance %.3e)" % q_dist)
            if chord_arc_constant(tilde) <= 0:
                failures.append("transformed image is not injective")
        except GeometryError as exc:
            failures.append("transform failed: %s" % exc)

    point = curve.at(0.5 * (a1 + a2)) if touching else curve.at(a1)
    is_splash = touching and not failures
    return SplashReport(alpha1=float(a1), alpha2=float(a2),
                        x_s=(float(point.real), float(point.imag)),
                        min_distance=float(dist),
                        is_splash=is_splash, failures=failures)


def to_tilde(curve, branch=conformal.BranchSpec()):
    """Push a graph curve through the half-tangent map; the image closes up."""
    if curve.mode != GRAPH:
        raise GeometryError("to_tilde expects a graph curve")
    zeta = conformal.map_P(curve.z, branch)
    return SampledCurve(curve.alpha, zeta.real, zeta.imag, CLOSED)


def from_tilde(curve, branch=conformal.BranchSpec()):
    """Pull a closed curve back to the strip, unwrapping the 2pi jumps of
    the real part so that z1 - alpha comes out continuous and periodic."""
    if curve.mode != CLOSED:
        raise GeometryError("from_tilde expects a closed curve")
    w = conformal.map_P_inv(curve.z)
    z1 = np.unwrap(w.real)
    # anchor the branch so the periodic content starts inside [-pi, pi)
    z1 = z1 - 2.0 * np.pi * np.round((z1[0] - curve.alpha[0]) / (2.0 * np.pi))
    return SampledCurve(curve.alpha, z1, w.imag, GRAPH)


def _equalize_pass(curve):
    """One arclength-equalization pass: invert the cumulative arclength of
    the trigonometric interpolant (dense monotone bracketing, then Newton)
    and resample the interpolant at the inverted parameters."""
    speed = curve.speed()
    total = 2.0 * np.pi * float(np.mean(speed))
    s = spectral.running_integral(speed)  # s(-pi) = 0
    rate = total / (2.0 * np.pi)
    s_periodic = s - rate * (curve.alpha + np.pi)
    targets = rate * (curve.alpha + np.pi)
    fine = np.linspace(-np.pi, np.pi, 8 * curve.n + 1)
    s_fine = spectral.trig_interp(s_periodic, fine) + rate * (fine + np.pi)
    s_fine[0], s_fine[-1] = 0.0, total  # exact endpoints for the bracketing
    pts = np.interp(targets, s_fine, fine)
    for _ in range(12):
        s_val = spectral.trig_interp(s_periodic, pts) + rate * (pts + np.pi)
        residual = s_val - targets
        pts = pts - residual / spectral.trig_interp(speed, pts)
        if np.max(np.abs(residual)) < 1e-14 * max(total, 1.0):
            break
    znew = curve.at(pts)
    return SampledCurve(curve.alpha, znew.real, znew.imag, curve.mode)


def _truncate_modes(values, n):
    """Project samples onto the first n Fourier modes and resample on the
    coarse grid (clean truncation, no aliasing of the discarded tail)."""
    c = np.fft.fft(np.asarray(values, dtype=float)) / np.size(values)
    h = n // 2
    out = np.zeros(n, dtype=complex)
    out[:h] = c[:h]
    out[h + 1:] = c[-(h - 1):]
    out[h] = c[h] + c[-h]
    return np.real(np.fft.ifft(out) * n)


def _refine_grid(curve, factor):
    """Resample the trigonometric interpolant on a grid factor times finer."""
    fine = -np.pi + 2.0 * np.pi * np.arange(factor * curve.n) / (factor * curve.n)
    z = curve.at(fine)
    return SampledCurve(fine, z.real, z.imag, curve.mode)


def _coarsen_grid(curve, n):
    z1 = _truncate_modes(curve.periodic_z1(), n)
    alpha = -np.pi + 2.0 * np.pi * np.arange(n) / n
    if curve.mode == GRAPH:
        z1 = z1 + alpha
    return SampledCurve(alpha, z1, _truncate_modes(curve.z2, n), curve.mode)


def _equalize_to_floor(curve, target, max_passes):
    out = curve
    best = np.inf
    for _ in range(max_passes):
        out = _equalize_pass(out)
        sp = out.speed()
        ratio = float(np.std(sp) / np.mean(sp))
        if ratio < target or ratio > 0.97 * best:
            break
        best = min(best, ratio)
    return out, float(np.std(sp) / np.mean(sp))


def resample_uniform(curve, polish=True, target=1e-10, max_passes=40):
    """Reparameterize so the discrete |z_alpha| is constant.

    Repeated interpolation passes drive the nonuniformity down to the
    aliasing floor of the grid.  When the curve is only marginally
    resolved that floor is high, so the equalization is redone on a four
    times finer grid and the result truncated back: the coarse samples
    then carry the genuine low-mode content of the arclength
    parameterization instead of its aliased image.  An optional
    Gauss-Newton polish finally makes the discrete speed uniform to the
    requested target.
    """
    out, ratio = _equalize_to_floor(curve, target, max_passes)
    if ratio > max(target, 1e-8):
        fine, _ = _equalize_to_floor(_refine_grid(out, 4), target, max_passes)
        out = _coarsen_grid(fine, curve.n)
        ratio = float(np.std(out.speed()) / np.mean(out.speed()))
    if polish and ratio > target:
        out = _polish_uniform(out, target)
    return out


def _diff_matrix(n):
    """Dense spectral differentiation matrix (complex action on samples)."""
    eye = np.eye(n)
    cols = [spectral.deriv(eye[:, j]) for j in range(n)]
    return np.array(cols).T


def _polish_uniform(curve, target):
    """Gauss-Newton solve on the samples themselves for exactly uniform
    discrete speed.

    Pure reparameterization cannot reach uniformity below the grid's
    aliasing floor (a few spectral directions of |z_alpha| are invariant
    under parameter shifts), so the minimum-norm step is taken directly
    in sample space; the resulting geometric adjustment lives at the
    Nyquist scale and is orders of magnitude below the curve features.
    """
    n = curve.n
    dmat = _diff_matrix(n)
    proj = np.eye(n) - np.full((n, n), 1.0 / n)  # removes the mean
    cur = curve
    best, best_ratio = curve, np.inf
    for _ in range(25):
        tau = cur.tangent()
        sp = np.abs(tau)
        ratio = float(np.std(sp) / np.mean(sp))
        if ratio < best_ratio:
            best, best_ratio = cur, ratio
        if ratio < target:
            break
        residual = proj @ sp
        outer = np.conjugate(tau)[:, np.newaxis] * dmat
        jac = np.hstack([proj @ (outer.real / sp[:, np.newaxis]),
                         proj @ ((1j * outer).real / sp[:, np.newaxis])])
        step, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        cur = SampledCurve(cur.alpha, cur.z1 + step[:n], cur.z2 + step[n:],
                           cur.mode)
    return best


def write_curve_csv(path, curve, omega=None, sigma=None):
    """Write samples as CSV; optional columns extend the header."""
    header = ["alpha", "z1", "z2"]
    columns = [curve.alpha, curve.z1, curve.z2]
    if omega is not None:
        header.append("omega")
        columns.append(np.asarray(omega, dtype=float))
    if sigma is not None:
        header.append("sigma")
        columns.append(np.asarray(sigma, dtype=float))
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in zip(*columns):
                writer.writerow(["%.17g" % v for v in row])
    except OSError as exc:
        raise OutputError("cannot write %s: %s" % (path, exc))


def read_curve_csv(path, mode=GRAPH):
    """Read a snapshot CSV; returns (curve, extras dict of extra columns)."""
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader if row]
    except (OSError, ValueError, StopIteration) as exc:
        raise OutputError("cannot read %s: %s" % (path, exc))
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header) or len(header) < 3:
        raise OutputError("malformed curve CSV %s" % path)
    named = dict(zip(header, data.T))
    for key in ("alpha", "z1", "z2"):
        if key not in named:
            raise OutputError("curve CSV %s missing column %r" % (path, key))
    curve = SampledCurve(named["alpha"], named["z1"], named["z2"], mode)
    extras = {k: v for k, v in named.items() if k not in ("alpha", "z1", "z2")}
    return curve, extras
