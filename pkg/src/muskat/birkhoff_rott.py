"""Birkhoff-Rott integral and the vorticity-amplitude solve.

The interface carries a vorticity sheet of amplitude omega; its induced
velocity is the principal-value Birkhoff-Rott integral

    BR(z, omega)(alpha) = (1/2pi) PV int (z(alpha)-z(beta))^perp
                          / |z(alpha)-z(beta)|^2 omega(beta) dbeta,

with x^perp = (-x2, x1).  Planar vectors are handled as complex numbers,
v1 + i v2, so the kernel is i / conj(z(alpha) - z(beta)).  Graph-periodic
curves use the period-summed (cotangent) kernel, closed curves the plain
Cauchy kernel over one period.

Quadrature is by kernel splitting: the exactly integrable cotangent part
goes through the Hilbert multiplier, the smooth remainder through the
trapezoid rule with the analytic diagonal limit, which keeps the whole
evaluation spectrally accurate.

Orientation: increasing alpha keeps the fluid on the right (below, for
graph curves; counterclockwise traversal for closed curves).  Under this
convention a flat sheet with omega = 1 induces (+1/2, 0) below and
(-1/2, 0) above.
"""

import numpy as np
from dataclasses import dataclass

from . import spectral
from . import conformal
from . import contour
from .errors import GeometryError, ConvergenceError

SOLVE_TOL = 1e-12
RESIDUAL_TOL = 1e-10
KRYLOV_MAXITER = 200
PICARD_MAXITER = 4000
PICARD_RELAX = 0.8


@dataclass(frozen=True)
class FluidParams:
    """Fluid density and viscosity (the vacuum phase carries zero both)."""
    rho0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        if self.rho0 <= 0 or self.mu0 <= 0:
            raise GeometryError("rho0 and mu0 must be positive")

    @property
    def ratio(self):
        return self.rho0 / self.mu0


def remainder_matrix(curve):
    """Smooth part of the Birkhoff-Rott kernel on the double grid.

    Entry (i, j) is K(z_i - z_j) - cot((alpha_i - alpha_j)/2)/(2 z_alpha_i)
    with K the mode-appropriate Cauchy kernel; the diagonal holds the
    analytic limit z_alphaalpha / (2 z_alpha^2).
    """
    z = curve.z
    zalpha = curve.tangent()
    if np.min(np.abs(zalpha)) == 0.0:
        raise GeometryError("degenerate tangent in kernel assembly")
    diff = z[:, np.newaxis] - z[np.newaxis, :]
    da = curve.alpha[:, np.newaxis] - curve.alpha[np.newaxis, :]
    n = curve.n
    off = ~np.eye(n, dtype=bool)
    kernel = np.zeros((n, n), dtype=complex)
    if curve.mode == contour.GRAPH:
        kernel[off] = 0.5 / np.tan(0.5 * diff[off])
    else:
        chord = diff[off]
        if np.min(np.abs(chord)) == 0.0:
            raise GeometryError("coincident samples: chord-arc constant is zero")
        kernel[off] = 1.0 / chord
    kernel[off] -= (0.5 / np.tan(0.5 * da[off])) / \
        np.repeat(zalpha, n - 1)  # row-wise z_alpha(alpha_i)
    zaa = curve.second_derivative()
    kernel[np.diag_indices(n)] = zaa / (2.0 * zalpha ** 2)
    if not np.all(np.isfinite(kernel)):
        raise GeometryError("kernel values are not finite; curve too close "
                            "to self-intersection for this grid")
    return kernel


def br_eval(curve, omega, kernel=None):
    """Birkhoff-Rott velocity at the samples, as complex numbers."""
    omega = np.asarray(omega, dtype=float)
    if kernel is None:
        kernel = remainder_matrix(curve)
    zalpha = curve.tangent()
    conj_br = -1j * ((kernel @ omega) / curve.n
                     + spectral.hilbert(omega) / (2.0 * zalpha))
    return np.conjugate(conj_br)


def br_operator_apply(curve, omega, kernel=None):
    """K[omega] = 2 BR(z, omega) . z_alpha, the implicit-equation operator."""
    br = br_eval(curve, omega, kernel)
    return 2.0 * np.real(np.conjugate(br) * curve.tangent())


def vorticity_forcing(curve, params, domain="physical"):
    """Right side of the amplitude equation (I + K) omega = forcing."""
    if domain == "physical":
        return -2.0 * params.ratio * spectral.deriv(curve.z2)
    if domain == "tilde":
        p2 = conformal.p2_inv(curve.z)
        return -2.0 * params.ratio * spectral.deriv(p2)
    raise GeometryError("unknown domain %r" % (domain,))


def solve_omega(curve, params, domain="physical", warm_start=None,
                tol=SOLVE_TOL, kernel=None):
    """Solve the second-kind equation omega + 2 BR(z, omega).z_alpha = forcing.

    Krylov iteration first (the operator has a bounded inverse, so it
    converges in a handful of iterations), Picard relaxation as fallback.
    The returned amplitude always satisfies the residual contract.
    """
    if kernel is None:
        kernel = remainder_matrix(curve)
    forcing = vorticity_forcing(curve, params, domain)
    scale = max(float(np.max(np.abs(forcing))), 1e-30)
    deflate = curve.mode == contour.CLOSED
    if deflate:
        # On a closed curve the operator has a one-dimensional kernel
        # (the circulation density; constants span the left kernel, so
        # any exact-derivative forcing is compatible). A rank-one mean
        # term pins the mean-zero representative, which keeps the solve
        # well conditioned and the amplitude reproducible; the kernel
        # direction moves the interface only tangentially.
        forcing = forcing - np.mean(forcing)

    def apply(om):
        out = om + br_operator_apply(curve, om, kernel)
        if deflate:
            out = out + np.mean(om)
        return out

    from scipy.sparse.linalg import LinearOperator, gmres
    n = curve.n
    op = LinearOperator((n, n), matvec=apply, dtype=float)
    x0 = None if warm_start is None else np.asarray(warm_start, dtype=float)
    try:
        omega, info = gmres(op, forcing, x0=x0, rtol=tol, atol=0.0,
                            maxiter=KRYLOV_MAXITER)
    except TypeError:  # older scipy spells the keyword differently
        omega, info = gmres(op, forcing, x0=x0, tol=tol, atol=0.0,
                            maxiter=KRYLOV_MAXITER)
    if info != 0 or not np.all(np.isfinite(omega)) \
            or np.max(np.abs(apply(omega) - forcing)) > RESIDUAL_TOL * scale:
        omega = picard_omega(curve, params, domain, warm_start, tol, kernel)
    residual = np.max(np.abs(apply(omega) - forcing))
    if residual > RESIDUAL_TOL * scale:
        raise ConvergenceError("vorticity solve residual %.3e exceeds "
                               "tolerance" % residual)
    return omega


def picard_omega(curve, params, domain="physical", warm_start=None,
                 tol=SOLVE_TOL, kernel=None):
    """Relaxed fixed-point iteration omega <- (1-r) omega + r (forcing - K omega)."""
    if kernel is None:
        kernel = remainder_matrix(curve)
    forcing = vorticity_forcing(curve, params, domain)
    scale = max(float(np.max(np.abs(forcing))), 1e-30)
    deflate = curve.mode == contour.CLOSED
    if deflate:
        forcing = forcing - np.mean(forcing)

    def apply(om):
        out = om + br_operator_apply(curve, om, kernel)
        if deflate:
            out = out + np.mean(om)
        return out

    omega = np.zeros(curve.n) if warm_start is None \
        else np.asarray(warm_start, dtype=float).copy()
    for _ in range(PICARD_MAXITER):
        update = forcing - (apply(omega) - omega)
        omega = (1.0 - PICARD_RELAX) * omega + PICARD_RELAX * update
        if np.max(np.abs(apply(omega) - forcing)) < tol * scale:
            return omega
    residual = np.max(np.abs(apply(omega) - forcing))
    if residual > RESIDUAL_TOL * scale:
        raise ConvergenceError("fixed-point vorticity iteration stalled at "
                               "residual %.3e" % residual)
    return omega


def surface_velocity(curve, omega, kernel=None):
    """Fluid-side boundary velocity u = BR + (omega / 2|z_alpha|^2) z_alpha."""
    omega = np.asarray(omega, dtype=float)
    zalpha = curve.tangent()
    br = br_eval(curve, omega, kernel)
    return br + omega * zalpha / (2.0 * np.abs(zalpha) ** 2)


def velocity_field(curve, omega, x):
    """Velocity induced at a point x (complex) off the curve.

    Plain trapezoid quadrature of the kernel; accurate only when x keeps
    several grid cells of distance from the sheet.
    """
    omega = np.asarray(omega, dtype=float)
    x = complex(x)
    z = curve.z
    gap = np.min(np.abs(x - z))
    spacing = 2.0 * np.pi / curve.n * float(np.max(curve.speed()))
    if gap <= 10.0 * spacing:
        raise GeometryError("evaluation point within the quadrature "
                            "boundary layer of the sheet")
    if curve.mode == contour.GRAPH:
        kern = 0.5 / np.tan(0.5 * (x - z))
    else:
        kern = 1.0 / (x - z)
    conj_v = -1j * np.sum(omega * kern) / curve.n
    return np.conjugate(conj_v)
