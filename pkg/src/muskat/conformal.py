"""The conformal map P(w) = (tan(w/2))^{1/2} and its companions.

The square root branch is realized as a cut along a ray from the origin of
the tan-plane; the ray direction is part of `BranchSpec` and is chosen per
scenario so that the cut passes through the near-contact point of the
interface.  The inverse is w = 2*arctan(zeta^2) with the principal
logarithm, which places w in the period strip Re w in (-pi, pi].
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError

#: Singular points of the inverse map: the origin plus the four points of
#: modulus one where 1 + zeta^4 = 0.
Q_POINTS = np.array(
    [
        0.0 + 0.0j,
        (1.0 + 1.0j) / np.sqrt(2.0),
        (-1.0 + 1.0j) / np.sqrt(2.0),
        (-1.0 - 1.0j) / np.sqrt(2.0),
        (1.0 - 1.0j) / np.sqrt(2.0),
    ]
)

#: Reject evaluations closer than this to a singular point / tan pole.
SINGULARITY_TOL = 1e-8


@dataclass(frozen=True)
class BranchSpec:
    """Square-root branch: cut ray from 0 in direction `cut_direction`
    (radians, in the tan-plane), anchored at the physical point the cut
    must pass through."""

    cut_anchor: complex = 0.0 + 0.0j
    cut_direction: float = np.pi / 2.0

    def __post_init__(self):
        if not np.isfinite(self.cut_anchor):
            raise ValueError("cut_anchor must be finite")
        object.__setattr__(self, "cut_direction", float(self.cut_direction) % (2.0 * np.pi))

    @classmethod
    def through_point(cls, w):
        """Branch whose cut passes through the physical point w (complex)."""
        u = np.tan(complex(w) / 2.0)
        return cls(cut_anchor=complex(w), cut_direction=float(np.angle(u)))


@dataclass(frozen=True)
class SingularPointSet:
    points: tuple

    def as_array(self):
        return np.asarray(self.points, dtype=complex)


def singular_points():
    """The five singular points of the inverse map."""
    return SingularPointSet(points=tuple(Q_POINTS))


def sqrt_branch(u, direction):
    """Square root with the cut along the ray arg(u) = direction;
    arguments are reduced to [direction - 2*pi, direction)."""
    u = np.asarray(u, dtype=complex)
    phi = np.angle(u)
    phi = phi - 2.0 * np.pi * np.ceil((phi - direction) / (2.0 * np.pi))
    return np.sqrt(np.abs(u)) * np.exp(0.5j * phi)


def _pole_distance(w):
    """Distance to the poles of tan(w/2) at w = pi (mod 2*pi) on the real axis."""
    w = np.asarray(w, dtype=complex)
    re = np.mod(w.real - np.pi, 2.0 * np.pi)
    re = np.minimum(re, 2.0 * np.pi - re)
    return np.hypot(re, w.imag)


def _zero_distance(w):
    """Distance to the zeros of tan(w/2) at w = 0 (mod 2*pi)."""
    w = np.asarray(w, dtype=complex)
    re = np.mod(w.real, 2.0 * np.pi)
    re = np.minimum(re, 2.0 * np.pi - re)
    return np.hypot(re, w.imag)


def map_P(w, branch=BranchSpec()):
    """P(w) = branch-consistent square root of tan(w/2)."""
    w = np.asarray(w, dtype=complex)
    if np.any(_pole_distance(w) < SINGULARITY_TOL):
        raise SingularityError("evaluation at a pole of tan(w/2)")
    out = sqrt_branch(np.tan(w / 2.0), BranchSpec().cut_direction if branch is None else branch.cut_direction)
    if not np.all(np.isfinite(out)):
        raise SingularityError("map overflow near a pole of tan(w/2)")
    return out if out.ndim else complex(out)


def map_P_inv(zeta):
    """w = 2*arctan(zeta^2) on the principal sheet (Re w in (-pi, pi]).

    Regular at q^0 = 0 (the forward map's branch point is a critical
    point, not a pole of the inverse); the four unit-modulus points are
    the genuine singularities of the arctan composition.
    """
    zeta = np.asarray(zeta, dtype=complex)
    d = np.abs(zeta[..., None] - Q_POINTS[1:]).min(axis=-1)
    if np.any(d < SINGULARITY_TOL):
        raise SingularityError("inverse map evaluated at a singular point q^l")
    u = zeta * zeta
    # principal arctan: (1/2i) log((1+iu)/(1-iu))
    w = -1.0j * np.log((1.0 + 1.0j * u) / (1.0 - 1.0j * u))
    if not np.all(np.isfinite(w)):
        raise SingularityError("inverse map overflow near a singular point")
    return w if w.ndim else complex(w)


def dP_dw(w, branch=BranchSpec()):
    """Complex derivative of P: sec^2(w/2) / (4 P(w)), branch-consistent."""
    w = np.asarray(w, dtype=complex)
    if np.any(_zero_distance(w) < SINGULARITY_TOL):
        raise SingularityError("dP/dw diverges at a zero of tan(w/2)")
    p = map_P(w, branch)
    out = 1.0 / (np.cos(w / 2.0) ** 2 * 4.0 * np.asarray(p))
    return out if out.ndim else complex(out)


def p2_inv(zeta):
    """Second component of the inverse map, Im(2*arctan(zeta^2))."""
    w = map_P_inv(zeta)
    return np.asarray(w).imag if np.ndim(w) else w.imag


def grad_P2_inv(zeta):
    """Gradient of Im P^{-1} in the two real tilde coordinates.

    For holomorphic g, grad(Im g) = (Im g', Re g'); here g' = 4 zeta / (1 + zeta^4).
    """
    zeta = np.asarray(zeta, dtype=complex)
    d = np.abs(zeta[..., None] - Q_POINTS[1:]).min(axis=-1)
    if np.any(d < SINGULARITY_TOL):
        raise SingularityError("gradient of the inverse map at a singular point")
    gp = 4.0 * zeta / (1.0 + zeta ** 4)
    return np.stack([gp.imag, gp.real], axis=-1)


def q_factor(zeta, branch=BranchSpec(), tol=SINGULARITY_TOL):
    """Q^2 = |dP/dw(P^{-1}(zeta))|^2 at tilde-plane samples.

    Uses |dP/dw| = |sec^2(w/2)| / (4 |zeta|), which is branch-independent.
    """
    zeta = np.asarray(zeta, dtype=complex)
    d = np.abs(zeta[..., None] - Q_POINTS).min(axis=-1)
    if np.any(d < tol):
        raise SingularityError("curve too close to a singular point q^l")
    w = map_P_inv(zeta)
    mag = np.abs(1.0 / np.cos(np.asarray(w) / 2.0) ** 2) / (4.0 * np.abs(zeta))
    q2 = mag ** 2
    return q2 if q2.ndim else float(q2)
