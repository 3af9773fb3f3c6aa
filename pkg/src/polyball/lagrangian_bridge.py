"""Eulerian profiles and the Lagrangian deformation map.

The mass coordinate ``phi(r) = r eta(r)**(1/3)`` maps the ball ``[0, R]``
onto the reference ball ``[0, Z]``; its inverse ``psi`` is the deformation.
Since ``eta' = -3 (eta - delta)/r`` the slope is known exactly,
``psi' = eta**(2/3)/delta``, and ``psi`` is stored as a cubic Hermite
interpolant through the sampled nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .constitutive import Material


class NonMonotoneMap(ValueError):
    """The sampled map is not strictly increasing."""


@dataclass(frozen=True)
class StretchPair:
    lambda1: np.ndarray
    lambda2: np.ndarray

    @property
    def y(self):
        return self.lambda2 / self.lambda1


@dataclass
class DeformationMap:
    """Sampled ``psi : [0, Z] -> [0, R]`` with exact node slopes."""

    z: np.ndarray
    psi: np.ndarray
    psiprime: np.ndarray
    limited: int = 0

    def __post_init__(self):
        z, p, d = (np.asarray(a, dtype=float) for a in (self.z, self.psi, self.psiprime))
        if z.shape != p.shape or z.shape != d.shape or z.size < 2:
            raise ValueError("z, psi and psiprime must be equal-length arrays")
        if np.any(np.diff(z) <= 0.0) or np.any(np.diff(p) <= 0.0):
            raise NonMonotoneMap("psi must be strictly increasing")
        if np.any(d <= 0.0):
            raise NonMonotoneMap("psi' must be positive")
        self.z, self.psi, self.psiprime = z, p, d
        slopes, self.limited = _fritsch_carlson(z, p, d)
        self._spline = CubicHermiteSpline(z, p, slopes)

    @property
    def Z(self) -> float:
        return float(self.z[-1])

    @property
    def R(self) -> float:
        return float(self.psi[-1])

    def __call__(self, z):
        return self._spline(z)

    def derivative(self, z):
        return self._spline(z, 1)

    def stretches(self) -> StretchPair:
        """``lambda1 = psi'`` and ``lambda2 = psi/z`` at the nodes."""
        lam2 = np.empty_like(self.z)
        pos = self.z > 0.0
        lam2[pos] = self.psi[pos] / self.z[pos]
        lam2[~pos] = self.psiprime[~pos]
        return StretchPair(self.psiprime.copy(), lam2)

    def rows(self) -> np.ndarray:
        s = self.stretches()
        return np.column_stack([self.z, self.psi, self.psiprime, s.lambda1, s.lambda2])


def _fritsch_carlson(x, f, d):
    # shrink node slopes where the cubic would overshoot the data
    d = d.copy()
    sec = np.diff(f) / np.diff(x)
    a = d[:-1] / sec
    b = d[1:] / sec
    r = a * a + b * b
    bad = np.nonzero(r > 9.0)[0]
    for k in bad:
        t = 3.0 / math.sqrt(r[k])
        d[k] = min(d[k], t * a[k] * sec[k])
        d[k + 1] = min(d[k + 1], t * b[k] * sec[k])
    return d, len(bad)


def stretches(delta, eta) -> StretchPair:
    """``lambda1 = eta**(2/3)/delta`` and ``lambda2 = eta**(-1/3)``."""
    delta = np.asarray(delta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return StretchPair(eta ** (2.0 / 3.0) / delta, eta ** (-1.0 / 3.0))


def _with_center(r, delta, eta, delta_c):
    if r[0] > 0.0:
        r = np.concatenate([[0.0], r])
        delta = np.concatenate([[delta_c], delta])
        eta = np.concatenate([[delta_c], eta])
    return r, delta, eta


def euler_to_lagrange(profile) -> DeformationMap:
    """Deformation map of a ball with a boundary.

    Parameters
    ----------
    profile : BallProfile or SelfSimilarProfile
        Needs ``delta``/``eta`` (or ``delta0``/``eta0``) sampled up to the
        boundary and a positive central value.

    Raises
    ------
    ValueError
        If the profile has no boundary.
    NonMonotoneMap
        If ``phi`` fails to increase on the samples.
    """
    r, delta, eta, R, dc = _unpack(profile)
    if R is None:
        raise ValueError("profile has no boundary")
    keep = delta > 0.0
    if not np.all(keep):
        # an extinction sample at the boundary has psi' = inf
        raise NonMonotoneMap("psi' is unbounded where the density vanishes")
    r, delta, eta = _with_center(r, delta, eta, dc)
    phi = r * np.cbrt(eta)
    return DeformationMap(phi, r, eta ** (2.0 / 3.0) / delta)


def _unpack(profile):
    if hasattr(profile, "delta0"):
        return (profile.z, profile.delta0, profile.eta0, profile.Z,
                profile.params.delta0_c)
    return profile.r, profile.delta, profile.eta, profile.R, profile.center.delta_c


def lagrange_to_euler(m: DeformationMap, z=None):
    """Eulerian ``(r, delta, eta)`` from a deformation map.

    ``delta = z**2/(psi**2 psi')`` and ``eta = (z/psi)**3`` at ``r = psi(z)``.
    Without ``z`` the map's own nodes (with their exact slopes) are used;
    otherwise the interpolant and its derivative.
    """
    if z is None:
        z, p, d = m.z, m.psi, m.psiprime
    else:
        z = np.asarray(z, dtype=float)
        p, d = m(z), m.derivative(z)
        if np.any(d <= 0.0):
            raise NonMonotoneMap("psi' must be positive")
    delta = np.empty_like(z)
    eta = np.empty_like(z)
    pos = z > 0.0
    delta[pos] = z[pos] ** 2 / (p[pos] ** 2 * d[pos])
    eta[pos] = (z[pos] / p[pos]) ** 3
    # at the center psi ~ psi'(0) z
    delta[~pos] = d[~pos] ** -3
    eta[~pos] = d[~pos] ** -3
    return p, delta, eta


@dataclass(frozen=True)
class BoundaryCheck:
    applicable: bool
    residual: float | None
    relative: float | None


def boundary_condition_residual(m: DeformationMap, mat: Material) -> BoundaryCheck:
    """``psi(Z) - y_b Z psi'(Z)``; not applicable when ``y_b = 0``."""
    if mat.zero_shear:
        return BoundaryCheck(False, None, None)
    yb = mat.y_b
    res = float(m.psi[-1] - yb * m.Z * m.psiprime[-1])
    return BoundaryCheck(True, res, abs(res) / m.R)


def psiprime_center(profile) -> float:
    """Expected ``psi'(0) = delta_c**(-1/3)`` (one for the reference density)."""
    return _unpack(profile)[4] ** (-1.0 / 3.0)


def extrapolated_psiprime0(m: DeformationMap) -> float:
    """``psi'(0)`` by quadratic extrapolation of ``psi/z`` from the first nodes."""
    pos = np.nonzero(m.z > 0.0)[0][:3]
    zz = m.z[pos]
    ratio = m.psi[pos] / zz
    coef = np.polyfit(zz**2, ratio, len(zz) - 1)
    return float(np.polyval(coef, 0.0))


def mass_quadrature(r, delta, slopes) -> float:
    """``int 4 pi r**2 delta dr`` over a Hermite interpolant of ``delta``.

    Three-point Gauss-Legendre per interval integrates the quintic
    integrand exactly.
    """
    spl = CubicHermiteSpline(r, delta, slopes)
    g, w = np.polynomial.legendre.leggauss(3)
    a, b = r[:-1, None], r[1:, None]
    x = 0.5 * (b - a) * g[None, :] + 0.5 * (a + b)
    vals = 4.0 * math.pi * x**2 * spl(x)
    return float(np.sum(0.5 * (b - a)[:, 0] * (vals @ w)))


def lagrangian_radius(mass: float, K: float = 1.0) -> float:
    """``Z = (3 M/(4 pi K))**(1/3)``."""
    return (3.0 * mass / (4.0 * math.pi * K)) ** (1.0 / 3.0)


def profile_mass(profile) -> float:
    """Total mass of a static or self-similar profile by quadrature.

    The exact identity ``M = (4 pi/3) R**3 eta(R)`` is an independent check.
    """
    r, delta, eta, R, dc = _unpack(profile)
    r, delta, eta = _with_center(r, delta, eta, dc)
    pos = delta[1:] > 0.0
    rr, dl, et = r[1:][pos], delta[1:][pos], eta[1:][pos]
    if hasattr(profile, "delta0"):
        from .homologous import profile_rhs

        dd_pos, _ = profile_rhs(profile.params, rr, dl, et)
    else:
        from .static_ball import static_rhs

        dd_pos, _ = static_rhs(profile.material, profile.center, rr, dl, et)
    # the slope is unbounded where the density vanishes; use the secant there
    dd = np.diff(delta) / np.diff(r)
    dd[pos] = dd_pos
    return mass_quadrature(r, delta, np.concatenate([[0.0], dd]))


def homologous_map(ball, t: float) -> tuple[DeformationMap, np.ndarray]:
    """``psi_t = omega(t) psi_0`` and ``d psi/dt = omegadot(t) psi_0`` at the nodes."""
    m0 = euler_to_lagrange(ball.prof)
    w, wd = ball.traj(t)
    return DeformationMap(m0.z, w * m0.psi, w * m0.psiprime), wd * m0.psi
