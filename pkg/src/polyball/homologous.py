"""Homologous motions of balls with ``gamma = 4/3``.

Under the ansatz ``rho = K omega(t)**-3 delta0(r/omega)`` with velocity
``u = (omega'/omega) r`` the field equations separate into the scale-factor
equation ``omega**2 omega'' = c_omega alpha`` and a profile system in
``z = r/omega`` which is the static system with the gravity factor
``eta0**(2/3)`` replaced by ``eta0**(-1/3) (eta0 + alpha)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import _backend
from .constitutive import B_func, Material
from .static_ball import (CenterData, ShearTrajectory, SolverError, StaticOptions,
                          integrate_rescaled, length_scale, profile_arrays, y_of_q)

GAMMA_HOM = 4.0 / 3.0
#: Collapse event threshold on omega.
OMEGA_EPS = 1e-8


class NoSignChange(ValueError):
    """The existence predicate does not change across the bracket."""


@dataclass(frozen=True)
class HomologousParams:
    """Separation constant, material and central profile value.

    ``c_omega = 3 theta (1 - nu)/(1 + nu)`` is derived from the material and
    the coupling ``theta``.
    """

    alpha: float
    mat: Material
    delta0_c: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if self.mat.gamma != GAMMA_HOM:
            raise ValueError("homologous motions require gamma = 4/3")
        if self.alpha == 0.0 or not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite and nonzero")
        if not self.delta0_c > 0.0:
            raise ValueError("delta0_c must be positive")
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")

    @property
    def c_omega(self) -> float:
        return 3.0 * self.theta * self.mat.c

    @property
    def center(self) -> CenterData:
        return CenterData(self.delta0_c, self.theta)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "delta0_c": self.delta0_c, "theta": self.theta,
                "c_omega": self.c_omega, "material": self.mat.to_dict()}


@dataclass
class OmegaTrajectory:
    t: np.ndarray
    omega: np.ndarray
    omegadot: np.ndarray
    collapse_time: float | None
    c_omega: float
    alpha: float
    dense: object = None
    warnings: list = field(default_factory=list)

    def energy(self) -> np.ndarray:
        """``omegadot**2/2 + c alpha/omega``; constant ``c alpha`` in exact arithmetic."""
        return 0.5 * self.omegadot**2 + self.c_omega * self.alpha / self.omega

    def energy_drift(self) -> float:
        """Max deviation of the energy integral relative to the size of its terms."""
        ca = self.c_omega * self.alpha
        size = np.maximum.reduce([np.full_like(self.omega, abs(ca)), 0.5 * self.omegadot**2,
                                  np.abs(ca / self.omega)])
        return float(np.max(np.abs(self.energy() - ca) / size))

    def __call__(self, t):
        """``(omega, omegadot)`` at times inside the integrated range."""
        z = self.dense(t)
        return z[0], z[1]


def collapse_time_quadrature(c_omega: float, alpha: float) -> float:
    """``T = int_0^1 d omega / sqrt(2 c |alpha| (1/omega - 1))`` by Gauss-Jacobi quadrature."""
    if alpha >= 0.0:
        raise ValueError("collapse needs alpha < 0")
    val, _ = quad(lambda w: 1.0, 0.0, 1.0, weight="alg", wvar=(0.5, -0.5), epsabs=1e-15,
                  epsrel=1e-14)
    return val / math.sqrt(2.0 * c_omega * abs(alpha))


def solve_omega(p: HomologousParams, t_end: float, rtol: float = 1e-12,
                atol: float = 1e-14) -> OmegaTrajectory:
    """Integrate ``omega**2 omega'' = c_omega alpha`` from ``(1, 0)``.

    For ``alpha < 0`` the run stops at ``omega = OMEGA_EPS`` and the collapse
    time is extrapolated with the local law
    ``omega ~ (3/2 sqrt(2 c |alpha|) (T - t))**(2/3)``.
    """
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")
    ca = p.c_omega * p.alpha

    def rhs(t, z):
        return [z[1], ca / (z[0] * z[0])]

    def hit(t, z):
        return z[0] - OMEGA_EPS

    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (0.0, t_end), [1.0, 0.0], method="DOP853", rtol=rtol, atol=atol,
                    events=hit if p.alpha < 0 else None, dense_output=True)
    T = None
    warn = []
    if p.alpha < 0:
        if sol.status == 1:
            e = sol.y[0, -1]
            T = float(sol.t[-1] + (2.0 / 3.0) * e**1.5 / math.sqrt(2.0 * abs(ca)))
        else:
            warn.append("t_end reached before collapse")
            warnings.warn("t_end reached before collapse", RuntimeWarning, stacklevel=2)
    return OmegaTrajectory(sol.t, sol.y[0], sol.y[1], T, p.c_omega, p.alpha, sol.sol, warn)


@dataclass
class SelfSimilarProfile:
    z: np.ndarray
    delta0: np.ndarray
    eta0: np.ndarray
    y0: np.ndarray
    F_rad: np.ndarray
    F_tan: np.ndarray
    Z: float | None
    Z_max_hint: float
    params: HomologousParams
    status: str
    warnings: list = field(default_factory=list)
    continuation: ShearTrajectory | None = None

    @property
    def exists(self) -> bool:
        return self.Z is not None

    def slopes(self) -> tuple[np.ndarray, np.ndarray]:
        """Profile slopes at the samples.

        Where ``delta0 = 0`` (zero boundary shear) the slope is unbounded
        and the secant of the adjacent interval is used instead.
        """
        dd, de = profile_rhs(self.params, self.z, self.delta0, self.eta0)
        bad = ~np.isfinite(dd)
        if np.any(bad):
            sec = np.diff(self.delta0) / np.diff(self.z)
            idx = np.nonzero(bad)[0]
            dd = dd.copy()
            dd[idx] = sec[np.clip(idx - 1, 0, len(sec) - 1)]
        return dd, de

    def interpolant(self):
        """Cubic Hermite interpolants of ``delta0`` and ``eta0`` on ``[0, z_end]``."""
        dc = self.params.delta0_c
        z = np.concatenate([[0.0], self.z])
        d = np.concatenate([[dc], self.delta0])
        e = np.concatenate([[dc], self.eta0])
        dd, de = self.slopes()
        return (CubicHermiteSpline(z, d, np.concatenate([[0.0], dd])),
                CubicHermiteSpline(z, e, np.concatenate([[0.0], de])))

    def sidecar(self, T: float | None = None) -> dict:
        return {"alpha": self.params.alpha, "Z": self.Z, "Z_max_hint": self.Z_max_hint,
                "T": T, "material": self.params.mat.to_dict(), "theta": self.params.theta,
                "delta0_c": self.params.delta0_c, "status": self.status,
                "warnings": list(self.warnings)}


def profile_rhs(p: HomologousParams, z, delta, eta):
    """``(delta0', eta0')`` of the homologous profile system (``nan`` where ``delta0 = 0``)."""
    mat = p.mat
    z = np.asarray(z, dtype=float)
    delta = np.asarray(delta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    y = delta / eta
    pos = y > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        bb = np.asarray(B_func(mat, np.where(pos, y, 1.0)))
        dd = y ** (1.0 - mat.beta) * (3.0 * (mat.beta - GAMMA_HOM) * bb * eta / z
                                      - p.theta * z * eta ** (-1.0 / 3.0) * delta * (eta + p.alpha))
    # delta0 = 0 is a singular point of the profile system
    dd = np.where(pos, dd, np.nan)
    de = -3.0 * (eta - delta) / z
    return dd, de


def integrate_profile(p: HomologousParams, opts: StaticOptions | None = None
                      ) -> SelfSimilarProfile:
    """Integrate the self-similar profile from its regular center.

    The boundary is the first ``z`` with ``y0 = y_b``.  The continuation past
    it runs to extinction (finite ``Z_max_hint``) or to the classification
    horizon.
    """
    opts = StaticOptions() if opts is None else opts
    mat = p.mat
    arel = p.alpha / p.delta0_c
    res = integrate_rescaled(mat, opts, arel=arel, x_factor=1.0 + arel)
    center = p.center
    scale = length_scale(GAMMA_HOM, center)
    rows, status, bidx = res["rows"], res["status"], res["boundary_index"]
    name = _backend.STATUS_NAMES.get(status, str(status))
    if status in (_backend.UNDERFLOW, _backend.MAX_STEPS):
        raise SolverError(f"integration stopped ({name}) at z={scale * math.exp(rows[-1, 0])!r}")
    end = bidx + 1 if bidx >= 0 else len(rows)
    z, d, e, y, fr, ft, _ = profile_arrays(mat, center, rows[:end, 0], rows[:end, 1],
                                           rows[:end, 2], scale)
    prof = SelfSimilarProfile(z, d, e, y, fr, ft, None, scale * opts.r_max, p, name)
    if bidx < 0:
        if status == _backend.EXTINCT:
            prof.warnings.append("density vanished before the boundary")
            prof.Z_max_hint = float(z[-1])
        return prof
    prof.Z = float(z[-1])
    cst, crows = res["cont_status"], res["cont"]
    if cst is not None:
        prof.continuation = ShearTrajectory(crows[:, 0], crows[:, 1], crows[:, 2],
                                            _backend.STATUS_NAMES.get(cst, str(cst)))
        if cst == _backend.EXTINCT:
            prof.Z_max_hint = float(scale * math.exp(crows[-1, 0]))
        elif cst == _backend.FLOOR:
            prof.Z_max_hint = float(z[-1])
        else:
            prof.Z_max_hint = math.inf
    return prof


def continuation_y(prof: SelfSimilarProfile) -> tuple[np.ndarray, np.ndarray]:
    """``(z, y0)`` along the continuation beyond the boundary."""
    if prof.continuation is None:
        return np.empty(0), np.empty(0)
    scale = length_scale(GAMMA_HOM, prof.params.center)
    c = prof.continuation
    return scale * np.exp(c.s), y_of_q(prof.params.mat.beta, c.q)


def decay_constant(prof: SelfSimilarProfile) -> float:
    """Smallest ``-delta0' / (alpha z delta0**(2-beta))`` over the profile.

    A positive value is the numeric counterpart of the decay bound
    ``delta0' <= -c alpha z delta0**(2-beta)`` for ``alpha > 0``.
    """
    dd, _ = prof.slopes()
    b = prof.params.mat.beta
    ok = prof.delta0 > 0.0
    ratio = -dd[ok] / (prof.params.alpha * prof.z[ok] * prof.delta0[ok] ** (2.0 - b))
    return float(np.min(ratio))


@dataclass
class HomologousBall:
    """Time-dependent ball assembled from ``omega(t)`` and the profile."""

    traj: OmegaTrajectory
    prof: SelfSimilarProfile
    kappa_K: float = 1.0

    def __post_init__(self):
        if self.prof.Z is None:
            raise ValueError("profile has no boundary")
        self._d, self._e = self.prof.interpolant()

    def omega(self, t):
        return self.traj(t)[0]

    def R(self, t):
        return self.prof.Z * self.omega(t)

    def Rdot(self, t):
        return self.prof.Z * self.traj(t)[1]

    def _z(self, t, r):
        w = self.omega(t)
        r = np.asarray(r, dtype=float)
        return r / w, w

    def rho(self, t, r):
        z, w = self._z(t, r)
        inside = (z >= 0.0) & (z <= self.prof.Z)
        return np.where(inside, self.kappa_K * w**-3 * self._d(np.clip(z, 0.0, self.prof.Z)), 0.0)

    def u(self, t, r):
        w, wd = self.traj(t)
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.prof.Z * w, wd / w * r, 0.0)

    def pressures(self, t, r):
        """``(p_rad, p_tan)`` scaling as ``omega**-4``; zero outside the ball."""
        from .constitutive import StrainState, eos_F

        z, w = self._z(t, r)
        inside = (z >= 0.0) & (z <= self.prof.Z)
        zc = np.clip(z, 0.0, self.prof.Z)
        fr, ft = eos_F(self.prof.params.mat, StrainState(self._d(zc), self._e(zc)))
        return (np.where(inside, w**-4 * np.asarray(fr), 0.0),
                np.where(inside, w**-4 * np.asarray(ft), 0.0))

    def central_density(self, t):
        return self.kappa_K * self.prof.params.delta0_c / self.omega(t) ** 3

    def mass(self, t, n: int = 4001) -> float:
        """Total mass by Simpson quadrature of ``4 pi r**2 rho``."""
        from scipy.integrate import simpson

        r = np.linspace(0.0, float(self.R(t)), n)
        return float(simpson(4.0 * math.pi * r**2 * self.rho(t, r), x=r))

    def continuity_residual(self, t, r, h: float = 1e-5) -> np.ndarray:
        """``rho_t + r**-2 (r**2 rho u)_r`` by central differences, relative to ``|rho_t|``."""
        t = float(t)
        r = np.asarray(r, dtype=float)
        rt = (self.rho(t + h, r) - self.rho(t - h, r)) / (2 * h)
        hr = h * max(1.0, float(np.max(r)))

        def flux(rr):
            return rr**2 * self.rho(t, rr) * self.u(t, rr)

        div = (flux(r + hr) - flux(r - hr)) / (2 * hr) / r**2
        size = np.maximum(np.abs(rt), np.abs(div))
        return np.abs(rt + div) / np.where(size > 0, size, 1.0)


def assemble_solution(traj: OmegaTrajectory, prof: SelfSimilarProfile) -> HomologousBall:
    return HomologousBall(traj, prof)


def zero_shear_beta(nu: float) -> float:
    """``beta = 4 (1 - nu)/(1 + nu)``, the exponent giving ``y_b = 0`` at ``gamma = 4/3``."""
    return 4.0 * (1.0 - nu) / (1.0 + nu)


def exists_at(alpha: float, nu: float, delta0_c: float, beta: float | None = None,
              theta: float = 1.0, opts: StaticOptions | None = None) -> bool:
    """Existence predicate: a boundary within the horizon."""
    b = zero_shear_beta(nu) if beta is None else beta
    mat = Material(nu, GAMMA_HOM, b)
    opts = StaticOptions(classify=False) if opts is None else opts
    return integrate_profile(HomologousParams(alpha, mat, delta0_c, theta), opts).exists


def find_threshold(alpha: float, nu: float, beta: float | None = None,
                   bracket: tuple[float, float] | None = None, rel_width: float = 1e-3,
                   theta: float = 1.0, opts: StaticOptions | None = None) -> float:
    """Smallest ``delta0_c`` admitting a ball, by geometric bisection.

    Parameters
    ----------
    alpha : float
        Negative separation constant.
    bracket : (lo, hi), optional
        ``delta0_c`` values with no ball at ``lo`` and a ball at ``hi``.
        Defaults to ``(|alpha|, 1e3 |alpha|)``.

    Raises
    ------
    NoSignChange
        If the predicate has the same value at both ends.
    """
    if alpha >= 0.0:
        raise ValueError("thresholds are defined for alpha < 0")
    lo, hi = bracket if bracket is not None else (abs(alpha), 1e3 * abs(alpha))
    if not 0.0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def ok(d):
        return exists_at(alpha, nu, d, beta, theta, opts)

    if ok(lo) or not ok(hi):
        raise NoSignChange(f"existence does not switch on [{lo}, {hi}]")
    while hi / lo - 1.0 > rel_width:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
