"""Autonomous phase-plane form of the static equations.

With ``y = delta/eta``, ``v = theta r**2 eta**(2-gamma) y**(1-beta)`` and
``xi = log r`` the equilibrium equations become::

    dy/dxi = (Upsilon(y) - v) y
    dv/dxi = ((1 - beta)(Upsilon(y) - v) + 2 - 3 (2 - gamma)(1 - y)) v
    Upsilon(y) = 3 (1 - y) + 3 (beta - gamma) B(y) y**(-beta)

Strongly regular centers correspond to the single orbit ``Gamma`` leaving the
saddle ``O = (y=1, v=0)`` along its unstable direction, on which
``v ~ C exp(2 xi)`` and ``1 - y ~ v/5`` with ``C = theta delta_c**(2-gamma)``.
Vectors and points are written in ``(y, v)`` order throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from scipy.special import expit

from .constitutive import B_SERIES_EPS, Material, _b_series, powm1_over

#: Amplitude ``C exp(2 xi0)`` of the seed on the unstable manifold of O.
SEED_AMPLITUDE = 1e-8

#: ``log v`` beyond which an orbit counts as escaped (``v`` stays O(1) near P and Q).
LOG_V_MAX = 20.0


class UnsupportedParameters(ValueError):
    """The requested analysis is not defined for these parameters."""


@dataclass(frozen=True)
class PhaseState:
    y: float
    v: float
    xi: float = 0.0


@dataclass
class FixedPointRecord:
    name: str
    y: float
    v: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    classification: str
    residual: float
    jacobian: np.ndarray
    jacobian_fd: np.ndarray

    def to_dict(self) -> dict:
        ev = self.eigenvalues
        return {
            "name": self.name,
            "y": self.y,
            "v": self.v,
            "eigenvalues": [[float(np.real(z)), float(np.imag(z))] for z in ev],
            "eigenvectors": [[[float(np.real(z)), float(np.imag(z))] for z in col]
                             for col in self.eigenvectors.T],
            "classification": self.classification,
            "residual": self.residual,
        }


@dataclass
class PhaseOrbit:
    xi: np.ndarray
    y: np.ndarray
    v: np.ndarray
    C: float
    status: str
    exit_location: tuple[float, float, float] | None = None
    fixed_points: list[FixedPointRecord] = field(default_factory=list)
    invariance_violations: int = 0
    dense: object = None

    def omega_limit(self) -> dict:
        """Empirical diagnostics of the forward limit."""
        out = {"status": self.status, "y_end": float(self.y[-1]), "v_end": float(self.v[-1])}
        for fp in self.fixed_points:
            out[f"distance_to_{fp.name}"] = float(math.hypot(self.y[-1] - fp.y, self.v[-1] - fp.v))
        return out


def y_P(gamma: float) -> float:
    """Shear of the interior fixed point ``(4 - 3 gamma)/(3 (2 - gamma))``."""
    if gamma == 2.0:
        raise UnsupportedParameters("gamma = 2 has no interior fixed point")
    return (4.0 - 3.0 * gamma) / (3.0 * (2.0 - gamma))


def _b_over_ybeta(mat: Material, y):
    # B(y) y**(-beta) = ((y - 1) - (y**(1-beta) - 1)/(1-beta)) / beta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = powm1_over(1.0 - mat.beta, y, mat.eps_branch)
        return ((y - 1.0) - e) / mat.beta


def upsilon(mat: Material, y):
    """``Upsilon(y)``; ``y = 0`` is allowed for ``beta < 1``."""
    ya = np.asarray(y, dtype=float)
    if np.any(ya < 0.0) or np.any(ya == 0.0) and not mat.beta < 1.0:
        raise ValueError("y must be positive")
    out = 3.0 * (1.0 - ya) + 3.0 * (mat.beta - mat.gamma) * _b_over_ybeta(mat, ya)
    return float(out) if out.ndim == 0 else out


def upsilon_prime(mat: Material, y):
    ya = np.asarray(y, dtype=float)
    out = -3.0 + 3.0 * (mat.beta - mat.gamma) * (1.0 - ya ** (-mat.beta)) / mat.beta
    return float(out) if out.ndim == 0 else out


def vector_field(mat: Material, s: PhaseState) -> tuple[float, float]:
    """``(dy/dxi, dv/dxi)`` at a phase state."""
    return _field(mat, s.y, s.v)


def _field(mat, y, v):
    u = upsilon(mat, y)
    dy = (u - v) * y
    dv = ((1.0 - mat.beta) * (u - v) + 2.0 - 3.0 * (2.0 - mat.gamma) * (1.0 - y)) * v
    return dy, dv


def jacobian(mat: Material, y: float, v: float) -> np.ndarray:
    """Analytic Jacobian of the vector field in ``(y, v)`` order."""
    b, g = mat.beta, mat.gamma
    u = upsilon(mat, y)
    if y == 0.0 and b < 1.0:
        uy_y = 0.0
    else:
        uy_y = upsilon_prime(mat, y) * y
    j11 = uy_y + u - v
    j12 = -y
    if y == 0.0 and b < 1.0:
        j21 = 3.0 * (2.0 - g) * v if v == 0.0 else math.nan
    else:
        j21 = ((1.0 - b) * upsilon_prime(mat, y) + 3.0 * (2.0 - g)) * v
    j22 = (1.0 - b) * (u - v) + 2.0 - 3.0 * (2.0 - g) * (1.0 - y) - (1.0 - b) * v
    return np.array([[j11, j12], [j21, j22]])


def jacobian_fd(mat: Material, y: float, v: float, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian (one-sided in ``y`` at ``y = 0``)."""
    J = np.empty((2, 2))
    if y == 0.0:
        # f(0, v) = 0 exactly, so a tiny forward step has no cancellation;
        # the y**(1-beta) correction then stays below 1e-9
        hy = max(1e-300, min(h, 1e-9 ** (1.0 / max(1.0 - mat.beta, 1e-3))))
        J[:, 0] = (np.array(_field(mat, hy, v)) - np.array(_field(mat, 0.0, v))) / hy
    elif y > h:
        fp = np.array(_field(mat, y + h, v))
        fm = np.array(_field(mat, y - h, v))
        J[:, 0] = (fp - fm) / (2 * h)
    else:
        f0 = np.array(_field(mat, y, v))
        f1 = np.array(_field(mat, y + h, v))
        f2 = np.array(_field(mat, y + 2 * h, v))
        J[:, 0] = (-3 * f0 + 4 * f1 - f2) / (2 * h)
    fp = np.array(_field(mat, y, v + h))
    fm = np.array(_field(mat, y, v - h))
    J[:, 1] = (fp - fm) / (2 * h)
    return J


def _classify(ev: np.ndarray) -> str:
    re = np.real(ev)
    spiral = bool(np.any(np.abs(np.imag(ev)) > 0))
    if np.any(np.abs(re) < 1e-12):
        return "center" if spiral else "non-hyperbolic"
    if np.all(re < 0):
        return "stable focus" if spiral else "stable node"
    if np.all(re > 0):
        return "unstable focus" if spiral else "unstable node"
    return "saddle"


def _record(mat, name, y, v):
    J = jacobian(mat, y, v)
    Jfd = jacobian_fd(mat, y, v)
    ev, vec = np.linalg.eig(J)
    order = np.argsort(-np.real(ev))
    ev, vec = ev[order], vec[:, order]
    res = float(np.hypot(*_field(mat, y, v)))
    return FixedPointRecord(name, y, v, ev, vec, _classify(ev), res, J, Jfd)


def unstable_direction_O(mat: Material) -> np.ndarray:
    """Unit eigenvector of eigenvalue 2 at O pointing into ``v > 0``.

    The Jacobian at O is ``[[-3, -1], [0, 2]]`` for every ``(gamma, beta)``,
    so the direction is ``(-1, 5)/sqrt(26)`` in ``(y, v)``.
    """
    J = jacobian(mat, 1.0, 0.0)
    lam = J[1, 1]
    vec = np.array([-J[0, 1], J[0, 0] - lam])
    vec /= np.linalg.norm(vec)
    return vec if vec[1] > 0 else -vec


def fixed_points(mat: Material) -> list[FixedPointRecord]:
    """Fixed points O, Q (for ``beta < 1``) and P (when ``0 < y_P < 1``).

    Raises
    ------
    UnsupportedParameters
        For ``gamma = 2``.
    """
    if mat.gamma == 2.0:
        raise UnsupportedParameters("gamma = 2: the v chart degenerates")
    out = []
    rec = _record(mat, "O", 1.0, 0.0)
    # the positive eigenvalue is exactly 2 with a rational eigenvector
    k = int(np.argmax(np.real(rec.eigenvalues)))
    rec.eigenvectors[:, k] = unstable_direction_O(mat)
    out.append(rec)
    if mat.beta < 1.0:
        out.append(_record(mat, "Q", 0.0, 0.0))
    yp = y_P(mat.gamma)
    if 0.0 < yp < 1.0:
        out.append(_record(mat, "P", yp, float(upsilon(mat, yp))))
    return out


def seed_coefficients(mat: Material) -> tuple[float, float]:
    """Second-order terms of the unstable manifold of O.

    With ``e = C exp(2 xi)``: ``v = e + a e**2``, ``1 - y = e/5 + b e**2``.
    """
    a = -(8.0 - 2.0 * mat.beta - 3.0 * mat.gamma) / 10.0
    b = (a - (3.0 * (mat.beta - mat.gamma) + 4.0) / 50.0) / 7.0
    return a, b


def track_gamma(mat: Material, C: float, xi_end: float, amplitude: float = SEED_AMPLITUDE,
                rtol: float = 1e-12, atol: float = 1e-14, max_step: float = 0.25) -> PhaseOrbit:
    """Follow the orbit leaving O for the center constant ``C``.

    Parameters
    ----------
    C : float
        ``theta delta_c**(2 - gamma)``.
    xi_end : float
        Final ``log r``.
    amplitude : float
        Seed amplitude ``C exp(2 xi0)``.

    Returns
    -------
    PhaseOrbit
        ``status`` is ``"horizon"`` or ``"exited"``; an orbit exits when
        ``v`` exceeds ``exp(LOG_V_MAX)`` or, for ``beta > 1``, when
        ``y**(beta-1)`` falls below ``1e-12`` (extinction at finite radius).
        ``exit_location = (xi, y, v)`` is the last state.  The state is
        carried as ``logit y`` so the strip ``0 < y < 1`` is invariant by
        construction.
    """
    if C <= 0.0:
        raise ValueError("C must be positive")
    xi0 = 0.5 * math.log(amplitude / C)
    if xi_end <= xi0:
        raise ValueError("xi_end must exceed the seed position")
    a, b = seed_coefficients(mat)
    e = amplitude
    v0 = e + a * e * e
    w0 = 0.2 * e + b * e * e
    if mat.gamma == 2.0:
        return _track_gamma2(mat, C, xi0, xi_end, 1.0 - w0, rtol, atol, max_step)

    b = mat.beta
    # extinction y**(beta-1) -> 0 happens at finite xi only for beta > 1
    ly_min = math.log(1e-12) / (b - 1.0) if b > 1.0 else -math.inf

    # state (logit y, log v, xi) in the time tau with d xi/d tau = 1/(1 + v);
    # the logit resolves both y -> 1 near O and y -> 0, tau regularizes v -> inf
    def rhs(tau, z):
        ell, lv, _ = z
        ly = -math.log1p(math.exp(-ell)) if ell > -30.0 else ell - math.log1p(math.exp(ell))
        w = expit(-ell)
        v = math.exp(lv)
        dv = _upsilon_lw(mat, ly, w) - v
        dlv = (1.0 - b) * dv + 2.0 - 3.0 * (2.0 - mat.gamma) * w
        k = 1.0 / (1.0 + v)
        return [dv / w * k, dlv * k, k]

    def extinct(tau, z):
        ell = z[0]
        return ell - math.log1p(math.exp(ell)) - ly_min

    def blow_up(tau, z):
        return LOG_V_MAX - z[1]

    def horizon(tau, z):
        return xi_end - z[2]

    for ev in (extinct, blow_up, horizon):
        ev.terminal = True
        ev.direction = -1
    # xi advances at least at rate 1/(1 + v_max) before the blow-up event
    tau_end = (xi_end - xi0) * (1.0 + math.exp(LOG_V_MAX))
    ell0 = math.log1p(-w0) - math.log(w0)
    sol = solve_ivp(rhs, (0.0, tau_end), [ell0, math.log(v0), xi0], method="DOP853",
                    rtol=rtol, atol=atol, events=(extinct, blow_up, horizon),
                    dense_output=True, max_step=max_step)
    xi = sol.y[2]
    y = expit(sol.y[0])
    v = np.exp(sol.y[1])
    status = "horizon"
    exit_loc = None
    if sol.status == 1 and not len(sol.t_events[2]):
        status = "exited"
        exit_loc = (float(xi[-1]), float(y[-1]), float(v[-1]))
    bad = int(np.sum(~((y >= 0.0) & (y <= 1.0) & (v > 0.0))))
    taus = sol.t

    def dense(x):
        x = np.asarray(x, dtype=float)
        t = np.interp(x, xi, taus)
        lo = np.interp(x, xi, np.concatenate([taus[:1], taus[:-1]]))
        hi = np.interp(x, xi, np.concatenate([taus[1:], taus[-1:]]))
        # Newton on xi(tau) = x, d xi/d tau = 1/(1 + v)
        for _ in range(8):
            z = sol.sol(t)
            step = (z[2] - x) * (1.0 + np.exp(z[1]))
            t = np.clip(t - step, lo, hi)
            if np.all(np.abs(z[2] - x) <= 1e-15 * np.maximum(1.0, np.abs(x))):
                break
        z = sol.sol(t)
        return expit(z[0]), np.exp(z[1])

    fps = fixed_points(mat)
    return PhaseOrbit(xi, y, v, C, status, exit_loc, fps, bad, dense)


def _upsilon_lw(mat: Material, ly: float, w: float) -> float:
    # Upsilon from log y and w = 1 - y, accurate at both ends of (0, 1)
    b = mat.beta
    if w < B_SERIES_EPS:
        g = _b_series(b, -w) * math.exp(-b * math.log1p(-w))
    else:
        p = 1.0 - b
        e = ly if abs(p) <= mat.eps_branch else math.expm1(p * ly) / p
        g = (-w - e) / b
    return 3.0 * w + 3.0 * (b - mat.gamma) * g


def _track_gamma2(mat, C, xi0, xi_end, y0, rtol, atol, max_step):
    # decoupled shear equation: dy/dxi = (Upsilon(y) - C exp(2 xi) y**(1-beta)) y
    def rhs(xi, z):
        y = z[0]
        if y <= 0.0:
            return [0.0]
        return [(float(upsilon(mat, y)) - C * math.exp(2 * xi) * y ** (1.0 - mat.beta)) * y]

    def hit_zero(xi, z):
        return z[0] - 1e-12

    hit_zero.terminal = True
    hit_zero.direction = -1
    sol = solve_ivp(rhs, (xi0, xi_end), [y0], method="DOP853", rtol=rtol, atol=atol,
                    events=hit_zero, dense_output=True, max_step=max_step)
    y = sol.y[0]
    v = C * np.exp(2 * sol.t) * y ** (1.0 - mat.beta)
    status = "exited" if sol.status == 1 else "horizon"
    exit_loc = (float(sol.t[-1]), float(y[-1]), float(v[-1])) if status == "exited" else None

    def dense(xi):
        yy = sol.sol(xi)[0]
        return yy, C * np.exp(2 * xi) * yy ** (1.0 - mat.beta)

    return PhaseOrbit(sol.t, y, v, C, status, exit_loc, [], int(np.sum(y >= 1.0)), dense)


def static_to_phase(profile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Image ``(xi, y, v)`` of a static profile in the phase plane."""
    mat = profile.material
    theta = profile.center.theta
    mask = profile.delta > 0.0
    r, eta, y = profile.r[mask], profile.eta[mask], profile.y[mask]
    v = theta * r**2 * eta ** (2.0 - mat.gamma) * y ** (1.0 - mat.beta)
    return np.log(r), y, v


def distance_to_orbit(orbit: PhaseOrbit, xi, y, v, window: float = 0.5) -> np.ndarray:
    """Distance from each point to the orbit, searched near ``xi``.

    ``v`` differences are scaled by ``max(1, v)`` so points close to a
    blow-up of ``v`` are compared in relative terms.
    """
    out = np.empty(len(xi))
    lo, hi = orbit.xi[0], orbit.xi[-1]
    for i, (x0, y0, v0) in enumerate(zip(xi, y, v)):
        a, b = max(lo, x0 - window), min(hi, x0 + window)

        sv = max(1.0, abs(v0))

        def d2(x, y0=y0, v0=v0, sv=sv):
            yy, vv = orbit.dense(x)
            return float((yy - y0) ** 2 + ((vv - v0) / sv) ** 2)

        if b <= a:
            out[i] = math.sqrt(d2(min(max(x0, lo), hi)))
            continue
        res = minimize_scalar(d2, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(x0))})
        out[i] = math.sqrt(min(res.fun, d2(min(max(x0, lo), hi))))
    return out


def dulac_divergence_fd(mat: Material, y: float, v: float, h: float = 1e-6) -> float:
    """``div(phi F)`` by central differences with ``phi = y**(beta-2)/v``."""

    def comp(yy, vv):
        phi = yy ** (mat.beta - 2.0) / vv
        f = _field(mat, yy, vv)
        return phi * f[0], phi * f[1]

    return ((comp(y + h, v)[0] - comp(y - h, v)[0]) / (2 * h)
            + (comp(y, v + h)[1] - comp(y, v - h)[1]) / (2 * h))


def dulac_divergence(mat: Material, y: float, v: float) -> float:
    """Closed form ``-3 phi (1 - gamma (1 - y))``."""
    return -3.0 * y ** (mat.beta - 2.0) / v * (1.0 - mat.gamma * (1.0 - y))
