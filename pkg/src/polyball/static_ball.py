"""Static self-gravitating polytropic elastic balls.

The equilibrium equations for ``(delta, eta)`` are integrated from a
strongly regular center in the rescaled log radius
``s = log r + (1/2) log(theta delta_c**(2 - gamma))`` with the state
``q = (1 - y**(beta-1))/(beta-1)``, ``L = log(eta/delta_c)`` (see
:mod:`polyball._pykernel`).  In these variables the boundary ``y = y_b`` is
the level set ``q = q_b`` and extinction of the density for ``beta > 1`` is
the regular crossing ``y**(beta-1) = 0``.

Two passes are made.  The existence pass runs to the horizon ``r_max`` and
stops at the boundary; the classification pass continues from the boundary to
``r_classify`` to decide whether the maximal interval is finite (type A) or
not (type B).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .constitutive import InadmissibleMaterial, Material, StrainState, eos_F

#: Rescaled start radius of the series expansion.
R0_RESCALED = 1e-4


@dataclass(frozen=True)
class CenterData:
    """Central density and gravitational coupling."""

    delta_c: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if not (self.delta_c > 0.0 and math.isfinite(self.delta_c)):
            raise ValueError("delta_c must be positive")
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ValueError("theta must be positive")


@dataclass(frozen=True)
class StaticOptions:
    """Solver settings; radii are in rescaled units.

    Attributes
    ----------
    rtol, atol : float
        Integrator tolerances on ``(q, log eta)``.
    r_max : float
        Existence horizon: no boundary before it means no ball.
    r_classify : float
        Horizon of the continuation used for the type A/B verdict.
    delta_floor : float
        Density floor for zero boundary shear with ``beta <= 1``.
    y_converge_tol : float
        Convergence threshold of ``y`` over the last decade for type B.
    max_steps : int
        Step budget per pass.
    max_seconds : float
        Wall-clock budget per pass, ``0`` for none.
    classify : bool
        Run the classification pass.
    """

    rtol: float = 1e-10
    atol: float = 1e-10
    r_max: float = 1e3
    r_classify: float = 1e12
    delta_floor: float = 1e-12
    y_converge_tol: float = 1e-4
    max_steps: int = 1_000_000
    max_seconds: float = 0.0
    classify: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


class SolverError(RuntimeError):
    """The integrator could not continue (step underflow, budget exhausted)."""


@dataclass
class ShearTrajectory:
    """Raw solver output in rescaled variables."""

    s: np.ndarray
    q: np.ndarray
    L: np.ndarray
    status: str


@dataclass
class BallProfile:
    """Radial profile of a static ball.

    Arrays hold the samples from the start radius up to and including the
    boundary (or the horizon when no boundary exists).
    """

    r: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    y: np.ndarray
    F_rad: np.ndarray
    F_tan: np.ndarray
    mass: np.ndarray
    R: float | None
    type_tag: str
    R_max_hint: float
    material: Material
    center: CenterData
    options: StaticOptions
    status: str = "boundary"
    y_inf: float | None = None
    converged: bool | None = None
    warnings: list[str] = field(default_factory=list)
    continuation: ShearTrajectory | None = None
    length_scale: float = 1.0

    @property
    def exists(self) -> bool:
        return self.R is not None

    @property
    def y_P(self) -> float:
        g = self.material.gamma
        return (4.0 - 3.0 * g) / (3.0 * (2.0 - g)) if g != 2.0 else -math.inf

    def sidecar(self) -> dict:
        return {
            "R": self.R,
            "type": self.type_tag,
            "R_max": self.R_max_hint,
            "y_inf": self.y_inf,
            "converged": self.converged,
            "status": self.status,
            "warnings": list(self.warnings),
            "delta_c": self.center.delta_c,
            "theta": self.center.theta,
            "material": self.material.to_dict(),
            "tolerances": self.options.to_dict(),
            "backend": _backend.BACKEND,
        }


# -- change of variables ------------------------------------------------------

def q_of_y(beta: float, y):
    """``q = (1 - y**(beta-1))/(beta-1)``, ``-log y`` at ``beta = 1``."""
    y = np.asarray(y, dtype=float)
    bm1 = beta - 1.0
    if bm1 == 0.0:
        return -np.log(y)
    return -np.expm1(bm1 * np.log(y)) / bm1


def y_of_q(beta: float, q):
    """Inverse of :func:`q_of_y`, with ``y = 0`` past extinction."""
    q = np.asarray(q, dtype=float)
    bm1 = beta - 1.0
    if bm1 == 0.0:
        return np.exp(-q)
    x = -bm1 * q
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(x > -1.0, np.exp(np.log1p(np.where(x > -1.0, x, 0.0)) / bm1), 0.0)
    return y


def boundary_q(mat: Material) -> float:
    """Level ``q_b`` of the boundary ``y = y_b``; ``inf`` when unreachable."""
    base = mat.yb_pow_beta
    bm1 = mat.beta - 1.0
    if base == 0.0:
        return 1.0 / bm1 if bm1 > 0.0 else math.inf
    if bm1 == 0.0:
        return -math.log(base) / mat.beta
    return -math.expm1(bm1 / mat.beta * math.log(base)) / bm1


def length_scale(gamma: float, center: CenterData, delta_ref: float | None = None) -> float:
    """Radius unit ``(theta delta_c**(2-gamma))**(-1/2)``."""
    d = center.delta_c if delta_ref is None else delta_ref
    return (center.theta * d ** (2.0 - gamma)) ** -0.5


def start_state(beta: float, x: float) -> tuple[float, float]:
    """Series values of ``(q, L)`` at ``x = theta delta_c**(2-gamma) r**2``.

    ``delta/delta_c = 1 - x/2`` and ``eta/delta_c = 1 - 3x/10``.
    """
    w0 = 0.2 * x / (1.0 - 0.3 * x)
    bm1 = beta - 1.0
    if bm1 == 0.0:
        q0 = -math.log1p(-w0)
    else:
        q0 = -math.expm1(bm1 * math.log1p(-w0)) / bm1
    return q0, math.log1p(-0.3 * x)


def series_start(c: CenterData, mat: Material, r0: float) -> StrainState:
    """Taylor start of a strongly regular center at radius ``r0``.

    ``delta(r0) = delta_c - theta delta_c**(3-gamma) r0**2 / 2`` and
    ``eta(r0) = delta_c - 3 theta delta_c**(3-gamma) r0**2 / 10``.
    """
    if not r0 > 0.0:
        raise ValueError("r0 must be positive")
    k = c.theta * c.delta_c ** (3.0 - mat.gamma) * r0 * r0
    return StrainState(c.delta_c - 0.5 * k, c.delta_c - 0.3 * k)


def profile_arrays(mat: Material, center: CenterData, s, q, L, scale, delta_ref=None):
    """Physical ``(r, delta, eta, y, F_rad, F_tan, mass)`` from rescaled rows."""
    dref = center.delta_c if delta_ref is None else delta_ref
    s = np.asarray(s)
    r = scale * np.exp(s)
    y = y_of_q(mat.beta, q)
    eta = dref * np.exp(np.asarray(L))
    delta = y * eta
    with np.errstate(divide="ignore", invalid="ignore"):
        fr, ft = _eos_safe(mat, delta, eta)
    mass = (4.0 * math.pi / 3.0) * eta * r**3
    return r, delta, eta, y, fr, ft, mass


def _eos_safe(mat, delta, eta):
    # zero density only at an extinction sample
    pos = delta > 0.0
    fr = np.zeros_like(delta)
    ft = np.zeros_like(delta)
    if np.any(pos):
        a, b = eos_F(mat, StrainState(delta[pos], eta[pos]))
        fr[pos] = a
        ft[pos] = b
    if np.any(~pos):
        e = eta[~pos]
        g = mat.gamma
        # limits y -> 0 with beta > 0
        fr[~pos] = 3.0 * mat.kappa * mat.c * (0.0 - mat.yb_pow_beta) / mat.beta * e**g
        q0 = 1.5 * g * mat.c / mat.beta - 0.5
        ft[~pos] = fr[~pos] + 3.0 * mat.kappa * q0 * e**g
    return fr, ft


# -- solver ---------------------------------------------------------------------

def _run(mat, arel, s0, q0, L0, s_end, q_b, detect, stop, log_floor, opts, h0=0.0):
    return _backend.shear_flow(mat.beta, mat.gamma, arel, s0, q0, L0, s_end, q_b,
                               detect, stop, log_floor, opts.rtol, opts.atol, h0,
                               int(opts.max_steps), float(opts.max_seconds))


def integrate_rescaled(mat: Material, opts: StaticOptions, arel: float = 0.0,
                       x_factor: float = 1.0):
    """Existence and classification passes in rescaled variables.

    Parameters
    ----------
    arel : float
        Relative homologous constant ``alpha / delta_c`` (0 for static).
    x_factor : float
        Multiplies the quadratic series coefficient (``1 + arel`` for the
        homologous profile).

    Returns
    -------
    dict
        Keys ``rows`` (existence pass), ``status``, ``boundary_index``,
        ``cont`` (classification rows or None), ``cont_status``.
    """
    s0 = math.log(R0_RESCALED)
    x0 = R0_RESCALED**2 * x_factor
    q0, L0 = start_state(mat.beta, x0)
    q_b = boundary_q(mat)
    log_floor = -math.inf
    if mat.zero_shear and mat.beta <= 1.0:
        log_floor = math.log(opts.delta_floor)
    status, rows, bidx, h = _run(mat, arel, s0, q0, L0, math.log(opts.r_max), q_b,
                                 True, True, log_floor, opts)
    out = {"rows": rows, "status": status, "boundary_index": bidx, "cont": None,
           "cont_status": None, "q_b": q_b}
    if status == _backend.FLOOR:
        # zero boundary shear with beta <= 1: the floor stands in for delta = 0
        out["boundary_index"] = len(rows) - 1
        out["cont_status"] = _backend.FLOOR
        out["cont"] = rows[-1:]
        return out
    if bidx < 0 or not opts.classify:
        return out
    if mat.zero_shear and mat.beta > 1.0:
        # the boundary is the extinction point itself
        out["cont_status"] = _backend.EXTINCT
        out["cont"] = rows[bidx:bidx + 1]
        return out
    sb, qb, Lb = rows[bidx]
    cstatus, crows, _, _ = _run(mat, arel, sb, qb, Lb, math.log(opts.r_classify), math.inf,
                                False, False, -math.inf, opts, h0=h)
    out["cont"] = crows
    out["cont_status"] = cstatus
    return out


def integrate_static(c: CenterData, mat: Material, opts: StaticOptions | None = None
                     ) -> BallProfile:
    """Integrate a static ball from a strongly regular center.

    Parameters
    ----------
    c : CenterData
        Central density and coupling.
    mat : Material
        Admissible material.
    opts : StaticOptions, optional
        Tolerances and horizons.

    Returns
    -------
    BallProfile
        ``type_tag`` is ``"A"``, ``"B"`` or ``"none"`` (no boundary before
        ``r_max``).

    Raises
    ------
    InadmissibleMaterial
        If ``beta`` exceeds the admissibility bound.
    SolverError
        On step-size underflow or an exhausted step budget; the message
        carries the last good radius.
    """
    if not mat.admissible:
        raise InadmissibleMaterial("material violates the admissibility bound")
    opts = StaticOptions() if opts is None else opts
    res = integrate_rescaled(mat, opts)
    return _assemble(mat, c, opts, res)


def _assemble(mat, c, opts, res, scale=None, delta_ref=None):
    scale = length_scale(mat.gamma, c) if scale is None else scale
    rows = res["rows"]
    status = res["status"]
    bidx = res["boundary_index"]
    name = _backend.STATUS_NAMES.get(status, str(status))
    if status in (_backend.UNDERFLOW, _backend.MAX_STEPS):
        raise SolverError(f"integration stopped ({name}) at r={scale * math.exp(rows[-1, 0])!r}")
    end = bidx + 1 if bidx >= 0 else len(rows)
    arrs = profile_arrays(mat, c, rows[:end, 0], rows[:end, 1], rows[:end, 2], scale, delta_ref)
    prof = BallProfile(*arrs, R=None, type_tag="none", R_max_hint=scale * opts.r_max,
                       material=mat, center=c, options=opts, status=name, length_scale=scale)
    if status == _backend.TIMEOUT:
        prof.warnings.append("timeout")
        return prof
    if bidx < 0:
        if status == _backend.EXTINCT:
            prof.warnings.append("density vanished before the boundary")
        return prof
    prof.R = float(arrs[0][-1])
    classify_from(prof, res, scale)
    return prof


def classify_from(prof: BallProfile, res: dict, scale: float) -> None:
    cstatus = res["cont_status"]
    crows = res["cont"]
    mat = prof.material
    if cstatus is None:
        prof.type_tag = "none" if prof.R is None else "unclassified"
        return
    prof.continuation = ShearTrajectory(crows[:, 0], crows[:, 1], crows[:, 2],
                                        _backend.STATUS_NAMES.get(cstatus, str(cstatus)))
    if cstatus == _backend.EXTINCT:
        prof.type_tag = "A"
        prof.R_max_hint = float(scale * math.exp(crows[-1, 0]))
        prof.y_inf = 0.0
        prof.converged = True
        return
    if cstatus == _backend.FLOOR:
        prof.type_tag = "B"
        prof.R_max_hint = math.inf
        prof.warnings.append("boundary located at the density floor")
        return
    if cstatus == _backend.HORIZON:
        prof.type_tag = "B"
        prof.R_max_hint = math.inf
        s = crows[:, 0]
        y = y_of_q(mat.beta, crows[:, 1])
        prof.y_inf = float(y[-1])
        k = int(np.searchsorted(s, s[-1] - math.log(10.0)))
        drift = abs(float(y[-1] - y[min(k, len(y) - 1)]))
        prof.converged = drift < prof.options.y_converge_tol
        if not prof.converged:
            prof.warnings.append("inconclusive: y not converged at the classification horizon")
        return
    prof.type_tag = "B"
    prof.R_max_hint = math.inf
    prof.converged = False
    prof.warnings.append(f"inconclusive: classification pass ended with "
                         f"{_backend.STATUS_NAMES.get(cstatus, cstatus)}")


def classify_type(profile: BallProfile, mat: Material | None = None) -> str:
    """Type of a ball: ``"A"`` for a finite maximal interval, else ``"B"``.

    Raises
    ------
    ValueError
        If the profile has no boundary.
    """
    if profile.R is None:
        raise ValueError("profile has no boundary")
    if profile.type_tag not in ("A", "B"):
        raise ValueError(f"profile was not classified ({profile.type_tag})")
    return profile.type_tag


def static_rhs(mat: Material, center: CenterData, r, delta, eta):
    """Right-hand side ``(delta', eta')`` of the equilibrium equations in ``r``.

    ``delta' = y**(1-beta) (3 (beta-gamma) B(y) eta / r - theta r eta**(2-gamma) delta)``
    and ``eta' = -3 (eta - delta)/r``.
    """
    from .constitutive import B_func

    y = delta / eta
    bb = np.asarray(B_func(mat, y))
    dd = y ** (1.0 - mat.beta) * (3.0 * (mat.beta - mat.gamma) * bb * eta / r
                                  - center.theta * r * eta ** (2.0 - mat.gamma) * delta)
    de = -3.0 * (eta - delta) / r
    return dd, de


def hydrostatic_residual(profile: BallProfile) -> np.ndarray:
    """Relative residual of radial force balance at the interior samples.

    ``F_rad' - 2 (F_tan - F_rad)/r + 3 theta kappa c r eta delta`` with
    ``F_rad'`` from the chain rule and the equilibrium equations, scaled by
    the sup norm of the terms along the profile.
    """
    from .constitutive import coeff_a

    mat, c = profile.material, profile.center
    inside = profile.delta > 0.0
    r, d, e = profile.r[inside], profile.delta[inside], profile.eta[inside]
    fr, ft = profile.F_rad[inside], profile.F_tan[inside]
    dd, de = static_rhs(mat, c, r, d, e)
    y = d / e
    a = np.asarray(coeff_a(mat, StrainState(d, e)))
    # dF_rad/deta at fixed delta
    fe = 3.0 * mat.kappa * mat.c * (mat.gamma * (y**mat.beta - mat.yb_pow_beta) / mat.beta
                                    - y**mat.beta) * e ** (mat.gamma - 1.0)
    lhs = a * dd + fe * de
    grav = 3.0 * c.theta * mat.kappa * mat.c * r * e * d
    rhs = 2.0 * (ft - fr) / r - grav
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(grav)))
    return np.abs(lhs - rhs) / scale
