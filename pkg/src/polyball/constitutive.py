"""Polytropic elastic constitutive family and the Saint-Venant Kirchhoff model.

All quantities are nondimensional: densities are normalized by the reference
density so that the natural state is ``delta = eta = 1``, and pressures carry
one factor of the bulk modulus ``kappa``.  Evaluators accept scalars or numpy
arrays and broadcast.

The shorthand ``c = (1 - nu) / (1 + nu)`` is used throughout.
"""

from __future__ import annotations

import abc
import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

#: Half-width of the window around ``beta = 1`` (and ``gamma = 1``) in which
#: the logarithmic branches are used.
EPS_BRANCH = 1e-7
#: Tolerance of all inequality checkers on kappa-normalized quantities.
TOL = 1e-10
#: ``Q`` returns its analytic limit when ``|y - 1|`` is below this.
Y_ONE_EPS = 1e-8
#: |y - 1| below which B(y) is summed as a Taylor series.
B_SERIES_EPS = 1e-3
#: Multiplicative sampling box for "for all (delta, eta)" checks.
SAMPLE_BOX = (1e-3, 1e3)
#: Values of ``1 - beta / (3 gamma c)`` closer to zero than this are zero.
ZERO_SHEAR_EPS = 1e-12


class DomainError(ValueError):
    """Raised when an evaluator receives a non-positive strain argument."""


class InadmissibleMaterial(ValueError):
    """Raised when the material parameters violate the admissibility bound."""


def _positive(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} must be positive and finite")
    return arr


def _out(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr


def powm1_over(p, x, eps=EPS_BRANCH):
    """Evaluate ``(x**p - 1) / p`` stably, with the ``log x`` limit at ``p = 0``.

    Parameters
    ----------
    p : float
        Exponent.
    x : array_like
        Positive base.
    eps : float
        Below this ``|p|`` the logarithmic branch is returned.
    """
    lx = np.log(x)
    if abs(p) <= eps:
        return lx
    return np.expm1(p * lx) / p


@dataclass(frozen=True)
class Material:
    """Parameters of a polytropic elastic material.

    Parameters
    ----------
    nu : float
        Poisson ratio in ``(-1, 1/2]``.
    gamma : float
        Polytropic exponent, positive.
    beta : float
        Shear exponent, nonzero, with ``beta <= 3 gamma c``.
    kappa : float
        Bulk modulus.
    theta : float
        Gravitational coupling in nondimensional units.
    eps_branch : float
        Width of the logarithmic branch windows.
    strict : bool
        Enforce the admissibility bound.  Closed-form evaluators are defined
        without it; solvers and checkers require admissible materials.
    """

    nu: float
    gamma: float
    beta: float
    kappa: float = 1.0
    theta: float = 1.0
    eps_branch: float = EPS_BRANCH
    strict: bool = dataclasses.field(default=True, compare=False, repr=False)

    def __post_init__(self):
        for name in ("nu", "gamma", "beta", "kappa", "theta", "eps_branch"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InadmissibleMaterial(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not -1.0 < self.nu <= 0.5:
            raise InadmissibleMaterial(f"nu={self.nu} outside (-1, 1/2]")
        if self.gamma <= 0.0:
            raise InadmissibleMaterial(f"gamma={self.gamma} must be positive")
        if self.beta == 0.0:
            raise InadmissibleMaterial("beta must be nonzero")
        if self.kappa <= 0.0 or self.theta <= 0.0:
            raise InadmissibleMaterial("kappa and theta must be positive")
        if self.strict and not self.admissible:
            raise InadmissibleMaterial(
                f"beta={self.beta} exceeds the admissibility bound "
                f"beta <= 3 gamma (1 - nu)/(1 + nu) = {self.beta_max!r}"
            )

    @property
    def admissible(self) -> bool:
        return self._raw_base() >= -ZERO_SHEAR_EPS

    def _raw_base(self):
        return 1.0 - self.beta / (3.0 * self.gamma * self.c)

    @property
    def c(self) -> float:
        """Shear ratio ``(1 - nu) / (1 + nu)``."""
        return (1.0 - self.nu) / (1.0 + self.nu)

    @property
    def beta_max(self) -> float:
        return 3.0 * self.gamma * self.c

    @property
    def yb_pow_beta(self) -> float:
        """``y_b**beta``, exactly zero on the zero-boundary-shear line."""
        base = self._raw_base()
        return 0.0 if abs(base) < ZERO_SHEAR_EPS else base

    @property
    def y_b(self) -> float:
        """Boundary shear in ``[0, 1)``."""
        base = self.yb_pow_beta
        if base < 0.0:
            return math.nan
        return 0.0 if base == 0.0 else base ** (1.0 / self.beta)

    @property
    def P_ref(self) -> float:
        """Reference pressure ``kappa / gamma``."""
        return self.kappa / self.gamma

    @property
    def zero_shear(self) -> bool:
        return self.yb_pow_beta == 0.0

    @property
    def beta_is_one(self) -> bool:
        return abs(self.beta - 1.0) <= self.eps_branch

    @property
    def gamma_is_one(self) -> bool:
        return abs(self.gamma - 1.0) <= self.eps_branch

    def replace(self, **changes) -> "Material":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "nu": self.nu,
            "gamma": self.gamma,
            "beta": self.beta,
            "theta": self.theta,
            "y_b": self.y_b,
            "P_ref": self.P_ref,
        }


@dataclass(frozen=True)
class StrainState:
    """Point ``(delta, eta)`` of the Eulerian configuration space."""

    delta: float | np.ndarray
    eta: float | np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta", _out(_positive("delta", self.delta)))
        object.__setattr__(self, "eta", _out(_positive("eta", self.eta)))

    @property
    def y(self):
        return self.delta / self.eta


class ConstitutiveEval(NamedTuple):
    p_rad: float
    p_tan: float
    a: float
    b_times: float
    w: float
    Q: float
    B: float


class ShearFunction(abc.ABC):
    """Scalar shear function ``S(y)`` on ``(0, inf)`` with ``S(1) = S'(1) = 0``."""

    @abc.abstractmethod
    def __call__(self, y): ...

    @abc.abstractmethod
    def derivative(self, y): ...

    def second_derivative(self, y, h=1e-5):
        y = np.asarray(y, dtype=float)
        return _out((self.derivative(y * (1 + h)) - self.derivative(y * (1 - h))) / (2 * h * y))


class PolytropicShear(ShearFunction):
    """The canonical polytropic shear function with its ``beta = 1`` branch."""

    def __init__(self, mat: Material):
        self.mat = mat

    def __call__(self, y):
        return shear_S(self.mat, y)

    def derivative(self, y):
        y = _positive("y", y)
        return _out(f_rad(self.mat, y) / (y * y))

    def second_derivative(self, y):
        y = _positive("y", y)
        m = self.mat
        return _out(m.c * (y ** (m.beta - 3.0) - 2.0 * powm1_over(m.beta, y) / y**3))


def shear_S(mat: Material, y):
    """Polytropic shear function ``S(y)``.

    Uses ``(y**(beta-1) - 1)/(beta-1)`` in expm1 form away from ``beta = 1``
    and the logarithm inside the branch window.
    """
    y = _positive("y", y)
    e = powm1_over(mat.beta - 1.0, y, mat.eps_branch)
    return _out(mat.c * (e + 1.0 / y - 1.0) / mat.beta)


def f_rad(mat: Material, y):
    """Radial shear response ``c (y**beta - 1) / beta``."""
    y = _positive("y", y)
    return _out(mat.c * powm1_over(mat.beta, y, 0.0))


def f_tan_from_S(mat: Material, S: ShearFunction, y):
    """Tangential response of the hyperelastic family generated by ``S``."""
    y = _positive("y", y)
    frad = np.asarray(S.derivative(y)) * y * y
    return _out(frad + 3.0 * (1.0 - mat.gamma) * y * np.asarray(S(y)))


def B_func(mat: Material, y):
    """Shear factor ``B(y) >= 0`` of the anisotropic coefficient."""
    y = _positive("y", y)
    b = mat.beta
    e = powm1_over(b - 1.0, y, mat.eps_branch)
    out = (y**b * (y - 1.0) - y * e) / b
    w = y - 1.0
    near = np.abs(w) < B_SERIES_EPS
    if np.any(near):
        # the closed form cancels to O(w**2); Taylor series about y = 1
        out = np.where(near, _b_series(b, w), out)
    return _out(out)


def _b_series(b, w, order=7):
    # B^(k)(1) = (b-2)(b-3)...(b-k+2) ((k-1) b - 1) for k >= 3, B''(1) = 1
    total = 0.5 * w * w
    coef = 1.0
    term = 0.5 * w * w
    for k in range(3, order + 1):
        if k > 3:
            coef *= b - (k - 2)
        term = term * w / k
        total = total + term * coef * ((k - 1) * b - 1.0)
    return total


def Q_func(mat: Material, y):
    """Baker-Ericksen factor ``Q(y)`` with its removable singularity at 1."""
    y = _positive("y", y)
    b, g, c = mat.beta, mat.gamma, mat.c
    near = np.abs(y - 1.0) < Y_ONE_EPS
    ys = np.where(near, 2.0, y)
    e = powm1_over(b - 1.0, ys, mat.eps_branch)
    q = 1.5 * c * (g / b - (b - g) / b * ys * e / (1.0 - ys)) - 0.5
    return _out(np.where(near, (1.0 - 2.0 * mat.nu) / (1.0 + mat.nu), q))


def Q_limits(mat: Material) -> tuple[float, float]:
    """Limits of ``Q`` as ``y -> 0+`` and ``y -> inf``."""
    b, g, c = mat.beta, mat.gamma, mat.c
    q0 = 1.5 * g * c / b - 0.5 if b > 0.0 else math.inf
    if b < 1.0 - mat.eps_branch:
        qinf = 1.5 * (g - 1.0) * c / (b - 1.0) - 0.5
    else:
        d = (b - g) if not mat.beta_is_one else (1.0 - g)
        if d == 0.0:
            qinf = (1.0 - 2.0 * mat.nu) / (1.0 + mat.nu)
        else:
            qinf = math.copysign(math.inf, d)
    return q0, qinf


def _check_state(s: StrainState):
    return _positive("delta", s.delta), _positive("eta", s.eta)


def _pow_diff(mat: Material, y):
    """``y**beta - y_b**beta`` without cancellation near ``y = y_b``."""
    yb = mat.y_b
    if not yb > 0.0:
        return y**mat.beta - mat.yb_pow_beta
    with np.errstate(divide="ignore", over="ignore"):
        return mat.yb_pow_beta * np.expm1(mat.beta * np.log(y / yb))


def p_hat(mat: Material, s: StrainState):
    """Principal pressures ``(p_rad, p_tan)``."""
    d, e = _check_state(s)
    y = d / e
    eg = e**mat.gamma
    prad = mat.kappa * (3.0 * mat.c * _pow_diff(mat, y) / mat.beta * eg
                        - 1.0 / mat.gamma)
    ptan = prad + 3.0 * mat.kappa * (1.0 - y) * np.asarray(Q_func(mat, y)) * eg
    return _out(prad), _out(ptan)


def eos_F(mat: Material, s: StrainState):
    """Offset pressures ``F = kappa/gamma + p``; ``F_rad`` vanishes at ``y = y_b``."""
    d, e = _check_state(s)
    y = d / e
    eg = e**mat.gamma
    frad = 3.0 * mat.kappa * mat.c * _pow_diff(mat, y) / mat.beta * eg
    ftan = frad + 3.0 * mat.kappa * (1.0 - y) * np.asarray(Q_func(mat, y)) * eg
    return _out(frad), _out(ftan)


def p_hat_from_S(mat: Material, s: StrainState, S: ShearFunction | None = None):
    """Pressures assembled from a shear function through the scale-invariant form.

    ``p_rad = kappa (3 f_rad eta**gamma + (eta**gamma - 1)/gamma)`` and
    ``p_tan = kappa (-3/2 (f_tan + 1 - y) eta**gamma + (eta**gamma - 1)/gamma)``.
    """
    S = PolytropicShear(mat) if S is None else S
    d, e = _check_state(s)
    y = d / e
    eg = e**mat.gamma
    base = (eg - 1.0) / mat.gamma
    frad = np.asarray(S.derivative(y)) * y * y
    ftan = np.asarray(f_tan_from_S(mat, S, y))
    prad = mat.kappa * (3.0 * frad * eg + base)
    ptan = mat.kappa * (-1.5 * (ftan + 1.0 - y) * eg + base)
    return _out(prad), _out(ptan)


def coeff_a(mat: Material, s: StrainState):
    """Hyperbolicity coefficient ``a = d p_rad / d delta``."""
    d, e = _check_state(s)
    y = d / e
    return _out(3.0 * mat.kappa * mat.c * y ** (mat.beta - 1.0) * e ** (mat.gamma - 1.0))


def coeff_b_times(mat: Material, s: StrainState):
    """Nonsingular product ``b (eta - delta)``."""
    d, e = _check_state(s)
    y = d / e
    return _out(9.0 * mat.kappa * mat.c * (mat.beta - mat.gamma)
                * np.asarray(B_func(mat, y)) * e**mat.gamma)


def stored_energy(mat: Material, s: StrainState):
    """Stored energy ``w(delta, eta)`` with ``w(1, 1) = 0``.

    The four ``(gamma, beta)`` cases differ in which of the powers
    ``y**(beta-1)`` and ``eta**(gamma-1)`` degenerate into logarithms; both
    are written as ``(x**p - 1)/p`` so each case is the limit of the generic
    expression.
    """
    d, e = _check_state(s)
    y = d / e
    c, b, g = mat.c, mat.beta, mat.gamma
    shear = 3.0 * c * (powm1_over(b - 1.0, y, mat.eps_branch) - 1.0 + 1.0 / y) / b
    if mat.gamma_is_one:
        w = shear - 1.0 / y - np.log(y) + 1.0 / d + np.log(d)
    else:
        w = (e ** (g - 1.0) * (shear - 1.0 / (g * y)) + powm1_over(g - 1.0, e, 0.0)
             + 1.0 / (g * d))
    return _out(mat.kappa * w)


def stored_energy_fluid(mat: Material, delta):
    """Stored energy of the polytropic fluid with the same ``kappa, gamma``."""
    d = _positive("delta", delta)
    g = mat.gamma
    if mat.gamma_is_one:
        return _out(mat.kappa * (np.log(d) + 1.0 / d - 1.0))
    return _out(mat.kappa / g * ((d ** (g - 1.0) - 1.0) / (g - 1.0) + 1.0 / d - 1.0))


def evaluate(mat: Material, s: StrainState) -> ConstitutiveEval:
    """All constitutive quantities at one strain state."""
    prad, ptan = p_hat(mat, s)
    y = s.y
    return ConstitutiveEval(prad, ptan, coeff_a(mat, s), coeff_b_times(mat, s),
                            stored_energy(mat, s), Q_func(mat, y), B_func(mat, y))


# -- inequality checkers ------------------------------------------------------

def log_uniform(rng: np.random.Generator, n: int, box=SAMPLE_BOX) -> np.ndarray:
    lo, hi = box
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))


def check_hyperelastic_exactness(mat: Material, grid=(0.5, 2.0, 21), h=1e-4,
                                 pressures: Callable | None = None) -> float:
    """Maximum violation of the integrability condition on a grid.

    With ``h1 = p_rad / delta**2`` and ``h2 = (2/3)(p_tan - p_rad)/(delta eta)``
    returns ``max |d h1/d eta - d h2/d delta|`` by five-point central
    differences, each point scaled by ``max(1, |d h1/d eta|, |d h2/d delta|)``
    so that large exponents do not turn roundoff into a violation.

    Parameters
    ----------
    grid : (lo, hi, n)
        Square ``[lo, hi]**2`` sampled with ``n`` points per side.
    pressures : callable, optional
        Replacement for :func:`p_hat` with the same signature, used for
        negative controls.
    """
    lo, hi, n = grid
    if lo <= 2 * h:
        raise DomainError("grid must lie strictly inside the positive quadrant")
    pfun = p_hat if pressures is None else pressures
    d, e = np.meshgrid(np.linspace(lo, hi, int(n)), np.linspace(lo, hi, int(n)))

    def h1(dd, ee):
        return np.asarray(pfun(mat, StrainState(dd, ee))[0]) / dd**2

    def h2(dd, ee):
        pr, pt = pfun(mat, StrainState(dd, ee))
        return (2.0 / 3.0) * (np.asarray(pt) - np.asarray(pr)) / (dd * ee)

    # fourth-order central stencil
    dh1 = (8 * (h1(d, e + h) - h1(d, e - h)) - (h1(d, e + 2 * h) - h1(d, e - 2 * h))) / (12 * h)
    dh2 = (8 * (h2(d + h, e) - h2(d - h, e)) - (h2(d + 2 * h, e) - h2(d - 2 * h, e))) / (12 * h)
    scale = np.maximum(1.0, np.maximum(np.abs(dh1), np.abs(dh2)))
    return float(np.max(np.abs(dh1 - dh2) / scale))


def check_scale_invariance(mat: Material, delta, eta, eps: float) -> tuple[float, float]:
    """Relative residuals of the scaling laws of ``a`` and ``b (eta - delta)``.

    Returns the maxima of ``|eps**(1-gamma) a(eps s) - a(s)| / |a(s)|`` and
    ``|eps**(-gamma) b(eps s)(..) - b(s)(..)| / |b(s)(..)|`` (zero where both
    vanish).
    """
    s = StrainState(delta, eta)
    se = StrainState(np.asarray(delta) * eps, np.asarray(eta) * eps)
    a0 = np.asarray(coeff_a(mat, s))
    a1 = np.asarray(coeff_a(mat, se)) * eps ** (1.0 - mat.gamma)
    b0 = np.asarray(coeff_b_times(mat, s))
    b1 = np.asarray(coeff_b_times(mat, se)) * eps ** (-mat.gamma)
    ra = np.abs(a1 - a0) / np.abs(a0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rb = np.where(b0 == 0.0, np.abs(b1), np.abs(b1 - b0) / np.abs(b0))
    return float(np.max(ra)), float(np.max(rb))


def cbs_spread(mat: Material, eta) -> float:
    """Relative spread of ``p_rad`` along the ray ``delta = y_b eta``.

    With zero boundary shear the ray degenerates to ``delta = 0`` where
    ``p_rad = -kappa/gamma`` identically, so the spread is zero.  The
    sample values of ``eta`` are rounded to the nearest power of two so the
    sampled strains lie on the ray exactly in floating point; otherwise the
    one-ulp offset of ``delta / eta`` is amplified by ``eta**gamma``.
    """
    e = _positive("eta", eta)
    if mat.zero_shear:
        return 0.0
    # snap to powers of two: y_b * eta is then exact and delta / eta == y_b
    e = np.unique(np.exp2(np.round(np.log2(np.atleast_1d(e)))))
    p = np.asarray(p_hat(mat, StrainState(mat.y_b * e, e))[0])
    return float((p.max() - p.min()) / abs(p.mean()))


def linearization(mat: Material, h=1e-5) -> dict:
    """The four partial derivatives of the pressures at ``(1, 1)`` over kappa."""

    def p(d, e):
        return p_hat(mat, StrainState(d, e))

    out = {}
    for key, (dd, de) in {"delta": (h, 0.0), "eta": (0.0, h)}.items():
        plus = p(1.0 + dd, 1.0 + de)
        minus = p(1.0 - dd, 1.0 - de)
        out[f"dprad_d{key}"] = (plus[0] - minus[0]) / (2 * h) / mat.kappa
        out[f"dptan_d{key}"] = (plus[1] - minus[1]) / (2 * h) / mat.kappa
    return out


def linearization_exact(nu: float) -> dict:
    """Linear-elastic values of the partials at the natural state."""
    return {
        "dprad_ddelta": 3.0 * (1.0 - nu) / (1.0 + nu),
        "dprad_deta": -2.0 * (1.0 - 2.0 * nu) / (1.0 + nu),
        "dptan_ddelta": 3.0 * nu / (1.0 + nu),
        "dptan_deta": (1.0 - 2.0 * nu) / (1.0 + nu),
    }


def condgamma(mat: Material) -> bool:
    """Analytic criterion for the strong Baker-Ericksen inequality."""
    c = mat.c
    bound = min(mat.gamma, 3.0 * c * mat.gamma - 2.0 * (1.0 - 2.0 * mat.nu) / (1.0 + mat.nu))
    return mat.beta >= bound


class BEResult(NamedTuple):
    passed: bool
    min_Q: float
    witness: float | None
    predicate: bool | None


def baker_ericksen(mat: Material, mode: str = "weak", n: int = 2001,
                   tol: float = TOL) -> BEResult:
    """Sampled Baker-Ericksen verdict.

    The weak form needs ``Q >= -tol`` on ``(0, 1]``, the strong form on
    ``(0, inf)``.  ``Q`` is monotone, so the sampled minimum is completed by
    the analytic end limits; the strong verdict therefore coincides with
    :func:`condgamma`.

    Returns
    -------
    BEResult
        ``witness`` is a ``y`` with ``Q(y) < 0`` when the check fails.
    """
    if mode not in ("weak", "strong"):
        raise ValueError("mode must be 'weak' or 'strong'")
    lo, hi = SAMPLE_BOX
    if mode == "weak":
        ys = np.geomspace(lo, 1.0, n)
    else:
        ys = np.geomspace(lo, hi, n)
    qs = np.asarray(Q_func(mat, ys))
    q0, qinf = Q_limits(mat)
    ends = [(q0, 0.0)] + ([(qinf, math.inf)] if mode == "strong" else [])
    k = int(np.argmin(qs))
    min_q, witness = float(qs[k]), float(ys[k])
    for qv, yv in ends:
        if qv < min_q:
            min_q, witness = qv, yv
    passed = min_q >= -tol
    if passed:
        witness = None
    elif qs[k] >= 0.0 or not math.isfinite(witness) or witness == 0.0:
        witness = _find_witness(mat, witness)
    pred = condgamma(mat) if mode == "strong" else None
    return BEResult(passed, min_q, witness, pred)


def _find_witness(mat: Material, toward: float) -> float | None:
    # march geometrically toward the failing end until Q < 0
    y = SAMPLE_BOX[1] if toward > 1.0 else SAMPLE_BOX[0]
    step = 10.0 if toward > 1.0 else 0.1
    for _ in range(600):
        if Q_func(mat, y) < 0.0:
            return y
        y *= step
        if not (1e-300 < y < 1e300):
            break
    return None


def check_nonnegative_energy(mat: Material, mode: str = "weak", n: int = 201,
                             tol: float = TOL) -> tuple[bool, float]:
    """Sampled non-negativity of the stored energy.

    The weak form samples ``eta >= delta``; the strong form the full box.
    Returns the verdict and the sampled minimum.
    """
    lo, hi = SAMPLE_BOX
    d, e = np.meshgrid(np.geomspace(lo, hi, n), np.geomspace(lo, hi, n))
    if mode == "weak":
        mask = e >= d
        d, e = d[mask], e[mask]
    w = np.asarray(stored_energy(mat, StrainState(d, e)))
    scale = np.maximum(1.0, np.abs(1.0 / d) + e ** (mat.gamma - 1.0))
    m = float(np.min(w / scale))
    return m >= -tol, m


# -- Saint-Venant Kirchhoff ----------------------------------------------------

class SVKEval(NamedTuple):
    w: float
    p_rad: float
    p_tan: float
    a: float


def _svk_coeffs(nu):
    return (3.0 * (1.0 - nu) / (8.0 * (1.0 + nu)), 3.0 * nu / (2.0 * (1.0 + nu)),
            3.0 / (4.0 * (1.0 + nu)))


def svk_eval(nu: float, kappa: float, s: StrainState) -> SVKEval:
    """Saint-Venant Kirchhoff stored energy, pressures and ``a``."""
    d, e = _check_state(s)
    A, Bp, C0 = _svk_coeffs(nu)
    e83, e23, e43 = e ** (8.0 / 3.0), e ** (2.0 / 3.0), e ** (4.0 / 3.0)
    w = (A * e83 / d**4 + Bp * e23 / d**2 + C0 / e43 - 0.75 * e43 / d**2
         - 1.5 / e23 + 9.0 / 8.0)
    prad = -4.0 * A * e83 / d**3 - 2.0 * Bp * e23 / d + 1.5 * e43 / d
    w_eta = _svk_w_eta(A, Bp, C0, d, e)
    ptan = prad + 1.5 * d * e * w_eta
    a = 12.0 * A * e83 / d**4 + 2.0 * Bp * e23 / d**2 - 1.5 * e43 / d**2
    k = kappa
    return SVKEval(_out(k * w), _out(k * prad), _out(k * ptan), _out(k * a))


def _svk_w_eta(A, Bp, C0, d, e):
    return (8.0 / 3.0 * A * e ** (5.0 / 3.0) / d**4 + 2.0 / 3.0 * Bp * e ** (-1.0 / 3.0) / d**2
            - 4.0 / 3.0 * C0 * e ** (-7.0 / 3.0) - e ** (1.0 / 3.0) / d**2 + e ** (-5.0 / 3.0))


def _svk_w_etaeta(A, Bp, C0, d, e):
    return (40.0 / 9.0 * A * e ** (2.0 / 3.0) / d**4 - 2.0 / 9.0 * Bp * e ** (-4.0 / 3.0) / d**2
            + 28.0 / 9.0 * C0 * e ** (-10.0 / 3.0) - e ** (-2.0 / 3.0) / (3.0 * d**2)
            - 5.0 / 3.0 * e ** (-8.0 / 3.0))


def svk_be_ratio(nu: float, kappa: float, s: StrainState):
    """``(p_tan - p_rad)/(eta - delta)`` for SVK, continuous on the diagonal."""
    d, e = _check_state(s)
    A, Bp, C0 = _svk_coeffs(nu)
    near = np.abs(e - d) <= 1e-6 * d
    diff = np.where(near, 1.0, e - d)
    ratio = 1.5 * d * e * _svk_w_eta(A, Bp, C0, d, e) / diff
    diag = 1.5 * d * d * _svk_w_etaeta(A, Bp, C0, d, d)
    return _out(kappa * np.where(near, diag, ratio))


def polytropic_be_ratio(mat: Material, s: StrainState):
    """``(p_tan - p_rad)/(eta - delta) = 3 kappa Q(y) eta**(gamma-1)``."""
    d, e = _check_state(s)
    return _out(3.0 * mat.kappa * np.asarray(Q_func(mat, d / e)) * e ** (mat.gamma - 1.0))
