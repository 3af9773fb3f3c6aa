"""Independent reference computations and parameter samplers for the tests."""

import math

import numpy as np
from scipy.integrate import solve_ivp


def lane_emden(n: float, xi_max: float = 10.0, rtol: float = 1e-12, atol: float = 1e-14):
    """Lane-Emden ``theta'' + 2 theta'/xi + theta**n = 0`` from the center.

    Returns the dense solution and the first zero ``xi_1``.
    """
    x0 = 1e-6
    th0 = 1.0 - x0**2 / 6.0 + n * x0**4 / 120.0
    dth0 = -x0 / 3.0 + n * x0**3 / 30.0

    def rhs(x, z):
        th = z[0]
        thn = math.copysign(abs(th) ** n, th)
        return [z[1], -thn - 2.0 * z[1] / x]

    def zero(x, z):
        return z[0]

    zero.terminal = True
    zero.direction = -1
    sol = solve_ivp(rhs, (x0, xi_max), [th0, dth0], method="DOP853", rtol=rtol, atol=atol,
                    events=zero, dense_output=True)
    return sol, float(sol.t_events[0][0])


def sinc_profile(xi):
    xi = np.asarray(xi, dtype=float)
    return np.where(xi == 0.0, 1.0, np.sin(xi) / np.where(xi == 0.0, 1.0, xi))


def sample_VA(rng, n):
    """``gamma > 2``, ``1 < beta <= gamma``, ``nu`` in ``(-0.9, 0.5)``."""
    out = []
    while len(out) < n:
        g = rng.uniform(2.0, 6.0)
        b = rng.uniform(1.0, g)
        nu = rng.uniform(-0.9, 0.5)
        if 1.0 < b <= g and g > 2.0:
            out.append((float(nu), float(g), float(b)))
    return out


def sample_VB(rng, n):
    """Rejection sampling of the proven type-B set."""
    from polyball.atlas import in_VB
    from polyball.constitutive import Material

    out = []
    while len(out) < n:
        nu = rng.uniform(-0.9, 0.5)
        g = rng.uniform(0.05, 1.0)
        b = rng.uniform(-2.0, 1.0)
        if abs(b) < 1e-3:
            continue
        mat = Material(nu, g, b, strict=False)
        if mat.admissible and in_VB(mat):
            out.append((float(nu), float(g), float(b)))
    return out


def sample_admissible(rng, n, gamma_max=2.0, nu_min=-0.9):
    """Admissible ``(nu, gamma, beta)`` with ``gamma < gamma_max``."""
    out = []
    while len(out) < n:
        nu = rng.uniform(nu_min, 0.5)
        g = rng.uniform(0.1, gamma_max)
        bmax = 3.0 * g * (1.0 - nu) / (1.0 + nu)
        b = rng.uniform(-1.0, min(bmax, 6.0))
        if abs(b) < 1e-2 or b > bmax * (1 - 1e-9):
            continue
        out.append((float(nu), float(g), float(b)))
    return out
