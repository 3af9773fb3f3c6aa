"""Pure-Python reference implementation of the shear-flow integrator.

The compiled module ``polyball._kernels`` mirrors this file line for line;
both are selected through :mod:`polyball._backend`.

The integrated system lives in logarithmic radius ``s`` with state
``(q, L)``::

    q = (1 - y**(beta - 1)) / (beta - 1)       (q = -log y when beta == 1)
    L = log(eta / delta_c)

    dq/ds = exp(2 s + (2 - gamma) L) (1 + a exp(-L))
            - 3 (1 - y) y**(beta - 1) - 3 (beta - gamma) B(y) / y
    dL/ds = -3 (1 - y)

``a = 0`` gives the static problem, ``gamma = 4/3`` with ``a != 0`` the
homologous profile.  Both right-hand sides stay bounded as ``y -> 0`` when
``beta > 1``, so extinction ``y**(beta - 1) = 0`` is a regular crossing.
"""

from __future__ import annotations

import math
import time

import numpy as np

# status codes shared with the compiled kernel
HORIZON = 0
BOUNDARY = 1
EXTINCT = 2
FLOOR = 3
MAX_STEPS = 4
TIMEOUT = 5
UNDERFLOW = 6
NONFINITE = 7

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (-71.0 / 57600.0, 71.0 / 16695.0, -71.0 / 1920.0,
                                17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0)

# quartic dense output, rows for stages 1, 3, 4, 5, 6, 7
_P = (
    (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0),
    (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0),
    (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0),
    (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0),
    (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0),
    (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0),
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_BISECT_ITERS = 80
_CHECK_CLOCK_EVERY = 64
_TIE = 1e-9


def _rhs(s, q, L, beta, gamma, arel):
    bm1 = beta - 1.0
    if bm1 == 0.0:
        ypow = math.exp(-q)
        w = -math.expm1(-q)
    else:
        g = 1.0 - bm1 * q
        if g <= 0.0:
            ypow = 0.0
            w = 1.0 if bm1 > 0.0 else -math.inf
        else:
            ypow = g
            w = -math.expm1(math.log(g) / bm1)
    b_over_y = (q - w + bm1 * q * w) / beta
    grav = math.exp(2.0 * s + (2.0 - gamma) * L)
    if arel != 0.0:
        grav *= 1.0 + arel * math.exp(-L)
    return grav - 3.0 * w * ypow - 3.0 * (beta - gamma) * b_over_y, -3.0 * w


def _log_delta(q, L, beta):
    # log(delta / delta_c) = L + log y
    bm1 = beta - 1.0
    if bm1 == 0.0:
        return L - q
    g = 1.0 - bm1 * q
    if g <= 0.0:
        return -math.inf
    return L + math.log(g) / bm1


def _dense(theta, h, y0, k1, k3, k4, k5, k6, k7):
    t2 = theta * theta
    t3 = t2 * theta
    t4 = t3 * theta
    c = [p[0] * theta + p[1] * t2 + p[2] * t3 + p[3] * t4 for p in _P]
    return y0 + h * (c[0] * k1 + c[1] * k3 + c[2] * k4 + c[3] * k5 + c[4] * k6 + c[5] * k7)


def _bisect(fun, h, s_old):
    """Locate the first sign change of ``fun`` on theta in [0, 1]."""
    lo, hi = 0.0, 1.0
    scale = max(1.0, abs(s_old))
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if fun(mid):
            hi = mid
        else:
            lo = mid
        if (hi - lo) * abs(h) <= 1e-15 * scale:
            break
    return hi


def _initial_step(s0, q0, L0, f0, beta, gamma, arel, rtol, atol):
    sc0 = atol + rtol * abs(q0)
    sc1 = atol + rtol * abs(L0)
    d0 = math.sqrt(((q0 / sc0) ** 2 + (L0 / sc1) ** 2) / 2.0)
    d1 = math.sqrt(((f0[0] / sc0) ** 2 + (f0[1] / sc1) ** 2) / 2.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    f1 = _rhs(s0 + h0, q0 + h0 * f0[0], L0 + h0 * f0[1], beta, gamma, arel)
    d2 = math.sqrt((((f1[0] - f0[0]) / sc0) ** 2 + ((f1[1] - f0[1]) / sc1) ** 2) / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def shear_flow(beta, gamma, arel, s0, q0, L0, s_end, q_b, detect_boundary,
               stop_at_boundary, log_floor, rtol, atol, h0, max_steps, max_seconds):
    """Integrate the shear-flow system with Dormand-Prince 5(4).

    Parameters
    ----------
    beta, gamma, arel : float
        Shear exponent, polytropic exponent and relative homologous
        constant ``alpha / delta_c``.
    s0, q0, L0 : float
        Initial log radius and state.
    s_end : float
        Horizon in ``s``.
    q_b : float
        Boundary value of ``q`` (``inf`` disables the event).
    detect_boundary, stop_at_boundary : bool
        Enable the upward crossing of ``q_b`` and whether it terminates.
    log_floor : float
        Terminal event on ``log(delta / delta_c) < log_floor``; ``-inf``
        disables it.
    rtol, atol : float
        Mixed error tolerances.
    h0 : float
        Initial step; a value ``<= 0`` selects it automatically.
    max_steps : int
        Budget of attempted steps.
    max_seconds : float
        Wall-clock budget; ``<= 0`` means unlimited.

    Returns
    -------
    status : int
        One of the module-level status codes.
    samples : ndarray, shape (n, 3)
        Rows ``(s, q, L)`` at accepted steps and located events.
    boundary_index : int
        Row of the boundary event in ``samples`` or -1.
    h_last : float
        Last proposed step size, usable to warm-start a continuation.
    """
    rows = [(s0, q0, L0)]
    boundary_index = -1
    s, q, L = s0, q0, L0
    k1 = _rhs(s, q, L, beta, gamma, arel)
    if h0 <= 0.0:
        h = _initial_step(s, q, L, k1, beta, gamma, arel, rtol, atol)
    else:
        h = h0
    bm1 = beta - 1.0
    extinct_check = bm1 > 0.0
    floor_check = log_floor > -math.inf
    t_start = time.perf_counter()
    steps = 0
    status = HORIZON
    while True:
        if s >= s_end:
            status = HORIZON
            break
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if max_seconds > 0.0 and steps % _CHECK_CLOCK_EVERY == 0:
            if time.perf_counter() - t_start > max_seconds:
                status = TIMEOUT
                break
        if s_end - s <= 1e-14 * max(1.0, abs(s)):
            status = HORIZON
            break
        steps += 1
        if s + h > s_end:
            h = s_end - s
        if h < 1e-14 * max(1.0, abs(s)):
            status = UNDERFLOW
            break
        k2 = _rhs(s + 0.2 * h, q + h * _A21 * k1[0], L + h * _A21 * k1[1], beta, gamma, arel)
        k3 = _rhs(s + 0.3 * h,
                  q + h * (_A31 * k1[0] + _A32 * k2[0]),
                  L + h * (_A31 * k1[1] + _A32 * k2[1]), beta, gamma, arel)
        k4 = _rhs(s + 0.8 * h,
                  q + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
                  L + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]), beta, gamma, arel)
        k5 = _rhs(s + 8.0 / 9.0 * h,
                  q + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
                  L + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
                  beta, gamma, arel)
        k6 = _rhs(s + h,
                  q + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0]
                           + _A65 * k5[0]),
                  L + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1]
                           + _A65 * k5[1]),
                  beta, gamma, arel)
        qn = q + h * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0] + _B5 * k5[0] + _B6 * k6[0])
        Ln = L + h * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1] + _B5 * k5[1] + _B6 * k6[1])
        sn = s + h
        if not (math.isfinite(qn) and math.isfinite(Ln)):
            h *= _MIN_FACTOR
            continue
        k7 = _rhs(sn, qn, Ln, beta, gamma, arel)
        e0 = h * (_E1 * k1[0] + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0] + _E6 * k6[0]
                  + _E7 * k7[0])
        e1 = h * (_E1 * k1[1] + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1] + _E6 * k6[1]
                  + _E7 * k7[1])
        sc0 = atol + rtol * max(abs(q), abs(qn))
        sc1 = atol + rtol * max(abs(L), abs(Ln))
        err = math.sqrt(((e0 / sc0) ** 2 + (e1 / sc1) ** 2) / 2.0)
        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue

        # accepted step: look for events on the dense interpolant
        kq = (k1[0], k3[0], k4[0], k5[0], k6[0], k7[0])
        kL = (k1[1], k3[1], k4[1], k5[1], k6[1], k7[1])
        theta_b = 2.0
        theta_t = 2.0
        terminal = HORIZON
        if detect_boundary and q < q_b <= qn:
            theta_b = _bisect(lambda th: _dense(th, h, q, *kq) >= q_b, h, s)
        if extinct_check and 1.0 - bm1 * qn <= 0.0 and 1.0 - bm1 * q > 0.0:
            theta_t = _bisect(lambda th: 1.0 - bm1 * _dense(th, h, q, *kq) <= 0.0, h, s)
            terminal = EXTINCT
        if floor_check and _log_delta(qn, Ln, beta) < log_floor <= _log_delta(q, L, beta):
            th = _bisect(lambda th: _log_delta(_dense(th, h, q, *kq), _dense(th, h, L, *kL),
                                               beta) < log_floor, h, s)
            if th < theta_t:
                theta_t = th
                terminal = FLOOR
        # ties within rounding go to the boundary
        if theta_b <= 1.0 and theta_b <= theta_t + _TIE:
            rows.append((s + theta_b * h, _dense(theta_b, h, q, *kq), _dense(theta_b, h, L, *kL)))
            boundary_index = len(rows) - 1
            detect_boundary = False
            if stop_at_boundary:
                status = BOUNDARY
                break
        if theta_t <= 1.0:
            qt = _dense(theta_t, h, q, *kq)
            if terminal == EXTINCT:
                qt = 1.0 / bm1
            rows.append((s + theta_t * h, qt, _dense(theta_t, h, L, *kL)))
            status = terminal
            break
        s, q, L = sn, qn, Ln
        k1 = k7
        rows.append((s, q, L))
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        h *= factor
    return status, np.array(rows, dtype=float), boundary_index, h
