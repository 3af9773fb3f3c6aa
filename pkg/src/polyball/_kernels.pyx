# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shear-flow integrator.

Mirrors :mod:`polyball._pykernel` step for step; see that module for the
system being integrated and the meaning of the arguments.
"""

import time

import numpy as np

from libc.math cimport exp, expm1, fabs, isfinite, log, pow, sqrt, INFINITY
from libc.stdlib cimport free, malloc, realloc

cdef enum:
    HORIZON = 0
    BOUNDARY = 1
    EXTINCT = 2
    FLOOR = 3
    MAX_STEPS = 4
    TIMEOUT = 5
    UNDERFLOW = 6

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = -71.0 / 57600.0, E3 = 71.0 / 16695.0, E4 = -71.0 / 1920.0
cdef double E5 = 17253.0 / 339200.0, E6 = -22.0 / 525.0, E7 = 1.0 / 40.0

_P_ROWS = (
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
cdef double P[6][4]
for _i in range(6):
    for _j in range(4):
        P[_i][_j] = _P_ROWS[_i][_j]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef int BISECT_ITERS = 80
cdef int CHECK_CLOCK_EVERY = 64
cdef double TIE = 1e-9


cdef struct Params:
    double beta
    double gamma
    double arel
    double bm1


cdef inline void rhs(double s, double q, double L, Params* p, double* out) noexcept nogil:
    cdef double ypow, w, g, b_over_y, grav
    if p.bm1 == 0.0:
        ypow = exp(-q)
        w = -expm1(-q)
    else:
        g = 1.0 - p.bm1 * q
        if g <= 0.0:
            ypow = 0.0
            w = 1.0 if p.bm1 > 0.0 else -INFINITY
        else:
            ypow = g
            w = -expm1(log(g) / p.bm1)
    b_over_y = (q - w + p.bm1 * q * w) / p.beta
    grav = exp(2.0 * s + (2.0 - p.gamma) * L)
    if p.arel != 0.0:
        grav *= 1.0 + p.arel * exp(-L)
    out[0] = grav - 3.0 * w * ypow - 3.0 * (p.beta - p.gamma) * b_over_y
    out[1] = -3.0 * w


cdef inline double log_delta(double q, double L, double beta) noexcept nogil:
    cdef double bm1 = beta - 1.0, g
    if bm1 == 0.0:
        return L - q
    g = 1.0 - bm1 * q
    if g <= 0.0:
        return -INFINITY
    return L + log(g) / bm1


cdef inline double dense(double theta, double h, double y0, double* k) noexcept nogil:
    # k holds stages 1, 3, 4, 5, 6, 7 for one component
    cdef double t2 = theta * theta
    cdef double t3 = t2 * theta
    cdef double t4 = t3 * theta
    cdef double acc = 0.0
    cdef int i
    for i in range(6):
        acc += (P[i][0] * theta + P[i][1] * t2 + P[i][2] * t3 + P[i][3] * t4) * k[i]
    return y0 + h * acc


cdef double bisect_event(int kind, double h, double s_old, double q0, double L0,
                         double* kq, double* kL, double target, double beta) noexcept nogil:
    # kind 0: q >= target; 1: 1 - (beta-1) q <= 0; 2: log delta < target
    cdef double lo = 0.0, hi = 1.0, mid, qm
    cdef double scale = fabs(s_old) if fabs(s_old) > 1.0 else 1.0
    cdef bint hit
    cdef int it
    for it in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        qm = dense(mid, h, q0, kq)
        if kind == 0:
            hit = qm >= target
        elif kind == 1:
            hit = 1.0 - (beta - 1.0) * qm <= 0.0
        else:
            hit = log_delta(qm, dense(mid, h, L0, kL), beta) < target
        if hit:
            hi = mid
        else:
            lo = mid
        if (hi - lo) * fabs(h) <= 1e-15 * scale:
            break
    return hi


cdef double initial_step(double s0, double q0, double L0, double* f0, Params* p,
                         double rtol, double atol) noexcept nogil:
    cdef double sc0 = atol + rtol * fabs(q0)
    cdef double sc1 = atol + rtol * fabs(L0)
    cdef double d0 = sqrt(((q0 / sc0) ** 2 + (L0 / sc1) ** 2) / 2.0)
    cdef double d1 = sqrt(((f0[0] / sc0) ** 2 + (f0[1] / sc1) ** 2) / 2.0)
    cdef double h0, d2, h1
    cdef double f1[2]
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    rhs(s0 + h0, q0 + h0 * f0[0], L0 + h0 * f0[1], p, f1)
    d2 = sqrt((((f1[0] - f0[0]) / sc0) ** 2 + ((f1[1] - f0[1]) / sc1) ** 2) / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
    else:
        h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
    return h1 if h1 < 100.0 * h0 else 100.0 * h0


cdef class _Rows:
    cdef double* data
    cdef Py_ssize_t n
    cdef Py_ssize_t cap

    def __cinit__(self):
        self.cap = 1024
        self.n = 0
        self.data = <double*> malloc(3 * self.cap * sizeof(double))
        if self.data == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.data)

    cdef int push(self, double s, double q, double L) except -1:
        cdef double* grown
        if self.n == self.cap:
            grown = <double*> realloc(self.data, 6 * self.cap * sizeof(double))
            if grown == NULL:
                raise MemoryError()
            self.data = grown
            self.cap *= 2
        self.data[3 * self.n] = s
        self.data[3 * self.n + 1] = q
        self.data[3 * self.n + 2] = L
        self.n += 1
        return 0

    cdef object to_array(self):
        out = np.empty((self.n, 3), dtype=np.float64)
        cdef double[:, ::1] view = out
        cdef Py_ssize_t i
        for i in range(self.n):
            view[i, 0] = self.data[3 * i]
            view[i, 1] = self.data[3 * i + 1]
            view[i, 2] = self.data[3 * i + 2]
        return out


def shear_flow(double beta, double gamma, double arel, double s0, double q0, double L0,
               double s_end, double q_b, bint detect_boundary, bint stop_at_boundary,
               double log_floor, double rtol, double atol, double h0, long max_steps,
               double max_seconds):
    """Integrate the shear-flow system with Dormand-Prince 5(4).

    Same signature and return value as
    :func:`polyball._pykernel.shear_flow`.
    """
    cdef Params p
    p.beta = beta
    p.gamma = gamma
    p.arel = arel
    p.bm1 = beta - 1.0
    cdef _Rows rows = _Rows()
    cdef Py_ssize_t boundary_index = -1
    cdef double s = s0, q = q0, L = L0, h, sn, qn, Ln, e0, e1, sc0, sc1, err
    cdef double theta_b, theta_t, th, qt, factor
    cdef double k1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef double k5[2]
    cdef double k6[2]
    cdef double k7[2]
    cdef double kq[6]
    cdef double kL[6]
    cdef int terminal, status = HORIZON
    cdef long steps = 0
    cdef double bm1 = p.bm1
    cdef bint extinct_check = bm1 > 0.0
    cdef bint floor_check = log_floor > -INFINITY
    cdef double t_start = time.perf_counter()

    rows.push(s0, q0, L0)
    rhs(s, q, L, &p, k1)
    if h0 <= 0.0:
        h = initial_step(s, q, L, k1, &p, rtol, atol)
    else:
        h = h0
    while True:
        if s >= s_end:
            status = HORIZON
            break
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if max_seconds > 0.0 and steps % CHECK_CLOCK_EVERY == 0:
            if time.perf_counter() - t_start > max_seconds:
                status = TIMEOUT
                break
        if s_end - s <= 1e-14 * (fabs(s) if fabs(s) > 1.0 else 1.0):
            status = HORIZON
            break
        steps += 1
        if s + h > s_end:
            h = s_end - s
        if h < 1e-14 * (fabs(s) if fabs(s) > 1.0 else 1.0):
            status = UNDERFLOW
            break
        rhs(s + 0.2 * h, q + h * A21 * k1[0], L + h * A21 * k1[1], &p, k2)
        rhs(s + 0.3 * h,
            q + h * (A31 * k1[0] + A32 * k2[0]),
            L + h * (A31 * k1[1] + A32 * k2[1]), &p, k3)
        rhs(s + 0.8 * h,
            q + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            L + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]), &p, k4)
        rhs(s + 8.0 / 9.0 * h,
            q + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            L + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]), &p, k5)
        rhs(s + h,
            q + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            L + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
            &p, k6)
        qn = q + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0])
        Ln = L + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1])
        sn = s + h
        if not (isfinite(qn) and isfinite(Ln)):
            h *= MIN_FACTOR
            continue
        rhs(sn, qn, Ln, &p, k7)
        e0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0])
        e1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1])
        sc0 = atol + rtol * (fabs(q) if fabs(q) > fabs(qn) else fabs(qn))
        sc1 = atol + rtol * (fabs(L) if fabs(L) > fabs(Ln) else fabs(Ln))
        err = sqrt(((e0 / sc0) ** 2 + (e1 / sc1) ** 2) / 2.0)
        if err > 1.0:
            factor = SAFETY * pow(err, -0.2)
            h *= factor if factor > MIN_FACTOR else MIN_FACTOR
            continue

        kq[0] = k1[0]; kq[1] = k3[0]; kq[2] = k4[0]; kq[3] = k5[0]; kq[4] = k6[0]; kq[5] = k7[0]
        kL[0] = k1[1]; kL[1] = k3[1]; kL[2] = k4[1]; kL[3] = k5[1]; kL[4] = k6[1]; kL[5] = k7[1]
        theta_b = 2.0
        theta_t = 2.0
        terminal = HORIZON
        if detect_boundary and q < q_b and q_b <= qn:
            theta_b = bisect_event(0, h, s, q, L, kq, kL, q_b, beta)
        if extinct_check and 1.0 - bm1 * qn <= 0.0 and 1.0 - bm1 * q > 0.0:
            theta_t = bisect_event(1, h, s, q, L, kq, kL, 0.0, beta)
            terminal = EXTINCT
        if floor_check and log_delta(qn, Ln, beta) < log_floor and log_floor <= log_delta(q, L, beta):
            th = bisect_event(2, h, s, q, L, kq, kL, log_floor, beta)
            if th < theta_t:
                theta_t = th
                terminal = FLOOR
        # ties within rounding go to the boundary
        if theta_b <= 1.0 and theta_b <= theta_t + TIE:
            rows.push(s + theta_b * h, dense(theta_b, h, q, kq), dense(theta_b, h, L, kL))
            boundary_index = rows.n - 1
            detect_boundary = False
            if stop_at_boundary:
                status = BOUNDARY
                break
        if theta_t <= 1.0:
            qt = dense(theta_t, h, q, kq)
            if terminal == EXTINCT:
                qt = 1.0 / bm1
            rows.push(s + theta_t * h, qt, dense(theta_t, h, L, kL))
            status = terminal
            break
        s = sn
        q = qn
        L = Ln
        k1[0] = k7[0]
        k1[1] = k7[1]
        rows.push(s, q, L)
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * pow(err, -0.2)
            if factor > MAX_FACTOR:
                factor = MAX_FACTOR
        h *= factor
    return status, rows.to_array(), boundary_index, h
